//! Power-grid criticality analysis toolkit.
//!
//! The library identifies critical transmission lines through linear outage
//! sensitivities and explains their criticality structurally:
//!
//! * [`netmodel`] — buses, branches, and the undirected simple-graph view;
//! * [`caseio`] — MATPOWER / CSV / JSON ingestion and JSON emission;
//! * [`linalg`] — dense LU factorization generic over the scalar type;
//! * [`dcsens`] — DC power flow and the ISF → PTDF → LODF sensitivity chain;
//! * [`contingency`] — N-1 and N-2 scans ranked by maximum |LODF| impact;
//! * [`graphlets`] — exact ESU enumeration of 4-node graphlets (M1–M6) with
//!   per-edge incidence counts;
//! * [`report`] — joined criticality/graphlet tables and bubble-chart data;
//! * [`oracle`] — independent brute-force validators for every fast path.
//!
//! All numeric kernels are generic over [`scalar::Scalar`] (`f32` or `f64`);
//! the `*64` aliases below fix the default double-precision instantiations.

pub mod caseio;
pub mod contingency;
pub mod dcsens;
pub mod error;
pub mod graphlets;
pub mod linalg;
pub mod netmodel;
pub mod oracle;
pub mod report;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision network (the default instantiation).
pub type Network64 = netmodel::Network<f64>;
/// Single-precision network.
pub type Network32 = netmodel::Network<f32>;
/// Double-precision ISF matrix.
pub type IsfMatrix64 = dcsens::IsfMatrix<f64>;
/// Double-precision PTDF matrix.
pub type PtdfMatrix64 = dcsens::PtdfMatrix<f64>;
/// Double-precision LODF matrix.
pub type LodfMatrix64 = dcsens::LodfMatrix<f64>;
/// Double-precision branch-flow vector.
pub type FlowVector64 = dcsens::FlowVector<f64>;
/// Double-precision sensitivity stack (ISF + PTDF + LODF).
pub type SensitivityStack64 = dcsens::SensitivityStack<f64>;
