//! Data-driven viscosity modeling with input-convex neural networks and
//! finite element solution of the resulting nonlinear Stokes problem.

pub mod dataset;
pub mod error;
pub mod experiments;
pub mod fem;
pub mod icnn;
pub mod rheology;
pub mod verifier;

pub use dataset::{RheologyDataset, Sample};
pub use error::{Error, Result};
pub use icnn::IcnnModel;
pub use rheology::{CarreauParams, PowerLawParams, SymTensor2, ViscosityModel};
pub use verifier::{AssumptionCertificate, VerifierConfig};
