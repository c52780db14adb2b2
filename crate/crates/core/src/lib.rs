pub mod complexfn;
pub mod curve;
pub mod delta_shell;
pub mod detector;
pub mod error;
pub mod expcli;
pub mod histories;
pub mod oracle_propagator;
pub mod resonance_model;
pub(crate) mod quadrature;

pub use curve::{SurvivalCurve, SurvivalSample};
pub use delta_shell::DeltaShellSystem;
pub use detector::{DetectorSystem, SearchRegion};
pub use error::{DecayError, Result};
pub use histories::{AmplitudeSource, HistoryDecomposition};
pub use resonance_model::{ClosedFormConvention, ResonancePole};
pub use num_complex::Complex64;
