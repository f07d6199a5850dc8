//! Lateral Yukawa-type forces between layered, sinusoidally corrugated
//! sphere-plate bodies, and the exclusion constraints on the Yukawa parameters
//! (α, λ) that follow from a lateral-force error budget.

pub mod constraints;
pub mod error;
pub mod force;
pub mod model;
pub mod optimizer;
pub mod oracle;
pub mod presets;
pub mod quadrature;
pub mod specfun;
pub mod verify;

pub use error::{Error, ModelError, Result};
pub use force::{LateralForceResult, YukawaParams};
pub use model::{
    CorrugationGeometry, ExperimentConfig, LayeredPlate, LayeredSphere, Material, MeasurementPoint,
    PhysicalConstants, Shell, Violation,
};
