//! Reference configurations: the proposed optimized lateral-force experiment
//! and the previously performed one it is derived from.

use crate::model::units::{nm, pn, UM};
use crate::model::{
    CorrugationGeometry, ExperimentConfig, LayeredPlate, LayeredSphere, Material, MeasurementPoint,
    Shell,
};

pub const RHO_POLYSTYRENE: f64 = 1.06e3;
pub const RHO_CR: f64 = 7.14e3;
pub const RHO_AU: f64 = 19.28e3;
pub const RHO_EPOXY: f64 = 1.08e3;

pub fn polystyrene() -> Material {
    Material::new("polystyrene", RHO_POLYSTYRENE).expect("valid density")
}

pub fn chromium() -> Material {
    Material::new("Cr", RHO_CR).expect("valid density")
}

pub fn gold() -> Material {
    Material::new("Au", RHO_AU).expect("valid density")
}

pub fn epoxy() -> Material {
    Material::new("epoxy", RHO_EPOXY).expect("valid density")
}

/// Polystyrene sphere, R = 97 µm, coated with 10 nm Cr then 50 nm Au.
pub fn sphere() -> LayeredSphere {
    LayeredSphere::new(
        97.0 * UM,
        polystyrene(),
        vec![
            Shell {
                material: chromium(),
                thickness: nm(10.0),
            },
            Shell {
                material: gold(),
                thickness: nm(50.0),
            },
        ],
    )
    .expect("valid sphere")
}

/// Hard-epoxy grating coated with 300 nm Au.
pub fn plate() -> LayeredPlate {
    LayeredPlate::new(epoxy(), gold(), nm(300.0)).expect("valid plate")
}

/// Proposed design: A1 = 90 nm, A2 = 33 nm, period 200 nm.
pub fn proposed_config() -> ExperimentConfig {
    ExperimentConfig {
        sphere: sphere(),
        plate: plate(),
        corrugation: CorrugationGeometry::new(nm(90.0), nm(33.0), nm(200.0)).expect("valid"),
    }
}

/// Error budgets of the proposed experiment: 1.11 pN at 125 nm, 0.47 pN at 137.3 nm.
pub fn proposed_points() -> Vec<MeasurementPoint> {
    vec![
        MeasurementPoint::new(nm(125.0), pn(1.11)),
        MeasurementPoint::new(nm(137.3), pn(0.47)),
    ]
}

/// Performed experiment: A1 = 85.4 nm, A2 = 13.7 nm, period 574.7 nm, with the
/// same layered bodies as the proposal.
pub fn performed_config() -> ExperimentConfig {
    ExperimentConfig {
        sphere: sphere(),
        plate: plate(),
        corrugation: CorrugationGeometry::new(nm(85.4), nm(13.7), nm(574.7)).expect("valid"),
    }
}

pub fn performed_points() -> Vec<MeasurementPoint> {
    vec![
        MeasurementPoint::new(nm(121.1), pn(11.1)),
        MeasurementPoint::new(nm(124.7), pn(4.7)),
        MeasurementPoint::new(nm(137.3), pn(2.5)),
    ]
}
