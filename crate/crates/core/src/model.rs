//! Domain types for layered, corrugated sphere-plate configurations.
//!
//! Everything here is stored in SI units (m, kg/m³, N). Conversions from the
//! nm / pN values used in config files happen at the I/O boundary through
//! [`units`].

use std::fmt;

use crate::error::ModelError;

/// Unit conversions used at the I/O boundary.
pub mod units {
    pub const NM: f64 = 1e-9;
    pub const UM: f64 = 1e-6;
    pub const PN: f64 = 1e-12;

    pub fn nm(value: f64) -> f64 {
        value * NM
    }

    pub fn to_nm(meters: f64) -> f64 {
        meters / NM
    }

    pub fn pn(value: f64) -> f64 {
        value * PN
    }

    pub fn to_pn(newtons: f64) -> f64 {
        newtons / PN
    }
}

/// Fundamental constants entering the Yukawa force and the Compton relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Newtonian gravitational constant, m³ kg⁻¹ s⁻².
    pub g: f64,
    /// Reduced Planck constant, J s.
    pub hbar: f64,
    /// Speed of light, m/s.
    pub c: f64,
}

impl PhysicalConstants {
    /// CODATA 2018 recommended values.
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
        g: 6.674_30e-11,
        hbar: 1.054_571_817e-34,
        c: 2.997_924_58e8,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA_2018
    }
}

/// Elementary charge (exact in SI), used only for eV renderings.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

fn finite(field: &'static str, value: f64) -> Result<f64, ModelError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ModelError::NonFinite { field })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub name: String,
    /// Mass density, kg/m³.
    pub density: f64,
}

impl Material {
    pub fn new(name: impl Into<String>, density: f64) -> Result<Self, ModelError> {
        let name = name.into();
        finite("density", density)?;
        if density <= 0.0 {
            return Err(ModelError::NonPositiveDensity { material: name });
        }
        Ok(Self { name, density })
    }
}

/// A spherical shell of uniform material.
#[derive(Debug, Clone, PartialEq)]
pub struct Shell {
    pub material: Material,
    /// Thickness, m.
    pub thickness: f64,
}

/// A sphere made of a core and concentric shells, listed innermost first.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredSphere {
    /// Outer radius, m.
    pub radius: f64,
    pub core: Material,
    pub shells: Vec<Shell>,
}

impl LayeredSphere {
    pub fn new(radius: f64, core: Material, shells: Vec<Shell>) -> Result<Self, ModelError> {
        let sphere = Self {
            radius,
            core,
            shells,
        };
        let mut violations = Vec::new();
        sphere.check(&mut violations);
        match violations.into_iter().next() {
            Some(v) => Err(ModelError::Invalid(v)),
            None => Ok(sphere),
        }
    }

    pub fn total_shell_thickness(&self) -> f64 {
        self.shells.iter().map(|s| s.thickness).sum()
    }

    /// Radial density profile from the surface inwards: pairs of
    /// (inner radius of the region, density), ending with the core at radius 0.
    pub fn regions_outside_in(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.shells.len() + 1);
        let mut r = self.radius;
        for shell in self.shells.iter().rev() {
            r -= shell.thickness;
            out.push((r, shell.material.density));
        }
        out.push((0.0, self.core.density));
        out
    }

    fn check(&self, out: &mut Vec<Violation>) {
        if !self.radius.is_finite() {
            out.push(Violation::NonFinite("sphere.radius"));
            return;
        }
        if self.radius <= 0.0 {
            out.push(Violation::NonPositiveRadius(self.radius));
        }
        check_material(&self.core, out);
        for shell in &self.shells {
            check_material(&shell.material, out);
            if !shell.thickness.is_finite() {
                out.push(Violation::NonFinite("sphere.shell.thickness"));
            } else if shell.thickness < 0.0 {
                out.push(Violation::NegativeThickness {
                    layer: shell.material.name.clone(),
                    thickness: shell.thickness,
                });
            }
        }
        let total = self.total_shell_thickness();
        if total.is_finite() && total >= self.radius {
            out.push(Violation::ShellsExceedRadius {
                total,
                radius: self.radius,
            });
        }
    }
}

/// Plate: a coating of finite thickness on a semi-infinite substrate.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredPlate {
    pub substrate: Material,
    pub coating: Material,
    /// Coating thickness, m.
    pub coating_thickness: f64,
}

impl LayeredPlate {
    pub fn new(
        substrate: Material,
        coating: Material,
        coating_thickness: f64,
    ) -> Result<Self, ModelError> {
        let plate = Self {
            substrate,
            coating,
            coating_thickness,
        };
        let mut violations = Vec::new();
        plate.check(&mut violations);
        match violations.into_iter().next() {
            Some(v) => Err(ModelError::Invalid(v)),
            None => Ok(plate),
        }
    }

    fn check(&self, out: &mut Vec<Violation>) {
        check_material(&self.substrate, out);
        check_material(&self.coating, out);
        if !self.coating_thickness.is_finite() {
            out.push(Violation::NonFinite("plate.coating_thickness"));
        } else if self.coating_thickness < 0.0 {
            out.push(Violation::NegativeThickness {
                layer: self.coating.name.clone(),
                thickness: self.coating_thickness,
            });
        }
    }
}

/// Sinusoidal corrugations with a common period on both bodies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrugationGeometry {
    /// Plate corrugation amplitude, m.
    pub a1: f64,
    /// Sphere corrugation amplitude, m.
    pub a2: f64,
    /// Corrugation period, m.
    pub period: f64,
}

impl CorrugationGeometry {
    pub fn new(a1: f64, a2: f64, period: f64) -> Result<Self, ModelError> {
        let corr = Self { a1, a2, period };
        let mut violations = Vec::new();
        corr.check(&mut violations);
        match violations.into_iter().next() {
            Some(v) => Err(ModelError::Invalid(v)),
            None => Ok(corr),
        }
    }

    /// Smallest separation between zeroth levels at which the surfaces do not touch.
    pub fn contact_separation(&self) -> f64 {
        self.a1 + self.a2
    }

    fn check(&self, out: &mut Vec<Violation>) {
        for (name, v) in [
            ("corrugation.a1", self.a1),
            ("corrugation.a2", self.a2),
            ("corrugation.period", self.period),
        ] {
            if !v.is_finite() {
                out.push(Violation::NonFinite(name));
            }
        }
        if self.a1 < 0.0 {
            out.push(Violation::NegativeAmplitude("a1", self.a1));
        }
        if self.a2 < 0.0 {
            out.push(Violation::NegativeAmplitude("a2", self.a2));
        }
        if self.period <= 0.0 {
            out.push(Violation::NonPositivePeriod(self.period));
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub sphere: LayeredSphere,
    pub plate: LayeredPlate,
    pub corrugation: CorrugationGeometry,
}

/// One measured separation and the total error of the lateral force there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementPoint {
    /// Separation between the zeroth corrugation levels, m.
    pub a: f64,
    /// Total experimental error of the lateral force, N.
    pub delta_f: f64,
}

impl MeasurementPoint {
    pub fn new(a: f64, delta_f: f64) -> Self {
        Self { a, delta_f }
    }
}

/// A violated invariant found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonFinite(&'static str),
    NonPositiveDensity(String),
    NonPositiveRadius(f64),
    NegativeThickness {
        layer: String,
        thickness: f64,
    },
    ShellsExceedRadius {
        total: f64,
        radius: f64,
    },
    NegativeAmplitude(&'static str, f64),
    NonPositivePeriod(f64),
    /// The corrugated surfaces would touch: `a <= a1 + a2`.
    Contact {
        separation: f64,
        contact: f64,
    },
    NonPositiveErrorBudget(f64),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use units::to_nm;
        match self {
            Violation::NonFinite(field) => write!(f, "{field} is not finite"),
            Violation::NonPositiveDensity(m) => write!(f, "material {m}: density must be > 0"),
            Violation::NonPositiveRadius(r) => write!(f, "sphere radius {r} m must be > 0"),
            Violation::NegativeThickness { layer, thickness } => {
                write!(
                    f,
                    "layer {layer}: thickness {} nm is negative",
                    to_nm(*thickness)
                )
            }
            Violation::ShellsExceedRadius { total, radius } => write!(
                f,
                "shell thicknesses sum to {} nm, not below the sphere radius {} nm",
                to_nm(*total),
                to_nm(*radius)
            ),
            Violation::NegativeAmplitude(which, v) => {
                write!(
                    f,
                    "corrugation amplitude {which} = {} nm is negative",
                    to_nm(*v)
                )
            }
            Violation::NonPositivePeriod(p) => {
                write!(f, "corrugation period {} nm must be > 0", to_nm(*p))
            }
            Violation::Contact {
                separation,
                contact,
            } => write!(
                f,
                "surfaces touch: separation {} nm is not above A1 + A2 = {} nm",
                to_nm(*separation),
                to_nm(*contact)
            ),
            Violation::NonPositiveErrorBudget(df) => {
                write!(f, "non-positive error budget {df} N")
            }
        }
    }
}

fn check_material(m: &Material, out: &mut Vec<Violation>) {
    if !m.density.is_finite() {
        out.push(Violation::NonFinite("material.density"));
    } else if m.density <= 0.0 {
        out.push(Violation::NonPositiveDensity(m.name.clone()));
    }
}

/// Checks the configuration alone (no separation).
pub fn validate_config(config: &ExperimentConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    config.sphere.check(&mut out);
    config.plate.check(&mut out);
    config.corrugation.check(&mut out);
    out
}

/// Checks that the surfaces are separated at `a`.
pub fn validate_separation(corr: &CorrugationGeometry, a: f64) -> Vec<Violation> {
    if !a.is_finite() {
        return vec![Violation::NonFinite("separation")];
    }
    let contact = corr.contact_separation();
    if a <= contact {
        vec![Violation::Contact {
            separation: a,
            contact,
        }]
    } else {
        Vec::new()
    }
}

/// Returns every violated invariant of the configuration and measurement point.
/// An empty list means the pair is feasible.
pub fn validate(config: &ExperimentConfig, point: &MeasurementPoint) -> Vec<Violation> {
    let mut out = validate_config(config);
    out.extend(validate_separation(&config.corrugation, point.a));
    if !point.delta_f.is_finite() {
        out.push(Violation::NonFinite("delta_f"));
    } else if point.delta_f <= 0.0 {
        out.push(Violation::NonPositiveErrorBudget(point.delta_f));
    }
    out
}

/// Mass of the exchanged boson whose Compton wavelength is `lambda`.
pub fn lambda_to_mass(lambda: f64) -> Result<f64, ModelError> {
    lambda_to_mass_with(&PhysicalConstants::CODATA_2018, lambda)
}

pub fn lambda_to_mass_with(consts: &PhysicalConstants, lambda: f64) -> Result<f64, ModelError> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(ModelError::NonPositiveLambda(lambda));
    }
    Ok(consts.hbar / (lambda * consts.c))
}

/// Compton wavelength of a particle of mass `mass` (kg).
pub fn mass_to_lambda(mass: f64) -> Result<f64, ModelError> {
    mass_to_lambda_with(&PhysicalConstants::CODATA_2018, mass)
}

pub fn mass_to_lambda_with(consts: &PhysicalConstants, mass: f64) -> Result<f64, ModelError> {
    if !(mass.is_finite() && mass > 0.0) {
        return Err(ModelError::NonPositiveMass(mass));
    }
    Ok(consts.hbar / (mass * consts.c))
}

/// Rest energy in eV of a particle of mass `mass` (kg).
pub fn mass_to_ev(mass: f64) -> f64 {
    let c = PhysicalConstants::CODATA_2018.c;
    mass * c * c / ELEMENTARY_CHARGE
}

pub fn ev_to_mass(ev: f64) -> f64 {
    let c = PhysicalConstants::CODATA_2018.c;
    ev * ELEMENTARY_CHARGE / (c * c)
}

#[cfg(test)]
mod tests {
    use super::units::{nm, pn};
    use super::*;
    use crate::presets;

    #[test]
    fn proposed_config_is_feasible_at_125_nm() {
        let config = presets::proposed_config();
        let point = MeasurementPoint::new(nm(125.0), pn(1.11));
        assert!(validate(&config, &point).is_empty());
    }

    #[test]
    fn contact_is_reported() {
        let config = presets::proposed_config();
        let point = MeasurementPoint::new(nm(120.0), pn(1.11));
        let v = validate(&config, &point);
        assert_eq!(v.len(), 1);
        assert!(matches!(v[0], Violation::Contact { .. }));
    }

    #[test]
    fn zero_error_budget_is_reported() {
        let config = presets::proposed_config();
        let point = MeasurementPoint::new(nm(125.0), 0.0);
        let v = validate(&config, &point);
        assert_eq!(v, vec![Violation::NonPositiveErrorBudget(0.0)]);
    }

    #[test]
    fn all_violations_are_collected() {
        let mut config = presets::proposed_config();
        config.corrugation.period = -1.0;
        config.plate.coating_thickness = -1e-9;
        let point = MeasurementPoint::new(nm(50.0), -1.0);
        let v = validate(&config, &point);
        assert_eq!(v.len(), 4, "{v:?}");
        assert_eq!(validate(&config, &point), v);
    }

    #[test]
    fn constructors_reject_non_finite() {
        assert!(Material::new("x", f64::NAN).is_err());
        assert!(Material::new("x", 0.0).is_err());
        assert!(CorrugationGeometry::new(f64::INFINITY, 1.0, 1.0).is_err());
        assert!(CorrugationGeometry::new(1.0, 1.0, 0.0).is_err());
        let au = Material::new("Au", 19.28e3).unwrap();
        assert!(LayeredPlate::new(au.clone(), au.clone(), f64::NAN).is_err());
        let shells = vec![Shell {
            material: au.clone(),
            thickness: 2.0,
        }];
        assert!(LayeredSphere::new(1.0, au, shells).is_err());
    }

    #[test]
    fn compton_wavelength_of_one_kilogram() {
        let lambda = mass_to_lambda(1.0).unwrap();
        let expected = 1.054_571_817e-34 / 2.997_924_58e8;
        assert_eq!(lambda, expected);
        assert!((lambda - 3.5177e-43).abs() < 1e-47);
    }

    #[test]
    fn doubling_lambda_halves_mass() {
        let m1 = lambda_to_mass(nm(10.0)).unwrap();
        let m2 = lambda_to_mass(nm(20.0)).unwrap();
        assert_eq!(m1, 2.0 * m2);
    }

    #[test]
    fn lambda_mass_round_trip() {
        let mut lambda = 1e-12;
        while lambda <= 1e-3 {
            let back = mass_to_lambda(lambda_to_mass(lambda).unwrap()).unwrap();
            assert!(((back - lambda) / lambda).abs() <= 1e-14);
            lambda *= 1.37;
        }
        assert!(lambda_to_mass(0.0).is_err());
        assert!(lambda_to_mass(-1.0).is_err());
    }

    #[test]
    fn ev_rendering_round_trips() {
        let m = lambda_to_mass(nm(19.0)).unwrap();
        let ev = mass_to_ev(m);
        // ħc = 197.3269804 eV nm
        assert!((ev - 197.326_980_4 / 19.0).abs() / ev < 1e-9);
        assert!(((ev_to_mass(ev) - m) / m).abs() < 1e-15);
    }
}
