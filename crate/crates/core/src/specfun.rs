//! Exponentially scaled modified Bessel functions and the layer kernels of the
//! sphere-plate Yukawa energy.

use crate::error::{Error, Result};
use crate::model::{validate_config, ExperimentConfig};

/// Above this argument the asymptotic expansion replaces the power series.
pub const SERIES_LIMIT: f64 = 15.0;

/// Below this ratio x/λ the sphere kernel is evaluated from its Taylor series.
const PHI_SERIES_LIMIT: f64 = 0.5;

/// A value of `e^{-z} I_n(z)` together with its argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledBesselValue {
    pub scaled: f64,
    pub z: f64,
}

impl ScaledBesselValue {
    /// `ln I_n(z)`, finite even where `I_n(z)` itself overflows.
    pub fn ln_unscaled(&self) -> f64 {
        self.scaled.ln() + self.z
    }
}

/// `e^{-z} I_n(z)` for `n` in {0, 1} and `z >= 0`.
pub fn bessel_i_scaled(n: u32, z: f64) -> Result<ScaledBesselValue> {
    if !(z.is_finite() && z >= 0.0) {
        return Err(Error::Domain {
            name: "z",
            value: z,
            domain: "[0, inf)",
        });
    }
    let scaled = match n {
        0 => i0e(z),
        1 => i1e(z),
        other => return Err(Error::UnsupportedOrder(other)),
    };
    Ok(ScaledBesselValue { scaled, z })
}

/// `e^{-z} I_0(z)`; `z` must be finite and non-negative.
pub fn i0e(z: f64) -> f64 {
    if z <= SERIES_LIMIT {
        (-z).exp() * series(0, z)
    } else {
        asymptotic(0, z)
    }
}

/// `e^{-z} I_1(z)`; `z` must be finite and non-negative.
pub fn i1e(z: f64) -> f64 {
    if z <= SERIES_LIMIT {
        (-z).exp() * z * series(1, z)
    } else {
        asymptotic(1, z)
    }
}

/// `e^{-z} I_1(z) / z`, continuous at `z = 0` where it equals 1/2.
pub fn i1e_over_z(z: f64) -> f64 {
    if z <= SERIES_LIMIT {
        (-z).exp() * series(1, z)
    } else {
        asymptotic(1, z) / z
    }
}

/// Power series of `I_n(z) / z^n`: `2^{-n} sum_k (z/2)^{2k} / (k! (k+n)!)`.
fn series(n: u32, z: f64) -> f64 {
    let q = 0.25 * z * z;
    let mut term = if n == 0 { 1.0 } else { 0.5 };
    let mut sum = term;
    let nf = n as f64;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * (kf + nf));
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Large-argument expansion of `e^{-z} I_n(z)`, summed to the smallest term.
fn asymptotic(n: u32, z: f64) -> f64 {
    let mu = 4.0 * (n * n) as f64;
    let mut term = 1.0_f64;
    let mut sum = 1.0;
    for k in 1..100 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (k as f64 * 8.0 * z);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * z).sqrt()
}

/// Sphere kernel `x - λ + (x + λ) e^{-2x/λ}`.
pub fn phi_kernel(x: f64, lambda: f64) -> Result<f64> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::Domain {
            name: "x",
            value: x,
            domain: "[0, inf)",
        });
    }
    check_lambda(lambda)?;
    Ok(phi_unchecked(x, lambda))
}

pub(crate) fn phi_unchecked(x: f64, lambda: f64) -> f64 {
    let t = x / lambda;
    if t < PHI_SERIES_LIMIT {
        // t - 1 + (t + 1) e^{-2t} = sum_{n>=3} (-2)^{n-1} (n-2) / n! * t^n
        let mut power = t * t * t;
        let mut coeff = 4.0 / 6.0; // n = 3
        let mut sum = coeff * power;
        for n in 4..40 {
            let nf = n as f64;
            // c_n / c_{n-1} = -2 (n-2) / (n (n-3))
            coeff *= -2.0 * (nf - 2.0) / (nf * (nf - 3.0));
            power *= t;
            let term = coeff * power;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        lambda * sum
    } else {
        x - lambda + (x + lambda) * (-2.0 * t).exp()
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "lambda",
            value: lambda,
            domain: "(0, inf)",
        })
    }
}

/// Layer-structure factor Ψ(λ), kg² m⁻⁵.
///
/// Product of the plate bracket `ρ_c - (ρ_c - ρ_sub) e^{-Δ/λ}` and the sphere
/// bracket obtained by telescoping density differences across the shell
/// boundaries, outermost first.
pub fn psi_factor(config: &ExperimentConfig, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let violations = validate_config(config);
    if !violations.is_empty() {
        return Err(Error::Infeasible(violations));
    }
    Ok(psi_unchecked(config, lambda))
}

pub(crate) fn psi_unchecked(config: &ExperimentConfig, lambda: f64) -> f64 {
    plate_bracket(config, lambda) * sphere_bracket(config, lambda)
}

pub(crate) fn plate_bracket(config: &ExperimentConfig, lambda: f64) -> f64 {
    let plate = &config.plate;
    let rho_c = plate.coating.density;
    let rho_s = plate.substrate.density;
    rho_c - (rho_c - rho_s) * (-plate.coating_thickness / lambda).exp()
}

pub(crate) fn sphere_bracket(config: &ExperimentConfig, lambda: f64) -> f64 {
    let sphere = &config.sphere;
    let radius = sphere.radius;
    let regions = sphere.regions_outside_in();
    let mut sum = regions[0].1 * phi_unchecked(radius, lambda);
    for pair in regions.windows(2) {
        let (boundary, outer) = pair[0];
        let inner = pair[1].1;
        let depth = radius - boundary;
        sum -= (outer - inner) * phi_unchecked(boundary, lambda) * (-depth / lambda).exp();
    }
    sum
}
