//! Brute-force counterparts of the closed-form expressions, used to check them.
//!
//! Nothing in here calls into `specfun` or the closed-form energy; the energy is
//! rebuilt from three one-dimensional integrals:
//!
//! * the plate's depth profile, `(1/λ) ∫₀^∞ ρ(z) e^{-z/λ} dz`, which multiplies the
//!   half-space kernel `2πλ² e^{-h/λ}` seen by a mass element at height `h`;
//! * the corrugation average of `e^{(A₁ cos u - A₂ cos(u+φ))/λ}` over one period;
//! * the sphere's radial profile, integrating shells of radius `r` about the
//!   center: `∫₀^R ρ(r) (r/λ) e^{(r-R)/λ} (1 - e^{-2r/λ}) dr`.
//!
//! Their product, times `-Gα (2πλ²)² e^{-a/λ}`, is the Yukawa energy.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::force::YukawaParams;
use crate::model::units::nm;
use crate::model::{
    validate_config, validate_separation, CorrugationGeometry, ExperimentConfig, PhysicalConstants,
};
use crate::quadrature::{integrate, integrate_to_infinity, QuadratureOptions, QuadratureReport};

/// Largest argument accepted by [`bessel_series`].
pub const SERIES_DOMAIN: f64 = 60.0;

fn opts() -> QuadratureOptions {
    QuadratureOptions {
        abs_tol: 0.0,
        rel_tol: 1e-11,
        max_intervals: 50_000,
    }
}

/// `I_n(z) = Σ_k (z/2)^{2k+n} / (k! (k+n)!)`, unscaled, for `0 <= z <= 60`.
pub fn bessel_series(n: u32, z: f64) -> Result<f64> {
    if n > 1 {
        return Err(Error::UnsupportedOrder(n));
    }
    if !(0.0..=SERIES_DOMAIN).contains(&z) {
        return Err(Error::Domain {
            name: "z",
            value: z,
            domain: "[0, 60]",
        });
    }
    let half = 0.5 * z;
    let mut terms = Vec::with_capacity(128);
    let mut term = if n == 0 { 1.0 } else { half };
    let mut k = 0u32;
    loop {
        terms.push(term);
        k += 1;
        term *= half * half / (k as f64 * (k + n) as f64);
        let partial: f64 = terms.iter().sum();
        if term < 1e-18 * partial || k > 400 {
            break;
        }
    }
    // Smallest terms first.
    Ok(terms.iter().rev().sum())
}

fn naive_b(corr: &CorrugationGeometry, phi: f64) -> f64 {
    let sq = corr.a1 * corr.a1 + corr.a2 * corr.a2 - 2.0 * corr.a1 * corr.a2 * phi.cos();
    sq.max(0.0).sqrt()
}

/// `e^{-b/λ} (1/2π) ∫₀^{2π} exp[(A₁ cos u - A₂ cos(u+φ))/λ] du`.
///
/// The scaling by `e^{-b/λ}` keeps the value O(1) for short ranges; unscaled,
/// the average equals `I₀(b/λ)`.
pub fn period_average(
    corr: &CorrugationGeometry,
    phi: f64,
    lambda: f64,
) -> Result<QuadratureReport> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Domain {
            name: "lambda",
            value: lambda,
            domain: "(0, inf)",
        });
    }
    let b = naive_b(corr, phi);
    let f = |u: f64| ((corr.a1 * u.cos() - corr.a2 * (u + phi).cos() - b) / lambda).exp();
    let panels: Vec<f64> = (1..64).map(|i| 2.0 * PI * i as f64 / 64.0).collect();
    let r = integrate(f, 0.0, 2.0 * PI, &panels, &opts())?;
    Ok(QuadratureReport {
        value: r.value / (2.0 * PI),
        estimated_error: r.estimated_error / (2.0 * PI),
        evaluations: r.evaluations,
    })
}

/// Weight of a thin spherical shell of radius `r` in a ball whose surface point
/// closest to the plate lies at `outer`: `(r/λ) e^{(r-outer)/λ} (1 - e^{-2r/λ})`.
fn shell_weight(r: f64, outer: f64, lambda: f64) -> f64 {
    (r / lambda) * ((r - outer) / lambda).exp() * -(-2.0 * r / lambda).exp_m1()
}

/// Breakpoints clustering toward `edge` from below, where shell weights peak.
fn edge_breakpoints(edge: f64, lambda: f64, out: &mut Vec<f64>) {
    let mut d = 0.25 * lambda;
    while d < 800.0 * lambda {
        out.push(edge - d);
        d *= 2.0;
    }
}

/// `∫₀^x (r/λ) e^{(r-x)/λ} (1 - e^{-2r/λ}) dr`, the radial integral behind the
/// sphere kernel `x - λ + (x + λ) e^{-2x/λ}`.
pub fn sphere_kernel_quadrature(x: f64, lambda: f64) -> Result<QuadratureReport> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain {
            name: "x",
            value: x,
            domain: "(0, inf)",
        });
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Domain {
            name: "lambda",
            value: lambda,
            domain: "(0, inf)",
        });
    }
    let mut cuts = Vec::new();
    edge_breakpoints(x, lambda, &mut cuts);
    integrate(|r| shell_weight(r, x, lambda), 0.0, x, &cuts, &opts())
}

/// Radial profile integral of a layered sphere, `∫₀^R ρ(r) w(r) dr`.
fn sphere_profile(config: &ExperimentConfig, lambda: f64) -> Result<QuadratureReport> {
    let sphere = &config.sphere;
    let radius = sphere.radius;
    // (inner radius, density) for each shell, outermost first, then the core.
    let mut layers = Vec::new();
    let mut r = radius;
    for shell in sphere.shells.iter().rev() {
        let inner = r - shell.thickness;
        layers.push((inner, r, shell.material.density));
        r = inner;
    }
    layers.push((0.0, r, sphere.core.density));

    let mut cuts = Vec::new();
    for &(inner, outer, _) in &layers {
        cuts.push(inner);
        edge_breakpoints(outer, lambda, &mut cuts);
    }
    let density = |r: f64| {
        layers
            .iter()
            .find(|(inner, outer, _)| r > *inner && r <= *outer)
            .map_or(sphere.core.density, |l| l.2)
    };
    integrate(
        |r| density(r) * shell_weight(r, radius, lambda),
        0.0,
        radius,
        &cuts,
        &opts(),
    )
}

/// Plate depth profile `(1/λ) ∫₀^∞ ρ(z) e^{-z/λ} dz`.
fn plate_profile(config: &ExperimentConfig, lambda: f64) -> Result<QuadratureReport> {
    let plate = &config.plate;
    let depth = plate.coating_thickness;
    let mut total = QuadratureReport {
        value: 0.0,
        estimated_error: 0.0,
        evaluations: 0,
    };
    if depth > 0.0 {
        let cuts: Vec<f64> = (0..12).map(|k| lambda * 2f64.powi(k)).collect();
        let rho = plate.coating.density;
        let r = integrate(
            |z| rho * (-z / lambda).exp() / lambda,
            0.0,
            depth,
            &cuts,
            &opts(),
        )?;
        total.value += r.value;
        total.estimated_error += r.estimated_error;
        total.evaluations += r.evaluations;
    }
    let rho = plate.substrate.density;
    let r = integrate_to_infinity(
        |z| rho * (-z / lambda).exp() / lambda,
        depth,
        lambda,
        &opts(),
    )?;
    total.value += r.value;
    total.estimated_error += r.estimated_error;
    total.evaluations += r.evaluations;
    Ok(total)
}

/// Yukawa energy rebuilt by nested one-dimensional quadratures, J.
///
/// Valid for λ in [0.5, 200] nm.
pub fn energy_quadrature(
    config: &ExperimentConfig,
    a: f64,
    phi: f64,
    params: &YukawaParams,
) -> Result<QuadratureReport> {
    energy_quadrature_with(&PhysicalConstants::CODATA_2018, config, a, phi, params)
}

pub fn energy_quadrature_with(
    consts: &PhysicalConstants,
    config: &ExperimentConfig,
    a: f64,
    phi: f64,
    params: &YukawaParams,
) -> Result<QuadratureReport> {
    let lambda = params.lambda;
    if !(nm(0.5)..=nm(200.0)).contains(&lambda) {
        return Err(Error::Domain {
            name: "lambda",
            value: lambda,
            domain: "[0.5, 200] nm",
        });
    }
    let mut violations = validate_config(config);
    violations.extend(validate_separation(&config.corrugation, a));
    if !violations.is_empty() {
        return Err(Error::Infeasible(violations));
    }
    if params.alpha == 0.0 {
        return Ok(QuadratureReport {
            value: 0.0,
            estimated_error: 0.0,
            evaluations: 0,
        });
    }

    let plate = plate_profile(config, lambda)?;
    let average = period_average(&config.corrugation, phi, lambda)?;
    let sphere = sphere_profile(config, lambda)?;
    let b = naive_b(&config.corrugation, phi);

    let kernel = 2.0 * PI * lambda * lambda;
    let value = -consts.g
        * params.alpha
        * kernel
        * kernel
        * plate.value
        * sphere.value
        * average.value
        * (-(a - b) / lambda).exp();
    let rel = plate.relative_error() + sphere.relative_error() + average.relative_error();
    Ok(QuadratureReport {
        value,
        estimated_error: value.abs() * rel,
        evaluations: plate.evaluations + sphere.evaluations + average.evaluations,
    })
}

/// Central-difference derivative refined by a Richardson table of `levels` rows
/// (step `h`, `h/2`, ...). One extra level raises the error order by two.
pub fn richardson_derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64, levels: usize) -> f64 {
    let levels = levels.max(1);
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(levels);
    let mut step = h;
    for i in 0..levels {
        let mut row = Vec::with_capacity(i + 1);
        row.push((f(x + step) - f(x - step)) / (2.0 * step));
        let mut factor = 1.0;
        for j in 1..=i {
            factor *= 4.0;
            let refined = row[j - 1] + (row[j - 1] - table[i - 1][j - 1]) / (factor - 1.0);
            row.push(refined);
        }
        table.push(row);
        step *= 0.5;
    }
    table[levels - 1][levels - 1]
}

/// Lateral force as `-(2π/Λ) ∂E/∂φ`, differentiating the closed-form energy numerically.
pub fn force_finite_difference(
    config: &ExperimentConfig,
    a: f64,
    phi: f64,
    params: &YukawaParams,
) -> Result<f64> {
    use crate::force::yukawa_energy;

    // Check feasibility once; the closure below cannot propagate errors.
    yukawa_energy(config, a, phi, params)?;
    let corr = &config.corrugation;
    let scale = if corr.a1 > 0.0 && corr.a2 > 0.0 {
        (params.lambda * (corr.a1 + corr.a2) / (corr.a1 * corr.a2)).min(1.0)
    } else {
        1.0
    };
    let h = 0.2 * scale;
    let energy = |p: f64| yukawa_energy(config, a, p, params).unwrap_or(f64::NAN);
    let derivative = richardson_derivative(energy, phi, h, 4);
    Ok(-(2.0 * PI / corr.period) * derivative)
}
