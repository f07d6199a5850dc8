//! Yukawa energy and lateral force between a corrugated sphere and a corrugated plate.
//!
//! With phase shift φ between the corrugations, the energy at separation `a` is
//!
//! ```text
//! E(a, φ) = -4π² G α λ⁴ Ψ(λ) e^{-a/λ} I₀(b(φ)/λ),   b(φ)² = A₁² + A₂² - 2 A₁ A₂ cos φ
//! ```
//!
//! and the lateral force is `F = -(2π/Λ) ∂E/∂φ`. Because `b/λ` exceeds 100 at the
//! short-range end of the λ window, every product `e^{-a/λ} I_n(b/λ)` is formed as
//! `e^{-(a-b)/λ} · [e^{-b/λ} I_n(b/λ)]`; `a > b` holds whenever the surfaces do
//! not touch.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{
    validate_config, validate_separation, CorrugationGeometry, ExperimentConfig, PhysicalConstants,
};
use crate::specfun::{check_lambda, i0e, i1e, i1e_over_z, psi_unchecked};

/// Phase-scan resolution used to seed the maximization over φ.
pub const PHASE_SCAN_POINTS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YukawaParams {
    /// Interaction strength relative to Newtonian gravity.
    pub alpha: f64,
    /// Interaction range, m.
    pub lambda: f64,
}

impl YukawaParams {
    pub fn new(alpha: f64, lambda: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::Domain {
                name: "alpha",
                value: alpha,
                domain: "finite",
            });
        }
        check_lambda(lambda)?;
        Ok(Self { alpha, lambda })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LateralForceResult {
    /// Lateral force, N.
    pub force: f64,
    /// Phase shift, rad.
    pub phi: f64,
    /// b(φ), m.
    pub b: f64,
}

/// `-(G m₁ m₂ / r)(1 + α e^{-r/λ})`.
pub fn point_yukawa_potential(m1: f64, m2: f64, r: f64, params: &YukawaParams) -> Result<f64> {
    point_yukawa_potential_with(&PhysicalConstants::CODATA_2018, m1, m2, r, params)
}

pub fn point_yukawa_potential_with(
    consts: &PhysicalConstants,
    m1: f64,
    m2: f64,
    r: f64,
    params: &YukawaParams,
) -> Result<f64> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Domain {
            name: "r",
            value: r,
            domain: "(0, inf)",
        });
    }
    Ok(-(consts.g * m1 * m2 / r) * (1.0 + params.alpha * (-r / params.lambda).exp()))
}

/// `b(φ) = (A₁² + A₂² - 2 A₁ A₂ cos φ)^{1/2}`, evaluated as
/// `((A₁ - A₂)² + 4 A₁ A₂ sin²(φ/2))^{1/2}` so it stays accurate near b = 0.
pub fn b_of_phi(corr: &CorrugationGeometry, phi: f64) -> f64 {
    let d = corr.a1 - corr.a2;
    let s = (0.5 * phi).sin();
    (d * d + 4.0 * corr.a1 * corr.a2 * s * s).sqrt()
}

/// `sin φ`, exactly zero at φ ∈ {0, ±π, ±2π}.
fn sin_phase(phi: f64) -> f64 {
    let m = phi.abs();
    if m == 0.0 || m == PI || m == 2.0 * PI {
        0.0
    } else {
        phi.sin()
    }
}

fn ensure_feasible(config: &ExperimentConfig, a: f64, params: &YukawaParams) -> Result<()> {
    YukawaParams::new(params.alpha, params.lambda)?;
    let mut violations = validate_config(config);
    violations.extend(validate_separation(&config.corrugation, a));
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::Infeasible(violations))
    }
}

/// Yukawa interaction energy, J.
pub fn yukawa_energy(
    config: &ExperimentConfig,
    a: f64,
    phi: f64,
    params: &YukawaParams,
) -> Result<f64> {
    yukawa_energy_with(&PhysicalConstants::CODATA_2018, config, a, phi, params)
}

pub fn yukawa_energy_with(
    consts: &PhysicalConstants,
    config: &ExperimentConfig,
    a: f64,
    phi: f64,
    params: &YukawaParams,
) -> Result<f64> {
    ensure_feasible(config, a, params)?;
    let psi = psi_unchecked(config, params.lambda);
    Ok(energy_from_psi(
        consts.g,
        psi,
        &config.corrugation,
        a,
        phi,
        params,
    ))
}

pub(crate) fn energy_from_psi(
    g: f64,
    psi: f64,
    corr: &CorrugationGeometry,
    a: f64,
    phi: f64,
    params: &YukawaParams,
) -> f64 {
    let l = params.lambda;
    let b = b_of_phi(corr, phi);
    -4.0 * PI * PI * g * params.alpha * l.powi(4) * psi * (-(a - b) / l).exp() * i0e(b / l)
}

/// Lateral Yukawa force at phase `phi`, N.
pub fn lateral_force(
    config: &ExperimentConfig,
    a: f64,
    phi: f64,
    params: &YukawaParams,
) -> Result<LateralForceResult> {
    lateral_force_with(&PhysicalConstants::CODATA_2018, config, a, phi, params)
}

pub fn lateral_force_with(
    consts: &PhysicalConstants,
    config: &ExperimentConfig,
    a: f64,
    phi: f64,
    params: &YukawaParams,
) -> Result<LateralForceResult> {
    ensure_feasible(config, a, params)?;
    let prefactor = force_prefactor(consts, config, params);
    Ok(force_at(
        prefactor,
        &config.corrugation,
        a,
        phi,
        params.lambda,
    ))
}

/// Everything in the force that does not depend on φ:
/// `8π³ G α λ² Ψ(λ) A₁ A₂ / Λ`.
fn force_prefactor(
    consts: &PhysicalConstants,
    config: &ExperimentConfig,
    params: &YukawaParams,
) -> f64 {
    let l = params.lambda;
    let corr = &config.corrugation;
    let psi = psi_unchecked(config, l);
    8.0 * PI.powi(3) * consts.g * params.alpha * l * l * psi * corr.a1 * corr.a2 / corr.period
}

/// `F = prefactor · e^{-(a-b)/λ} · [e^{-x} I₁(x) / x] · sin φ` with `x = b/λ`,
/// which is the closed-form force with `I₁(x)/b = [I₁(x)/x] / λ`.
fn force_at(
    prefactor: f64,
    corr: &CorrugationGeometry,
    a: f64,
    phi: f64,
    lambda: f64,
) -> LateralForceResult {
    let b = b_of_phi(corr, phi);
    let s = sin_phase(phi);
    let force = if s == 0.0 || prefactor == 0.0 {
        0.0
    } else {
        prefactor * (-(a - b) / lambda).exp() * i1e_over_z(b / lambda) * s
    };
    LateralForceResult { force, phi, b }
}

/// `ln |F(φ)|` up to a φ-independent constant.
fn log_signal(corr: &CorrugationGeometry, phi: f64, lambda: f64) -> f64 {
    let b = b_of_phi(corr, phi);
    b / lambda + i1e_over_z(b / lambda).ln() + phi.sin().ln()
}

/// Derivative of [`log_signal`] with respect to φ.
fn log_signal_slope(corr: &CorrugationGeometry, phi: f64, lambda: f64) -> f64 {
    let b = b_of_phi(corr, phi);
    let x = b / lambda;
    let (s, c) = phi.sin_cos();
    // d/dx ln(I₁(x)/x) = I₀/I₁ - 2/x
    let dlog = if x < 1e-4 {
        0.25 * x
    } else {
        i0e(x) / i1e(x) - 2.0 / x
    };
    corr.a1 * corr.a2 * s / (b * lambda) * dlog + c / s
}

/// Phase φ* in (0, π) maximizing |F| and the force there.
///
/// A uniform scan over (0, π) picks the bracket, golden-section search narrows
/// it, and bisection on the analytic slope of `ln |F|` pins the root.
pub fn max_lateral_force(
    config: &ExperimentConfig,
    a: f64,
    params: &YukawaParams,
) -> Result<LateralForceResult> {
    max_lateral_force_with(&PhysicalConstants::CODATA_2018, config, a, params)
}

pub fn max_lateral_force_with(
    consts: &PhysicalConstants,
    config: &ExperimentConfig,
    a: f64,
    params: &YukawaParams,
) -> Result<LateralForceResult> {
    ensure_feasible(config, a, params)?;
    let corr = &config.corrugation;
    let lambda = params.lambda;
    let prefactor = force_prefactor(consts, config, params);
    if corr.a1 == 0.0 || corr.a2 == 0.0 {
        return Ok(force_at(prefactor, corr, a, 0.5 * PI, lambda));
    }
    let phi = maximizing_phase(corr, lambda);
    Ok(force_at(prefactor, corr, a, phi, lambda))
}

pub(crate) fn maximizing_phase(corr: &CorrugationGeometry, lambda: f64) -> f64 {
    let n = PHASE_SCAN_POINTS;
    let step = PI / (n + 1) as f64;
    let (best, _) = (1..=n)
        .map(|j| (j, log_signal(corr, j as f64 * step, lambda)))
        .fold(
            (0, f64::NEG_INFINITY),
            |acc, (j, v)| if v > acc.1 { (j, v) } else { acc },
        );
    let mut lo = (best - 1) as f64 * step;
    let mut hi = (best + 1) as f64 * step;

    // Golden-section on the scan bracket.
    let g = |p: f64| {
        if p <= 0.0 || p >= PI {
            f64::NEG_INFINITY
        } else {
            log_signal(corr, p, lambda)
        }
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    while hi - lo > 1e-7 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = g(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = g(x1);
        }
    }

    // Polish on the slope when it brackets a sign change.
    let slope = |p: f64| {
        if p <= 0.0 {
            f64::INFINITY
        } else if p >= PI {
            f64::NEG_INFINITY
        } else {
            log_signal_slope(corr, p, lambda)
        }
    };
    let (mut l, mut r) = (lo, hi);
    if slope(l) > 0.0 && slope(r) < 0.0 {
        while r - l > 1e-13 {
            let m = 0.5 * (l + r);
            if m <= l || m >= r {
                break;
            }
            if slope(m) > 0.0 {
                l = m;
            } else {
                r = m;
            }
        }
        0.5 * (l + r)
    } else if f1 >= f2 {
        x1
    } else {
        x2
    }
}

/// Order-of-magnitude size of the Newtonian lateral force between the
/// corrugation layers, N.
///
/// Models each corrugation as a sinusoidal surface mass density `ρ A cos(kx)`
/// of the densest outer material, whose gravitational field decays as
/// `e^{-kz}`, `k = 2π/Λ`; the sphere's effective interaction area for that
/// mode is `2πR/k`. Gives `π G ρ₁ ρ₂ A₁ A₂ R Λ e^{-ka}`.
pub fn newtonian_lateral_estimate(config: &ExperimentConfig, a: f64) -> f64 {
    let g = PhysicalConstants::CODATA_2018.g;
    let corr = &config.corrugation;
    let rho_plate = config
        .plate
        .coating
        .density
        .max(config.plate.substrate.density);
    let rho_sphere = config
        .sphere
        .shells
        .iter()
        .map(|s| s.material.density)
        .fold(config.sphere.core.density, f64::max);
    let k = 2.0 * PI / corr.period;
    PI * g
        * rho_plate
        * rho_sphere
        * corr.a1
        * corr.a2
        * config.sphere.radius
        * corr.period
        * (-k * a).exp()
}
