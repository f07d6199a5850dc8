//! Self-check suite: every closed-form result against an independent route.
//!
//! Each check reports the worst relative gap it saw and the tolerance it was
//! held to. The quick subset covers the special functions and the exact
//! limits; the full suite adds the quadrature and finite-difference oracles.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::force::{energy_from_psi, lateral_force, max_lateral_force, YukawaParams};
use crate::model::units::nm;
use crate::model::{
    CorrugationGeometry, ExperimentConfig, LayeredPlate, LayeredSphere, PhysicalConstants, Shell,
};
use crate::oracle::{
    bessel_series, energy_quadrature, force_finite_difference, period_average,
    sphere_kernel_quadrature,
};
use crate::presets;
use crate::specfun::{bessel_i_scaled, i0e, phi_kernel, psi_factor, psi_unchecked};

/// Seed of the random points in the finite-difference check.
pub const FD_SEED: u64 = 0x5EED_2024;

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    /// Only the special-function and trivial-limit checks.
    pub quick: bool,
    /// Relative error injected into Ψ on the closed-form side of the energy
    /// check. Zero in normal use; a mutation test sets it to confirm the
    /// suite can fail.
    pub psi_perturbation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst relative (or absolute, for exact-zero checks) discrepancy.
    pub gap: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, gap: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name,
            passed: gap <= tolerance,
            gap,
            tolerance,
            detail,
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

/// Tracks the worst gap and where it occurred.
struct Worst {
    gap: f64,
    at: String,
}

impl Worst {
    fn new() -> Self {
        Self {
            gap: 0.0,
            at: String::new(),
        }
    }

    fn update(&mut self, gap: f64, at: impl FnOnce() -> String) {
        // NaN counts as a failure.
        if gap > self.gap || gap.is_nan() {
            self.gap = if gap.is_nan() { f64::INFINITY } else { gap };
            self.at = at();
        }
    }

    fn finish(self, name: &'static str, tolerance: f64) -> CheckResult {
        let detail = if self.at.is_empty() {
            String::new()
        } else {
            format!("worst at {}", self.at)
        };
        CheckResult::new(name, self.gap, tolerance, detail)
    }
}

pub fn run_suite(opts: &VerifyOptions) -> Result<Vec<CheckResult>> {
    let mut out = vec![
        bessel_vs_series()?,
        bessel_large_arguments()?,
        phi_identities()?,
        layer_collapse()?,
        zero_force_limits()?,
    ];
    if !opts.quick {
        out.push(period_average_check()?);
        out.push(sphere_kernel_check()?);
        out.push(energy_grid(opts.psi_perturbation)?);
        out.push(force_vs_finite_difference()?);
        out.extend(phase_maximizer()?);
    }
    Ok(out)
}

/// Scaled Bessel functions against the unscaled power series, z ∈ [0, 30].
pub fn bessel_vs_series() -> Result<CheckResult> {
    let mut w = Worst::new();
    for n in 0..=1u32 {
        for i in 0..=1200 {
            let z = 0.025 * i as f64;
            let fast = bessel_i_scaled(n, z)?.scaled;
            let reference = bessel_series(n, z)? * (-z).exp();
            w.update(rel(fast, reference), || format!("n = {n}, z = {z}"));
        }
    }
    Ok(w.finish("bessel_vs_series", 1e-12))
}

/// Finite, positive and ordered (`I₁ < I₀`) up to z = 1e5.
pub fn bessel_large_arguments() -> Result<CheckResult> {
    let mut bad = 0usize;
    let mut first = String::new();
    let mut z = 30.0;
    while z <= 1e5 {
        let v0 = bessel_i_scaled(0, z)?.scaled;
        let v1 = bessel_i_scaled(1, z)?.scaled;
        if !(v0.is_finite() && v1.is_finite() && v0 > 0.0 && v1 > 0.0 && v1 < v0) {
            if first.is_empty() {
                first = format!("z = {z}: {v0:e}, {v1:e}");
            }
            bad += 1;
        }
        z *= 1.05;
    }
    Ok(CheckResult::new("bessel_large_z", bad as f64, 0.0, first))
}

/// Φ(0, λ) = 0, Φ(λ, λ) = 2λe⁻², Φ(x, λ) → x - λ for x ≫ λ.
pub fn phi_identities() -> Result<CheckResult> {
    let mut w = Worst::new();
    for lambda in [nm(0.5), nm(5.0), nm(19.0), nm(100.0), 1e-3] {
        w.update(phi_kernel(0.0, lambda)?.abs() / lambda, || {
            format!("Φ(0), λ = {lambda:e}")
        });
        w.update(
            rel(phi_kernel(lambda, lambda)?, 2.0 * lambda * (-2.0f64).exp()),
            || format!("Φ(λ), λ = {lambda:e}"),
        );
        let x = 1e3 * lambda;
        w.update(rel(phi_kernel(x, lambda)?, x - lambda), || {
            format!("Φ(1000λ), λ = {lambda:e}")
        });
    }
    Ok(w.finish("phi_identities", 1e-12))
}

/// Zero-thickness coatings leave Ψ = ρ_grating ρ_sphere Φ(R, λ).
pub fn layer_collapse() -> Result<CheckResult> {
    let core = presets::polystyrene();
    let base = presets::epoxy();
    let radius = 97e-6;
    let sphere = LayeredSphere::new(
        radius,
        core.clone(),
        vec![
            Shell {
                material: presets::chromium(),
                thickness: 0.0,
            },
            Shell {
                material: presets::gold(),
                thickness: 0.0,
            },
        ],
    )?;
    let plate = LayeredPlate::new(base.clone(), presets::gold(), 0.0)?;
    let config = ExperimentConfig {
        sphere,
        plate,
        corrugation: CorrugationGeometry::new(nm(90.0), nm(33.0), nm(200.0))?,
    };
    let mut w = Worst::new();
    for lambda_nm in [0.5, 1.0, 5.0, 19.0, 37.0, 100.0, 1000.0] {
        let lambda = nm(lambda_nm);
        let psi = psi_factor(&config, lambda)?;
        let expected = base.density * core.density * phi_kernel(radius, lambda)?;
        w.update(rel(psi, expected), || format!("λ = {lambda_nm} nm"));
    }
    Ok(w.finish("psi_layer_collapse", 1e-14))
}

/// A₂ = 0, or φ ∈ {0, π}, gives exactly zero lateral force.
pub fn zero_force_limits() -> Result<CheckResult> {
    let mut config = presets::proposed_config();
    let mut worst = 0.0f64;
    let mut at = String::new();
    for lambda_nm in [1.0, 19.0, 100.0] {
        let p = YukawaParams::new(1.0, nm(lambda_nm))?;
        for phi in [0.0, PI] {
            let f = lateral_force(&config, nm(125.0), phi, &p)?.force.abs();
            if f > worst {
                worst = f;
                at = format!("φ = {phi}, λ = {lambda_nm} nm");
            }
        }
    }
    config.corrugation = CorrugationGeometry::new(nm(90.0), 0.0, nm(200.0))?;
    for phi in [0.3, 1.5, 2.7] {
        let p = YukawaParams::new(1.0, nm(19.0))?;
        let f = lateral_force(&config, nm(125.0), phi, &p)?.force.abs();
        let m = max_lateral_force(&config, nm(125.0), &p)?.force.abs();
        if f.max(m) > worst {
            worst = f.max(m);
            at = format!("A2 = 0, φ = {phi}");
        }
    }
    Ok(CheckResult::new("zero_force_limits", worst, 0.0, at))
}

/// Period average by quadrature against e^{-z} I₀(z).
pub fn period_average_check() -> Result<CheckResult> {
    let corr = presets::proposed_config().corrugation;
    let mut w = Worst::new();
    for lambda_nm in [2.0, 5.0, 19.0, 37.0, 100.0] {
        for phi in [0.3, 0.9, 1.5, 2.1, 2.7] {
            let l = nm(lambda_nm);
            let q = period_average(&corr, phi, l)?.value;
            let b = crate::force::b_of_phi(&corr, phi);
            w.update(rel(q, i0e(b / l)), || {
                format!("λ = {lambda_nm} nm, φ = {phi}")
            });
        }
    }
    Ok(w.finish("period_average", 1e-9))
}

/// Radial quadrature against the closed-form sphere kernel.
pub fn sphere_kernel_check() -> Result<CheckResult> {
    let mut w = Worst::new();
    for lambda_nm in [0.5, 2.0, 19.0, 100.0] {
        for x_nm in [0.1, 1.0, 10.0, 50.0, 1000.0, 97_000.0] {
            let (x, l) = (nm(x_nm), nm(lambda_nm));
            let q = sphere_kernel_quadrature(x, l)?.value;
            w.update(rel(q, phi_kernel(x, l)?), || {
                format!("x = {x_nm} nm, λ = {lambda_nm} nm")
            });
        }
    }
    Ok(w.finish("sphere_kernel", 1e-9))
}

/// Closed-form energy against the quadrature reconstruction on the
/// 5 (λ) × 5 (φ) × 3 (a) grid for the proposed configuration.
pub fn energy_grid(psi_perturbation: f64) -> Result<CheckResult> {
    let config = presets::proposed_config();
    let g = PhysicalConstants::CODATA_2018.g;
    let mut w = Worst::new();
    for lambda_nm in [2.0, 5.0, 19.0, 37.0, 100.0] {
        let lambda = nm(lambda_nm);
        let psi = psi_unchecked(&config, lambda) * (1.0 + psi_perturbation);
        let p = YukawaParams::new(1.0, lambda)?;
        for phi in [0.3, 0.9, 1.5, 2.1, 2.7] {
            for a_nm in [125.0, 137.3, 160.0] {
                let a = nm(a_nm);
                let analytic = energy_from_psi(g, psi, &config.corrugation, a, phi, &p);
                let q = energy_quadrature(&config, a, phi, &p)?.value;
                w.update(rel(analytic, q), || {
                    format!("λ = {lambda_nm} nm, φ = {phi}, a = {a_nm} nm")
                });
            }
        }
    }
    Ok(w.finish("energy_closed_form_vs_quadrature", 1e-6))
}

/// Random valid geometries, generated from [`FD_SEED`].
pub fn seeded_points(n: usize) -> Vec<(ExperimentConfig, f64, f64, YukawaParams)> {
    let mut rng = ChaCha8Rng::seed_from_u64(FD_SEED);
    let template = presets::proposed_config();
    (0..n)
        .map(|_| {
            let a1 = nm(rng.gen_range(20.0..100.0));
            let a2 = a1 * rng.gen_range(0.1..1.0);
            let period = nm(rng.gen_range(150.0..800.0));
            let a = a1 + a2 + nm(rng.gen_range(1.0..60.0));
            let lambda = nm(10f64.powf(rng.gen_range(0.3..2.0)));
            let phi = rng.gen_range(0.1..PI - 0.1);
            let mut config = template.clone();
            config.corrugation = CorrugationGeometry::new(a1, a2, period).expect("valid");
            let params = YukawaParams::new(1.0, lambda).expect("valid");
            (config, a, phi, params)
        })
        .collect()
}

/// Analytic force against Richardson differences of the energy in φ.
pub fn force_vs_finite_difference() -> Result<CheckResult> {
    let mut w = Worst::new();
    for (i, (config, a, phi, p)) in seeded_points(20).iter().enumerate() {
        let f = lateral_force(config, *a, *phi, p)?.force;
        let fd = force_finite_difference(config, *a, *phi, p)?;
        w.update(rel(fd, f), || format!("point {i}"));
    }
    Ok(w.finish("force_vs_finite_difference", 1e-8))
}

/// Phase maximizer against a brute-force route: dense scan of |F| refined by
/// golden-section on |F| itself (no slope information). Returns the value and
/// location comparisons.
pub fn phase_maximizer() -> Result<Vec<CheckResult>> {
    let mut value = Worst::new();
    let mut location = Worst::new();
    let geometries = [
        (90.0, 33.0, 200.0),
        (85.4, 13.7, 574.7),
        (60.0, 59.0, 300.0),
        (40.0, 5.0, 150.0),
    ];
    for (a1, a2, period) in geometries {
        let mut config = presets::proposed_config();
        config.corrugation = CorrugationGeometry::new(nm(a1), nm(a2), nm(period))?;
        let a = nm(a1 + a2 + 2.0);
        for lambda_nm in [1.0, 4.5, 19.0, 100.0] {
            let p = YukawaParams::new(1.0, nm(lambda_nm))?;
            let fast = max_lateral_force(&config, a, &p)?;
            let force = |phi: f64| {
                lateral_force(&config, a, phi, &p)
                    .map(|r| r.force.abs())
                    .unwrap_or(f64::NAN)
            };
            let n = 20_000;
            let step = PI / n as f64;
            let best = (1..n).map(|j| j as f64 * step).fold(0.5 * PI, |acc, x| {
                if force(x) > force(acc) {
                    x
                } else {
                    acc
                }
            });
            let (mut lo, mut hi) = (best - step, best + step);
            let inv = (5f64.sqrt() - 1.0) / 2.0;
            while hi - lo > 1e-10 {
                let x1 = hi - inv * (hi - lo);
                let x2 = lo + inv * (hi - lo);
                if force(x1) < force(x2) {
                    lo = x1;
                } else {
                    hi = x2;
                }
            }
            let brute_phi = 0.5 * (lo + hi);
            let brute = force(brute_phi);
            let here = || format!("({a1}, {a2}, {period}) nm, λ = {lambda_nm} nm");
            // Losing to the brute force by more than rounding is a failure;
            // beating it is fine.
            value.update(((brute - fast.force.abs()) / brute).max(0.0), here);
            location.update((fast.phi - brute_phi).abs(), here);
        }
    }
    Ok(vec![
        value.finish("phase_max_value", 1e-12),
        location.finish("phase_max_location", 1e-6),
    ])
}
