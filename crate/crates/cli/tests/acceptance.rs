//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Runs single-threaded so the timing budgets mean what they say. The
//! cross-experiment factors need digitized curves; point `YUKAWA_N2_CSV` and
//! `YUKAWA_N3_CSV` at them to enable that check, otherwise it is skipped.

use std::process::Command;
use std::time::{Duration, Instant};

use yukawa_core::constraints::{
    alpha_min, compare, exclusion_curve, interpolate, load_line, log_grid,
};
use yukawa_core::force::{lateral_force, YukawaParams};
use yukawa_core::model::units::{nm, pn};
use yukawa_core::optimizer::{optimize, Design, Interval, OptimizationProblem};
use yukawa_core::presets::{performed_config, performed_points, proposed_config, proposed_points};
use yukawa_core::verify::{self, CheckResult};
use yukawa_core::MeasurementPoint;

const BIN: &str = env!("CARGO_BIN_EXE_yukawa");

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn from_checks(checks: &[CheckResult], elapsed: Duration, budget: Option<f64>) -> Self {
        let mut passed = checks.iter().all(|c| c.passed);
        let mut parts: Vec<String> = checks
            .iter()
            .map(|c| format!("{} gap {:.2e} tol {:.0e}", c.name, c.gap, c.tolerance))
            .collect();
        if let Some(limit) = budget {
            let secs = elapsed.as_secs_f64();
            passed &= secs <= limit;
            parts.push(format!("{secs:.2} s of {limit} s"));
        }
        Outcome {
            passed,
            detail: parts.join("; "),
        }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn c1_oracle_equivalence() -> Outcome {
    let (r, dt) = timed(|| verify::energy_grid(0.0));
    Outcome::from_checks(&[r.unwrap()], dt, Some(60.0))
}

fn c2_force_consistency() -> Outcome {
    let (r, dt) = timed(verify::force_vs_finite_difference);
    Outcome::from_checks(&[r.unwrap()], dt, Some(5.0))
}

fn c3_special_functions() -> Outcome {
    let checks = [
        verify::bessel_vs_series().unwrap(),
        verify::bessel_large_arguments().unwrap(),
        verify::phi_identities().unwrap(),
    ];
    Outcome::from_checks(&checks, Duration::ZERO, None)
}

fn c4_reductions() -> Outcome {
    let checks = [
        verify::layer_collapse().unwrap(),
        verify::zero_force_limits().unwrap(),
    ];
    Outcome::from_checks(&checks, Duration::ZERO, None)
}

fn c5_linearity() -> Outcome {
    let cfg = proposed_config();
    let mut worst = 0.0f64;
    let mut exact_doubling = true;
    for &(a, l, phi) in &[
        (125.0, 19.0, 2.25),
        (137.3, 4.5, 0.7),
        (160.0, 100.0, 1.9),
        (300.0, 2.0, 3.0),
    ] {
        let base = alpha_min(&cfg, &MeasurementPoint::new(nm(a), pn(1.0)), nm(l))
            .unwrap()
            .unwrap();
        for k in [0.47, 1.11, 2.0, 7.3, 1e3] {
            let v = alpha_min(&cfg, &MeasurementPoint::new(nm(a), pn(1.0) * k), nm(l))
                .unwrap()
                .unwrap();
            worst = worst.max(((v - k * base) / (k * base)).abs());
        }
        let one = lateral_force(&cfg, nm(a), phi, &YukawaParams::new(1.0, nm(l)).unwrap())
            .unwrap()
            .force;
        for alpha in [-3.0e20, 1e-3, 5.0, 2.0] {
            let f = lateral_force(&cfg, nm(a), phi, &YukawaParams::new(alpha, nm(l)).unwrap())
                .unwrap()
                .force;
            worst = worst.max(((f - alpha * one) / (alpha * one)).abs());
            if alpha == 2.0 {
                exact_doubling &= f == 2.0 * one;
            }
        }
    }
    // "Exact up to rounding": a couple of ulps from the products involved.
    let tol = 4.0 * f64::EPSILON;
    Outcome {
        passed: worst <= tol && exact_doubling,
        detail: format!(
            "max relative deviation {worst:.2e} tol {tol:.1e}; doubling exact: {exact_doubling}"
        ),
    }
}

fn c6_design_benchmark() -> Outcome {
    let grid = log_grid(nm(4.5), nm(37.0), 200).unwrap();
    let line1 = exclusion_curve(&performed_config(), &performed_points(), &grid).unwrap();
    let dashed = exclusion_curve(&proposed_config(), &proposed_points(), &grid).unwrap();
    let at19 = interpolate(&line1, nm(19.0)).unwrap() / interpolate(&dashed, nm(19.0)).unwrap();
    let report = compare(&dashed, &[line1], &grid).unwrap();
    let min = report.ratio.iter().copied().fold(f64::INFINITY, f64::min);
    Outcome {
        passed: min > 1.0 && report.lambda_grid.len() == grid.len(),
        detail: format!(
            "line 1 / dashed over [4.5, 37] nm: min {min:.3}, at 19 nm {at19:.1}, max {:.3e}",
            report.max_ratio.1
        ),
    }
}

/// Digitized-curve factors; `None` when no files are supplied.
fn c6_cross_experiment() -> Option<Outcome> {
    let n2 = std::env::var_os("YUKAWA_N2_CSV");
    let n3 = std::env::var_os("YUKAWA_N3_CSV");
    if n2.is_none() && n3.is_none() {
        return None;
    }
    let grid = log_grid(nm(1.0), nm(100.0), 200).unwrap();
    let dashed = exclusion_curve(&proposed_config(), &proposed_points(), &grid).unwrap();
    let mut passed = true;
    let mut parts = Vec::new();
    if let Some(path) = n2 {
        match load_line(std::path::Path::new(&path)).and_then(|r| compare(&dashed, &[r], &grid)) {
            Ok(rep) => {
                let m = rep.max_ratio.1;
                let ok = (m / 600.0 - 1.0).abs() <= 0.25;
                passed &= ok;
                parts.push(format!("vs n2 max ratio {m:.1} (600 ± 25%)"));
            }
            Err(e) => {
                passed = false;
                parts.push(format!("n2: {e}"));
            }
        }
    }
    if let Some(path) = n3 {
        let r = load_line(std::path::Path::new(&path)).and_then(|r| {
            let rep = compare(&dashed, std::slice::from_ref(&r), &grid)?;
            let ratio = interpolate(&r, nm(19.0))? / interpolate(&dashed, nm(19.0))?;
            Ok((rep.max_ratio.1, ratio))
        });
        match r {
            Ok((max, at19)) => {
                let ok = (at19 / 41.0 - 1.0).abs() <= 0.25;
                passed &= ok;
                parts.push(format!("vs n3 at 19 nm {at19:.1} (41 ± 25%), max {max:.1}"));
            }
            Err(e) => {
                passed = false;
                parts.push(format!("n3: {e}"));
            }
        }
    }
    Some(Outcome {
        passed,
        detail: parts.join("; "),
    })
}

fn c7_curve_runtime() -> Outcome {
    let grid = log_grid(nm(1.0), nm(100.0), 200).unwrap();
    let (curve, dt) = timed(|| exclusion_curve(&proposed_config(), &proposed_points(), &grid));
    let ok = curve.map(|c| c.points().len() == 200).unwrap_or(false);
    let secs = dt.as_secs_f64();
    Outcome {
        passed: ok && secs <= 10.0,
        detail: format!("200 points, 2 measurements, {secs:.3} s of 10 s"),
    }
}

fn c8_optimizer() -> Outcome {
    let cfg = proposed_config();
    let problem = OptimizationProblem::proposal_box();
    let reference = Design {
        a1: nm(90.0),
        a2: nm(33.0),
        period: nm(200.0),
        a: nm(125.0),
    };
    let design_value = alpha_min(
        &cfg,
        &MeasurementPoint::new(reference.a, pn(1.11)),
        nm(19.0),
    )
    .unwrap()
    .unwrap();
    let (best, dt) = timed(|| optimize(&problem, &cfg).unwrap());
    let point = OptimizationProblem {
        a1: Interval::point(reference.a1),
        a2: Interval::point(reference.a2),
        period: Interval::point(reference.period),
        separation: Interval::point(reference.a),
        ..problem.clone()
    };
    let echo = optimize(&point, &cfg).unwrap();
    let echoed = echo.design == reference && echo.objective == design_value;
    Outcome {
        passed: problem.is_feasible(&reference) && best.objective <= design_value && echoed,
        detail: format!(
            "best {:.4e} vs design {design_value:.4e} ({:.2} s); single-point box echoed: {echoed}",
            best.objective,
            dt.as_secs_f64()
        ),
    }
}

fn c9_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = Command::new(BIN)
            .args(["--out", out.to_str().unwrap(), "curve"])
            .output()
            .unwrap();
        if !o.status.success() {
            return Outcome {
                passed: false,
                detail: String::from_utf8_lossy(&o.stderr).into(),
            };
        }
        let csv = std::fs::read(out.join("proposed.csv")).unwrap();
        let gp = std::fs::read(out.join("proposed.gp")).unwrap();
        outputs.push((csv, gp));
    }
    let identical = outputs[0] == outputs[1];
    let v = Command::new(BIN).arg("verify").output().unwrap();
    let green = v.status.success();
    Outcome {
        passed: identical && green,
        detail: format!(
            "curve files byte-identical: {identical}; verify exit {:?}",
            v.status.code()
        ),
    }
}

fn main() {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build_global()
        .unwrap();

    let criteria: [Criterion; 9] = [
        ("oracle equivalence (energy grid)", c1_oracle_equivalence),
        ("force vs energy derivative", c2_force_consistency),
        ("special functions", c3_special_functions),
        ("layer collapse and zero force", c4_reductions),
        ("linearity laws", c5_linearity),
        ("design benchmark", c6_design_benchmark),
        ("exclusion curve runtime", c7_curve_runtime),
        ("optimizer sanity", c8_optimizer),
        ("determinism", c9_determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failures += usize::from(!o.passed);
        println!(
            "{} {} {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
        if i == 5 {
            match c6_cross_experiment() {
                Some(o) => {
                    failures += usize::from(!o.passed);
                    println!(
                        "{} 6b cross-experiment factors: {}",
                        if o.passed { "PASS" } else { "FAIL" },
                        o.detail
                    );
                }
                None => {
                    println!("SKIP 6b cross-experiment factors: set YUKAWA_N2_CSV / YUKAWA_N3_CSV")
                }
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
