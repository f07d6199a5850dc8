//! The binary against direct library calls on identical inputs.

use std::path::Path;
use std::process::{Command, Output};

use yukawa_core::constraints::{compare, exclusion_curve, load_line, parse_line, Provenance};
use yukawa_core::force::{lateral_force, max_lateral_force, YukawaParams};
use yukawa_core::model::units::nm;
use yukawa_core::optimizer::{optimize, OptimizationProblem};
use yukawa_core::presets::{performed_config, performed_points, proposed_config, proposed_points};

const BIN: &str = env!("CARGO_BIN_EXE_yukawa");

fn configs() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn yukawa(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn last_row(o: &Output) -> Vec<f64> {
    stdout(o)
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|s| s.parse().unwrap())
        .collect()
}

#[test]
fn force_matches_library_at_maximizing_phase() {
    let o = yukawa(&["force", "--a-nm", "125", "--lambda-nm", "19"]);
    assert!(o.status.success());
    let row = last_row(&o);
    let p = YukawaParams::new(1.0, nm(19.0)).unwrap();
    let lib = max_lateral_force(&proposed_config(), nm(125.0), &p).unwrap();
    assert_eq!(row[1], lib.phi);
    assert_eq!(row[4], lib.force);
}

#[test]
fn force_at_given_phase_and_zero_cases() {
    let o = yukawa(&[
        "force",
        "--a-nm",
        "137.3",
        "--lambda-nm",
        "5",
        "--phi",
        "0.9",
        "--alpha",
        "3e20",
    ]);
    let p = YukawaParams::new(3e20, nm(5.0)).unwrap();
    let lib = lateral_force(&proposed_config(), nm(137.3), 0.9, &p).unwrap();
    assert_eq!(last_row(&o)[4], lib.force);

    let o = yukawa(&["force", "--a-nm", "125", "--lambda-nm", "19", "--phi", "0"]);
    assert!(stdout(&o).starts_with("lateral force: 0.00000 pN"));
    let o = yukawa(&[
        "force",
        "--a-nm",
        "125",
        "--lambda-nm",
        "19",
        "--alpha",
        "0",
    ]);
    assert!(stdout(&o).starts_with("lateral force: 0.00000 pN"));
}

#[test]
fn force_oracle_reports_gaps() {
    let o = yukawa(&["force", "--a-nm", "125", "--lambda-nm", "19", "--oracle"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("finite-difference gap"));
    assert!(s.contains("energy quadrature gap"));
}

#[test]
fn validation_failures_exit_2() {
    let o = yukawa(&["force", "--a-nm", "120", "--lambda-nm", "19"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("surfaces touch"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    let text = std::fs::read_to_string(configs().join("proposed.toml")).unwrap();
    std::fs::write(&cfg, text.replace("a1_nm = 90", "a1_nm = 90\nwidth_nm = 3")).unwrap();
    let o = yukawa(&["--config", cfg.to_str().unwrap(), "curve"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("width_nm"));

    let o = yukawa(&["--grid", "1,100", "curve"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn curve_matches_library_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = configs().join("performed.toml");
    let cfg = cfg.to_str().unwrap();
    let o = yukawa(&["--config", cfg, "--out", out, "--grid", "1,100,25", "curve"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let first = std::fs::read(dir.path().join("performed.csv")).unwrap();
    let line = parse_line(std::str::from_utf8(&first).unwrap(), Provenance::Ingested).unwrap();
    let grid = yukawa_core::constraints::log_grid(nm(1.0), nm(100.0), 25).unwrap();
    let lib = exclusion_curve(&performed_config(), &performed_points(), &grid).unwrap();
    assert_eq!(line.points(), lib.points());
    assert_eq!(line.label, "performed");

    yukawa(&["--config", cfg, "--out", out, "--grid", "1,100,25", "curve"]);
    assert_eq!(
        std::fs::read(dir.path().join("performed.csv")).unwrap(),
        first
    );
    assert!(dir.path().join("performed.gp").exists());
    // Only the outputs remain: no temporary files left behind.
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
}

#[test]
fn single_point_grid_gives_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = yukawa(&[
        "--out",
        dir.path().to_str().unwrap(),
        "--grid",
        "19,19,1",
        "curve",
        "--no-plot",
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("proposed.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], "lambda_m,alpha");
}

fn write_curves(dir: &Path) {
    let out = dir.to_str().unwrap();
    for name in ["proposed", "performed"] {
        let cfg = configs().join(format!("{name}.toml"));
        let o = yukawa(&[
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out,
            "--grid",
            "1,100,40",
            "curve",
        ]);
        assert!(o.status.success());
    }
}

#[test]
fn compare_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    write_curves(dir.path());
    let cand = dir.path().join("proposed.csv");
    let refp = dir.path().join("performed.csv");
    let o = yukawa(&[
        "--out",
        dir.path().to_str().unwrap(),
        "compare",
        cand.to_str().unwrap(),
        refp.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let c = load_line(&cand).unwrap();
    let r = load_line(&refp).unwrap();
    let lib = compare(&c, &[r], &c.lambdas()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("ratios.csv")).unwrap();
    let ratios: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(ratios, lib.ratio);
    assert!(stdout(&o).contains("dominance window: [1.00000, 100.000] nm"));

    // Against itself: ratio 1 everywhere, no window.
    let o = yukawa(&[
        "--out",
        dir.path().to_str().unwrap(),
        "compare",
        cand.to_str().unwrap(),
        cand.to_str().unwrap(),
    ]);
    assert!(stdout(&o).contains("dominance window: none"));
}

#[test]
fn compare_rejects_disjoint_and_malformed_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let bad = dir.path().join("bad.csv");
    std::fs::write(&a, "lambda_m,alpha\n1e-9,1e20\n2e-9,1e19\n").unwrap();
    std::fs::write(&b, "lambda_m,alpha\n1e-8,1e20\n2e-8,1e19\n").unwrap();
    std::fs::write(&bad, "lambda_m,alpha\n2e-9,1e20\n1e-9,1e19\n").unwrap();
    let out = dir.path().to_str().unwrap();
    let o = yukawa(&[
        "--out",
        out,
        "compare",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    let o = yukawa(&[
        "--out",
        out,
        "compare",
        a.to_str().unwrap(),
        bad.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn optimize_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let o = yukawa(&["--out", dir.path().to_str().unwrap(), "optimize"]);
    assert!(o.status.success());
    let lib = optimize(&OptimizationProblem::proposal_box(), &proposed_config()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("optimize_trace.csv")).unwrap();
    let last: Vec<f64> = text
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|s| s.parse().unwrap())
        .collect();
    let d = lib.design;
    assert_eq!(&last[1..], &[d.a1, d.a2, d.period, d.a, lib.objective]);
    assert_eq!(last[0] as usize, lib.trace.last().unwrap().evaluation);
}

#[test]
fn optimize_echoes_a_single_point_box_and_rejects_empty_ones() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("proposed.toml")).unwrap();
    let point = text
        .replace("a1_nm = [40, 95]", "a1_nm = [90, 90]")
        .replace("a2_nm = [10, 40]", "a2_nm = [33, 33]")
        .replace("period_nm = [150, 600]", "period_nm = [200, 200]")
        .replace("a_nm = [52, 300]", "a_nm = [125, 125]");
    let cfg = dir.path().join("point.toml");
    std::fs::write(&cfg, &point).unwrap();
    let o = yukawa(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "optimize",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o)
        .contains("A1 = 90.0000 nm, A2 = 33.0000 nm, period = 200.000 nm, a = 125.000 nm"));

    let empty = text.replace("a_nm = [52, 300]", "a_nm = [20, 40]");
    std::fs::write(&cfg, empty).unwrap();
    let o = yukawa(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "optimize",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    let o = yukawa(&["verify", "--quick"]);
    assert!(o.status.success());
    let o = yukawa(&["verify", "--perturb-psi", "1e-3"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("energy_closed_form_vs_quadrature"), "{err}");
}

#[test]
fn convert_round_trips() {
    let o = yukawa(&["convert", "--lambda-nm", "19"]);
    assert!(stdout(&o).contains("10.3856 eV"));
    // ħ/(mc) with m = 10 eV/c²: 19.7327 nm.
    let o = yukawa(&["convert", "--mass-ev", "10"]);
    assert!(stdout(&o).contains("19.7327 nm"), "{}", stdout(&o));
    assert_eq!(yukawa(&["convert"]).status.code(), Some(2));
}

#[test]
fn reference_lines_resolve_next_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    write_curves(dir.path());
    let text = std::fs::read_to_string(configs().join("proposed.toml")).unwrap();
    let cfg = dir.path().join("with_refs.toml");
    std::fs::write(
        &cfg,
        text.replace(
            "label = \"proposed\"",
            "label = \"proposed\"\nreferences = [\"performed.csv\"]",
        ),
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = yukawa(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--grid",
        "1,100,40",
        "curve",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let line = load_line(&out.join("proposed.csv")).unwrap();
    let grid = line.lambdas();
    let lib = exclusion_curve(&proposed_config(), &proposed_points(), &grid).unwrap();
    assert_eq!(line.points(), lib.points());
}
