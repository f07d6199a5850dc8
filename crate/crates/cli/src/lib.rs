//! `yukawa` command-line frontend.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input or validation
//! error, 3 incompatible data (constraint lines with no common λ range).

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;
use yukawa_core::constraints::{
    compare, exclusion_curve_with_binding, format_line, load_line, write_atomic, ConstraintLine,
};
use yukawa_core::force::{lateral_force, max_lateral_force, yukawa_energy};
use yukawa_core::model::units::{nm, to_nm, to_pn};
use yukawa_core::model::{ev_to_mass, lambda_to_mass, mass_to_ev, mass_to_lambda};
use yukawa_core::optimizer::{evaluate, optimize, sensitivity, Design};
use yukawa_core::oracle::{energy_quadrature, force_finite_difference};
use yukawa_core::verify::{run_suite, VerifyOptions};
use yukawa_core::YukawaParams;

pub mod config;

use config::{GridSpec, LoadedConfig};

pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] yukawa_core::Error),
    #[error("{0}")]
    Verification(String),
    /// Stdout went away (e.g. piped into `head`); not worth a message.
    #[error("output closed")]
    Closed,
}

impl From<yukawa_core::ModelError> for CliError {
    fn from(e: yukawa_core::ModelError) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => EXIT_VERIFY,
            CliError::Closed => 0,
            CliError::Core(yukawa_core::Error::DisjointSpans) => EXIT_DATA,
            _ => EXIT_INPUT,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "yukawa",
    version,
    about = "Lateral Yukawa forces and exclusion curves for corrugated sphere-plate experiments"
)]
pub struct Cli {
    /// Run configuration (TOML). Defaults to the built-in proposed experiment.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory for written files.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// λ grid as lo,hi,n with bounds in nm (overrides the config).
    #[arg(long, global = true, value_name = "LO,HI,N", value_parser = GridSpec::parse)]
    pub grid: Option<GridSpec>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lateral force at one separation and phase.
    Force(ForceArgs),
    /// Exclusion curve α_min(λ) from the config's measurement points.
    Curve(CurveArgs),
    /// Strengthening of a candidate line over reference lines.
    Compare(CompareArgs),
    /// Search the [optimize] box for the strongest design.
    Optimize,
    /// Log-derivatives of α_min with respect to the design parameters.
    Sensitivity(SensitivityArgs),
    /// Run the oracle self-check suite.
    Verify(VerifyArgs),
    /// Convert between interaction range and boson mass.
    Convert(ConvertArgs),
}

#[derive(Debug, Args)]
pub struct ForceArgs {
    /// Separation between the mean corrugation levels, nm.
    #[arg(long)]
    pub a_nm: f64,
    /// Interaction range, nm.
    #[arg(long)]
    pub lambda_nm: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Phase shift, rad. Omit to use the phase maximizing |F|.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    /// Cross-check against finite differences and energy quadrature.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Skip the gnuplot script.
    #[arg(long)]
    pub no_plot: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub candidate: PathBuf,
    #[arg(required = true)]
    pub references: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    #[arg(long, default_value_t = 19.0)]
    pub lambda_nm: f64,
    /// Index of the measurement point in the config.
    #[arg(long, default_value_t = 0)]
    pub point: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Special functions and exact limits only.
    #[arg(long)]
    pub quick: bool,
    /// Relative error injected into Ψ (mutation testing of the suite).
    #[arg(long, hide = true, default_value_t = 0.0)]
    pub perturb_psi: f64,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ConvertArgs {
    #[arg(long)]
    pub lambda_nm: Option<f64>,
    #[arg(long)]
    pub mass_ev: Option<f64>,
}

/// Runs a parsed command, writing human-readable output to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let loaded = match &cli.config {
        Some(p) => LoadedConfig::from_path(p)?,
        None => LoadedConfig::builtin(),
    };
    let out_dir = cli
        .out
        .clone()
        .or_else(|| loaded.out_dir())
        .unwrap_or_else(|| PathBuf::from("."));
    match &cli.command {
        Command::Force(args) => cmd_force(&loaded, args, out),
        Command::Curve(args) => cmd_curve(&loaded, cli.grid, &out_dir, args, out),
        Command::Compare(args) => cmd_compare(args, cli.grid, &out_dir, out),
        Command::Optimize => cmd_optimize(&loaded, &out_dir, out),
        Command::Sensitivity(args) => cmd_sensitivity(&loaded, args, out),
        Command::Verify(args) => cmd_verify(args, out),
        Command::Convert(args) => cmd_convert(args, out),
    }
}

fn io(e: std::io::Error) -> CliError {
    if e.kind() == std::io::ErrorKind::BrokenPipe {
        return CliError::Closed;
    }
    CliError::Input(format!("cannot write output: {e}"))
}

/// Six significant digits; zero prints as `0.00000`.
pub fn sig6(v: f64) -> String {
    if v == 0.0 {
        return "0.00000".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("integer exponent");
    if (-4..6).contains(&exp) {
        format!("{:.*}", (5 - exp) as usize, v)
    } else {
        sci
    }
}

pub const FORCE_HEADER: &str = "a_m,phi_rad,alpha,lambda_m,force_n";

pub fn cmd_force(
    loaded: &LoadedConfig,
    args: &ForceArgs,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let config = loaded.run.experiment()?;
    let params = YukawaParams::new(args.alpha, nm(args.lambda_nm))?;
    let a = nm(args.a_nm);
    let result = match args.phi {
        Some(phi) => lateral_force(&config, a, phi, &params)?,
        None => max_lateral_force(&config, a, &params)?,
    };
    writeln!(out, "lateral force: {} pN", sig6(to_pn(result.force))).map_err(io)?;
    let how = if args.phi.is_some() {
        "given"
    } else {
        "maximizing |F|"
    };
    writeln!(out, "phase: {} rad ({how})", sig6(result.phi)).map_err(io)?;

    let mut failed = Vec::new();
    if args.oracle {
        let fd = force_finite_difference(&config, a, result.phi, &params)?;
        let gap = relative_gap(fd, result.force);
        writeln!(
            out,
            "oracle: finite-difference gap {gap:.3e} (tolerance 1e-8)"
        )
        .map_err(io)?;
        if gap > 1e-8 {
            failed.push("finite difference");
        }
        match energy_quadrature(&config, a, result.phi, &params) {
            Ok(q) => {
                let e = yukawa_energy(&config, a, result.phi, &params)?;
                let gap = relative_gap(e, q.value);
                writeln!(
                    out,
                    "oracle: energy quadrature gap {gap:.3e} (tolerance 1e-6)"
                )
                .map_err(io)?;
                if gap > 1e-6 {
                    failed.push("energy quadrature");
                }
            }
            Err(yukawa_core::Error::Domain { domain, .. }) => {
                writeln!(
                    out,
                    "oracle: energy quadrature skipped (λ outside {domain})"
                )
                .map_err(io)?;
            }
            Err(e) => return Err(e.into()),
        }
    }
    writeln!(out, "{FORCE_HEADER}").map_err(io)?;
    writeln!(
        out,
        "{:e},{:e},{:e},{:e},{:e}",
        a, result.phi, params.alpha, params.lambda, result.force
    )
    .map_err(io)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "oracle mismatch: {}",
            failed.join(", ")
        )))
    }
}

fn relative_gap(x: f64, reference: f64) -> f64 {
    if x == reference {
        0.0
    } else {
        ((x - reference) / reference).abs()
    }
}

fn file_stem(label: &str) -> String {
    let s: String = label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if s.is_empty() {
        "exclusion".into()
    } else {
        s
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))
}

pub fn cmd_curve(
    loaded: &LoadedConfig,
    grid: Option<GridSpec>,
    out_dir: &Path,
    args: &CurveArgs,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let run = &loaded.run;
    let config = run.experiment()?;
    let points = run.measurement_points(&config)?;
    if points.is_empty() {
        return Err(CliError::Input("config has no [[points]]".into()));
    }
    let lambdas = grid.unwrap_or_else(|| run.grid()).lambdas()?;
    let label = run.label.clone().unwrap_or_else(|| "exclusion".into());
    let mut curve = exclusion_curve_with_binding(&config, &points, &lambdas)?;
    curve.line.label = label.clone();

    ensure_dir(out_dir)?;
    let stem = file_stem(&label);
    let csv = out_dir.join(format!("{stem}.csv"));
    write_atomic(&csv, format_line(&curve.line).as_bytes())?;
    writeln!(out, "wrote {} ({} points)", csv.display(), lambdas.len()).map_err(io)?;
    let ref_paths = loaded.references();
    let references = ref_paths
        .iter()
        .map(|p| load_line(p))
        .collect::<Result<Vec<_>, _>>()?;
    if !args.no_plot {
        let gp = out_dir.join(format!("{stem}.gp"));
        write_atomic(&gp, gnuplot_script(&stem, &label, &ref_paths).as_bytes())?;
        writeln!(out, "wrote {}", gp.display()).map_err(io)?;
    }

    let pts = curve.line.points();
    let (lmin, amin) = pts
        .iter()
        .copied()
        .fold(pts[0], |acc, p| if p.1 < acc.1 { p } else { acc });
    writeln!(
        out,
        "strongest constraint: alpha = {} at lambda = {} nm",
        sig6(amin),
        sig6(to_nm(lmin))
    )
    .map_err(io)?;
    for (i, w) in curve.binding.windows(2).enumerate() {
        if w[0] != w[1] {
            writeln!(
                out,
                "binding separation {} nm -> {} nm between lambda = {} and {} nm",
                sig6(to_nm(points[w[0]].a)),
                sig6(to_nm(points[w[1]].a)),
                sig6(to_nm(lambdas[i])),
                sig6(to_nm(lambdas[i + 1]))
            )
            .map_err(io)?;
        }
    }
    for (r, path) in references.iter().zip(&ref_paths) {
        let name = if r.label.is_empty() {
            path.display().to_string()
        } else {
            r.label.clone()
        };
        match compare(&curve.line, std::slice::from_ref(r), &lambdas) {
            Ok(report) => {
                let (l, ratio) = report.max_ratio;
                writeln!(
                    out,
                    "vs {name}: max ratio {} at lambda = {} nm",
                    sig6(ratio),
                    sig6(to_nm(l))
                )
                .map_err(io)?;
            }
            Err(yukawa_core::Error::DisjointSpans) => {
                writeln!(out, "vs {name}: no overlap in lambda").map_err(io)?;
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

fn gnuplot_script(stem: &str, label: &str, references: &[PathBuf]) -> String {
    let mut plot = format!(
        "plot \"{stem}.csv\" using 1:2 with lines lw 2 title \"{}\"",
        label.replace('"', "'")
    );
    for r in references {
        let name = r
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        plot.push_str(&format!(
            ", \\\n     \"{}\" using 1:2 with lines dt 2 title \"{}\"",
            std::fs::canonicalize(r)
                .unwrap_or_else(|_| r.clone())
                .display()
                .to_string()
                .replace('"', "'"),
            name.replace('"', "'")
        ));
    }
    format!(
        "# gnuplot script for {stem}.csv\n\
         set datafile separator \",\"\n\
         set datafile commentschars \"#l\"\n\
         set logscale xy\n\
         set format y \"10^{{%L}}\"\n\
         set xlabel \"lambda (m)\"\n\
         set ylabel \"|alpha|\"\n\
         set key top right\n\
         set terminal pngcairo size 800,600\n\
         set output \"{stem}.png\"\n\
         {plot}\n"
    )
}

pub const RATIO_HEADER: &str = "lambda_m,ratio";

pub fn cmd_compare(
    args: &CompareArgs,
    grid: Option<GridSpec>,
    out_dir: &Path,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let candidate = load_line(&args.candidate)?;
    let references: Vec<ConstraintLine> = args
        .references
        .iter()
        .map(|p| load_line(p))
        .collect::<Result<_, _>>()?;
    let lambdas = match grid {
        Some(g) => g.lambdas()?,
        None => candidate.lambdas(),
    };
    let report = compare(&candidate, &references, &lambdas)?;

    ensure_dir(out_dir)?;
    let path = out_dir.join("ratios.csv");
    let mut csv = String::from(RATIO_HEADER);
    csv.push('\n');
    for (l, r) in report.lambda_grid.iter().zip(&report.ratio) {
        csv.push_str(&format!("{l:e},{r:e}\n"));
    }
    write_atomic(&path, csv.as_bytes())?;

    let name = |l: &ConstraintLine, p: &Path| {
        if l.label.is_empty() {
            p.display().to_string()
        } else {
            l.label.clone()
        }
    };
    writeln!(out, "candidate: {}", name(&candidate, &args.candidate)).map_err(io)?;
    for (l, p) in references.iter().zip(&args.references) {
        writeln!(out, "reference: {}", name(l, p)).map_err(io)?;
    }
    let (g0, g1) = (
        report.lambda_grid[0],
        report.lambda_grid[report.lambda_grid.len() - 1],
    );
    writeln!(
        out,
        "compared on {} points over [{}, {}] nm",
        report.lambda_grid.len(),
        sig6(to_nm(g0)),
        sig6(to_nm(g1))
    )
    .map_err(io)?;
    let (lmax, rmax) = report.max_ratio;
    writeln!(
        out,
        "max ratio: {} at lambda = {} nm",
        sig6(rmax),
        sig6(to_nm(lmax))
    )
    .map_err(io)?;
    match report.dominance_window {
        Some((lo, hi)) => writeln!(
            out,
            "dominance window: [{}, {}] nm",
            sig6(to_nm(lo)),
            sig6(to_nm(hi))
        ),
        None => writeln!(out, "dominance window: none"),
    }
    .map_err(io)?;
    writeln!(out, "wrote {}", path.display()).map_err(io)?;
    Ok(())
}

pub const TRACE_HEADER: &str = "evaluation,a1_m,a2_m,period_m,a_m,objective";

pub fn cmd_optimize(
    loaded: &LoadedConfig,
    out_dir: &Path,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let run = &loaded.run;
    let template = run.experiment()?;
    let problem = run.problem()?;
    let result = optimize(&problem, &template)?;

    if let Some(p) = run.points.first() {
        let c = &template.corrugation;
        let current = Design {
            a1: c.a1,
            a2: c.a2,
            period: c.period,
            a: nm(p.a_nm),
        };
        let v = evaluate(&problem, &template, &current)?;
        writeln!(out, "configured design objective: {}", sig6(v)).map_err(io)?;
    }
    let d = result.design;
    writeln!(
        out,
        "best design: A1 = {} nm, A2 = {} nm, period = {} nm, a = {} nm",
        sig6(to_nm(d.a1)),
        sig6(to_nm(d.a2)),
        sig6(to_nm(d.period)),
        sig6(to_nm(d.a))
    )
    .map_err(io)?;
    writeln!(out, "objective: {}", sig6(result.objective)).map_err(io)?;
    writeln!(
        out,
        "evaluations: {} ({} scan points)",
        result.evaluations,
        result.scan.len()
    )
    .map_err(io)?;

    ensure_dir(out_dir)?;
    let path = out_dir.join("optimize_trace.csv");
    let mut csv = String::from(TRACE_HEADER);
    csv.push('\n');
    for t in &result.trace {
        let d = t.design;
        csv.push_str(&format!(
            "{},{:e},{:e},{:e},{:e},{:e}\n",
            t.evaluation, d.a1, d.a2, d.period, d.a, t.objective
        ));
    }
    write_atomic(&path, csv.as_bytes())?;
    writeln!(out, "wrote {}", path.display()).map_err(io)?;
    Ok(())
}

pub fn cmd_sensitivity(
    loaded: &LoadedConfig,
    args: &SensitivityArgs,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let config = loaded.run.experiment()?;
    let points = loaded.run.measurement_points(&config)?;
    let point = points.get(args.point).ok_or_else(|| {
        CliError::Input(format!(
            "point index {} out of range ({} points)",
            args.point,
            points.len()
        ))
    })?;
    let rows = sensitivity(&config, point, nm(args.lambda_nm))?;
    writeln!(
        out,
        "parameter,dlog_alpha_dlog_p,forward,backward,step,shrunk,consistent"
    )
    .map_err(io)?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{:e},{},{}",
            r.parameter.name(),
            sig6(r.derivative),
            sig6(r.forward),
            sig6(r.backward),
            r.step,
            r.shrunk,
            r.consistent
        )
        .map_err(io)?;
    }
    Ok(())
}

pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let results = run_suite(&VerifyOptions {
        quick: args.quick,
        psi_perturbation: args.perturb_psi,
    })?;
    let width = results.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &results {
        writeln!(
            out,
            "{}  {:width$}  gap {:.2e}  tol {:.0e}  {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.gap,
            c.tolerance,
            c.detail
        )
        .map_err(io)?;
    }
    let failed: Vec<String> = results
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} (gap {:.3e} > {:.0e})", c.name, c.gap, c.tolerance))
        .collect();
    if failed.is_empty() {
        writeln!(out, "all {} checks passed", results.len()).map_err(io)?;
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "failed: {}",
            failed.join("; ")
        )))
    }
}

pub fn cmd_convert(args: &ConvertArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if let Some(l) = args.lambda_nm {
        let m = lambda_to_mass(nm(l))?;
        writeln!(
            out,
            "lambda = {} nm  ->  m = {:e} kg = {} eV",
            sig6(l),
            m,
            sig6(mass_to_ev(m))
        )
        .map_err(io)?;
    }
    if let Some(ev) = args.mass_ev {
        let l = mass_to_lambda(ev_to_mass(ev))?;
        writeln!(
            out,
            "m = {} eV  ->  lambda = {} nm",
            sig6(ev),
            sig6(to_nm(l))
        )
        .map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.0), "0.00000");
        assert_eq!(sig6(1.11), "1.11000");
        assert_eq!(sig6(-123.4567), "-123.457");
        assert_eq!(sig6(9.999996), "10.0000");
        assert_eq!(sig6(1.234567e-10), "1.23457e-10");
        assert_eq!(sig6(2.5e16), "2.50000e16");
        assert_eq!(sig6(0.000123456), "0.000123456");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Input("x".into()).exit_code(), 2);
        assert_eq!(CliError::Verification("x".into()).exit_code(), 1);
        assert_eq!(
            CliError::Core(yukawa_core::Error::DisjointSpans).exit_code(),
            3
        );
        assert_eq!(
            CliError::Core(yukawa_core::Error::InfeasibleBounds("x".into())).exit_code(),
            2
        );
    }

    #[test]
    fn stems_are_sanitized() {
        assert_eq!(file_stem("line 1/a"), "line_1_a");
        assert_eq!(file_stem(""), "exclusion");
    }
}
