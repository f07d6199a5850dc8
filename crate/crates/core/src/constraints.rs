//! Exclusion curves in the (λ, α) plane: derivation from error budgets,
//! interpolation, comparison between experiments, and CSV persistence.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::force::{max_lateral_force, YukawaParams};
use crate::model::{units::nm, validate, ExperimentConfig, MeasurementPoint, Violation};

/// CSV header of a constraint-line file.
pub const CSV_HEADER: &str = "lambda_m,alpha";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Computed,
    Ingested,
}

/// Sampled exclusion curve: pairs (λ, α) above which the plane is excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintLine {
    pub label: String,
    points: Vec<(f64, f64)>,
    pub provenance: Provenance,
}

impl ConstraintLine {
    /// Builds a line, checking positivity, finiteness and strict λ ordering.
    ///
    /// A single point is accepted (a one-point grid is a valid curve); files
    /// must hold at least two, see [`load_line`].
    pub fn new(
        label: impl Into<String>,
        points: Vec<(f64, f64)>,
        provenance: Provenance,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidLine("no points".into()));
        }
        for (i, &(l, a)) in points.iter().enumerate() {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidLine(format!(
                    "point {i}: lambda {l} must be > 0"
                )));
            }
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::InvalidLine(format!(
                    "point {i}: alpha {a} must be > 0"
                )));
            }
            if i > 0 && l <= points[i - 1].0 {
                return Err(Error::InvalidLine(format!(
                    "point {i}: lambda {l:e} does not exceed the previous {:e}",
                    points[i - 1].0
                )));
            }
        }
        Ok(Self {
            label: label.into(),
            points,
            provenance,
        })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn span(&self) -> (f64, f64) {
        (self.points[0].0, self.points[self.points.len() - 1].0)
    }

    pub fn covers(&self, lambda: f64) -> bool {
        let (lo, hi) = self.span();
        lambda >= lo && lambda <= hi
    }

    /// Same line with every α multiplied by `factor` (> 0).
    pub fn scaled(&self, factor: f64, label: impl Into<String>) -> Result<Self> {
        Self::new(
            label,
            self.points.iter().map(|&(l, a)| (l, a * factor)).collect(),
            self.provenance,
        )
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive; `n = 1` gives `[lo]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Empty("lambda grid"));
    }
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi >= lo) {
        return Err(Error::Domain {
            name: "lambda grid bounds",
            value: if lo > 0.0 { hi } else { lo },
            domain: "0 < lo <= hi",
        });
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    if hi == lo {
        return Err(Error::Domain {
            name: "lambda grid upper bound",
            value: hi,
            domain: "hi > lo when n > 1",
        });
    }
    let (l0, l1) = (lo.ln(), hi.ln());
    let step = (l1 - l0) / (n - 1) as f64;
    let mut g: Vec<f64> = (0..n).map(|i| (l0 + step * i as f64).exp()).collect();
    g[0] = lo;
    g[n - 1] = hi;
    Ok(g)
}

/// 200 log-spaced points over 1–100 nm.
pub fn default_lambda_grid() -> Vec<f64> {
    log_grid(nm(1.0), nm(100.0), 200).expect("static grid")
}

/// Smallest |α| still compatible with the error budget at `point`: the force
/// at α = 1, maximized over the phase shift, divided into ΔF.
///
/// `Ok(None)` means the geometry produces no lateral signal (A₁A₂ = 0, or the
/// signal underflows), so nothing is constrained.
pub fn alpha_min(
    config: &ExperimentConfig,
    point: &MeasurementPoint,
    lambda: f64,
) -> Result<Option<f64>> {
    let violations = validate(config, point);
    if !violations.is_empty() {
        return Err(Error::Infeasible(violations));
    }
    let f = max_lateral_force(config, point.a, &YukawaParams::new(1.0, lambda)?)?;
    let signal = f.force.abs();
    if signal == 0.0 || !signal.is_finite() {
        return Ok(None);
    }
    Ok(Some(point.delta_f / signal))
}

/// Exclusion curve plus, per λ, the index of the measurement point that set it.
#[derive(Debug, Clone, PartialEq)]
pub struct ExclusionCurve {
    pub line: ConstraintLine,
    pub binding: Vec<usize>,
}

/// Pointwise minimum over `points` of [`alpha_min`] on `lambda_grid`.
pub fn exclusion_curve(
    config: &ExperimentConfig,
    points: &[MeasurementPoint],
    lambda_grid: &[f64],
) -> Result<ConstraintLine> {
    exclusion_curve_with_binding(config, points, lambda_grid).map(|c| c.line)
}

pub fn exclusion_curve_with_binding(
    config: &ExperimentConfig,
    points: &[MeasurementPoint],
    lambda_grid: &[f64],
) -> Result<ExclusionCurve> {
    if points.is_empty() {
        return Err(Error::Empty("measurement points"));
    }
    if lambda_grid.is_empty() {
        return Err(Error::Empty("lambda grid"));
    }
    let mut violations: Vec<Violation> = Vec::new();
    for p in points {
        violations.extend(validate(config, p));
    }
    if !violations.is_empty() {
        return Err(Error::Infeasible(violations));
    }

    let rows: Vec<(f64, usize)> = lambda_grid
        .par_iter()
        .map(|&lambda| {
            let mut best: Option<(f64, usize)> = None;
            for (i, p) in points.iter().enumerate() {
                if let Some(v) = alpha_min(config, p, lambda)? {
                    // Ties keep the earlier point so the result is order-stable.
                    if best.is_none_or(|(b, _)| v < b) {
                        best = Some((v, i));
                    }
                }
            }
            best.ok_or(Error::Unconstrained(lambda))
        })
        .collect::<Result<_>>()?;

    let line = ConstraintLine::new(
        "exclusion",
        lambda_grid
            .iter()
            .zip(&rows)
            .map(|(&l, &(a, _))| (l, a))
            .collect(),
        Provenance::Computed,
    )?;
    Ok(ExclusionCurve {
        line,
        binding: rows.into_iter().map(|r| r.1).collect(),
    })
}

/// Log–log linear interpolation; exact at knots, no extrapolation.
pub fn interpolate(line: &ConstraintLine, lambda: f64) -> Result<f64> {
    let pts = line.points();
    let (lo, hi) = line.span();
    if !(lambda >= lo && lambda <= hi) {
        return Err(Error::OutOfSpan(lambda, lo, hi));
    }
    let k = pts.partition_point(|p| p.0 < lambda);
    if pts[k].0 == lambda {
        return Ok(pts[k].1);
    }
    let (l0, a0) = pts[k - 1];
    let (l1, a1) = pts[k];
    let t = (lambda / l0).ln() / (l1 / l0).ln();
    Ok((a0.ln() + t * (a1 / a0).ln()).exp())
}

/// How much stronger a candidate line is than a set of references.
#[derive(Debug, Clone, PartialEq)]
pub struct StrengtheningReport {
    /// λ values where the candidate and at least one reference are defined.
    pub lambda_grid: Vec<f64>,
    /// Weakest-link ratio: min over covering references of `ref / candidate`.
    pub ratio: Vec<f64>,
    /// Contiguous run of `ratio > 1` around the largest ratio, if any exceeds 1.
    pub dominance_window: Option<(f64, f64)>,
    /// (λ, ratio) at the largest ratio.
    pub max_ratio: (f64, f64),
}

/// Compares `candidate` with `references` on the part of `lambda_grid` covered
/// by the candidate and at least one reference.
pub fn compare(
    candidate: &ConstraintLine,
    references: &[ConstraintLine],
    lambda_grid: &[f64],
) -> Result<StrengtheningReport> {
    if references.is_empty() {
        return Err(Error::Empty("reference lines"));
    }
    if lambda_grid.is_empty() {
        return Err(Error::Empty("lambda grid"));
    }
    let mut grid = Vec::new();
    let mut ratio = Vec::new();
    for &lambda in lambda_grid {
        if !candidate.covers(lambda) {
            continue;
        }
        let c = interpolate(candidate, lambda)?;
        let mut r = f64::INFINITY;
        for reference in references.iter().filter(|l| l.covers(lambda)) {
            r = r.min(interpolate(reference, lambda)? / c);
        }
        if r.is_finite() {
            grid.push(lambda);
            ratio.push(r);
        }
    }
    if grid.is_empty() {
        return Err(Error::DisjointSpans);
    }

    let argmax = ratio
        .iter()
        .enumerate()
        .fold(0, |best, (i, &r)| if r > ratio[best] { i } else { best });
    let dominance_window = (ratio[argmax] > 1.0).then(|| {
        let mut lo = argmax;
        while lo > 0 && ratio[lo - 1] > 1.0 {
            lo -= 1;
        }
        let mut hi = argmax;
        while hi + 1 < ratio.len() && ratio[hi + 1] > 1.0 {
            hi += 1;
        }
        (grid[lo], grid[hi])
    });
    Ok(StrengtheningReport {
        max_ratio: (grid[argmax], ratio[argmax]),
        lambda_grid: grid,
        ratio,
        dominance_window,
    })
}

/// Serializes a line to CSV text. Floats use Rust's shortest round-trip form,
/// so `parse_line(&format_line(l))` reproduces every bit.
pub fn format_line(line: &ConstraintLine) -> String {
    let mut out = String::new();
    if !line.label.is_empty() {
        let _ = writeln!(out, "# label: {}", line.label.replace('\n', " "));
    }
    out.push_str(CSV_HEADER);
    out.push('\n');
    for &(l, a) in line.points() {
        let _ = writeln!(out, "{l:e},{a:e}");
    }
    out
}

/// Parses CSV text. Rows are reported by 1-based line number.
pub fn parse_line(text: &str, provenance: Provenance) -> Result<ConstraintLine> {
    let bad = |row: usize, msg: String| Error::InvalidLine(format!("line {row}: {msg}"));
    let mut label = String::new();
    let mut header_seen = false;
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let row = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(l) = comment.trim().strip_prefix("label:") {
                label = l.trim().to_string();
            }
            continue;
        }
        if !header_seen {
            let normalized: String = line.chars().filter(|c| !c.is_whitespace()).collect();
            if normalized != CSV_HEADER {
                return Err(bad(
                    row,
                    format!("expected header `{CSV_HEADER}`, found `{line}`"),
                ));
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(bad(
                row,
                format!("expected 2 fields, found {}", fields.len()),
            ));
        }
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| bad(row, format!("{what} `{s}` is not a number")))
        };
        let l = parse(fields[0], "lambda")?;
        let a = parse(fields[1], "alpha")?;
        if !(l.is_finite() && l > 0.0) {
            return Err(bad(row, format!("lambda {l} must be positive")));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(bad(row, format!("alpha {a} must be positive")));
        }
        if let Some(&(prev, _)) = points.last() {
            if l <= prev {
                return Err(bad(
                    row,
                    format!("lambda {l:e} is not above the previous row's {prev:e}"),
                ));
            }
        }
        points.push((l, a));
    }
    if !header_seen {
        return Err(Error::InvalidLine(format!("missing header `{CSV_HEADER}`")));
    }
    if points.len() < 2 {
        return Err(Error::InvalidLine(format!(
            "at least 2 points required, found {}",
            points.len()
        )));
    }
    ConstraintLine::new(label, points, provenance)
}

pub fn load_line(path: &Path) -> Result<ConstraintLine> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    parse_line(&text, Provenance::Ingested).map_err(|e| match e {
        Error::InvalidLine(m) => Error::InvalidLine(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn save_line(line: &ConstraintLine, path: &Path) -> Result<()> {
    write_atomic(path, format_line(line).as_bytes())
}

/// Writes through a temporary file in the target directory, then renames, so
/// a crash never leaves a partial file behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_error(path, e))?;
    tmp.write_all(bytes).map_err(|e| io_error(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_error(path, e))?;
    tmp.persist(path).map_err(|e| io_error(path, e.error))?;
    Ok(())
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}
