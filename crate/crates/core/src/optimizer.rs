//! Geometry search: choose corrugation amplitudes, period and separation that
//! minimize the exclusion limit α_min at a target range (or over a window).
//!
//! A coarse parallel grid scan seeds a coordinate descent. The descent moves
//! along six lines through the current design: each amplitude with the gap
//! `a - A₁ - A₂` held fixed, each amplitude with `a` held fixed, the period,
//! and the separation. The fixed-gap lines matter because the optimum usually
//! sits on the contact-clearance boundary, where moving one coordinate at a
//! time immediately leaves the feasible set.

use rayon::prelude::*;

use crate::constraints::{alpha_min, log_grid};
use crate::error::{Error, Result};
use crate::model::{CorrugationGeometry, ExperimentConfig, MeasurementPoint};

/// Closed interval, m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    fn samples(&self, n: usize) -> Vec<f64> {
        if self.lo == self.hi || n <= 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (n - 1) as f64;
        let mut v: Vec<f64> = (0..n).map(|i| self.lo + step * i as f64).collect();
        v[n - 1] = self.hi;
        v
    }
}

/// Error budget as a function of separation.
#[derive(Debug, Clone, PartialEq)]
pub enum DeltaFModel {
    /// Same ΔF (N) at every separation.
    Constant(f64),
    /// ln ΔF linear in `a` between the supplied points, held constant outside.
    PiecewiseLogLinear(Vec<MeasurementPoint>),
}

impl DeltaFModel {
    pub fn at(&self, a: f64) -> f64 {
        match self {
            DeltaFModel::Constant(v) => *v,
            DeltaFModel::PiecewiseLogLinear(pts) => {
                let first = pts[0];
                let last = pts[pts.len() - 1];
                if a <= first.a {
                    return first.delta_f;
                }
                if a >= last.a {
                    return last.delta_f;
                }
                let k = pts.partition_point(|p| p.a < a);
                let (p0, p1) = (pts[k - 1], pts[k]);
                if p1.a == a {
                    return p1.delta_f;
                }
                let t = (a - p0.a) / (p1.a - p0.a);
                (p0.delta_f.ln() + t * (p1.delta_f / p0.delta_f).ln()).exp()
            }
        }
    }

    /// Sorts the points by separation and checks them.
    pub fn piecewise(mut points: Vec<MeasurementPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("error-budget points"));
        }
        points.sort_by(|x, y| x.a.total_cmp(&y.a));
        for w in points.windows(2) {
            if w[0].a == w[1].a {
                return Err(Error::Domain {
                    name: "error-budget separation",
                    value: w[0].a,
                    domain: "distinct separations",
                });
            }
        }
        let model = DeltaFModel::PiecewiseLogLinear(points);
        model.check()?;
        Ok(model)
    }

    fn check(&self) -> Result<()> {
        let bad = |v: f64| !(v.is_finite() && v > 0.0);
        match self {
            DeltaFModel::Constant(v) if bad(*v) => Err(Error::Domain {
                name: "delta_f",
                value: *v,
                domain: "(0, inf)",
            }),
            DeltaFModel::PiecewiseLogLinear(pts) if pts.is_empty() => {
                Err(Error::Empty("error-budget points"))
            }
            DeltaFModel::PiecewiseLogLinear(pts) => {
                match pts.iter().find(|p| bad(p.delta_f) || !p.a.is_finite()) {
                    Some(p) => Err(Error::Domain {
                        name: "delta_f",
                        value: p.delta_f,
                        domain: "(0, inf)",
                    }),
                    None => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    /// α_min at one interaction range, m.
    AlphaAt(f64),
    /// Geometric mean of α_min over `n` log-spaced ranges in `[lo, hi]`, m.
    LogIntegrated { lo: f64, hi: f64, n: usize },
}

impl Objective {
    fn lambdas(&self) -> Result<Vec<f64>> {
        match *self {
            Objective::AlphaAt(l) => Ok(vec![l]),
            Objective::LogIntegrated { lo, hi, n } => log_grid(lo, hi, n),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationProblem {
    pub a1: Interval,
    pub a2: Interval,
    pub period: Interval,
    pub separation: Interval,
    /// Required clearance `a - (A₁ + A₂)`, m, > 0.
    pub min_gap: f64,
    /// Require `A₂ <= A₁` (the sphere corrugation is imprinted from the grating).
    pub a2_below_a1: bool,
    pub delta_f: DeltaFModel,
    pub objective: Objective,
    /// Scan points per axis (a degenerate interval contributes one).
    pub grid_points: usize,
    /// Stop when a full descent sweep improves the objective by less than this
    /// relative amount.
    pub tolerance: f64,
}

/// A point in the search space, m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Design {
    pub a1: f64,
    pub a2: f64,
    pub period: f64,
    pub a: f64,
}

impl Design {
    fn to_vec(self) -> [f64; 4] {
        [self.a1, self.a2, self.period, self.a]
    }

    fn from_vec(v: [f64; 4]) -> Self {
        Self {
            a1: v[0],
            a2: v[1],
            period: v[2],
            a: v[3],
        }
    }

    pub fn gap(&self) -> f64 {
        self.a - self.a1 - self.a2
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    /// Evaluation count when this iterate was accepted.
    pub evaluation: usize,
    pub design: Design,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub config: ExperimentConfig,
    pub design: Design,
    pub objective: f64,
    pub evaluations: usize,
    /// Improving iterates, starting with the best scan point.
    pub trace: Vec<TraceEntry>,
    /// Every feasible scan point with its objective.
    pub scan: Vec<(Design, f64)>,
}

// Slack for constraints that are met with equality at box corners but can be
// missed by one ulp after arithmetic.
const SLACK: f64 = 1e-12;

impl OptimizationProblem {
    /// The proposal's search box: Λ 150–600 nm, A₁ 40–95 nm, A₂ 10–40 nm,
    /// separation 52–300 nm, gap >= 2 nm, ΔF = 1.11 pN, target λ = 19 nm.
    pub fn proposal_box() -> Self {
        use crate::model::units::{nm, pn};
        Self {
            a1: Interval::new(nm(40.0), nm(95.0)),
            a2: Interval::new(nm(10.0), nm(40.0)),
            period: Interval::new(nm(150.0), nm(600.0)),
            separation: Interval::new(nm(52.0), nm(300.0)),
            min_gap: nm(2.0),
            a2_below_a1: true,
            delta_f: DeltaFModel::Constant(pn(1.11)),
            objective: Objective::AlphaAt(nm(19.0)),
            grid_points: 12,
            tolerance: 1e-6,
        }
    }

    pub fn check(&self) -> Result<()> {
        let named = [
            ("a1", self.a1),
            ("a2", self.a2),
            ("period", self.period),
            ("separation", self.separation),
        ];
        for (name, iv) in named {
            if !(iv.lo.is_finite() && iv.hi.is_finite() && iv.lo <= iv.hi) {
                return Err(Error::InfeasibleBounds(format!(
                    "{name} interval [{}, {}] is empty or not finite",
                    iv.lo, iv.hi
                )));
            }
        }
        if self.a1.lo < 0.0 || self.a2.lo < 0.0 {
            return Err(Error::InfeasibleBounds("amplitudes must be >= 0".into()));
        }
        if self.period.lo <= 0.0 {
            return Err(Error::InfeasibleBounds("period must be > 0".into()));
        }
        if !(self.min_gap.is_finite() && self.min_gap > 0.0) {
            return Err(Error::InfeasibleBounds(format!(
                "min_gap {} must be > 0",
                self.min_gap
            )));
        }
        if self.grid_points == 0 {
            return Err(Error::InfeasibleBounds("grid_points must be >= 1".into()));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::InfeasibleBounds("tolerance must be > 0".into()));
        }
        self.delta_f.check()?;
        self.objective.lambdas()?;
        // Smallest reachable amplitude sum must clear the largest separation.
        let a2_floor = self.a2.lo;
        let a1_floor = if self.a2_below_a1 {
            self.a1.lo.max(a2_floor)
        } else {
            self.a1.lo
        };
        if self.a2_below_a1 && a2_floor > self.a1.hi {
            return Err(Error::InfeasibleBounds(
                "A2 <= A1 cannot hold: the A2 interval lies above the A1 interval".into(),
            ));
        }
        if a1_floor + a2_floor + self.min_gap > self.separation.hi * (1.0 + SLACK) {
            return Err(Error::InfeasibleBounds(format!(
                "no separation in [{:e}, {:e}] m clears A1 + A2 + gap >= {:e} m",
                self.separation.lo,
                self.separation.hi,
                a1_floor + a2_floor + self.min_gap
            )));
        }
        Ok(())
    }

    pub fn is_feasible(&self, d: &Design) -> bool {
        let tol = |iv: &Interval, x: f64| {
            let s = SLACK * iv.hi.abs().max(iv.lo.abs());
            x >= iv.lo - s && x <= iv.hi + s
        };
        tol(&self.a1, d.a1)
            && tol(&self.a2, d.a2)
            && tol(&self.period, d.period)
            && tol(&self.separation, d.a)
            && d.gap() >= self.min_gap - SLACK * d.a
            && (!self.a2_below_a1 || d.a2 <= d.a1 * (1.0 + SLACK))
    }

    /// Linear constraints `c · x >= r` describing the feasible polytope.
    fn halfspaces(&self) -> Vec<([f64; 4], f64)> {
        let mut h = Vec::new();
        for (i, iv) in [self.a1, self.a2, self.period, self.separation]
            .iter()
            .enumerate()
        {
            let mut lo = [0.0; 4];
            lo[i] = 1.0;
            h.push((lo, iv.lo));
            let mut hi = [0.0; 4];
            hi[i] = -1.0;
            h.push((hi, -iv.hi));
        }
        h.push(([-1.0, -1.0, 0.0, 1.0], self.min_gap));
        if self.a2_below_a1 {
            h.push(([1.0, -1.0, 0.0, 0.0], 0.0));
        }
        h
    }
}

fn configure(template: &ExperimentConfig, d: &Design) -> Result<ExperimentConfig> {
    let mut c = template.clone();
    c.corrugation = CorrugationGeometry::new(d.a1, d.a2, d.period)?;
    Ok(c)
}

/// Objective at a design; `+inf` when infeasible or when the geometry
/// constrains nothing.
pub fn evaluate(
    problem: &OptimizationProblem,
    template: &ExperimentConfig,
    design: &Design,
) -> Result<f64> {
    if !problem.is_feasible(design) {
        return Ok(f64::INFINITY);
    }
    let config = configure(template, design)?;
    let point = MeasurementPoint::new(design.a, problem.delta_f.at(design.a));
    if let Objective::AlphaAt(l) = problem.objective {
        return Ok(alpha_min(&config, &point, l)?.unwrap_or(f64::INFINITY));
    }
    let lambdas = problem.objective.lambdas()?;
    let mut log_sum = 0.0;
    for &l in &lambdas {
        match alpha_min(&config, &point, l)? {
            Some(v) => log_sum += v.ln(),
            None => return Ok(f64::INFINITY),
        }
    }
    Ok((log_sum / lambdas.len() as f64).exp())
}

const DIRECTIONS: [[f64; 4]; 6] = [
    [1.0, 0.0, 0.0, 1.0],
    [0.0, 1.0, 0.0, 1.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
];

const MAX_SWEEPS: usize = 200;

struct Counter<'a> {
    problem: &'a OptimizationProblem,
    template: &'a ExperimentConfig,
    evaluations: usize,
}

impl Counter<'_> {
    fn eval(&mut self, d: &Design) -> Result<f64> {
        self.evaluations += 1;
        evaluate(self.problem, self.template, d)
    }
}

/// Feasible parameter range `[t_lo, t_hi]` of `x + t·dir`.
fn line_range(h: &[([f64; 4], f64)], x: &[f64; 4], dir: &[f64; 4]) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (c, r) in h {
        let cx: f64 = c.iter().zip(x).map(|(a, b)| a * b).sum();
        let cd: f64 = c.iter().zip(dir).map(|(a, b)| a * b).sum();
        let slack = cx - r;
        if cd > 0.0 {
            lo = lo.max(-slack / cd);
        } else if cd < 0.0 {
            hi = hi.min(-slack / cd);
        }
    }
    (lo.min(0.0), hi.max(0.0))
}

fn along(x: &[f64; 4], dir: &[f64; 4], t: f64) -> Design {
    let mut v = *x;
    for (vi, di) in v.iter_mut().zip(dir) {
        *vi += t * di;
    }
    Design::from_vec(v)
}

/// Golden-section minimization of `ln objective` on `[lo, hi]` plus both
/// endpoints; returns the best (t, value) seen.
fn line_search(
    counter: &mut Counter<'_>,
    x: &[f64; 4],
    dir: &[f64; 4],
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let mut best = (0.0, f64::INFINITY);
    let consider = |t: f64, v: f64, best: &mut (f64, f64)| {
        if v < best.1 {
            *best = (t, v);
        }
    };
    for t in [lo, hi] {
        let v = counter.eval(&along(x, dir, t))?;
        consider(t, v, &mut best);
    }
    let inv = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut t1 = b - inv * (b - a);
    let mut t2 = a + inv * (b - a);
    let mut f1 = counter.eval(&along(x, dir, t1))?;
    let mut f2 = counter.eval(&along(x, dir, t2))?;
    consider(t1, f1, &mut best);
    consider(t2, f2, &mut best);
    while b - a > tol {
        if f1 <= f2 {
            b = t2;
            t2 = t1;
            f2 = f1;
            t1 = b - inv * (b - a);
            f1 = counter.eval(&along(x, dir, t1))?;
            consider(t1, f1, &mut best);
        } else {
            a = t1;
            t1 = t2;
            f1 = f2;
            t2 = a + inv * (b - a);
            f2 = counter.eval(&along(x, dir, t2))?;
            consider(t2, f2, &mut best);
        }
    }
    Ok(best)
}

pub fn optimize(
    problem: &OptimizationProblem,
    template: &ExperimentConfig,
) -> Result<OptimizationResult> {
    problem.check()?;

    let n = problem.grid_points;
    let mut candidates = Vec::new();
    for &a1 in &problem.a1.samples(n) {
        for &a2 in &problem.a2.samples(n) {
            for &period in &problem.period.samples(n) {
                for &a in &problem.separation.samples(n) {
                    let d = Design { a1, a2, period, a };
                    if problem.is_feasible(&d) {
                        candidates.push(d);
                    }
                }
            }
        }
    }
    // The grid may miss a thin feasible sliver; add the gap-tight design at
    // every amplitude/period sample when its separation is in the box.
    for &a1 in &problem.a1.samples(n) {
        for &a2 in &problem.a2.samples(n) {
            for &period in &problem.period.samples(n) {
                let a = (a1 + a2 + problem.min_gap).max(problem.separation.lo);
                let d = Design { a1, a2, period, a };
                if problem.is_feasible(&d) && !candidates.contains(&d) {
                    candidates.push(d);
                }
            }
        }
    }
    if candidates.is_empty() {
        return Err(Error::InfeasibleBounds(
            "no scan point satisfies the gap and ordering constraints".into(),
        ));
    }

    let values: Vec<f64> = candidates
        .par_iter()
        .map(|d| evaluate(problem, template, d))
        .collect::<Result<_>>()?;
    let scan: Vec<(Design, f64)> = candidates.into_iter().zip(values).collect();
    let mut counter = Counter {
        problem,
        template,
        evaluations: scan.len(),
    };

    // First strict minimum in scan order, so ties resolve deterministically.
    let (mut best, mut best_val) =
        scan.iter().fold(
            (scan[0].0, scan[0].1),
            |acc, &(d, v)| if v < acc.1 { (d, v) } else { acc },
        );
    if !best_val.is_finite() {
        return Err(Error::InfeasibleBounds(
            "no scanned design yields a finite constraint".into(),
        ));
    }
    let mut trace = vec![TraceEntry {
        evaluation: counter.evaluations,
        design: best,
        objective: best_val,
    }];

    let h = problem.halfspaces();
    let scale = [
        problem.a1.hi.max(problem.a1.lo).max(1e-12),
        problem.a2.hi.max(problem.a2.lo).max(1e-12),
        problem.period.hi,
        problem.separation.hi,
    ];
    for _ in 0..MAX_SWEEPS {
        let sweep_start = best_val;
        for dir in DIRECTIONS {
            let x = best.to_vec();
            let (lo, hi) = line_range(&h, &x, &dir);
            if hi - lo <= 0.0 {
                continue;
            }
            let unit = dir
                .iter()
                .zip(&scale)
                .filter(|(d, _)| **d != 0.0)
                .map(|(_, s)| *s)
                .fold(f64::INFINITY, f64::min);
            let (t, v) = line_search(&mut counter, &x, &dir, lo, hi, 1e-9 * unit)?;
            if v < best_val {
                best = along(&x, &dir, t);
                best_val = v;
                trace.push(TraceEntry {
                    evaluation: counter.evaluations,
                    design: best,
                    objective: best_val,
                });
            }
        }
        if sweep_start - best_val <= problem.tolerance * best_val {
            break;
        }
    }

    Ok(OptimizationResult {
        config: configure(template, &best)?,
        design: best,
        objective: best_val,
        evaluations: counter.evaluations,
        trace,
        scan,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parameter {
    A1,
    A2,
    Period,
    Separation,
    DeltaF,
}

impl Parameter {
    pub const ALL: [Parameter; 5] = [
        Parameter::A1,
        Parameter::A2,
        Parameter::Period,
        Parameter::Separation,
        Parameter::DeltaF,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Parameter::A1 => "A1",
            Parameter::A2 => "A2",
            Parameter::Period => "period",
            Parameter::Separation => "a",
            Parameter::DeltaF => "delta_f",
        }
    }
}

/// One row of a sensitivity table: `∂ ln α_min / ∂ ln p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityRow {
    pub parameter: Parameter,
    /// Central difference.
    pub derivative: f64,
    pub forward: f64,
    pub backward: f64,
    /// Relative step actually used.
    pub step: f64,
    /// The requested step left the valid region and was halved.
    pub shrunk: bool,
    /// Forward and backward one-sided estimates agree with the central value
    /// within 1 %.
    pub consistent: bool,
}

pub const SENSITIVITY_STEP: f64 = 1e-3;

/// Log-derivatives of α_min with respect to each geometry parameter and the
/// error budget, by central differences with relative step 1e-3.
pub fn sensitivity(
    config: &ExperimentConfig,
    point: &MeasurementPoint,
    lambda: f64,
) -> Result<Vec<SensitivityRow>> {
    let alpha = |cfg: &ExperimentConfig, p: &MeasurementPoint| -> Result<Option<f64>> {
        match alpha_min(cfg, p, lambda) {
            Ok(v) => Ok(v),
            Err(Error::Infeasible(_)) | Err(Error::Model(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let base = alpha_min(config, point, lambda)?.ok_or(Error::Unconstrained(lambda))?;

    let perturbed = |param: Parameter, factor: f64| -> Result<Option<f64>> {
        let mut cfg = config.clone();
        let mut p = *point;
        let c = &config.corrugation;
        match param {
            Parameter::A1 => {
                cfg.corrugation = match CorrugationGeometry::new(c.a1 * factor, c.a2, c.period) {
                    Ok(g) => g,
                    Err(_) => return Ok(None),
                }
            }
            Parameter::A2 => {
                cfg.corrugation = match CorrugationGeometry::new(c.a1, c.a2 * factor, c.period) {
                    Ok(g) => g,
                    Err(_) => return Ok(None),
                }
            }
            Parameter::Period => {
                cfg.corrugation = match CorrugationGeometry::new(c.a1, c.a2, c.period * factor) {
                    Ok(g) => g,
                    Err(_) => return Ok(None),
                }
            }
            Parameter::Separation => p.a *= factor,
            Parameter::DeltaF => p.delta_f *= factor,
        }
        alpha(&cfg, &p)
    };

    let mut rows = Vec::with_capacity(Parameter::ALL.len());
    for param in Parameter::ALL {
        let mut h = SENSITIVITY_STEP;
        let mut shrunk = false;
        let (up, down) = loop {
            match (perturbed(param, 1.0 + h)?, perturbed(param, 1.0 - h)?) {
                (Some(u), Some(d)) => break (u, d),
                _ if h > 1e-9 => {
                    h *= 0.5;
                    shrunk = true;
                }
                _ => {
                    return Err(Error::Domain {
                        name: "sensitivity step",
                        value: h,
                        domain: "a step that keeps the geometry valid",
                    })
                }
            }
        };
        let (lu, ld) = ((1.0 + h).ln(), (1.0 - h).ln());
        let derivative = (up / down).ln() / (lu - ld);
        let forward = (up / base).ln() / lu;
        let backward = (base / down).ln() / -ld;
        let within = |x: f64| (x - derivative).abs() <= 0.01 * derivative.abs().max(1e-300);
        rows.push(SensitivityRow {
            parameter: param,
            derivative,
            forward,
            backward,
            step: h,
            shrunk,
            consistent: within(forward) && within(backward),
        });
    }
    Ok(rows)
}
