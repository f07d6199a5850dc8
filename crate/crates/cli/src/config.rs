//! Run configuration: a TOML file with units spelled out in every key name.
//!
//! ```toml
//! label = "proposed"
//!
//! [sphere]
//! radius_nm = 97000
//! core = "polystyrene"
//! shells = [
//!     { material = "chromium", thickness_nm = 10 },
//!     { material = "gold", thickness_nm = 50 },
//! ]
//!
//! [plate]
//! substrate = "epoxy"
//! coating = "gold"
//! coating_thickness_nm = 300
//!
//! [corrugation]
//! a1_nm = 90
//! a2_nm = 33
//! period_nm = 200
//!
//! [[points]]
//! a_nm = 125
//! delta_f_pn = 1.11
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use yukawa_core::constraints::log_grid;
use yukawa_core::model::units::{nm, pn};
use yukawa_core::model::validate;
use yukawa_core::optimizer::{DeltaFModel, Interval, Objective, OptimizationProblem};
use yukawa_core::{
    presets, CorrugationGeometry, ExperimentConfig, LayeredPlate, LayeredSphere, Material,
    MeasurementPoint, Shell,
};

use crate::CliError;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub label: Option<String>,
    /// Extra or overriding materials; the built-in table has polystyrene,
    /// chromium, gold and epoxy.
    #[serde(default)]
    pub materials: BTreeMap<String, MaterialSpec>,
    pub sphere: SphereSpec,
    pub plate: PlateSpec,
    pub corrugation: CorrugationSpec,
    #[serde(default)]
    pub points: Vec<PointSpec>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    /// Constraint-line CSVs, relative to the config file.
    #[serde(default)]
    pub references: Vec<PathBuf>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub optimize: Option<OptimizeSpec>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    pub density_kg_m3: f64,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SphereSpec {
    pub radius_nm: f64,
    pub core: String,
    /// Innermost first.
    #[serde(default)]
    pub shells: Vec<ShellSpec>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ShellSpec {
    pub material: String,
    pub thickness_nm: f64,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PlateSpec {
    pub substrate: String,
    pub coating: String,
    pub coating_thickness_nm: f64,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CorrugationSpec {
    pub a1_nm: f64,
    pub a2_nm: f64,
    pub period_nm: f64,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub a_nm: f64,
    pub delta_f_pn: f64,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo_nm: f64,
    pub hi_nm: f64,
    pub n: usize,
}

impl GridSpec {
    pub const DEFAULT: GridSpec = GridSpec {
        lo_nm: 1.0,
        hi_nm: 100.0,
        n: 200,
    };

    /// Parses `lo,hi,n` with bounds in nm.
    pub fn parse(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("expected lo,hi,n (nm), got `{s}`"));
        }
        let num = |p: &str| {
            p.parse::<f64>()
                .map_err(|_| format!("`{p}` is not a number"))
        };
        let n = parts[2]
            .parse::<usize>()
            .map_err(|_| format!("`{}` is not a point count", parts[2]))?;
        Ok(Self {
            lo_nm: num(parts[0])?,
            hi_nm: num(parts[1])?,
            n,
        })
    }

    pub fn lambdas(&self) -> Result<Vec<f64>, CliError> {
        Ok(log_grid(nm(self.lo_nm), nm(self.hi_nm), self.n)?)
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSpec {
    pub a1_nm: [f64; 2],
    pub a2_nm: [f64; 2],
    pub period_nm: [f64; 2],
    pub a_nm: [f64; 2],
    pub min_gap_nm: f64,
    #[serde(default = "yes")]
    pub a2_below_a1: bool,
    /// Constant error budget; when absent, ΔF(a) runs log-linearly through
    /// the measurement points.
    #[serde(default)]
    pub delta_f_pn: Option<f64>,
    /// Target range for the α_min objective.
    #[serde(default)]
    pub lambda_nm: Option<f64>,
    /// Alternatively, a window for the geometric-mean objective.
    #[serde(default)]
    pub window_nm: Option<[f64; 2]>,
    #[serde(default = "window_points")]
    pub window_points: usize,
    #[serde(default = "grid_points")]
    pub grid_points: usize,
    #[serde(default = "tolerance")]
    pub tolerance: f64,
}

fn yes() -> bool {
    true
}
fn window_points() -> usize {
    16
}
fn grid_points() -> usize {
    12
}
fn tolerance() -> f64 {
    1e-6
}

/// A parsed config together with the directory relative paths resolve against.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub run: RunConfig,
    pub base_dir: PathBuf,
}

impl LoadedConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let run = parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let base_dir = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(Self { run, base_dir })
    }

    /// The proposed experiment, used when no config file is given.
    pub fn builtin() -> Self {
        Self {
            run: parse(PROPOSED).expect("built-in config parses"),
            base_dir: PathBuf::from("."),
        }
    }

    pub fn references(&self) -> Vec<PathBuf> {
        self.run
            .references
            .iter()
            .map(|p| self.base_dir.join(p))
            .collect()
    }

    pub fn out_dir(&self) -> Option<PathBuf> {
        self.run.out_dir.as_ref().map(|p| self.base_dir.join(p))
    }
}

pub fn parse(text: &str) -> Result<RunConfig, String> {
    toml::from_str(text).map_err(|e| e.to_string())
}

pub const PROPOSED: &str = include_str!("../../../configs/proposed.toml");

impl RunConfig {
    fn material(&self, name: &str) -> Result<Material, CliError> {
        if let Some(m) = self.materials.get(name) {
            return Ok(Material::new(name, m.density_kg_m3)?);
        }
        let builtin = match name {
            "polystyrene" => presets::polystyrene(),
            "chromium" => presets::chromium(),
            "gold" => presets::gold(),
            "epoxy" => presets::epoxy(),
            _ => {
                return Err(CliError::Input(format!(
                    "unknown material `{name}`: define it under [materials]"
                )))
            }
        };
        Ok(builtin)
    }

    pub fn experiment(&self) -> Result<ExperimentConfig, CliError> {
        let shells = self
            .sphere
            .shells
            .iter()
            .map(|s| {
                Ok(Shell {
                    material: self.material(&s.material)?,
                    thickness: nm(s.thickness_nm),
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let sphere = LayeredSphere::new(
            nm(self.sphere.radius_nm),
            self.material(&self.sphere.core)?,
            shells,
        )?;
        let plate = LayeredPlate::new(
            self.material(&self.plate.substrate)?,
            self.material(&self.plate.coating)?,
            nm(self.plate.coating_thickness_nm),
        )?;
        let c = &self.corrugation;
        let corrugation = CorrugationGeometry::new(nm(c.a1_nm), nm(c.a2_nm), nm(c.period_nm))?;
        Ok(ExperimentConfig {
            sphere,
            plate,
            corrugation,
        })
    }

    /// Measurement points in SI, each checked against the geometry.
    pub fn measurement_points(
        &self,
        config: &ExperimentConfig,
    ) -> Result<Vec<MeasurementPoint>, CliError> {
        let points: Vec<MeasurementPoint> = self
            .points
            .iter()
            .map(|p| MeasurementPoint::new(nm(p.a_nm), pn(p.delta_f_pn)))
            .collect();
        let mut problems = Vec::new();
        for p in &points {
            problems.extend(validate(config, p));
        }
        if !problems.is_empty() {
            return Err(yukawa_core::Error::Infeasible(problems).into());
        }
        Ok(points)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid.unwrap_or(GridSpec::DEFAULT)
    }

    pub fn problem(&self) -> Result<OptimizationProblem, CliError> {
        let opt = self
            .optimize
            .as_ref()
            .ok_or_else(|| CliError::Input("config has no [optimize] block".into()))?;
        let iv = |v: [f64; 2]| Interval::new(nm(v[0]), nm(v[1]));
        let delta_f = match opt.delta_f_pn {
            Some(v) => DeltaFModel::Constant(pn(v)),
            None => DeltaFModel::piecewise(
                self.points
                    .iter()
                    .map(|p| MeasurementPoint::new(nm(p.a_nm), pn(p.delta_f_pn)))
                    .collect(),
            )?,
        };
        let objective = match (opt.lambda_nm, opt.window_nm) {
            (Some(l), None) => Objective::AlphaAt(nm(l)),
            (None, Some([lo, hi])) => Objective::LogIntegrated {
                lo: nm(lo),
                hi: nm(hi),
                n: opt.window_points,
            },
            _ => {
                return Err(CliError::Input(
                    "[optimize] needs exactly one of lambda_nm or window_nm".into(),
                ))
            }
        };
        Ok(OptimizationProblem {
            a1: iv(opt.a1_nm),
            a2: iv(opt.a2_nm),
            period: iv(opt.period_nm),
            separation: iv(opt.a_nm),
            min_gap: nm(opt.min_gap_nm),
            a2_below_a1: opt.a2_below_a1,
            delta_f,
            objective,
            grid_points: opt.grid_points,
            tolerance: opt.tolerance,
        })
    }
}
