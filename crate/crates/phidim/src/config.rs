//! Experiment configuration: one JSON document per run.

use std::path::PathBuf;

use phidim_core::covering::GeomSet;
use phidim_core::dimfunc::{max_interpolant, min_interpolant, CheckpointSequence, DimensionFunction, Staircase, Tail};
use phidim_core::estimator::ScaleGrid;
use phidim_core::moran::LevelSelection;
use phidim_core::Scale;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::catalog::{self, Kind};
use crate::io::{DimfuncDoc, MoranDoc, ScaleCell};
use crate::RunError;

/// Default cap on schedule levels, overridden by `--depth-budget`.
pub const DEFAULT_DEPTH_BUDGET: u64 = 50_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_budget: Option<u64>,
}

/// Every parameter any kind accepts; [`ExperimentConfig::validate`] checks
/// which ones a kind requires or allows.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<MoranDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<PhiSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<PhiSpec>,
    /// Block exponent of the example schedules.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Number of checkpoints of a generated schedule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<LevelsSpec>,
    /// Checkpoints skipped by the example traces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skip: Option<usize>,
    /// First checkpoint (1-based) at which the second example's ψ floor is
    /// checked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from_checkpoint: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimators: Option<Vec<EstimatorName>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quasi_fractions: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub windowed_fractions: Option<Vec<f64>>,
    /// Expected value for `moran-formula` and `moran-estimate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<SetSpec>,
    /// `ψ = rate_window(φ, gap_alpha)` when `psi` is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_alpha: Option<f64>,
    /// Fixed doubling constant instead of the measured one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doubling: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doubling_c: Option<Vec<f64>>,
    /// Extra scales drawn from the seeded generator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_scales: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<RadiiSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub write_points: Option<bool>,
}

impl Params {
    /// Names of the parameters that are set.
    pub fn present(&self) -> Vec<&'static str> {
        let v = serde_json::to_value(self).expect("plain data serializes");
        let map = v.as_object().expect("params serialize as an object");
        catalog::ALL_PARAMS.iter().copied().filter(|k| map.contains_key(*k)).collect()
    }
}

/// Tolerances and bounds of the `--assert` checks. Defaults match the
/// acceptance suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Example reproductions against their closed forms.
    pub example: f64,
    /// First example: φ trace against `1/α`.
    pub example1_phi: f64,
    /// First example: lower bound for the ψ running minimum.
    pub example1_psi_floor: f64,
    /// `moran-formula` and `moran-estimate` against `expect`.
    pub value: f64,
    /// Estimates on sets of known dimension.
    pub baseline: f64,
    /// Variational infimum against the quasi estimate.
    pub variational: f64,
    /// windowed ≤ quasi ≤ φ-lower.
    pub ordering: f64,
    /// Added to the discretization slack of rate-window checks.
    pub rate_window: f64,
    /// Added to the estimator slack of the gap bound.
    pub gap: f64,
    /// `φ/ψ` deviation beyond which the gap bound is not applied.
    pub gap_max_epsilon: f64,
    /// Lower end of the band for the final box value.
    pub box_floor: f64,
    /// Slack above the box-dimension target.
    pub box_slack: f64,
    /// Trailing grid points over which the box trace must increase.
    pub box_increasing: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            example: 0.02,
            example1_phi: 0.01,
            example1_psi_floor: 0.55,
            value: 0.01,
            baseline: 0.05,
            variational: 0.05,
            ordering: 0.02,
            rate_window: 0.0,
            gap: 0.0,
            gap_max_epsilon: 0.25,
            box_floor: 1.05,
            box_slack: 0.05,
            box_increasing: 5,
        }
    }
}

/// A dimension function by name or inline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhiSpec {
    Theta(f64),
    Named(NamedPhi),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NamedPhi {
    Constant {
        theta: f64,
    },
    /// `1/θ' − 1`.
    Spectrum {
        theta_prime: f64,
    },
    /// `R ↦ R`; only accepted by `dimfunc-check`, which rejects it.
    Identity,
    Inline {
        function: DimfuncDoc,
    },
    MaxInterpolant {
        points: Vec<(ScaleCell, f64)>,
    },
    MinInterpolant {
        points: Vec<(ScaleCell, f64)>,
    },
    Staircase {
        r_max: ScaleCell,
        growth: f64,
        theta: f64,
        decay: f64,
    },
    RateWindow {
        of: Box<PhiSpec>,
        alpha: f64,
    },
}

/// What a [`PhiSpec`] resolves to.
#[derive(Clone, Debug)]
pub enum Candidate {
    Function(DimensionFunction),
    Identity,
}

impl PhiSpec {
    pub fn candidate(&self) -> Result<Candidate, RunError> {
        let named = match self {
            PhiSpec::Theta(t) => return Ok(Candidate::Function(DimensionFunction::constant(*t)?)),
            PhiSpec::Named(n) => n,
        };
        let f = match named {
            NamedPhi::Identity => return Ok(Candidate::Identity),
            NamedPhi::Constant { theta } => DimensionFunction::constant(*theta)?,
            NamedPhi::Spectrum { theta_prime } => DimensionFunction::from_spectrum_theta(*theta_prime)?,
            NamedPhi::Inline { function } => function.to_function().map_err(|e| RunError::Validation(e.to_string()))?,
            NamedPhi::MaxInterpolant { points } => max_interpolant(&checkpoints(points)?),
            NamedPhi::MinInterpolant { points } => min_interpolant(&checkpoints(points)?),
            NamedPhi::Staircase { r_max, growth, theta, decay } => DimensionFunction::new(
                r_max.0,
                Vec::new(),
                Tail::Staircase(Staircase { growth: *growth, theta: *theta, decay: *decay }),
                None,
            )?,
            NamedPhi::RateWindow { of, alpha } => of.function()?.rate_window(*alpha)?,
        };
        Ok(Candidate::Function(f))
    }

    /// Resolve to a dimension function; `identity` is refused.
    pub fn function(&self) -> Result<DimensionFunction, RunError> {
        match self.candidate()? {
            Candidate::Function(f) => Ok(f),
            Candidate::Identity => {
                Err(RunError::Validation("`identity` is not a dimension function; use dimfunc-check".into()))
            }
        }
    }
}

fn checkpoints(points: &[(ScaleCell, f64)]) -> Result<CheckpointSequence, RunError> {
    Ok(CheckpointSequence::new(points.iter().map(|&(s, t)| (s.0, t)).collect())?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LevelsSpec {
    Range { from: u64, to: u64 },
    Checkpoints { skip: usize },
}

impl LevelsSpec {
    pub fn selection(&self) -> LevelSelection {
        match *self {
            LevelsSpec::Range { from, to } => LevelSelection::Range { from, to },
            LevelsSpec::Checkpoints { skip } => LevelSelection::Checkpoints { skip },
        }
    }
}

/// Scale grid for estimators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GridSpec {
    /// `R_i = 2^{-(from + step·i)}`.
    Dyadic {
        from: f64,
        count: usize,
        #[serde(default = "one")]
        step: f64,
    },
    Geometric {
        r0: ScaleCell,
        ratio: f64,
        count: usize,
    },
    Scales {
        scales: Vec<ScaleCell>,
    },
    /// Checkpoint scales of the schedule, skipping the first `skip`.
    Checkpoints {
        #[serde(default)]
        skip: usize,
    },
}

fn one() -> f64 {
    1.0
}

impl GridSpec {
    /// Build the grid; `checkpoints` supplies scales for the checkpoint form.
    pub fn grid(&self, checkpoints: Option<&[Scale]>) -> Result<ScaleGrid, RunError> {
        let scales = match self {
            GridSpec::Dyadic { from, count, step } => {
                if !(*step > 0.0) {
                    return Err(RunError::Validation("grid step must be positive".into()));
                }
                (0..*count).map(|i| Scale::from_depth((from + step * i as f64) * std::f64::consts::LN_2)).collect()
            }
            GridSpec::Geometric { r0, ratio, count } => {
                if !(*ratio > 0.0 && *ratio < 1.0) {
                    return Err(RunError::Validation("grid ratio must lie in (0, 1)".into()));
                }
                phidim_core::dimfunc::geometric_grid(r0.0, *ratio, *count)
            }
            GridSpec::Scales { scales } => scales.iter().map(|s| s.0).collect(),
            GridSpec::Checkpoints { skip } => {
                let cps = checkpoints
                    .ok_or_else(|| RunError::Validation("checkpoint grid needs a schedule with checkpoints".into()))?;
                cps.iter().skip(*skip).copied().collect()
            }
        };
        Ok(ScaleGrid::new(scales)?)
    }
}

/// Radii `2^-k` for `k` in `from..=to`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiiSpec {
    pub from: u32,
    pub to: u32,
}

impl RadiiSpec {
    pub fn radii(&self) -> Result<Vec<f64>, RunError> {
        if self.from == 0 || self.to < self.from || self.to > 60 {
            return Err(RunError::Validation(format!(
                "radii need 1 ≤ from ≤ to ≤ 60, got {}..={}",
                self.from, self.to
            )));
        }
        Ok((self.from..=self.to).map(|k| 0.5f64.powi(k as i32)).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SetSpec {
    Interval { a: f64, b: f64 },
    Points { dim: u8, points: Vec<[f64; 2]> },
    Moran { spec: MoranDoc },
}

impl SetSpec {
    pub fn geom(&self) -> Result<Option<GeomSet>, RunError> {
        Ok(match self {
            SetSpec::Interval { a, b } => Some(GeomSet::interval(*a, *b)?),
            SetSpec::Points { dim, points } => Some(GeomSet::points(*dim, points.clone())?),
            SetSpec::Moran { .. } => None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorName {
    PhiLower,
    Quasi,
    Windowed,
}

impl EstimatorName {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorName::PhiLower => "phi-lower",
            EstimatorName::Quasi => "quasi",
            EstimatorName::Windowed => "windowed",
        }
    }
}

/// A parsed config together with the hash of its source bytes.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<LoadedConfig, RunError> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| RunError::Validation(format!("config: {e}")))?;
        config.validate()?;
        Ok(LoadedConfig { config, sha256: sha256_hex(text.as_bytes()) })
    }

    pub fn load(path: &std::path::Path) -> Result<LoadedConfig, RunError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
        ExperimentConfig::parse(&text)
    }

    /// Kind-specific required parameters present, nothing foreign, limits
    /// positive, and every φ resolvable.
    pub fn validate(&self) -> Result<(), RunError> {
        let entry = catalog::entry(self.kind);
        let present = self.params.present();
        for r in entry.required {
            if !present.contains(r) {
                return Err(RunError::Validation(format!("`{}` requires parameter `{r}`", self.kind.name())));
            }
        }
        for p in &present {
            if !entry.required.contains(p) && !entry.optional.contains(p) {
                return Err(RunError::Validation(format!("`{}` does not take parameter `{p}`", self.kind.name())));
            }
        }
        if self.depth_budget == Some(0) {
            return Err(RunError::Validation("depth_budget must be positive".into()));
        }
        let p = &self.params;
        if p.point_budget == Some(0) || p.checkpoints == Some(0) || p.q_max == Some(0) {
            return Err(RunError::Validation("budgets and counts must be positive".into()));
        }
        for (name, spec) in [("phi", &p.phi), ("psi", &p.psi)] {
            if let Some(s) = spec {
                match (s.candidate(), self.kind) {
                    (Ok(Candidate::Identity), Kind::DimfuncCheck) | (Ok(Candidate::Function(_)), _) => {}
                    (Ok(Candidate::Identity), _) => {
                        return Err(RunError::Validation(format!(
                            "`{name}`: `identity` is only accepted by dimfunc-check"
                        )))
                    }
                    (Err(e), _) => return Err(RunError::Validation(format!("`{name}`: {e}"))),
                }
            }
        }
        if let Some(r) = p.radii {
            r.radii()?;
        }
        let t = &self.tolerances;
        let tols = [
            t.example,
            t.example1_phi,
            t.value,
            t.baseline,
            t.variational,
            t.ordering,
            t.rate_window,
            t.gap,
            t.box_slack,
        ];
        if tols.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || !(t.gap_max_epsilon > 0.0) {
            return Err(RunError::Validation("tolerances must be finite and non-negative".into()));
        }
        Ok(())
    }
}
