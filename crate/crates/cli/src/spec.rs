//! Experiment specification: one JSON or TOML document per run.

use std::path::{Path, PathBuf};

use bass_core::data::PhantomConfig;
use bass_core::objective::Criterion;
use bass_core::optimize::{BassConfig, GreedyConfig, PossConfig};
use bass_core::recon::{ReconConfig, ReconMethod};
use bass_core::sampling::{CalibrationRegion, GeneratorConfig, GeneratorKind};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Master seed. When set it overrides the phantom, generator and
    /// optimizer seeds (offsets 0, 1 and 2).
    pub seed: Option<u64>,
    pub dataset: DatasetSpec,
    pub split: SplitSpec,
    pub recon: ReconConfig,
    pub lambda_grid: LambdaGrid,
    pub initial: InitialSpec,
    /// Optimizer for `learn`.
    pub optimizer: Option<OptimizerSpec>,
    /// Optimizers for `compare`.
    pub optimizers: Vec<OptimizerSpec>,
    /// Reconstruction-call budget per optimizer in `compare`.
    pub budget: Option<u64>,
    pub criterion: Criterion,
    pub output: Option<PathBuf>,
}

/// Where the data comes from: a `.kspd` file or an in-memory phantom.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSpec {
    pub path: Option<PathBuf>,
    /// Coil sensitivities; defaults to the `<stem>.sens.kspd` sidecar.
    pub sensitivities: Option<PathBuf>,
    pub phantom: Option<PhantomConfig>,
    /// File stem used by `phantom`.
    pub name: Option<String>,
}

/// First `train` items train, the next `validation` items validate.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSpec {
    pub train: Option<usize>,
    pub validation: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LambdaGrid {
    pub enabled: bool,
    /// Explicit values; when absent `count` values are spaced
    /// logarithmically over `[min, max]`.
    pub values: Option<Vec<f64>>,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Default for LambdaGrid {
    fn default() -> Self {
        Self {
            enabled: true,
            values: None,
            min: 1e-4,
            max: 1.0,
            count: 5,
        }
    }
}

impl LambdaGrid {
    pub fn values(&self) -> Vec<f64> {
        if let Some(v) = &self.values {
            return v.clone();
        }
        if self.count == 1 {
            return vec![self.min];
        }
        let (lo, hi) = (self.min.ln(), self.max.ln());
        (0..self.count)
            .map(|i| (lo + (hi - lo) * i as f64 / (self.count - 1) as f64).exp())
            .collect()
    }

    fn validate(&self) -> CliResult<()> {
        if let Some(v) = &self.values {
            if v.is_empty() || v.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
                return spec_err(
                    "lambda_grid.values",
                    "values must be finite, >= 0 and non-empty",
                );
            }
            return Ok(());
        }
        if !(self.min > 0.0 && self.max >= self.min && self.max.is_finite()) {
            return spec_err("lambda_grid", "need 0 < min <= max");
        }
        if self.count == 0 {
            return spec_err("lambda_grid.count", "must be >= 1");
        }
        Ok(())
    }
}

/// Starting pattern: a mask file or a generator. With neither, a
/// variable-density pattern of the optimizer's target size is drawn.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSpec {
    pub mask: Option<PathBuf>,
    pub generator: Option<GeneratorConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum OptimizerSpec {
    Bass(BassConfig),
    Greedy(GreedyConfig),
    Poss(PossConfig),
}

impl OptimizerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            OptimizerSpec::Bass(_) => "bass",
            OptimizerSpec::Greedy(_) => "greedy",
            OptimizerSpec::Poss(_) => "poss",
        }
    }

    pub fn target(&self) -> usize {
        match self {
            OptimizerSpec::Bass(c) => c.m,
            OptimizerSpec::Greedy(c) => c.m,
            OptimizerSpec::Poss(c) => c.m,
        }
    }

    fn set_seed(&mut self, seed: u64) {
        match self {
            OptimizerSpec::Bass(c) => c.seed = seed,
            OptimizerSpec::Greedy(_) => {}
            OptimizerSpec::Poss(c) => c.seed = seed,
        }
    }

    /// The spec-level criterion applies to every optimizer.
    fn set_criterion(&mut self, criterion: Criterion) {
        match self {
            OptimizerSpec::Bass(c) => c.criterion = criterion,
            OptimizerSpec::Greedy(c) => c.criterion = criterion,
            OptimizerSpec::Poss(c) => c.criterion = criterion,
        }
    }
}

fn spec_err<T>(path: &str, msg: impl std::fmt::Display) -> CliResult<T> {
    Err(CliError::Spec(format!("{path}: {msg}")))
}

/// Which command the spec is validated for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Purpose {
    Phantom,
    Learn,
    Evaluate,
    Compare,
}

impl ExperimentSpec {
    /// Parses JSON, or TOML when the path ends in `.toml`. Errors name the
    /// offending field.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Spec(format!("reading {}: {e}", path.display())))?;
        let is_toml = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        let mut spec = if is_toml {
            Self::from_toml(&text)?
        } else {
            Self::from_json(&text)?
        };
        spec.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(spec)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de)
            .map_err(|e| CliError::Spec(format!("at `{}`: {}", e.path(), e.inner())))
    }

    pub fn from_toml(text: &str) -> CliResult<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| CliError::Spec(e.to_string()))?;
        serde_path_to_error::deserialize(de)
            .map_err(|e| CliError::Spec(format!("at `{}`: {}", e.path(), e.inner())))
    }

    /// Makes relative paths relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        fix(&mut self.dataset.path);
        fix(&mut self.dataset.sensitivities);
        fix(&mut self.initial.mask);
        fix(&mut self.output);
    }

    /// Applies the master seed and the spec-wide criterion, returning the
    /// spec every output is reproducible from.
    pub fn resolved(&self, seed_override: Option<u64>) -> Self {
        let mut s = self.clone();
        if seed_override.is_some() {
            s.seed = seed_override;
        }
        if let Some(seed) = s.seed {
            if let Some(p) = &mut s.dataset.phantom {
                p.seed = seed;
            }
            if let Some(g) = &mut s.initial.generator {
                g.seed = seed.wrapping_add(1);
            }
            for o in s.optimizer.iter_mut().chain(s.optimizers.iter_mut()) {
                o.set_seed(seed.wrapping_add(2));
            }
        }
        let criterion = s.criterion;
        for o in s.optimizer.iter_mut().chain(s.optimizers.iter_mut()) {
            o.set_criterion(criterion);
        }
        s
    }

    /// Schema checks done before any compute.
    pub fn validate(&self, purpose: Purpose) -> CliResult<()> {
        let d = &self.dataset;
        match purpose {
            Purpose::Phantom => {
                let Some(p) = &d.phantom else {
                    return spec_err("dataset.phantom", "required by `phantom`");
                };
                p.validate().or_else(|e| spec_err("dataset.phantom", e))?;
            }
            _ => match (&d.path, &d.phantom) {
                (Some(_), None) => {}
                (None, Some(p)) => p.validate().or_else(|e| spec_err("dataset.phantom", e))?,
                _ => return spec_err("dataset", "exactly one of `path` and `phantom` is required"),
            },
        }
        if let Some(name) = &d.name {
            if name.is_empty() || name.contains(['/', '\\']) {
                return spec_err("dataset.name", "must be a plain file stem");
            }
        }
        if purpose == Purpose::Phantom {
            return Ok(());
        }
        self.recon.validate().or_else(|e| spec_err("recon", e))?;
        if self.lambda_grid.enabled {
            self.lambda_grid.validate()?;
        }
        if self.initial.mask.is_some() && self.initial.generator.is_some() {
            return spec_err("initial", "give either `mask` or `generator`, not both");
        }
        if self.split.train == Some(0) {
            return spec_err("split.train", "must be >= 1");
        }
        match purpose {
            Purpose::Learn => {
                let Some(o) = &self.optimizer else {
                    return spec_err("optimizer", "required by `learn`");
                };
                check_optimizer("optimizer", o)?;
            }
            Purpose::Compare => {
                if self.optimizers.is_empty() {
                    return spec_err("optimizers", "`compare` needs at least one optimizer");
                }
                for (i, o) in self.optimizers.iter().enumerate() {
                    check_optimizer(&format!("optimizers[{i}]"), o)?;
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn tunes_lambda(&self) -> bool {
        self.lambda_grid.enabled && self.recon.method != ReconMethod::ZeroFill
    }

    /// Starting-pattern generator when the spec gives no mask.
    pub fn initial_generator(&self, target: usize) -> GeneratorConfig {
        self.initial.generator.clone().unwrap_or_else(|| {
            GeneratorConfig::new(GeneratorKind::VariableDensity, target)
                .with_seed(self.seed.map_or(0, |s| s.wrapping_add(1)))
                .with_calibration(CalibrationRegion::default())
        })
    }
}

fn check_optimizer(path: &str, o: &OptimizerSpec) -> CliResult<()> {
    if o.target() == 0 {
        return spec_err(
            &format!("{path}.{}.m", o.name()),
            "target size M must be >= 1",
        );
    }
    if let OptimizerSpec::Bass(c) = o {
        if !(c.alpha > 0.0 && c.alpha < 1.0) {
            return spec_err(&format!("{path}.bass.alpha"), "must lie in (0, 1)");
        }
        if c.k_init == 0 {
            return spec_err(&format!("{path}.bass.k_init"), "must be >= 1");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_field_names_its_path() {
        let err = ExperimentSpec::from_json(r#"{"optimizer": {"bass": {"m": 4, "kinit": 2}}}"#)
            .unwrap_err();
        assert!(err.to_string().contains("optimizer.bass"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn toml_and_json_agree() {
        let json = r#"{"seed": 3, "recon": {"method": "cs-sfd", "lambda": 0.01}, "optimizer": {"bass": {"m": 40, "iterations": 10, "k_init": 4}}}"#;
        let toml = "seed = 3\n[recon]\nmethod = \"cs-sfd\"\nlambda = 0.01\n[optimizer.bass]\nm = 40\niterations = 10\nk_init = 4\n";
        assert_eq!(
            ExperimentSpec::from_json(json).unwrap(),
            ExperimentSpec::from_toml(toml).unwrap()
        );
    }

    #[test]
    fn log_grid_spans_bounds() {
        let v = LambdaGrid::default().values();
        assert_eq!(v.len(), 5);
        assert!((v[0] - 1e-4).abs() < 1e-18 && (v[4] - 1.0).abs() < 1e-12);
        assert!((v[2] - 1e-2).abs() < 1e-14);
    }

    #[test]
    fn master_seed_overrides_components() {
        let mut s = ExperimentSpec::from_json(r#"{"dataset": {"phantom": {"nx": 8, "ny": 8, "nt": 1, "nc": 1, "items": 2}}, "optimizer": {"bass": {"m": 4}}}"#).unwrap();
        s.criterion = Criterion::Image;
        let r = s.resolved(Some(9));
        assert_eq!(r.dataset.phantom.unwrap().seed, 9);
        match r.optimizer.unwrap() {
            OptimizerSpec::Bass(c) => {
                assert_eq!(c.seed, 11);
                assert_eq!(c.criterion, Criterion::Image);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn validation_by_purpose() {
        let s = ExperimentSpec::default();
        assert!(s.validate(Purpose::Phantom).is_err());
        assert!(s.validate(Purpose::Learn).is_err());
        let s = ExperimentSpec::from_json(r#"{"dataset": {"path": "d.kspd"}}"#).unwrap();
        assert!(s.validate(Purpose::Evaluate).is_ok());
        let err = s.validate(Purpose::Learn).unwrap_err();
        assert!(err.to_string().contains("optimizer"));
        assert!(s.validate(Purpose::Compare).is_err());
    }
}
