use std::fs;
use std::path::{Path, PathBuf};

use bass_core::data::{
    generate_phantom_dataset, mask_to_pgm, read_dataset, read_mask, read_sensitivities,
    render_mask, write_dataset, write_images, write_sensitivities,
};
use bass_core::objective::{dataset_fingerprint, efficacy, evaluate, EvalReport, DEFAULT_DELTA};
use bass_core::optimize::{bass_run, greedy_forward, poss_run, write_trace, Objective, TraceRow};
use bass_core::recon::{build_reconstructor, CoilSensitivities, Reconstructor};
use bass_core::sampling::generate;
use bass_core::{Dataset, KSpaceGrid, SamplingPattern};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult, Context};
use crate::render::{map_to_csv, map_to_pgm};
use crate::spec::{ExperimentSpec, OptimizerSpec, Purpose};

/// Command-independent run settings from the command line.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub quiet: bool,
    /// Record wall-clock times in traces and reports.
    pub timing: bool,
}

impl RunOptions {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        Self {
            out: out.into(),
            ..Self::default()
        }
    }

    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }

    fn warn(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("warning: {}", msg.as_ref());
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Serialize)]
struct ManifestEntry {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    seed: Option<u64>,
    files: Vec<ManifestEntry>,
}

/// Output directory that remembers what was written, for the manifest.
struct Outputs {
    dir: PathBuf,
    files: Vec<ManifestEntry>,
}

impl Outputs {
    fn create(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> CliResult<()> {
        let bytes = bytes.as_ref();
        fs::write(self.path(name), bytes)
            .context(|| format!("writing {}", self.path(name).display()))?;
        self.record(name, bytes);
        Ok(())
    }

    /// Records a file some other writer already produced.
    fn track(&mut self, name: &str) -> CliResult<()> {
        let bytes = fs::read(self.path(name)).context(|| format!("reading back {name}"))?;
        self.record(name, &bytes);
        Ok(())
    }

    fn record(&mut self, name: &str, bytes: &[u8]) {
        self.files.retain(|e| e.path != name);
        self.files.push(ManifestEntry {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
        });
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text =
            serde_json::to_string_pretty(value).map_err(|e| CliError::Data(e.to_string()))?;
        text.push('\n');
        self.write(name, text)
    }

    fn write_pgms(&mut self, stem: &str, frames: Vec<Vec<u8>>) -> CliResult<()> {
        for (t, f) in frames.into_iter().enumerate() {
            self.write(&format!("{stem}_t{t}.pgm"), f)?;
        }
        Ok(())
    }

    fn finish(mut self, command: &str, spec: Option<&ExperimentSpec>) -> CliResult<()> {
        if let Some(spec) = spec {
            self.write_json("spec.resolved.json", spec)?;
        }
        let manifest = Manifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            seed: spec.and_then(|s| s.seed),
            files: self.files,
        };
        let mut text =
            serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Data(e.to_string()))?;
        text.push('\n');
        fs::write(self.dir.join("manifest.json"), text).context(|| "writing manifest.json".into())
    }
}

/// Dataset and coil sensitivities an experiment runs on.
pub struct Loaded {
    pub dataset: Dataset,
    pub sens: CoilSensitivities,
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}.kspd"))
}

pub fn load_data(spec: &ExperimentSpec) -> CliResult<Loaded> {
    if let Some(path) = &spec.dataset.path {
        let dataset =
            read_dataset(path).context(|| format!("reading dataset {}", path.display()))?;
        let sens_path = spec
            .dataset
            .sensitivities
            .clone()
            .unwrap_or_else(|| sidecar(path, "sens"));
        let sens = read_sensitivities(&sens_path)
            .context(|| format!("reading sensitivities {}", sens_path.display()))?;
        return Ok(Loaded { dataset, sens });
    }
    let config = spec
        .dataset
        .phantom
        .as_ref()
        .ok_or_else(|| CliError::Spec("dataset: no source".into()))?;
    let ph = generate_phantom_dataset(config).context(|| "generating phantom".into())?;
    Ok(Loaded {
        dataset: ph.dataset,
        sens: ph.sensitivities,
    })
}

/// Training items and, when any remain, validation items.
pub fn split(spec: &ExperimentSpec, dataset: &Dataset) -> CliResult<(Dataset, Option<Dataset>)> {
    let n = dataset.len();
    let train = match (spec.split.train, spec.split.validation) {
        (Some(t), _) => t,
        (None, Some(v)) => n.saturating_sub(v),
        (None, None) if n > 1 => n - (n / 4).max(1),
        (None, None) => n,
    };
    let validation = spec.split.validation.unwrap_or(n.saturating_sub(train));
    if train == 0 || train + validation > n {
        return Err(CliError::Spec(format!(
            "split: {train} training + {validation} validation items exceed the {n} available"
        )));
    }
    let train_set = dataset.subset(0..train)?;
    let val_set = (validation > 0)
        .then(|| dataset.subset(train..train + validation))
        .transpose()?;
    Ok((train_set, val_set))
}

pub fn initial_pattern(
    spec: &ExperimentSpec,
    grid: &KSpaceGrid,
    target: usize,
) -> CliResult<SamplingPattern> {
    if let Some(path) = &spec.initial.mask {
        let p = read_mask(path).context(|| format!("reading initial mask {}", path.display()))?;
        if !p.grid().same_points(grid) {
            return Err(CliError::Data(format!(
                "initial mask grid {} does not match the dataset grid {grid}",
                p.grid()
            )));
        }
        return Ok(p);
    }
    let config = spec.initial_generator(target);
    generate(&config, grid).context(|| "initial pattern".into())
}

/// Criterion value of `pattern` on `train` for each λ on the grid; the
/// smallest wins, the earliest on ties. A λ whose reconstruction fails
/// numerically scores +∞.
pub fn tune_lambda(
    spec: &ExperimentSpec,
    pattern: &SamplingPattern,
    train: &Dataset,
    sens: &CoilSensitivities,
) -> CliResult<(f64, Vec<(f64, f64)>)> {
    if !spec.tunes_lambda() {
        return Ok((spec.recon.lambda, Vec::new()));
    }
    let mut table = Vec::new();
    let mut last_err = None;
    for lambda in spec.lambda_grid.values() {
        let recon =
            build_reconstructor(&spec.recon.clone().with_lambda(lambda), sens, &train.grid())?;
        let obj = Objective::new(train, recon.as_ref()).with_sensitivities(sens);
        match obj.evaluate(pattern, spec.criterion) {
            Ok(e) => table.push((lambda, e.value)),
            Err(e) if e.is_numerical() => {
                table.push((lambda, f64::INFINITY));
                last_err = Some(e);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let best = table
        .iter()
        .copied()
        .reduce(|a, b| if b.1 < a.1 { b } else { a })
        .expect("grid is non-empty");
    if !best.1.is_finite() {
        return Err(CliError::Numerical(format!(
            "every λ on the grid failed: {}",
            last_err.map(|e| e.to_string()).unwrap_or_default()
        )));
    }
    Ok((best.0, table))
}

fn build(
    spec: &ExperimentSpec,
    lambda: f64,
    sens: &CoilSensitivities,
    grid: &KSpaceGrid,
) -> CliResult<Box<dyn Reconstructor>> {
    Ok(build_reconstructor(
        &spec.recon.clone().with_lambda(lambda),
        sens,
        grid,
    )?)
}

/// Outcome of any optimizer in a common shape.
pub struct Learned {
    pub pattern: SamplingPattern,
    pub value: Option<f64>,
    pub trace: Vec<TraceRow>,
    pub warnings: Vec<String>,
}

pub fn run_optimizer(
    optimizer: &OptimizerSpec,
    init: SamplingPattern,
    objective: &Objective,
) -> CliResult<Learned> {
    Ok(match optimizer {
        OptimizerSpec::Bass(c) => {
            let out = bass_run(init, c, objective).context(|| "bass".into())?;
            Learned {
                value: Some(out.value),
                pattern: out.pattern,
                warnings: out.state.warnings.clone(),
                trace: out.state.trace,
            }
        }
        OptimizerSpec::Greedy(c) => {
            let out = greedy_forward(init, c, objective).context(|| "greedy".into())?;
            Learned {
                pattern: out.pattern,
                value: out.value,
                trace: out.trace,
                warnings: Vec::new(),
            }
        }
        OptimizerSpec::Poss(c) => {
            let out = poss_run(init, c, objective).context(|| "poss".into())?;
            Learned {
                pattern: out.pattern,
                value: Some(out.value),
                trace: out.trace,
                warnings: Vec::new(),
            }
        }
    })
}

fn trace_csv(rows: &[TraceRow]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_trace(rows, &mut buf).expect("writing to memory");
    buf
}

fn report(
    pattern: &SamplingPattern,
    data: &Dataset,
    recon: &dyn Reconstructor,
    sens: &CoilSensitivities,
    timing: bool,
) -> CliResult<EvalReport> {
    let mut r = evaluate(pattern, data, recon, sens).context(|| "evaluating pattern".into())?;
    if !timing {
        r.wall_ms = 0;
    }
    Ok(r)
}

fn eval_csv(rows: &[(&str, &EvalReport)]) -> String {
    let mut out = format!("split,{}\n", EvalReport::CSV_HEADER);
    for (name, r) in rows {
        out.push_str(&format!("{name},{}\n", r.csv_row()));
    }
    out
}

/// What `export-maps` needs from a `learn` run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
    pub mask: String,
    pub optimizer: String,
    pub lambda_search: f64,
    pub lambda_final: f64,
    pub value: Option<f64>,
    /// ε-map and r-map of the learned pattern on the training items.
    pub epsilon: Vec<f64>,
    pub r: Vec<f64>,
    pub warnings: Vec<String>,
    pub dataset_fingerprint: String,
}

pub const STATE_FILE: &str = "state.json";

#[derive(Serialize)]
struct LambdaRow {
    lambda: f64,
    value: f64,
}

fn lambda_rows(table: &[(f64, f64)]) -> Vec<LambdaRow> {
    table
        .iter()
        .map(|&(lambda, value)| LambdaRow { lambda, value })
        .collect()
}

#[derive(Serialize)]
struct LearnReport<'a> {
    optimizer: &'a str,
    lambda_initial: f64,
    lambda_final: f64,
    lambda_search_initial: Vec<LambdaRow>,
    lambda_search_final: Vec<LambdaRow>,
    value: Option<f64>,
    recon_calls: u64,
    train: &'a EvalReport,
    validation: Option<&'a EvalReport>,
}

/// Key results of `learn`, also written to the output directory.
#[derive(Clone, Debug)]
pub struct LearnSummary {
    pub pattern: SamplingPattern,
    pub trace: Vec<TraceRow>,
    pub lambda_final: f64,
    pub train: EvalReport,
    pub validation: Option<EvalReport>,
}

pub fn cmd_phantom(spec: &ExperimentSpec, opts: &RunOptions) -> CliResult<()> {
    let spec = spec.resolved(opts.seed);
    spec.validate(Purpose::Phantom)?;
    let config = spec.dataset.phantom.clone().expect("validated");
    let ph = generate_phantom_dataset(&config).context(|| "generating phantom".into())?;
    let name = spec
        .dataset
        .name
        .clone()
        .unwrap_or_else(|| "dataset".into());
    let mut out = Outputs::create(&opts.out)?;
    let echo = serde_json::to_value(&config).map_err(|e| CliError::Data(e.to_string()))?;
    let main = format!("{name}.kspd");
    write_dataset(out.path(&main), &ph.dataset, echo.clone())
        .context(|| format!("writing {main}"))?;
    out.track(&main)?;
    let truth = format!("{name}.truth.kspd");
    write_images(out.path(&truth), &ph.truth, echo).context(|| format!("writing {truth}"))?;
    out.track(&truth)?;
    let sens = format!("{name}.sens.kspd");
    write_sensitivities(out.path(&sens), &ph.sensitivities)
        .context(|| format!("writing {sens}"))?;
    out.track(&sens)?;
    let hash = out.files[0].sha256.clone();
    out.finish("phantom", Some(&spec))?;
    let g = ph.dataset.grid();
    opts.say(format!(
        "{main}: {}x{}x{} grid, {} coils, {} items, sha256 {hash}",
        g.nx,
        g.ny,
        g.nt,
        g.nc,
        ph.dataset.len()
    ));
    Ok(())
}

pub fn cmd_learn(spec: &ExperimentSpec, opts: &RunOptions) -> CliResult<LearnSummary> {
    let spec = spec.resolved(opts.seed);
    spec.validate(Purpose::Learn)?;
    let data = load_data(&spec)?;
    let (train, val) = split(&spec, &data.dataset)?;
    let grid = train.grid();
    let optimizer = spec.optimizer.clone().expect("validated");
    let init = initial_pattern(&spec, &grid, optimizer.target())?;

    let (lambda0, search0) = tune_lambda(&spec, &init, &train, &data.sens)?;
    let recon = build(&spec, lambda0, &data.sens, &grid)?;
    let mut objective = Objective::new(&train, recon.as_ref()).with_sensitivities(&data.sens);
    if opts.timing {
        objective = objective.with_timing();
    }
    let learned = run_optimizer(&optimizer, init, &objective)?;
    for w in &learned.warnings {
        opts.warn(w);
    }
    let recon_calls = learned.trace.last().map_or(0, |r| r.recon_calls_cum);

    let (lambda1, search1) = tune_lambda(&spec, &learned.pattern, &train, &data.sens)?;
    let recon1 = build(&spec, lambda1, &data.sens, &grid)?;
    let train_report = report(
        &learned.pattern,
        &train,
        recon1.as_ref(),
        &data.sens,
        opts.timing,
    )?;
    let val_report = val
        .as_ref()
        .map(|v| {
            report(
                &learned.pattern,
                v,
                recon1.as_ref(),
                &data.sens,
                opts.timing,
            )
        })
        .transpose()?;

    let delta = match &optimizer {
        OptimizerSpec::Bass(c) => c.delta,
        _ => DEFAULT_DELTA,
    };
    let maps = efficacy(&learned.pattern, &train, recon.as_ref())?.maps(&train, delta)?;

    let mut out = Outputs::create(&opts.out)?;
    out.write("mask.mask", render_mask(&learned.pattern))?;
    out.write_pgms("mask", mask_to_pgm(&learned.pattern))?;
    out.write("trace.csv", trace_csv(&learned.trace))?;
    let learn_report = LearnReport {
        optimizer: optimizer.name(),
        lambda_initial: lambda0,
        lambda_final: lambda1,
        lambda_search_initial: lambda_rows(&search0),
        lambda_search_final: lambda_rows(&search1),
        value: learned.value,
        recon_calls,
        train: &train_report,
        validation: val_report.as_ref(),
    };
    out.write_json("eval.json", &learn_report)?;
    let mut rows = vec![("train", &train_report)];
    if let Some(v) = &val_report {
        rows.push(("validation", v));
    }
    out.write("eval.csv", eval_csv(&rows))?;
    let state = StateFile {
        nx: grid.nx,
        ny: grid.ny,
        nt: grid.nt,
        mask: "mask.mask".into(),
        optimizer: optimizer.name().into(),
        lambda_search: lambda0,
        lambda_final: lambda1,
        value: learned.value,
        epsilon: maps.eps,
        r: maps.rmap,
        warnings: learned.warnings.clone(),
        dataset_fingerprint: dataset_fingerprint(&data.dataset),
    };
    out.write_json(STATE_FILE, &state)?;
    out.finish("learn", Some(&spec))?;

    opts.say(format!(
        "{}: |Ω| = {}, F = {}, λ = {lambda1}, train NRMSE {:.6}{}",
        optimizer.name(),
        learned.pattern.len(),
        learned.value.map_or("n/a".into(), |v| format!("{v:.6e}")),
        train_report.nrmse_kspace,
        val_report.as_ref().map_or(String::new(), |v| format!(
            ", validation NRMSE {:.6}",
            v.nrmse_kspace
        )),
    ));
    Ok(LearnSummary {
        pattern: learned.pattern,
        trace: learned.trace,
        lambda_final: lambda1,
        train: train_report,
        validation: val_report,
    })
}

/// Reports for the training and validation items under the spec's λ.
pub fn cmd_evaluate(
    spec: &ExperimentSpec,
    mask: &Path,
    opts: &RunOptions,
) -> CliResult<(EvalReport, EvalReport)> {
    let spec = spec.resolved(opts.seed);
    spec.validate(Purpose::Evaluate)?;
    let data = load_data(&spec)?;
    let (train, val) = split(&spec, &data.dataset)?;
    let val = val.ok_or_else(|| CliError::Spec("split: the validation split is empty".into()))?;
    let grid = train.grid();
    let pattern = read_mask(mask).context(|| format!("reading mask {}", mask.display()))?;
    if !pattern.grid().same_points(&grid) {
        return Err(CliError::Data(format!(
            "mask grid {} does not match the dataset grid {grid}",
            pattern.grid()
        )));
    }
    let recon = build(&spec, spec.recon.lambda, &data.sens, &grid)?;
    let train_report = report(&pattern, &train, recon.as_ref(), &data.sens, opts.timing)?;
    let val_report = report(&pattern, &val, recon.as_ref(), &data.sens, opts.timing)?;

    let mut out = Outputs::create(&opts.out)?;
    #[derive(Serialize)]
    struct Both<'a> {
        lambda: f64,
        train: &'a EvalReport,
        validation: &'a EvalReport,
    }
    out.write_json(
        "eval.json",
        &Both {
            lambda: spec.recon.lambda,
            train: &train_report,
            validation: &val_report,
        },
    )?;
    out.write(
        "eval.csv",
        eval_csv(&[("train", &train_report), ("validation", &val_report)]),
    )?;
    out.finish("evaluate", Some(&spec))?;
    opts.say(format!(
        "validation: NRMSE {:.6} (image {:.6}), SSIM {:.4}, F {:.6e}",
        val_report.nrmse_kspace, val_report.nrmse_image, val_report.mean_ssim, val_report.cost_f
    ));
    Ok((train_report, val_report))
}

/// One point of a `compare` series.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesPoint {
    pub optimizer: String,
    pub epoch: f64,
    pub f: f64,
    pub recon_calls: u64,
}

pub const COMPARE_HEADER: &str = "optimizer,epoch,F,nrmse_train,recon_calls";

/// Runs every optimizer from the same start under the same budget.
pub fn cmd_compare(spec: &ExperimentSpec, opts: &RunOptions) -> CliResult<Vec<SeriesPoint>> {
    let spec = spec.resolved(opts.seed);
    spec.validate(Purpose::Compare)?;
    let data = load_data(&spec)?;
    let (train, _) = split(&spec, &data.dataset)?;
    let grid = train.grid();
    let init = initial_pattern(&spec, &grid, spec.optimizers[0].target())?;
    let (lambda, _) = tune_lambda(&spec, &init, &train, &data.sens)?;
    let recon = build(&spec, lambda, &data.sens, &grid)?;
    let mut objective = Objective::new(&train, recon.as_ref()).with_sensitivities(&data.sens);
    if opts.timing {
        objective = objective.with_timing();
    }
    let n_items = train.len() as u64;
    let f_init = objective.evaluate(&init, spec.criterion)?.value;

    let mut names: Vec<String> = Vec::new();
    let mut series = Vec::new();
    let mut out = Outputs::create(&opts.out)?;
    for o in &spec.optimizers {
        let mut name = o.name().to_string();
        if names.contains(&name) {
            name = format!("{name}-{}", names.len());
        }
        names.push(name.clone());
        series.push(SeriesPoint {
            optimizer: name.clone(),
            epoch: 0.0,
            f: f_init,
            recon_calls: 0,
        });

        let mut o = o.clone();
        let steps = spec.budget.map(|b| (b / n_items) as usize);
        let runs = match (&mut o, spec.budget) {
            (_, Some(0)) => false,
            (OptimizerSpec::Bass(c), _) => {
                c.iterations = steps.map_or(c.iterations, |s| s.min(c.iterations));
                true
            }
            (OptimizerSpec::Poss(c), _) => {
                c.iterations = steps.map_or(c.iterations, |s| s.min(c.iterations));
                c.iterations > 0
            }
            (OptimizerSpec::Greedy(c), b) => {
                c.max_recon_calls = match (c.max_recon_calls, b) {
                    (Some(x), Some(y)) => Some(x.min(y)),
                    (x, y) => x.or(y),
                };
                true
            }
        };
        if !runs {
            continue;
        }
        let learned = run_optimizer(&o, init.clone(), &objective)?;
        let mut current = f_init;
        for row in &learned.trace {
            if spec.budget.is_some_and(|b| row.recon_calls_cum > b) {
                break;
            }
            if row.accepted {
                current = row.f;
            }
            series.push(SeriesPoint {
                optimizer: name.clone(),
                epoch: row.recon_calls_cum as f64 / n_items as f64,
                f: current,
                recon_calls: row.recon_calls_cum,
            });
        }
        out.write(&format!("trace_{name}.csv"), trace_csv(&learned.trace))?;
        out.write(&format!("mask_{name}.mask"), render_mask(&learned.pattern))?;
        opts.say(format!(
            "{name}: final F {current:.6e} after {} recon calls",
            learned.trace.last().map_or(0, |r| r.recon_calls_cum)
        ));
    }

    let kspace = spec.criterion == bass_core::objective::Criterion::Kspace;
    let mut csv = format!("{COMPARE_HEADER}\n");
    for p in &series {
        let nrmse = if kspace {
            format!("{}", (p.f * n_items as f64).sqrt())
        } else {
            String::new()
        };
        csv.push_str(&format!(
            "{},{},{},{nrmse},{}\n",
            p.optimizer, p.epoch, p.f, p.recon_calls
        ));
    }
    out.write("compare.csv", csv)?;
    out.finish("compare", Some(&spec))?;
    Ok(series)
}

/// Renders the maps and mask stored by `learn` in `state_dir`.
pub fn cmd_export_maps(state_dir: &Path, opts: &RunOptions) -> CliResult<()> {
    let path = state_dir.join(STATE_FILE);
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Data(format!("missing state {}: {e}", path.display())))?;
    let state: StateFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let grid = KSpaceGrid::new(state.nx, state.ny, state.nt, 1)?;
    if state.epsilon.len() != grid.n_points() || state.r.len() != grid.n_points() {
        return Err(CliError::Data(format!(
            "{}: map length does not match the {} grid points",
            path.display(),
            grid.n_points()
        )));
    }
    let pattern =
        read_mask(state_dir.join(&state.mask)).context(|| format!("reading {}", state.mask))?;

    let mut out = Outputs::create(&opts.out)?;
    out.write("epsilon.csv", map_to_csv(&state.epsilon, &grid))?;
    out.write("r.csv", map_to_csv(&state.r, &grid))?;
    out.write_pgms("epsilon", map_to_pgm(&state.epsilon, &grid))?;
    out.write_pgms("r", map_to_pgm(&state.r, &grid))?;
    out.write_pgms("mask", mask_to_pgm(&pattern))?;
    out.finish("export-maps", None)?;
    opts.say(format!(
        "maps for {} frame(s) written to {}",
        grid.nt,
        opts.out.display()
    ));
    Ok(())
}
