//! Experiment harness: single trials, paired parameter sweeps and result
//! files.
//!
//! Every cell `(value, repetition)` generates one scenario from a seed
//! derived as `base_seed ^ splitmix64(splitmix64(layout_key) ^ rep)` and runs
//! all requested algorithms on it. The layout key is the swept value for
//! user-count and area sweeps and a constant for backhaul-threshold sweeps,
//! so the latter compare thresholds on identical user layouts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{backhaul_greedy, greedy_cover, random_deploy, GreedyMode};
use crate::error::{Error, Result};
use crate::exact::{solve_exact, DEFAULT_CANDIDATE_LIMIT};
use crate::netgraph::{build_graph, DeploymentGraph};
use crate::plan::{verify_plan, AlgorithmTag, Plan};
use crate::planner::prune;
use crate::scenario::{Scenario, ScenarioConfig};
use crate::VERSION;

pub const MANIFEST_TOOLKIT: &str = "uavplace";

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Short stable identifier of a scenario: its seed and an FNV-1a hash of
/// its serialized form.
pub fn fingerprint(scenario: &Scenario) -> String {
    let text = serde_json::to_string(scenario).unwrap_or_default();
    let hash = text.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x100_0000_01b3));
    format!("seed={} hash={hash:016x}", scenario.rng_seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOptions {
    pub random_seed: u64,
    pub exact_limit: usize,
    pub greedy_mode: GreedyMode,
}

impl TrialOptions {
    pub fn for_scenario(scenario: &Scenario) -> Self {
        Self { random_seed: scenario.rng_seed, exact_limit: DEFAULT_CANDIDATE_LIMIT, greedy_mode: GreedyMode::Adaptive }
    }
}

/// Runs one algorithm on a prebuilt graph and verifies the result.
pub fn run_on_graph(graph: &DeploymentGraph, tag: AlgorithmTag, opts: &TrialOptions) -> Result<Plan> {
    let plan = match tag {
        AlgorithmTag::Proposed => prune(graph)?,
        AlgorithmTag::GreedyNoBackhaul => greedy_cover(graph, opts.greedy_mode)?,
        AlgorithmTag::BackhaulGreedy => backhaul_greedy(graph)?,
        AlgorithmTag::Random => random_deploy(graph, opts.random_seed)?,
        AlgorithmTag::Exact => solve_exact(graph, opts.exact_limit)?.0,
    };
    let report = verify_plan(graph, &plan);
    if !report.passed() {
        return Err(Error::Invariant(format!("{tag} plan failed verification:\n{report}")));
    }
    Ok(plan)
}

/// Builds the graph, runs `tag` and verifies the plan. Random deployment is
/// seeded from the scenario seed.
pub fn run_trial(scenario: &Scenario, tag: AlgorithmTag) -> Result<Plan> {
    run_trial_with(scenario, tag, &TrialOptions::for_scenario(scenario))
}

pub fn run_trial_with(scenario: &Scenario, tag: AlgorithmTag, opts: &TrialOptions) -> Result<Plan> {
    let wrap = |e: Error| Error::InScenario { fingerprint: fingerprint(scenario), source: Box::new(e) };
    scenario.validate().map_err(wrap)?;
    run_on_graph(&build_graph(scenario), tag, opts).map_err(wrap)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    NUsers,
    /// Side of a square area, in metres.
    AreaSide,
    /// Backhaul SNR threshold, in dB.
    BackhaulSnr,
}

impl SweepVariable {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepVariable::NUsers => "n_users",
            SweepVariable::AreaSide => "area_side",
            SweepVariable::BackhaulSnr => "backhaul_snr",
        }
    }

    fn layout_key(&self, value: f64) -> u64 {
        match self {
            SweepVariable::BackhaulSnr => 0,
            _ => value.to_bits(),
        }
    }

    fn apply(&self, template: &ScenarioConfig, value: f64) -> ScenarioConfig {
        let mut cfg = template.clone();
        match self {
            SweepVariable::NUsers => cfg.n_users = value as usize,
            SweepVariable::AreaSide => {
                cfg.area_width = value;
                cfg.area_height = value;
            }
            SweepVariable::BackhaulSnr => cfg.thresholds.backhaul_snr_min = value,
        }
        cfg
    }
}

fn default_exact_limit() -> usize {
    DEFAULT_CANDIDATE_LIMIT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    #[serde(default)]
    pub fixed: ScenarioConfig,
    pub algorithms: Vec<AlgorithmTag>,
    pub repetitions: usize,
    pub base_seed: u64,
    #[serde(default)]
    pub greedy_mode: GreedyMode,
    #[serde(default = "default_exact_limit")]
    pub exact_limit: usize,
}

impl SweepSpec {
    pub fn new(variable: SweepVariable, values: Vec<f64>, algorithms: Vec<AlgorithmTag>) -> Self {
        Self {
            variable,
            values,
            fixed: ScenarioConfig::default(),
            algorithms,
            repetitions: 20,
            base_seed: 0,
            greedy_mode: GreedyMode::Adaptive,
            exact_limit: DEFAULT_CANDIDATE_LIMIT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1");
        }
        if self.values.is_empty() {
            return bad("sweep values must be non-empty");
        }
        if self.algorithms.is_empty() {
            return bad("algorithm list must be non-empty");
        }
        for &v in &self.values {
            let ok = match self.variable {
                SweepVariable::NUsers => v >= 0.0 && v.fract() == 0.0,
                SweepVariable::AreaSide => v > 0.0 && v.is_finite(),
                SweepVariable::BackhaulSnr => v.is_finite(),
            };
            if !ok {
                return Err(Error::InvalidParameter(format!("bad {} value {v}", self.variable.as_str())));
            }
        }
        Ok(())
    }

    pub fn cell_seed(&self, value: f64, rep: usize) -> u64 {
        self.base_seed ^ splitmix64(splitmix64(self.variable.layout_key(value)) ^ rep as u64)
    }

    pub fn scenario_config(&self, value: f64) -> ScenarioConfig {
        self.variable.apply(&self.fixed, value)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SweepSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TrialOutcome {
    Ok { uavs: usize, covered: bool, connected: bool, runtime: f64 },
    Skipped { reason: String },
    Error { category: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub value: f64,
    pub rep: usize,
    pub seed: u64,
    pub algorithm: AlgorithmTag,
    pub outcome: TrialOutcome,
}

impl TrialRecord {
    pub fn uavs(&self) -> Option<usize> {
        match self.outcome {
            TrialOutcome::Ok { uavs, .. } => Some(uavs),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub value: f64,
    pub algorithm: AlgorithmTag,
    pub trials: usize,
    pub errors: usize,
    pub skipped: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub min: Option<usize>,
    pub max: Option<usize>,
    pub mean_runtime: Option<f64>,
    pub coverage_rate: Option<f64>,
    pub connectivity_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    /// One record per (value, repetition, algorithm), in that nesting order.
    pub trials: Vec<TrialRecord>,
    /// One summary per (value, algorithm), values in spec order.
    pub summaries: Vec<CellSummary>,
}

impl SweepResult {
    pub fn summary(&self, value: f64, algorithm: AlgorithmTag) -> Option<&CellSummary> {
        self.summaries.iter().find(|s| s.value == value && s.algorithm == algorithm)
    }

    pub fn records(&self, algorithm: AlgorithmTag) -> impl Iterator<Item = &TrialRecord> {
        self.trials.iter().filter(move |t| t.algorithm == algorithm)
    }
}

fn run_cell(spec: &SweepSpec, value: f64, rep: usize) -> Vec<TrialRecord> {
    let seed = spec.cell_seed(value, rep);
    let record = |algorithm, outcome| TrialRecord { value, rep, seed, algorithm, outcome };
    let scenario = spec.scenario_config(value).generate(seed);
    let scenario = match scenario {
        Ok(s) => s,
        Err(e) => {
            let outcome = TrialOutcome::Error { category: e.category().into(), message: e.to_string() };
            return spec.algorithms.iter().map(|&a| record(a, outcome.clone())).collect();
        }
    };
    let graph = build_graph(&scenario);
    let opts = TrialOptions {
        random_seed: splitmix64(seed ^ 0x7261_6e64_6f6d),
        exact_limit: spec.exact_limit,
        greedy_mode: spec.greedy_mode,
    };
    spec.algorithms
        .iter()
        .map(|&tag| {
            if tag == AlgorithmTag::Exact && graph.n_candidates() > opts.exact_limit.min(32) {
                let reason =
                    format!("{} candidates exceed the exact limit of {}", graph.n_candidates(), opts.exact_limit);
                return record(tag, TrialOutcome::Skipped { reason });
            }
            let outcome = match run_on_graph(&graph, tag, &opts) {
                Ok(plan) => TrialOutcome::Ok {
                    uavs: plan.len(),
                    covered: graph.coverage_complete(&plan.selected),
                    connected: plan.connected,
                    runtime: plan.runtime,
                },
                Err(e) => {
                    let e = Error::InScenario { fingerprint: fingerprint(&scenario), source: Box::new(e) };
                    TrialOutcome::Error { category: e.category().into(), message: e.to_string() }
                }
            };
            record(tag, outcome)
        })
        .collect()
}

fn summarize(value: f64, algorithm: AlgorithmTag, records: &[&TrialRecord]) -> CellSummary {
    let mut counts = Vec::new();
    let (mut runtime, mut covered, mut connected, mut errors, mut skipped) = (0.0, 0usize, 0usize, 0, 0);
    for r in records {
        match &r.outcome {
            TrialOutcome::Ok { uavs, covered: c, connected: k, runtime: t } => {
                counts.push(*uavs as f64);
                runtime += t;
                covered += usize::from(*c);
                connected += usize::from(*k);
            }
            TrialOutcome::Skipped { .. } => skipped += 1,
            TrialOutcome::Error { .. } => errors += 1,
        }
    }
    let n = counts.len();
    let nf = n as f64;
    let mean = (n > 0).then(|| counts.iter().sum::<f64>() / nf);
    let std = mean.map(|m| {
        if n < 2 {
            0.0
        } else {
            (counts.iter().map(|c| (c - m).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt()
        }
    });
    CellSummary {
        value,
        algorithm,
        trials: n,
        errors,
        skipped,
        mean,
        std,
        min: counts.iter().map(|&c| c as usize).min(),
        max: counts.iter().map(|&c| c as usize).max(),
        mean_runtime: (n > 0).then(|| runtime / nf),
        coverage_rate: (n > 0).then(|| covered as f64 / nf),
        connectivity_rate: (n > 0).then(|| connected as f64 / nf),
    }
}

/// Runs every (value, repetition) cell on `workers` threads (0 picks the
/// machine default). Output does not depend on the worker count.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    spec.validate()?;
    let cells: Vec<(f64, usize)> =
        spec.values.iter().flat_map(|&v| (0..spec.repetitions).map(move |r| (v, r))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    let per_cell: Vec<Vec<TrialRecord>> =
        pool.install(|| cells.par_iter().map(|&(v, r)| run_cell(spec, v, r)).collect());
    let trials: Vec<TrialRecord> = per_cell.into_iter().flatten().collect();

    let mut summaries = Vec::new();
    for &value in &spec.values {
        for &alg in &spec.algorithms {
            let recs: Vec<&TrialRecord> =
                trials.iter().filter(|t| t.value == value && t.algorithm == alg).collect();
            summaries.push(summarize(value, alg, &recs));
        }
    }
    Ok(SweepResult { spec: spec.clone(), trials, summaries })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSeed {
    pub value: f64,
    pub rep: usize,
    pub seed: u64,
}

/// Everything needed to re-run a sweep exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub toolkit: String,
    pub version: String,
    pub spec: SweepSpec,
    pub cells: Vec<CellSeed>,
}

impl Manifest {
    pub fn for_spec(spec: &SweepSpec) -> Self {
        let cells = spec
            .values
            .iter()
            .flat_map(|&value| (0..spec.repetitions).map(move |rep| (value, rep)))
            .map(|(value, rep)| CellSeed { value, rep, seed: spec.cell_seed(value, rep) })
            .collect();
        Self { toolkit: MANIFEST_TOOLKIT.into(), version: VERSION.into(), spec: spec.clone(), cells }
    }
}

/// Reads either a bare sweep spec or a manifest written by `emit_results`.
pub fn load_sweep_input(path: impl AsRef<Path>) -> Result<SweepSpec> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let spec: SweepSpec = if value.get("spec").is_some() && value.get("toolkit").is_some() {
        serde_json::from_value::<Manifest>(value)?.spec
    } else {
        serde_json::from_value(value)?
    };
    spec.validate()?;
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmittedFiles {
    pub summary_csv: PathBuf,
    pub timing_csv: PathBuf,
    pub trials_csv: PathBuf,
    pub plot_data: PathBuf,
    pub manifest: PathBuf,
}

fn opt<T: std::fmt::Display>(x: &Option<T>) -> String {
    x.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn variant_label(spec: &SweepSpec, alg: AlgorithmTag) -> &'static str {
    if alg == AlgorithmTag::GreedyNoBackhaul {
        spec.greedy_mode.as_str()
    } else {
        ""
    }
}

/// Summary table. Runtimes live in a separate file so this one is
/// byte-identical across re-runs.
pub fn summary_csv(result: &SweepResult) -> String {
    let mut out = String::from(
        "variable,value,algorithm,variant,trials,errors,skipped,mean,std,min,max,coverage_rate,connectivity_rate\n",
    );
    for s in &result.summaries {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            result.spec.variable.as_str(),
            s.value,
            s.algorithm,
            variant_label(&result.spec, s.algorithm),
            s.trials,
            s.errors,
            s.skipped,
            opt(&s.mean),
            opt(&s.std),
            opt(&s.min),
            opt(&s.max),
            opt(&s.coverage_rate),
            opt(&s.connectivity_rate),
        );
    }
    out
}

pub fn timing_csv(result: &SweepResult) -> String {
    let mut out = String::from("variable,value,algorithm,mean_runtime_s\n");
    for s in &result.summaries {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            result.spec.variable.as_str(),
            s.value,
            s.algorithm,
            opt(&s.mean_runtime)
        );
    }
    out
}

pub fn trials_csv(result: &SweepResult) -> String {
    let mut out = String::from("value,rep,seed,algorithm,status,uavs,covered,connected,detail\n");
    for t in &result.trials {
        let (status, uavs, cov, conn, detail) = match &t.outcome {
            TrialOutcome::Ok { uavs, covered, connected, .. } => {
                ("ok", uavs.to_string(), covered.to_string(), connected.to_string(), String::new())
            }
            TrialOutcome::Skipped { reason } => ("skipped", String::new(), String::new(), String::new(), reason.clone()),
            TrialOutcome::Error { category, .. } => {
                ("error", String::new(), String::new(), String::new(), category.clone())
            }
        };
        let _ = writeln!(out, "{},{},{},{},{status},{uavs},{cov},{conn},{detail}", t.value, t.rep, t.seed, t.algorithm);
    }
    out
}

/// Whitespace-separated columns: the swept value (ascending) then the mean
/// UAV count of each algorithm, `nan` where no trial succeeded.
pub fn plot_data(result: &SweepResult) -> String {
    let spec = &result.spec;
    let mut out = format!("# {}", spec.variable.as_str());
    for alg in &spec.algorithms {
        let _ = write!(out, " {alg}");
    }
    out.push('\n');
    let mut xs = spec.values.clone();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    for x in xs {
        let _ = write!(out, "{x}");
        for &alg in &spec.algorithms {
            let mean = result.summary(x, alg).and_then(|s| s.mean);
            let _ = write!(out, " {}", mean.map_or("nan".to_string(), |m| m.to_string()));
        }
        out.push('\n');
    }
    out
}

pub fn emit_results(result: &SweepResult, out_dir: impl AsRef<Path>) -> Result<EmittedFiles> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir)?;
    let stem = result.spec.variable.as_str();
    let files = EmittedFiles {
        summary_csv: dir.join(format!("{stem}.csv")),
        timing_csv: dir.join(format!("{stem}_timing.csv")),
        trials_csv: dir.join(format!("{stem}_trials.csv")),
        plot_data: dir.join(format!("{stem}_plot.dat")),
        manifest: dir.join("manifest.json"),
    };
    fs::write(&files.summary_csv, summary_csv(result))?;
    fs::write(&files.timing_csv, timing_csv(result))?;
    fs::write(&files.trials_csv, trials_csv(result))?;
    fs::write(&files.plot_data, plot_data(result))?;
    let mut manifest = serde_json::to_string_pretty(&Manifest::for_spec(&result.spec))?;
    manifest.push('\n');
    fs::write(&files.manifest, manifest)?;
    Ok(files)
}
