//! Batch experiments: many independent fragmentation trials on one space,
//! aggregated into a report.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::error::Error;
use crate::exec::{map_indexed, mean_and_se, trial_seed, Execution};
use crate::exponents::beta_for_distortion;
use crate::format::{read_matrix_file, read_schedule_file};
use crate::fragmentation::{fragment_iterated, jensen_lower_bound, FragmentationResult};
use crate::generators::{generate, GeneratorSpec};
use crate::metric::FiniteMetricSpace;
use crate::radii::{mn07_geometric_schedule, optimal_schedule, RadiiSchedule};

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    File(PathBuf),
    Generator(GeneratorSpec),
}

impl std::fmt::Display for InputSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InputSource::File(p) => write!(f, "file:{}", p.display()),
            InputSource::Generator(g) => write!(f, "{g}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleChoice {
    Optimal,
    Mn07,
    File(PathBuf),
}

impl std::str::FromStr for ScheduleChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "optimal" => Ok(ScheduleChoice::Optimal),
            "mn07" => Ok(ScheduleChoice::Mn07),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(ScheduleChoice::File(PathBuf::from(p))),
                _ => Err(format!("unknown schedule `{s}` (optimal | mn07 | file:PATH)")),
            },
        }
    }
}

impl std::fmt::Display for ScheduleChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScheduleChoice::Optimal => write!(f, "optimal"),
            ScheduleChoice::Mn07 => write!(f, "mn07"),
            ScheduleChoice::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub input: InputSource,
    pub distortion: f64,
    pub trials: usize,
    pub seed: u64,
    pub schedule: ScheduleChoice,
    pub format: OutputFormat,
    pub checks: bool,
    pub execution: Execution,
}

impl ExperimentConfig {
    pub fn new(input: InputSource, distortion: f64) -> Self {
        Self {
            input,
            distortion,
            trials: 1,
            seed: 0,
            schedule: ScheduleChoice::Optimal,
            format: OutputFormat::Json,
            checks: false,
            execution: Execution::Parallel,
        }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(Error),
    #[error("run failed: {0}")]
    Run(Error),
}

impl HarnessError {
    /// Process exit code: 2 for configuration, 3 for unreadable input.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Input(_) => 3,
            HarnessError::Run(_) => 1,
        }
    }
}

/// Exit code used when a run records invariant violations.
pub const EXIT_INVARIANT: i32 = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub u: Option<f64>,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialViolation {
    pub trial: usize,
    pub seed: u64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub passed: usize,
    pub failed: usize,
    pub violations: Vec<TrialViolation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub schema: u32,
    pub input: String,
    pub n: usize,
    pub distortion: f64,
    pub trials: usize,
    pub seed: u64,
    pub schedule: String,
    /// Survivor counts, sorted ascending.
    pub sizes: Vec<usize>,
    pub mean: f64,
    pub std_err: f64,
    pub max: usize,
    /// `n^{1 - β(2/D)}`.
    pub bound: f64,
    pub jensen_lower_bound: f64,
    pub checks: Option<CheckSummary>,
    #[serde(skip)]
    pub per_trial: Vec<TrialRecord>,
    pub wall_clock_ms: f64,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON without the wall-clock field; identical configs give identical bytes.
    pub fn to_json_deterministic(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("wall_clock_ms");
        }
        serde_json::to_string_pretty(&v).expect("report serializes")
    }

    /// One row per trial, in trial order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,seed,u,size\n");
        for t in &self.per_trial {
            let u = t.u.map(|u| format!("{u}")).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{}", t.trial, t.seed, u, t.size);
        }
        out
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => self.to_json() + "\n",
            OutputFormat::Csv => self.to_csv(),
        }
    }

    pub fn has_violations(&self) -> bool {
        self.checks.as_ref().is_some_and(|c| c.failed > 0)
    }
}

/// Loads the input space and rescales it to diameter 2.
pub fn load_space(input: &InputSource) -> Result<FiniteMetricSpace, HarnessError> {
    let space = match input {
        InputSource::File(path) => read_matrix_file(path).map_err(HarnessError::Input)?,
        InputSource::Generator(spec) => generate(spec).map_err(|e| match e {
            Error::BadSpec(m) => HarnessError::Config(m),
            other => HarnessError::Input(other),
        })?,
    };
    if space.len() >= 2 {
        Ok(space.normalize().map_err(HarnessError::Input)?.0)
    } else {
        Ok(space)
    }
}

fn draw_schedule<R: Rng>(
    choice: &ScheduleChoice,
    beta: f64,
    fixed: Option<&RadiiSchedule>,
    rng: &mut R,
) -> crate::error::Result<RadiiSchedule> {
    match choice {
        ScheduleChoice::Optimal => optimal_schedule(beta, rng.random::<f64>()),
        ScheduleChoice::Mn07 => Ok(mn07_geometric_schedule(rng)),
        ScheduleChoice::File(_) => Ok(fixed.expect("file schedule loaded").clone()),
    }
}

/// One trial with its own generator seeded from `seed`.
pub fn run_trial(
    space: &FiniteMetricSpace,
    choice: &ScheduleChoice,
    fixed: Option<&RadiiSchedule>,
    distortion: f64,
    seed: u64,
) -> crate::error::Result<FragmentationResult> {
    let beta = beta_for_distortion(distortion)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let schedule = draw_schedule(choice, beta, fixed, &mut rng)?;
    Ok(fragment_iterated(space, &schedule, distortion, &mut rng)?.with_seed(seed))
}

pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    let started = Instant::now();
    if !(config.distortion > 2.0 && config.distortion.is_finite()) {
        return Err(HarnessError::Config(format!(
            "distortion must be finite and > 2, got {}",
            config.distortion
        )));
    }
    if config.trials == 0 {
        return Err(HarnessError::Config("trials must be at least 1".into()));
    }
    let space = load_space(&config.input)?;
    let fixed = match &config.schedule {
        ScheduleChoice::File(p) => Some(read_schedule_file(p).map_err(HarnessError::Input)?),
        _ => None,
    };
    let d = config.distortion;
    let beta = beta_for_distortion(d).map_err(HarnessError::Run)?;

    let outcomes = map_indexed(config.trials, config.execution, |t| {
        let seed = trial_seed(config.seed, t as u64);
        let result = run_trial(&space, &config.schedule, fixed.as_ref(), d, seed)?;
        let violations: Vec<String> = if config.checks {
            result.check_all(&space).iter().map(|v| v.to_string()).collect()
        } else {
            Vec::new()
        };
        let record = TrialRecord {
            trial: t,
            seed,
            u: result.provenance().u,
            size: result.survivors().len(),
        };
        Ok::<_, Error>((record, violations))
    });

    let mut per_trial = Vec::with_capacity(config.trials);
    let mut violations = Vec::new();
    let mut passed = 0;
    for outcome in outcomes {
        let (record, bad) = outcome.map_err(HarnessError::Run)?;
        if bad.is_empty() {
            passed += 1;
        } else {
            violations.extend(bad.into_iter().map(|detail| TrialViolation {
                trial: record.trial,
                seed: record.seed,
                detail,
            }));
        }
        per_trial.push(record);
    }
    let failed = config.trials - passed;

    let mut sizes: Vec<usize> = per_trial.iter().map(|t| t.size).collect();
    sizes.sort_unstable();
    let as_f64: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
    let (mean, std_err) = mean_and_se(&as_f64);
    let n = space.len();

    Ok(ExperimentReport {
        schema: REPORT_SCHEMA,
        input: config.input.to_string(),
        n,
        distortion: d,
        trials: config.trials,
        seed: config.seed,
        schedule: config.schedule.to_string(),
        max: sizes.last().copied().unwrap_or(0),
        sizes,
        mean,
        std_err,
        bound: (n as f64).powf(1.0 - beta),
        jensen_lower_bound: jensen_lower_bound(&space, d).map_err(HarnessError::Run)?,
        checks: config.checks.then_some(CheckSummary { passed, failed, violations }),
        per_trial,
        wall_clock_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}
