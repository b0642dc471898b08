//! The acceptance suite: nine self-contained checks, each with a runtime
//! budget. Every check uses a fixed seed so outcomes are reproducible.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exec::{map_indexed, trial_seed, Execution};
use crate::exponents::{
    beta_for_distortion, beta_p_critical_point, beta_p_minimum, interval_sum, solve_beta,
    solve_theta, sup_interval_sum,
};
use crate::fragmentation::{fragment_iterated, fragment_once};
use crate::generators::{generate, Family, GeneratorSpec};
use crate::harness::{self, ExperimentConfig, InputSource};
use crate::metric::FiniteMetricSpace;
use crate::oracle::{embeddable, max_subset};
use crate::radii::{mn07_geometric_schedule, optimal_schedule, RadiiSchedule};

const SUITE_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub limit: Option<Duration>,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let limit = self.limit.map(|l| format!(" / {} s", l.as_secs())).unwrap_or_default();
        write!(
            f,
            "[{}] criterion {} {}: {:.2} s{} | {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            limit,
            self.detail
        )
    }
}

pub const CRITERIA: [(u8, &str); 9] = [
    (1, "survival_law"),
    (2, "structural_invariants"),
    (3, "expectation_chain"),
    (4, "guaranteed_size"),
    (5, "admissible_supremum"),
    (6, "exponent_identities"),
    (7, "beta_p_limit"),
    (8, "oracle_agreement"),
    (9, "determinism"),
];

type Check = fn(Execution) -> (bool, String);

/// Runs one criterion by id (1..=9).
pub fn run_criterion(id: u8, mode: Execution) -> Option<CriterionOutcome> {
    let (f, limit): (Check, Option<u64>) = match id {
        1 => (survival_law, Some(5)),
        2 => (structural_invariants, Some(60)),
        3 => (expectation_chain, Some(120)),
        4 => (guaranteed_size, None),
        5 => (admissible_supremum, Some(60)),
        6 => (exponent_identities, Some(1)),
        7 => (beta_p_limit, Some(5)),
        8 => (oracle_agreement, Some(120)),
        9 => (determinism, Some(10)),
        _ => return None,
    };
    let name = CRITERIA[id as usize - 1].1;
    let started = Instant::now();
    let (ok, mut detail) = f(mode);
    let elapsed = started.elapsed();
    let limit = limit.map(Duration::from_secs);
    let in_time = limit.is_none_or(|l| elapsed <= l);
    if !in_time {
        detail.push_str("; over the time budget");
    }
    Some(CriterionOutcome { id, name, passed: ok && in_time, detail, elapsed, limit })
}

pub fn run_all(mode: Execution) -> Vec<CriterionOutcome> {
    CRITERIA.iter().filter_map(|&(id, _)| run_criterion(id, mode)).collect()
}

/// Binomial standard error, floored by the predicted variance so an empty
/// sample does not collapse the tolerance.
fn binomial_se(observed: f64, predicted: f64, samples: f64) -> f64 {
    let var = (observed * (1.0 - observed)).max(predicted * (1.0 - predicted));
    (var / samples).sqrt()
}

fn uniform_space(n: usize, d: f64) -> FiniteMetricSpace {
    let rows: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { d }).collect()).collect();
    FiniteMetricSpace::new(&rows).expect("uniform metric")
}

fn survival_law(mode: Execution) -> (bool, String) {
    const N: usize = 8;
    const RUNS: usize = 100_000;
    const CHUNK: usize = 1_000;
    let space = uniform_space(N, 2.0);
    let active: Vec<usize> = (0..N).collect();
    let partial = map_indexed(RUNS / CHUNK, mode, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(SUITE_SEED, c as u64));
        let mut counts = [0u64; N];
        for _ in 0..CHUNK {
            for x in fragment_once(&space, &active, 1.0, 2.0, &mut rng)?.into_keys() {
                counts[x] += 1;
            }
        }
        Ok::<_, crate::Error>(counts)
    });
    let mut counts = [0u64; N];
    for p in partial {
        match p {
            Ok(c) => counts.iter_mut().zip(c).for_each(|(a, b)| *a += b),
            Err(e) => return (false, e.to_string()),
        }
    }
    let p = 1.0 / N as f64;
    let mut worst = 0.0f64;
    let mut ok = true;
    for &c in &counts {
        let freq = c as f64 / RUNS as f64;
        let se = binomial_se(freq, p, RUNS as f64);
        worst = worst.max((freq - p).abs() / se);
        ok &= (freq - p).abs() <= 3.0 * se;
    }
    let freqs: Vec<String> = counts.iter().map(|&c| format!("{:.4}", c as f64 / RUNS as f64)).collect();
    (ok, format!("frequencies [{}] vs 0.125, worst deviation {worst:.2} SE", freqs.join(", ")))
}

fn family_spec(index: usize, max_n: usize, rng: &mut ChaCha8Rng) -> GeneratorSpec {
    let seed = rng.random();
    let n = rng.random_range(2..=max_n);
    let family = match index % 6 {
        0 => Family::Uniform,
        1 => Family::Path,
        2 => Family::Cycle,
        3 => Family::Euclidean { dim: rng.random_range(1..=3) },
        4 => Family::GnpShortestPath { p: 0.5 },
        _ => {
            let max_depth = (usize::BITS - (max_n + 1).leading_zeros() - 2).max(1);
            let depth = rng.random_range(1..=max_depth);
            return GeneratorSpec::binary_tree(depth, seed).expect("valid depth");
        }
    };
    GeneratorSpec::new(family, n, seed).expect("valid spec")
}

fn structural_invariants(mode: Execution) -> (bool, String) {
    const RUNS: usize = 1000;
    const DISTORTIONS: [f64; 3] = [2.5, 4.0, 8.0];
    let outcomes = map_indexed(RUNS, mode, |i| {
        let seed = trial_seed(SUITE_SEED + 2, i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = family_spec(i, 64, &mut rng);
        let d = DISTORTIONS[(i / 6) % 3];
        let mut run = || -> crate::Result<Vec<String>> {
            let space = generate(&spec)?;
            let schedule = if (i / 18) % 2 == 0 {
                optimal_schedule(beta_for_distortion(d)?, rng.random())?
            } else {
                mn07_geometric_schedule(&mut rng)
            };
            let result = fragment_iterated(&space, &schedule, d, &mut rng)?;
            Ok(result.check_all(&space).iter().map(|v| format!("{spec} D={d}: {v}")).collect())
        };
        run().unwrap_or_else(|e| vec![format!("{spec} D={d}: {e}")])
    });
    let failures: Vec<String> = outcomes.into_iter().flatten().collect();
    match failures.first() {
        None => (true, format!("{RUNS} runs, 0 violations")),
        Some(first) => (false, format!("{} violations, first: {first}", failures.len())),
    }
}

const CHAIN_SPEC: &str = "euclidean:dim=3,n=128,seed=7";
const CHAIN_D: f64 = 6.0;
const CHAIN_TRIALS: usize = 2000;

fn chain_report(mode: Execution) -> Result<harness::ExperimentReport, String> {
    let spec: GeneratorSpec = CHAIN_SPEC.parse().map_err(|e: crate::Error| e.to_string())?;
    let mut config = ExperimentConfig::new(InputSource::Generator(spec), CHAIN_D);
    config.trials = CHAIN_TRIALS;
    config.seed = SUITE_SEED + 3;
    config.execution = mode;
    harness::run(&config).map_err(|e| e.to_string())
}

fn expectation_chain(mode: Execution) -> (bool, String) {
    let report = match chain_report(mode) {
        Ok(r) => r,
        Err(e) => return (false, e),
    };
    let beta = match solve_beta(2.0 / CHAIN_D) {
        Ok(b) => b.value,
        Err(e) => return (false, e.to_string()),
    };
    let bound = 128f64.powf(1.0 - beta);
    let mean_ok = report.mean >= report.jensen_lower_bound - 3.0 * report.std_err;
    let jensen_ok = report.jensen_lower_bound >= bound - 1e-9;
    let bound_ok = (report.bound - bound).abs() <= 1e-12 * bound;
    (
        mean_ok && jensen_ok && bound_ok,
        format!(
            "mean {:.4} (SE {:.4}) >= jensen {:.4} - 3SE: {mean_ok}; jensen >= bound {bound:.4}: {jensen_ok}",
            report.mean, report.std_err, report.jensen_lower_bound
        ),
    )
}

fn guaranteed_size(mode: Execution) -> (bool, String) {
    let report = match chain_report(mode) {
        Ok(r) => r,
        Err(e) => return (false, e),
    };
    let need = report.bound.ceil() as usize;
    (report.max >= need, format!("max survivors {} over {CHAIN_TRIALS} trials, need {need}", report.max))
}

/// Window hits of a precomputed radii prefix `r_0, r_1, ...` at probe `r`.
fn prefix_hits(radii: &[f64], r: f64, distortion: f64) -> u32 {
    let mut hits = 0;
    for n in 1..radii.len() {
        let outer = radii[n] + 2.0 * radii[n - 1] / distortion;
        if outer < r {
            break;
        }
        if radii[n] < r {
            hits += 1;
        }
    }
    hits
}

fn admissible_supremum(mode: Execution) -> (bool, String) {
    const DRAWS: usize = 100_000;
    const PROBES: usize = 1000;
    const CHUNK: usize = 1000;
    const A_MIN: f64 = -0.5;
    const A_MAX: f64 = 3.0;
    let mut ok = true;
    let mut details = Vec::new();
    for (k, &d) in [2.1, 3.0, 6.0, 20.0].iter().enumerate() {
        let beta = match beta_for_distortion(d) {
            Ok(b) => b,
            Err(e) => return (false, e.to_string()),
        };
        let sup = match sup_interval_sum(beta, d, 10_000) {
            Ok(s) => s,
            Err(e) => return (false, e.to_string()),
        };
        let sup_ok = (sup - beta).abs() <= 1e-9;

        // probes log-uniform in r, from offset A_MAX up to the largest reachable radius
        let ln_q = (-beta).ln_1p();
        let r_lo = (A_MAX * ln_q / beta).exp();
        let r_hi = (A_MIN * ln_q / beta).exp().min(1.0 + 2.0 / d);
        let probes: Vec<f64> = (0..PROBES)
            .map(|j| (r_lo.ln() + (r_hi / r_lo).ln() * (j as f64 + 0.5) / PROBES as f64).exp())
            .collect();
        let levels = (A_MAX + 3.0).ceil() as usize;

        let partial = map_indexed(DRAWS / CHUNK, mode, |c| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(SUITE_SEED + 5 + k as u64, c as u64));
            let mut counts = vec![0u32; PROBES];
            for _ in 0..CHUNK {
                let schedule: RadiiSchedule =
                    optimal_schedule(beta, rng.random()).expect("valid optimal schedule");
                let radii = schedule.prefix(levels);
                for (count, &r) in counts.iter_mut().zip(&probes) {
                    *count += prefix_hits(&radii, r, d);
                }
            }
            counts
        });
        let mut counts = vec![0u64; PROBES];
        for p in partial {
            counts.iter_mut().zip(p).for_each(|(a, b)| *a += b as u64);
        }

        let mut misses = 0;
        let mut above = 0;
        let mut worst = 0.0f64;
        for (&r, &c) in probes.iter().zip(&counts) {
            let predicted = interval_sum(beta, d, r).map(|s| s.total).unwrap_or(f64::NAN);
            let freq = c as f64 / DRAWS as f64;
            let se = binomial_se(freq, predicted, DRAWS as f64);
            let dev = (freq - predicted).abs() / se;
            worst = worst.max(dev);
            if !(dev <= 3.0) {
                misses += 1;
            }
            if freq > beta + 3.0 * se {
                above += 1;
            }
        }
        ok &= sup_ok && misses == 0 && above == 0;
        details.push(format!(
            "D={d}: |sup-beta|={:.1e}, {misses} probes beyond 3SE (worst {worst:.2}), {above} above beta+3SE",
            (sup - beta).abs()
        ));
    }
    (ok, details.join("; "))
}

fn exponent_identities(_: Execution) -> (bool, String) {
    let mut ok = true;
    let mut worst_sum = 0.0f64;
    for d in [2.01, 2.1, 3.0, 6.0, 10.0, 100.0] {
        match (solve_theta(d), solve_beta(2.0 / d)) {
            (Ok(t), Ok(b)) => {
                let err = (t.value + b.value - 1.0).abs();
                worst_sum = worst_sum.max(err);
                ok &= err <= 1e-11;
                ok &= t.value >= 1.0 - 2.0 * std::f64::consts::E / d;
            }
            _ => return (false, format!("solver failed at D = {d}")),
        }
    }
    let eps = 1e-6;
    let ratio = match solve_theta(2.0 + eps) {
        Ok(t) => t.value * 2.0 * (1.0 / eps).ln() / eps,
        Err(e) => return (false, e.to_string()),
    };
    ok &= (0.8..=1.25).contains(&ratio);
    (ok, format!("max |theta+beta-1| {worst_sum:.1e}; theta(2+eps) asymptotic ratio {ratio:.4}"))
}

fn beta_p_limit(_: Execution) -> (bool, String) {
    let mut ok = true;
    let mut details = Vec::new();
    for alpha in [0.1, 1.0 / 3.0, 0.8] {
        let beta = match solve_beta(alpha) {
            Ok(b) => b.value,
            Err(e) => return (false, e.to_string()),
        };
        let mut errs = Vec::new();
        for p in [0.1, 0.01, 0.001] {
            let m = match beta_p_minimum(alpha, p) {
                Ok(m) => m,
                Err(e) => return (false, e.to_string()),
            };
            let x0 = beta_p_critical_point(alpha, p, m.value);
            ok &= ((x0 - m.minimizer) / m.minimizer).abs() <= 1e-6;
            errs.push((m.value - beta).abs());
        }
        ok &= errs.windows(2).all(|w| w[1] < w[0]) && errs[2] <= 0.05;
        details.push(format!(
            "alpha={alpha:.4}: errors {}",
            errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(" > ")
        ));
    }
    (ok, details.join("; "))
}

fn oracle_agreement(mode: Execution) -> (bool, String) {
    const SPACES: usize = 200;
    let outcomes = map_indexed(SPACES, mode, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(SUITE_SEED + 8, i as u64));
        let spec = family_spec(i, 8, &mut rng);
        let d = [2.5, 4.0][(i / 6) % 2];
        let mut run = || -> crate::Result<Option<String>> {
            let space = generate(&spec)?;
            let schedule = optimal_schedule(beta_for_distortion(d)?, rng.random())?;
            let result = fragment_iterated(&space, &schedule, d, &mut rng)?;
            let survivors = result.survivors();
            let best = max_subset(&space, d, space.len())?;
            if !embeddable(&space, survivors, d)? {
                return Ok(Some(format!("{spec} D={d}: survivors {survivors:?} not embeddable")));
            }
            if survivors.len() > best.size {
                return Ok(Some(format!(
                    "{spec} D={d}: {} survivors exceed max_subset {}",
                    survivors.len(),
                    best.size
                )));
            }
            if spec.family == Family::Uniform && best.size != space.len() {
                return Ok(Some(format!("{spec}: uniform max_subset {} != n", best.size)));
            }
            Ok(None)
        };
        run().unwrap_or_else(|e| Some(format!("{spec} D={d}: {e}")))
    });
    let failures: Vec<String> = outcomes.into_iter().flatten().collect();
    match failures.first() {
        None => (true, format!("{SPACES} spaces agree")),
        Some(first) => (false, format!("{} disagreements, first: {first}", failures.len())),
    }
}

fn determinism(mode: Execution) -> (bool, String) {
    let spec: GeneratorSpec = "euclidean:dim=2,n=64,seed=5".parse().expect("valid spec");
    let mut config = ExperimentConfig::new(InputSource::Generator(spec), 4.0);
    config.trials = 200;
    config.seed = SUITE_SEED + 9;
    config.checks = true;
    config.execution = mode;
    match (harness::run(&config), harness::run(&config)) {
        (Ok(a), Ok(b)) => {
            let (ja, jb) = (a.to_json_deterministic(), b.to_json_deterministic());
            (ja == jb, format!("{} bytes, identical: {}", ja.len(), ja == jb))
        }
        (Err(e), _) | (_, Err(e)) => (false, e.to_string()),
    }
}
