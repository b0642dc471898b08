//! Randomized iterative fragmentation.
//!
//! A single fragmentation step at scales `r < R` draws i.i.d. uniform sample
//! points from the whole space. Each active point waits for the first sample
//! landing in its `R`-ball and survives iff that sample also lies in its
//! `r`-ball, joining the cluster labeled by the sample's index. A point `x`
//! therefore survives with probability exactly `|B(x,r)| / |B(x,R)|`;
//! survivors in one cluster lie in a common `r`-ball and distinct clusters
//! are more than `R - r` apart.
//!
//! Iterating over levels `n = 1..N` with `(r, R) = (r_n, r_n + 2 r_{n-1}/D)`
//! yields nested survivor sets whose cluster paths define an ultrametric
//! `ρ(x,y) = 2 r_{n(x,y)}` with `d <= ρ <= D d` on the survivors. Levels past
//! the stopping index would act as the identity (all balls are singletons),
//! so the infinite iteration is truncated there without changing anything.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{beta_for_distortion, interval_sum_unchecked};
use crate::metric::FiniteMetricSpace;
use crate::radii::{stopping_index, RadiiSchedule};
use crate::tree::UltrametricTree;

/// Hard cap on samples drawn in one fragmentation step.
pub const SAMPLE_CAP: u64 = 10_000_000;

/// Relative slack (times the diameter) for float checks of cluster geometry.
pub const GEOMETRY_SLACK: f64 = 1e-12;

/// Cluster label: the 1-based index of the sample that captured the point.
pub type ClusterId = u64;

/// One fragmentation step over `active`, sampling from all of `space`.
/// Returns the surviving points with their cluster ids.
pub fn fragment_once<R: Rng + ?Sized>(
    space: &FiniteMetricSpace,
    active: &[usize],
    r: f64,
    big_r: f64,
    rng: &mut R,
) -> Result<BTreeMap<usize, ClusterId>> {
    if !(r > 0.0 && r < big_r) {
        return Err(Error::Domain(format!("need 0 < r < R, got r = {r}, R = {big_r}")));
    }
    for &x in active {
        space.check_index(x)?;
    }
    let n = space.len();
    let mut pending: Vec<usize> = active.to_vec();
    let mut out = BTreeMap::new();
    let mut sample_index: u64 = 0;
    while !pending.is_empty() {
        if sample_index >= SAMPLE_CAP {
            return Err(Error::SampleCap { cap: SAMPLE_CAP });
        }
        sample_index += 1;
        let s = rng.random_range(0..n);
        let row = space.row(s);
        pending.retain(|&x| {
            let d = row[x];
            if d > big_r {
                return true;
            }
            if d <= r {
                out.insert(x, sample_index);
            }
            false
        });
    }
    Ok(out)
}

/// Provenance of one run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub u: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FragmentationResult {
    n: usize,
    distortion: f64,
    schedule: RadiiSchedule,
    stop: usize,
    /// `levels[l][x]`: cluster of `x` at level `l + 1`, `None` once discarded.
    levels: Vec<Vec<Option<ClusterId>>>,
    survivors: Vec<usize>,
    provenance: Provenance,
}

/// Runs the fragmentation for levels `1..=N`, `N` from [`stopping_index`].
///
/// Each level draws a fresh sample stream from `rng`. The survivor set may
/// be small on any one run; only its expectation is bounded below.
pub fn fragment_iterated<R: Rng + ?Sized>(
    space: &FiniteMetricSpace,
    schedule: &RadiiSchedule,
    distortion: f64,
    rng: &mut R,
) -> Result<FragmentationResult> {
    check_preconditions(space, distortion)?;
    let n = space.len();
    let stop = stopping_index(schedule, space.d_min(), distortion)?;

    let mut active: Vec<usize> = (0..n).collect();
    let mut levels = Vec::with_capacity(stop);
    for level in 1..=stop {
        let r = schedule.radius(level);
        let big_r = schedule.outer_radius(level, distortion);
        let assigned = fragment_once(space, &active, r, big_r, rng)?;
        let mut row = vec![None; n];
        for (&x, &c) in &assigned {
            row[x] = Some(c);
        }
        levels.push(row);
        active = assigned.into_keys().collect();
    }

    Ok(FragmentationResult {
        n,
        distortion,
        schedule: schedule.clone(),
        stop,
        levels,
        survivors: active,
        provenance: Provenance { seed: None, u: schedule.u() },
    })
}

fn check_preconditions(space: &FiniteMetricSpace, distortion: f64) -> Result<()> {
    if !(distortion > 2.0 && distortion.is_finite()) {
        return Err(Error::Domain(format!("distortion must be finite and > 2, got {distortion}")));
    }
    if space.diameter() > 2.0 * (1.0 + 1e-12) {
        return Err(Error::NotNormalized { diameter: space.diameter() });
    }
    Ok(())
}

/// A failed structural check on a [`FragmentationResult`].
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantViolation {
    pub level: usize,
    pub detail: String,
}

impl std::fmt::Display for InvariantViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "level {}: {}", self.level, self.detail)
    }
}

impl FragmentationResult {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn distortion(&self) -> f64 {
        self.distortion
    }

    pub fn schedule(&self) -> &RadiiSchedule {
        &self.schedule
    }

    /// Truncation level `N`.
    pub fn stop(&self) -> usize {
        self.stop
    }

    /// `r_0, ..., r_N`.
    pub fn scales(&self) -> Vec<f64> {
        self.schedule.prefix(self.stop)
    }

    pub fn levels(&self) -> &[Vec<Option<ClusterId>>] {
        &self.levels
    }

    pub fn survivors(&self) -> &[usize] {
        &self.survivors
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.provenance.seed = Some(seed);
        self
    }

    /// Clusters at `level >= 1`, keyed by id, members in increasing order.
    pub fn clusters(&self, level: usize) -> BTreeMap<ClusterId, Vec<usize>> {
        let mut out: BTreeMap<ClusterId, Vec<usize>> = BTreeMap::new();
        for (x, c) in self.levels[level - 1].iter().enumerate() {
            if let Some(c) = c {
                out.entry(*c).or_default().push(x);
            }
        }
        out
    }

    /// Checks nesting, cluster diameters, cluster separation and
    /// singleton clusters at the last level.
    pub fn check_invariants(&self, space: &FiniteMetricSpace) -> Vec<InvariantViolation> {
        let mut bad = Vec::new();
        if space.len() != self.n {
            bad.push(InvariantViolation { level: 0, detail: "space size mismatch".into() });
            return bad;
        }
        let slack = GEOMETRY_SLACK * space.diameter().max(f64::MIN_POSITIVE);
        for level in 1..=self.stop {
            let row = &self.levels[level - 1];
            if level > 1 {
                let prev = &self.levels[level - 2];
                for x in 0..self.n {
                    if row[x].is_some() && prev[x].is_none() {
                        bad.push(InvariantViolation {
                            level,
                            detail: format!("point {x} reappears after being discarded"),
                        });
                    }
                }
            }
            let r = self.schedule.radius(level);
            let sep = 2.0 * self.schedule.radius(level - 1) / self.distortion;
            for x in 0..self.n {
                let Some(cx) = row[x] else { continue };
                for y in (x + 1)..self.n {
                    let Some(cy) = row[y] else { continue };
                    let d = space.d(x, y);
                    if cx == cy {
                        if d > 2.0 * r + slack {
                            bad.push(InvariantViolation {
                                level,
                                detail: format!(
                                    "cluster {cx} has diameter pair ({x},{y}) at {d} > 2 r = {}",
                                    2.0 * r
                                ),
                            });
                        }
                        if level == self.stop {
                            bad.push(InvariantViolation {
                                level,
                                detail: format!("cluster {cx} is not a singleton"),
                            });
                        }
                    } else if d <= sep - slack {
                        bad.push(InvariantViolation {
                            level,
                            detail: format!(
                                "clusters {cx} and {cy} at distance {d} <= 2 r_prev / D = {sep}"
                            ),
                        });
                    }
                }
            }
        }
        let last: Vec<usize> = match self.levels.last() {
            Some(row) => (0..self.n).filter(|&x| row[x].is_some()).collect(),
            None => (0..self.n).collect(),
        };
        if last != self.survivors {
            bad.push(InvariantViolation {
                level: self.stop,
                detail: "survivor list disagrees with last level".into(),
            });
        }
        bad
    }

    /// Checks the extracted ultrametric: exact strong triangle inequality and
    /// `d <= ρ <= D d` for every survivor pair, up to relative `1e-12`.
    pub fn check_ultrametric(&self, space: &FiniteMetricSpace) -> Vec<InvariantViolation> {
        let tol = 1.0 + GEOMETRY_SLACK;
        let tree = match ultrametric_of(self) {
            Ok(t) => t,
            Err(e) => return vec![InvariantViolation { level: self.stop, detail: e.to_string() }],
        };
        let mut bad = Vec::new();
        if !tree.strong_triangle_holds() {
            bad.push(InvariantViolation {
                level: self.stop,
                detail: "ultrametric fails the strong triangle inequality".into(),
            });
        }
        let pts = tree.points();
        for a in 0..pts.len() {
            for b in (a + 1)..pts.len() {
                let d = space.d(pts[a], pts[b]);
                let rho = tree.value(a, b);
                if d > rho * tol || rho > self.distortion * d * tol {
                    bad.push(InvariantViolation {
                        level: tree.level(a, b) as usize,
                        detail: format!(
                            "pair ({},{}) has d = {d}, rho = {rho}, outside [d, D d]",
                            pts[a], pts[b]
                        ),
                    });
                }
            }
        }
        match crate::metric::distortion(space, &tree) {
            Ok(dist) if dist <= self.distortion * tol => {}
            Ok(dist) => bad.push(InvariantViolation {
                level: self.stop,
                detail: format!("distortion {dist} exceeds D = {}", self.distortion),
            }),
            Err(e) => bad.push(InvariantViolation { level: self.stop, detail: e.to_string() }),
        }
        bad
    }

    /// [`check_invariants`](Self::check_invariants) followed by
    /// [`check_ultrametric`](Self::check_ultrametric).
    pub fn check_all(&self, space: &FiniteMetricSpace) -> Vec<InvariantViolation> {
        let mut bad = self.check_invariants(space);
        if bad.is_empty() {
            bad.extend(self.check_ultrametric(space));
        }
        bad
    }

    /// Serializable record of the run.
    pub fn record(&self) -> Result<FragmentationRecord> {
        let tree = ultrametric_of(self)?;
        let mut pairs = Vec::new();
        for a in 0..tree.len() {
            for b in (a + 1)..tree.len() {
                pairs.push(UltrametricPair {
                    x: tree.points()[a],
                    y: tree.points()[b],
                    level: tree.level(a, b),
                    value: tree.value(a, b),
                });
            }
        }
        Ok(FragmentationRecord {
            n: self.n,
            distortion: self.distortion,
            u: self.provenance.u,
            seed: self.provenance.seed,
            scales: self.scales(),
            levels: self.levels.clone(),
            survivors: self.survivors.clone(),
            ultrametric_pairs: pairs,
        })
    }
}

/// JSON shape of a single run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FragmentationRecord {
    pub n: usize,
    #[serde(rename = "D")]
    pub distortion: f64,
    pub u: Option<f64>,
    pub seed: Option<u64>,
    pub scales: Vec<f64>,
    pub levels: Vec<Vec<Option<ClusterId>>>,
    pub survivors: Vec<usize>,
    pub ultrametric_pairs: Vec<UltrametricPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UltrametricPair {
    pub x: usize,
    pub y: usize,
    pub level: u32,
    pub value: f64,
}

/// Ultrametric on the survivors: the separation level of two points is the
/// length of the common prefix of their per-level cluster ids, and the value
/// is `2 r_level`.
pub fn ultrametric_of(result: &FragmentationResult) -> Result<UltrametricTree> {
    let paths: Vec<Vec<ClusterId>> = result
        .survivors
        .iter()
        .map(|&x| result.levels.iter().map(|row| row[x].expect("survivor present at every level")).collect())
        .collect();
    UltrametricTree::from_paths(result.survivors.clone(), &paths, result.scales())
}

/// `Σ_x Π_{n=1}^{N} |B(x, r_n)| / |B(x, r_n + 2 r_{n-1}/D)|` for a realized
/// schedule; this is exactly the expected survivor count over the sampling.
pub fn expected_mass_bound(
    space: &FiniteMetricSpace,
    schedule: &RadiiSchedule,
    distortion: f64,
) -> Result<f64> {
    check_preconditions(space, distortion)?;
    let stop = stopping_index(schedule, space.d_min(), distortion)?;
    let radii: Vec<(f64, f64)> =
        (1..=stop).map(|n| (schedule.radius(n), schedule.outer_radius(n, distortion))).collect();
    let total = (0..space.len())
        .map(|x| {
            let log_sum: f64 = radii
                .iter()
                .map(|&(r, big_r)| {
                    let inner = space.ball_size(x, r) as f64;
                    let outer = space.ball_size(x, big_r) as f64;
                    (inner / outer).ln()
                })
                .sum();
            log_sum.exp()
        })
        .sum();
    Ok(total)
}

/// Lower bound on the expected survivor count under the optimal schedule,
/// obtained by moving the expectation over `U` inside the exponential:
/// `Σ_x exp(-Σ_{j>=2} S(t_j) ln(|B(x,t_j)| / |B(x,t_{j-1})|))`, where `t_j`
/// are the jump radii of `x` and `S(t)` is the exact window probability.
pub fn jensen_lower_bound(space: &FiniteMetricSpace, distortion: f64) -> Result<f64> {
    check_preconditions(space, distortion)?;
    let beta = beta_for_distortion(distortion)?;
    let alpha = 2.0 / distortion;
    let mut memo: BTreeMap<u64, f64> = BTreeMap::new();
    let mut window = |t: f64| *memo.entry(t.to_bits()).or_insert_with(|| interval_sum_unchecked(beta, alpha, t).total);
    let mut total = 0.0;
    for x in 0..space.len() {
        let jumps = space.jump_radii(x);
        let exponent: f64 = jumps
            .windows(2)
            .map(|w| window(w[1].0) * (w[1].1 as f64 / w[0].1 as f64).ln())
            .sum();
        total += (-exponent).exp();
    }
    Ok(total)
}
