//! Random radii schedules `1 = r_0 >= r_1 >= ... > 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Upper bound on the truncation level before a schedule is declared
/// non-decaying.
pub const MAX_LEVELS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleKind {
    /// `r_n = (1-β)^{(u+n-1)/β}` for `n >= 1`, driven by a single uniform `u`.
    Optimal { beta: f64, u: f64 },
    /// Independent `r_n ~ Uniform[8^{-n}/4, 8^{-n}/2]`, derived from `seed`.
    Mn07 { seed: u64 },
    /// Explicit radii; indices past the end repeat the last value.
    Custom(Vec<f64>),
}

/// A realized radii sequence. Values are pure functions of the kind and its
/// parameters, so schedules are freely shareable across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiiSchedule {
    kind: ScheduleKind,
}

pub fn optimal_schedule(beta: f64, u: f64) -> Result<RadiiSchedule> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Domain(format!("beta must lie in (0, 1), got {beta}")));
    }
    if !(0.0..1.0).contains(&u) {
        return Err(Error::Domain(format!("u must lie in [0, 1), got {u}")));
    }
    Ok(RadiiSchedule { kind: ScheduleKind::Optimal { beta, u } })
}

/// Baseline schedule with independent geometric-band radii; the seed is
/// drawn from `rng`.
pub fn mn07_geometric_schedule<R: Rng + ?Sized>(rng: &mut R) -> RadiiSchedule {
    RadiiSchedule { kind: ScheduleKind::Mn07 { seed: rng.random() } }
}

pub fn custom_schedule(radii: Vec<f64>) -> Result<RadiiSchedule> {
    if radii.first() != Some(&1.0) {
        return Err(Error::InvalidSchedule("first radius must be exactly 1".into()));
    }
    for (i, &r) in radii.iter().enumerate() {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidSchedule(format!("radius {i} is not positive")));
        }
        if i > 0 && r > radii[i - 1] {
            return Err(Error::InvalidSchedule(format!("radius {i} increases")));
        }
    }
    Ok(RadiiSchedule { kind: ScheduleKind::Custom(radii) })
}

impl RadiiSchedule {
    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    /// The uniform driving an optimal schedule.
    pub fn u(&self) -> Option<f64> {
        match self.kind {
            ScheduleKind::Optimal { u, .. } => Some(u),
            _ => None,
        }
    }

    pub fn radius(&self, n: usize) -> f64 {
        if n == 0 {
            return 1.0;
        }
        match &self.kind {
            ScheduleKind::Optimal { beta, u } => {
                (((u + n as f64 - 1.0) / beta) * (-beta).ln_1p()).exp()
            }
            ScheduleKind::Mn07 { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(n as u64);
                let scale = 8f64.powi(-(n as i32));
                rng.random_range(scale / 4.0..=scale / 2.0)
            }
            ScheduleKind::Custom(radii) => radii[n.min(radii.len() - 1)],
        }
    }

    /// `r_0, ..., r_last`.
    pub fn prefix(&self, last: usize) -> Vec<f64> {
        (0..=last).map(|n| self.radius(n)).collect()
    }

    /// Outer radius `r_n + 2 r_{n-1} / D` at level `n >= 1`.
    pub fn outer_radius(&self, n: usize, distortion: f64) -> f64 {
        self.radius(n) + 2.0 * self.radius(n - 1) / distortion
    }

    /// Number of levels `n >= 1` with `r_n < r <= r_n + 2 r_{n-1}/D`. Custom
    /// schedules are scanned over their explicit radii only.
    pub fn window_hits(&self, r: f64, distortion: f64) -> usize {
        let mut hits = 0;
        let mut prev = self.radius(0);
        for n in 1..=MAX_LEVELS {
            let cur = self.radius(n);
            let outer = cur + 2.0 * prev / distortion;
            if outer < r {
                // outer radii are non-increasing, nothing further can hit
                break;
            }
            if cur < r {
                hits += 1;
            }
            if matches!(self.kind, ScheduleKind::Custom(ref v) if n + 1 >= v.len()) {
                break;
            }
            prev = cur;
        }
        hits
    }
}

/// Smallest `N >= 1` with `2 r_N < d_min` and `r_N + 2 r_{N-1}/D < d_min`.
/// From level `N` on every ball used by the fragmentation is a singleton.
pub fn stopping_index(schedule: &RadiiSchedule, d_min: f64, distortion: f64) -> Result<usize> {
    if !(d_min > 0.0) {
        return Err(Error::Domain(format!("d_min must be positive, got {d_min}")));
    }
    if !(distortion > 2.0) {
        return Err(Error::Domain(format!("distortion must be > 2, got {distortion}")));
    }
    let mut prev = schedule.radius(0);
    for n in 1..=MAX_LEVELS {
        let cur = schedule.radius(n);
        if 2.0 * cur < d_min && cur + 2.0 * prev / distortion < d_min {
            return Ok(n);
        }
        prev = cur;
    }
    Err(Error::NonTerminating { limit: MAX_LEVELS })
}
