//! Guaranteed exponents and admissible-exponent interval sums.
//!
//! The profile `f(β) = β (1-β)^{(1-β)/β}` (with `f(0) = 0`, `f(1) = 1`) is
//! strictly increasing on `[0, 1]`. The optimal admissible exponent for a
//! target distortion `D` is `β(2/D)`, the root of `f(β) = 2/D`, and the
//! subset exponent is `θ(D) = 1 - β(2/D)`. Both roots are found by
//! bisection, which needs nothing beyond monotonicity.

use crate::error::{Error, Result};

/// Lower end of every bisection bracket.
pub const BRACKET_LO: f64 = 1e-15;
/// Upper end of every bisection bracket.
pub const BRACKET_HI: f64 = 1.0 - 1e-15;

/// Tolerance used when checking that a caller-supplied β matches `D`.
pub const PARAMETER_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentSolution {
    pub value: f64,
    pub residual: f64,
    pub bracket: (f64, f64),
}

/// `ln f(β)`, evaluated in log space so that `β → 1` degrades to the limit 0.
pub fn ln_profile(beta: f64) -> f64 {
    if beta >= 1.0 {
        0.0
    } else if beta <= 0.0 {
        f64::NEG_INFINITY
    } else {
        beta.ln() + ((1.0 - beta) / beta) * (-beta).ln_1p()
    }
}

/// `f(β) = β (1-β)^{(1-β)/β}`.
pub fn profile(beta: f64) -> f64 {
    ln_profile(beta).exp()
}

/// `(1-θ) θ^{θ/(1-θ)}`, strictly decreasing on `(0, 1)`.
pub fn theta_profile(theta: f64) -> f64 {
    if theta <= 0.0 {
        1.0
    } else if theta >= 1.0 {
        0.0
    } else {
        ((-theta).ln_1p() + (theta / (1.0 - theta)) * theta.ln()).exp()
    }
}

/// Bisection for an increasing `g` on `[lo, hi]`; runs until the bracket
/// cannot be split in floating point.
fn bisect_increasing(g: impl Fn(f64) -> f64, target: f64, lo: f64, hi: f64) -> ExponentSolution {
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..2000 {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (rl, rh) = (g(lo) - target, g(hi) - target);
    let value = if rl.abs() <= rh.abs() { lo } else { hi };
    ExponentSolution { value, residual: g(value) - target, bracket: (lo, hi) }
}

/// Solves `2/D = (1-θ) θ^{θ/(1-θ)}` for `θ ∈ (0, 1)`.
///
/// The residual is reported as `2/D - (1-θ) θ^{θ/(1-θ)}`.
pub fn solve_theta(distortion: f64) -> Result<ExponentSolution> {
    if !(distortion > 2.0 && distortion.is_finite()) {
        return Err(Error::Domain(format!("distortion must be finite and > 2, got {distortion}")));
    }
    let target = 2.0 / distortion;
    let mut sol = bisect_increasing(|t| -theta_profile(t), -target, BRACKET_LO, BRACKET_HI);
    sol.residual = target - theta_profile(sol.value);
    Ok(sol)
}

/// Solves `f(β) = α` for `α ∈ (0, 1]`; `α = 1` gives `β = 1` exactly.
pub fn solve_beta(alpha: f64) -> Result<ExponentSolution> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if alpha == 1.0 {
        return Ok(ExponentSolution { value: 1.0, residual: 0.0, bracket: (1.0, 1.0) });
    }
    Ok(bisect_increasing(profile, alpha, BRACKET_LO, BRACKET_HI))
}

/// Optimal admissible exponent `β(2/D)` for a target distortion.
pub fn beta_for_distortion(distortion: f64) -> Result<f64> {
    if !(distortion > 2.0 && distortion.is_finite()) {
        return Err(Error::Domain(format!("distortion must be finite and > 2, got {distortion}")));
    }
    Ok(solve_beta(2.0 / distortion)?.value)
}

/// `((1 + αx)^p - 1) / (x^p - 1)` for `x > 1`.
pub fn beta_p_objective(alpha: f64, p: f64, x: f64) -> f64 {
    (p * (alpha * x).ln_1p()).exp_m1() / (p * x.ln()).exp_m1()
}

/// Minimum of [`beta_p_objective`] over `x > 1` and where it is attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaPMinimum {
    pub value: f64,
    pub minimizer: f64,
}

const GOLDEN_REL_TOL: f64 = 1e-10;

/// `β_p(α) = inf_{x>1} ((1+αx)^p - 1)/(x^p - 1)` with its minimizer.
///
/// The search interval is found by doubling `x` from 2 until the objective
/// increases, then refined by golden-section search.
pub fn beta_p_minimum(alpha: f64, p: f64) -> Result<BetaPMinimum> {
    if !(alpha > 0.0 && alpha < 1.0 && p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "beta_p needs alpha, p in (0, 1), got alpha = {alpha}, p = {p}"
        )));
    }
    let g = |x: f64| beta_p_objective(alpha, p, x);

    let (mut lo, mut mid, mut hi) = (1.0f64, 2.0f64, 4.0f64);
    let mut g_mid = g(mid);
    loop {
        let g_hi = g(hi);
        if g_hi > g_mid {
            break;
        }
        lo = mid;
        mid = hi;
        g_mid = g_hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Domain(format!(
                "beta_p objective has no interior minimum for alpha = {alpha}, p = {p}"
            )));
        }
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    while b - a > GOLDEN_REL_TOL * 0.5 * (a + b) {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
        }
    }
    let (minimizer, value) = if gc < gd { (c, gc) } else { (d, gd) };
    Ok(BetaPMinimum { value, minimizer })
}

pub fn beta_p(alpha: f64, p: f64) -> Result<f64> {
    Ok(beta_p_minimum(alpha, p)?.value)
}

/// Stationary point implied by the first-order condition at the minimum:
/// `x0 = 1 / ((α/β_p)^{1/(1-p)} - α)`.
pub fn beta_p_critical_point(alpha: f64, p: f64, beta_p: f64) -> f64 {
    1.0 / ((alpha / beta_p).powf(1.0 / (1.0 - p)) - alpha)
}

/// One clipped window interval of the optimal schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalTerm {
    pub n: u64,
    /// Set of `U` values (clipped to `[0, 1]`) for which `r` falls in window `n`.
    pub interval: (f64, f64),
    pub length: f64,
}

/// Exact probability, over `U`, that a fixed radius `r` falls in some window
/// `(r_n, r_n + 2 r_{n-1}/D]` of the optimal schedule, decomposed per level.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSum {
    pub r: f64,
    /// `a = β ln r / ln(1-β)`; window `n >= 2` is `U ∈ (a-n+1, a-n+1+β]`.
    pub offset: f64,
    pub terms: Vec<IntervalTerm>,
    pub total: f64,
}

fn check_beta_distortion(beta: f64, distortion: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Domain(format!("beta must lie in (0, 1), got {beta}")));
    }
    if !(distortion > 2.0 && distortion.is_finite()) {
        return Err(Error::Domain(format!("distortion must be finite and > 2, got {distortion}")));
    }
    let residual = profile(beta) - 2.0 / distortion;
    if residual.abs() > PARAMETER_MATCH_TOL {
        return Err(Error::ParameterMismatch { beta, distortion, residual });
    }
    Ok(())
}

/// Window probabilities of the optimal schedule `r_0 = 1`,
/// `r_n = (1-β)^{(U+n-1)/β}` at probe radius `r`.
///
/// For `n >= 2` the window is the interval `(a-n+1, a-n+1+β]` in `U`. The
/// first window uses the true `r_0 = 1`, so its upper end is additionally
/// capped by `r <= r_1 + 2/D`, i.e. `U <= β ln(r - 2/D) / ln(1-β)` when
/// `r > 2/D`. The returned total is the exact sum of probabilities and never
/// exceeds `β`.
pub fn interval_sum(beta: f64, distortion: f64, r: f64) -> Result<IntervalSum> {
    check_beta_distortion(beta, distortion)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("probe radius must be positive, got {r}")));
    }
    Ok(interval_sum_unchecked(beta, 2.0 / distortion, r))
}

pub(crate) fn interval_sum_unchecked(beta: f64, alpha: f64, r: f64) -> IntervalSum {
    let ln_q = (-beta).ln_1p();
    let a = beta * r.ln() / ln_q;
    let n_min = if a < 0.0 { 1 } else { (a.floor() as u64).saturating_add(1).max(1) };
    let n_max_f = (a + 1.0 + beta).ceil() - 1.0;
    let n_max = if n_max_f < 1.0 { 1 } else { n_max_f as u64 };

    let mut candidates = vec![1u64];
    for n in n_min.max(2)..=n_max.max(1) {
        candidates.push(n);
    }

    let mut terms = Vec::new();
    let mut total = 0.0;
    for n in candidates {
        let lo = a - (n as f64) + 1.0;
        let mut hi = lo + beta;
        if n == 1 && r > alpha {
            hi = hi.min(beta * (r - alpha).ln() / ln_q);
        }
        let lo_c = lo.max(0.0);
        let hi_c = hi.min(1.0).max(lo_c);
        let length = hi_c - lo_c;
        if n == 1 || length > 0.0 {
            terms.push(IntervalTerm { n, interval: (lo_c, hi_c), length });
            total += length;
        }
    }
    IntervalSum { r, offset: a, terms, total }
}

/// Largest [`interval_sum`] total over `grid` probe radii spanning offsets
/// `a ∈ [0, 2]` (two periods of `a mod 1`), with `a = 1` always included.
pub fn sup_interval_sum(beta: f64, distortion: f64, grid: usize) -> Result<f64> {
    check_beta_distortion(beta, distortion)?;
    if grid < 10 {
        return Err(Error::Domain(format!("grid must have at least 10 points, got {grid}")));
    }
    let alpha = 2.0 / distortion;
    let ln_q = (-beta).ln_1p();
    let offsets = (0..grid).map(|k| 2.0 * k as f64 / (grid - 1) as f64).chain(std::iter::once(1.0));
    let mut best = 0.0f64;
    for a in offsets {
        let r = (a * ln_q / beta).exp();
        best = best.max(interval_sum_unchecked(beta, alpha, r).total);
    }
    Ok(best)
}
