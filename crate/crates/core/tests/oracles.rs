//! Values checked against independent computations written here from first
//! principles, plus the closed-form facts the construction rests on.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use metric_frag::exponents::{
    beta_p, beta_p_critical_point, beta_p_minimum, beta_p_objective, interval_sum, profile,
    solve_beta, solve_theta,
};
use metric_frag::fragmentation::{expected_mass_bound, fragment_iterated, fragment_once, jensen_lower_bound};
use metric_frag::oracle::{embeddable, max_subset, subdominant_ultrametric};
use metric_frag::radii::{custom_schedule, mn07_geometric_schedule, optimal_schedule, stopping_index};
use metric_frag::{generate, Error, FiniteMetricSpace, GeneratorSpec};

fn space(spec: &str) -> FiniteMetricSpace {
    generate(&spec.parse::<GeneratorSpec>().unwrap()).unwrap()
}

/// Newton iteration on `ln f(β) = ln α` with `ln f(β) = ln β + ((1-β)/β) ln(1-β)`.
fn newton_beta(alpha: f64) -> f64 {
    let ln_f = |b: f64| b.ln() + (1.0 - b) / b * (1.0 - b).ln();
    // d/dβ ln f = 1/β - ln(1-β)/β² - 1/β = -ln(1-β)/β²
    let d_ln_f = |b: f64| -(1.0 - b).ln() / (b * b);
    let mut b = 0.5;
    for _ in 0..200 {
        let step = (ln_f(b) - alpha.ln()) / d_ln_f(b);
        b = (b - step).clamp(1e-12, 1.0 - 1e-12);
        if step.abs() < 1e-16 {
            break;
        }
    }
    b
}

#[test]
fn beta_matches_newton() {
    for alpha in [1e-4, 0.01, 0.1, 1.0 / 3.0, 0.5, 2.0 / 2.1, 0.9, 0.99] {
        let s = solve_beta(alpha).unwrap();
        let b = newton_beta(alpha);
        assert!((s.value - b).abs() < 1e-12, "alpha {alpha}: {} vs {b}", s.value);
        assert!((profile(s.value) - alpha).abs() <= 1e-12);
    }
}

#[test]
fn theta_six() {
    let t = solve_theta(6.0).unwrap().value;
    assert!((t - 0.3905).abs() < 5e-4, "{t}");
    assert!((t - (1.0 - newton_beta(1.0 / 3.0))).abs() < 1e-12);
    let b = solve_beta(1.0 / 3.0).unwrap().value;
    assert!((b - 0.6095).abs() < 5e-4);
}

#[test]
fn theta_lower_bound_and_domain() {
    let d = 1e6;
    assert!(solve_theta(d).unwrap().value >= 1.0 - 2.0 * std::f64::consts::E / d);
    assert!(matches!(solve_theta(2.0), Err(Error::Domain(_))));
    assert_eq!(solve_beta(1.0).unwrap().value, 1.0);
}

#[test]
fn beta_p_against_dense_grid() {
    for (alpha, p) in [(1.0 / 3.0, 0.5), (0.1, 0.1), (0.8, 0.01), (1.0 / 3.0, 0.001)] {
        let m = beta_p_minimum(alpha, p).unwrap();
        // log-spaced grid over x in (1, 1e8]
        let mut best = (f64::INFINITY, 0.0);
        for k in 1..=200_000 {
            let x = (8.0 * std::f64::consts::LN_10 * k as f64 / 200_000.0).exp();
            let v = beta_p_objective(alpha, p, x);
            if v < best.0 {
                best = (v, x);
            }
        }
        assert!(m.value <= best.0 + 1e-12, "alpha {alpha}, p {p}: {} > grid {}", m.value, best.0);
        assert!(best.0 - m.value < 1e-6);
        let x0 = beta_p_critical_point(alpha, p, m.value);
        assert!(((x0 - m.minimizer) / m.minimizer).abs() < 1e-6);
    }
}

#[test]
fn beta_p_brackets() {
    let alpha: f64 = 1.0 / 3.0;
    let v = beta_p(alpha, 0.5).unwrap();
    assert!(v > alpha / (1.0 + alpha).powf(0.5) && v < alpha.powf(0.5), "{v}");
    assert!((beta_p(alpha, 1e-3).unwrap() - solve_beta(alpha).unwrap().value).abs() < 0.05);
}

/// Probability over `U` that `r` lies in some window, by midpoint quadrature.
fn window_probability(beta: f64, d: f64, r: f64, grid: usize) -> f64 {
    let mut hits = 0usize;
    for k in 0..grid {
        let u = (k as f64 + 0.5) / grid as f64;
        let radius = |n: usize| if n == 0 { 1.0 } else { (1.0 - beta).powf((u + n as f64 - 1.0) / beta) };
        let mut n = 1;
        loop {
            let inner = radius(n);
            let outer = inner + 2.0 * radius(n - 1) / d;
            if outer < r {
                break;
            }
            if inner < r {
                hits += 1;
            }
            n += 1;
        }
    }
    hits as f64 / grid as f64
}

#[test]
fn interval_sum_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for d in [2.1, 3.0, 6.0, 20.0] {
        let beta = solve_beta(2.0 / d).unwrap().value;
        for _ in 0..40 {
            let r = (rng.random_range(-6.0..(1.0 + 2.0 / d).ln())).exp();
            let exact = interval_sum(beta, d, r).unwrap().total;
            let quad = window_probability(beta, d, r, 200_000);
            assert!((exact - quad).abs() < 2e-5, "D {d}, r {r}: {exact} vs {quad}");
            assert!(exact <= beta + 1e-15);
        }
    }
}

#[test]
fn interval_sum_examples() {
    let beta = solve_beta(1.0 / 3.0).unwrap().value;
    // r = (1-β)^{1/β} is the top of the r_1 range: the windows cover an interval of length β
    let r = (1.0 - beta).powf(1.0 / beta);
    assert!((interval_sum(beta, 6.0, r).unwrap().total - beta).abs() < 1e-12);
    let b = 0.3;
    let d = 2.0 / profile(b);
    let r = (1.0 - b).powf(-0.5 / b);
    assert_eq!(interval_sum(b, d, r).unwrap().total, 0.0);
}

#[test]
fn mn07_first_radius() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let draws = 100_000;
    let mut sum = 0.0;
    let mut sq = 0.0;
    for _ in 0..draws {
        let r1 = mn07_geometric_schedule(&mut rng).radius(1);
        assert!((1.0 / 32.0..=1.0 / 16.0).contains(&r1));
        sum += r1;
        sq += r1 * r1;
    }
    let mean = sum / draws as f64;
    let se = ((sq / draws as f64 - mean * mean) / draws as f64).sqrt();
    assert!((mean - 3.0 / 64.0).abs() <= 3.0 * se, "{mean}");
}

#[test]
fn stopping_index_hand_trace() {
    let s = optimal_schedule(0.5, 0.0).unwrap();
    assert_eq!(stopping_index(&s, 2.0, 4.0).unwrap(), 2);
}

#[test]
fn survival_probability_is_ball_ratio() {
    let sp = space("euclidean:dim=2,n=10,seed=3");
    let active: Vec<usize> = (0..sp.len()).collect();
    let (r, big_r) = (0.6, 1.3);
    let runs = 100_000;
    let mut counts = vec![0u64; sp.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..runs {
        for x in fragment_once(&sp, &active, r, big_r, &mut rng).unwrap().into_keys() {
            counts[x] += 1;
        }
    }
    for x in 0..sp.len() {
        let inner = (0..sp.len()).filter(|&y| sp.d(x, y) <= r).count() as f64;
        let outer = (0..sp.len()).filter(|&y| sp.d(x, y) <= big_r).count() as f64;
        let p = inner / outer;
        let f = counts[x] as f64 / runs as f64;
        let se = (p * (1.0 - p) / runs as f64).sqrt().max(1e-9);
        assert!((f - p).abs() <= 4.0 * se, "x {x}: {f} vs {p}");
    }
}

#[test]
fn two_point_survival_is_one_half() {
    let sp = FiniteMetricSpace::new(&[vec![0.0, 2.0], vec![2.0, 0.0]]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let runs = 40_000;
    let survived = (0..runs)
        .filter(|_| fragment_once(&sp, &[0, 1], 1.0, 2.0, &mut rng).unwrap().contains_key(&0))
        .count();
    let f = survived as f64 / runs as f64;
    assert!((f - 0.5).abs() <= 3.0 * (0.25 / runs as f64).sqrt(), "{f}");
}

#[test]
fn expected_mass_matches_monte_carlo() {
    let sp = space("path:n=12");
    let d = 4.0;
    let beta = solve_beta(0.5).unwrap().value;
    let sched = optimal_schedule(beta, 0.37).unwrap();
    let expected = expected_mass_bound(&sp, &sched, d).unwrap();

    // independent product of ball ratios
    let n_stop = stopping_index(&sched, sp.d_min(), d).unwrap();
    let mut direct = 0.0;
    for x in 0..sp.len() {
        let mut prod = 1.0;
        for n in 1..=n_stop {
            let r = sched.radius(n);
            let big_r = r + 2.0 * sched.radius(n - 1) / d;
            let inner = (0..sp.len()).filter(|&y| sp.d(x, y) <= r).count() as f64;
            let outer = (0..sp.len()).filter(|&y| sp.d(x, y) <= big_r).count() as f64;
            prod *= inner / outer;
        }
        direct += prod;
    }
    assert!((expected - direct).abs() < 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let runs = 20_000;
    let sizes: Vec<f64> = (0..runs)
        .map(|_| fragment_iterated(&sp, &sched, d, &mut rng).unwrap().survivors().len() as f64)
        .collect();
    let mean = sizes.iter().sum::<f64>() / runs as f64;
    let var = sizes.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (runs - 1) as f64;
    let se = (var / runs as f64).sqrt();
    assert!((mean - expected).abs() <= 4.0 * se, "{mean} vs {expected} (se {se})");
}

#[test]
fn uniform_expected_mass() {
    let sp = FiniteMetricSpace::new(&vec![vec![1.0; 6]; 6].iter().enumerate().map(|(i, row)| {
        let mut row = row.clone();
        row[i] = 0.0;
        row
    }).collect::<Vec<_>>()).unwrap();
    let sched = custom_schedule(vec![1.0, 0.6, 0.01]).unwrap();
    assert!((expected_mass_bound(&sp, &sched, 4.0).unwrap() - 1.0).abs() < 1e-12);

    let two = FiniteMetricSpace::new(&[vec![0.0, 2.0], vec![2.0, 0.0]]).unwrap();
    let sched = custom_schedule(vec![1.0, 0.9]).unwrap();
    assert!((expected_mass_bound(&two, &sched, 4.0).unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn jensen_bound_dominates_power_law() {
    for spec in ["euclidean:dim=3,n=128,seed=7", "path:n=50", "uniform:n=20", "binary_tree:depth=5", "gnp:p=0.1,n=80,seed=2"] {
        let sp = space(spec);
        for d in [2.2, 3.0, 6.0, 50.0] {
            let beta = solve_beta(2.0 / d).unwrap().value;
            let bound = (sp.len() as f64).powf(1.0 - beta);
            let j = jensen_lower_bound(&sp, d).unwrap();
            assert!(j >= bound - 1e-9, "{spec} D {d}: {j} < {bound}");
        }
    }
    // uniform: one jump at 2 with ratio n
    let sp = space("uniform:n=9");
    let d = 5.0;
    let beta = solve_beta(0.4).unwrap().value;
    let s2 = interval_sum(beta, d, 2.0).unwrap().total;
    assert!((jensen_lower_bound(&sp, d).unwrap() - 9.0 * 9f64.powf(-s2)).abs() < 1e-12);
}

/// Minimax path values by Floyd-Warshall.
fn minimax(sp: &FiniteMetricSpace) -> Vec<Vec<f64>> {
    let n = sp.len();
    let mut m = sp.to_rows();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = m[i][k].max(m[k][j]);
                if via < m[i][j] {
                    m[i][j] = via;
                }
            }
        }
    }
    m
}

#[test]
fn subdominant_matches_floyd_warshall() {
    for seed in 0..20 {
        let sp = space(&format!("euclidean:dim=2,n=15,seed={seed}"));
        let sub = subdominant_ultrametric(&sp);
        let fw = minimax(&sp);
        for i in 0..sp.len() {
            for j in 0..sp.len() {
                assert_eq!(sub.value(i, j), fw[i][j]);
            }
        }
    }
}

#[test]
fn path_oracle_examples() {
    let path = FiniteMetricSpace::new(&[vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]]).unwrap();
    let sub = subdominant_ultrametric(&path);
    assert_eq!(sub.to_rows(), vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]);
    assert!(embeddable(&path, &[0, 1, 2], 2.0).unwrap());
    assert!(!embeddable(&path, &[0, 1, 2], 1.9).unwrap());
    assert_eq!(max_subset(&path, 1.5, 3).unwrap().size, 2);
}

#[test]
fn max_subset_matches_enumeration() {
    for (k, spec) in ["euclidean:dim=2,n=8,seed=1", "path:n=8", "cycle:n=7", "gnp:p=0.4,n=8,seed=6", "binary_tree:depth=2"]
        .iter()
        .enumerate()
    {
        let sp = space(spec);
        let n = sp.len();
        for d in [1.2, 2.0, 2.5, 4.0] {
            let mut best = 0;
            for mask in 0u32..(1 << n) {
                let subset: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
                if subset.len() > best && embeddable(&sp, &subset, d).unwrap() {
                    best = subset.len();
                }
            }
            let found = max_subset(&sp, d, n).unwrap();
            assert_eq!(found.size, best, "case {k} D {d}");
            assert!(embeddable(&sp, &found.witness, d).unwrap());
        }
    }
}
