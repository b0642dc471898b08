use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use metric_frag::exponents::{interval_sum, profile, solve_beta, solve_theta};
use metric_frag::format::{format_matrix, parse_matrix};
use metric_frag::fragmentation::{fragment_iterated, ultrametric_of};
use metric_frag::metric::is_ultrametric_matrix;
use metric_frag::oracle::{embeddable, subdominant_ultrametric};
use metric_frag::radii::{optimal_schedule, stopping_index};
use metric_frag::{distortion, generate, Family, FiniteMetricSpace, GeneratorSpec};

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![
        Just(Family::Uniform),
        Just(Family::Path),
        Just(Family::Cycle),
        (1usize..=3).prop_map(|dim| Family::Euclidean { dim }),
        Just(Family::GnpShortestPath { p: 0.5 }),
    ]
}

fn any_space(max_n: usize) -> impl Strategy<Value = FiniteMetricSpace> {
    prop_oneof![
        4 => (family(), 2..=max_n, any::<u64>())
            .prop_map(|(f, n, seed)| generate(&GeneratorSpec::new(f, n, seed).unwrap()).unwrap()),
        1 => (1u32..=2, any::<u64>())
            .prop_map(|(depth, seed)| generate(&GeneratorSpec::binary_tree(depth, seed).unwrap()).unwrap()),
    ]
}

fn distortion_value() -> impl Strategy<Value = f64> {
    prop_oneof![Just(2.5), Just(4.0), Just(8.0), 2.05f64..20.0]
}

/// Random ultrametric on `n` points: merge clusters in random order at
/// increasing heights.
fn random_ultrametric(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut u = vec![vec![0.0; n]; n];
    let mut height = 0.0;
    while clusters.len() > 1 {
        height += rng.random_range(0.1..1.0);
        let a = clusters.swap_remove(rng.random_range(0..clusters.len()));
        let j = rng.random_range(0..clusters.len());
        for &x in &a {
            for &y in &clusters[j] {
                u[x][y] = height;
                u[y][x] = height;
            }
        }
        clusters[j].extend(a);
    }
    u
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn balls_grow_with_radius(sp in any_space(16), c in any::<prop::sample::Index>(), r in 0.0f64..2.5, dr in 0.0f64..1.0) {
        let x = c.index(sp.len());
        let small = sp.ball(x, r);
        let big = sp.ball(x, r + dr);
        prop_assert!(small.contains(&x));
        prop_assert!(small.iter().all(|y| big.contains(y)));
    }

    #[test]
    fn jump_radii_reconstruct_ball_sizes(sp in any_space(16), c in any::<prop::sample::Index>()) {
        let x = c.index(sp.len());
        let jumps = sp.jump_radii(x);
        prop_assert_eq!(jumps[0], (0.0, 1));
        prop_assert_eq!(jumps.last().unwrap().1, sp.len());
        for &(t, size) in &jumps {
            prop_assert_eq!(sp.ball_size(x, t), size);
        }
        for w in jumps.windows(2) {
            prop_assert!(w[0].0 < w[1].0 && w[0].1 < w[1].1);
        }
    }

    #[test]
    fn normalization_and_scaling(sp in any_space(16), factor in 0.01f64..100.0) {
        let scaled = sp.scaled(factor).unwrap();
        let (back, _) = scaled.normalize().unwrap();
        prop_assert_eq!(back.diameter(), 2.0);
        for i in 0..sp.len() {
            for j in 0..sp.len() {
                prop_assert!((back.d(i, j) - sp.d(i, j)).abs() <= 1e-12 * 2.0);
            }
        }
    }

    #[test]
    fn fragmentation_yields_d_equivalent_ultrametric(sp in any_space(24), d in distortion_value(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let beta = solve_beta(2.0 / d).unwrap().value;
        let sched = optimal_schedule(beta, rng.random()).unwrap();
        let res = fragment_iterated(&sp, &sched, d, &mut rng).unwrap();
        let bad = res.check_all(&sp);
        prop_assert!(bad.is_empty(), "{:?}", bad);
        let tree = ultrametric_of(&res).unwrap();
        prop_assert!(is_ultrametric_matrix(&tree.value_matrix()).unwrap());
        let dist = distortion(&sp, &tree).unwrap();
        prop_assert!(dist <= d * (1.0 + 1e-12));
        prop_assert!(embeddable(&sp, res.survivors(), d).unwrap());
    }

    #[test]
    fn fragmentation_is_deterministic(sp in any_space(20), seed in any::<u64>()) {
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sched = optimal_schedule(0.6, rng.random()).unwrap();
            fragment_iterated(&sp, &sched, 2.0 / profile(0.6), &mut rng).unwrap()
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn subdominant_is_maximal(n in 2usize..=6, seed in any::<u64>(), s in any::<u64>()) {
        let sp = generate(&GeneratorSpec::new(Family::Euclidean { dim: 2 }, n, s).unwrap()).unwrap();
        let sub = subdominant_ultrametric(&sp);
        prop_assert!(is_ultrametric_matrix(&sub.to_rows()).unwrap());
        // every ultrametric below d, rescaled to touch d, stays below the subdominant
        let u = random_ultrametric(n, seed);
        let mut scale = f64::INFINITY;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    scale = scale.min(sp.d(i, j) / u[i][j]);
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                prop_assert!(sub.value(i, j) <= sp.d(i, j));
                prop_assert!(u[i][j] * scale <= sub.value(i, j) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn embeddable_monotone_and_hereditary(sp in any_space(8), d in 1.0f64..6.0, extra in 0.0f64..3.0, mask in any::<u32>()) {
        let all: Vec<usize> = (0..sp.len()).collect();
        if embeddable(&sp, &all, d).unwrap() {
            prop_assert!(embeddable(&sp, &all, d + extra).unwrap());
            let subset: Vec<usize> = all.iter().copied().filter(|&i| mask & (1 << i) != 0).collect();
            prop_assert!(embeddable(&sp, &subset, d).unwrap());
        }
    }

    #[test]
    fn stopping_index_grows_as_points_crowd(beta in 0.05f64..0.95, u in 0.0f64..1.0, d in 2.05f64..30.0, m1 in 1e-6f64..2.0, m2 in 1e-6f64..2.0) {
        let sched = optimal_schedule(beta, u).unwrap();
        let (lo, hi) = if m1 < m2 { (m1, m2) } else { (m2, m1) };
        let n_lo = stopping_index(&sched, lo, d).unwrap();
        let n_hi = stopping_index(&sched, hi, d).unwrap();
        prop_assert!(n_lo >= n_hi);
        let r = sched.radius(n_hi);
        prop_assert!(2.0 * r < hi && r + 2.0 * sched.radius(n_hi - 1) / d < hi);
    }

    #[test]
    fn window_probability_at_most_beta(d in 2.01f64..100.0, r in 1e-9f64..1.5) {
        let beta = solve_beta(2.0 / d).unwrap().value;
        let total = interval_sum(beta, d, r).unwrap().total;
        prop_assert!((0.0..=beta + 1e-15).contains(&total));
    }

    #[test]
    fn theta_and_beta_are_complementary(d in 2.001f64..1e4) {
        let t = solve_theta(d).unwrap();
        let b = solve_beta(2.0 / d).unwrap();
        prop_assert!((t.value + b.value - 1.0).abs() <= 1e-11);
        prop_assert!(b.residual.abs() <= 1e-12);
    }

    #[test]
    fn matrix_text_round_trip(sp in any_space(12)) {
        prop_assert_eq!(parse_matrix(&format_matrix(&sp)).unwrap(), sp);
    }
}
