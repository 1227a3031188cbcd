use num_complex::Complex64;
use num_rational::Rational64;
use proptest::prelude::*;
use rand::Rng;
use wiretap_sdof::converse::aligned::{deterministic_output, DetChannel};
use wiretap_sdof::converse::rank::conditional_rank;
use wiretap_sdof::experiment::ExperimentConfig;
use wiretap_sdof::linalg::{complex_gaussian_matrix, complex_gaussian_vector, vstack};
use wiretap_sdof::model::{apply_channel, generate_channel, rng_from_seed, ChannelLaw, NoiseMode};
use wiretap_sdof::receiver::{checked_rank, numeric_rank, RANK_REL_TOL};
use wiretap_sdof::sdof::compute_sdof;
use wiretap_sdof::AntennaConfig;

fn antennas() -> impl Strategy<Value = (usize, usize, Vec<usize>)> {
    (
        1usize..=8,
        1usize..=5,
        prop::collection::vec(1usize..=5, 1..=3),
    )
}

proptest! {
    #[test]
    fn sdof_between_zero_and_n1_and_m(cfg in antennas()) {
        let (m, n1, eaves) = cfg;
        let c = AntennaConfig::new(m, n1, eaves).unwrap();
        let v = compute_sdof(&c).value;
        prop_assert!(v >= Rational64::from_integer(0));
        prop_assert!(v <= Rational64::from_integer(n1.min(m) as i64));
    }

    #[test]
    fn sdof_depends_on_eavesdroppers_only_through_the_largest(cfg in antennas()) {
        let (m, n1, eaves) = cfg;
        let n_max = *eaves.iter().max().unwrap();
        let full = AntennaConfig::new(m, n1, eaves).unwrap();
        let single = AntennaConfig::triple(m, n1, n_max).unwrap();
        prop_assert_eq!(compute_sdof(&full).value, compute_sdof(&single).value);
    }

    #[test]
    fn sdof_monotone(m in 1usize..=8, n1 in 1usize..=5, n_max in 1usize..=5) {
        let at = |m, n1, nm| compute_sdof(&AntennaConfig::triple(m, n1, nm).unwrap()).value;
        let v = at(m, n1, n_max);
        prop_assert!(at(m + 1, n1, n_max) >= v);
        prop_assert!(at(m, n1 + 1, n_max) >= v);
        prop_assert!(at(m, n1, n_max + 1) <= v);
    }

    #[test]
    fn channel_output_is_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let c = AntennaConfig::triple(4, 2, 3).unwrap();
        let real = generate_channel(&c, 2, ChannelLaw::default(), seed).unwrap();
        let mut rng = rng_from_seed(seed ^ 1);
        let x1 = complex_gaussian_vector(&mut rng, 8, 1.0);
        let x2 = complex_gaussian_vector(&mut rng, 8, 1.0);
        let (ca, cb) = (Complex64::new(a, 0.5), Complex64::new(b, -1.0));
        let mix = &x1 * ca + &x2 * cb;
        let y1 = apply_channel(&real, &x1, NoiseMode::Off, &mut rng).unwrap();
        let y2 = apply_channel(&real, &x2, NoiseMode::Off, &mut rng).unwrap();
        let ym = apply_channel(&real, &mix, NoiseMode::Off, &mut rng).unwrap();
        for j in 0..ym.len() {
            let want = &y1[j].values * ca + &y2[j].values * cb;
            prop_assert!((&ym[j].values - want).norm() < 1e-9);
        }
    }

    #[test]
    fn conditional_rank_chain_rule(seed in any::<u64>(), ra in 1usize..4, rb in 1usize..4, rc in 0usize..4, cols in 2usize..7) {
        let mut rng = rng_from_seed(seed);
        let a = complex_gaussian_matrix(&mut rng, ra, cols, 1.0);
        let b = complex_gaussian_matrix(&mut rng, rb, cols, 1.0);
        let c = complex_gaussian_matrix(&mut rng, rc, cols, 1.0);
        // rank(A,B | C) = rank(A | C) + rank(B | A, C)
        let ab = vstack(&[&a, &b]);
        let ac = vstack(&[&a, &c]);
        let lhs = conditional_rank(&ab, &c).unwrap();
        let rhs = conditional_rank(&a, &c).unwrap() + conditional_rank(&b, &ac).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert!(conditional_rank(&a, &c).unwrap() <= checked_rank(&a).unwrap());
    }

    #[test]
    fn product_rank_is_inner_dimension(seed in any::<u64>(), rows in 1usize..7, cols in 1usize..9, inner in 1usize..6) {
        let mut rng = rng_from_seed(seed);
        let p = complex_gaussian_matrix(&mut rng, rows, inner, 1.0) * complex_gaussian_matrix(&mut rng, inner, cols, 1.0);
        prop_assert_eq!(numeric_rank(&p, RANK_REL_TOL), rows.min(cols).min(inner));
    }

    #[test]
    fn config_json_round_trip(cfg in antennas(), trials in 0u64..5000, seed in any::<u64>(), power in 1.0f64..1e12) {
        let (m, n1, eaves) = cfg;
        let mut c = ExperimentConfig::new(AntennaConfig::new(m, n1, eaves).unwrap());
        c.trials = trials;
        c.seed = seed;
        c.power = power;
        let back = ExperimentConfig::from_json(&c.to_json()).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn deterministic_output_within_cap(seed in any::<u64>(), m in 1usize..=3, x_max in 1u64..=4) {
        let mut rng = rng_from_seed(seed);

        let slots: Vec<Vec<Rational64>> = (0..1)
            .map(|_| (0..m).map(|_| Rational64::new(rng.random_range(-16..=16), 4)).collect())
            .collect();
        let g = DetChannel { m, n0: 1, slots };
        let x: Vec<i64> = (0..m).map(|_| rng.random_range(0..=x_max as i64)).collect();
        let y = deterministic_output(&x, &g, x_max).unwrap();
        // |floor(sum g x)| <= m·d_max·x_max + m with d_max = 4
        let cap = (m as i64) * 4 * x_max as i64 + m as i64;
        prop_assert!(y.iter().all(|v| v.abs() <= cap));
    }
}
