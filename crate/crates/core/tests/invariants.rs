use proptest::prelude::*;
use ruelle_core::operator::finite_depth_oracle;
use ruelle_core::potential::Alphabet;
use ruelle_core::{montecarlo, schema, spectral, ProductPotential};

fn alphabet(k: usize) -> Alphabet {
    Alphabet::new((0..k).map(|i| format!("s{i}"))).unwrap()
}

fn finite_potential() -> impl Strategy<Value = ProductPotential> {
    (2usize..=3, 1usize..=3)
        .prop_flat_map(|(k, depth)| {
            (
                Just(k),
                -1.0f64..1.0,
                prop::collection::vec(prop::collection::vec(-2.0f64..2.0, k), depth),
            )
        })
        .prop_map(|(k, g0, rows)| ProductPotential::finite_depth(alphabet(k), g0, rows).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_matches_oracle(p in finite_potential()) {
        let ev = spectral::leading_eigenvalue(&p).unwrap();
        let oracle = finite_depth_oracle(&p).unwrap();
        prop_assert!((ev.log_lambda - oracle.log_lambda).abs() <= 1e-11 * (1.0 + ev.log_lambda.abs()));
    }

    #[test]
    fn measure_rows_are_probabilities(p in finite_potential()) {
        for m in [spectral::conformal_measure(&p, 6).unwrap(), spectral::eigen_measure(&p, 6).unwrap()] {
            for n in 1..=6 {
                let s: f64 = (0..p.arity()).map(|a| m.weight(n, a)).sum();
                prop_assert!((s - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn balancing_keeps_the_eigenvalue(p in finite_potential()) {
        let a = spectral::leading_eigenvalue(&p).unwrap().log_lambda;
        let b = spectral::leading_eigenvalue(&p.balance()).unwrap().log_lambda;
        prop_assert!((a - b).abs() < 1e-13 * (1.0 + a.abs()));
    }

    #[test]
    fn normalized_potential_has_pressure_zero(p in finite_potential()) {
        let q = spectral::normalized_potential(&p).unwrap();
        prop_assert!(spectral::leading_eigenvalue(&q).unwrap().log_lambda.abs() < 1e-14);
    }

    #[test]
    fn pressure_is_convex_in_temperature(p in finite_potential(), t in 0.1f64..2.0) {
        let at = |s: f64| spectral::leading_eigenvalue(&p.scaled(s)).unwrap().log_lambda;
        let h = 0.05;
        prop_assert!(at(t + h) + at(t - h) - 2.0 * at(t) >= -1e-12);
    }

    #[test]
    fn spec_round_trip(p in finite_potential()) {
        let text = schema::potential_to_json(&p);
        let q = schema::parse_potential(&text).unwrap();
        for n in 1..=3 {
            for a in 0..p.arity() {
                prop_assert_eq!(p.log_factor(n, a), q.log_factor(n, a));
            }
        }
        prop_assert_eq!(p.log_g0(), q.log_g0());
    }

    #[test]
    fn sampling_is_deterministic(p in finite_potential(), seed in any::<u64>()) {
        let m = spectral::eigen_measure(&p, 4).unwrap();
        let a = montecarlo::sample(&m, 8, 12, seed).unwrap();
        let b = montecarlo::sample(&m, 8, 12, seed).unwrap();
        prop_assert_eq!(a.to_matrix(), b.to_matrix());
    }
}
