use chainecon::attack_model::{catch_up_probability, double_spend_probability, AttackScenario};
use proptest::prelude::*;

fn scenario(q: f64, z: u64) -> AttackScenario {
    AttackScenario::new(q, z).unwrap()
}

proptest! {
    #[test]
    fn risk_in_unit_interval_and_nonincreasing(q in 0.0f64..0.4999, z in 0u64..200) {
        let a = double_spend_probability(&scenario(q, z)).unwrap().probability;
        let b = double_spend_probability(&scenario(q, z + 1)).unwrap().probability;
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a, "q={} z={}: {} then {}", q, z, a, b);
    }

    #[test]
    fn attacker_majority_always_wins(q in 0.5f64..0.999_999, z in 0u64..100) {
        let s = scenario(q, z);
        prop_assert_eq!(catch_up_probability(&s), 1.0);
        prop_assert_eq!(double_spend_probability(&s).unwrap().probability, 1.0);
    }

    #[test]
    fn lambda_matches_definition(q in 0.0f64..0.99, z in 0u64..1000) {
        let r = double_spend_probability(&scenario(q, z)).unwrap();
        prop_assert!((r.lambda - z as f64 * q / (1.0 - q)).abs() <= 1e-12 * r.lambda.max(1.0));
    }

    #[test]
    fn risk_grows_with_attacker_share(q in 0.01f64..0.45, z in 1u64..60) {
        let lo = double_spend_probability(&scenario(q, z)).unwrap().probability;
        let hi = double_spend_probability(&scenario(q + 0.04, z)).unwrap().probability;
        prop_assert!(hi >= lo);
    }
}

#[test]
fn deep_confirmations_stay_finite() {
    let r = double_spend_probability(&scenario(0.45, 20_000)).unwrap();
    assert!(r.probability > 0.0 && r.probability < 1e-100, "{r:?}");
}
