use chainecon::supply_model::{
    block_reward, cumulative_supply, money_growth_rate, Amount, SupplySchedule,
};
use proptest::prelude::*;

/// Block-by-block sum in base units.
fn brute_force_supply(schedule: &SupplySchedule, height: u64) -> Amount {
    let units: u64 = (0..height)
        .map(|h| schedule.block_reward(h).base_units())
        .sum();
    Amount::from_base_units(units.min(schedule.max_supply().base_units()))
}

#[test]
fn closed_form_matches_brute_force_on_reduced_schedule() {
    let s = SupplySchedule::new(50.0, 1000, 21_000_000.0, 144).unwrap();
    for height in (0..=10_000).step_by(37).chain([999, 1000, 1001, 9_999, 10_000]) {
        let closed = cumulative_supply(&s, height);
        let brute = brute_force_supply(&s, height).to_btc();
        assert!((closed - brute).abs() <= 1e-6, "height {height}");
    }
}

#[test]
fn default_schedule_first_era_brute_force() {
    let s = SupplySchedule::default();
    assert_eq!(s.cumulative_supply(210_000), brute_force_supply(&s, 210_000));
    assert_eq!(cumulative_supply(&s, 210_000), 10_500_000.0);
}

#[test]
fn terminal_supply_below_cap() {
    let s = SupplySchedule::default();
    let brute = (0..64u64)
        .map(|era| s.block_reward(era * 210_000).base_units() * 210_000)
        .sum::<u64>();
    assert_eq!(s.cumulative_supply(64 * 210_000).base_units(), brute);
    let btc = cumulative_supply(&s, 64 * 210_000);
    assert!(btc < 21_000_000.0 && 21_000_000.0 - btc < 1.0);
}

#[test]
fn reward_halves_at_every_boundary() {
    let s = SupplySchedule::new(50.0, 1000, 21_000_000.0, 144).unwrap();
    for n in 1..=40u64 {
        let before = s.block_reward(n * 1000 - 1).base_units();
        let at = s.block_reward(n * 1000).base_units();
        // halving truncates to whole base units
        assert_eq!(at, before / 2, "era {n}");
    }
    // 5e9 = 2^9 · 9765625, so the first nine halvings are exact in BTC too.
    for n in 1..=9u64 {
        assert_eq!(block_reward(&s, n * 1000), block_reward(&s, n * 1000 - 1) / 2.0);
    }
}

proptest! {
    #[test]
    fn supply_monotone_and_capped(
        interval in 1u64..5000,
        reward in 1u64..10_000_000_000,
        cap in 1u64..2_000_000_000_000_000,
        a in 0u64..1_000_000,
        b in 0u64..1_000_000,
    ) {
        let s = SupplySchedule::new(
            reward as f64 / 1e8,
            interval,
            cap as f64 / 1e8,
            144,
        ).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(s.cumulative_supply(lo) <= s.cumulative_supply(hi));
        prop_assert!(s.cumulative_supply(hi) <= s.max_supply());
    }

    #[test]
    fn growth_at_least_one(reward in 0.0f64..100.0, supply in 1.0f64..1e8) {
        let mu = money_growth_rate(reward, supply, 144).unwrap();
        prop_assert!(mu >= 1.0);
        prop_assert_eq!(mu == 1.0, reward == 0.0 || reward / supply < f64::EPSILON / 2.0);
    }
}
