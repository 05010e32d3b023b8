use duopoly_core::oracle::{default_epsilon_scale, pricing_grid, certify_pricing, refute_symmetric_pricing};
use duopoly_core::stage2_pricing::{clearing_price, pricing_equilibrium, supply_cap, PricingOutcome};
use duopoly_core::stage3_users::optimal_demand;
use duopoly_core::{BandwidthPair, CostPair, PricePair, SnrRegime};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn regime() -> impl Strategy<Value = SnrRegime> {
    prop_oneof![Just(SnrRegime::HighSnr), Just(SnrRegime::General)]
}

fn costs() -> CostPair {
    CostPair::new(0.3, 0.4).unwrap()
}

proptest! {
    #[test]
    fn unique_price_clears_the_market(g in 0.1f64..100.0, a in 0.01f64..1.0, share in 0.0f64..1.0, r in regime()) {
        let s = a * supply_cap(g, r);
        let bw = BandwidthPair::new(share * s, (1.0 - share) * s).unwrap();
        match pricing_equilibrium(&bw, g, &costs(), r).unwrap() {
            PricingOutcome::UniquePositive { price, .. } => {
                let demand = optimal_demand(g, price, r).unwrap();
                prop_assert!((demand / s - 1.0).abs() <= 1e-9, "demand {} supply {}", demand, s);
            }
            other => prop_assert!(false, "unexpected {:?}", other),
        }
    }

    #[test]
    fn high_snr_regions_partition(bi in 1e-6f64..1.0, bj in 1e-6f64..1.0) {
        let e1 = (-1f64).exp();
        let e2 = (-2f64).exp();
        let outcome = pricing_equilibrium(&BandwidthPair::new(bi, bj).unwrap(), 1.0, &costs(), SnrRegime::HighSnr).unwrap();
        let expected = if bi + bj <= e2 { 0 } else if bi.min(bj) >= e1 { 2 } else { 1 };
        let got = match outcome {
            PricingOutcome::UniquePositive { .. } => 0,
            PricingOutcome::NoEquilibrium => 1,
            PricingOutcome::ZeroPrice { profits } => {
                prop_assert!(profits.0 < 0.0 && profits.1 < 0.0);
                2
            }
        };
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn price_decreasing_in_supply(g in 0.1f64..10.0, a in 0.01f64..0.99, d in 1e-4f64..0.5, r in regime()) {
        let cap = supply_cap(g, r);
        let s1 = a * cap;
        let s2 = (s1 + d * cap).min(cap);
        prop_assume!(s2 > s1);
        prop_assert!(clearing_price(s2, g, r) < clearing_price(s1, g, r));
    }
}

#[test]
fn boundary_supply_has_unique_price() {
    let e2 = (-2f64).exp();
    let bw = BandwidthPair::new(0.5 * e2, 0.5 * e2).unwrap();
    match pricing_equilibrium(&bw, 1.0, &costs(), SnrRegime::HighSnr).unwrap() {
        PricingOutcome::UniquePositive { price, .. } => assert!((price - 1.0).abs() < 1e-12),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn oracle_confirms_low_supply_prices() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cap = supply_cap(1.0, SnrRegime::HighSnr);
    for _ in 0..50 {
        let total = rng.gen_range(0.05..1.0) * cap;
        let share = rng.gen_range(0.05..0.95);
        let bw = BandwidthPair::new(share * total, (1.0 - share) * total).unwrap();
        let price = match pricing_equilibrium(&bw, 1.0, &costs(), SnrRegime::HighSnr).unwrap() {
            PricingOutcome::UniquePositive { price, .. } => price,
            other => panic!("unexpected {other:?}"),
        };
        let grid = pricing_grid(&bw, 1.0, SnrRegime::HighSnr, 2000, 1e-3).unwrap();
        let cert = certify_pricing(&bw, 1.0, &costs(), SnrRegime::HighSnr, &grid, &PricePair::uniform(price).unwrap())
            .unwrap();
        assert!(cert.is_epsilon_nash, "{bw:?}: {cert:?}");
    }
}

#[test]
fn oracle_refutes_medium_supply() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let e1 = (-1f64).exp();
    let e2 = (-2f64).exp();
    let mut checked = 0;
    while checked < 5 {
        let bw = BandwidthPair::new(rng.gen_range(0.05..0.9 * e1), rng.gen_range(0.05..0.9 * e1)).unwrap();
        if bw.total() < 1.2 * e2 {
            continue;
        }
        assert_eq!(pricing_equilibrium(&bw, 1.0, &costs(), SnrRegime::HighSnr).unwrap(), PricingOutcome::NoEquilibrium);
        let grid = pricing_grid(&bw, 1.0, SnrRegime::HighSnr, 2000, 1e-3 * default_epsilon_scale(1.0)).unwrap();
        let scan = refute_symmetric_pricing(&bw, 1.0, &costs(), SnrRegime::HighSnr, &grid).unwrap();
        assert!(scan.all_refuted(), "{bw:?} survivors {:?}", scan.survivors);
        checked += 1;
    }
}
