use duopoly_core::stage3_users::{
    demand_split, optimal_demand, payoff_at, price_for_snr, realized_demand, solve_h, user_payoff, user_snr,
};
use duopoly_core::{BandwidthPair, Market, PricePair, SnrRegime, UserProfile};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn regime() -> impl Strategy<Value = SnrRegime> {
    prop_oneof![Just(SnrRegime::HighSnr), Just(SnrRegime::General)]
}

fn market(gs: &[f64]) -> Market {
    let users = gs
        .iter()
        .enumerate()
        .map(|(k, g)| UserProfile::from_characteristic(format!("u{k:02}"), *g).unwrap())
        .collect();
    Market::new(users).unwrap()
}

proptest! {
    #[test]
    fn demand_decreasing_in_price(g in 0.01f64..100.0, p in 0.01f64..8.0, dp in 1e-3f64..2.0, r in regime()) {
        prop_assert!(optimal_demand(g, p + dp, r).unwrap() < optimal_demand(g, p, r).unwrap());
    }

    #[test]
    fn demand_linear_in_characteristic(g in 0.01f64..100.0, k in 0.1f64..10.0, p in 0.01f64..8.0, r in regime()) {
        let base = optimal_demand(g, p, r).unwrap();
        let scaled = optimal_demand(k * g, p, r).unwrap();
        prop_assert!((scaled - k * base).abs() <= 1e-12 * scaled);
    }

    #[test]
    fn optimal_demand_beats_alternatives(g in 0.1f64..10.0, p in 0.05f64..5.0, r in regime(), seed in any::<u64>()) {
        let w = optimal_demand(g, p, r).unwrap();
        let best = payoff_at(g, p, w, r).unwrap();
        prop_assert!((best - user_payoff(g, p, r).unwrap()).abs() <= 1e-12 * best.abs().max(1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..1000 {
            let alt = rng.gen_range(0.0..4.0 * w);
            prop_assert!(payoff_at(g, p, alt, r).unwrap() <= best + 1e-12);
        }
    }

    #[test]
    fn snr_is_user_independent(gs in prop::collection::vec(0.05f64..5.0, 2..12), p in 0.05f64..4.0, r in regime()) {
        let m = market(&gs);
        let s = user_snr(p, r).unwrap();
        let prices = PricePair::uniform(p).unwrap();
        let bw = BandwidthPair::new(0.2 * m.g_total(), 0.2 * m.g_total()).unwrap();
        let split = demand_split(&m, &bw, &prices, r).unwrap();
        for member in split.realized_set_i.iter().chain(&split.realized_set_j) {
            let g = m.users().iter().find(|u| u.id() == member.id).unwrap().g();
            let per_user_snr = g * member.fraction / member.bandwidth;
            prop_assert!((per_user_snr / s - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn realized_demand_respects_supply(
        g in 0.1f64..10.0,
        bi in 0.0f64..0.5,
        bj in 0.0f64..0.5,
        pi in 0.01f64..4.0,
        pj in 0.01f64..4.0,
        tie in any::<bool>(),
        r in regime(),
    ) {
        let pj = if tie { pi } else { pj };
        let bw = BandwidthPair::new(bi * g, bj * g).unwrap();
        let q = realized_demand(g, &bw, &PricePair::new(pi, pj).unwrap(), r).unwrap();
        prop_assert!(q.realized_i <= bw.b_i() && q.realized_j <= bw.b_j());
        prop_assert!(q.realized_i >= 0.0 && q.realized_j >= 0.0);
        let ceiling = optimal_demand(g, pi.min(pj), r).unwrap();
        prop_assert!(q.realized_i + q.realized_j <= ceiling * (1.0 + 1e-12));
    }

    #[test]
    fn preferred_sets_disjoint_and_memberships_add_up(
        gs in prop::collection::vec(0.05f64..5.0, 1..10),
        bi in 0.0f64..0.4,
        bj in 0.0f64..0.4,
        pi in 0.0f64..3.0,
        pj in 0.0f64..3.0,
        tie in any::<bool>(),
    ) {
        let m = market(&gs);
        let pj = if tie { pi } else { pj };
        let bw = BandwidthPair::new(bi * m.g_total(), bj * m.g_total()).unwrap();
        let s = demand_split(&m, &bw, &PricePair::new(pi, pj).unwrap(), SnrRegime::HighSnr).unwrap();
        for id in &s.preferred_set_i {
            prop_assert!(!s.preferred_set_j.contains(id));
        }
        let total = |set: &[duopoly_core::stage3_users::Membership]| set.iter().map(|x| x.bandwidth).sum::<f64>();
        prop_assert!((total(&s.realized_set_i) - s.realized_i).abs() <= 1e-12 * m.g_total());
        prop_assert!((total(&s.realized_set_j) - s.realized_j).abs() <= 1e-12 * m.g_total());
        for u in m.users() {
            let served: f64 = s.realized_set_i.iter().chain(&s.realized_set_j)
                .filter(|x| x.id == u.id()).map(|x| x.fraction).sum();
            prop_assert!(served <= 1.0 + 1e-12);
        }
    }
}

#[test]
fn h_inverse_consistency_on_log_grid() {
    for k in 0..=200 {
        let p0 = 1e-4 * (20.0f64 / 1e-4).powf(k as f64 / 200.0);
        let s = solve_h(p0).unwrap();
        assert!(s.residual <= 1e-10, "residual {} at {p0}", s.residual);
        assert!((price_for_snr(s.h_of_p) - p0).abs() <= 1e-9, "p0 {p0}");
    }
}

#[test]
fn general_approaches_high_snr_for_large_prices() {
    let gap = |p: f64| (solve_h(p).unwrap().h_of_p * (-(1.0 + p)).exp() - 1.0).abs();
    assert!(gap(4.0) <= 0.05);
    assert!(gap(6.0) <= 0.01);
}
