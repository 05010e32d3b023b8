use duopoly_core::coordinated::{
    high_comparable_ratio, low_costs_ratio, profit_ratio, ratio_closed_form, ratio_curve, user_payoff_comparison,
};
use duopoly_core::stage1_investment::{continuum_point, equilibrium_summary};
use duopoly_core::{CostPair, CostRegime};
use proptest::prelude::*;

proptest! {
    #[test]
    fn ratio_at_most_one(ci in 0.001f64..3.0, cj in 0.001f64..3.0) {
        let r = profit_ratio(&CostPair::new(ci, cj).unwrap(), 1.0).unwrap();
        prop_assert!(r.ratio > 0.0 && r.ratio <= 1.0 + 1e-12);
    }

    #[test]
    fn solved_ratio_matches_closed_form(ci in 0.001f64..3.0, cj in 0.001f64..3.0, g in 0.1f64..100.0) {
        let costs = CostPair::new(ci, cj).unwrap();
        let r = profit_ratio(&costs, g).unwrap();
        prop_assert!((r.ratio - ratio_closed_form(&costs)).abs() <= 1e-12);
        prop_assert!((r.duopoly_total / r.coordinated_total - ratio_closed_form(&costs)).abs() <= 1e-12);
    }

    #[test]
    fn worst_equilibrium_sits_at_the_interval_end(ci in 0.001f64..0.999, cj in 0.001f64..0.999) {
        prop_assume!(ci + cj <= 1.0);
        let costs = CostPair::new(ci, cj).unwrap();
        let (lo, hi) = (cj, 1.0 - ci);
        let total = |rho: f64| {
            let bw = continuum_point(rho, 1.0).unwrap();
            bw.b_i() * (1.0 - ci) + bw.b_j() * (1.0 - cj)
        };
        let n = 1000;
        let (mut best_rho, mut best) = (lo, f64::INFINITY);
        for k in 0..=n {
            let rho = lo + (hi - lo) * k as f64 / n as f64;
            let t = total(rho);
            if t < best - 1e-15 {
                best = t;
                best_rho = rho;
            }
        }
        let worst = profit_ratio(&costs, 1.0).unwrap().worst_rho.unwrap();
        let cell = (hi - lo) / n as f64;
        if (ci - cj).abs() > 1e-9 {
            prop_assert!((best_rho - worst).abs() <= cell + 1e-12, "grid {} analytic {}", best_rho, worst);
        }
        if ci <= cj {
            prop_assert_eq!(worst, cj);
        }
        let s = equilibrium_summary(&costs, 1.0, Some(worst)).unwrap();
        prop_assert!((s.profits.0 + s.profits.1 - best).abs() <= 1e-12);
    }

    #[test]
    fn comparable_ratio_depends_only_on_gap(ci in 0.6f64..2.0, d in 0.0f64..1.0, t in 0.0f64..2.0) {
        let a = CostPair::new(ci, ci + d).unwrap();
        let b = CostPair::new(ci + t, ci + d + t).unwrap();
        prop_assume!(a.regime() == CostRegime::HighComparable && b.regime() == CostRegime::HighComparable);
        let ra = profit_ratio(&a, 1.0).unwrap().ratio;
        let rb = profit_ratio(&b, 1.0).unwrap().ratio;
        prop_assert!((ra - rb).abs() <= 1e-12);
    }

    #[test]
    fn users_never_worse_off_under_competition(ci in 0.01f64..3.0, cj in 0.01f64..3.0) {
        let c = user_payoff_comparison(&CostPair::new(ci, cj).unwrap(), 1.0).unwrap();
        prop_assert!(c.duopoly >= c.coordinated * (1.0 - 1e-12));
    }
}

#[test]
fn comparable_ratio_convex_in_gap() {
    let n = 10_000;
    let h = 1.0 / n as f64;
    for k in 1..n {
        let d = k as f64 * h;
        let second = high_comparable_ratio(d + h) - 2.0 * high_comparable_ratio(d) + high_comparable_ratio(d - h);
        assert!(second >= -1e-15, "second difference {second} at {d}");
    }
}

#[test]
fn ratio_continuous_across_regime_boundaries() {
    for k in 0..=1000 {
        let d = k as f64 / 1000.0;
        let junction = (1.0 - d) / 2.0;
        assert!((low_costs_ratio(junction, junction + d) - high_comparable_ratio(d)).abs() <= 1e-12);
    }
    assert!((high_comparable_ratio(1.0) - 1.0).abs() <= 1e-15);
    for d in [0.0, 0.1, 0.3, 0.5, 0.9, 1.0] {
        let curve = ratio_curve(d, 2001).unwrap();
        for w in curve.windows(2) {
            assert!((w[1].ratio - w[0].ratio).abs() <= 2e-3, "jump at delta {d}: {:?}", w);
        }
    }
}

#[test]
fn ratio_defined_on_the_unit_cost_line() {
    for k in 1..100 {
        let ci = k as f64 / 100.0;
        let costs = CostPair::new(ci, 1.0 - ci).unwrap();
        let r = profit_ratio(&costs, 1.0).unwrap();
        assert!((r.ratio - ratio_closed_form(&costs)).abs() <= 1e-12);
    }
}
