//! Stage I: how much bandwidth each operator leases.
//!
//! Investment is restricted to totals that admit a positive pricing
//! equilibrium, so every operator sells its whole supply at the clearing price.

use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::model::{BandwidthPair, CostPair, CostRegime, Operator, SnrRegime};
use crate::roots::{solve_monotone, Slope};
use crate::stage2_pricing::{b_threshold, clearing_price, pricing_equilibrium, PricingOutcome};
use crate::stage3_users::{optimal_demand, user_payoff, user_snr};

const FOC_TOLERANCE: f64 = 1e-12;
const FOC_MAX_ITER: usize = 300;

const GENERAL_DAMPING: f64 = 0.5;
const GENERAL_MAX_ITER: usize = 10_000;
/// Target residual of the general iteration, relative to `G`.
const GENERAL_TARGET: f64 = 1e-13;
/// Residual, relative to `G`, below which a fixed point is still accepted.
const GENERAL_ACCEPT: f64 = 1e-8;

fn high_snr_cap(g_total: f64) -> f64 {
    g_total * (-2f64).exp()
}

/// Marginal profit of an operator investing `b` against `b_other` (high SNR).
pub fn marginal_profit(b: f64, b_other: f64, c_own: f64, g_total: f64) -> f64 {
    let s = b + b_other;
    (g_total / s).ln() - b / s - 1.0 - c_own
}

/// Profit-maximizing investment against `b_other` in the high-SNR regime.
pub fn best_response(b_other: f64, c_own: f64, g_total: f64) -> Result<f64> {
    require_non_negative("b_other", b_other)?;
    require_positive("c_own", c_own)?;
    require_positive("g_total", g_total)?;
    let cap = high_snr_cap(g_total);
    if b_other > cap * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "competitor investment {b_other} exceeds the strategy space bound {cap}"
        )));
    }
    let room = (cap - b_other).max(0.0);
    if c_own <= 1.0 && b_other >= c_own * cap {
        return Ok(room);
    }
    if c_own > 1.0 && b_other >= g_total * (-(1.0 + c_own)).exp() {
        return Ok(0.0);
    }
    let root = solve_monotone(
        |b| marginal_profit(b, b_other, c_own, g_total),
        |b| {
            let s = b + b_other;
            -1.0 / s - b_other / (s * s)
        },
        0.0,
        room,
        Slope::Decreasing,
        FOC_TOLERANCE,
        FOC_MAX_ITER,
    );
    Ok(root.x)
}

/// Largest deviation of either operator from its best response.
pub fn best_response_residual(costs: &CostPair, g_total: f64, bw: &BandwidthPair) -> Result<f64> {
    let ri = (bw.b_i() - best_response(bw.b_j(), costs.c_i(), g_total)?).abs();
    let rj = (bw.b_j() - best_response(bw.b_i(), costs.c_j(), g_total)?).abs();
    Ok(ri.max(rj))
}

/// Point `(rho G e^-2, (1 - rho) G e^-2)` of the low-cost equilibrium segment.
pub fn continuum_point(rho: f64, g_total: f64) -> Result<BandwidthPair> {
    let cap = high_snr_cap(g_total);
    let b_i = rho * cap;
    BandwidthPair::new(b_i, cap - b_i)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocalPoints {
    pub equal_investment: BandwidthPair,
    pub equal_investment_rho: f64,
    pub min_difference: BandwidthPair,
    pub min_difference_rho: f64,
    pub equal_profit: BandwidthPair,
    pub equal_profit_rho: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InvestmentOutcome {
    /// Every `rho` in `[rho_min, rho_max]` gives an equilibrium on the segment
    /// `B_i + B_j = G e^-2`.
    Continuum {
        rho_min: f64,
        rho_max: f64,
        focal_equal_investment: BandwidthPair,
        focal_min_difference: BandwidthPair,
        focal_equal_profit: BandwidthPair,
    },
    UniqueInterior { bw: BandwidthPair },
    MonopolyCorner { bw: BandwidthPair, survivor: Operator },
}

/// Equilibrium interval `[c_j, 1 - c_i]` of the low-cost segment. On the line
/// `c_i + c_j = 1` rounding can invert it by an ulp; it then collapses to `c_j`.
fn rho_interval(costs: &CostPair) -> (f64, f64) {
    let lo = costs.c_j();
    (lo, (1.0 - costs.c_i()).max(lo))
}

/// Focal equilibria on the low-cost segment.
///
/// The min-difference point is the closest feasible `rho` to one half; it is
/// the equal split itself whenever both costs are at most one half.
pub fn focal_points(costs: &CostPair, g_total: f64) -> Result<FocalPoints> {
    require_positive("g_total", g_total)?;
    if costs.regime() != CostRegime::LowCosts {
        return Err(Error::Domain("focal points exist only in the low-cost regime".into()));
    }
    let (ci, cj) = (costs.c_i(), costs.c_j());
    let (lo, hi) = rho_interval(costs);
    let rho_mid = 0.5f64.clamp(lo, hi);
    let rho_eq = ((1.0 - cj) / (2.0 - ci - cj)).clamp(lo, hi);
    let mid = continuum_point(rho_mid, g_total)?;
    Ok(FocalPoints {
        equal_investment: mid,
        equal_investment_rho: rho_mid,
        min_difference: mid,
        min_difference_rho: rho_mid,
        equal_profit: continuum_point(rho_eq, g_total)?,
        equal_profit_rho: rho_eq,
    })
}

/// Interior solution of the two first-order conditions. It is the equilibrium
/// for comparable high costs and meets the low-cost segment on its boundary.
pub fn interior_investments(costs: &CostPair, g_total: f64) -> Result<BandwidthPair> {
    let (ci, cj) = (costs.c_i(), costs.c_j());
    let scale = g_total * (-(ci + cj + 3.0) / 2.0).exp();
    BandwidthPair::new((1.0 + cj - ci) / 2.0 * scale, (1.0 + ci - cj) / 2.0 * scale)
}

pub fn investment_equilibrium(costs: &CostPair, g_total: f64) -> Result<InvestmentOutcome> {
    require_positive("g_total", g_total)?;
    Ok(match costs.regime() {
        CostRegime::LowCosts => {
            let focal = focal_points(costs, g_total)?;
            let (rho_min, rho_max) = rho_interval(costs);
            InvestmentOutcome::Continuum {
                rho_min,
                rho_max,
                focal_equal_investment: focal.equal_investment,
                focal_min_difference: focal.min_difference,
                focal_equal_profit: focal.equal_profit,
            }
        }
        CostRegime::HighComparable => InvestmentOutcome::UniqueInterior { bw: interior_investments(costs, g_total)? },
        CostRegime::HighIncomparable { survivor } => {
            let b = g_total * (-(2.0 + costs.get(survivor))).exp();
            InvestmentOutcome::MonopolyCorner { bw: BandwidthPair::from_parts(survivor, b, 0.0)?, survivor }
        }
    })
}

/// Per-user quantities as multiples of the user's characteristic `g_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerUserScalars {
    pub demand: f64,
    pub snr: f64,
    pub payoff: f64,
}

impl PerUserScalars {
    pub fn at_price(p: f64, regime: SnrRegime) -> Result<Self> {
        Ok(PerUserScalars {
            demand: optimal_demand(1.0, p, regime)?,
            snr: user_snr(p, regime)?,
            payoff: user_payoff(1.0, p, regime)?,
        })
    }
}

/// Outcome of the whole game for one cost pair in the high-SNR regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumSummary {
    pub regime: CostRegime,
    /// Selected point of the low-cost segment, if the regime has one.
    pub rho: Option<f64>,
    pub investments: BandwidthPair,
    /// `None` for an operator that leases nothing and so posts no price.
    pub price_i: Option<f64>,
    pub price_j: Option<f64>,
    pub profits: (f64, f64),
    pub per_user: PerUserScalars,
}

/// Solves stage I and plays the resulting investments through stages II and III.
///
/// In the low-cost regime `rho` selects the equilibrium and defaults to the
/// equal-investment focal point; a `rho` outside the equilibrium interval is
/// rejected. Outside the low-cost regime `rho` must be absent.
pub fn equilibrium_summary(costs: &CostPair, g_total: f64, rho: Option<f64>) -> Result<EquilibriumSummary> {
    let outcome = investment_equilibrium(costs, g_total)?;
    let (investments, rho) = match outcome {
        InvestmentOutcome::Continuum { rho_min, rho_max, .. } => {
            let rho = match rho {
                Some(r) => r,
                None => focal_points(costs, g_total)?.equal_investment_rho,
            };
            if !(rho >= rho_min && rho <= rho_max) {
                return Err(Error::Domain(format!(
                    "rho {rho} is outside the equilibrium interval [{rho_min}, {rho_max}]"
                )));
            }
            (continuum_point(rho, g_total)?, Some(rho))
        }
        InvestmentOutcome::UniqueInterior { bw } | InvestmentOutcome::MonopolyCorner { bw, .. } => {
            if rho.is_some() {
                return Err(Error::Domain("rho applies only to the low-cost regime".into()));
            }
            (bw, None)
        }
    };
    let (price, profits) = match pricing_equilibrium(&investments, g_total, costs, SnrRegime::HighSnr)? {
        PricingOutcome::UniquePositive { price, profits } => (price, profits),
        other => {
            return Err(Error::Domain(format!("equilibrium investments led to pricing outcome {other:?}")))
        }
    };
    let posted = |b: f64| (b > 0.0).then_some(price);
    Ok(EquilibriumSummary {
        regime: costs.regime(),
        rho,
        investments,
        price_i: posted(investments.b_i()),
        price_j: posted(investments.b_j()),
        profits,
        per_user: PerUserScalars::at_price(price, SnrRegime::HighSnr)?,
    })
}

/// `P'(S)` for the general-regime clearing price.
fn general_price_slope(s: f64, g_total: f64) -> f64 {
    -g_total * g_total / (s * (s + g_total) * (s + g_total))
}

/// Marginal profit in the general regime: `P(S) + b P'(S) - c`.
pub fn marginal_profit_general(b: f64, b_other: f64, c_own: f64, g_total: f64) -> f64 {
    let s = b + b_other;
    clearing_price(s, g_total, SnrRegime::General) + b * general_price_slope(s, g_total) - c_own
}

/// Profit-maximizing investment against `b_other` in the general regime,
/// restricted to totals below the threshold supply.
pub fn best_response_general(b_other: f64, c_own: f64, g_total: f64) -> Result<f64> {
    require_non_negative("b_other", b_other)?;
    require_positive("c_own", c_own)?;
    require_positive("g_total", g_total)?;
    let b_th = b_threshold(g_total);
    if b_other >= b_th {
        return Err(Error::NoEquilibriumInRegion(format!(
            "competitor investment {b_other} reaches the threshold supply {b_th}"
        )));
    }
    let room = b_th - b_other;
    if b_other > 0.0 && marginal_profit_general(0.0, b_other, c_own, g_total) <= 0.0 {
        return Ok(0.0);
    }
    if marginal_profit_general(room, b_other, c_own, g_total) > 0.0 {
        return Err(Error::NoEquilibriumInRegion(format!(
            "best response to {b_other} at cost {c_own} lies beyond the threshold supply"
        )));
    }
    let foc = |b: f64| marginal_profit_general(b, b_other, c_own, g_total);
    let dfoc = |b: f64| {
        let s = b + b_other;
        let curvature = g_total * g_total * (3.0 * s + g_total) / (s * s * (s + g_total).powi(3));
        2.0 * general_price_slope(s, g_total) + b * curvature
    };
    Ok(solve_monotone(foc, dfoc, 0.0, room, Slope::Decreasing, FOC_TOLERANCE, FOC_MAX_ITER).x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralEquilibrium {
    pub bw: BandwidthPair,
    pub price: f64,
    pub profits: (f64, f64),
    pub per_user: PerUserScalars,
    /// Largest deviation from a best response at the returned point.
    pub residual: f64,
    pub iterations: usize,
}

fn general_residual(costs: &CostPair, g_total: f64, bi: f64, bj: f64) -> Result<f64> {
    let ri = (bi - best_response_general(bj, costs.c_i(), g_total)?).abs();
    let rj = (bj - best_response_general(bi, costs.c_j(), g_total)?).abs();
    Ok(ri.max(rj))
}

/// Investment equilibrium of the general regime by damped alternating best
/// responses, started from the high-SNR equilibrium.
pub fn investment_equilibrium_general(costs: &CostPair, g_total: f64) -> Result<GeneralEquilibrium> {
    require_positive("g_total", g_total)?;
    let start = match investment_equilibrium(costs, g_total)? {
        InvestmentOutcome::Continuum { focal_equal_investment, .. } => focal_equal_investment,
        InvestmentOutcome::UniqueInterior { bw } | InvestmentOutcome::MonopolyCorner { bw, .. } => bw,
    };
    let (mut bi, mut bj) = (start.b_i(), start.b_j());
    let lambda = GENERAL_DAMPING;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < GENERAL_MAX_ITER {
        iterations += 1;
        bi = (1.0 - lambda) * bi + lambda * best_response_general(bj, costs.c_i(), g_total)?;
        bj = (1.0 - lambda) * bj + lambda * best_response_general(bi, costs.c_j(), g_total)?;
        residual = general_residual(costs, g_total, bi, bj)?;
        if residual <= GENERAL_TARGET * g_total {
            break;
        }
    }
    if residual > GENERAL_ACCEPT * g_total {
        return Err(Error::Convergence { iterations, residual });
    }
    let bw = BandwidthPair::new(bi, bj)?;
    let price = clearing_price(bw.total(), g_total, SnrRegime::General);
    Ok(GeneralEquilibrium {
        bw,
        price,
        profits: (bi * (price - costs.c_i()), bj * (price - costs.c_j())),
        per_user: PerUserScalars::at_price(price, SnrRegime::General)?,
        residual,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn costs(a: f64, b: f64) -> CostPair {
        CostPair::new(a, b).unwrap()
    }

    #[test]
    fn test_best_response_examples() {
        let e2 = (-2f64).exp();
        assert!((best_response(0.1, 0.5, 1.0).unwrap() - (e2 - 0.1)).abs() < 1e-15);
        let b = best_response(0.0, 1.5, 1.0).unwrap();
        assert!((b - (-3.5f64).exp()).abs() < 1e-12);
        let b = best_response(0.01, 1.5, 1.0).unwrap();
        assert!((b - 0.0290188).abs() < 1e-7);
        assert!(marginal_profit(b, 0.01, 1.5, 1.0).abs() <= 1e-10);
        assert_eq!(best_response(0.09, 1.5, 1.0).unwrap(), 0.0);
        assert!(matches!(best_response(0.2, 0.5, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn test_investment_examples() {
        match investment_equilibrium(&costs(1.0, 1.0), 1.0).unwrap() {
            InvestmentOutcome::UniqueInterior { bw } => {
                assert!((bw.b_i() - 0.5 * (-2.5f64).exp()).abs() < 1e-15);
                assert_eq!(bw.b_i(), bw.b_j());
            }
            other => panic!("unexpected {other:?}"),
        }
        match investment_equilibrium(&costs(0.5, 2.0), 1.0).unwrap() {
            InvestmentOutcome::MonopolyCorner { bw, survivor } => {
                assert_eq!(survivor, Operator::I);
                assert!((bw.b_i() - (-2.5f64).exp()).abs() < 1e-15);
                assert_eq!(bw.b_j(), 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        match investment_equilibrium(&costs(0.3, 0.4), 1.0).unwrap() {
            InvestmentOutcome::Continuum { rho_min, rho_max, focal_equal_investment, .. } => {
                assert_eq!((rho_min, rho_max), (0.4, 0.7));
                assert!((focal_equal_investment.b_i() - 0.5 * (-2f64).exp()).abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn test_focal_examples() {
        let e2 = (-2f64).exp();
        let f = focal_points(&costs(0.3, 0.3), 1.0).unwrap();
        assert!((f.equal_investment.b_i() - 0.5 * e2).abs() < 1e-15);
        let f = focal_points(&costs(0.7, 0.2), 1.0).unwrap();
        assert!((f.equal_investment.b_i() - 0.3 * e2).abs() < 1e-15);
        assert!((f.equal_investment.b_j() - 0.7 * e2).abs() < 1e-15);
        let f = focal_points(&costs(0.2, 0.2), 1.0).unwrap();
        assert_eq!(f.equal_profit_rho, 0.5);
        assert!(focal_points(&costs(1.0, 1.0), 1.0).is_err());
    }

    #[test]
    fn test_summary_examples() {
        let s = equilibrium_summary(&costs(0.3, 0.4), 1.0, Some(0.5)).unwrap();
        assert!((s.price_i.unwrap() - 1.0).abs() < 1e-12);
        assert!((s.per_user.snr - 2f64.exp()).abs() < 1e-12);
        let s = equilibrium_summary(&costs(1.0, 1.0), 1.0, None).unwrap();
        assert!((s.price_i.unwrap() - 1.5).abs() < 1e-12);
        assert!((s.profits.0 - 0.25 * (-2.5f64).exp()).abs() < 1e-15);
        let s = equilibrium_summary(&costs(0.5, 2.0), 1.0, None).unwrap();
        assert_eq!(s.price_j, None);
        assert!((s.profits.0 - (-2.5f64).exp()).abs() < 1e-15);
        assert!(equilibrium_summary(&costs(0.3, 0.4), 1.0, Some(0.2)).is_err());
        assert!(equilibrium_summary(&costs(1.0, 1.0), 1.0, Some(0.5)).is_err());
    }

    #[test]
    fn test_general_symmetric() {
        let eq = investment_equilibrium_general(&costs(1.5, 1.5), 1.0).unwrap();
        assert!((eq.bw.b_i() - eq.bw.b_j()).abs() < 1e-12);
        assert!(eq.residual <= 1e-8);
        assert!(marginal_profit_general(eq.bw.b_i(), eq.bw.b_j(), 1.5, 1.0).abs() < 1e-9);
    }

    #[test]
    fn test_general_low_costs_leave_region() {
        assert!(matches!(
            investment_equilibrium_general(&costs(0.1, 0.1), 1.0),
            Err(Error::NoEquilibriumInRegion(_))
        ));
    }
}
