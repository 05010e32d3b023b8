//! Coordinated benchmark and the cost of competition (high-SNR regime).

use rayon::prelude::*;

use crate::error::{require_positive, Error, Result};
use crate::model::{BandwidthPair, CostPair, CostRegime, Operator, SnrRegime};
use crate::stage1_investment::{equilibrium_summary, investment_equilibrium, InvestmentOutcome};
use crate::stage2_pricing::monopolist_price;
use crate::stage3_users::user_payoff;

/// Joint profit maximum when the two operators act as one monopolist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinatedOutcome {
    pub bw: BandwidthPair,
    /// The operator with the lower cost; ties go to `I`.
    pub survivor: Operator,
    pub price: f64,
    pub total_profit: f64,
}

pub fn coordinated_optimum(costs: &CostPair, g_total: f64) -> Result<CoordinatedOutcome> {
    require_positive("g_total", g_total)?;
    let survivor = if costs.c_i() <= costs.c_j() { Operator::I } else { Operator::J };
    let c = costs.get(survivor);
    let b = g_total * (-(2.0 + c)).exp();
    let price = monopolist_price(b, g_total, SnrRegime::HighSnr)?;
    Ok(CoordinatedOutcome {
        bw: BandwidthPair::from_parts(survivor, b, 0.0)?,
        survivor,
        price,
        total_profit: b * (price - c),
    })
}

/// Worst-case duopoly profit relative to the coordinated benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioReport {
    pub regime: CostRegime,
    pub ratio: f64,
    /// The equilibrium with the lowest total profit, in the low-cost regime.
    pub worst_rho: Option<f64>,
    pub duopoly_total: f64,
    pub coordinated_total: f64,
}

/// Closed-form low-cost ratio; the pair is reordered so the first cost is the lower.
pub fn low_costs_ratio(c_a: f64, c_b: f64) -> f64 {
    let (lo, hi) = if c_a <= c_b { (c_a, c_b) } else { (c_b, c_a) };
    (hi * (1.0 - lo) + (1.0 - hi) * (1.0 - hi)) * lo.exp()
}

/// Closed-form ratio for comparable high costs, a function of the gap alone.
pub fn high_comparable_ratio(delta: f64) -> f64 {
    (1.0 + delta * delta) / 2.0 * ((1.0 - delta) / 2.0).exp()
}

/// Ratio from closed forms for any valid cost pair.
pub fn ratio_closed_form(costs: &CostPair) -> f64 {
    match costs.regime() {
        CostRegime::LowCosts => low_costs_ratio(costs.c_i(), costs.c_j()),
        CostRegime::HighComparable => high_comparable_ratio((costs.c_j() - costs.c_i()).abs()),
        CostRegime::HighIncomparable { .. } => 1.0,
    }
}

/// Compares the worst duopoly equilibrium with the coordinated optimum by
/// solving both games; the closed forms above serve as a cross-check.
pub fn profit_ratio(costs: &CostPair, g_total: f64) -> Result<RatioReport> {
    let regime = costs.regime();
    let worst_rho = match investment_equilibrium(costs, g_total)? {
        // Total profit is linear in rho, so the minimum sits at the end that
        // gives more bandwidth to the costlier operator.
        InvestmentOutcome::Continuum { rho_min, rho_max, .. } => {
            Some(if costs.c_i() <= costs.c_j() { rho_min } else { rho_max })
        }
        _ => None,
    };
    let summary = equilibrium_summary(costs, g_total, worst_rho)?;
    let duopoly_total = summary.profits.0 + summary.profits.1;
    let coordinated_total = coordinated_optimum(costs, g_total)?.total_profit;
    let ratio = match regime {
        CostRegime::HighIncomparable { .. } => 1.0,
        _ => duopoly_total / coordinated_total,
    };
    Ok(RatioReport { regime, ratio, worst_rho, duopoly_total, coordinated_total })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinRatioScan {
    pub grid_n: usize,
    pub points: usize,
    pub low_costs_min: f64,
    pub low_costs_argmin: (f64, f64),
    /// The infimum over the low-cost region, approached as the lower cost
    /// tends to zero with the higher at one half. Not attained on any grid.
    pub low_costs_limit: f64,
    pub high_comparable_min: f64,
    pub high_comparable_delta: f64,
    pub max_ratio: f64,
}

#[derive(Clone, Copy)]
struct ScanAcc {
    low: (f64, f64, f64),
    high: (f64, f64),
    max: f64,
}

impl ScanAcc {
    fn empty() -> Self {
        ScanAcc { low: (f64::INFINITY, 0.0, 0.0), high: (f64::INFINITY, 0.0), max: f64::NEG_INFINITY }
    }

    fn merge(self, other: Self) -> Self {
        // Ties keep the earlier grid point, so the result is independent of scheduling.
        ScanAcc {
            low: if other.low.0 < self.low.0 { other.low } else { self.low },
            high: if other.high.0 < self.high.0 { other.high } else { self.high },
            max: self.max.max(other.max),
        }
    }
}

/// Scans costs `k / grid_n` for `k = 1..=2 grid_n` on both axes.
pub fn min_ratio_scan(grid_n: usize) -> Result<MinRatioScan> {
    if grid_n < 100 {
        return Err(Error::Validation(format!("grid_n must be at least 100, got {grid_n}")));
    }
    let m = 2 * grid_n;
    let step = 1.0 / grid_n as f64;
    let acc = (1..=m)
        .into_par_iter()
        .map(|a| {
            let mut acc = ScanAcc::empty();
            for b in 1..=m {
                let costs = CostPair::new(a as f64 * step, b as f64 * step).expect("grid costs are positive");
                let r = ratio_closed_form(&costs);
                acc.max = acc.max.max(r);
                match costs.regime() {
                    CostRegime::LowCosts if r < acc.low.0 => acc.low = (r, costs.c_i(), costs.c_j()),
                    CostRegime::HighComparable if r < acc.high.0 => {
                        acc.high = (r, (costs.c_j() - costs.c_i()).abs())
                    }
                    _ => {}
                }
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(ScanAcc::empty(), ScanAcc::merge);
    Ok(MinRatioScan {
        grid_n,
        points: m * m,
        low_costs_min: acc.low.0,
        low_costs_argmin: (acc.low.1, acc.low.2),
        low_costs_limit: 0.75,
        high_comparable_min: acc.high.0,
        high_comparable_delta: acc.high.1,
        max_ratio: acc.max,
    })
}

/// Per-user payoff scalars (multiples of `g_k`) under both market structures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffComparison {
    pub regime: CostRegime,
    pub duopoly: f64,
    pub coordinated: f64,
}

pub fn user_payoff_comparison(costs: &CostPair, g_total: f64) -> Result<PayoffComparison> {
    let duopoly = equilibrium_summary(costs, g_total, None)?.per_user.payoff;
    let co = coordinated_optimum(costs, g_total)?;
    Ok(PayoffComparison {
        regime: costs.regime(),
        duopoly,
        coordinated: user_payoff(1.0, co.price, SnrRegime::HighSnr)?,
    })
}

/// Shape of the low-cost ratio as the lower cost grows with the gap fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioShape {
    Decreasing,
    Unimodal,
    Increasing,
}

const SLOPE_STEP: f64 = 1e-5;
/// Central differences at this step resolve slopes to about this level.
const SLOPE_FLOOR: f64 = 1e-8;

fn slice_slope(a: f64, delta: f64) -> f64 {
    let f = |x: f64| low_costs_ratio(x, x + delta);
    (f(a + SLOPE_STEP) - f(a - SLOPE_STEP)) / (2.0 * SLOPE_STEP)
}

/// Classifies the slice `c -> ratio(c, c + delta)` over the low-cost range
/// `c in [0, (1 - delta) / 2]` by the slope signs at its two ends.
pub fn ratio_slice_shape(delta: f64) -> Result<RatioShape> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Validation(format!("cost gap must lie in [0, 1), got {delta}")));
    }
    let left = slice_slope(0.0, delta);
    let right = slice_slope((1.0 - delta) / 2.0, delta);
    Ok(if left <= SLOPE_FLOOR {
        RatioShape::Decreasing
    } else if right >= -SLOPE_FLOOR {
        RatioShape::Increasing
    } else {
        RatioShape::Unimodal
    })
}

/// Gap thresholds between the decreasing, unimodal and increasing shapes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectRegions {
    /// Largest gap at which the slice is still decreasing.
    pub ei_upper: f64,
    /// Smallest gap at which the slice is increasing.
    pub cr_lower: f64,
}

fn bisect_shape(mut lo: f64, mut hi: f64, tolerance: f64, at_lo: impl Fn(RatioShape) -> bool) -> Result<f64> {
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if at_lo(ratio_slice_shape(mid)?) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn effect_regions(tolerance: f64) -> Result<EffectRegions> {
    if !(tolerance > 0.0 && tolerance <= 0.01) {
        return Err(Error::Validation(format!("tolerance must lie in (0, 0.01], got {tolerance}")));
    }
    let grid: Vec<f64> = (0..100).map(|k| k as f64 / 100.0).collect();
    let shapes = grid.iter().map(|&d| ratio_slice_shape(d)).collect::<Result<Vec<_>>>()?;
    let first = |pred: &dyn Fn(RatioShape) -> bool| shapes.iter().position(|&s| pred(s));

    let ei_idx = first(&|s| s != RatioShape::Decreasing)
        .ok_or_else(|| Error::Domain("slice never leaves the decreasing shape".into()))?;
    let cr_idx = first(&|s| s == RatioShape::Increasing)
        .ok_or_else(|| Error::Domain("slice never becomes increasing".into()))?;
    if ei_idx == 0 || cr_idx == 0 {
        return Err(Error::Domain("slice at zero gap is not decreasing".into()));
    }
    let ei_upper = bisect_shape(grid[ei_idx - 1], grid[ei_idx], tolerance, |s| s == RatioShape::Decreasing)?;
    let cr_lower = bisect_shape(grid[cr_idx - 1], grid[cr_idx], tolerance, |s| s != RatioShape::Increasing)?;
    Ok(EffectRegions { ei_upper, cr_lower })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioPoint {
    pub c_i: f64,
    pub c_j: f64,
    pub ratio: f64,
    pub regime: CostRegime,
}

/// The ratio along `c_j = c_i + delta` for `c_i` evenly spaced on `[0, 1]`.
pub fn ratio_curve(delta: f64, samples: usize) -> Result<Vec<RatioPoint>> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Validation(format!("delta must lie in [0, 1], got {delta}")));
    }
    if samples < 2 {
        return Err(Error::Validation(format!("need at least 2 samples, got {samples}")));
    }
    Ok((0..samples)
        .map(|k| {
            let c_i = k as f64 / (samples - 1) as f64;
            let c_j = c_i + delta;
            if c_i + c_j <= 1.0 {
                RatioPoint { c_i, c_j, ratio: low_costs_ratio(c_i, c_j), regime: CostRegime::LowCosts }
            } else {
                RatioPoint { c_i, c_j, ratio: high_comparable_ratio(delta), regime: CostRegime::HighComparable }
            }
        })
        .collect())
}
