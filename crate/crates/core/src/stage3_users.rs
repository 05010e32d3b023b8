//! Stage III: user demand, payoff and SNR, and the split of demand between
//! the two operators.

use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::model::{BandwidthPair, Market, Operator, PricePair, SnrRegime};
use crate::roots::{solve_monotone, Slope};

const H_TOLERANCE: f64 = 1e-12;
const H_MAX_ITER: usize = 200;

/// The general-regime SNR `H(p)` at a given price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointSolution {
    pub p: f64,
    pub h_of_p: f64,
    /// `|ln(1+H) - H/(1+H) - p|` at the returned `H`.
    pub residual: f64,
}

/// Price at which a general-regime user settles on SNR `h`.
pub fn price_for_snr(h: f64) -> f64 {
    h.ln_1p() - h / (1.0 + h)
}

/// Solves `ln(1+H) - H/(1+H) = p` for the unique positive `H`.
pub fn solve_h(p: f64) -> Result<FixedPointSolution> {
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::Domain(format!("H(p) needs a positive finite price, got {p}")));
    }
    let hi = 10f64.max(3.0 * (1.0 + p).exp());
    if !hi.is_finite() {
        return Err(Error::Domain(format!("price {p} is too large to resolve H(p)")));
    }
    let root = solve_monotone(
        |h| price_for_snr(h) - p,
        |h| h / ((1.0 + h) * (1.0 + h)),
        1e-12,
        hi,
        Slope::Increasing,
        H_TOLERANCE,
        H_MAX_ITER,
    );
    Ok(FixedPointSolution { p, h_of_p: root.x, residual: root.residual })
}

fn snr_at(p: f64, regime: SnrRegime) -> Result<f64> {
    match regime {
        SnrRegime::HighSnr => {
            require_non_negative("price", p)?;
            Ok((1.0 + p).exp())
        }
        SnrRegime::General => {
            if p == 0.0 {
                return Err(Error::Domain("unbounded demand at zero price in the general regime".into()));
            }
            Ok(solve_h(p)?.h_of_p)
        }
    }
}

/// Achievable rate in nats for characteristic `g` on bandwidth `w`.
pub fn rate(g: f64, w: f64, regime: SnrRegime) -> Result<f64> {
    require_positive("g", g)?;
    require_non_negative("w", w)?;
    if w == 0.0 {
        return Ok(0.0);
    }
    Ok(match regime {
        SnrRegime::HighSnr => w * (g / w).ln(),
        SnrRegime::General => w * (g / w).ln_1p(),
    })
}

/// Payoff `rate - p w` of a user buying `w` at price `p`.
pub fn payoff_at(g: f64, p: f64, w: f64, regime: SnrRegime) -> Result<f64> {
    require_non_negative("price", p)?;
    Ok(rate(g, w, regime)? - p * w)
}

/// Payoff-maximizing bandwidth of a user with characteristic `g`.
pub fn optimal_demand(g: f64, p: f64, regime: SnrRegime) -> Result<f64> {
    require_positive("g", g)?;
    Ok(g / snr_at(p, regime)?)
}

/// Payoff at the optimal demand.
pub fn user_payoff(g: f64, p: f64, regime: SnrRegime) -> Result<f64> {
    require_positive("g", g)?;
    let s = snr_at(p, regime)?;
    Ok(match regime {
        SnrRegime::HighSnr => g / s,
        SnrRegime::General => g / s * (s.ln_1p() - p),
    })
}

/// SNR a user reaches at the optimal demand; the same for every user.
pub fn user_snr(p: f64, regime: SnrRegime) -> Result<f64> {
    snr_at(p, regime)
}

/// Share of a user's demand served by one operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    pub id: String,
    /// Fraction of the user's characteristic mass served, in `(0, 1]`.
    pub fraction: f64,
    pub bandwidth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemandSplit {
    pub preferred_i: f64,
    pub preferred_j: f64,
    pub realized_i: f64,
    pub realized_j: f64,
    pub preferred_set_i: Vec<String>,
    pub preferred_set_j: Vec<String>,
    pub realized_set_i: Vec<Membership>,
    pub realized_set_j: Vec<Membership>,
}

/// Aggregate preferred and realized demand for both operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateDemand {
    pub preferred_i: f64,
    pub preferred_j: f64,
    pub realized_i: f64,
    pub realized_j: f64,
}

impl AggregateDemand {
    pub fn realized(&self, op: Operator) -> f64 {
        match op {
            Operator::I => self.realized_i,
            Operator::J => self.realized_j,
        }
    }
}

/// Demand totals for a market of aggregate characteristic `g_total`.
///
/// Users prefer the cheaper operator. If its supply binds, the users it cannot
/// serve buy from the other operator at that operator's price. At equal prices
/// the preferred demand splits evenly and either operator absorbs what the
/// other cannot serve.
pub fn realized_demand(
    g_total: f64,
    bw: &BandwidthPair,
    prices: &PricePair,
    regime: SnrRegime,
) -> Result<AggregateDemand> {
    require_positive("g_total", g_total)?;
    let (pi, pj) = (prices.p_i(), prices.p_j());
    let (bi, bj) = (bw.b_i(), bw.b_j());

    if pi == pj {
        let half = g_total / snr_at(pi, regime)? / 2.0;
        return Ok(AggregateDemand {
            preferred_i: half,
            preferred_j: half,
            realized_i: bi.min(half + (half - bj).max(0.0)),
            realized_j: bj.min(half + (half - bi).max(0.0)),
        });
    }

    let low = if pi < pj { Operator::I } else { Operator::J };
    let (b_low, b_high) = (bw.get(low), bw.get(low.other()));
    let s_low = snr_at(prices.get(low), regime)?;
    let preferred = g_total / s_low;
    let (q_low, q_high) = if b_low >= preferred {
        (preferred, 0.0)
    } else {
        let unserved = (g_total - b_low * s_low).max(0.0);
        let overflow = unserved / snr_at(prices.get(low.other()), regime)?;
        (b_low, b_high.min(overflow))
    };
    Ok(match low {
        Operator::I => AggregateDemand { preferred_i: preferred, preferred_j: 0.0, realized_i: q_low, realized_j: q_high },
        Operator::J => AggregateDemand { preferred_i: 0.0, preferred_j: preferred, realized_i: q_high, realized_j: q_low },
    })
}

/// Serves `need` bandwidth from users in `order`, consuming their remaining mass.
fn fill(
    market: &Market,
    remaining: &mut [f64],
    order: &[usize],
    mut need: f64,
    per_unit: f64,
) -> Vec<Membership> {
    let users = market.users();
    let slack = 1e-15 * market.g_total() * per_unit;
    let mut served = Vec::new();
    for &k in order {
        if need <= slack {
            break;
        }
        let full = users[k].g() * per_unit;
        let available = remaining[k] * full;
        if available <= 0.0 {
            continue;
        }
        let take = available.min(need);
        let fraction = take / full;
        remaining[k] = (remaining[k] - fraction).max(0.0);
        need -= take;
        served.push(Membership { id: users[k].id().to_string(), fraction, bandwidth: take });
    }
    served
}

/// Splits the market's demand between the operators, down to individual users.
///
/// Totals follow [`realized_demand`]. Rationed users are chosen in id order,
/// with one marginal user served fractionally. At equal prices users are
/// assigned to the two preferred sets alternately in id order.
pub fn demand_split(
    market: &Market,
    bw: &BandwidthPair,
    prices: &PricePair,
    regime: SnrRegime,
) -> Result<DemandSplit> {
    let agg = realized_demand(market.g_total(), bw, prices, regime)?;
    let n = market.len();
    let ids = |idx: &[usize]| idx.iter().map(|&k| market.users()[k].id().to_string()).collect();
    let mut remaining = vec![1.0; n];
    let all: Vec<usize> = (0..n).collect();

    let d_i = 1.0 / snr_at(prices.p_i(), regime)?;
    let d_j = 1.0 / snr_at(prices.p_j(), regime)?;

    if prices.p_i() == prices.p_j() {
        let pref_i: Vec<usize> = all.iter().copied().filter(|k| k % 2 == 0).collect();
        let pref_j: Vec<usize> = all.iter().copied().filter(|k| k % 2 == 1).collect();
        let mass = |idx: &[usize]| idx.iter().map(|&k| market.users()[k].g()).sum::<f64>();
        let own_i = agg.realized_i.min(mass(&pref_i) * d_i);
        let own_j = agg.realized_j.min(mass(&pref_j) * d_j);
        let mut set_i = fill(market, &mut remaining, &pref_i, own_i, d_i);
        let mut set_j = fill(market, &mut remaining, &pref_j, own_j, d_j);
        set_i.extend(fill(market, &mut remaining, &pref_j, agg.realized_i - own_i, d_i));
        set_j.extend(fill(market, &mut remaining, &pref_i, agg.realized_j - own_j, d_j));
        return Ok(DemandSplit {
            preferred_i: agg.preferred_i,
            preferred_j: agg.preferred_j,
            realized_i: agg.realized_i,
            realized_j: agg.realized_j,
            preferred_set_i: ids(&pref_i),
            preferred_set_j: ids(&pref_j),
            realized_set_i: set_i,
            realized_set_j: set_j,
        });
    }

    let low_is_i = prices.p_i() < prices.p_j();
    let (q_low, q_high, d_low, d_high) = if low_is_i {
        (agg.realized_i, agg.realized_j, d_i, d_j)
    } else {
        (agg.realized_j, agg.realized_i, d_j, d_i)
    };
    let set_low = fill(market, &mut remaining, &all, q_low, d_low);
    let set_high = fill(market, &mut remaining, &all, q_high, d_high);
    let (realized_set_i, realized_set_j) = if low_is_i { (set_low, set_high) } else { (set_high, set_low) };
    let (preferred_set_i, preferred_set_j) = if low_is_i { (ids(&all), Vec::new()) } else { (Vec::new(), ids(&all)) };
    Ok(DemandSplit {
        preferred_i: agg.preferred_i,
        preferred_j: agg.preferred_j,
        realized_i: agg.realized_i,
        realized_j: agg.realized_j,
        preferred_set_i,
        preferred_set_j,
        realized_set_i,
        realized_set_j,
    })
}
