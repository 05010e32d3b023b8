//! Stage II: price competition for fixed leased bandwidths.

use crate::error::{require_positive, Error, Result};
use crate::model::{BandwidthPair, CostPair, SnrRegime};
use crate::roots::{solve_monotone, Slope};
use crate::stage3_users::{price_for_snr, solve_h};

/// Supply threshold of the general regime, as a fraction of `G`.
pub const B_TH_FRACTION: f64 = 0.462;

/// Monopoly price of the general regime once supply exceeds the threshold.
pub const GENERAL_SATURATION_PRICE: f64 = 0.468;

/// Relative slack when testing a total supply against a region boundary, so
/// that points built to sit exactly on the boundary are not pushed out by rounding.
const BOUNDARY_RTOL: f64 = 1e-12;

pub fn b_threshold(g_total: f64) -> f64 {
    B_TH_FRACTION * g_total
}

/// Largest total supply for which a positive pricing equilibrium exists.
pub fn supply_cap(g_total: f64, regime: SnrRegime) -> f64 {
    match regime {
        SnrRegime::HighSnr => g_total * (-2f64).exp(),
        SnrRegime::General => b_threshold(g_total),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PricingOutcome {
    /// Both operators charge `price` and sell their whole supply.
    UniquePositive { price: f64, profits: (f64, f64) },
    /// Supply is too large for a positive price and too small for a zero one.
    NoEquilibrium,
    /// Both operators give bandwidth away and lose their leasing cost.
    ZeroPrice { profits: (f64, f64) },
}

/// Price that clears total supply `s`, valid whenever `s` is below the cap.
pub fn clearing_price(s: f64, g_total: f64, regime: SnrRegime) -> f64 {
    match regime {
        SnrRegime::HighSnr => (g_total / s).ln() - 1.0,
        SnrRegime::General => (g_total / s).ln_1p() - g_total / (s + g_total),
    }
}

/// Revenue-maximizing price of a single operator holding bandwidth `b`.
pub fn monopolist_price(b: f64, g_total: f64, regime: SnrRegime) -> Result<f64> {
    require_positive("b", b)?;
    require_positive("g_total", g_total)?;
    let capped = b <= supply_cap(g_total, regime) * (1.0 + BOUNDARY_RTOL);
    Ok(match (regime, capped) {
        (_, true) => clearing_price(b, g_total, regime),
        (SnrRegime::HighSnr, false) => 1.0,
        (SnrRegime::General, false) => GENERAL_SATURATION_PRICE,
    })
}

pub fn pricing_equilibrium(
    bw: &BandwidthPair,
    g_total: f64,
    costs: &CostPair,
    regime: SnrRegime,
) -> Result<PricingOutcome> {
    require_positive("g_total", g_total)?;
    let (bi, bj) = (bw.b_i(), bw.b_j());
    if bi == 0.0 && bj == 0.0 {
        return Err(Error::Validation("at least one operator must lease bandwidth".into()));
    }
    let profits_at = |p: f64, qi: f64, qj: f64| (p * qi - bi * costs.c_i(), p * qj - bj * costs.c_j());

    if bi == 0.0 || bj == 0.0 {
        let b = bi + bj;
        let price = monopolist_price(b, g_total, regime)?;
        let sold = b.min(g_total / snr(price, regime)?);
        let (qi, qj) = if bi > 0.0 { (sold, 0.0) } else { (0.0, sold) };
        return Ok(PricingOutcome::UniquePositive { price, profits: profits_at(price, qi, qj) });
    }

    let total = bi + bj;
    if total <= supply_cap(g_total, regime) * (1.0 + BOUNDARY_RTOL) {
        let price = clearing_price(total, g_total, regime);
        return Ok(PricingOutcome::UniquePositive { price, profits: profits_at(price, bi, bj) });
    }
    if regime == SnrRegime::HighSnr && bi.min(bj) >= g_total * (-1f64).exp() {
        return Ok(PricingOutcome::ZeroPrice { profits: profits_at(0.0, 0.0, 0.0) });
    }
    Ok(PricingOutcome::NoEquilibrium)
}

fn snr(p: f64, regime: SnrRegime) -> Result<f64> {
    crate::stage3_users::user_snr(p, regime)
}

/// Where the general-regime monopoly revenue `G p / H(p)` peaks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevenuePeak {
    pub price: f64,
    pub snr: f64,
    /// Supply sold at the peak, `G / H`.
    pub b_th: f64,
}

/// Locates the revenue peak numerically, as a check on the printed threshold.
///
/// With `p` written as a function of `H`, the derivative of `p/H` vanishes
/// where `2H^2 + H = (1+H)^2 ln(1+H)`.
pub fn revenue_peak(g_total: f64) -> Result<RevenuePeak> {
    require_positive("g_total", g_total)?;
    let f = |h: f64| 2.0 * h * h + h - (1.0 + h) * (1.0 + h) * h.ln_1p();
    let df = |h: f64| 4.0 * h + 1.0 - 2.0 * (1.0 + h) * h.ln_1p() - (1.0 + h);
    let root = solve_monotone(f, df, 1.5, 10.0, Slope::Decreasing, 1e-14, 200);
    let h = root.x;
    let price = price_for_snr(h);
    let check = solve_h(price)?;
    Ok(RevenuePeak { price, snr: check.h_of_p, b_th: g_total / check.h_of_p })
}
