//! Flat output records. Every float is rounded to 12 significant digits when a
//! record is built, so the printed text re-parses to the stored value.

use serde::{Deserialize, Serialize};

/// Rounds to 12 significant digits. Non-finite values pass through.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

fn opt(x: Option<f64>) -> Option<f64> {
    x.map(sig12)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumRecord {
    pub snr_regime: String,
    /// Cost regime; empty in the general SNR regime, which has no regime map.
    pub regime: Option<String>,
    /// `continuum`, `unique_interior`, `monopoly_corner` or `fixed_point`.
    pub outcome: String,
    pub g_total: f64,
    pub c_i: f64,
    pub c_j: f64,
    pub rho: Option<f64>,
    pub b_i: f64,
    pub b_j: f64,
    pub price_i: Option<f64>,
    pub price_j: Option<f64>,
    pub profit_i: f64,
    pub profit_j: f64,
    pub demand: f64,
    pub snr: f64,
    pub payoff: f64,
    pub iterations: Option<usize>,
    pub residual: Option<f64>,
}

impl EquilibriumRecord {
    pub(crate) fn rounded(mut self) -> Self {
        for x in [
            &mut self.g_total,
            &mut self.c_i,
            &mut self.c_j,
            &mut self.b_i,
            &mut self.b_j,
            &mut self.profit_i,
            &mut self.profit_j,
            &mut self.demand,
            &mut self.snr,
            &mut self.payoff,
        ] {
            *x = sig12(*x);
        }
        self.rho = opt(self.rho);
        self.price_i = opt(self.price_i);
        self.price_j = opt(self.price_j);
        self.residual = opt(self.residual);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioPointRecord {
    pub c_i: f64,
    pub c_j: f64,
    pub ratio: f64,
    pub regime: String,
}

impl From<&duopoly_core::coordinated::RatioPoint> for RatioPointRecord {
    fn from(p: &duopoly_core::coordinated::RatioPoint) -> Self {
        RatioPointRecord {
            c_i: sig12(p.c_i),
            c_j: sig12(p.c_j),
            ratio: sig12(p.ratio),
            regime: p.regime.label().into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinRatioRecord {
    pub grid_n: usize,
    pub points: usize,
    pub low_costs_min: f64,
    pub low_costs_argmin_c_i: f64,
    pub low_costs_argmin_c_j: f64,
    pub low_costs_limit: f64,
    pub high_comparable_min: f64,
    pub high_comparable_delta: f64,
    pub max_ratio: f64,
}

impl From<&duopoly_core::coordinated::MinRatioScan> for MinRatioRecord {
    fn from(s: &duopoly_core::coordinated::MinRatioScan) -> Self {
        MinRatioRecord {
            grid_n: s.grid_n,
            points: s.points,
            low_costs_min: sig12(s.low_costs_min),
            low_costs_argmin_c_i: sig12(s.low_costs_argmin.0),
            low_costs_argmin_c_j: sig12(s.low_costs_argmin.1),
            low_costs_limit: sig12(s.low_costs_limit),
            high_comparable_min: sig12(s.high_comparable_min),
            high_comparable_delta: sig12(s.high_comparable_delta),
            max_ratio: sig12(s.max_ratio),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectRegionsRecord {
    pub ei_upper: f64,
    pub cr_lower: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingCellRecord {
    pub b_i: f64,
    pub b_j: f64,
    /// `L` unique positive price, `M` no equilibrium, `H` zero price.
    pub label: String,
    pub price: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRecord {
    /// `investment`, `pricing` or `symmetric_pricing`.
    pub check: String,
    pub b_i: f64,
    pub b_j: f64,
    pub p_i: Option<f64>,
    pub p_j: Option<f64>,
    pub payoff_i: Option<f64>,
    pub payoff_j: Option<f64>,
    pub max_gain_i: Option<f64>,
    pub max_gain_j: Option<f64>,
    pub best_deviation_i: Option<f64>,
    pub best_deviation_j: Option<f64>,
    pub epsilon: f64,
    pub refined: Option<bool>,
    pub candidates: Option<usize>,
    pub survivors: Option<usize>,
    /// `certified`, `refuted`, `no_equilibrium_confirmed` or `survivor`.
    pub status: String,
}

impl VerifyRecord {
    pub(crate) fn rounded(mut self) -> Self {
        self.b_i = sig12(self.b_i);
        self.b_j = sig12(self.b_j);
        self.epsilon = sig12(self.epsilon);
        for x in [
            &mut self.p_i,
            &mut self.p_j,
            &mut self.payoff_i,
            &mut self.payoff_j,
            &mut self.max_gain_i,
            &mut self.max_gain_j,
            &mut self.best_deviation_i,
            &mut self.best_deviation_j,
        ] {
            *x = opt(*x);
        }
        self
    }

    pub fn passed(&self) -> bool {
        matches!(self.status.as_str(), "certified" | "no_equilibrium_confirmed")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_sig12_round_trips() {
        for x in [std::f64::consts::PI, 1e-300, -2.5e17, 0.1 + 0.2, 1.0 / 3.0] {
            let r = sig12(x);
            assert!((r - x).abs() <= 1e-11 * x.abs());
            assert_eq!(r.to_string().parse::<f64>().unwrap(), r);
            assert_eq!(sig12(r), r);
        }
        assert_eq!(sig12(0.0), 0.0);
    }
}
