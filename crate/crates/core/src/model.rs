//! Domain types shared by all stages of the game.

use std::collections::HashSet;
use std::fmt;

use crate::error::{require_non_negative, require_positive, Error, Result};

/// One of the two competing operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operator {
    I,
    J,
}

impl Operator {
    pub fn other(self) -> Operator {
        match self {
            Operator::I => Operator::J,
            Operator::J => Operator::I,
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Operator::I => "i",
            Operator::J => "j",
        })
    }
}

/// Physical-layer parameters a user's characteristic is derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams {
    pub p_max: f64,
    pub h: f64,
    pub n0: f64,
}

/// A user, summarized by its wireless characteristic `g = p_max * h / n0`.
#[derive(Debug, Clone, PartialEq)]
pub struct UserProfile {
    id: String,
    radio: Option<RadioParams>,
    g: f64,
}

impl UserProfile {
    pub fn new(id: impl Into<String>, p_max: f64, h: f64, n0: f64) -> Result<Self> {
        let p_max = require_positive("p_max", p_max)?;
        let h = require_positive("h", h)?;
        let n0 = require_positive("n0", n0)?;
        let g = require_positive("g", p_max * h / n0)?;
        Ok(UserProfile { id: id.into(), radio: Some(RadioParams { p_max, h, n0 }), g })
    }

    /// Builds a user directly from its characteristic.
    pub fn from_characteristic(id: impl Into<String>, g: f64) -> Result<Self> {
        let g = require_positive("g", g)?;
        Ok(UserProfile { id: id.into(), radio: None, g })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn radio(&self) -> Option<RadioParams> {
        self.radio
    }
}

/// A non-empty set of users with unique ids, kept sorted by id.
#[derive(Debug, Clone, PartialEq)]
pub struct Market {
    users: Vec<UserProfile>,
    g_total: f64,
}

impl Market {
    pub fn new(mut users: Vec<UserProfile>) -> Result<Self> {
        if users.is_empty() {
            return Err(Error::Validation("market needs at least one user".into()));
        }
        let mut seen = HashSet::new();
        for u in &users {
            if !seen.insert(u.id.as_str()) {
                return Err(Error::Validation(format!("duplicate user id {:?}", u.id)));
            }
        }
        users.sort_by(|a, b| a.id.cmp(&b.id));
        let g_total = users.iter().map(|u| u.g).sum();
        Ok(Market { users, g_total })
    }

    /// A market with a single representative user carrying the whole aggregate.
    pub fn from_aggregate(g_total: f64) -> Result<Self> {
        Market::new(vec![UserProfile::from_characteristic("aggregate", g_total)?])
    }

    pub fn users(&self) -> &[UserProfile] {
        &self.users
    }

    pub fn g_total(&self) -> f64 {
        self.g_total
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }
}

/// Unit leasing costs of the two operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostPair {
    c_i: f64,
    c_j: f64,
}

impl CostPair {
    pub fn new(c_i: f64, c_j: f64) -> Result<Self> {
        Ok(CostPair { c_i: require_positive("c_i", c_i)?, c_j: require_positive("c_j", c_j)? })
    }

    pub fn c_i(&self) -> f64 {
        self.c_i
    }

    pub fn c_j(&self) -> f64 {
        self.c_j
    }

    pub fn get(&self, op: Operator) -> f64 {
        match op {
            Operator::I => self.c_i,
            Operator::J => self.c_j,
        }
    }

    pub fn swapped(&self) -> CostPair {
        CostPair { c_i: self.c_j, c_j: self.c_i }
    }

    pub fn min(&self) -> f64 {
        self.c_i.min(self.c_j)
    }

    pub fn regime(&self) -> CostRegime {
        classify_cost_regime(self)
    }
}

/// Leased bandwidths of the two operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthPair {
    b_i: f64,
    b_j: f64,
}

impl BandwidthPair {
    pub fn new(b_i: f64, b_j: f64) -> Result<Self> {
        Ok(BandwidthPair {
            b_i: require_non_negative("b_i", b_i)?,
            b_j: require_non_negative("b_j", b_j)?,
        })
    }

    pub(crate) fn from_parts(op: Operator, own: f64, other: f64) -> Result<Self> {
        match op {
            Operator::I => BandwidthPair::new(own, other),
            Operator::J => BandwidthPair::new(other, own),
        }
    }

    pub fn b_i(&self) -> f64 {
        self.b_i
    }

    pub fn b_j(&self) -> f64 {
        self.b_j
    }

    pub fn get(&self, op: Operator) -> f64 {
        match op {
            Operator::I => self.b_i,
            Operator::J => self.b_j,
        }
    }

    pub fn total(&self) -> f64 {
        self.b_i + self.b_j
    }

    pub fn scaled(&self, k: f64) -> Result<BandwidthPair> {
        BandwidthPair::new(self.b_i * k, self.b_j * k)
    }
}

/// Unit prices announced by the two operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricePair {
    p_i: f64,
    p_j: f64,
}

impl PricePair {
    pub fn new(p_i: f64, p_j: f64) -> Result<Self> {
        Ok(PricePair { p_i: require_non_negative("p_i", p_i)?, p_j: require_non_negative("p_j", p_j)? })
    }

    pub fn uniform(p: f64) -> Result<Self> {
        PricePair::new(p, p)
    }

    pub(crate) fn from_parts(op: Operator, own: f64, other: f64) -> Result<Self> {
        match op {
            Operator::I => PricePair::new(own, other),
            Operator::J => PricePair::new(other, own),
        }
    }

    pub fn p_i(&self) -> f64 {
        self.p_i
    }

    pub fn p_j(&self) -> f64 {
        self.p_j
    }

    pub fn get(&self, op: Operator) -> f64 {
        match op {
            Operator::I => self.p_i,
            Operator::J => self.p_j,
        }
    }
}

/// Cost regions that determine the shape of the investment equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CostRegime {
    /// `c_i + c_j <= 1`: a continuum of equilibria.
    LowCosts,
    /// `c_i + c_j > 1` and `|c_i - c_j| <= 1`: a unique interior equilibrium.
    HighComparable,
    /// `|c_i - c_j| > 1`: only the cheaper operator invests.
    HighIncomparable { survivor: Operator },
}

impl CostRegime {
    pub fn label(&self) -> &'static str {
        match self {
            CostRegime::LowCosts => "low_costs",
            CostRegime::HighComparable => "high_comparable",
            CostRegime::HighIncomparable { .. } => "high_incomparable",
        }
    }
}

impl fmt::Display for CostRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub fn classify_cost_regime(costs: &CostPair) -> CostRegime {
    let (ci, cj) = (costs.c_i, costs.c_j);
    if ci + cj <= 1.0 {
        CostRegime::LowCosts
    } else if (cj - ci).abs() <= 1.0 {
        CostRegime::HighComparable
    } else if ci < cj {
        CostRegime::HighIncomparable { survivor: Operator::I }
    } else {
        CostRegime::HighIncomparable { survivor: Operator::J }
    }
}

/// Which rate model users apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SnrRegime {
    /// `w ln(g / w)`, accurate when every user's SNR is large.
    HighSnr,
    /// `w ln(1 + g / w)`.
    General,
}

impl SnrRegime {
    pub fn label(&self) -> &'static str {
        match self {
            SnrRegime::HighSnr => "high_snr",
            SnrRegime::General => "general",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_user_characteristic() {
        let u = UserProfile::new("a", 2.0, 0.5, 0.25).unwrap();
        assert_eq!(u.g(), 4.0);
        assert!(UserProfile::new("a", 0.0, 1.0, 1.0).is_err());
        assert!(UserProfile::from_characteristic("a", -1.0).is_err());
    }

    #[test]
    fn test_market_orders_and_sums() {
        let m = Market::new(vec![
            UserProfile::from_characteristic("b", 2.0).unwrap(),
            UserProfile::from_characteristic("a", 1.0).unwrap(),
        ])
        .unwrap();
        assert_eq!(m.users()[0].id(), "a");
        assert_eq!(m.g_total(), 3.0);
        assert!(Market::new(vec![]).is_err());
        let dup = vec![
            UserProfile::from_characteristic("a", 1.0).unwrap(),
            UserProfile::from_characteristic("a", 2.0).unwrap(),
        ];
        assert!(Market::new(dup).is_err());
    }

    #[test]
    fn test_pair_validation() {
        assert!(CostPair::new(0.0, 1.0).is_err());
        assert!(CostPair::new(f64::NAN, 1.0).is_err());
        assert!(BandwidthPair::new(-0.1, 1.0).is_err());
        assert!(BandwidthPair::new(0.0, 0.0).is_ok());
        assert!(PricePair::new(1.0, -1.0).is_err());
    }

    #[test]
    fn test_classify_examples() {
        let c = |a, b| CostPair::new(a, b).unwrap().regime();
        assert_eq!(c(0.3, 0.4), CostRegime::LowCosts);
        assert_eq!(c(1.0, 1.0), CostRegime::HighComparable);
        assert_eq!(c(0.5, 2.0), CostRegime::HighIncomparable { survivor: Operator::I });
        assert_eq!(c(2.0, 0.5), CostRegime::HighIncomparable { survivor: Operator::J });
    }

    #[test]
    fn test_classify_boundaries() {
        let c = |a, b| CostPair::new(a, b).unwrap().regime();
        assert_eq!(c(0.5, 0.5), CostRegime::LowCosts);
        assert_eq!(c(0.25, 0.75), CostRegime::LowCosts);
        assert_eq!(c(0.5, 1.5), CostRegime::HighComparable);
        assert_eq!(c(1.5, 0.5), CostRegime::HighComparable);
    }
}
