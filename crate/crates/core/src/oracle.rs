//! Brute-force equilibrium checks.
//!
//! Payoffs are computed from stage III demand alone: pricing revenue from
//! [`realized_demand`], and investment profit from a clearing price found by
//! bisection on aggregate user demand. Nothing here calls the stage I or
//! stage II closed forms, so a certificate is independent evidence.

use rayon::prelude::*;

use crate::error::{require_positive, Error, Result};
use crate::model::{BandwidthPair, CostPair, Operator, PricePair, SnrRegime};
use crate::stage3_users::{optimal_demand, realized_demand};

/// A uniform grid of strategies together with the tolerance for certification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    lower: f64,
    upper: f64,
    n: usize,
    epsilon: f64,
}

impl GridSpec {
    pub fn new(lower: f64, upper: f64, n: usize, epsilon: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::Validation(format!("grid bounds must satisfy lower < upper, got [{lower}, {upper}]")));
        }
        if n < 50 {
            return Err(Error::Validation(format!("grid needs at least 50 points, got {n}")));
        }
        require_positive("epsilon", epsilon)?;
        Ok(GridSpec { lower, upper, n, epsilon })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn step(&self) -> f64 {
        (self.upper - self.lower) / (self.n - 1) as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        if k + 1 == self.n {
            self.upper
        } else {
            self.lower + k as f64 * self.step()
        }
    }
}

/// Default profit scale for epsilons: the total equilibrium supply `G e^-2`.
pub fn default_epsilon_scale(g_total: f64) -> f64 {
    g_total * (-2f64).exp()
}

/// Largest total investment for which the oracle evaluates stage I payoffs.
pub fn investment_cap(g_total: f64, regime: SnrRegime) -> f64 {
    match regime {
        SnrRegime::HighSnr => g_total * (-2f64).exp(),
        SnrRegime::General => crate::stage2_pricing::B_TH_FRACTION * g_total,
    }
}

/// Price grid from just above zero to two past the monopoly price of the
/// smaller positive supply.
pub fn pricing_grid(bw: &BandwidthPair, g_total: f64, regime: SnrRegime, n: usize, epsilon: f64) -> Result<GridSpec> {
    let smallest = [bw.b_i(), bw.b_j()].into_iter().filter(|b| *b > 0.0).fold(f64::INFINITY, f64::min);
    if !smallest.is_finite() {
        return Err(Error::Validation("at least one operator must lease bandwidth".into()));
    }
    let top = match regime {
        SnrRegime::HighSnr => (g_total / smallest).ln().max(0.0) + 2.0,
        SnrRegime::General => (g_total / smallest).ln_1p() + 2.0,
    };
    let lower = match regime {
        SnrRegime::HighSnr => 0.0,
        SnrRegime::General => top / (10.0 * n as f64),
    };
    GridSpec::new(lower, top, n, epsilon)
}

/// Evidence for or against a candidate being an epsilon-Nash equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NashCertificate {
    pub point: (f64, f64),
    pub payoff_i: f64,
    pub payoff_j: f64,
    /// Best improvement found for each operator, zero if none.
    pub max_gain_i: f64,
    pub max_gain_j: f64,
    /// Strategy achieving the gain; the candidate's own strategy if the gain is zero.
    pub best_deviation_i: f64,
    pub best_deviation_j: f64,
    pub epsilon: f64,
    /// Whether a local search at ten times the grid density was run.
    pub refined: bool,
    pub is_epsilon_nash: bool,
}

impl NashCertificate {
    pub fn max_gain(&self) -> f64 {
        self.max_gain_i.max(self.max_gain_j)
    }
}

/// Stage II profits `p Q - B C` at the given prices.
pub fn pricing_payoffs(
    bw: &BandwidthPair,
    g_total: f64,
    costs: &CostPair,
    regime: SnrRegime,
    prices: &PricePair,
) -> Result<(f64, f64)> {
    let q = realized_demand(g_total, bw, prices, regime)?;
    Ok((
        prices.p_i() * q.realized_i - bw.b_i() * costs.c_i(),
        prices.p_j() * q.realized_j - bw.b_j() * costs.c_j(),
    ))
}

/// Price at which aggregate user demand equals `supply`, by bisection.
pub fn market_clearing_price(supply: f64, g_total: f64, regime: SnrRegime) -> Result<f64> {
    require_positive("supply", supply)?;
    let demand = |p: f64| optimal_demand(g_total, p, regime);
    let mut lo = match regime {
        SnrRegime::HighSnr => {
            if demand(0.0)? <= supply {
                return Ok(0.0);
            }
            0.0
        }
        SnrRegime::General => 1e-300,
    };
    let mut hi = 1.0;
    while demand(hi)? > supply {
        lo = hi;
        hi *= 2.0;
        if hi > 700.0 {
            return Err(Error::Domain(format!("supply {supply} too small to clear")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if demand(mid)? > supply {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Stage I profits when both operators sell at the market clearing price.
pub fn investment_payoffs(
    costs: &CostPair,
    g_total: f64,
    regime: SnrRegime,
    bw: &BandwidthPair,
) -> Result<(f64, f64)> {
    let total = bw.total();
    if total == 0.0 {
        return Ok((0.0, 0.0));
    }
    let p = market_clearing_price(total, g_total, regime)?;
    let prices = PricePair::uniform(p)?;
    pricing_payoffs(bw, g_total, costs, regime, &prices)
}

/// Best point of `payoff` over `n` evenly spaced values in `[lo, hi]`.
/// Ties go to the lower value so the result does not depend on scheduling.
fn scan<F>(lo: f64, hi: f64, n: usize, payoff: F) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let step = if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
    let at = |k: usize| if k + 1 == n { hi } else { lo + k as f64 * step };
    let best = (0..n)
        .into_par_iter()
        .map(|k| payoff(at(k)).map(|v| (k, v)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
    Ok((at(best.0), best.1))
}

struct Deviation {
    gain: f64,
    strategy: f64,
    refined: bool,
}

/// Searches one operator's deviations over `[lo, hi]`, refining locally when
/// the best deviation found lies within two cells of the candidate.
fn best_deviation<F>(own: f64, base: f64, lo: f64, hi: f64, n: usize, epsilon: f64, payoff: F) -> Result<Deviation>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if hi < lo {
        return Ok(Deviation { gain: 0.0, strategy: own, refined: false });
    }
    let (mut x, mut v) = scan(lo, hi, n, &payoff)?;
    let step = (hi - lo) / (n - 1) as f64;
    let mut refined = false;
    if v - base > epsilon && (x - own).abs() <= 2.0 * step {
        refined = true;
        let (flo, fhi) = ((own - 2.0 * step).max(lo), (own + 2.0 * step).min(hi));
        let (fx, fv) = scan(flo, fhi, 41, &payoff)?;
        if fv > v {
            x = fx;
            v = fv;
        }
    }
    if v > base {
        Ok(Deviation { gain: v - base, strategy: x, refined })
    } else {
        Ok(Deviation { gain: 0.0, strategy: own, refined })
    }
}

fn certificate(point: (f64, f64), base: (f64, f64), di: Deviation, dj: Deviation, epsilon: f64) -> NashCertificate {
    NashCertificate {
        point,
        payoff_i: base.0,
        payoff_j: base.1,
        max_gain_i: di.gain,
        max_gain_j: dj.gain,
        best_deviation_i: di.strategy,
        best_deviation_j: dj.strategy,
        epsilon,
        refined: di.refined || dj.refined,
        is_epsilon_nash: di.gain.max(dj.gain) <= epsilon,
    }
}

/// Checks whether `candidate` prices form an epsilon-Nash equilibrium of the
/// pricing game for fixed bandwidths.
pub fn certify_pricing(
    bw: &BandwidthPair,
    g_total: f64,
    costs: &CostPair,
    regime: SnrRegime,
    grid: &GridSpec,
    candidate: &PricePair,
) -> Result<NashCertificate> {
    let base = pricing_payoffs(bw, g_total, costs, regime, candidate)?;
    let lower = match regime {
        SnrRegime::HighSnr => grid.lower,
        // Demand is unbounded at a zero price.
        SnrRegime::General => grid.lower.max(grid.step() * 1e-3),
    };
    let deviate = |op: Operator| {
        let other = candidate.get(op.other());
        let payoff = move |x: f64| -> Result<f64> {
            let prices = PricePair::from_parts(op, x, other)?;
            let (pi, pj) = pricing_payoffs(bw, g_total, costs, regime, &prices)?;
            Ok(if op == Operator::I { pi } else { pj })
        };
        let own_base = if op == Operator::I { base.0 } else { base.1 };
        best_deviation(candidate.get(op), own_base, lower, grid.upper, grid.n, grid.epsilon, payoff)
    };
    let di = deviate(Operator::I)?;
    let dj = deviate(Operator::J)?;
    Ok(certificate((candidate.p_i(), candidate.p_j()), base, di, dj, grid.epsilon))
}

/// Checks whether `candidate` investments form an epsilon-Nash equilibrium.
/// Deviations respect the coupled bound `B_i + B_j <= cap`.
pub fn certify_investment(
    costs: &CostPair,
    g_total: f64,
    regime: SnrRegime,
    grid: &GridSpec,
    candidate: &BandwidthPair,
) -> Result<NashCertificate> {
    let cap = investment_cap(g_total, regime);
    if candidate.total() > cap * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "candidate total {} exceeds the strategy space bound {cap}",
            candidate.total()
        )));
    }
    let base = investment_payoffs(costs, g_total, regime, candidate)?;
    let deviate = |op: Operator| {
        let other = candidate.get(op.other());
        let payoff = move |x: f64| -> Result<f64> {
            let bw = BandwidthPair::from_parts(op, x, other)?;
            let (pi, pj) = investment_payoffs(costs, g_total, regime, &bw)?;
            Ok(if op == Operator::I { pi } else { pj })
        };
        let own_base = if op == Operator::I { base.0 } else { base.1 };
        let hi = grid.upper.min((cap - other).max(0.0));
        best_deviation(candidate.get(op), own_base, grid.lower, hi, grid.n, grid.epsilon, payoff)
    };
    let di = deviate(Operator::I)?;
    let dj = deviate(Operator::J)?;
    Ok(certificate((candidate.b_i(), candidate.b_j()), base, di, dj, grid.epsilon))
}

/// Result of testing every symmetric price on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricRefutation {
    pub candidates: usize,
    /// Symmetric prices that passed certification.
    pub survivors: Vec<f64>,
    /// Smallest best-deviation gain over all candidates.
    pub min_gain: f64,
}

impl SymmetricRefutation {
    pub fn all_refuted(&self) -> bool {
        self.survivors.is_empty()
    }
}

/// Certifies every symmetric price pair on `grid`. In a region without a
/// pricing equilibrium each of them should be refuted.
pub fn refute_symmetric_pricing(
    bw: &BandwidthPair,
    g_total: f64,
    costs: &CostPair,
    regime: SnrRegime,
    grid: &GridSpec,
) -> Result<SymmetricRefutation> {
    let results = (0..grid.n)
        .into_par_iter()
        .map(|k| {
            let p = grid.point(k);
            if regime == SnrRegime::General && p <= 0.0 {
                return Ok(None);
            }
            let cert = certify_pricing(bw, g_total, costs, regime, grid, &PricePair::uniform(p)?)?;
            Ok(Some((p, cert)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut survivors = Vec::new();
    let mut min_gain = f64::INFINITY;
    let mut candidates = 0;
    for (p, cert) in results.into_iter().flatten() {
        candidates += 1;
        min_gain = min_gain.min(cert.max_gain());
        if cert.is_epsilon_nash {
            survivors.push(p);
        }
    }
    Ok(SymmetricRefutation { candidates, survivors, min_gain })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// State after each full round (operator `I` moves, then `J`), starting point first.
    pub steps: Vec<BandwidthPair>,
    pub terminal: BandwidthPair,
    pub converged: bool,
    pub cycled: bool,
    pub rounds: usize,
    /// Certification of the terminal point, when the dynamics converged.
    pub certificate: Option<NashCertificate>,
}

const STABLE_ROUNDS: usize = 3;

/// Alternating discrete best responses on the grid lattice.
pub fn best_response_dynamics(
    costs: &CostPair,
    g_total: f64,
    regime: SnrRegime,
    grid: &GridSpec,
    start: &BandwidthPair,
    max_iters: usize,
) -> Result<Trajectory> {
    let cap = investment_cap(g_total, regime);
    if start.total() > cap * (1.0 + 1e-12) {
        return Err(Error::Validation(format!("start total {} exceeds the strategy space bound {cap}", start.total())));
    }
    let limit = cap * (1.0 + 1e-12);
    let respond = |op: Operator, other: f64| -> Result<f64> {
        let feasible = (0..grid.n).map(|k| grid.point(k)).filter(|x| *x + other <= limit).collect::<Vec<_>>();
        let values = feasible
            .par_iter()
            .map(|&x| {
                let bw = BandwidthPair::from_parts(op, x, other)?;
                let (pi, pj) = investment_payoffs(costs, g_total, regime, &bw)?;
                Ok(if op == Operator::I { pi } else { pj })
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut best = (grid.lower, f64::NEG_INFINITY);
        for (x, v) in feasible.into_iter().zip(values) {
            if v > best.1 {
                best = (x, v);
            }
        }
        Ok(best.0)
    };

    let mut steps = vec![*start];
    let mut state = *start;
    let mut stable = 0;
    let mut cycled = false;
    let mut rounds = 0;
    while rounds < max_iters {
        rounds += 1;
        let bi = respond(Operator::I, state.b_j())?;
        let bj = respond(Operator::J, bi)?;
        let next = BandwidthPair::new(bi, bj)?;
        if next == state {
            stable += 1;
        } else {
            stable = 0;
            if steps.contains(&next) {
                cycled = true;
            }
        }
        steps.push(next);
        state = next;
        if stable >= STABLE_ROUNDS || cycled {
            break;
        }
    }
    let converged = stable >= STABLE_ROUNDS;
    let certificate = if converged {
        Some(certify_investment(costs, g_total, regime, grid, &state)?)
    } else {
        None
    };
    Ok(Trajectory { steps, terminal: state, converged, cycled, rounds, certificate })
}
