use duopoly_core::coordinated::{effect_regions, min_ratio_scan, ratio_curve};
use duopoly_core::oracle::{
    certify_investment, certify_pricing, default_epsilon_scale, investment_cap, pricing_grid,
    refute_symmetric_pricing, GridSpec, NashCertificate,
};
use duopoly_core::stage1_investment::{
    continuum_point, equilibrium_summary, investment_equilibrium, investment_equilibrium_general, InvestmentOutcome,
};
use duopoly_core::stage2_pricing::{pricing_equilibrium, PricingOutcome};
use duopoly_core::{BandwidthPair, CostPair, CostRegime, PricePair, SnrRegime};

use crate::args::{Scenario, SweepKind};
use crate::failure::Failure;
use crate::output::emit;
use crate::records::{
    sig12, EffectRegionsRecord, EquilibriumRecord, MinRatioRecord, PricingCellRecord, RatioPointRecord, VerifyRecord,
};

fn outcome_label(outcome: &InvestmentOutcome) -> &'static str {
    match outcome {
        InvestmentOutcome::Continuum { .. } => "continuum",
        InvestmentOutcome::UniqueInterior { .. } => "unique_interior",
        InvestmentOutcome::MonopolyCorner { .. } => "monopoly_corner",
    }
}

pub fn equilibrium_record(s: &Scenario) -> Result<EquilibriumRecord, Failure> {
    let costs = s.costs()?;
    let g = s.g_total()?;
    let record = match s.regime {
        SnrRegime::HighSnr => {
            let outcome = investment_equilibrium(&costs, g)?;
            let sum = equilibrium_summary(&costs, g, s.rho)?;
            EquilibriumRecord {
                snr_regime: s.regime.label().into(),
                regime: Some(sum.regime.label().into()),
                outcome: outcome_label(&outcome).into(),
                g_total: g,
                c_i: costs.c_i(),
                c_j: costs.c_j(),
                rho: sum.rho,
                b_i: sum.investments.b_i(),
                b_j: sum.investments.b_j(),
                price_i: sum.price_i,
                price_j: sum.price_j,
                profit_i: sum.profits.0,
                profit_j: sum.profits.1,
                demand: sum.per_user.demand,
                snr: sum.per_user.snr,
                payoff: sum.per_user.payoff,
                iterations: None,
                residual: None,
            }
        }
        SnrRegime::General => {
            if s.rho.is_some() {
                return Err(Failure::Validation("rho applies only to the high-SNR low-cost regime".into()));
            }
            let eq = investment_equilibrium_general(&costs, g)?;
            let posted = |b: f64| (b > 0.0).then_some(eq.price);
            EquilibriumRecord {
                snr_regime: s.regime.label().into(),
                regime: None,
                outcome: "fixed_point".into(),
                g_total: g,
                c_i: costs.c_i(),
                c_j: costs.c_j(),
                rho: None,
                b_i: eq.bw.b_i(),
                b_j: eq.bw.b_j(),
                price_i: posted(eq.bw.b_i()),
                price_j: posted(eq.bw.b_j()),
                profit_i: eq.profits.0,
                profit_j: eq.profits.1,
                demand: eq.per_user.demand,
                snr: eq.per_user.snr,
                payoff: eq.per_user.payoff,
                iterations: Some(eq.iterations),
                residual: Some(eq.residual),
            }
        }
    };
    Ok(record.rounded())
}

pub fn cmd_equilibrium(s: &Scenario) -> Result<(), Failure> {
    let record = equilibrium_record(s)?;
    emit(&[record], s.format, s.out.as_deref())
}

fn need<T>(value: Option<T>, flag: &str) -> Result<T, Failure> {
    value.ok_or_else(|| Failure::Validation(format!("--{flag} is required for this sweep")))
}

pub fn cmd_sweep(kind: SweepKind, s: &Scenario) -> Result<(), Failure> {
    let (format, out) = (s.format, s.out.as_deref());
    match kind {
        SweepKind::RatioCurve => {
            let rows: Vec<RatioPointRecord> =
                ratio_curve(need(s.delta, "delta")?, s.n.unwrap_or(200))?.iter().map(Into::into).collect();
            emit(&rows, format, out)
        }
        SweepKind::MinRatio => {
            let scan = min_ratio_scan(s.n.unwrap_or(500))?;
            emit(&[MinRatioRecord::from(&scan)], format, out)
        }
        SweepKind::EffectRegions => {
            let tolerance = s.tolerance.unwrap_or(1e-6);
            let r = effect_regions(tolerance)?;
            let row = EffectRegionsRecord {
                ei_upper: sig12(r.ei_upper),
                cr_lower: sig12(r.cr_lower),
                tolerance: sig12(tolerance),
            };
            emit(&[row], format, out)
        }
        SweepKind::PricingMap => emit(&pricing_map(s)?, format, out),
    }
}

/// Region labels over cell centres of an `n x n` bandwidth grid.
pub fn pricing_map(s: &Scenario) -> Result<Vec<PricingCellRecord>, Failure> {
    let n = s.n.unwrap_or(100);
    if n == 0 {
        return Err(Failure::Validation("--n must be positive".into()));
    }
    let g = s.g_or_unit();
    let b_max = s.b_max.unwrap_or(0.6);
    if !(b_max > 0.0 && b_max.is_finite()) {
        return Err(Failure::Validation(format!("b_max must be positive, got {b_max}")));
    }
    let costs = s.costs_or_unit()?;
    let step = b_max * g / n as f64;
    let mut rows = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let bw = BandwidthPair::new((a as f64 + 0.5) * step, (b as f64 + 0.5) * step)?;
            let (label, price) = match pricing_equilibrium(&bw, g, &costs, s.regime)? {
                PricingOutcome::UniquePositive { price, .. } => ("L", Some(sig12(price))),
                PricingOutcome::NoEquilibrium => ("M", None),
                PricingOutcome::ZeroPrice { .. } => ("H", Some(0.0)),
            };
            // The general regime has no zero-price region; its no-equilibrium
            // region is everything above the threshold.
            let label = if s.regime == SnrRegime::General && label == "M" { "H" } else { label };
            rows.push(PricingCellRecord { b_i: sig12(bw.b_i()), b_j: sig12(bw.b_j()), label: label.into(), price });
        }
    }
    Ok(rows)
}

fn certificate_row(check: &str, bw: &BandwidthPair, prices: Option<&PricePair>, c: &NashCertificate) -> VerifyRecord {
    VerifyRecord {
        check: check.into(),
        b_i: bw.b_i(),
        b_j: bw.b_j(),
        p_i: prices.map(PricePair::p_i),
        p_j: prices.map(PricePair::p_j),
        payoff_i: Some(c.payoff_i),
        payoff_j: Some(c.payoff_j),
        max_gain_i: Some(c.max_gain_i),
        max_gain_j: Some(c.max_gain_j),
        best_deviation_i: Some(c.best_deviation_i),
        best_deviation_j: Some(c.best_deviation_j),
        epsilon: c.epsilon,
        refined: Some(c.refined),
        candidates: None,
        survivors: None,
        status: if c.is_epsilon_nash { "certified" } else { "refuted" }.into(),
    }
    .rounded()
}

/// Checks the pricing stage at fixed bandwidths.
fn verify_pricing(bw: &BandwidthPair, g: f64, costs: &CostPair, s: &Scenario, eps: f64) -> Result<VerifyRecord, Failure> {
    let grid = pricing_grid(bw, g, s.regime, s.grid_n, eps)?;
    let price = match pricing_equilibrium(bw, g, costs, s.regime)? {
        PricingOutcome::UniquePositive { price, .. } => price,
        PricingOutcome::ZeroPrice { .. } => 0.0,
        PricingOutcome::NoEquilibrium => {
            let scan = refute_symmetric_pricing(bw, g, costs, s.regime, &grid)?;
            let status = if scan.all_refuted() { "no_equilibrium_confirmed" } else { "survivor" };
            return Ok(VerifyRecord {
                check: "symmetric_pricing".into(),
                b_i: bw.b_i(),
                b_j: bw.b_j(),
                p_i: scan.survivors.first().copied(),
                p_j: scan.survivors.first().copied(),
                payoff_i: None,
                payoff_j: None,
                max_gain_i: Some(scan.min_gain),
                max_gain_j: None,
                best_deviation_i: None,
                best_deviation_j: None,
                epsilon: eps,
                refined: None,
                candidates: Some(scan.candidates),
                survivors: Some(scan.survivors.len()),
                status: status.into(),
            }
            .rounded());
        }
    };
    let prices = PricePair::uniform(price)?;
    let cert = certify_pricing(bw, g, costs, s.regime, &grid, &prices)?;
    Ok(certificate_row("pricing", bw, Some(&prices), &cert))
}

/// The stage I candidate the analytic solution (or an injected rho) names.
fn investment_candidate(costs: &CostPair, g: f64, s: &Scenario) -> Result<BandwidthPair, Failure> {
    match s.regime {
        SnrRegime::General => {
            if s.rho.is_some() {
                return Err(Failure::Validation("rho applies only to the high-SNR low-cost regime".into()));
            }
            Ok(investment_equilibrium_general(costs, g)?.bw)
        }
        SnrRegime::HighSnr => match (s.rho, costs.regime()) {
            // Injected candidates are taken as given so off-segment points can be tested.
            (Some(rho), CostRegime::LowCosts) => Ok(continuum_point(rho, g)?),
            (Some(_), _) => Err(Failure::Validation("rho applies only to the low-cost regime".into())),
            (None, _) => Ok(equilibrium_summary(costs, g, None)?.investments),
        },
    }
}

pub fn verify_records(s: &Scenario) -> Result<Vec<VerifyRecord>, Failure> {
    let g = s.g_total()?;
    let eps = s.epsilon_scale * default_epsilon_scale(g);
    if let Some(bw) = s.bw {
        let costs = s.costs_or_unit()?;
        return Ok(vec![verify_pricing(&bw, g, &costs, s, eps)?]);
    }
    let costs = s.costs()?;
    let candidate = investment_candidate(&costs, g, s)?;
    let grid = GridSpec::new(0.0, investment_cap(g, s.regime), s.grid_n, eps)?;
    let cert = certify_investment(&costs, g, s.regime, &grid, &candidate)?;
    let mut rows = vec![certificate_row("investment", &candidate, None, &cert)];
    rows.push(verify_pricing(&candidate, g, &costs, s, eps)?);
    Ok(rows)
}

pub fn cmd_verify(s: &Scenario) -> Result<(), Failure> {
    let rows = verify_records(s)?;
    emit(&rows, s.format, s.out.as_deref())?;
    match rows.iter().find(|r| !r.passed()) {
        None => Ok(()),
        Some(r) => Err(Failure::Refutation(match r.status.as_str() {
            "survivor" => format!(
                "{} symmetric price(s) survived at bandwidths ({}, {}), first at {:?}",
                r.survivors.unwrap_or(0),
                r.b_i,
                r.b_j,
                r.p_i
            ),
            _ => {
                let (op, gain, dev) = if r.max_gain_i >= r.max_gain_j {
                    ("i", r.max_gain_i, r.best_deviation_i)
                } else {
                    ("j", r.max_gain_j, r.best_deviation_j)
                };
                format!(
                    "{} candidate ({}, {}) refuted: operator {op} gains {} by deviating to {}",
                    r.check,
                    r.b_i,
                    r.b_j,
                    gain.unwrap_or(f64::NAN),
                    dev.unwrap_or(f64::NAN)
                )
            }
        })),
    }
}
