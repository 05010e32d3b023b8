//! Command-line flags, the config file, and their merge into a [`Scenario`].
//!
//! The config file is flat TOML. Recognised keys mirror the long flags with
//! dashes replaced by underscores:
//!
//! ```toml
//! ci = 0.3
//! cj = 0.4
//! g = 1.0                      # or: users = ["1.0,2.0,1.0", "0.5,1.0,1.0"]
//! regime = "high-snr"          # or "general"
//! rho = 0.5
//! grid_n = 2000
//! epsilon_scale = 1e-3
//! bi = 0.2
//! bj = 0.2
//! format = "csv"               # or "json"
//! out = "result.csv"
//! delta = 0.3
//! n = 200
//! tolerance = 1e-6
//! b_max = 0.6
//! ```
//!
//! Flags given on the command line override file values.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use duopoly_core::{BandwidthPair, CostPair, Market, SnrRegime, UserProfile};
use serde::Deserialize;

use crate::failure::Failure;
use crate::output::Format;

#[derive(Debug, Parser)]
#[command(name = "duopoly", version, about = "Spectrum leasing duopoly: equilibria, sweeps and verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve all three stages for one scenario.
    #[command(allow_negative_numbers = true)]
    Equilibrium(ScenarioArgs),
    /// Emit plot-ready tables.
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[arg(value_enum)]
        kind: SweepKind,
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Check analytic equilibria against the brute-force oracle.
    #[command(allow_negative_numbers = true)]
    Verify(ScenarioArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    RatioCurve,
    MinRatio,
    EffectRegions,
    PricingMap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeArg {
    #[value(alias = "high_snr")]
    #[serde(alias = "high_snr")]
    HighSnr,
    General,
}

impl From<RegimeArg> for SnrRegime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::HighSnr => SnrRegime::HighSnr,
            RegimeArg::General => SnrRegime::General,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct ScenarioArgs {
    /// Unit cost of operator i.
    #[arg(long)]
    pub ci: Option<f64>,
    /// Unit cost of operator j.
    #[arg(long)]
    pub cj: Option<f64>,
    /// Aggregate wireless characteristic of the user population.
    #[arg(long)]
    pub g: Option<f64>,
    /// One user as `p_max,h,n0`; repeat for each user. Excludes --g.
    #[arg(long = "user", value_name = "P_MAX,H,N0")]
    pub users: Vec<String>,
    #[arg(long, value_enum)]
    pub regime: Option<RegimeArg>,
    /// Position on the low-cost equilibrium segment, as operator i's share.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Oracle grid points per axis.
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Oracle epsilon as a multiple of G e^-2.
    #[arg(long)]
    pub epsilon_scale: Option<f64>,
    /// Fixed bandwidth of operator i, for pricing-only verification.
    #[arg(long)]
    pub bi: Option<f64>,
    #[arg(long)]
    pub bj: Option<f64>,
    /// Cost gap for ratio-curve.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Samples or grid size for sweeps.
    #[arg(long)]
    pub n: Option<usize>,
    /// Bisection tolerance for effect-regions.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Largest bandwidth per operator in pricing-map, as a multiple of G.
    #[arg(long)]
    pub b_max: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat TOML file with default values for any of the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    ci: Option<f64>,
    cj: Option<f64>,
    g: Option<f64>,
    users: Option<Vec<String>>,
    regime: Option<RegimeArg>,
    rho: Option<f64>,
    grid_n: Option<usize>,
    epsilon_scale: Option<f64>,
    bi: Option<f64>,
    bj: Option<f64>,
    delta: Option<f64>,
    n: Option<usize>,
    tolerance: Option<f64>,
    b_max: Option<f64>,
    format: Option<String>,
    out: Option<PathBuf>,
}

fn read_config(path: &Path) -> Result<ConfigFile, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::Validation(format!("config {}: {}", path.display(), e.message())))
}

/// Fully resolved inputs shared by every command.
#[derive(Debug, Clone)]
pub struct Scenario {
    market: Option<Market>,
    pub costs: Option<CostPair>,
    pub regime: SnrRegime,
    pub rho: Option<f64>,
    pub grid_n: usize,
    pub epsilon_scale: f64,
    pub bw: Option<BandwidthPair>,
    pub delta: Option<f64>,
    pub n: Option<usize>,
    pub tolerance: Option<f64>,
    pub b_max: Option<f64>,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl Scenario {
    pub fn resolve(args: &ScenarioArgs) -> Result<Scenario, Failure> {
        let file = match &args.config {
            Some(path) => read_config(path)?,
            None => ConfigFile::default(),
        };
        let format = match (args.format, &file.format) {
            (Some(f), _) => f,
            (None, Some(s)) => Format::from_str(s, true).map_err(|_| Failure::Validation(format!("unknown format {s:?}")))?,
            (None, None) => Format::Csv,
        };

        // A flag-level G or user list replaces whatever the file supplied.
        let (g, users) = if args.g.is_some() || !args.users.is_empty() {
            (args.g, args.users.clone())
        } else {
            (file.g, file.users.unwrap_or_default())
        };
        let market = match (g, users.is_empty()) {
            (Some(_), false) => return Err(Failure::Validation("give either g or a user list, not both".into())),
            (Some(g), true) => Some(Market::from_aggregate(g)?),
            (None, false) => Some(parse_users(&users)?),
            (None, true) => None,
        };

        let costs = match (args.ci.or(file.ci), args.cj.or(file.cj)) {
            (Some(a), Some(b)) => Some(CostPair::new(a, b)?),
            (None, None) => None,
            _ => return Err(Failure::Validation("ci and cj must be given together".into())),
        };
        let bw = match (args.bi.or(file.bi), args.bj.or(file.bj)) {
            (Some(a), Some(b)) => Some(BandwidthPair::new(a, b)?),
            (None, None) => None,
            _ => return Err(Failure::Validation("bi and bj must be given together".into())),
        };

        let grid_n = args.grid_n.or(file.grid_n).unwrap_or(2000);
        let epsilon_scale = args.epsilon_scale.or(file.epsilon_scale).unwrap_or(1e-3);
        if !(epsilon_scale > 0.0 && epsilon_scale.is_finite()) {
            return Err(Failure::Validation(format!("epsilon_scale must be positive, got {epsilon_scale}")));
        }

        Ok(Scenario {
            market,
            costs,
            regime: args.regime.or(file.regime).unwrap_or(RegimeArg::HighSnr).into(),
            rho: args.rho.or(file.rho),
            grid_n,
            epsilon_scale,
            bw,
            delta: args.delta.or(file.delta),
            n: args.n.or(file.n),
            tolerance: args.tolerance.or(file.tolerance),
            b_max: args.b_max.or(file.b_max),
            format,
            out: args.out.clone().or(file.out),
        })
    }

    /// Aggregate G. Commands that need a market call this; sweeps fall back to 1.
    pub fn g_total(&self) -> Result<f64, Failure> {
        self.market
            .as_ref()
            .map(Market::g_total)
            .ok_or_else(|| Failure::Validation("a market is required: give g or at least one user".into()))
    }

    pub fn g_or_unit(&self) -> f64 {
        self.market.as_ref().map_or(1.0, Market::g_total)
    }

    /// Costs where they only shift profits by a constant and cannot move an equilibrium.
    pub fn costs_or_unit(&self) -> Result<CostPair, Failure> {
        Ok(self.costs.unwrap_or(CostPair::new(1.0, 1.0)?))
    }

    pub fn costs(&self) -> Result<CostPair, Failure> {
        self.costs.ok_or_else(|| Failure::Validation("costs are required: give ci and cj".into()))
    }
}

fn parse_users(specs: &[String]) -> Result<Market, Failure> {
    let width = specs.len().to_string().len();
    let users = specs
        .iter()
        .enumerate()
        .map(|(k, spec)| {
            let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
            let nums: Vec<f64> = parts.iter().filter_map(|s| s.parse().ok()).collect();
            if parts.len() != 3 || nums.len() != 3 {
                return Err(Failure::Validation(format!("user {spec:?} must be p_max,h,n0")));
            }
            Ok(UserProfile::new(format!("u{:0width$}", k + 1), nums[0], nums[1], nums[2])?)
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    Ok(Market::new(users)?)
}
