//! Equilibrium engine for a duopoly spectrum leasing game.
//!
//! Two secondary operators lease bandwidth at fixed unit costs (stage I),
//! announce prices (stage II), and sell to users who pick demand to
//! maximize rate minus payment (stage III). The crate solves every stage by
//! backward induction in the high-SNR regime, where closed forms exist, and
//! numerically in the general regime. It also provides a coordinated
//! benchmark and a brute-force oracle that certifies equilibria by grid search.

pub mod coordinated;
pub mod error;
pub mod model;
pub mod oracle;
mod roots;
pub mod stage1_investment;
pub mod stage2_pricing;
pub mod stage3_users;

pub use error::{Error, Result};
pub use model::{
    BandwidthPair, CostPair, CostRegime, Market, Operator, PricePair, RadioParams, SnrRegime,
    UserProfile,
};
