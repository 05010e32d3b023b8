//! Front end for the duopoly engine: scenario parsing, report records and the
//! `equilibrium`, `sweep` and `verify` commands.

pub mod args;
pub mod commands;
pub mod failure;
pub mod output;
pub mod records;

use args::{Cli, Command, Scenario};
use failure::Failure;

pub fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Equilibrium(a) => commands::cmd_equilibrium(&Scenario::resolve(a)?),
        Command::Sweep { kind, scenario } => commands::cmd_sweep(*kind, &Scenario::resolve(scenario)?),
        Command::Verify(a) => commands::cmd_verify(&Scenario::resolve(a)?),
    }
}
