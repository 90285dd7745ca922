//! gridcoal: coalition selection for microgrid communities trading
//! against an energy market.
//!
//! Exit codes: 0 success, 1 IO/validation failure, 2 usage error,
//! 3 size-limit exceeded.

mod commands;
mod common;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "gridcoal",
    version,
    about = "Microgrid coalition search with Shapley value allocation",
    propagate_version = true
)]
struct Cli {
    /// Print extra progress detail.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic scenario file.
    Gen(commands::gen::GenArgs),
    /// Ingest a prosumer time-series file into a scenario.
    Ingest(commands::ingest::IngestArgs),
    /// Run the memetic optimizer on a scenario.
    Run(commands::run::RunArgs),
    /// Compare memetic runs against the exhaustive oracle.
    Verify(commands::verify::VerifyArgs),
    /// Compute a Shapley allocation for a scenario's members.
    Shapley(commands::shapley::ShapleyArgs),
    /// Sweep optimizer parameters over a grid or a single axis.
    Sweep(commands::sweep::SweepArgs),
    /// Repeated runs from distinct seeds on one scenario.
    Stability(commands::stability::StabilityArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(args) => commands::gen::execute(args, cli.verbose),
        Command::Ingest(args) => commands::ingest::execute(args, cli.verbose),
        Command::Run(args) => commands::run::execute(args, cli.verbose),
        Command::Verify(args) => commands::verify::execute(args, cli.verbose),
        Command::Shapley(args) => commands::shapley::execute(args, cli.verbose),
        Command::Sweep(args) => commands::sweep::execute(args, cli.verbose),
        Command::Stability(args) => commands::stability::execute(args, cli.verbose),
    };
    if let Err(error) = result {
        eprintln!("error: {error}");
        std::process::exit(exit_code(&error));
    }
}

fn exit_code(error: &gridcoal::Error) -> i32 {
    use gridcoal::Error;
    match error {
        Error::CommunityTooLarge { .. } | Error::CoalitionTooLarge { .. } => 3,
        Error::InvalidConfig(_) => 2,
        _ => 1,
    }
}
