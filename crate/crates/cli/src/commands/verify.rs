use std::path::PathBuf;

use clap::Args;
use gridcoal::{read_scenario, verify_against_oracle, Result, DEFAULT_ORACLE_LIMIT};

use crate::common::ConfigArgs;

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Scenario file (community must fit the oracle limit).
    #[arg(long, value_name = "PATH")]
    pub scenario: PathBuf,

    /// Number of memetic runs; seeds are seed, seed+1, ..
    #[arg(long, default_value_t = 20)]
    pub seeds: usize,

    /// Exhaustive-enumeration ceiling.
    #[arg(long, default_value_t = DEFAULT_ORACLE_LIMIT)]
    pub oracle_limit: usize,

    #[command(flatten)]
    pub config: ConfigArgs,
}

pub fn execute(args: &VerifyArgs, verbose: bool) -> Result<()> {
    let scenario = read_scenario(&args.scenario)?;
    let cfg = args.config.resolve()?;
    let seeds: Vec<u64> = (0..args.seeds as u64).map(|i| cfg.seed + i).collect();
    let report = verify_against_oracle(&scenario, &cfg, &seeds, args.oracle_limit)?;

    println!(
        "oracle optimum {:.6} with coalition [{}] ({} members)",
        report.oracle.best_objective,
        report.oracle.best_coalition.join(", "),
        report.oracle.best_coalition.len(),
    );
    for outcome in &report.outcomes {
        if verbose || !outcome.hit {
            println!(
                "  seed {:>4}: achieved {:.6} {} (relative gap {:.3e})",
                outcome.seed,
                outcome.achieved,
                if outcome.hit { "HIT " } else { "miss" },
                outcome.relative_gap,
            );
        }
    }
    println!(
        "hit rate {:.3} ({}/{} runs at the exact optimum)",
        report.hit_rate,
        report.outcomes.iter().filter(|o| o.hit).count(),
        report.outcomes.len(),
    );
    Ok(())
}
