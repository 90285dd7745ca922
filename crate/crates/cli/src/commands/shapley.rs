use std::path::PathBuf;

use clap::Args;
use gridcoal::experiments::{write_allocation_csv, CsvMeta};
use gridcoal::shapley::allocation_report;
use gridcoal::{
    exact_shapley, read_scenario, sampled_shapley, Error, Microgrid, OptimizerConfig, Result,
    EXACT_SHAPLEY_LIMIT,
};

use crate::common::write_csv_file;

#[derive(Debug, Args)]
pub struct ShapleyArgs {
    /// Scenario file.
    #[arg(long, value_name = "PATH")]
    pub scenario: PathBuf,

    /// exact, sampled, or auto (exact when the game fits the limit).
    #[arg(long, default_value = "auto")]
    pub method: String,

    /// Permutation budget for sampled mode.
    #[arg(long, default_value_t = 20_000)]
    pub permutations: usize,

    /// Seed for sampled mode.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Comma-separated member ids; default is the whole community.
    #[arg(long, value_name = "IDS")]
    pub members: Option<String>,

    /// Optional allocation.csv output path.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

pub fn execute(args: &ShapleyArgs, verbose: bool) -> Result<()> {
    let scenario = read_scenario(&args.scenario)?;
    let members: Vec<Microgrid> = match &args.members {
        None => scenario.community.microgrids().to_vec(),
        Some(list) => {
            let wanted: Vec<&str> = list.split(',').map(str::trim).collect();
            let mut selected = Vec::with_capacity(wanted.len());
            for id in wanted {
                let mg = scenario
                    .community
                    .microgrids()
                    .iter()
                    .find(|mg| mg.id == id)
                    .ok_or_else(|| {
                        Error::InvalidConfig(format!("unknown member id `{id}` in --members"))
                    })?;
                selected.push(mg.clone());
            }
            selected
        }
    };
    if args.permutations == 0 {
        return Err(Error::InvalidConfig("--permutations must be at least 1".into()));
    }

    let allocation = match args.method.as_str() {
        "exact" => exact_shapley(&members, &scenario.market, &scenario.cost_model)?,
        "sampled" => sampled_shapley(
            &members,
            &scenario.market,
            &scenario.cost_model,
            args.permutations,
            args.seed,
        ),
        "auto" => {
            if members.len() <= EXACT_SHAPLEY_LIMIT {
                exact_shapley(&members, &scenario.market, &scenario.cost_model)?
            } else {
                sampled_shapley(
                    &members,
                    &scenario.market,
                    &scenario.cost_model,
                    args.permutations,
                    args.seed,
                )
            }
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "--method must be exact, sampled, or auto, got `{other}`"
            )))
        }
    };

    let rows = allocation_report(&allocation, &members, &scenario.market, &scenario.cost_model);
    if let Some(out) = &args.out {
        // The config echoed in the header is the seed-bearing context;
        // only the seed matters for the sampled estimator.
        let cfg = OptimizerConfig {
            seed: args.seed,
            ..OptimizerConfig::default()
        };
        let meta = CsvMeta {
            kind: "allocation",
            config: &cfg,
            scenario_label: &scenario.label,
        };
        write_csv_file(out, |w| {
            write_allocation_csv(w, &meta, allocation.method, allocation.game_total, &rows)
        })?;
        println!("wrote {}", out.display());
    }
    println!(
        "allocated v(N) = {:.6} over {} members ({:?})",
        allocation.game_total,
        allocation.len(),
        allocation.method,
    );
    if verbose || args.out.is_none() {
        for row in &rows {
            println!(
                "  {:>8}: shapley {:>12.6} | energy {:>8.3} kWh | degradation cost {:>10.6}",
                row.id, row.shapley_value, row.energy_contribution_kwh, row.degradation_cost,
            );
        }
    }
    Ok(())
}
