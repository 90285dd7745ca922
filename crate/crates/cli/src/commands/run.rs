use std::path::PathBuf;

use clap::Args;
use gridcoal::experiments::{
    coalition_report, write_allocation_csv, write_coalition_csv, write_trace_csv, CsvMeta,
};
use gridcoal::shapley::allocation_report;
use gridcoal::{read_scenario, run, Result};

use crate::common::{out_file, write_csv_file, ConfigArgs};

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scenario file.
    #[arg(long, value_name = "PATH")]
    pub scenario: PathBuf,

    /// Directory for coalition.csv, allocation.csv, and trace.csv.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out_dir: PathBuf,

    #[command(flatten)]
    pub config: ConfigArgs,
}

pub fn execute(args: &RunArgs, verbose: bool) -> Result<()> {
    let scenario = read_scenario(&args.scenario)?;
    let cfg = args.config.resolve()?;
    if verbose {
        println!("config: {}", cfg.echo());
    }
    let result = run(&scenario, &cfg)?;

    let meta = CsvMeta {
        kind: "run",
        config: &cfg,
        scenario_label: &scenario.label,
    };
    let report = coalition_report(&result, &scenario);
    write_csv_file(&out_file(&args.out_dir, "coalition.csv")?, |w| {
        write_coalition_csv(w, &meta, &report)
    })?;
    let members: Vec<gridcoal::Microgrid> = scenario
        .community
        .select(&result.best_individual.flags)
        .cloned()
        .collect();
    let rows = allocation_report(&result.allocation, &members, &scenario.market, &scenario.cost_model);
    write_csv_file(&out_file(&args.out_dir, "allocation.csv")?, |w| {
        write_allocation_csv(w, &meta, result.allocation.method, result.allocation.game_total, &rows)
    })?;
    write_csv_file(&out_file(&args.out_dir, "trace.csv")?, |w| {
        write_trace_csv(w, &meta, 0, &result.trace)
    })?;

    println!(
        "best objective {:.6} (v {:.6}, traded {:.3} kWh) | coalition {}/{} members | wall time {:.3}s | outputs in {}",
        result.raw_objective,
        result.characteristic.value,
        result.characteristic.traded_energy,
        result.best_coalition.len(),
        scenario.community.len(),
        result.wall_time.as_secs_f64(),
        args.out_dir.display(),
    );
    if verbose {
        println!("coalition: {}", result.best_coalition.join(", "));
    }
    Ok(())
}
