use std::path::PathBuf;

use clap::Args;
use gridcoal::experiments::{write_stability_summary_csv, write_trace_csv, CsvMeta};
use gridcoal::{read_scenario, stability_study, OptimizerConfig, Result};

use crate::common::{out_file, write_csv_file, ConfigArgs};

#[derive(Debug, Args)]
pub struct StabilityArgs {
    /// Scenario file.
    #[arg(long, value_name = "PATH")]
    pub scenario: PathBuf,

    /// Number of runs; seeds are seed, seed+1, ..
    #[arg(long, default_value_t = 5)]
    pub runs: usize,

    /// Directory for stability_summary.csv and trace_run<i>.csv.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out_dir: PathBuf,

    #[command(flatten)]
    pub config: ConfigArgs,
}

pub fn execute(args: &StabilityArgs, verbose: bool) -> Result<()> {
    let scenario = read_scenario(&args.scenario)?;
    let cfg = args.config.resolve()?;
    let result = stability_study(&scenario, &cfg, args.runs)?;

    for (i, run) in result.runs.iter().enumerate() {
        let run_cfg = OptimizerConfig {
            seed: result.seeds[i],
            ..cfg.clone()
        };
        let meta = CsvMeta {
            kind: "stability-trace",
            config: &run_cfg,
            scenario_label: &scenario.label,
        };
        write_csv_file(&out_file(&args.out_dir, &format!("trace_run{i}.csv"))?, |w| {
            write_trace_csv(w, &meta, i, &run.trace)
        })?;
        if verbose {
            println!(
                "run {i} (seed {}): raw objective {:.6}, coalition {} members",
                run.seed,
                run.raw_objective,
                run.best_coalition.len()
            );
        }
    }
    let meta = CsvMeta {
        kind: "stability",
        config: &cfg,
        scenario_label: &scenario.label,
    };
    write_csv_file(&out_file(&args.out_dir, "stability_summary.csv")?, |w| {
        write_stability_summary_csv(w, &meta, &result)
    })?;

    println!(
        "{} runs | final raw objectives {:?} | coefficient of variation {:.6} | outputs in {}",
        result.runs.len(),
        result
            .final_raw_objectives
            .iter()
            .map(|v| (v * 1e6).round() / 1e6)
            .collect::<Vec<_>>(),
        result.coefficient_of_variation,
        args.out_dir.display(),
    );
    Ok(())
}
