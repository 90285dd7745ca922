use std::path::PathBuf;

use chrono::NaiveDateTime;
use clap::Args;
use gridcoal::scenario::{
    aggregate_hourly, build_scenario, read_mapping, read_prosumer_records, MarketOverride,
};
use gridcoal::valuation::CostModel;
use gridcoal::{write_scenario, Error, Result};

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Delimiter-separated time-series file with a header row.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,

    /// Column-mapping file (TOML, gridcoal-mapping/v1).
    #[arg(long, value_name = "PATH")]
    pub mapping: PathBuf,

    /// Trading hour, in the mapping's timestamp format.
    #[arg(long, value_name = "TIMESTAMP")]
    pub hour: String,

    /// Signed market quantity (kWh): negative = deficit, positive =
    /// surplus. The dataset has no column for it.
    #[arg(long, value_name = "KWH", allow_hyphen_values = true)]
    pub market_quantity: f64,

    /// Market price per kWh; default is the hour's mean dataset price.
    #[arg(long, value_name = "PRICE")]
    pub market_price: Option<f64>,

    #[arg(long, default_value_t = 0.001)]
    pub delta_coeff: f64,

    #[arg(long, default_value_t = 0.5)]
    pub maintenance: f64,

    /// Output scenario file.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

pub fn execute(args: &IngestArgs, verbose: bool) -> Result<()> {
    let mapping = read_mapping(&args.mapping)?;
    let hour = NaiveDateTime::parse_from_str(&args.hour, &mapping.columns.timestamp_format)
        .map_err(|e| {
            Error::InvalidConfig(format!(
                "--hour `{}` does not match the mapping's timestamp format `{}`: {e}",
                args.hour, mapping.columns.timestamp_format
            ))
        })?;
    let records = read_prosumer_records(&args.input, &mapping.columns)?;
    let aggregated = aggregate_hourly(&records);
    for (prosumer, hour, present) in &aggregated.dropped_hours {
        eprintln!("warning: `{prosumer}` @ {hour}: only {present}/4 quarter samples, hour dropped");
    }
    for (prosumer, timestamp) in &aggregated.duplicates {
        eprintln!("warning: `{prosumer}` duplicate sample at {timestamp}, first kept");
    }
    let (scenario, log) = build_scenario(
        &aggregated.hourly,
        hour,
        &mapping.battery_defaults,
        CostModel::new(args.delta_coeff, args.maintenance)?,
        MarketOverride {
            quantity_kwh: args.market_quantity,
            price_per_kwh: args.market_price,
        },
        &args.input.display().to_string(),
    )?;
    if verbose {
        for line in &log {
            eprintln!("note: {line}");
        }
    }
    write_scenario(&scenario, &args.out)?;
    println!(
        "wrote {} | {} records -> {} hourly rows -> {} microgrids @ {hour} | market quantity {:.3} kWh price {:.4}",
        args.out.display(),
        records.len(),
        aggregated.hourly.len(),
        scenario.community.len(),
        scenario.market.quantity(),
        scenario.market.price(),
    );
    Ok(())
}
