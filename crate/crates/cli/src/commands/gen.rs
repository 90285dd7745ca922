use std::path::PathBuf;

use clap::Args;
use gridcoal::model::MarketStatus;
use gridcoal::scenario::SyntheticSpec;
use gridcoal::{buy_capacity, generate_synthetic, sell_capacity, write_scenario, Error, Result};

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Number of microgrids.
    #[arg(long, value_name = "N")]
    pub n: usize,

    /// Generation seed.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Output scenario file.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,

    #[arg(long, default_value_t = 12.5)]
    pub capacity_min: f64,

    #[arg(long, default_value_t = 15.5)]
    pub capacity_max: f64,

    /// Market side: deficit (community sells) or surplus (community buys).
    #[arg(long, default_value = "deficit")]
    pub status: String,

    /// |market quantity| as a fraction of the community's relevant capacity.
    #[arg(long, default_value_t = 0.5)]
    pub market_fraction: f64,

    /// Explicit signed market quantity (kWh); overrides the fraction.
    #[arg(long, value_name = "KWH")]
    pub market_quantity: Option<f64>,

    /// Market price per kWh.
    #[arg(long, default_value_t = 0.5)]
    pub price: f64,

    /// Battery damage cost per performed cycle.
    #[arg(long, default_value_t = 0.001)]
    pub delta_coeff: f64,

    /// Flat per-coalition maintenance cost.
    #[arg(long, default_value_t = 0.5)]
    pub maintenance: f64,

    #[arg(long, default_value_t = 0.95)]
    pub charge_efficiency: f64,

    #[arg(long, default_value_t = 0.95)]
    pub discharge_efficiency: f64,

    #[arg(long, default_value_t = 6000)]
    pub max_cycles: u32,
}

pub fn execute(args: &GenArgs, _verbose: bool) -> Result<()> {
    if args.n == 0 {
        return Err(Error::InvalidConfig("--n must be at least 1".into()));
    }
    let status = match args.status.as_str() {
        "deficit" => MarketStatus::Deficit,
        "surplus" => MarketStatus::Surplus,
        other => {
            return Err(Error::InvalidConfig(format!(
                "--status must be `deficit` or `surplus`, got `{other}`"
            )))
        }
    };
    let spec = SyntheticSpec {
        capacity_range: (args.capacity_min, args.capacity_max),
        charge_efficiency: args.charge_efficiency,
        discharge_efficiency: args.discharge_efficiency,
        max_cycles: args.max_cycles,
        market_status: status,
        market_fraction: args.market_fraction,
        market_quantity: args.market_quantity,
        price: args.price,
        delta_coeff: args.delta_coeff,
        maintenance_cost: args.maintenance,
        ..SyntheticSpec::new(args.n, args.seed)
    };
    let scenario = generate_synthetic(&spec)?;
    write_scenario(&scenario, &args.out)?;
    println!(
        "wrote {} | n={} market={:?} quantity={:.3} kWh price={} | sell capacity {:.3} kWh, buy capacity {:.3} kWh",
        args.out.display(),
        scenario.community.len(),
        scenario.market.status(),
        scenario.market.quantity(),
        scenario.market.price(),
        sell_capacity(scenario.community.microgrids()),
        buy_capacity(scenario.community.microgrids()),
    );
    Ok(())
}
