//! Scenario construction: the optimizer's input unit (community + market
//! + cost model), synthetic community generation, the scenario file
//! format, and the prosumer time-series ingestion pipeline.

mod file;
mod ingest;

pub use file::{
    read_scenario, scenario_from_toml, scenario_to_toml, write_scenario, SCENARIO_FORMAT,
};
pub use ingest::{
    aggregate_hourly, build_scenario, read_mapping, read_prosumer_records, AggregationReport,
    BatteryDefaults, ColumnMapping, HourlyRecord, MarketOverride, MappingSpec, ProsumerRecord,
    MAPPING_FORMAT,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Weibull};

use crate::error::{Error, Result};
use crate::model::{BatteryState, Community, MarketState, MarketStatus, Microgrid};
use crate::valuation::CostModel;

/// Where a scenario came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Ingested { source: String, hour: String },
    Synthetic { seed: u64 },
}

/// One community of microgrids facing one market snapshot under one cost
/// model. Construction validates every domain invariant; nothing invalid
/// reaches the optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub community: Community,
    pub market: MarketState,
    pub cost_model: CostModel,
    pub label: String,
    pub provenance: Provenance,
}

impl Scenario {
    pub fn new(
        community: Community,
        market: MarketState,
        cost_model: CostModel,
        label: impl Into<String>,
        provenance: Provenance,
    ) -> Result<Self> {
        cost_model.validate()?;
        Ok(Scenario {
            community,
            market,
            cost_model,
            label: label.into(),
            provenance,
        })
    }
}

/// Parameters for synthetic community generation. Defaults mirror the
/// evaluation setup: capacities uniform in [12.5, 15.5] kWh, cycle ages
/// from a clamped Weibull(shape 2, scale 0.5) against a 6000-cycle
/// budget, and a deficit market demanding half the community's stored
/// energy.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub seed: u64,
    pub capacity_range: (f64, f64),
    pub charge_efficiency: f64,
    pub discharge_efficiency: f64,
    pub max_cycles: u32,
    pub weibull_shape: f64,
    pub weibull_scale: f64,
    pub market_status: MarketStatus,
    /// |market quantity| as a fraction of the community's market-relevant
    /// capacity; ignored when `market_quantity` is set.
    pub market_fraction: f64,
    /// Explicit signed market quantity, kWh.
    pub market_quantity: Option<f64>,
    pub price: f64,
    pub delta_coeff: f64,
    pub maintenance_cost: f64,
}

impl SyntheticSpec {
    pub fn new(n: usize, seed: u64) -> Self {
        SyntheticSpec {
            n,
            seed,
            capacity_range: (12.5, 15.5),
            charge_efficiency: 0.95,
            discharge_efficiency: 0.95,
            max_cycles: 6000,
            weibull_shape: 2.0,
            weibull_scale: 0.5,
            market_status: MarketStatus::Deficit,
            market_fraction: 0.5,
            market_quantity: None,
            price: 0.5,
            delta_coeff: 0.001,
            maintenance_cost: 0.5,
        }
    }
}

/// Generates a synthetic scenario, deterministically per seed: one draw
/// sequence of (capacity, fill level, Weibull cycle age) per microgrid.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Scenario> {
    if spec.n == 0 {
        return Err(Error::InvalidConfig(
            "synthetic community needs at least one microgrid".into(),
        ));
    }
    let (lo, hi) = spec.capacity_range;
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::InvalidConfig(format!(
            "capacity range must satisfy 0 < lo <= hi, got [{lo}, {hi}]"
        )));
    }
    if !(spec.market_fraction > 0.0) && spec.market_quantity.is_none() {
        return Err(Error::InvalidConfig(
            "market fraction must be positive when no explicit quantity is given".into(),
        ));
    }
    let weibull = Weibull::new(spec.weibull_scale, spec.weibull_shape)
        .map_err(|e| Error::InvalidConfig(format!("weibull parameters: {e}")))?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let width = if spec.n >= 100 { 3 } else { 2 };
    let mut microgrids = Vec::with_capacity(spec.n);
    for index in 0..spec.n {
        let capacity = if hi > lo {
            rng.random_range(lo..hi)
        } else {
            lo
        };
        let stored = rng.random::<f64>() * capacity;
        let age: f64 = weibull.sample(&mut rng);
        let cycles_used = (age.clamp(0.0, 1.0) * f64::from(spec.max_cycles)).round() as u32;
        let battery = BatteryState::new(
            stored,
            capacity,
            cycles_used,
            spec.max_cycles - cycles_used,
            spec.charge_efficiency,
            spec.discharge_efficiency,
        )?;
        microgrids.push(Microgrid::new(
            format!("MG{:0width$}", index + 1),
            battery,
            0.0,
        ));
    }
    let community = Community::new(microgrids)?;

    let quantity = match spec.market_quantity {
        Some(q) => q,
        None => {
            let total = match spec.market_status {
                MarketStatus::Deficit => crate::model::sell_capacity(community.microgrids()),
                MarketStatus::Surplus => crate::model::buy_capacity(community.microgrids()),
            };
            let magnitude = spec.market_fraction * total;
            match spec.market_status {
                MarketStatus::Deficit => -magnitude,
                MarketStatus::Surplus => magnitude,
            }
        }
    };
    let market = MarketState::new(quantity, spec.price)?;
    let cost_model = CostModel::new(spec.delta_coeff, spec.maintenance_cost)?;
    Scenario::new(
        community,
        market,
        cost_model,
        format!("synthetic n={} seed={}", spec.n, spec.seed),
        Provenance::Synthetic { seed: spec.seed },
    )
}
