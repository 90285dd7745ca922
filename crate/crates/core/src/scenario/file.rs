//! The scenario file format: versioned, human-diffable TOML with one
//! table per microgrid plus market and cost blocks. Reading validates
//! every domain invariant; write-then-read is an identity.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BatteryState, Community, MarketState, Microgrid};
use crate::valuation::CostModel;

use super::{Provenance, Scenario};

pub const SCENARIO_FORMAT: &str = "gridcoal-scenario/v1";

#[derive(Debug, Serialize, Deserialize)]
struct ScenarioFile {
    format: String,
    label: String,
    provenance: ProvenanceFile,
    market: MarketFile,
    cost_model: CostFile,
    #[serde(default)]
    microgrid: Vec<MicrogridFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ProvenanceFile {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    source: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hour: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MarketFile {
    quantity_kwh: f64,
    price_per_kwh: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct CostFile {
    delta_coeff: f64,
    maintenance_cost: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct MicrogridFile {
    id: String,
    capacity_kwh: f64,
    stored_kwh: f64,
    cycles_used: u32,
    remaining_cycles: u32,
    charge_efficiency: f64,
    discharge_efficiency: f64,
    delta_energy_kwh: f64,
}

fn to_file(scenario: &Scenario) -> ScenarioFile {
    let provenance = match &scenario.provenance {
        Provenance::Synthetic { seed } => ProvenanceFile {
            kind: "synthetic".into(),
            seed: Some(*seed),
            source: None,
            hour: None,
        },
        Provenance::Ingested { source, hour } => ProvenanceFile {
            kind: "ingested".into(),
            seed: None,
            source: Some(source.clone()),
            hour: Some(hour.clone()),
        },
    };
    ScenarioFile {
        format: SCENARIO_FORMAT.into(),
        label: scenario.label.clone(),
        provenance,
        market: MarketFile {
            quantity_kwh: scenario.market.quantity(),
            price_per_kwh: scenario.market.price(),
        },
        cost_model: CostFile {
            delta_coeff: scenario.cost_model.delta_coeff,
            maintenance_cost: scenario.cost_model.maintenance_cost,
        },
        microgrid: scenario
            .community
            .microgrids()
            .iter()
            .map(|mg| MicrogridFile {
                id: mg.id.clone(),
                capacity_kwh: mg.battery.capacity,
                stored_kwh: mg.battery.stored_energy,
                cycles_used: mg.battery.cycles_used,
                remaining_cycles: mg.battery.remaining_cycles,
                charge_efficiency: mg.battery.charge_efficiency,
                discharge_efficiency: mg.battery.discharge_efficiency,
                delta_energy_kwh: mg.delta_energy,
            })
            .collect(),
    }
}

fn from_file(file: ScenarioFile) -> Result<Scenario> {
    if file.format != SCENARIO_FORMAT {
        return Err(Error::InvalidScenario(format!(
            "unsupported scenario format `{}` (expected `{SCENARIO_FORMAT}`)",
            file.format
        )));
    }
    let provenance = match file.provenance.kind.as_str() {
        "synthetic" => Provenance::Synthetic {
            seed: file.provenance.seed.ok_or_else(|| {
                Error::InvalidScenario("synthetic provenance requires a seed".into())
            })?,
        },
        "ingested" => Provenance::Ingested {
            source: file.provenance.source.ok_or_else(|| {
                Error::InvalidScenario("ingested provenance requires a source".into())
            })?,
            hour: file.provenance.hour.ok_or_else(|| {
                Error::InvalidScenario("ingested provenance requires an hour".into())
            })?,
        },
        other => {
            return Err(Error::InvalidScenario(format!(
                "unknown provenance kind `{other}`"
            )))
        }
    };
    let mut microgrids = Vec::with_capacity(file.microgrid.len());
    for mg in file.microgrid {
        let battery = BatteryState::new(
            mg.stored_kwh,
            mg.capacity_kwh,
            mg.cycles_used,
            mg.remaining_cycles,
            mg.charge_efficiency,
            mg.discharge_efficiency,
        )
        .map_err(|e| Error::InvalidScenario(format!("microgrid `{}`: {e}", mg.id)))?;
        microgrids.push(Microgrid {
            id: mg.id,
            battery,
            delta_energy: mg.delta_energy_kwh,
        });
    }
    let community = Community::new(microgrids)?;
    let market = MarketState::new(file.market.quantity_kwh, file.market.price_per_kwh)?;
    let cost_model = CostModel::new(file.cost_model.delta_coeff, file.cost_model.maintenance_cost)?;
    Scenario::new(community, market, cost_model, file.label, provenance)
}

/// Serializes a scenario to its TOML document.
pub fn scenario_to_toml(scenario: &Scenario) -> String {
    toml::to_string_pretty(&to_file(scenario)).expect("scenario serialization cannot fail")
}

/// Parses and validates a scenario document.
pub fn scenario_from_toml(text: &str) -> Result<Scenario> {
    let file: ScenarioFile = toml::from_str(text)
        .map_err(|e| Error::InvalidScenario(format!("scenario parse error: {e}")))?;
    from_file(file)
}

pub fn write_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, scenario_to_toml(scenario)).map_err(|e| Error::io(path, e))
}

pub fn read_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    scenario_from_toml(&text).map_err(|e| match e {
        Error::InvalidScenario(message) => Error::file_format(path, message),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{generate_synthetic, SyntheticSpec};
    use proptest::prelude::*;

    #[test]
    fn round_trip_is_identity() {
        let scenario = generate_synthetic(&SyntheticSpec::new(12, 99)).unwrap();
        let text = scenario_to_toml(&scenario);
        let back = scenario_from_toml(&text).unwrap();
        assert_eq!(scenario, back);
    }

    #[test]
    fn ingested_provenance_round_trips() {
        let mut scenario = generate_synthetic(&SyntheticSpec::new(3, 1)).unwrap();
        scenario.provenance = Provenance::Ingested {
            source: "prosumers.csv".into(),
            hour: "2021-05-01T13:00".into(),
        };
        let back = scenario_from_toml(&scenario_to_toml(&scenario)).unwrap();
        assert_eq!(scenario, back);
    }

    #[test]
    fn zero_market_quantity_is_rejected_at_load() {
        let scenario = generate_synthetic(&SyntheticSpec::new(2, 1)).unwrap();
        let text = scenario_to_toml(&scenario).replace(
            &format!("quantity_kwh = {}", scenario.market.quantity()),
            "quantity_kwh = 0.0",
        );
        assert!(scenario_from_toml(&text).is_err());
    }

    #[test]
    fn negative_price_is_rejected_at_load() {
        let scenario = generate_synthetic(&SyntheticSpec::new(2, 1)).unwrap();
        let text = scenario_to_toml(&scenario).replace(
            &format!("price_per_kwh = {}", scenario.market.price()),
            "price_per_kwh = -0.5",
        );
        assert!(scenario_from_toml(&text).is_err());
    }

    #[test]
    fn overfull_battery_is_rejected_at_load() {
        let scenario = generate_synthetic(&SyntheticSpec::new(2, 1)).unwrap();
        let stored = scenario.community.get(0).battery.stored_energy;
        let text = scenario_to_toml(&scenario).replacen(
            &format!("stored_kwh = {stored}"),
            "stored_kwh = 999.0",
            1,
        );
        let err = scenario_from_toml(&text);
        assert!(err.is_err(), "expected invariant rejection, got {err:?}");
    }

    #[test]
    fn wrong_format_tag_is_rejected() {
        let scenario = generate_synthetic(&SyntheticSpec::new(2, 1)).unwrap();
        let text = scenario_to_toml(&scenario).replace(SCENARIO_FORMAT, "other-format/v9");
        assert!(scenario_from_toml(&text).is_err());
    }

    #[test]
    fn missing_file_reports_the_path() {
        let err = read_scenario("/nonexistent/scenario.toml").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/scenario.toml"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        /// Bit-exact float round-trip through the text format.
        #[test]
        fn random_scenarios_round_trip(n in 1usize..20, seed in any::<u64>()) {
            let scenario = generate_synthetic(&SyntheticSpec::new(n, seed)).unwrap();
            let back = scenario_from_toml(&scenario_to_toml(&scenario)).unwrap();
            prop_assert_eq!(scenario, back);
        }
    }
}
