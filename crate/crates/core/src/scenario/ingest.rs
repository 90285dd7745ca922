//! Prosumer time-series ingestion: delimiter-separated files with a
//! configurable column mapping, 15-minute to hourly aggregation, and
//! scenario assembly for one trading hour.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{NaiveDateTime, Timelike};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Weibull};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{BatteryState, Community, MarketState, Microgrid};
use crate::valuation::CostModel;

use super::{Provenance, Scenario};

pub const MAPPING_FORMAT: &str = "gridcoal-mapping/v1";

/// One 15-minute sample of one prosumer.
#[derive(Debug, Clone, PartialEq)]
pub struct ProsumerRecord {
    pub prosumer_id: String,
    pub timestamp: NaiveDateTime,
    pub energy_produced: f64,
    pub energy_consumed: f64,
    pub price: Option<f64>,
    pub battery_capacity: Option<f64>,
    pub battery_stored: Option<f64>,
}

/// Column names and parsing details for the input file.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMapping {
    pub delimiter: u8,
    pub prosumer_id: String,
    pub timestamp: String,
    pub timestamp_format: String,
    pub energy_produced: String,
    pub energy_consumed: String,
    pub price: Option<String>,
    pub battery_capacity: Option<String>,
    pub battery_stored: Option<String>,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        ColumnMapping {
            delimiter: b',',
            prosumer_id: "prosumer_id".into(),
            timestamp: "timestamp".into(),
            timestamp_format: "%Y-%m-%d %H:%M:%S".into(),
            energy_produced: "energy_produced_kwh".into(),
            energy_consumed: "energy_consumed_kwh".into(),
            price: Some("buy_price".into()),
            battery_capacity: Some("battery_capacity_kwh".into()),
            battery_stored: Some("battery_stored_kwh".into()),
        }
    }
}

/// Battery fields used when the dataset does not carry them, plus the
/// cycle-age synthesis parameters (cycle ages are always synthesized:
/// the time series has no cycle data).
#[derive(Debug, Clone, PartialEq)]
pub struct BatteryDefaults {
    pub capacity_kwh: f64,
    /// Stored energy as a fraction of capacity when the column is absent.
    pub stored_fraction: f64,
    pub charge_efficiency: f64,
    pub discharge_efficiency: f64,
    pub max_cycles: u32,
    pub weibull_shape: f64,
    pub weibull_scale: f64,
    pub cycle_seed: u64,
}

impl Default for BatteryDefaults {
    fn default() -> Self {
        BatteryDefaults {
            capacity_kwh: 15.0,
            stored_fraction: 0.5,
            charge_efficiency: 0.95,
            discharge_efficiency: 0.95,
            max_cycles: 6000,
            weibull_shape: 2.0,
            weibull_scale: 0.5,
            cycle_seed: 1,
        }
    }
}

#[derive(Debug, Deserialize)]
struct MappingFile {
    format: String,
    columns: MappingColumns,
    #[serde(default)]
    csv: MappingCsv,
    #[serde(default)]
    battery_defaults: MappingBatteryDefaults,
}

#[derive(Debug, Deserialize)]
struct MappingColumns {
    prosumer_id: String,
    timestamp: String,
    #[serde(default = "default_timestamp_format")]
    timestamp_format: String,
    energy_produced: String,
    energy_consumed: String,
    price: Option<String>,
    battery_capacity: Option<String>,
    battery_stored: Option<String>,
}

fn default_timestamp_format() -> String {
    "%Y-%m-%d %H:%M:%S".into()
}

#[derive(Debug, Deserialize, Default)]
struct MappingCsv {
    delimiter: Option<String>,
}

#[derive(Debug, Deserialize, Default)]
struct MappingBatteryDefaults {
    capacity_kwh: Option<f64>,
    stored_fraction: Option<f64>,
    charge_efficiency: Option<f64>,
    discharge_efficiency: Option<f64>,
    max_cycles: Option<u32>,
    weibull_shape: Option<f64>,
    weibull_scale: Option<f64>,
    cycle_seed: Option<u64>,
}

/// Column mapping plus battery defaults, as read from a mapping file.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingSpec {
    pub columns: ColumnMapping,
    pub battery_defaults: BatteryDefaults,
}

/// Reads a TOML mapping file describing the input columns and battery
/// defaults.
pub fn read_mapping(path: impl AsRef<Path>) -> Result<MappingSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: MappingFile =
        toml::from_str(&text).map_err(|e| Error::file_format(path, e.to_string()))?;
    if file.format != MAPPING_FORMAT {
        return Err(Error::file_format(
            path,
            format!("unsupported mapping format `{}` (expected `{MAPPING_FORMAT}`)", file.format),
        ));
    }
    let delimiter = match file.csv.delimiter.as_deref() {
        None => b',',
        Some(s) if s.len() == 1 => s.as_bytes()[0],
        Some(other) => {
            return Err(Error::file_format(
                path,
                format!("delimiter must be a single character, got `{other}`"),
            ))
        }
    };
    let d = BatteryDefaults::default();
    let bd = file.battery_defaults;
    Ok(MappingSpec {
        columns: ColumnMapping {
            delimiter,
            prosumer_id: file.columns.prosumer_id,
            timestamp: file.columns.timestamp,
            timestamp_format: file.columns.timestamp_format,
            energy_produced: file.columns.energy_produced,
            energy_consumed: file.columns.energy_consumed,
            price: file.columns.price,
            battery_capacity: file.columns.battery_capacity,
            battery_stored: file.columns.battery_stored,
        },
        battery_defaults: BatteryDefaults {
            capacity_kwh: bd.capacity_kwh.unwrap_or(d.capacity_kwh),
            stored_fraction: bd.stored_fraction.unwrap_or(d.stored_fraction),
            charge_efficiency: bd.charge_efficiency.unwrap_or(d.charge_efficiency),
            discharge_efficiency: bd.discharge_efficiency.unwrap_or(d.discharge_efficiency),
            max_cycles: bd.max_cycles.unwrap_or(d.max_cycles),
            weibull_shape: bd.weibull_shape.unwrap_or(d.weibull_shape),
            weibull_scale: bd.weibull_scale.unwrap_or(d.weibull_scale),
            cycle_seed: bd.cycle_seed.unwrap_or(d.cycle_seed),
        },
    })
}

/// Reads prosumer samples from a delimiter-separated file with a header
/// row, using the column mapping. Rows that fail to parse are reported
/// with their line number.
pub fn read_prosumer_records(
    path: impl AsRef<Path>,
    mapping: &ColumnMapping,
) -> Result<Vec<ProsumerRecord>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(mapping.delimiter)
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::file_format(path, e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::file_format(path, e.to_string()))?
        .clone();
    let column = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::file_format(path, format!("missing column `{name}` in header row"))
        })
    };
    let optional_column = |name: &Option<String>| -> Result<Option<usize>> {
        name.as_deref().map(column).transpose()
    };

    let id_col = column(&mapping.prosumer_id)?;
    let ts_col = column(&mapping.timestamp)?;
    let produced_col = column(&mapping.energy_produced)?;
    let consumed_col = column(&mapping.energy_consumed)?;
    let price_col = optional_column(&mapping.price)?;
    let capacity_col = optional_column(&mapping.battery_capacity)?;
    let stored_col = optional_column(&mapping.battery_stored)?;

    let mut records = Vec::new();
    for (row_index, row) in reader.records().enumerate() {
        let line = row_index + 2; // header is line 1
        let row = row.map_err(|e| Error::Ingest(format!("line {line}: {e}")))?;
        let field = |col: usize| -> Result<&str> {
            row.get(col)
                .ok_or_else(|| Error::Ingest(format!("line {line}: missing field {col}")))
        };
        let parse_f64 = |col: usize, name: &str| -> Result<f64> {
            let text = field(col)?;
            text.parse::<f64>().map_err(|_| {
                Error::Ingest(format!("line {line}: field `{name}` is not a number: `{text}`"))
            })
        };
        let parse_optional_f64 = |col: Option<usize>, name: &str| -> Result<Option<f64>> {
            match col {
                None => Ok(None),
                Some(col) => {
                    let text = field(col)?;
                    if text.is_empty() {
                        Ok(None)
                    } else {
                        parse_f64(col, name).map(Some)
                    }
                }
            }
        };

        let timestamp_text = field(ts_col)?;
        let timestamp = NaiveDateTime::parse_from_str(timestamp_text, &mapping.timestamp_format)
            .map_err(|e| {
                Error::Ingest(format!(
                    "line {line}: timestamp `{timestamp_text}` does not match `{}`: {e}",
                    mapping.timestamp_format
                ))
            })?;
        let energy_produced = parse_f64(produced_col, &mapping.energy_produced)?;
        let energy_consumed = parse_f64(consumed_col, &mapping.energy_consumed)?;
        if energy_produced < 0.0 || energy_consumed < 0.0 {
            return Err(Error::Ingest(format!(
                "line {line}: energies must be nonnegative (produced {energy_produced}, consumed {energy_consumed})"
            )));
        }
        records.push(ProsumerRecord {
            prosumer_id: field(id_col)?.to_string(),
            timestamp,
            energy_produced,
            energy_consumed,
            price: parse_optional_f64(price_col, "price")?,
            battery_capacity: parse_optional_f64(capacity_col, "battery_capacity")?,
            battery_stored: parse_optional_f64(stored_col, "battery_stored")?,
        });
    }
    Ok(records)
}

/// One prosumer-hour produced by aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct HourlyRecord {
    pub prosumer_id: String,
    /// Start of the clock hour.
    pub hour: NaiveDateTime,
    pub energy_produced: f64,
    pub energy_consumed: f64,
    /// Mean of the four interval prices, when all four are present.
    pub mean_price: Option<f64>,
    pub battery_capacity: Option<f64>,
    pub battery_stored: Option<f64>,
}

/// Aggregation output plus the gaps and duplicates it skipped over.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AggregationReport {
    pub hourly: Vec<HourlyRecord>,
    /// (prosumer, hour, samples present) for hours with fewer than 4
    /// quarter-hour samples.
    pub dropped_hours: Vec<(String, NaiveDateTime, usize)>,
    /// (prosumer, timestamp) of samples landing on an already-filled
    /// quarter slot; the first sample wins.
    pub duplicates: Vec<(String, NaiveDateTime)>,
}

fn hour_start(ts: NaiveDateTime) -> NaiveDateTime {
    ts.with_minute(0)
        .and_then(|t| t.with_second(0))
        .and_then(|t| t.with_nanosecond(0))
        .expect("truncating to the hour cannot fail")
}

/// Sums 15-minute samples into aligned clock hours per prosumer. Hours
/// with fewer than four quarter slots filled are dropped and reported;
/// duplicate slots are reported and the first sample wins. Output is
/// sorted by (prosumer, hour).
pub fn aggregate_hourly(records: &[ProsumerRecord]) -> AggregationReport {
    let mut slots: BTreeMap<(String, NaiveDateTime), [Option<&ProsumerRecord>; 4]> =
        BTreeMap::new();
    let mut report = AggregationReport::default();

    for record in records {
        let hour = hour_start(record.timestamp);
        let quarter = (record.timestamp.minute() / 15) as usize;
        let entry = slots
            .entry((record.prosumer_id.clone(), hour))
            .or_insert([None; 4]);
        if entry[quarter].is_some() {
            report
                .duplicates
                .push((record.prosumer_id.clone(), record.timestamp));
        } else {
            entry[quarter] = Some(record);
        }
    }

    for ((prosumer_id, hour), quarters) in slots {
        let present = quarters.iter().flatten().count();
        if present < 4 {
            report.dropped_hours.push((prosumer_id, hour, present));
            continue;
        }
        let samples: Vec<&ProsumerRecord> = quarters.into_iter().flatten().collect();
        let prices: Vec<f64> = samples.iter().filter_map(|r| r.price).collect();
        report.hourly.push(HourlyRecord {
            prosumer_id,
            hour,
            energy_produced: samples.iter().map(|r| r.energy_produced).sum(),
            energy_consumed: samples.iter().map(|r| r.energy_consumed).sum(),
            mean_price: (prices.len() == 4).then(|| prices.iter().sum::<f64>() / 4.0),
            battery_capacity: samples.iter().find_map(|r| r.battery_capacity),
            battery_stored: samples.iter().find_map(|r| r.battery_stored),
        });
    }
    report
}

/// Market fields for scenario assembly. The quantity is always explicit;
/// the dataset has no column for it. A missing price falls back to the
/// mean of the hour's prosumer prices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketOverride {
    pub quantity_kwh: f64,
    pub price_per_kwh: Option<f64>,
}

/// Builds a scenario for one trading hour: one microgrid per prosumer
/// present at that hour, its hourly net energy applied to the battery
/// before trading. Returns the scenario and a log of fallbacks and
/// exclusions.
pub fn build_scenario(
    hourly: &[HourlyRecord],
    hour: NaiveDateTime,
    defaults: &BatteryDefaults,
    cost_model: CostModel,
    market: MarketOverride,
    source: &str,
) -> Result<(Scenario, Vec<String>)> {
    let mut log = Vec::new();
    let hour = hour_start(hour);

    let mut at_hour: Vec<&HourlyRecord> = hourly.iter().filter(|r| r.hour == hour).collect();
    at_hour.sort_by(|a, b| a.prosumer_id.cmp(&b.prosumer_id));
    if at_hour.is_empty() {
        return Err(Error::Ingest(format!(
            "no prosumer has a complete hour at {hour}"
        )));
    }
    let absent = hourly
        .iter()
        .filter(|r| r.hour != hour)
        .map(|r| r.prosumer_id.as_str())
        .collect::<std::collections::BTreeSet<_>>();
    for prosumer in absent {
        if !at_hour.iter().any(|r| r.prosumer_id == prosumer) {
            log.push(format!("excluded `{prosumer}`: no complete data at {hour}"));
        }
    }

    let weibull = Weibull::new(defaults.weibull_scale, defaults.weibull_shape)
        .map_err(|e| Error::InvalidConfig(format!("weibull parameters: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(defaults.cycle_seed);

    let mut microgrids = Vec::with_capacity(at_hour.len());
    for record in &at_hour {
        let capacity = match record.battery_capacity {
            Some(c) => c,
            None => {
                log.push(format!(
                    "`{}`: battery capacity missing, using default {}",
                    record.prosumer_id, defaults.capacity_kwh
                ));
                defaults.capacity_kwh
            }
        };
        let stored = match record.battery_stored {
            Some(s) if s <= capacity => s,
            Some(s) => {
                log.push(format!(
                    "`{}`: stored energy {s} exceeds capacity {capacity}, clamped",
                    record.prosumer_id
                ));
                capacity
            }
            None => {
                log.push(format!(
                    "`{}`: stored energy missing, using {} of capacity",
                    record.prosumer_id, defaults.stored_fraction
                ));
                defaults.stored_fraction * capacity
            }
        };
        let age: f64 = weibull.sample(&mut rng);
        let cycles_used =
            (age.clamp(0.0, 1.0) * f64::from(defaults.max_cycles)).round() as u32;
        let battery = BatteryState::new(
            stored,
            capacity,
            cycles_used,
            defaults.max_cycles - cycles_used,
            defaults.charge_efficiency,
            defaults.discharge_efficiency,
        )
        .map_err(|e| Error::Ingest(format!("prosumer `{}`: {e}", record.prosumer_id)))?;
        let delta = record.energy_produced - record.energy_consumed;
        microgrids.push(Microgrid {
            id: record.prosumer_id.clone(),
            battery: battery.update_stored_energy(delta),
            delta_energy: delta,
        });
    }

    let price = match market.price_per_kwh {
        Some(p) => p,
        None => {
            let prices: Vec<f64> = at_hour.iter().filter_map(|r| r.mean_price).collect();
            if prices.is_empty() {
                return Err(Error::Ingest(
                    "no market price: none given and the dataset has no price column".into(),
                ));
            }
            prices.iter().sum::<f64>() / prices.len() as f64
        }
    };

    let community = Community::new(microgrids)?;
    let market_state = MarketState::new(market.quantity_kwh, price)?;
    let scenario = Scenario::new(
        community,
        market_state,
        cost_model,
        format!("{source} @ {hour}"),
        Provenance::Ingested {
            source: source.to_string(),
            hour: hour.to_string(),
        },
    )?;
    Ok((scenario, log))
}
