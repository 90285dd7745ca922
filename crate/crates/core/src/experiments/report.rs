//! Per-coalition composition report: who is in, battery levels before
//! and after the simulated trade, and the correlations among available
//! energy, cost, and Shapley share.

use crate::model::{relevant_capacity, MarketStatus};
use crate::optimizer::RunResult;
use crate::scenario::Scenario;

use super::stats::pearson;

/// One community member in the report.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberReportRow {
    pub id: String,
    pub included: bool,
    pub stored_kwh: f64,
    pub capacity_kwh: f64,
    pub remaining_cycles: u32,
    pub cycles_used: u32,
    /// Stored energy after the coalition's trade is split among members
    /// in proportion to their market-relevant capacity. Unchanged for
    /// excluded members.
    pub stored_after_trade_kwh: f64,
    pub energy_contribution_kwh: f64,
    pub degradation_cost: f64,
    pub shapley_value: Option<f64>,
}

/// The member table plus pairwise Pearson correlations over the
/// coalition members ({available energy, degradation cost, Shapley
/// value}); `None` when undefined (fewer than two members or zero
/// variance).
#[derive(Debug, Clone, PartialEq)]
pub struct CoalitionReport {
    pub rows: Vec<MemberReportRow>,
    pub pearson_energy_shapley: Option<f64>,
    pub pearson_cost_shapley: Option<f64>,
    pub pearson_energy_cost: Option<f64>,
}

impl CoalitionReport {
    pub fn empty() -> Self {
        CoalitionReport {
            rows: Vec::new(),
            pearson_energy_shapley: None,
            pearson_cost_shapley: None,
            pearson_energy_cost: None,
        }
    }
}

/// Builds the composition report for a finished run. An empty winning
/// coalition produces an empty report.
pub fn coalition_report(result: &RunResult, scenario: &Scenario) -> CoalitionReport {
    if result.best_coalition.is_empty() {
        return CoalitionReport::empty();
    }
    let market = &scenario.market;
    let status = market.status();
    let costs = &scenario.cost_model;
    let flags = &result.best_individual.flags;

    // Trade split among included members, proportional to capacity.
    let total_capacity: f64 = scenario
        .community
        .select(flags)
        .map(|mg| relevant_capacity(mg, status))
        .sum();
    let traded = result.characteristic.traded_energy;

    let mut rows = Vec::with_capacity(scenario.community.len());
    for (mg, &included) in scenario.community.microgrids().iter().zip(flags) {
        let contribution = relevant_capacity(mg, status);
        let share = if included && total_capacity > 0.0 {
            traded * contribution / total_capacity
        } else {
            0.0
        };
        let stored_after = match status {
            MarketStatus::Deficit => mg.battery.stored_energy - share,
            MarketStatus::Surplus => mg.battery.stored_energy + share,
        };
        rows.push(MemberReportRow {
            id: mg.id.clone(),
            included,
            stored_kwh: mg.battery.stored_energy,
            capacity_kwh: mg.battery.capacity,
            remaining_cycles: mg.battery.remaining_cycles,
            cycles_used: mg.battery.cycles_used,
            stored_after_trade_kwh: stored_after,
            energy_contribution_kwh: contribution,
            degradation_cost: costs.degradation_cost(&mg.battery),
            shapley_value: result.allocation.value_of(&mg.id),
        });
    }

    let included: Vec<&MemberReportRow> = rows.iter().filter(|r| r.included).collect();
    let energy: Vec<f64> = included.iter().map(|r| r.energy_contribution_kwh).collect();
    let cost: Vec<f64> = included.iter().map(|r| r.degradation_cost).collect();
    let shapley: Vec<f64> = included
        .iter()
        .map(|r| r.shapley_value.unwrap_or(0.0))
        .collect();

    CoalitionReport {
        pearson_energy_shapley: pearson(&energy, &shapley),
        pearson_cost_shapley: pearson(&cost, &shapley),
        pearson_energy_cost: pearson(&energy, &cost),
        rows,
    }
}
