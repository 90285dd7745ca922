//! Exhaustive ground truth for small communities: enumerates all 2^n
//! coalitions and ranks them by the raw objective v - penalty, the same
//! un-normalized quantity the memetic search is judged against.

use crate::error::{Error, Result};
use crate::optimizer::penalty;
use crate::scenario::Scenario;
use crate::valuation::CoalitionGame;

/// Default community-size ceiling: 2^22 subset evaluations.
pub const DEFAULT_ORACLE_LIMIT: usize = 22;

/// One enumerated coalition with its objective.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedCoalition {
    /// Member ids, in community order.
    pub members: Vec<String>,
    pub objective: f64,
    pub cardinality: usize,
}

/// The global optimum plus the top of the ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub best_coalition: Vec<String>,
    pub best_objective: f64,
    /// Highest-objective coalitions, best first.
    pub top: Vec<RankedCoalition>,
}

/// Raw objective of one coalition mask: v(C) minus the imbalance penalty
/// at the given rho. Accumulation order matches the memetic fitness
/// path, so equal coalitions score bit-identically.
pub fn objective_of_mask(game: &CoalitionGame, mask: u64, rho: f64) -> f64 {
    let mut contribution = 0.0;
    let mut degradation = 0.0;
    let mut bits = mask;
    while bits != 0 {
        let i = bits.trailing_zeros() as usize;
        contribution += game.contribution(i);
        degradation += game.degradation_cost(i);
        bits &= bits - 1;
    }
    let value = game.value_from_totals(contribution, degradation, mask == 0);
    let traded = game.traded(contribution);
    value - penalty(game.market_magnitude(), traded, rho)
}

/// Raw objective of a flag-encoded coalition, through the same path.
pub fn objective_of_flags(scenario: &Scenario, flags: &[bool], rho: f64) -> f64 {
    let game = CoalitionGame::new(
        scenario.community.microgrids(),
        &scenario.market,
        &scenario.cost_model,
    );
    let mut mask = 0u64;
    for (i, &on) in flags.iter().enumerate() {
        if on {
            mask |= 1 << i;
        }
    }
    objective_of_mask(&game, mask, rho)
}

/// Enumerates every subset of the community (including the empty one)
/// and returns the optimum plus the `top_k` best coalitions. Ties break
/// to the smaller coalition, then to lexicographically smaller member
/// ids.
pub fn solve_exhaustive(
    scenario: &Scenario,
    rho: f64,
    limit_n: usize,
    top_k: usize,
) -> Result<OracleResult> {
    let n = scenario.community.len();
    if n > limit_n {
        return Err(Error::CommunityTooLarge { n, limit: limit_n });
    }
    assert!(n <= 63, "mask enumeration requires n <= 63");
    let game = CoalitionGame::new(
        scenario.community.microgrids(),
        &scenario.market,
        &scenario.cost_model,
    );
    let ids: Vec<&str> = scenario
        .community
        .microgrids()
        .iter()
        .map(|mg| mg.id.as_str())
        .collect();

    // (objective, cardinality, sorted ids) with the tie-break ordering.
    let sort_key = |mask: u64| -> Vec<String> {
        let mut members: Vec<String> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| ids[i].to_string())
            .collect();
        members.sort();
        members
    };
    let better = |a: &(f64, usize, Vec<String>), b: &(f64, usize, Vec<String>)| -> bool {
        match a.0.total_cmp(&b.0) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => match a.1.cmp(&b.1) {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Greater => false,
                std::cmp::Ordering::Equal => a.2 < b.2,
            },
        }
    };

    let mut top: Vec<(u64, (f64, usize, Vec<String>))> = Vec::with_capacity(top_k + 1);
    for mask in 0..(1u64 << n) {
        let objective = objective_of_mask(&game, mask, rho);
        let cardinality = mask.count_ones() as usize;
        if top.len() == top_k {
            let worst = &top[top.len() - 1].1;
            // Cheap reject without building the id list.
            if objective < worst.0 {
                continue;
            }
        }
        let entry = (objective, cardinality, sort_key(mask));
        let position = top
            .iter()
            .position(|(_, existing)| better(&entry, existing))
            .unwrap_or(top.len());
        top.insert(position, (mask, entry));
        top.truncate(top_k);
    }

    let ranked: Vec<RankedCoalition> = top
        .iter()
        .map(|(mask, (objective, cardinality, _))| RankedCoalition {
            members: (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| ids[i].to_string())
                .collect(),
            objective: *objective,
            cardinality: *cardinality,
        })
        .collect();
    let best = ranked
        .first()
        .cloned()
        .expect("enumeration covers at least the empty coalition");
    Ok(OracleResult {
        best_coalition: best.members,
        best_objective: best.objective,
        top: ranked,
    })
}
