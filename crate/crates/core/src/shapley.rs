//! Shapley value allocation: exact subset enumeration for games up to
//! [`EXACT_SHAPLEY_LIMIT`] members, and a seeded Monte Carlo permutation
//! estimator beyond that.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{MarketState, MarketStatus, Microgrid};
use crate::valuation::{CoalitionGame, CostModel};

/// Largest member count for exact enumeration; 2^20 subset evaluations is
/// the desk-scale ceiling. Larger games must use sampled mode.
pub const EXACT_SHAPLEY_LIMIT: usize = 20;

/// How an allocation was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocationMethod {
    Exact,
    Sampled { n_permutations: usize, seed: u64 },
}

/// Per-member share of the grand coalition's value.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    values: BTreeMap<String, f64>,
    pub method: AllocationMethod,
    /// v of the full member set the game was built over.
    pub game_total: f64,
}

impl Allocation {
    pub fn value_of(&self, id: &str) -> Option<f64> {
        self.values.get(id).copied()
    }

    /// Members and shares in id order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(id, &v)| (id.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total_allocated(&self) -> f64 {
        self.values.values().sum()
    }

    pub fn empty() -> Self {
        Allocation {
            values: BTreeMap::new(),
            method: AllocationMethod::Exact,
            game_total: 0.0,
        }
    }
}

/// v for every subset of an n-member game, indexed by bitmask.
pub fn enumerate_values(game: &CoalitionGame) -> Vec<f64> {
    let n = game.len();
    assert!(n <= EXACT_SHAPLEY_LIMIT, "subset table for n={n} is too large");
    (0u64..(1u64 << n)).map(|mask| game.value_of_mask(mask)).collect()
}

/// Exact Shapley values from a full subset-value table (`values[mask]` =
/// v of that subset). Independent of how the table was produced, which
/// lets arbitrary games be tested against hand enumeration.
pub fn exact_shapley_from_table(n: usize, values: &[f64]) -> Vec<f64> {
    assert!(n <= EXACT_SHAPLEY_LIMIT, "exact Shapley limited to {EXACT_SHAPLEY_LIMIT} members");
    assert_eq!(values.len(), 1usize << n, "value table must cover all 2^n subsets");
    if n == 0 {
        return Vec::new();
    }
    // weight[s] = s! (n-s-1)! / n! = 1 / (n * C(n-1, s))
    let weights: Vec<f64> = (0..n)
        .map(|s| 1.0 / (n as f64 * binomial(n - 1, s)))
        .collect();
    let mut phi = vec![0.0; n];
    for (i, phi_i) in phi.iter_mut().enumerate() {
        let bit = 1u64 << i;
        let mut acc = 0.0;
        for mask in 0..(1u64 << n) {
            if mask & bit != 0 {
                continue;
            }
            let size = mask.count_ones() as usize;
            acc += weights[size]
                * (values[(mask | bit) as usize] - values[mask as usize]);
        }
        *phi_i = acc;
    }
    phi
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k.min(n));
    let mut result = 1.0;
    for j in 0..k {
        result = result * (n - j) as f64 / (j + 1) as f64;
    }
    result
}

/// Exact Shapley allocation over `members` as the grand coalition, with
/// the characteristic function restricted to them.
pub fn exact_shapley(
    members: &[Microgrid],
    market: &MarketState,
    costs: &CostModel,
) -> Result<Allocation> {
    let n = members.len();
    if n > EXACT_SHAPLEY_LIMIT {
        return Err(Error::CoalitionTooLarge {
            n,
            limit: EXACT_SHAPLEY_LIMIT,
        });
    }
    let game = CoalitionGame::new(members, market, costs);
    let table = enumerate_values(&game);
    let phi = exact_shapley_from_table(n, &table);
    let values = members
        .iter()
        .zip(&phi)
        .map(|(mg, &v)| (mg.id.clone(), v))
        .collect();
    Ok(Allocation {
        values,
        method: AllocationMethod::Exact,
        game_total: table.last().copied().unwrap_or(0.0),
    })
}

/// Monte Carlo Shapley estimate: marginal contributions averaged over
/// `n_permutations` uniformly random join orders drawn from a generator
/// seeded by `seed`. Identical inputs and seed give identical output;
/// each permutation's marginals telescope to v of the full set, so the
/// efficiency axiom holds per sample.
pub fn sampled_shapley(
    members: &[Microgrid],
    market: &MarketState,
    costs: &CostModel,
    n_permutations: usize,
    seed: u64,
) -> Allocation {
    assert!(n_permutations >= 1, "need at least one permutation");
    let n = members.len();
    let game = CoalitionGame::new(members, market, costs);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut sums = vec![0.0; n];
    for _ in 0..n_permutations {
        order.shuffle(&mut rng);
        let mut contribution = 0.0;
        let mut degradation = 0.0;
        let mut previous = 0.0;
        for &i in &order {
            contribution += game.contribution(i);
            degradation += game.degradation_cost(i);
            let with = game.value_from_totals(contribution, degradation, false);
            sums[i] += with - previous;
            previous = with;
        }
    }
    let scale = 1.0 / n_permutations as f64;
    let values = members
        .iter()
        .zip(&sums)
        .map(|(mg, &s)| (mg.id.clone(), s * scale))
        .collect();
    let full: Vec<bool> = vec![true; n];
    Allocation {
        values,
        method: AllocationMethod::Sampled {
            n_permutations,
            seed,
        },
        game_total: game.value_of_flags(&full),
    }
}

/// One row of the per-member allocation table.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationRow {
    pub id: String,
    /// The member's market-relevant energy: stored energy in a deficit
    /// game, free capacity in a surplus game.
    pub energy_contribution_kwh: f64,
    pub degradation_cost: f64,
    pub shapley_value: f64,
}

/// Tabulates an allocation member by member, in member order, for the
/// downstream correlation analysis.
pub fn allocation_report(
    allocation: &Allocation,
    members: &[Microgrid],
    market: &MarketState,
    costs: &CostModel,
) -> Vec<AllocationRow> {
    let status = market.status();
    members
        .iter()
        .map(|mg| {
            let shapley = allocation
                .value_of(&mg.id)
                .unwrap_or_else(|| panic!("allocation does not cover member `{}`", mg.id));
            AllocationRow {
                id: mg.id.clone(),
                energy_contribution_kwh: crate::model::relevant_capacity(mg, status),
                degradation_cost: costs.degradation_cost(&mg.battery),
                shapley_value: shapley,
            }
        })
        .collect()
}

/// Traded-energy share of each member when the grand coalition trades:
/// proportional to market-relevant capacity. Used by the before/after
/// battery report.
pub fn trade_shares(members: &[Microgrid], market: &MarketState) -> Vec<f64> {
    let status = market.status();
    let capacities: Vec<f64> = members
        .iter()
        .map(|mg| crate::model::relevant_capacity(mg, status))
        .collect();
    let total: f64 = capacities.iter().sum();
    if total <= 0.0 {
        return vec![0.0; members.len()];
    }
    let traded = total.min(market.magnitude());
    capacities.iter().map(|c| traded * c / total).collect()
}

pub fn market_sign(status: MarketStatus) -> f64 {
    match status {
        MarketStatus::Deficit => -1.0,
        MarketStatus::Surplus => 1.0,
    }
}
