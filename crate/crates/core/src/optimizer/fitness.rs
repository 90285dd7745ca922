//! Fitness machinery: imbalance penalty, population z-score
//! normalization, and the diversity metric.

use crate::model::{buy_capacity, sell_capacity, Community, MarketState, MarketStatus, ENERGY_EPSILON};
use crate::valuation::{CoalitionGame, CostModel};

use super::Individual;

/// Below this population standard deviation the z-score term is defined
/// as 0 for every individual (degenerate uniform population).
pub const SIGMA_FLOOR: f64 = 1e-12;

/// Imbalance penalty: zero when the coalition's tradable energy matches
/// the market quantity (within [`ENERGY_EPSILON`]), otherwise
/// `rho * |e_market - e_coalition|`.
pub fn penalty(e_market: f64, e_coalition: f64, rho: f64) -> f64 {
    let gap = (e_market - e_coalition).abs();
    if gap <= ENERGY_EPSILON {
        0.0
    } else {
        rho * gap
    }
}

/// Energy the coalition encoded by `indiv` would actually trade: its
/// market-relevant capacity capped by the market quantity.
pub fn coalition_energy(indiv: &Individual, community: &Community, market: &MarketState) -> f64 {
    let active = community.select(&indiv.flags);
    let capacity = match market.status() {
        MarketStatus::Deficit => sell_capacity(active),
        MarketStatus::Surplus => buy_capacity(active),
    };
    capacity.min(market.magnitude())
}

/// One generation's frozen normalization statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub mu: f64,
    pub sigma: f64,
}

impl Normalization {
    /// Fitness of a raw characteristic value under this snapshot:
    /// z-score minus penalty, with the z term zeroed when sigma is
    /// degenerate.
    pub fn fitness(&self, raw_value: f64, penalty: f64) -> f64 {
        if self.sigma < SIGMA_FLOOR {
            -penalty
        } else {
            (raw_value - self.mu) / self.sigma - penalty
        }
    }
}

/// Raw values, penalties, and normalized fitness of one population under
/// its own (mu, sigma).
#[derive(Debug, Clone)]
pub struct FitnessSnapshot {
    pub raw_values: Vec<f64>,
    pub penalties: Vec<f64>,
    pub fitness: Vec<f64>,
    pub normalization: Normalization,
}

impl FitnessSnapshot {
    /// Index of the highest-fitness individual; ties break to the lowest
    /// index.
    pub fn best_index(&self) -> usize {
        argmax(&self.fitness)
    }

    pub fn best_raw_index(&self) -> usize {
        argmax(&self.raw_values)
    }

    /// Raw objective (characteristic value minus penalty) of one
    /// individual: the normalization-free quantity the search is judged
    /// against.
    pub fn objective(&self, index: usize) -> f64 {
        self.raw_values[index] - self.penalties[index]
    }

    /// Index of the highest raw objective; ties break to the lowest
    /// index.
    pub fn best_objective_index(&self) -> usize {
        let mut best = 0;
        for i in 1..self.raw_values.len() {
            if self.objective(i) > self.objective(best) {
                best = i;
            }
        }
        best
    }

    pub fn worst_index(&self) -> usize {
        let mut worst = 0;
        for (i, &f) in self.fitness.iter().enumerate() {
            if f < self.fitness[worst] {
                worst = i;
            }
        }
        worst
    }

    pub fn mean_fitness(&self) -> f64 {
        self.fitness.iter().sum::<f64>() / self.fitness.len() as f64
    }

    /// Swaps in the evaluation of a replaced individual, keeping the
    /// generation's frozen normalization.
    pub(crate) fn replace(&mut self, index: usize, raw_value: f64, penalty: f64) {
        self.raw_values[index] = raw_value;
        self.penalties[index] = penalty;
        self.fitness[index] = self.normalization.fitness(raw_value, penalty);
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Raw value and penalty of one flag vector against a precomputed game.
pub fn evaluate_flags(game: &CoalitionGame, flags: &[bool], rho: f64) -> (f64, f64) {
    let raw = game.value_of_flags(flags);
    let e_coalition = game.traded(game.capacity_of_flags(flags));
    (raw, penalty(game.market_magnitude(), e_coalition, rho))
}

/// Evaluates the whole population: raw v per individual, population mean
/// and standard deviation of those raw values (recomputed every
/// generation), and fitness = z-score minus penalty.
pub fn population_fitness_with_game(
    population: &[Individual],
    game: &CoalitionGame,
    rho: f64,
) -> FitnessSnapshot {
    assert!(!population.is_empty(), "population must be nonempty");
    let evaluated: Vec<(f64, f64)> = population
        .iter()
        .map(|indiv| evaluate_flags(game, &indiv.flags, rho))
        .collect();
    let n = evaluated.len() as f64;
    let mu = evaluated.iter().map(|(raw, _)| raw).sum::<f64>() / n;
    let variance = evaluated
        .iter()
        .map(|(raw, _)| (raw - mu) * (raw - mu))
        .sum::<f64>()
        / n;
    let normalization = Normalization {
        mu,
        sigma: variance.sqrt(),
    };
    let mut snapshot = FitnessSnapshot {
        raw_values: Vec::with_capacity(evaluated.len()),
        penalties: Vec::with_capacity(evaluated.len()),
        fitness: Vec::with_capacity(evaluated.len()),
        normalization,
    };
    for (raw, pen) in evaluated {
        snapshot.raw_values.push(raw);
        snapshot.penalties.push(pen);
        snapshot.fitness.push(normalization.fitness(raw, pen));
    }
    snapshot
}

/// Spec-facing wrapper that builds the game from the domain types.
pub fn population_fitness(
    population: &[Individual],
    community: &Community,
    market: &MarketState,
    costs: &CostModel,
    rho: f64,
) -> FitnessSnapshot {
    let game = CoalitionGame::new(community.microgrids(), market, costs);
    population_fitness_with_game(population, &game, rho)
}

/// Mean pairwise Hamming distance between flag vectors, normalized by
/// vector length; 0 for an identical population, 1 for two complementary
/// individuals. Computed from per-position counts in O(pop * len).
pub fn diversity(population: &[Individual]) -> f64 {
    assert!(!population.is_empty(), "population must be nonempty");
    let pop = population.len();
    if pop < 2 {
        return 0.0;
    }
    let len = population[0].flags.len();
    if len == 0 {
        return 0.0;
    }
    let mut disagreements = 0u64;
    for position in 0..len {
        let ones = population
            .iter()
            .filter(|indiv| indiv.flags[position])
            .count() as u64;
        disagreements += ones * (pop as u64 - ones);
    }
    let pairs = pop as u64 * (pop as u64 - 1) / 2;
    disagreements as f64 / (pairs as f64 * len as f64)
}
