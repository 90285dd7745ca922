//! The memetic coalition search: genetic evolution of activation-flag
//! vectors with rank selection, two-point crossover, capacity-aware
//! mutation, and simulated-annealing refinement of an elite
//! subpopulation each generation.

mod annealing;
mod fitness;
mod operators;

pub use annealing::{cooling_steps, sa_accept, sa_refine};
pub use fitness::{
    coalition_energy, diversity, evaluate_flags, penalty, population_fitness,
    population_fitness_with_game, FitnessSnapshot, Normalization, SIGMA_FLOOR,
};
pub use operators::{
    activation_probability, init_population, mutate, rank_select, two_point_crossover,
    two_point_crossover_at,
};

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::scenario::Scenario;
use crate::shapley::{
    exact_shapley, sampled_shapley, Allocation, EXACT_SHAPLEY_LIMIT,
};
use crate::valuation::{characteristic_value, CoalitionGame, CoalitionValue};

/// Permutation budget for the sampled Shapley allocation of coalitions
/// past the exact-enumeration limit.
pub const DEFAULT_SHAPLEY_PERMUTATIONS: usize = 20_000;

/// Tunable parameters of one optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub pop_size: usize,
    pub generations: usize,
    /// Percentage of flags initially active (probabilistic), in [0, 100].
    pub init_active_pct: f64,
    /// Rank-selection bias exponent, in (0, 1]; 1 is plain linear ranking.
    pub selection_pressure: f64,
    /// Severity of the market-imbalance penalty, >= 0.
    pub penalty_rho: f64,
    /// Percentage of the population refined by simulated annealing.
    pub elite_pct: f64,
    pub t_initial: f64,
    pub t_min: f64,
    /// Multiplicative temperature decay per annealing step, in (0, 1).
    pub cooling_alpha: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    /// The recommended configuration: 150 generations, population 50,
    /// cooling factor 0.8, with rho 0.5, 20% elite, and 10% initial
    /// activation.
    fn default() -> Self {
        OptimizerConfig {
            pop_size: 50,
            generations: 150,
            init_active_pct: 10.0,
            selection_pressure: 1.0,
            penalty_rho: 0.5,
            elite_pct: 20.0,
            t_initial: 1.0,
            t_min: 0.01,
            cooling_alpha: 0.8,
            seed: 42,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        use crate::error::Error::InvalidConfig;
        if self.pop_size < 2 {
            return Err(InvalidConfig(format!(
                "pop_size must be at least 2, got {}",
                self.pop_size
            )));
        }
        if self.generations == 0 {
            return Err(InvalidConfig("generations must be at least 1".into()));
        }
        if !(0.0..=100.0).contains(&self.init_active_pct) {
            return Err(InvalidConfig(format!(
                "init_active_pct must lie in [0, 100], got {}",
                self.init_active_pct
            )));
        }
        if !(self.selection_pressure > 0.0 && self.selection_pressure <= 1.0) {
            return Err(InvalidConfig(format!(
                "selection_pressure must lie in (0, 1], got {}",
                self.selection_pressure
            )));
        }
        if !(self.penalty_rho >= 0.0 && self.penalty_rho.is_finite()) {
            return Err(InvalidConfig(format!(
                "penalty_rho must be nonnegative, got {}",
                self.penalty_rho
            )));
        }
        if !(0.0..=100.0).contains(&self.elite_pct) {
            return Err(InvalidConfig(format!(
                "elite_pct must lie in [0, 100], got {}",
                self.elite_pct
            )));
        }
        if !(self.t_initial > 0.0 && self.t_min > 0.0 && self.t_min < self.t_initial) {
            return Err(InvalidConfig(format!(
                "temperatures must satisfy 0 < t_min < t_initial, got t_initial={} t_min={}",
                self.t_initial, self.t_min
            )));
        }
        if !(self.cooling_alpha > 0.0 && self.cooling_alpha < 1.0) {
            return Err(InvalidConfig(format!(
                "cooling_alpha must lie in (0, 1), got {}",
                self.cooling_alpha
            )));
        }
        Ok(())
    }

    /// Number of individuals refined by annealing each generation; at
    /// least one.
    pub fn elite_count(&self) -> usize {
        ((self.elite_pct * self.pop_size as f64 / 100.0).round() as usize).max(1)
    }

    /// One-line rendering of the effective configuration, echoed into
    /// every output header.
    pub fn echo(&self) -> String {
        format!(
            "pop_size={} generations={} init_active_pct={} selection_pressure={} \
             penalty_rho={} elite_pct={} t_initial={} t_min={} cooling_alpha={} seed={}",
            self.pop_size,
            self.generations,
            self.init_active_pct,
            self.selection_pressure,
            self.penalty_rho,
            self.elite_pct,
            self.t_initial,
            self.t_min,
            self.cooling_alpha,
            self.seed
        )
    }
}

/// One candidate coalition: a fixed-length activation-flag vector over
/// the community. Every operator preserves the length.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub flags: Vec<bool>,
    pub cached_fitness: Option<f64>,
}

impl Individual {
    pub fn new(flags: Vec<bool>) -> Self {
        Individual {
            flags,
            cached_fitness: None,
        }
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn active_count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn active_indices(&self) -> Vec<usize> {
        self.flags
            .iter()
            .enumerate()
            .filter_map(|(i, &on)| on.then_some(i))
            .collect()
    }
}

/// Per-generation record of the population after all updates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationTrace {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub diversity: f64,
    /// Highest raw characteristic value in the population; never
    /// decreases across generations.
    pub best_raw_value: f64,
}

/// Everything one optimizer run produces.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub best_individual: Individual,
    /// Ids of the active members, in community order.
    pub best_coalition: Vec<String>,
    /// Fitness of the best individual under the final population's
    /// normalization snapshot (`final_mu`, `final_sigma`).
    pub best_fitness: f64,
    /// Raw objective v - penalty of the best individual; the quantity
    /// the exhaustive oracle scores and the one comparable across runs.
    pub raw_objective: f64,
    pub characteristic: CoalitionValue,
    pub allocation: Allocation,
    pub trace: Vec<GenerationTrace>,
    pub final_mu: f64,
    pub final_sigma: f64,
    pub wall_time: Duration,
    pub seed: u64,
}

/// Runs the memetic algorithm on a scenario. Deterministic for fixed
/// (scenario, config): all randomness flows from `cfg.seed`.
///
/// Each generation: evaluate fitness under that generation's frozen
/// (mu, sigma); rank-select two parents; two-point crossover; mutate and
/// evaluate both offspring; steady-state replacement of the two worst
/// (the incumbent best-by-raw-value is never evicted); annealing on the
/// elite subpopulation; incumbent reinsertion if annealing lost the best
/// raw value.
pub fn run(scenario: &Scenario, cfg: &OptimizerConfig) -> Result<RunResult> {
    cfg.validate()?;
    let started = Instant::now();
    let community = &scenario.community;
    let market = scenario.market;
    let costs = scenario.cost_model;
    let game = CoalitionGame::new(community.microgrids(), &market, &costs);
    let rho = cfg.penalty_rho;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut population = init_population(community, cfg, &mut rng);
    let mut trace = Vec::with_capacity(cfg.generations);

    for generation in 0..cfg.generations {
        let mut snap = population_fitness_with_game(&population, &game, rho);
        for (indiv, &f) in population.iter_mut().zip(&snap.fitness) {
            indiv.cached_fitness = Some(f);
        }
        let norm = snap.normalization;

        // Two incumbents survive every generation: the best raw
        // characteristic value (the monotone-trace invariant) and the
        // best raw objective v - penalty (the quantity the oracle
        // scores; the z-term of Eq.-18-style fitness is population-
        // relative and can rank against it once sigma shrinks).
        let incumbent_index = snap.best_raw_index();
        let incumbent = population[incumbent_index].clone();
        let incumbent_raw = snap.raw_values[incumbent_index];
        let champion_index = snap.best_objective_index();
        let champion = population[champion_index].clone();
        let champion_objective = snap.objective(champion_index);

        // Selection and variation.
        let p1 = rank_select(&snap.fitness, cfg.selection_pressure, &mut rng);
        let p2 = rank_select(&snap.fitness, cfg.selection_pressure, &mut rng);
        let (c1, c2) = two_point_crossover(&population[p1], &population[p2], &mut rng);
        let offspring = [
            mutate(&c1, community, &market, &costs, &mut rng),
            mutate(&c2, community, &market, &costs, &mut rng),
        ];
        let mut scored: Vec<(Individual, f64, f64, f64)> = offspring
            .into_iter()
            .map(|child| {
                let (raw, pen) = evaluate_flags(&game, &child.flags, rho);
                let fit = norm.fitness(raw, pen);
                (child, raw, pen, fit)
            })
            .collect();
        scored.sort_by(|a, b| b.3.total_cmp(&a.3));

        // Steady-state replacement: offspring take the two worst slots
        // when strictly fitter; the incumbents' slots are off limits.
        let mut slots: Vec<usize> = (0..population.len())
            .filter(|&i| i != incumbent_index && i != champion_index)
            .collect();
        slots.sort_by(|&a, &b| snap.fitness[a].total_cmp(&snap.fitness[b]).then(a.cmp(&b)));
        for (k, (mut child, raw, pen, fit)) in scored.into_iter().enumerate() {
            match slots.get(k) {
                Some(&slot) if fit > snap.fitness[slot] => {
                    child.cached_fitness = Some(fit);
                    population[slot] = child;
                    snap.replace(slot, raw, pen);
                }
                _ => {}
            }
        }

        // Annealing on the elite subpopulation, best fitness first.
        let mut by_fitness: Vec<usize> = (0..population.len()).collect();
        by_fitness
            .sort_by(|&a, &b| snap.fitness[b].total_cmp(&snap.fitness[a]).then(a.cmp(&b)));
        for &index in by_fitness.iter().take(cfg.elite_count()) {
            let refined = annealing::sa_refine_with_game(
                &population[index],
                &game,
                rho,
                norm,
                cfg.t_initial,
                cfg.t_min,
                cfg.cooling_alpha,
                &mut rng,
            );
            let (raw, pen) = evaluate_flags(&game, &refined.flags, rho);
            snap.replace(index, raw, pen);
            population[index] = refined;
            population[index].cached_fitness = Some(snap.fitness[index]);
        }

        // Annealing may walk downhill; never lose the best raw value or
        // the best raw objective.
        let best_raw_now = snap.raw_values[snap.best_raw_index()];
        if best_raw_now < incumbent_raw {
            let worst = snap.worst_index();
            let (raw, pen) = evaluate_flags(&game, &incumbent.flags, rho);
            snap.replace(worst, raw, pen);
            population[worst] = incumbent;
            population[worst].cached_fitness = Some(snap.fitness[worst]);
        }
        if snap.objective(snap.best_objective_index()) < champion_objective {
            // Do not evict the raw-value holder just restored above.
            let keep = snap.best_raw_index();
            let mut worst = usize::MAX;
            for i in 0..population.len() {
                if i != keep && (worst == usize::MAX || snap.fitness[i] < snap.fitness[worst]) {
                    worst = i;
                }
            }
            let (raw, pen) = evaluate_flags(&game, &champion.flags, rho);
            snap.replace(worst, raw, pen);
            population[worst] = champion;
            population[worst].cached_fitness = Some(snap.fitness[worst]);
        }

        trace.push(GenerationTrace {
            generation,
            best_fitness: snap.fitness[snap.best_index()],
            mean_fitness: snap.mean_fitness(),
            diversity: diversity(&population),
            best_raw_value: snap.raw_values[snap.best_raw_index()],
        });
    }

    // Final selection: the best individual by raw fitness v - penalty,
    // the absolute currency Eq.-16-style argmax and the oracle both
    // score. (The z-scored fitness is population-relative; its argmax
    // drifts from the objective's once sigma falls below 1.) Its
    // normalized fitness under the final population's snapshot is
    // recorded alongside.
    let final_snap = population_fitness_with_game(&population, &game, rho);
    let best_index = final_snap.best_objective_index();
    let best_individual = Individual {
        flags: population[best_index].flags.clone(),
        cached_fitness: Some(final_snap.fitness[best_index]),
    };
    let members: Vec<crate::model::Microgrid> = community
        .select(&best_individual.flags)
        .cloned()
        .collect();
    let best_coalition: Vec<String> = members.iter().map(|mg| mg.id.clone()).collect();
    let characteristic = characteristic_value(members.iter(), &market, &costs);
    let allocation = if members.is_empty() {
        Allocation::empty()
    } else if members.len() <= EXACT_SHAPLEY_LIMIT {
        exact_shapley(&members, &market, &costs).expect("coalition within exact limit")
    } else {
        sampled_shapley(
            &members,
            &market,
            &costs,
            DEFAULT_SHAPLEY_PERMUTATIONS,
            cfg.seed,
        )
    };

    Ok(RunResult {
        best_fitness: final_snap.fitness[best_index],
        raw_objective: final_snap.raw_values[best_index] - final_snap.penalties[best_index],
        best_individual,
        best_coalition,
        characteristic,
        allocation,
        trace,
        final_mu: final_snap.normalization.mu,
        final_sigma: final_snap.normalization.sigma,
        wall_time: started.elapsed(),
        seed: cfg.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BatteryState, Community, MarketState, Microgrid};
    use crate::scenario::{Provenance, Scenario};
    use crate::valuation::CostModel;

    fn scenario_of(stored: &[f64], quantity: f64) -> Scenario {
        let community = Community::new(
            stored
                .iter()
                .enumerate()
                .map(|(i, &s)| {
                    Microgrid::new(
                        format!("m{i:02}"),
                        BatteryState::new(s, 16.0, (i as u32) * 300, 6000, 0.95, 0.95).unwrap(),
                        0.0,
                    )
                })
                .collect(),
        )
        .unwrap();
        Scenario::new(
            community,
            MarketState::new(quantity, 0.5).unwrap(),
            CostModel {
                delta_coeff: 0.001,
                maintenance_cost: 0.2,
            },
            "test",
            Provenance::Synthetic { seed: 0 },
        )
        .unwrap()
    }

    fn small_cfg(seed: u64) -> OptimizerConfig {
        OptimizerConfig {
            pop_size: 20,
            generations: 40,
            seed,
            ..OptimizerConfig::default()
        }
    }

    #[test]
    fn config_validation_rejects_bad_fields() {
        let mut cfg = OptimizerConfig::default();
        cfg.pop_size = 1;
        assert!(cfg.validate().is_err());
        cfg = OptimizerConfig::default();
        cfg.cooling_alpha = 1.0;
        assert!(cfg.validate().is_err());
        cfg = OptimizerConfig::default();
        cfg.t_min = 2.0;
        assert!(cfg.validate().is_err());
        assert!(OptimizerConfig::default().validate().is_ok());
    }

    #[test]
    fn elite_count_rounds_and_floors() {
        let mut cfg = OptimizerConfig::default();
        cfg.pop_size = 50;
        cfg.elite_pct = 20.0;
        assert_eq!(cfg.elite_count(), 10);
        cfg.pop_size = 3;
        cfg.elite_pct = 1.0;
        assert_eq!(cfg.elite_count(), 1);
    }

    #[test]
    fn single_microgrid_covering_the_market_is_selected() {
        // Only nonempty coalition covers the deficit exactly.
        let scenario = scenario_of(&[8.0], -8.0);
        let result = run(&scenario, &small_cfg(5)).unwrap();
        assert_eq!(result.best_coalition, vec!["m00".to_string()]);
        assert_eq!(result.characteristic.traded_energy, 8.0);
    }

    #[test]
    fn same_seed_reproduces_everything_but_wall_time() {
        let scenario = scenario_of(&[3.0, 7.0, 5.0, 2.0, 9.0, 4.0], -15.0);
        let cfg = small_cfg(11);
        let a = run(&scenario, &cfg).unwrap();
        let b = run(&scenario, &cfg).unwrap();
        assert_eq!(a.best_individual.flags, b.best_individual.flags);
        assert_eq!(a.best_fitness, b.best_fitness);
        assert_eq!(a.raw_objective, b.raw_objective);
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.allocation, b.allocation);
    }

    #[test]
    fn different_seeds_usually_differ_in_trace() {
        let scenario = scenario_of(&[3.0, 7.0, 5.0, 2.0, 9.0, 4.0], -15.0);
        let a = run(&scenario, &small_cfg(1)).unwrap();
        let b = run(&scenario, &small_cfg(2)).unwrap();
        assert_ne!(a.trace, b.trace);
    }

    #[test]
    fn best_raw_value_is_monotone_across_generations() {
        for seed in 0..10 {
            let scenario = scenario_of(&[3.0, 7.0, 5.0, 2.0, 9.0, 4.0, 6.0, 1.0], -18.0);
            let result = run(&scenario, &small_cfg(seed)).unwrap();
            for pair in result.trace.windows(2) {
                assert!(
                    pair[1].best_raw_value >= pair[0].best_raw_value,
                    "seed {seed}: raw value dropped from {} to {}",
                    pair[0].best_raw_value,
                    pair[1].best_raw_value
                );
            }
        }
    }

    #[test]
    fn operators_preserve_flag_length() {
        let scenario = scenario_of(&[3.0, 7.0, 5.0, 2.0, 9.0], -12.0);
        let result = run(&scenario, &small_cfg(3)).unwrap();
        assert_eq!(result.best_individual.len(), 5);
        assert_eq!(result.trace.len(), 40);
    }

    #[test]
    fn joint_price_and_cost_scaling_keeps_the_argmax() {
        let scenario = scenario_of(&[3.0, 7.0, 5.0, 2.0, 9.0, 4.0], -15.0);
        let scaled = Scenario::new(
            scenario.community.clone(),
            MarketState::new(scenario.market.quantity(), scenario.market.price() * 7.0).unwrap(),
            CostModel {
                delta_coeff: scenario.cost_model.delta_coeff * 7.0,
                maintenance_cost: scenario.cost_model.maintenance_cost * 7.0,
            },
            "scaled",
            Provenance::Synthetic { seed: 0 },
        )
        .unwrap();
        let cfg = small_cfg(23);
        let base = run(&scenario, &cfg).unwrap();
        let k = run(&scaled, &cfg).unwrap();
        assert_eq!(base.best_individual.flags, k.best_individual.flags);
        assert_eq!(base.best_coalition, k.best_coalition);
    }

    #[test]
    fn empty_best_coalition_yields_empty_allocation() {
        // A market so punishing that trading never pays: huge degradation
        // costs push every nonempty coalition below the empty one only if
        // the penalty is free, so use rho = 0.
        let mut scenario = scenario_of(&[0.5], -100.0);
        scenario.cost_model.maintenance_cost = 50.0;
        let mut cfg = small_cfg(2);
        cfg.penalty_rho = 0.0;
        let result = run(&scenario, &cfg).unwrap();
        assert!(result.best_coalition.is_empty());
        assert!(result.allocation.is_empty());
        assert_eq!(result.characteristic.value, 0.0);
    }
}
