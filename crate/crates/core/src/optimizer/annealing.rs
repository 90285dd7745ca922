//! Simulated-annealing refinement applied to the elite subpopulation
//! each generation.

use rand::Rng;

use crate::model::{Community, MarketState};
use crate::valuation::{CoalitionGame, CostModel};

use super::fitness::{evaluate_flags, Normalization};
use super::Individual;

/// Metropolis acceptance with the convention `delta_f =
/// fitness(current) - fitness(candidate)`: improvements (`delta_f <= 0`)
/// are always accepted, a worse candidate with probability
/// `exp(-delta_f / temperature)`.
pub fn sa_accept<R: Rng>(delta_f: f64, temperature: f64, rng: &mut R) -> bool {
    if delta_f <= 0.0 {
        true
    } else {
        rng.random::<f64>() < (-delta_f / temperature).exp()
    }
}

/// Number of proposal steps the geometric schedule performs before the
/// temperature falls to `t_min`: one per temperature value above it.
pub fn cooling_steps(t_initial: f64, t_min: f64, alpha: f64) -> usize {
    let mut t = t_initial;
    let mut steps = 0;
    while t > t_min {
        steps += 1;
        t *= alpha;
    }
    steps
}

/// Refines one individual by annealed single-flag toggles. The toggle is
/// biased by market state: while the coalition's raw capacity undershoots
/// the market quantity, an inactive member with usable capacity is
/// activated; otherwise an active member is deactivated. Fitness is
/// evaluated under the generation's frozen normalization snapshot.
pub(crate) fn sa_refine_with_game<R: Rng>(
    indiv: &Individual,
    game: &CoalitionGame,
    rho: f64,
    norm: Normalization,
    t_initial: f64,
    t_min: f64,
    alpha: f64,
    rng: &mut R,
) -> Individual {
    let e_market = game.market_magnitude();
    let mut current = indiv.flags.clone();
    let (raw, pen) = evaluate_flags(game, &current, rho);
    let mut current_fitness = norm.fitness(raw, pen);
    let mut capacity = game.capacity_of_flags(&current);

    let mut temperature = t_initial;
    while temperature > t_min {
        let toggle = pick_toggle(&current, game, capacity, e_market, rng);
        current[toggle] = !current[toggle];
        let (raw, pen) = evaluate_flags(game, &current, rho);
        let candidate_fitness = norm.fitness(raw, pen);
        if sa_accept(current_fitness - candidate_fitness, temperature, rng) {
            current_fitness = candidate_fitness;
            capacity = game.capacity_of_flags(&current);
        } else {
            current[toggle] = !current[toggle];
        }
        temperature *= alpha;
    }

    let mut refined = Individual::new(current);
    refined.cached_fitness = Some(current_fitness);
    refined
}

fn pick_toggle<R: Rng>(
    flags: &[bool],
    game: &CoalitionGame,
    capacity: f64,
    e_market: f64,
    rng: &mut R,
) -> usize {
    let candidates: Vec<usize> = if capacity < e_market {
        flags
            .iter()
            .enumerate()
            .filter_map(|(i, &on)| (!on && game.contribution(i) > 0.0).then_some(i))
            .collect()
    } else {
        flags
            .iter()
            .enumerate()
            .filter_map(|(i, &on)| on.then_some(i))
            .collect()
    };
    if candidates.is_empty() {
        rng.random_range(0..flags.len())
    } else {
        candidates[rng.random_range(0..candidates.len())]
    }
}

/// Spec-facing wrapper building the game from domain types.
#[allow(clippy::too_many_arguments)]
pub fn sa_refine<R: Rng>(
    indiv: &Individual,
    community: &Community,
    market: &MarketState,
    costs: &CostModel,
    rho: f64,
    norm: Normalization,
    t_initial: f64,
    t_min: f64,
    alpha: f64,
    rng: &mut R,
) -> Individual {
    assert!(t_min < t_initial, "t_min must be below t_initial");
    assert!(alpha > 0.0 && alpha < 1.0, "cooling factor must lie in (0, 1)");
    let game = CoalitionGame::new(community.microgrids(), market, costs);
    sa_refine_with_game(indiv, &game, rho, norm, t_initial, t_min, alpha, rng)
}
