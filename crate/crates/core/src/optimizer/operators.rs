//! Genetic operators: probabilistic initialization, linear rank
//! selection, two-point crossover, and the capacity-aware flag mutation.

use rand::Rng;

use crate::model::{Community, MarketState, MarketStatus, Microgrid};
use crate::valuation::CostModel;

use super::{Individual, OptimizerConfig};

/// Generates `pop_size` individuals; each flag is set independently with
/// probability `init_active_pct / 100` from one uniform draw per flag.
pub fn init_population<R: Rng>(
    community: &Community,
    cfg: &OptimizerConfig,
    rng: &mut R,
) -> Vec<Individual> {
    let threshold = cfg.init_active_pct / 100.0;
    (0..cfg.pop_size)
        .map(|_| {
            let flags = (0..community.len())
                .map(|_| rng.random::<f64>() < threshold)
                .collect();
            Individual::new(flags)
        })
        .collect()
}

/// Samples one parent index by linear ranking: rank r (1 = best) gets
/// weight `(n - r + 1)^(1/pressure)`; individuals with equal fitness
/// share the average weight of their tied ranks, so ties select with
/// equal probability. `pressure = 1` is plain linear ranking.
pub fn rank_select<R: Rng>(fitness: &[f64], pressure: f64, rng: &mut R) -> usize {
    assert!(!fitness.is_empty(), "cannot select from an empty population");
    assert!(pressure > 0.0, "selection pressure must be positive");
    let n = fitness.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));

    let mut weights: Vec<f64> = (0..n)
        .map(|position| ((n - position) as f64).powf(1.0 / pressure))
        .collect();
    // Average the weights within runs of equal fitness.
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && fitness[order[end]] == fitness[order[start]] {
            end += 1;
        }
        if end - start > 1 {
            let mean = weights[start..end].iter().sum::<f64>() / (end - start) as f64;
            weights[start..end].fill(mean);
        }
        start = end;
    }

    let total: f64 = weights.iter().sum();
    let draw = rng.random::<f64>() * total;
    let mut cumulative = 0.0;
    for (position, &weight) in weights.iter().enumerate() {
        cumulative += weight;
        if draw < cumulative {
            return order[position];
        }
    }
    order[n - 1]
}

/// Swaps the segment `[a, b)` between the parents.
pub fn two_point_crossover_at(
    parent1: &Individual,
    parent2: &Individual,
    a: usize,
    b: usize,
) -> (Individual, Individual) {
    debug_assert!(a < b && b < parent1.flags.len() + 1);
    let mut child1 = parent1.flags.clone();
    let mut child2 = parent2.flags.clone();
    child1[a..b].copy_from_slice(&parent2.flags[a..b]);
    child2[a..b].copy_from_slice(&parent1.flags[a..b]);
    (Individual::new(child1), Individual::new(child2))
}

/// Two-point crossover with cut points `a < b` drawn uniformly from
/// `{1, .., len-1}`. Vectors shorter than 3 have no valid cut pair and
/// pass through unchanged.
pub fn two_point_crossover<R: Rng>(
    parent1: &Individual,
    parent2: &Individual,
    rng: &mut R,
) -> (Individual, Individual) {
    let len = parent1.flags.len();
    assert_eq!(len, parent2.flags.len(), "parents must have equal length");
    if len < 3 {
        return (
            Individual::new(parent1.flags.clone()),
            Individual::new(parent2.flags.clone()),
        );
    }
    let (a, b) = loop {
        let a = rng.random_range(1..len);
        let b = rng.random_range(1..len);
        if a != b {
            break (a.min(b), a.max(b));
        }
    };
    two_point_crossover_at(parent1, parent2, a, b)
}

/// Activation probability of one microgrid: how much of the market
/// quantity its battery could serve, net of its degradation cost, both
/// clamped to [0, 1]. Deficit markets weigh stored energy minus cost;
/// surplus markets weigh free capacity.
pub fn activation_probability(mg: &Microgrid, market: &MarketState, costs: &CostModel) -> f64 {
    let ratio = match market.status() {
        MarketStatus::Deficit => {
            (mg.battery.stored_energy - costs.degradation_cost(&mg.battery)) / market.magnitude()
        }
        MarketStatus::Surplus => mg.battery.free_capacity() / market.magnitude(),
    };
    ratio.clamp(0.0, 1.0)
}

/// One-point mutation: picks one member uniformly and re-decides its flag
/// by comparing the activation probability against a fresh uniform draw.
pub fn mutate<R: Rng>(
    indiv: &Individual,
    community: &Community,
    market: &MarketState,
    costs: &CostModel,
    rng: &mut R,
) -> Individual {
    assert_eq!(indiv.flags.len(), community.len(), "flag length must match community");
    let index = rng.random_range(0..community.len());
    let p = activation_probability(community.get(index), market, costs);
    let mut flags = indiv.flags.clone();
    flags[index] = p > rng.random::<f64>();
    Individual::new(flags)
}
