//! Coalition valuation: the characteristic function with market caps,
//! battery-degradation cost, and a flat per-coalition operating cost.

use crate::error::{Error, Result};
use crate::model::{buy_capacity, sell_capacity, BatteryState, MarketState, MarketStatus, Microgrid};

/// Cost coefficients of the trading process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    /// Currency of battery damage per performed cycle, in (0, 1).
    pub delta_coeff: f64,
    /// Flat maintenance cost charged once per (nonempty) coalition trade.
    pub maintenance_cost: f64,
}

impl CostModel {
    pub fn new(delta_coeff: f64, maintenance_cost: f64) -> Result<Self> {
        let cm = CostModel {
            delta_coeff,
            maintenance_cost,
        };
        cm.validate()?;
        Ok(cm)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.delta_coeff.is_finite() || self.delta_coeff <= 0.0 || self.delta_coeff >= 1.0 {
            return Err(Error::InvalidScenario(format!(
                "degradation coefficient must lie in (0, 1), got {}",
                self.delta_coeff
            )));
        }
        if !self.maintenance_cost.is_finite() || self.maintenance_cost < 0.0 {
            return Err(Error::InvalidScenario(format!(
                "maintenance cost must be nonnegative, got {}",
                self.maintenance_cost
            )));
        }
        Ok(())
    }

    /// Battery degradation cost at trade time: `delta_coeff` per cycle
    /// already performed.
    pub fn degradation_cost(&self, battery: &BatteryState) -> f64 {
        self.delta_coeff * f64::from(battery.cycles_used)
    }
}

/// Value of one coalition against one market snapshot, with its exact
/// decomposition: `value = price * traded_energy - total_degradation_cost
/// - operating_cost`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoalitionValue {
    pub value: f64,
    pub traded_energy: f64,
    pub total_degradation_cost: f64,
    pub operating_cost: f64,
}

impl CoalitionValue {
    pub const EMPTY: CoalitionValue = CoalitionValue {
        value: 0.0,
        traded_energy: 0.0,
        total_degradation_cost: 0.0,
        operating_cost: 0.0,
    };
}

/// Characteristic function v(C): revenue (deficit market) or savings
/// (surplus market) on the energy actually traded, capped by the market
/// quantity, minus degradation and operating costs. The empty coalition
/// has value 0 by convention.
pub fn characteristic_value<'a, I>(
    members: I,
    market: &MarketState,
    costs: &CostModel,
) -> CoalitionValue
where
    I: IntoIterator<Item = &'a Microgrid>,
    I::IntoIter: Clone,
{
    let members = members.into_iter();
    let mut iter = members.clone().peekable();
    if iter.peek().is_none() {
        return CoalitionValue::EMPTY;
    }
    let capacity = match market.status() {
        MarketStatus::Deficit => sell_capacity(members.clone()),
        MarketStatus::Surplus => buy_capacity(members.clone()),
    };
    let traded = capacity.min(market.magnitude());
    let degradation: f64 = members.map(|mg| costs.degradation_cost(&mg.battery)).sum();
    let operating = costs.maintenance_cost;
    CoalitionValue {
        value: market.price() * traded - degradation - operating,
        traded_energy: traded,
        total_degradation_cost: degradation,
        operating_cost: operating,
    }
}

/// Outcome of checking `v(c1 ∪ c2) >= v(c1) + v(c2)` on two disjoint
/// coalitions. Diagnostic only: the capped characteristic function can
/// violate it, and the solvers never assume it holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperadditivityReport {
    pub holds: bool,
    /// v(c1 ∪ c2)
    pub lhs: f64,
    /// v(c1) + v(c2)
    pub rhs: f64,
}

pub fn superadditivity_check(
    c1: &[&Microgrid],
    c2: &[&Microgrid],
    market: &MarketState,
    costs: &CostModel,
) -> Result<SuperadditivityReport> {
    for a in c1 {
        if let Some(b) = c2.iter().find(|b| b.id == a.id) {
            return Err(Error::OverlappingCoalitions { id: b.id.clone() });
        }
    }
    let union: Vec<&Microgrid> = c1.iter().chain(c2.iter()).copied().collect();
    let lhs = characteristic_value(union.iter().copied(), market, costs).value;
    let rhs = characteristic_value(c1.iter().copied(), market, costs).value
        + characteristic_value(c2.iter().copied(), market, costs).value;
    Ok(SuperadditivityReport {
        holds: lhs >= rhs,
        lhs,
        rhs,
    })
}

/// Precomputed per-member arrays for fast repeated coalition valuation.
/// Shapley enumeration, the exhaustive oracle, and the optimizer's
/// fitness loop all evaluate v through this form; it matches
/// [`characteristic_value`] member-for-member.
#[derive(Debug, Clone)]
pub struct CoalitionGame {
    contributions: Vec<f64>,
    degradation: Vec<f64>,
    price: f64,
    market_magnitude: f64,
    maintenance: f64,
}

impl CoalitionGame {
    pub fn new(members: &[Microgrid], market: &MarketState, costs: &CostModel) -> Self {
        let status = market.status();
        CoalitionGame {
            contributions: members
                .iter()
                .map(|mg| crate::model::relevant_capacity(mg, status))
                .collect(),
            degradation: members
                .iter()
                .map(|mg| costs.degradation_cost(&mg.battery))
                .collect(),
            price: market.price(),
            market_magnitude: market.magnitude(),
            maintenance: costs.maintenance_cost,
        }
    }

    pub fn len(&self) -> usize {
        self.contributions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contributions.is_empty()
    }

    /// Market-relevant capacity of member `i` (stored energy in a
    /// deficit, free capacity in a surplus).
    pub fn contribution(&self, i: usize) -> f64 {
        self.contributions[i]
    }

    pub fn degradation_cost(&self, i: usize) -> f64 {
        self.degradation[i]
    }

    pub fn market_magnitude(&self) -> f64 {
        self.market_magnitude
    }

    /// Energy a coalition with the given total capacity would trade.
    pub fn traded(&self, contribution_sum: f64) -> f64 {
        contribution_sum.min(self.market_magnitude)
    }

    /// v from precomputed totals. `empty` marks the empty coalition,
    /// which is worth exactly 0 and pays no maintenance.
    pub fn value_from_totals(&self, contribution_sum: f64, degradation_sum: f64, empty: bool) -> f64 {
        if empty {
            return 0.0;
        }
        self.price * self.traded(contribution_sum) - degradation_sum - self.maintenance
    }

    /// v of the coalition encoded by a bitmask over the member indices.
    /// Accumulation runs in ascending index order so that identical
    /// coalitions produce bit-identical values everywhere.
    pub fn value_of_mask(&self, mask: u64) -> f64 {
        debug_assert!(self.len() <= 64);
        let mut contribution = 0.0;
        let mut degradation = 0.0;
        let mut bits = mask;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            contribution += self.contributions[i];
            degradation += self.degradation[i];
            bits &= bits - 1;
        }
        self.value_from_totals(contribution, degradation, mask == 0)
    }

    /// v of the coalition encoded by an activation-flag vector.
    pub fn value_of_flags(&self, flags: &[bool]) -> f64 {
        debug_assert_eq!(flags.len(), self.len());
        let mut contribution = 0.0;
        let mut degradation = 0.0;
        let mut empty = true;
        for (i, &on) in flags.iter().enumerate() {
            if on {
                contribution += self.contributions[i];
                degradation += self.degradation[i];
                empty = false;
            }
        }
        self.value_from_totals(contribution, degradation, empty)
    }

    /// Raw capacity (uncapped) of the coalition encoded by flags.
    pub fn capacity_of_flags(&self, flags: &[bool]) -> f64 {
        flags
            .iter()
            .enumerate()
            .filter_map(|(i, &on)| on.then(|| self.contributions[i]))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BatteryState;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn grid(id: &str, stored: f64, capacity: f64, cycles_used: u32) -> Microgrid {
        Microgrid::new(
            id,
            BatteryState::new(stored, capacity, cycles_used, 6000, 0.95, 0.95).unwrap(),
            0.0,
        )
    }

    fn costs(delta: f64, maintenance: f64) -> CostModel {
        CostModel {
            delta_coeff: delta,
            maintenance_cost: maintenance,
        }
    }

    #[test]
    fn degradation_cost_is_linear_in_cycles() {
        let cm = costs(0.01, 0.0);
        assert_relative_eq!(
            cm.degradation_cost(&grid("a", 1.0, 15.0, 3000).battery),
            30.0
        );
        assert_eq!(cm.degradation_cost(&grid("a", 1.0, 15.0, 0).battery), 0.0);
        let cm = costs(0.5, 0.0);
        assert_relative_eq!(cm.degradation_cost(&grid("a", 1.0, 15.0, 10).battery), 5.0);
    }

    #[test]
    fn deficit_value_caps_at_market_quantity() {
        // sell capacity 10 vs |quantity| 8, deg 0.6 total, maintenance 0.4
        let mgs = vec![grid("a", 4.0, 15.0, 30), grid("b", 6.0, 15.0, 30)];
        let market = MarketState::new(-8.0, 0.5).unwrap();
        let cv = characteristic_value(mgs.iter(), &market, &costs(0.01, 0.4));
        assert_relative_eq!(cv.traded_energy, 8.0);
        assert_relative_eq!(cv.value, 3.0, max_relative = 1e-12);
        assert_relative_eq!(cv.value, cv.traded_energy * 0.5 - cv.total_degradation_cost - cv.operating_cost);
    }

    #[test]
    fn empty_coalition_is_worth_zero() {
        let market = MarketState::new(-8.0, 0.5).unwrap();
        let cv = characteristic_value(std::iter::empty(), &market, &costs(0.01, 0.4));
        assert_eq!(cv, CoalitionValue::EMPTY);
    }

    #[test]
    fn surplus_value_caps_at_buy_capacity() {
        // buy capacity 4 vs quantity 6, deg 0.1 + maintenance 0.1
        let mgs = vec![grid("a", 11.0, 15.0, 5), grid("b", 15.0, 15.0, 5)];
        let market = MarketState::new(6.0, 0.2).unwrap();
        let cv = characteristic_value(mgs.iter(), &market, &costs(0.01, 0.1));
        assert_relative_eq!(cv.traded_energy, 4.0);
        assert_relative_eq!(cv.value, 0.6, max_relative = 1e-12);
    }

    #[test]
    fn superadditivity_with_empty_side_holds() {
        let mgs = vec![grid("a", 4.0, 15.0, 10)];
        let market = MarketState::new(-8.0, 0.5).unwrap();
        let refs: Vec<&Microgrid> = mgs.iter().collect();
        let report = superadditivity_check(&refs, &[], &market, &costs(0.01, 0.4)).unwrap();
        assert!(report.holds);
        assert_relative_eq!(report.lhs, report.rhs);
    }

    #[test]
    fn superadditivity_holds_below_cap_without_operating_cost() {
        // Combined sell capacity 6 < |quantity| 10 and maintenance 0:
        // v is additive apart from the shared (empty) operating cost.
        let a = vec![grid("a", 2.0, 15.0, 100)];
        let b = vec![grid("b", 4.0, 15.0, 200)];
        let market = MarketState::new(-10.0, 1.0).unwrap();
        let ra: Vec<&Microgrid> = a.iter().collect();
        let rb: Vec<&Microgrid> = b.iter().collect();
        let report = superadditivity_check(&ra, &rb, &market, &costs(0.001, 0.0)).unwrap();
        assert!(report.holds);
        assert_relative_eq!(report.lhs, report.rhs, max_relative = 1e-12);
    }

    #[test]
    fn superadditivity_fails_when_cap_binds_and_costs_add() {
        // Each side alone saturates the 10 kWh market; the union trades
        // the same energy but the flat cost is only saved once.
        let a = vec![grid("a", 10.0, 15.0, 0)];
        let b = vec![grid("b", 10.0, 15.0, 0)];
        let market = MarketState::new(-10.0, 1.0).unwrap();
        let ra: Vec<&Microgrid> = a.iter().collect();
        let rb: Vec<&Microgrid> = b.iter().collect();
        let report = superadditivity_check(&ra, &rb, &market, &costs(0.001, 2.0)).unwrap();
        assert!(!report.holds);
        assert_relative_eq!(report.lhs, 8.0);
        assert_relative_eq!(report.rhs, 16.0);
    }

    #[test]
    fn superadditivity_rejects_overlap() {
        let mgs = vec![grid("a", 4.0, 15.0, 10)];
        let market = MarketState::new(-8.0, 0.5).unwrap();
        let refs: Vec<&Microgrid> = mgs.iter().collect();
        let err = superadditivity_check(&refs, &refs, &market, &costs(0.01, 0.4));
        assert!(matches!(err, Err(Error::OverlappingCoalitions { .. })));
    }

    fn arb_members() -> impl Strategy<Value = Vec<Microgrid>> {
        proptest::collection::vec((0.0f64..15.0, 0u32..6000), 0..8).prop_map(|specs| {
            specs
                .into_iter()
                .enumerate()
                .map(|(i, (stored, cycles))| grid(&format!("m{i}"), stored, 15.0, cycles))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn value_decomposition_is_exact(
            members in arb_members(),
            quantity in prop_oneof![-40.0f64..-0.1, 0.1f64..40.0],
            price in 0.05f64..2.0,
        ) {
            let market = MarketState::new(quantity, price).unwrap();
            let cm = costs(0.001, 0.3);
            let cv = characteristic_value(members.iter(), &market, &cm);
            prop_assert!(cv.traded_energy <= market.magnitude() + 1e-12);
            prop_assert_eq!(
                cv.value,
                price * cv.traded_energy - cv.total_degradation_cost - cv.operating_cost
            );
        }

        #[test]
        fn value_is_permutation_invariant(
            members in arb_members(),
            quantity in prop_oneof![-40.0f64..-0.1, 0.1f64..40.0],
        ) {
            let market = MarketState::new(quantity, 0.5).unwrap();
            let cm = costs(0.001, 0.3);
            let forward = characteristic_value(members.iter(), &market, &cm);
            let reversed = characteristic_value(members.iter().rev(), &market, &cm);
            prop_assert!((forward.value - reversed.value).abs() <= 1e-9);
            prop_assert!((forward.traded_energy - reversed.traded_energy).abs() <= 1e-9);
        }

        #[test]
        fn game_matches_direct_valuation(
            members in arb_members(),
            quantity in prop_oneof![-40.0f64..-0.1, 0.1f64..40.0],
            keep in proptest::collection::vec(any::<bool>(), 8),
        ) {
            let market = MarketState::new(quantity, 0.5).unwrap();
            let cm = costs(0.001, 0.3);
            let game = CoalitionGame::new(&members, &market, &cm);
            let flags: Vec<bool> = members.iter().enumerate().map(|(i, _)| keep[i]).collect();
            let subset: Vec<&Microgrid> = members
                .iter()
                .zip(&flags)
                .filter_map(|(mg, &k)| k.then_some(mg))
                .collect();
            let direct = characteristic_value(subset.into_iter(), &market, &cm);
            prop_assert!((game.value_of_flags(&flags) - direct.value).abs() <= 1e-9);
        }

        #[test]
        fn growth_below_cap_is_price_times_capacity_minus_costs(
            members in arb_members(),
            extra_stored in 0.1f64..10.0,
        ) {
            // Uncapped regime: quantity far above any capacity.
            prop_assume!(!members.is_empty());
            let market = MarketState::new(-1000.0, 0.7).unwrap();
            let cm = costs(0.002, 0.3);
            let small = characteristic_value(members.iter(), &market, &cm);
            let mut extended = members.clone();
            extended.push(grid("extra", extra_stored, 15.0, 500));
            let big = characteristic_value(extended.iter(), &market, &cm);
            let expected = 0.7 * extra_stored - 0.002 * 500.0;
            prop_assert!((big.value - small.value - expected).abs() <= 1e-9);
        }
    }
}
