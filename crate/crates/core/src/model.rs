//! Domain types for microgrids, batteries, and the energy market, plus the
//! state-transition functions the rest of the crate builds on.
//!
//! Everything here is an immutable value: state transitions return new
//! values, so all of it is safe to share across worker threads.

use crate::error::{Error, Result};

/// Absolute tolerance (kWh) for energy comparisons: battery status
/// boundaries and the zero-gap test of the imbalance penalty.
pub const ENERGY_EPSILON: f64 = 1e-9;

/// State of one storage battery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryState {
    /// Energy currently stored, kWh. Always in `[0, capacity]`.
    pub stored_energy: f64,
    /// Maximum storable energy, kWh.
    pub capacity: f64,
    /// Charge/discharge cycles performed so far.
    pub cycles_used: u32,
    /// Charge/discharge cycles left before end of life.
    pub remaining_cycles: u32,
    /// Fraction of charged energy retained, in (0, 1].
    pub charge_efficiency: f64,
    /// Fraction governing extra draw on discharge, in (0, 1].
    pub discharge_efficiency: f64,
}

/// Coarse battery status derived from the fill level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatteryStatus {
    FullyCharged,
    PartiallyCharged,
    Discharged,
}

impl BatteryState {
    pub fn new(
        stored_energy: f64,
        capacity: f64,
        cycles_used: u32,
        remaining_cycles: u32,
        charge_efficiency: f64,
        discharge_efficiency: f64,
    ) -> Result<Self> {
        let battery = BatteryState {
            stored_energy,
            capacity,
            cycles_used,
            remaining_cycles,
            charge_efficiency,
            discharge_efficiency,
        };
        battery.validate()?;
        Ok(battery)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.capacity.is_finite() || self.capacity <= 0.0 {
            return Err(Error::InvalidScenario(format!(
                "battery capacity must be positive and finite, got {}",
                self.capacity
            )));
        }
        if !self.stored_energy.is_finite()
            || self.stored_energy < 0.0
            || self.stored_energy > self.capacity
        {
            return Err(Error::InvalidScenario(format!(
                "stored energy {} outside [0, {}]",
                self.stored_energy, self.capacity
            )));
        }
        for (name, eta) in [
            ("charge_efficiency", self.charge_efficiency),
            ("discharge_efficiency", self.discharge_efficiency),
        ] {
            if !eta.is_finite() || eta <= 0.0 || eta > 1.0 {
                return Err(Error::InvalidScenario(format!(
                    "{name} must lie in (0, 1], got {eta}"
                )));
            }
        }
        Ok(())
    }

    /// Fully charged iff the battery is at capacity, discharged iff empty
    /// (both within [`ENERGY_EPSILON`]), partially charged otherwise.
    pub fn status(&self) -> BatteryStatus {
        if (self.capacity - self.stored_energy).abs() <= ENERGY_EPSILON {
            BatteryStatus::FullyCharged
        } else if self.stored_energy.abs() <= ENERGY_EPSILON {
            BatteryStatus::Discharged
        } else {
            BatteryStatus::PartiallyCharged
        }
    }

    /// Room left for charging, kWh.
    pub fn free_capacity(&self) -> f64 {
        self.capacity - self.stored_energy
    }

    /// Applies one hourly net-energy step: charging retains
    /// `charge_efficiency * delta`, discharging draws `|delta| /
    /// discharge_efficiency`. The result is clamped to `[0, capacity]`;
    /// any nonzero change in stored energy consumes one cycle.
    pub fn update_stored_energy(&self, delta: f64) -> BatteryState {
        let raw = if delta > 0.0 {
            self.stored_energy + self.charge_efficiency * delta
        } else if delta < 0.0 {
            self.stored_energy - delta.abs() / self.discharge_efficiency
        } else {
            self.stored_energy
        };
        let stored = raw.clamp(0.0, self.capacity);
        let mut next = *self;
        next.stored_energy = stored;
        if stored != self.stored_energy {
            next.cycles_used = self.cycles_used.saturating_add(1);
            next.remaining_cycles = self.remaining_cycles.saturating_sub(1);
        }
        next
    }
}

/// One microgrid: a stable identifier, its battery, and the hourly net
/// energy (produced minus consumed) that led to the current battery state.
#[derive(Debug, Clone, PartialEq)]
pub struct Microgrid {
    pub id: String,
    pub battery: BatteryState,
    /// Net energy for the trading hour, kWh (positive = surplus).
    pub delta_energy: f64,
}

impl Microgrid {
    pub fn new(id: impl Into<String>, battery: BatteryState, delta_energy: f64) -> Self {
        Microgrid {
            id: id.into(),
            battery,
            delta_energy,
        }
    }
}

/// The community of microgrids. Order is fixed at construction and never
/// changes afterwards; individual encodings index into it.
#[derive(Debug, Clone, PartialEq)]
pub struct Community {
    microgrids: Vec<Microgrid>,
}

impl Community {
    pub fn new(microgrids: Vec<Microgrid>) -> Result<Self> {
        if microgrids.is_empty() {
            return Err(Error::InvalidScenario(
                "community must contain at least one microgrid".into(),
            ));
        }
        let mut seen = std::collections::HashSet::new();
        for mg in &microgrids {
            mg.battery.validate()?;
            if !seen.insert(mg.id.as_str()) {
                return Err(Error::InvalidScenario(format!(
                    "duplicate microgrid id `{}`",
                    mg.id
                )));
            }
        }
        Ok(Community { microgrids })
    }

    pub fn microgrids(&self) -> &[Microgrid] {
        &self.microgrids
    }

    pub fn len(&self) -> usize {
        self.microgrids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.microgrids.is_empty()
    }

    pub fn get(&self, index: usize) -> &Microgrid {
        &self.microgrids[index]
    }

    /// Members selected by an activation-flag vector, in community order.
    pub fn select<'a>(&'a self, flags: &'a [bool]) -> impl Iterator<Item = &'a Microgrid> {
        debug_assert_eq!(flags.len(), self.len());
        self.microgrids
            .iter()
            .zip(flags)
            .filter_map(|(mg, &on)| on.then_some(mg))
    }
}

/// Market condition at the trading hour.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarketStatus {
    Deficit,
    Surplus,
}

/// Snapshot of the energy market: signed quantity (negative = deficit,
/// positive = surplus) and unit price. A zero quantity is rejected at
/// construction; there is nothing to trade and no status for it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketState {
    quantity: f64,
    price: f64,
    status: MarketStatus,
}

impl MarketState {
    pub fn new(quantity: f64, price: f64) -> Result<Self> {
        if !quantity.is_finite() || quantity == 0.0 {
            return Err(Error::InvalidScenario(format!(
                "market quantity must be nonzero and finite, got {quantity}"
            )));
        }
        if !price.is_finite() || price <= 0.0 {
            return Err(Error::InvalidScenario(format!(
                "market price must be positive and finite, got {price}"
            )));
        }
        let status = if quantity < 0.0 {
            MarketStatus::Deficit
        } else {
            MarketStatus::Surplus
        };
        Ok(MarketState {
            quantity,
            price,
            status,
        })
    }

    /// Signed quantity, kWh.
    pub fn quantity(&self) -> f64 {
        self.quantity
    }

    /// Unsigned quantity, kWh.
    pub fn magnitude(&self) -> f64 {
        self.quantity.abs()
    }

    pub fn price(&self) -> f64 {
        self.price
    }

    pub fn status(&self) -> MarketStatus {
        self.status
    }
}

/// Total energy a coalition can deliver to a deficit market: the sum of
/// its members' stored energy.
pub fn sell_capacity<'a, I>(members: I) -> f64
where
    I: IntoIterator<Item = &'a Microgrid>,
{
    members.into_iter().map(|mg| mg.battery.stored_energy).sum()
}

/// Total energy a coalition can absorb from a surplus market: the sum of
/// its members' free battery capacity.
pub fn buy_capacity<'a, I>(members: I) -> f64
where
    I: IntoIterator<Item = &'a Microgrid>,
{
    members.into_iter().map(|mg| mg.battery.free_capacity()).sum()
}

/// The capacity relevant to the market side: stored energy for a deficit,
/// free capacity for a surplus.
pub fn relevant_capacity(mg: &Microgrid, status: MarketStatus) -> f64 {
    match status {
        MarketStatus::Deficit => mg.battery.stored_energy,
        MarketStatus::Surplus => mg.battery.free_capacity(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn battery(stored: f64, capacity: f64) -> BatteryState {
        BatteryState::new(stored, capacity, 0, 6000, 0.95, 0.95).unwrap()
    }

    fn grid(id: &str, stored: f64, capacity: f64) -> Microgrid {
        Microgrid::new(id, battery(stored, capacity), 0.0)
    }

    #[test]
    fn status_full_at_capacity() {
        assert_eq!(battery(15.0, 15.0).status(), BatteryStatus::FullyCharged);
    }

    #[test]
    fn status_discharged_at_zero() {
        assert_eq!(battery(0.0, 15.0).status(), BatteryStatus::Discharged);
    }

    #[test]
    fn status_partial_in_between() {
        assert_eq!(battery(7.5, 15.0).status(), BatteryStatus::PartiallyCharged);
    }

    #[test]
    fn status_tolerates_rounding_at_boundaries() {
        let almost_full = BatteryState {
            stored_energy: 15.0 - 1e-10,
            ..battery(0.0, 15.0)
        };
        assert_eq!(almost_full.status(), BatteryStatus::FullyCharged);
        let almost_empty = BatteryState {
            stored_energy: 1e-10,
            ..battery(0.0, 15.0)
        };
        assert_eq!(almost_empty.status(), BatteryStatus::Discharged);
    }

    #[test]
    fn charge_applies_efficiency() {
        let b = battery(5.0, 15.0).update_stored_energy(2.0);
        assert_relative_eq!(b.stored_energy, 6.9, max_relative = 1e-12);
        assert_eq!(b.cycles_used, 1);
        assert_eq!(b.remaining_cycles, 5999);
    }

    #[test]
    fn discharge_divides_by_efficiency() {
        let mut start = battery(5.0, 15.0);
        start.discharge_efficiency = 0.9;
        let b = start.update_stored_energy(-1.8);
        assert_relative_eq!(b.stored_energy, 3.0, max_relative = 1e-12);
        assert_eq!(b.cycles_used, 1);
    }

    #[test]
    fn charge_clamps_to_capacity() {
        let mut start = battery(14.5, 15.0);
        start.charge_efficiency = 1.0;
        let b = start.update_stored_energy(2.0);
        assert_eq!(b.stored_energy, 15.0);
        assert_eq!(b.cycles_used, 1);
    }

    #[test]
    fn zero_delta_consumes_no_cycle() {
        let b = battery(5.0, 15.0).update_stored_energy(0.0);
        assert_eq!(b.stored_energy, 5.0);
        assert_eq!(b.cycles_used, 0);
        assert_eq!(b.remaining_cycles, 6000);
    }

    #[test]
    fn clamped_noop_consumes_no_cycle() {
        // Already full: charging changes nothing after the clamp.
        let mut start = battery(15.0, 15.0);
        start.charge_efficiency = 1.0;
        let b = start.update_stored_energy(3.0);
        assert_eq!(b.stored_energy, 15.0);
        assert_eq!(b.cycles_used, 0);
    }

    #[test]
    fn remaining_cycles_floor_at_zero() {
        let mut start = battery(5.0, 15.0);
        start.remaining_cycles = 0;
        let b = start.update_stored_energy(1.0);
        assert_eq!(b.remaining_cycles, 0);
        assert_eq!(b.cycles_used, 1);
    }

    #[test]
    fn sell_capacity_sums_stored() {
        assert_eq!(sell_capacity(std::iter::empty()), 0.0);
        let mgs = vec![grid("a", 4.0, 15.0), grid("b", 6.0, 15.0)];
        assert_relative_eq!(sell_capacity(mgs.iter()), 10.0);
        let single = vec![grid("c", 3.2, 15.0)];
        assert_relative_eq!(sell_capacity(single.iter()), 3.2);
    }

    #[test]
    fn buy_capacity_sums_free_room() {
        assert_eq!(buy_capacity(std::iter::empty()), 0.0);
        let mgs = vec![grid("a", 10.0, 15.0), grid("b", 12.0, 12.0)];
        assert_relative_eq!(buy_capacity(mgs.iter()), 5.0);
        let full = vec![grid("a", 15.0, 15.0), grid("b", 12.0, 12.0)];
        assert_eq!(buy_capacity(full.iter()), 0.0);
    }

    #[test]
    fn market_state_rejects_degenerate_inputs() {
        assert!(MarketState::new(0.0, 0.5).is_err());
        assert!(MarketState::new(-10.0, 0.0).is_err());
        assert!(MarketState::new(-10.0, -0.5).is_err());
        assert!(MarketState::new(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn market_status_follows_sign() {
        assert_eq!(
            MarketState::new(-10.0, 0.5).unwrap().status(),
            MarketStatus::Deficit
        );
        assert_eq!(
            MarketState::new(10.0, 0.5).unwrap().status(),
            MarketStatus::Surplus
        );
    }

    #[test]
    fn community_rejects_duplicates_and_empty() {
        assert!(Community::new(vec![]).is_err());
        let dup = vec![grid("a", 1.0, 15.0), grid("a", 2.0, 15.0)];
        assert!(Community::new(dup).is_err());
    }

    proptest! {
        #[test]
        fn update_preserves_bounds(
            stored_frac in 0.0f64..=1.0,
            capacity in 0.1f64..100.0,
            delta in -200.0f64..200.0,
            eta_c in 0.05f64..=1.0,
            eta_d in 0.05f64..=1.0,
            cycles in 0u32..6000,
        ) {
            let b = BatteryState::new(
                stored_frac * capacity, capacity, cycles, 6000 - cycles, eta_c, eta_d,
            ).unwrap();
            let next = b.update_stored_energy(delta);
            prop_assert!(next.stored_energy >= 0.0);
            prop_assert!(next.stored_energy <= next.capacity);
            prop_assert!(next.validate().is_ok());
        }

        #[test]
        fn status_is_total(stored_frac in 0.0f64..=1.0, capacity in 0.1f64..100.0) {
            let b = battery(stored_frac * capacity, capacity);
            // Exactly one status for every valid state; repeated calls agree.
            prop_assert_eq!(b.status(), b.status());
        }

        #[test]
        fn capacities_are_monotone_under_inclusion(
            stored in proptest::collection::vec(0.0f64..15.0, 1..12),
            keep in proptest::collection::vec(any::<bool>(), 12),
        ) {
            let mgs: Vec<Microgrid> = stored
                .iter()
                .enumerate()
                .map(|(i, &s)| grid(&format!("m{i}"), s, 15.0))
                .collect();
            let subset: Vec<&Microgrid> = mgs
                .iter()
                .zip(&keep)
                .filter_map(|(mg, &k)| k.then_some(mg))
                .collect();
            prop_assert!(sell_capacity(subset.iter().copied()) <= sell_capacity(mgs.iter()) + 1e-12);
            prop_assert!(buy_capacity(subset.iter().copied()) <= buy_capacity(mgs.iter()) + 1e-12);
        }

        #[test]
        fn sell_plus_buy_is_capacity(stored_frac in 0.0f64..=1.0, capacity in 0.1f64..100.0) {
            let mg = grid("m", stored_frac * capacity, capacity);
            let total = sell_capacity([&mg]) + buy_capacity([&mg]);
            prop_assert!((total - capacity).abs() <= 1e-9 * capacity.max(1.0));
        }
    }
}
