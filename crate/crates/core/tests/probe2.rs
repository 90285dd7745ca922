use gridcoal::oracle::objective_of_flags;
use gridcoal::valuation::CoalitionGame;
use gridcoal::{
    generate_synthetic, run, solve_exhaustive, OptimizerConfig, SyntheticSpec,
};

#[test]
#[ignore]
fn probe_scenario6() {
    let scenario = generate_synthetic(&SyntheticSpec::new(10, 6)).unwrap();
    let game = CoalitionGame::new(
        scenario.community.microgrids(),
        &scenario.market,
        &scenario.cost_model,
    );
    println!("market: q={} price={}", scenario.market.quantity(), scenario.market.price());
    for (i, mg) in scenario.community.microgrids().iter().enumerate() {
        println!(
            "  {}: stored={:.3} cap={:.3} cycles={} deg={:.3}",
            mg.id,
            mg.battery.stored_energy,
            mg.battery.capacity,
            mg.battery.cycles_used,
            game.degradation_cost(i)
        );
    }
    let oracle = solve_exhaustive(&scenario, 0.5, 22, 5).unwrap();
    for (i, c) in oracle.top.iter().enumerate() {
        println!("oracle #{i}: {:?} obj={:.6}", c.members, c.objective);
    }
    let cfg = OptimizerConfig::default();
    let result = run(&scenario, &cfg).unwrap();
    let achieved = objective_of_flags(&scenario, &result.best_individual.flags, 0.5);
    println!(
        "memetic: {:?} v={:.6} traded={:.6} achieved_obj={:.6} best_fitness={:.6} mu={:.4} sigma={:.6}",
        result.best_coalition,
        result.characteristic.value,
        result.characteristic.traded_energy,
        achieved,
        result.best_fitness,
        result.final_mu,
        result.final_sigma
    );
    // Was the oracle-best coalition present in the final trace at all?
    let last = result.trace.last().unwrap();
    println!("last trace: best_raw={:.6}", last.best_raw_value);
    // Raw v of the oracle optimum:
    let ids: Vec<&str> = scenario
        .community
        .microgrids()
        .iter()
        .map(|m| m.id.as_str())
        .collect();
    let flags: Vec<bool> = ids
        .iter()
        .map(|id| oracle.best_coalition.iter().any(|b| b == id))
        .collect();
    println!("oracle flags raw v = {:.6}", game.value_of_flags(&flags));
}
