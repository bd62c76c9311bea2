//! Flow counting and the Poisson-graph flow estimators.

use rcm::coupling::SamplerConfig;
use rcm::flows::{
    compflow_identity, count_flows, even_ratio_mc, flow_connection_mc, flow_connection_target, flow_correlation_mc,
    flow_correlation_target,
};
use rcm::poly::{rat, to_f64};
use rcm::Multigraph;

fn main() -> rcm::Result<()> {
    let k4 = Multigraph::complete(4);
    for q in 2..=5 {
        println!("K4 has {} nowhere-zero Z_{q} flows", count_flows(&k4, q)?);
    }

    let g = Multigraph::triangle();
    let cfg = SamplerConfig::new(11, 40_000);
    let lambda = 0.5;
    for q in [2u64, 3] {
        let est = flow_correlation_mc(&g, lambda, q, 0, 1, &cfg)?;
        let target = flow_correlation_target(&g, lambda, q, 0, 1)?;
        println!("flow ratio q = {q}: {:.4} +- {:.4}, q tau = {target:.4}", est.estimate, est.std_err);
    }
    let est = even_ratio_mc(&g, lambda, 0, 1, &cfg)?;
    let target = flow_correlation_target(&g, lambda, 2, 0, 1)?;
    println!("even ratio: {:.4} +- {:.4}, 2 tau = {target:.4}", est.estimate, est.std_err);

    let (p, q) = (rat(1, 3), rat(5, 2));
    let est = flow_connection_mc(&g, &p, &q, 0, 1, &cfg)?;
    let target = to_f64(&flow_connection_target(&g, &p, &q, 0, 1)?);
    println!("q = 5/2 Tutte ratio: {:.4} +- {:.4}, (q-1) phi = {target:.4}", est.estimate, est.std_err);

    let r = compflow_identity(&Multigraph::cycle(4), 1.0, 3, 40)?;
    println!(
        "C4 partition function {:.10} vs flow expectation {:.10} (tail bound {:.1e}, cut at {})",
        r.lhs, r.rhs, r.tail_bound, r.truncation
    );
    Ok(())
}
