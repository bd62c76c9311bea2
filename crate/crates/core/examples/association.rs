//! Stochastic ordering, positive association and negative association on
//! small graphs.

use rcm::association::{
    comparison_check, conjecture_forest_scan, fkg_check, q_to_zero_limit_check, default_q_schedule,
    ust_feder_mihail_check, Regime,
};
use rcm::poly::rat;
use rcm::{GraphFamily, Multigraph};

fn main() -> rcm::Result<()> {
    let g = Multigraph::cycle(4);
    let r = fkg_check(&g, &rat(1, 2), &rat(2, 1), 0)?;
    println!("FKG on C4, q = 2: {} event pairs, pass = {}", r.event_pairs, r.pass);
    let r = fkg_check(&g, &rat(1, 2), &rat(1, 4), 0)?;
    println!("FKG on C4, q = 1/4: pass = {} (theorem applies: {})", r.pass, r.theorem_applies);

    let r = comparison_check(&g, &rat(1, 2), &rat(1, 1), &rat(1, 3), &rat(2, 1))?;
    println!("comparison p=1/2,q=1 vs p'=1/3,q'=2: pass = {}", r.pass);

    let r = ust_feder_mihail_check(&Multigraph::complete(4))?;
    println!("UST on K4: edge NA = {}, NA = {:?}", r.edge_na, r.na);

    for regime in [Regime::Ucs, Regime::Usf, Regime::Ust] {
        let r = q_to_zero_limit_check(&Multigraph::triangle(), regime, &default_q_schedule())?;
        let tvs: Vec<String> = r.points.iter().map(|p| format!("{:.2e}", p.tv)).collect();
        println!("{regime:?} limit on the triangle: {}", tvs.join(" "));
    }

    let graphs = GraphFamily::connected_multigraphs(5, 4).generate();
    let scan = conjecture_forest_scan(&graphs, 4)?;
    println!("forest/connected-subgraph scan: {} graphs, {} counterexamples", scan.graphs, scan.counterexamples.len());
    Ok(())
}
