//! Tutte, chromatic and flow polynomials of a few small graphs, with the
//! deletion–contraction result checked against subset enumeration.

use rcm::poly::int;
use rcm::polynomials::{
    chromatic_from_tutte, count_proper_colourings, count_spanning_trees, flow_from_tutte, tutte_from_rank_gen,
    TutteComputer, DEFAULT_ENUMERATION_CAP,
};
use rcm::Multigraph;

fn main() -> rcm::Result<()> {
    let graphs = [
        ("triangle", Multigraph::triangle()),
        ("C4", Multigraph::cycle(4)),
        ("K4", Multigraph::complete(4)),
        ("theta", Multigraph::new(2, vec![(0, 1), (0, 1), (0, 1)])?),
    ];
    let mut tc = TutteComputer::default();
    for (name, g) in &graphs {
        let t = tc.tutte(g);
        assert_eq!(t, tutte_from_rank_gen(g, DEFAULT_ENUMERATION_CAP)?);
        let chi = chromatic_from_tutte(g, &t);
        let flow = flow_from_tutte(g, &t);
        println!("{name}");
        println!("  T(x, y)   = {t}");
        println!("  chi(q)    = {chi}");
        println!("  C(q)      = {flow}");
        println!("  T(1, 1)   = {} spanning trees", count_spanning_trees(g)?);
        println!("  chi(3)    = {} (brute force {})", chi.eval_univariate(&int(3)), count_proper_colourings(g, 3));
    }
    println!("memo holds {} minors", tc.cached_minors());
    Ok(())
}
