//! Exact random-cluster and Potts partition functions, and the identities
//! tying them to each other and to the Tutte polynomial.

use rcm::measures::{
    rc_connection_prob, rc_partition, tutte_rc_identity, verify_corr_conn, verify_partition_identity,
};
use rcm::poly::{fmt_rational, rat};
use rcm::{Multigraph, RcParams};

fn main() -> rcm::Result<()> {
    let g = Multigraph::complete(4);
    let p = rat(1, 2);
    for q in [1i64, 2, 3] {
        let params = RcParams::new(p.clone(), rat(q, 1))?;
        let z = rc_partition(&g, &params)?;
        let phi = rc_connection_prob(&g, &params, 0, 1)?;
        println!("K4, p = 1/2, q = {q}: Z_RC = {}, phi(0 <-> 1) = {}", fmt_rational(&z), fmt_rational(&phi));
    }

    for q in [2usize, 3] {
        let r = verify_partition_identity(&g, &p, q)?;
        println!("{} (q = {q}): pass = {}", r.identity, r.pass);
        let r = verify_corr_conn(&g, &p, q)?;
        println!("{} (q = {q}): {} pairs, pass = {}", r.identity, r.instances, r.pass);
    }

    // real q is fine for the Tutte correspondence
    let r = tutte_rc_identity(&g, &RcParams::new(rat(1, 3), rat(3, 2))?)?;
    println!("{}: pass = {}", r.identity, r.pass);
    println!("{}", serde_json::to_string_pretty(&r.notes).unwrap());
    Ok(())
}
