//! Giant-component density and the exponential rate of the random-cluster
//! partition function on complete graphs.

use rcm::kn::{convergence_report, lambda_c, theta};

fn main() -> rcm::Result<()> {
    for q in [1.0, 2.0, 3.0] {
        let lc = lambda_c(q);
        let thetas: Vec<String> = [0.5, 1.5, 2.5, 4.0]
            .iter()
            .map(|&l| Ok(format!("theta({l}) = {:.4}", theta(l, q)?)))
            .collect::<rcm::Result<_>>()?;
        println!("q = {q}: lambda_c = {lc:.4}, {}", thetas.join(", "));
    }
    let r = convergence_report(2.0, 1.0, &[4, 8, 12, 14], 0.2)?;
    println!("q = 2, lambda = 1: eta = {:.12}", r.eta);
    for row in &r.rows {
        println!("  n = {:2}  rate {:.6}  gap {:.6}", row.n, row.rate, row.gap);
    }
    if let (Some(a), Some(c)) = (r.fitted_alpha, r.fitted_c) {
        println!("  gap ~ {c:.3} n^-{a:.3}");
    }
    Ok(())
}
