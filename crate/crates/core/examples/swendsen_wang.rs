//! Swendsen–Wang estimates of the two-point function on a 3x3 grid,
//! compared with exact enumeration.

use rcm::coupling::{parallel_two_point, SamplerConfig};
use rcm::poly::{rat, to_f64};
use rcm::suites::exact_two_point;
use rcm::Multigraph;

fn grid(w: usize, h: usize) -> rcm::Result<Multigraph> {
    let mut edges = Vec::new();
    for r in 0..h {
        for c in 0..w {
            let v = r * w + c;
            if c + 1 < w {
                edges.push((v, v + 1));
            }
            if r + 1 < h {
                edges.push((v, v + w));
            }
        }
    }
    Multigraph::new(w * h, edges)
}

fn main() -> rcm::Result<()> {
    let g = grid(3, 3)?;
    let (x, y) = (0, 8);
    let cfg = SamplerConfig { seed: 7, burn_in: 1000, samples: 25_000, thinning: 1 };
    for q in [2usize, 3] {
        let p = rat(3, 5);
        let est = parallel_two_point(&g, to_f64(&p), q, &cfg, 4, x, y)?;
        let (tau, phi) = exact_two_point(&g, &p, q, x, y)?;
        println!("q = {q}, p = 3/5, corner to corner");
        println!("  tau   {:.4} +- {:.4}  exact {:.4}", est.tau.mean, est.tau.std_err, to_f64(&tau));
        println!("  phi   {:.4} +- {:.4}  exact {:.4}", est.connection.mean, est.connection.std_err, to_f64(&phi));
    }
    Ok(())
}
