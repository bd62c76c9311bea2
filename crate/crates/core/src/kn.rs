//! The random-cluster model on the complete graph `K_n` with `p = lambda/n`:
//! the critical point, the giant-cluster density, the limiting free energy,
//! and finite-`n` rates to compare against it.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{cap_exceeded, usage, Error, Result};
use crate::graph::Multigraph;
use crate::poly::{powi, Rational};
use crate::polynomials::size_component_histogram;

pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

/// Cap on `q^n` for the integer-`q` spin route.
pub const SPIN_ROUTE_CAP: f64 = 1e7;

/// Cap on `|E(K_n)|` for the real-`q` subset route.
pub const SUBSET_ROUTE_EDGES: usize = 28;

/// Default gate on `|rate(n) - eta|` at the largest `n`.
pub const DEFAULT_GAP_THRESHOLD: f64 = 0.2;

const GRID_POINTS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymptoticParams {
    pub q: f64,
    pub lambda: f64,
    pub root_tol: f64,
}

impl AsymptoticParams {
    pub fn new(q: f64, lambda: f64) -> Result<Self> {
        if !(q > 0.0 && q.is_finite() && lambda > 0.0 && lambda.is_finite()) {
            return usage(format!("need q > 0 and lambda > 0, got q={q}, lambda={lambda}"));
        }
        Ok(Self { q, lambda, root_tol: DEFAULT_ROOT_TOL })
    }

    pub fn with_root_tol(mut self, tol: f64) -> Self {
        self.root_tol = tol;
        self
    }

    pub fn lambda_c(&self) -> f64 {
        lambda_c(self.q)
    }

    pub fn theta(&self) -> Result<f64> {
        theta_with_tol(self.lambda, self.q, self.root_tol)
    }

    pub fn eta(&self) -> Result<f64> {
        Ok(eta_from_theta(self.lambda, self.q, self.theta()?))
    }
}

pub fn lambda_c(q: f64) -> f64 {
    if q <= 2.0 {
        q
    } else {
        2.0 * (q - 1.0) / (q - 2.0) * (q - 1.0).ln()
    }
}

/// `e^(-lambda theta) - (1-theta)/(1+(q-1)theta)`, written without the
/// cancellation of two values near 1 at small `theta`.
pub fn theta_residual(theta: f64, lambda: f64, q: f64) -> f64 {
    (-lambda * theta).exp_m1() + q * theta / (1.0 + (q - 1.0) * theta)
}

pub fn theta(lambda: f64, q: f64) -> Result<f64> {
    theta_with_tol(lambda, q, DEFAULT_ROOT_TOL)
}

/// 0 below `lambda_c(q)`, else the largest root of the residual in `[0,1)`.
pub fn theta_with_tol(lambda: f64, q: f64, tol: f64) -> Result<f64> {
    AsymptoticParams::new(q, lambda)?;
    if lambda < lambda_c(q) {
        return Ok(0.0);
    }
    let f = |t: f64| theta_residual(t, lambda, q);
    // rightmost sign change on the grid; the residual is e^-lambda > 0 at 1
    let mut bracket = None;
    let mut right = f(1.0);
    for i in (1..GRID_POINTS).rev() {
        let t = i as f64 / GRID_POINTS as f64;
        let left = f(t);
        if left <= 0.0 && right > 0.0 {
            bracket = Some((t, (i + 1) as f64 / GRID_POINTS as f64));
            break;
        }
        right = left;
    }
    if bracket.is_none() && lambda > q {
        // the slope at 0 is q - lambda < 0, so a root lies below the first grid point
        let (lo, hi) = (1e-300_f64.max(tol * 1e-3), 1.0 / GRID_POINTS as f64);
        if f(lo) <= 0.0 && f(hi) > 0.0 {
            bracket = Some((lo, hi));
        } else {
            return Err(Error::Numerical(format!(
                "no bracket for theta: lambda={lambda}, q={q}, f({lo:e})={:e}, f({hi:e})={:e}",
                f(lo),
                f(hi)
            )));
        }
    }
    let Some((mut lo, mut hi)) = bracket else {
        return Ok(0.0);
    };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `g(theta) = -(q-1)(2-theta) log(1-theta) - (2+(q-1)theta) log(1+(q-1)theta)`.
pub fn g_func(theta: f64, q: f64) -> f64 {
    let a = 1.0 + (q - 1.0) * theta;
    -(q - 1.0) * (2.0 - theta) * (-theta).ln_1p() - (2.0 + (q - 1.0) * theta) * a.ln()
}

pub fn eta_from_theta(lambda: f64, q: f64, theta: f64) -> f64 {
    g_func(theta, q) / (2.0 * q) - (q - 1.0) / (2.0 * q) * lambda + q.ln()
}

/// Limit of `(1/n) log Z_RC(K_n, lambda/n, q)`.
pub fn eta(lambda: f64, q: f64) -> Result<f64> {
    Ok(eta_from_theta(lambda, q, theta(lambda, q)?))
}

/// `(1/n) log Z_RC(K_n, lambda/n, q)`, computed exactly then converted.
///
/// Integer `q` sums `(1-p)^(#disagreeing edges)` over colour-class sizes;
/// other `q` enumerate edge subsets of `K_n`.
pub fn empirical_rate(n: usize, lambda: f64, q: f64) -> Result<f64> {
    if n == 0 {
        return usage("n must be positive");
    }
    AsymptoticParams::new(q, lambda)?;
    if n as f64 <= lambda {
        return usage(format!("p = lambda/n needs n > lambda, got n={n}, lambda={lambda}"));
    }
    let lam = Rational::from_float(lambda).ok_or_else(|| Error::Numerical("lambda not finite".into()))?;
    let p = lam / Rational::from_integer(BigInt::from(n));
    let z = if q.fract() == 0.0 {
        let qi = q as usize;
        if (q).powi(n as i32) > SPIN_ROUTE_CAP {
            return cap_exceeded("spin route", format!("{qi}^{n}"), SPIN_ROUTE_CAP);
        }
        complete_graph_potts_sum(n, qi, &p)
    } else {
        let edges = n * (n - 1) / 2;
        if edges > SUBSET_ROUTE_EDGES {
            return cap_exceeded("subset route", format!("2^{edges}"), format!("2^{SUBSET_ROUTE_EDGES}"));
        }
        let qr = Rational::from_float(q).ok_or_else(|| Error::Numerical("q not finite".into()))?;
        let g = Multigraph::complete(n);
        let hist = size_component_histogram(&g, SUBSET_ROUTE_EDGES)?;
        let one_minus = Rational::one() - &p;
        hist.iter()
            .map(|(&(a, k), &c)| {
                powi(&p, a as i64) * powi(&one_minus, (edges - a) as i64) * powi(&qr, k as i64)
                    * Rational::from_integer(BigInt::from(c))
            })
            .sum()
    };
    Ok(ln_rational(&z)? / n as f64)
}

/// `sum_sigma (1-p)^(#disagreeing edges of K_n)` grouped by class sizes.
fn complete_graph_potts_sum(n: usize, q: usize, p: &Rational) -> Rational {
    let one_minus = Rational::one() - p;
    let total_pairs = n * (n - 1) / 2;
    let mut fact = vec![BigInt::one()];
    for i in 1..=n {
        let next = &fact[i - 1] * BigInt::from(i);
        fact.push(next);
    }
    let mut sum = Rational::zero();
    // class sizes n_1 + ... + n_q = n, each counted with its multinomial
    let mut sizes = vec![0usize; q];
    fn rec(
        i: usize,
        left: usize,
        sizes: &mut Vec<usize>,
        fact: &[BigInt],
        n: usize,
        total_pairs: usize,
        one_minus: &Rational,
        sum: &mut Rational,
    ) {
        if i + 1 == sizes.len() {
            sizes[i] = left;
            let same: usize = sizes.iter().map(|&s| s * s.saturating_sub(1) / 2).sum();
            let denom: BigInt = sizes.iter().map(|&s| fact[s].clone()).product();
            let count = &fact[n] / denom;
            *sum += powi(one_minus, (total_pairs - same) as i64) * Rational::from_integer(count);
            return;
        }
        for s in 0..=left {
            sizes[i] = s;
            rec(i + 1, left - s, sizes, fact, n, total_pairs, one_minus, sum);
        }
    }
    rec(0, n, &mut sizes, &fact, n, total_pairs, &one_minus, &mut sum);
    sum
}

/// Natural log of a positive rational without overflowing `f64`.
fn ln_rational(r: &Rational) -> Result<f64> {
    if *r <= Rational::zero() {
        return Err(Error::Numerical("log of a non-positive partition function".into()));
    }
    Ok(ln_bigint(r.numer()) - ln_bigint(r.denom()))
}

fn ln_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().expect("finite below 2^1000").ln();
    }
    let shift = bits - 64;
    let top: BigInt = x >> shift;
    top.to_f64().expect("64-bit value").ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Clone, Debug, Serialize)]
pub struct RateRow {
    pub n: usize,
    pub rate: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub q: f64,
    pub lambda: f64,
    pub lambda_c: f64,
    pub theta: f64,
    pub eta: f64,
    pub rows: Vec<RateRow>,
    pub gaps_decreasing: bool,
    /// Least-squares fit of `gap ~ C n^(-alpha)`; `None` with fewer than two positive gaps.
    pub fitted_alpha: Option<f64>,
    pub fitted_c: Option<f64>,
    pub threshold: f64,
    /// `q < 1` lies outside the regime the limit is usually stated for.
    pub outside_stated_regime: bool,
    pub pass: bool,
}

pub fn convergence_report(q: f64, lambda: f64, ns: &[usize], threshold: f64) -> Result<ConvergenceReport> {
    if ns.is_empty() {
        return usage("need at least one n");
    }
    let params = AsymptoticParams::new(q, lambda)?;
    let theta = params.theta()?;
    let eta = eta_from_theta(lambda, q, theta);
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let rate = empirical_rate(n, lambda, q)?;
        rows.push(RateRow { n, rate, gap: (rate - eta).abs() });
    }
    let gaps_decreasing = rows.windows(2).all(|w| w[1].gap < w[0].gap);
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.gap > 0.0)
        .map(|r| ((r.n as f64).ln(), r.gap.ln()))
        .collect();
    let (fitted_alpha, fitted_c) = if pts.len() >= 2 {
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        if sxx > 0.0 {
            let slope = sxy / sxx;
            (Some(-slope), Some((my - slope * mx).exp()))
        } else {
            (None, None)
        }
    } else {
        (None, None)
    };
    let last_gap = rows.last().map_or(f64::INFINITY, |r| r.gap);
    Ok(ConvergenceReport {
        q,
        lambda,
        lambda_c: lambda_c(q),
        theta,
        eta,
        rows,
        gaps_decreasing,
        fitted_alpha,
        fitted_c,
        threshold,
        outside_stated_regime: q < 1.0,
        pass: last_gap < threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::to_f64;

    /// Independent route: split off the cluster of vertex 0. With `c(k)` the
    /// weight of connected spanning subgraphs of `K_k`,
    /// `Z(n) = sum_j C(n-1, j-1) c(j) q (1-p)^(j(n-j)) Z(n-j)`.
    fn cluster_recursion(n: usize, p: &Rational, q: &Rational) -> Rational {
        let one_minus = Rational::one() - p;
        let binom = |a: usize, b: usize| -> Rational {
            let mut r = Rational::one();
            for i in 0..b {
                r = r * Rational::from_integer(BigInt::from(a - i)) / Rational::from_integer(BigInt::from(i + 1));
            }
            r
        };
        let mut c = vec![Rational::zero(); n + 1];
        for k in 1..=n {
            let mut rest = Rational::zero();
            for j in 1..k {
                rest += binom(k - 1, j - 1) * &c[j] * powi(&one_minus, (j * (k - j)) as i64);
            }
            c[k] = Rational::one() - rest;
        }
        let mut z = vec![Rational::one(); n + 1];
        for m in 1..=n {
            let mut s = Rational::zero();
            for j in 1..=m {
                s += binom(m - 1, j - 1) * &c[j] * q * powi(&one_minus, (j * (m - j)) as i64) * &z[m - j];
            }
            z[m] = s;
        }
        z.swap_remove(n)
    }

    #[test]
    fn critical_points() {
        assert_eq!(lambda_c(1.0), 1.0);
        assert_eq!(lambda_c(2.0), 2.0);
        assert!((lambda_c(4.0) - 3.0 * 3f64.ln()).abs() < 1e-12);
        assert!((lambda_c(4.0) - 3.29584).abs() < 1e-5);
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta(1.0, 2.0).unwrap(), 0.0);
        let t = theta(2.0, 1.0).unwrap();
        // oracle: plain bisection of e^{-2t} = 1 - t on [1e-9, 1 - 1e-9]
        let (mut lo, mut hi) = (1e-9_f64, 1.0 - 1e-9);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (-2.0 * mid).exp() - (1.0 - mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((t - lo).abs() < 1e-10);
        assert!((t - 0.79681).abs() < 1e-5);
        for q in [0.5, 1.0, 2.0, 3.0, 10.0] {
            assert!(theta_residual(0.0, 1.3, q).abs() < 1e-15);
        }
    }

    #[test]
    fn theta_residual_small_and_monotone() {
        for q in [0.5, 1.0, 1.5, 2.0, 3.0, 5.0] {
            let mut last = 0.0;
            for i in 1..=60 {
                let lambda = i as f64 * 0.2;
                let t = theta(lambda, q).unwrap();
                assert!(t >= last - 1e-12, "q={q} lambda={lambda}");
                if t > 0.0 {
                    assert!(theta_residual(t, lambda, q).abs() < 1e-10);
                }
                last = t;
            }
        }
    }

    #[test]
    fn theta_just_above_critical() {
        // at q = 2 the quadratic term vanishes: residual ~ -1e-6 t + (2/3) t^3
        let t = theta(2.0 + 1e-6, 2.0).unwrap();
        assert!((t / 1.5e-6f64.sqrt() - 1.0).abs() < 1e-2, "{t}");
        // q = 1: the root near 0 is about 2(lambda - 1), below the grid spacing
        let t = theta(1.0 + 1e-7, 1.0).unwrap();
        assert!((t / 2e-7 - 1.0).abs() < 1e-3, "{t}");
        assert!(theta_residual(t, 1.0 + 1e-7, 1.0).abs() < 1e-10);
        assert!(theta_residual(t, 2.0 + 1e-6, 2.0).abs() < 1e-10);
        // first-order jump for q > 2
        assert!(theta(lambda_c(4.0), 4.0).unwrap() > 0.3);
    }

    #[test]
    fn eta_closed_forms() {
        assert_eq!(g_func(0.0, 3.0), 0.0);
        assert!((eta(1.0, 2.0).unwrap() - (2f64.ln() - 0.25)).abs() < 1e-12);
        for q in [1.5, 2.0, 3.0, 4.0] {
            let lambda = 0.9 * lambda_c(q);
            let closed = q.ln() - (q - 1.0) * lambda / (2.0 * q);
            assert!((eta(lambda, q).unwrap() - closed).abs() < 1e-12);
        }
        assert!(eta(0.5, 1.0).unwrap().abs() < 1e-15);
        assert!(eta(3.0, 1.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn rate_examples() {
        let (lambda, q) = (0.75, 3.0);
        let p = lambda / 2.0;
        let z = (1.0 - p) * q * q + p * q;
        assert!((empirical_rate(2, lambda, q).unwrap() - 0.5 * z.ln()).abs() < 1e-14);
        for n in [2, 5, 9] {
            assert_eq!(empirical_rate(n, 1.0, 1.0).unwrap(), 0.0);
        }
        assert!(empirical_rate(3, 3.0, 2.0).is_err());
        let z15 = (1.0 - 0.25) * 2.25 + 0.25 * 1.5;
        assert!((empirical_rate(2, 0.5, 1.5).unwrap() - 0.5 * f64::ln(z15)).abs() < 1e-14);
    }

    #[test]
    fn both_routes_match_cluster_recursion() {
        for n in 2..=6 {
            let p = Rational::new(BigInt::from(1), BigInt::from(n as i64));
            for q in [2usize, 3] {
                let direct = complete_graph_potts_sum(n, q, &p);
                assert_eq!(direct, cluster_recursion(n, &p, &Rational::from_integer(BigInt::from(q))));
            }
            let qr = Rational::new(BigInt::from(3), BigInt::from(2));
            let rate = empirical_rate(n, 1.0, 1.5).unwrap();
            let z = cluster_recursion(n, &p, &qr);
            assert!((rate - to_f64(&z).ln() / n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn subcritical_convergence() {
        let r = convergence_report(2.0, 1.0, &[4, 8, 12, 14], DEFAULT_GAP_THRESHOLD).unwrap();
        assert!(r.gaps_decreasing && r.pass, "{r:?}");
        assert!((r.eta - (2f64.ln() - 0.25)).abs() < 1e-12);
        assert!(r.fitted_alpha.unwrap() > 0.0);
    }

    #[test]
    fn supercritical_branch() {
        let r = convergence_report(2.0, 4.0, &[8, 12, 14], DEFAULT_GAP_THRESHOLD).unwrap();
        assert!(r.theta > 0.0);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn critical_branch_taken_at_equality() {
        // q > 2: at lambda_c the nonzero root is returned
        let lc = lambda_c(3.0);
        assert!(theta(lc, 3.0).unwrap() > 0.0);
        assert_eq!(theta(lc * (1.0 - 1e-9), 3.0).unwrap(), 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn theta_is_monotone_in_lambda(q in 0.2f64..5.0, a in 0.05f64..8.0, b in 0.05f64..8.0) {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                prop_assert!(theta(lo, q).unwrap() <= theta(hi, q).unwrap() + 1e-9);
            }

            #[test]
            fn positive_root_solves_the_equation(q in 0.2f64..5.0, lambda in 0.05f64..8.0) {
                let t = theta(lambda, q).unwrap();
                if t > 0.0 {
                    let residual = (-lambda * t).exp() - (1.0 - t) / (1.0 + (q - 1.0) * t);
                    prop_assert!(residual.abs() < 1e-10, "residual {residual} at theta {t}");
                }
            }
        }
    }
}
