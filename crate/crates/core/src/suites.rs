//! Verification suites behind `rcm verify`, and the aggregate runner.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_traits::One;
use serde::Serialize;
use serde_json::{json, Value};

use crate::association::{
    comparison_check, comparison_hypotheses, conjecture_forest_scan, default_q_schedule, fkg_check,
    negative_association_checks, product_measure, q_to_zero_limit_check, uniform_substructure_measure,
    ust_feder_mihail_check, Regime, Substructure,
};
use crate::coupling::{apply_bond_kernel, apply_spin_kernel, joint_table, parallel_two_point, SamplerConfig};
use crate::error::{usage, Result};
use crate::flows::{
    compflow_identity, count_flows, even_ratio_mc, flow_connection_mc, flow_correlation_mc, flow_correlation_target,
    orientation_invariance_check, simon_scan, COMPFLOW_TAIL_TARGET,
};
use crate::graph::{isomorphism_key, GraphFamily, Multigraph};
use crate::kn::{convergence_report, eta, lambda_c, DEFAULT_GAP_THRESHOLD};
use crate::measures::{
    ground_states, potts_table_exact, potts_two_point_exact, rc_connection_prob, rc_measure_table,
    rc_measure_table_general, tutte_rc_identity, verify_corr_conn, verify_multivariate_bridge,
    verify_partition_identity, zero_temperature_check, RcParams,
};
use crate::poly::{fmt_rational, int, rat, to_f64, Rational};
use crate::polynomials::{count_proper_colourings, flow_poly, tutte_from_rank_gen, TutteComputer, DEFAULT_ENUMERATION_CAP};
use crate::report::IdentityReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Tutte,
    Partition,
    TutteRc,
    Corrconn,
    Coupling,
    Sw,
    Flows,
    Flowcorr,
    Compflow,
    Fkg,
    Comparison,
    Na,
    UstNa,
    QLimits,
    ZeroTemp,
    Kn,
    ForestConjecture,
    Simon,
}

impl Suite {
    pub const ALL: [Suite; 18] = [
        Suite::Tutte,
        Suite::Partition,
        Suite::TutteRc,
        Suite::Corrconn,
        Suite::Coupling,
        Suite::Sw,
        Suite::Flows,
        Suite::Flowcorr,
        Suite::Compflow,
        Suite::Fkg,
        Suite::Comparison,
        Suite::Na,
        Suite::UstNa,
        Suite::QLimits,
        Suite::ZeroTemp,
        Suite::Kn,
        Suite::ForestConjecture,
        Suite::Simon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Tutte => "tutte",
            Suite::Partition => "partition",
            Suite::TutteRc => "tutte-rc",
            Suite::Corrconn => "corrconn",
            Suite::Coupling => "coupling",
            Suite::Sw => "sw",
            Suite::Flows => "flows",
            Suite::Flowcorr => "flowcorr",
            Suite::Compflow => "compflow",
            Suite::Fkg => "fkg",
            Suite::Comparison => "comparison",
            Suite::Na => "na",
            Suite::UstNa => "ust-na",
            Suite::QLimits => "q-limits",
            Suite::ZeroTemp => "zero-temp",
            Suite::Kn => "kn",
            Suite::ForestConjecture => "forest-conjecture",
            Suite::Simon => "simon",
        }
    }

    /// Conjecture scans report findings and never gate.
    pub fn informational(self) -> bool {
        matches!(self, Suite::ForestConjecture | Suite::Simon)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .map_or_else(|| usage(format!("unknown suite '{s}'")), Ok)
    }
}

/// Overrides and budgets for a suite run; `None` means the suite default.
#[derive(Clone, Debug, Default, Serialize)]
pub struct VerifyCaps {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_edges: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<Multigraph>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_rational")]
    pub p: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "ser_opt_rational")]
    pub q: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

fn ser_opt_rational<S: serde::Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&fmt_rational(r)),
        None => s.serialize_none(),
    }
}

impl VerifyCaps {
    fn edges(&self, default: usize) -> usize {
        self.max_edges.unwrap_or(default)
    }

    fn graphs_or(&self, default: impl FnOnce() -> Vec<Multigraph>) -> Vec<Multigraph> {
        match &self.graph {
            Some(g) => vec![g.clone()],
            None => default(),
        }
    }

    fn p_grid(&self, default: &[(i64, i64)]) -> Vec<Rational> {
        match &self.p {
            Some(p) => vec![p.clone()],
            None => default.iter().map(|&(a, b)| rat(a, b)).collect(),
        }
    }

    fn q_grid(&self, default: &[(i64, i64)]) -> Vec<Rational> {
        match &self.q {
            Some(q) => vec![q.clone()],
            None => default.iter().map(|&(a, b)| rat(a, b)).collect(),
        }
    }

    fn integer_q_grid(&self, default: &[usize]) -> Result<Vec<usize>> {
        match &self.q {
            Some(q) => Ok(vec![integer_q(q)?]),
            None => Ok(default.to_vec()),
        }
    }
}

fn integer_q(q: &Rational) -> Result<usize> {
    if !q.is_integer() || *q < Rational::one() {
        return usage(format!("this suite needs a positive integer q, got {}", fmt_rational(q)));
    }
    q.to_integer().try_into().or_else(|_| usage("q too large"))
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub informational: bool,
    pub pass: bool,
    pub instances: usize,
    pub details: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

impl SuiteReport {
    fn new(suite: Suite, pass: bool, instances: usize, details: Value) -> Self {
        Self { suite, informational: suite.informational(), pass, instances, details, witness: None }
    }

    fn with_witness(mut self, witness: Option<Value>) -> Self {
        self.witness = witness;
        self
    }

    /// A failing theorem-backed suite.
    pub fn gating_failure(&self) -> bool {
        !self.pass && !self.informational
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AggregateReport {
    pub version: &'static str,
    pub caps: VerifyCaps,
    pub suites: Vec<SuiteReport>,
    /// All theorem-backed suites passed.
    pub pass: bool,
}

/// Runs every suite concurrently and assembles the reports in suite order.
pub fn verify_all(caps: &VerifyCaps) -> Result<AggregateReport> {
    run_suites(&Suite::ALL, caps)
}

pub fn run_suites(suites: &[Suite], caps: &VerifyCaps) -> Result<AggregateReport> {
    let results: Vec<Result<SuiteReport>> = std::thread::scope(|scope| {
        let handles: Vec<_> = suites.iter().map(|&s| scope.spawn(move || run_suite(s, caps))).collect();
        handles.into_iter().map(|h| h.join().expect("suite thread")).collect()
    });
    let suites = results.into_iter().collect::<Result<Vec<_>>>()?;
    let pass = suites.iter().all(|s| !s.gating_failure());
    Ok(AggregateReport { version: env!("CARGO_PKG_VERSION"), caps: caps.clone(), suites, pass })
}

pub fn run_suite(suite: Suite, caps: &VerifyCaps) -> Result<SuiteReport> {
    match suite {
        Suite::Tutte => tutte_suite(caps),
        Suite::Partition => partition_suite(caps),
        Suite::TutteRc => tutte_rc_suite(caps),
        Suite::Corrconn => corrconn_suite(caps),
        Suite::Coupling => coupling_suite(caps),
        Suite::Sw => sw_suite(caps),
        Suite::Flows => flows_suite(caps),
        Suite::Flowcorr => flowcorr_suite(caps),
        Suite::Compflow => compflow_suite(caps),
        Suite::Fkg => fkg_suite(caps),
        Suite::Comparison => comparison_suite(caps),
        Suite::Na => na_suite(caps),
        Suite::UstNa => ust_na_suite(caps),
        Suite::QLimits => q_limits_suite(caps),
        Suite::ZeroTemp => zero_temp_suite(caps),
        Suite::Kn => kn_suite(caps),
        Suite::ForestConjecture => forest_suite(caps),
        Suite::Simon => simon_suite(caps),
    }
}

/// Union of families, one representative per isomorphism class.
fn union_families(families: &[GraphFamily]) -> Vec<Multigraph> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for fam in families {
        for g in fam.generate() {
            if seen.insert(isomorphism_key(&g)) {
                out.push(g);
            }
        }
    }
    out
}

/// Every simple graph on at most 4 vertices plus the connected multigraphs
/// with at most `max_edges` edges.
fn four_vertex_graphs(max_edges: usize) -> Vec<Multigraph> {
    union_families(&[GraphFamily::simple_graphs(4, 6), GraphFamily::connected_multigraphs(4, max_edges)])
}

fn graph_witness(g: &Multigraph, extra: Value) -> Value {
    json!({ "graph": g.to_file(), "at": extra })
}

fn rc_params(p: &Rational, q: &Rational) -> Result<RcParams> {
    RcParams::new(p.clone(), q.clone())
}

fn tutte_points() -> Vec<(Rational, Rational)> {
    (0..20i64).map(|i| (rat(i - 7, 3), rat(11 - 2 * i, 4 + i % 3))).collect()
}

fn tutte_suite(caps: &VerifyCaps) -> Result<SuiteReport> {
    let max_edges = caps.edges(8);
    let graphs = caps.graphs_or(|| GraphFamily::connected_multigraphs(5, max_edges).generate());
    let points = tutte_points();
    let mut tc = TutteComputer::default();
    let mut instances = 0;
    let mut witness = None;
    for g in &graphs {
        let dc = tc.tutte(g);
        let via_w = tutte_from_rank_gen(g, DEFAULT_ENUMERATION_CAP)?;
        for (x, y) in &points {
            instances += 1;
            if witness.is_none() && dc.eval(x, y) != via_w.eval(x, y) {
                witness = Some(graph_witness(g, json!([fmt_rational(x), fmt_rational(y)])));
            }
        }
    }
    let details = json!({
        "graphs": graphs.len(),
        "max_vertices": 5,
        "max_edges": max_edges,
        "points": points.len(),
    });
    Ok(SuiteReport::new(Suite::Tutte, witness.is_none(), instances, details).with_witness(witness))
}

const PARTITION_GRID: [((i64, i64), usize); 10] = [
    ((1, 4), 2),
    ((1, 2), 2),
    ((3, 4), 2),
    ((1, 3), 3),
    ((1, 2), 3),
    ((2, 3), 3),
    ((1, 5), 4),
    ((1, 2), 4),
    ((4, 5), 4),
    ((3, 7), 5),
];

fn partition_suite(caps: &VerifyCaps) -> Result<SuiteReport> {
    let max_edges = caps.edges(5);
    let graphs = caps.graphs_or(|| four_vertex_graphs(max_edges));
    let grid: Vec<(Rational, Rational)> = match (&caps.p, &caps.q) {
        (None, None) => PARTITION_GRID.iter().map(|&((a, b), q)| (rat(a, b), int(q as i64))).collect(),
        _ => {
            let ps = caps.p_grid(&[(1, 2)]);
            let qs = caps.q_grid(&[(2, 1)]);
            ps.iter().flat_map(|p| qs.iter().map(move |q| (p.clone(), q.clone()))).collect()
        }
    };
    let mut reports = Vec::new();
    for g in &graphs {
        for (p, q) in &grid {
            let params = rc_params(p, q)?;
            let mut r = verify_multivariate_bridge(g, &params)?;
            r.witness = (!r.pass).then(|| graph_witness(g, json!({"p": fmt_rational(p), "q": fmt_rational(q)})));
            reports.push(r);
            if q.is_integer() && *q >= int(2) {
                let mut r = verify_partition_identity(g, p, integer_q(q)?)?;
                r.witness = (!r.pass).then(|| graph_witness(g, json!({"p": fmt_rational(p), "q": fmt_rational(q)})));
                reports.push(r);
            }
        }
    }
    let merged = IdentityReport::merge("partition", &reports);
    let details = json!({
        "graphs": graphs.len(),
        "grid": grid.iter().map(|(p, q)| [fmt_rational(p), fmt_rational(q)]).collect::<Vec<_>>(),
        "max_abs_deviation": merged.max_abs_deviation,
    });
    Ok(SuiteReport::new(Suite::Partition, merged.pass, merged.instances, details).with_witness(merged.witness))
}

fn tutte_rc_suite(caps: &VerifyCaps) -> Result<SuiteReport> {
    let max_edges = caps.edges(6);
    let graphs = caps.graphs_or(|| GraphFamily::connected_multigraphs(4, max_edges).generate());
    let ps = caps.p_grid(&[(1, 3), (1, 2), (3, 4)]);
    let qs = caps.q_grid(&[(1, 2), (1, 1), (3, 2), (2, 1), (3, 1)]);
    let mut instances = 0;
    let mut witness = None;
    let mut shifted_mismatches = 0;
    let mut shifted_example = None;
    for g in &graphs {
        if !g.is_connected() {
            return usage("the Tutte–random-cluster suite needs connected graphs");
        }
        for p in &ps {
            for q in &qs {
                let r = tutte_rc_identity(g, &rc_params(p, q)?)?;
                instances += r.instances;
                let at = json!({"p": fmt_rational(p), "q": fmt_rational(q)});
                if !r.pass && witness.is_none() {
                    witness = Some(graph_witness(g, at.clone()));
                }
                let notes = r.notes.unwrap_or(Value::Null);
                if notes["shifted_point_deviation"] != json!("0") {
                    shifted_mismatches += 1;
                    if shifted_example.is_none() {
                        shifted_example = Some(json!({"graph": g.to_file(), "at": at, "notes": notes}));
                    }
                }
            }
        }
    }
    let details = json!({
        "graphs": graphs.len(),
        "p_grid": ps.iter().map(fmt_rational).collect::<Vec<_>>(),
        "q_grid": qs.iter().map(fmt_rational).collect::<Vec<_>>(),
        "evaluation_point": "(u, v)",
        "shifted_point_reading": "(u-1, v-1)",
        "shifted_point_mismatches": shifted_mismatches,
        "shifted_point_example": shifted_example,
    });
    Ok(SuiteReport::new(Suite::TutteRc, witness.is_none(), instances, details).with_witness(witness))
}

fn corrconn_suite(caps: &VerifyCaps) -> Result<SuiteReport> {
    let max_edges = caps.edges(5);
    let graphs = caps.graphs_or(|| four_vertex_graphs(max_edges));
    let ps = caps.p_grid(&[(1, 4), (1, 2), (3, 4)]);
    let qs = caps.integer_q_grid(&[2, 3, 4])?;
    let mut reports = Vec::new();
    for g in &graphs {
        for p in &ps {
            for &q in &qs {
                let mut r = verify_corr_conn(g, p, q)?;
                if let Some(w) = r.witness.take() {
                    r.witness = Some(graph_witness(g, json!({"p": fmt_rational(p), "q": q, "pair": w})));
                }
                reports.push(r);
            }
        }
    }
    let merged = IdentityReport::merge("correlation-connection", &reports);
    let details = json!({
        "graphs": graphs.len(),
        "p_grid": ps.iter().map(fmt_rational).collect::<Vec<_>>(),
        "q_grid": qs,
        "max_abs_deviation": merged.max_abs_deviation,
    });
    Ok(SuiteReport::new(Suite::Corrconn, merged.pass, merged.instances, details).with_witness(merged.witness))
}

fn coupling_suite(caps: &VerifyCaps) -> Result<SuiteReport> {
    let max_edges = caps.edges(4);
    let graphs = caps.graphs_or(|| {
        union_families(&[GraphFamily::simple_graphs(3, 3), GraphFamily::connected_multigraphs(3, max_edges)])
    });
    let ps = caps.p_grid(&[(1, 3), (1, 2)]);
    let qs = caps.integer_q_grid(&[2, 3])?;
    let mut instances = 0;
    let mut witness = None;
    for g in &graphs {
        for p in &ps {
            for &q in &qs {
                let joint = joint_table(g, p, q)?;
                let rc = rc_measure_table(g, &rc_params(p, &int(q as i64))?)?;
                let w = (Rational::one() - p).recip();
                let checks = [
                    ("bond-marginal", joint.bond_marginal()? == rc),
                    ("spin-marginal", joint.spin_marginal()? == potts_table_exact(g, q, &w)?),
                    ("bond-kernel", apply_bond_kernel(&joint, g, p)? == joint),
                    ("spin-kernel", apply_spin_kernel(&joint, g)? == joint),
                ];
                for (name, ok) in checks {
                    instances += 1;
                    if !ok && witness.is_none() {
                        witness = Some(graph_witness(g, json!({"check": name, "p": fmt_rational(p), "q": q})));
                    }
                }
            }
        }
    }
    let details = json!({
        "graphs": graphs.len(),
        "p_grid": ps.iter().map(fmt_rational).collect::<Vec<_>>(),
        "q_grid": qs,
    });
    Ok(SuiteReport::new(Suite::Coupling, witness.is_none(), instances, details).with_witness(witness))
}

/// Exact `tau(x,y)` and `phi(x <-> y)` for integer `q`.
pub fn exact_two_point(g: &Multigraph, p: &Rational, q: usize, x: usize, y: usize) -> Result<(Rational, Rational)> {
    let w = (Rational::one() - p).recip();
    let tau = potts_two_point_exact(g, q, &w, x, y)?;
    let phi = rc_connection_prob(g, &rc_params(p, &int(q as i64))?, x, y)?;
    Ok((tau, phi))
}

fn sw_suite(caps: &VerifyCaps) -> Result<SuiteReport> {
    let g = caps.graph.clone().unwrap_or_else(Multigraph::triangle);
    if g.n_vertices() < 2 {
        return usage("the sampler suite needs at least two vertices");
    }
    let p = caps.p.clone().unwrap_or_else(|| rat(1, 2));
    let q = match &caps.q {
        Some(q) => integer_q(q)?,
        None => 2,
    };
    let sweeps = caps.samples.unwrap_or(100_000);
    let chains = 4;
    let cfg = SamplerConfig::new(caps.seed, sweeps.div_ceil(chains));
    let est = parallel_two_point(&g, to_f64(&p), q, &cfg, chains, 0, 1)?;
    let (tau, phi) = exact_two_point(&g, &p, q, 0, 1)?;
    let (tau, phi) = (to_f64(&tau), to_f64(&phi));
    let factor = 1.0 - 1.0 / q as f64;
    let conn_scaled = crate::coupling::Estimate {
        mean: factor * est.connection.mean,
        std_err: factor * est.connection.std_err,
        samples: est.connection.samples,
    };
    let tau_ok = est.tau.within(tau, 3.0);
    let conn_ok = conn_scaled.within(factor * phi, 3.0);
    let details = json!({
        "graph": g.to_file(),
        "p": fmt_rational(&p),
        "q": q,
        "seed": caps.seed,
        "chains": chains,
        "sampler": cfg,
        "tau": {"estimate": est.tau, "exact": tau, "within_3_se": tau_ok},
        "scaled_connection": {"estimate": conn_scaled, "exact": factor * phi, "within_3_se": conn_ok},
    });
    Ok(SuiteReport::new(Suite::Sw, tau_ok && conn_ok, 2, details))
}

fn flows_suite(caps: &VerifyCaps) -> Result<SuiteReport> {
    let max_edges = caps.edges(7);
    let graphs = caps.graphs_or(|| GraphFamily::connected_multigraphs(4, max_edges).generate());
    let mut instances = 0;
    let mut witness = None;
    for g in &graphs {
        let poly = flow_poly(g)?;
        for q in 2..=6u64 {
            instances += 1;
            let brute = count_flows(g, q)?;
            if int(brute as i64) != poly.eval_univariate(&int(q as i64)) && witness.is_none() {
                witness = Some(graph_witness(g, json!({"check": "flow-polynomial", "q": q})));
            }
        }
    }
    let even_graphs = caps.graphs_or(|| GraphFamily::connected_multigraphs(4, max_edges.max(10)).generate());
    for g in &even_graphs {
        instances += 1;
        if (count_flows(g, 2)? == 1) != g.is_even() && witness.is_none() {
            witness = Some(graph_witness(g, json!({"check": "even-indicator"})));
        }
    }
    let orient_graphs = caps.graphs_or(|| GraphFamily::connected_multigraphs(4, max_edges.min(5)).generate());
    for g in &orient_graphs {
        for q in [3u64, 4] {
            instances += 1;
            let r = orientation_invariance_check(g, q, caps.seed)?;
            if !r.pass && witness.is_none() {
                witness = Some(graph_witness(g, json!({"check": "orientation", "q": q, "counts": r.counts})));
            }
        }
    }
    let details = json!({
        "flow_polynomial_graphs": graphs.len(),
        "even_indicator_graphs": even_graphs.len(),
        "orientation_graphs": orient_graphs.len(),
        "seed": caps.seed,
    });
    Ok(SuiteReport::new(Suite::Flows, witness.is_none(), instances, details).with_witness(witness))
}

fn small_flow_graphs() -> Vec<Multigraph> {
    vec![Multigraph::path(2), Multigraph::path(3), Multigraph::triangle()]
}

fn flowcorr_suite(caps: &VerifyCaps) -> Result<SuiteReport> {
    let graphs = caps.graphs_or(small_flow_graphs);
    let samples = caps.samples.unwrap_or(40_000);
    let cfg = SamplerConfig::new(caps.seed, samples);
    let mut rows = Vec::new();
    let mut pass = true;
    for g in &graphs {
        let (x, y) = (0, g.n_vertices() - 1);
        for lambda in [0.5, 1.0] {
            for q in [2u64, 3] {
                let est = flow_correlation_mc(g, lambda, q, x, y, &cfg)?;
                let target = flow_correlation_target(g, lambda, q, x, y)?;
                let ok = est.within(target, 3.0);
                pass &= ok;
                rows.push(json!({"graph": g.to_file(), "route": "flow-count", "q": q, "lambda": lambda,
                    "estimate": est, "target": target, "within_3_se": ok}));
            }
            let est = even_ratio_mc(g, lambda, x, y, &cfg)?;
            let target = flow_correlation_target(g, lambda, 2, x, y)?;
            let ok = est.within(target, 3.0);
            pass &= ok;
            rows.push(json!({"graph": g.to_file(), "route": "even-subgraph", "q": 2, "lambda": lambda,
                "estimate": est, "target": target, "within_3_se": ok}));
        }
        // q = 2: the Tutte-evaluation route and the flow-count route see the same samples
        let p = rat(1, 2);
        let a = flow_connection_mc(g, &p, &int(2), x, y, &cfg)?;
        let b = flow_correlation_mc(g, a.lambda, 2, x, y, &cfg)?;
        let agree = (a.estimate - b.estimate).abs() <= 1e-12;
        pass &= agree;
        rows.push(json!({"graph": g.to_file(), "route": "tutte-vs-flow-count", "q": 2, "p": "1/2",
            "tutte_route": a.estimate, "flow_route": b.estimate, "agree": agree}));
    }
    let details = json!({"seed": caps.seed, "samples": samples, "rows": rows});
    Ok(SuiteReport::new(Suite::Flowcorr, pass, graphs.len() * 7, details))
}

fn compflow_suite(caps: &VerifyCaps) -> Result<SuiteReport> {
    let graphs = caps.graphs_or(|| vec![Multigraph::path(2), Multigraph::triangle(), Multigraph::cycle(4)]);
    let mut rows = Vec::new();
    let mut pass = true;
    for g in &graphs {
        for lambda in [0.5, 1.0] {
            for q in [2u64, 3] {
                let r = compflow_identity(g, lambda, q, 40)?;
                let ok = r.pass && r.tail_bound <= COMPFLOW_TAIL_TARGET;
                pass &= ok;
                rows.push(json!({"graph": g.to_file(), "report": r, "pass": ok}));
            }
        }
    }
    let details = json!({"tail_target": COMPFLOW_TAIL_TARGET, "rows": rows});
    Ok(SuiteReport::new(Suite::Compflow, pass, rows_len(&details), details))
}

fn rows_len(details: &Value) -> usize {
    details["rows"].as_array().map_or(0, Vec::len)
}

fn association_graphs(caps: &VerifyCaps, default_edges: usize) -> Vec<Multigraph> {
    let m = caps.edges(default_edges);
    caps.graphs_or(|| GraphFamily::connected_multigraphs(m + 1, m).generate())
}

fn fkg_suite(caps: &VerifyCaps) -> Result<SuiteReport> {
    let graphs = association_graphs(caps, 4);
    let ps = caps.p_grid(&[(1, 4), (1, 2), (3, 4)]);
    let qs = caps.q_grid(&[(1, 1), (3, 2), (2, 1), (4, 1)]);
    let mut instances = 0;
    let mut witness = None;
    let mut below_one_findings = 0;
    for g in &graphs {
        for p in &ps {
            for q in &qs {
                let r = fkg_check(g, p, q, caps.seed)?;
                instances += r.event_pairs + r.function_pairs;
                if !r.pass {
                    if r.theorem_applies {
                        witness.get_or_insert_with(|| graph_witness(g, json!({"report": r})));
                    } else {
                        below_one_findings += 1;
                    }
                }
            }
        }
    }
    let details = json!({
        "graphs": graphs.len(),
        "p_grid": ps.iter().map(fmt_rational).collect::<Vec<_>>(),
        "q_grid": qs.iter().map(fmt_rational).collect::<Vec<_>>(),
        "seed": caps.seed,
        "findings_below_q_one": below_one_findings,
    });
    Ok(SuiteReport::new(Suite::Fkg, witness.is_none(), instances, details).with_witness(witness))
}

fn comparison_suite(caps: &VerifyCaps) -> Result<SuiteReport> {
    let graphs = association_graphs(caps, 4);
    let ps = caps.p_grid(&[(1, 4), (1, 2), (3, 4)]);
    let qs = caps.q_grid(&[(1, 1), (2, 1), (4, 1)]);
    let mut tuples = Vec::new();
    for p in &ps {
        for q in &qs {
            for p2 in &ps {
                for q2 in &qs {
                    let (a, b) = comparison_hypotheses(p, q, p2, q2);
                    if (a || b) && (p, q) != (p2, q2) {
                        tuples.push((p.clone(), q.clone(), p2.clone(), q2.clone()));
                    }
                }
            }
        }
    }
    let (mut first, mut second) = (0, 0);
    let mut witness = None;
    for g in &graphs {
        for (p, q, p2, q2) in &tuples {
            let r = comparison_check(g, p, q, p2, q2)?;
            first += r.first.is_some() as usize;
            second += r.second.is_some() as usize;
            if !r.pass {
                witness.get_or_insert_with(|| graph_witness(g, json!({"report": r})));
            }
        }
    }
    let details = json!({
        "graphs": graphs.len(),
        "parameter_tuples": tuples.len(),
        "first_direction_checks": first,
        "second_direction_checks": second,
    });
    Ok(SuiteReport::new(Suite::Comparison, witness.is_none(), first + second, details).with_witness(witness))
}

fn na_suite(caps: &VerifyCaps) -> Result<SuiteReport> {
    let max_edges = caps.edges(4);
    let mut rows = Vec::new();
    let mut witness = None;
    let mut instances = 0;
    // product measures: the disjoint-occurrence inequality is a theorem there
    for m in 1..=max_edges {
        for p in caps.p_grid(&[(1, 3), (1, 2)]) {
            let r = negative_association_checks(&product_measure(m, &p)?, caps.seed)?;
            instances += 1;
            let ok = r.chain_consistent && r.edge_na && r.na != Some(false) && r.disjoint_occurrence != Some(false);
            if !ok {
                witness.get_or_insert_with(|| json!({"measure": "product", "edges": m, "p": fmt_rational(&p), "report": r}));
            }
        }
    }
    // other measures: only the implication chain is gated
    for g in association_graphs(caps, max_edges) {
        let mut measures = vec![("ust", uniform_substructure_measure(&g, Substructure::SpanningTree)?)];
        measures.push(("usf", uniform_substructure_measure(&g, Substructure::Forest)?));
        for q in caps.q_grid(&[(1, 2), (2, 1)]) {
            measures.push(("random-cluster", rc_measure_table_general(&g, &rat(1, 2), &q)?));
        }
        for (name, mu) in measures {
            let r = negative_association_checks(&mu, caps.seed)?;
            instances += 1;
            if !r.chain_consistent {
                witness.get_or_insert_with(|| graph_witness(&g, json!({"measure": name, "report": r})));
            }
            rows.push(json!({"graph": g.to_file(), "measure": name, "edge_na": r.edge_na, "na": r.na,
                "disjoint_occurrence": r.disjoint_occurrence}));
        }
    }
    let details = json!({"max_edges": max_edges, "seed": caps.seed, "rows": rows});
    Ok(SuiteReport::new(Suite::Na, witness.is_none(), instances, details).with_witness(witness))
}

fn ust_na_suite(caps: &VerifyCaps) -> Result<SuiteReport> {
    let m = caps.edges(5);
    let graphs = caps.graphs_or(|| GraphFamily::connected_multigraphs(m + 1, m).generate());
    let mut witness = None;
    let mut full_na = 0;
    for g in &graphs {
        let r = ust_feder_mihail_check(g)?;
        full_na += r.na.is_some() as usize;
        if !r.edge_na || r.na == Some(false) {
            witness.get_or_insert_with(|| graph_witness(g, json!({"report": r})));
        }
    }
    let details = json!({"graphs": graphs.len(), "max_edges": m, "full_na_checked": full_na});
    Ok(SuiteReport::new(Suite::UstNa, witness.is_none(), graphs.len(), details).with_witness(witness))
}

fn q_limits_suite(caps: &VerifyCaps) -> Result<SuiteReport> {
    let graphs = caps.graphs_or(|| vec![Multigraph::triangle(), Multigraph::cycle(4)]);
    let schedule = default_q_schedule();
    let mut rows = Vec::new();
    let mut pass = true;
    for g in &graphs {
        for regime in [Regime::Ucs, Regime::Ust, Regime::Usf] {
            let r = q_to_zero_limit_check(g, regime, &schedule)?;
            pass &= r.pass;
            rows.push(json!({"graph": g.to_file(), "report": r}));
        }
    }
    let details = json!({"rows": rows});
    Ok(SuiteReport::new(Suite::QLimits, pass, rows_len(&details), details))
}

fn zero_temp_suite(caps: &VerifyCaps) -> Result<SuiteReport> {
    let g = caps.graph.clone().unwrap_or_else(Multigraph::triangle);
    let q = match &caps.q {
        Some(q) => integer_q(q)?,
        None => 3,
    };
    let betas: Vec<f64> = (1..=8).map(|k| 5.0 * k as f64).collect();
    let limit = zero_temperature_check(&g, q, &betas)?;
    let antiferro = vec![-1.0; g.n_edges()];
    let frustrated_two = ground_states(&g, 2, &antiferro)?.frustrated;
    let frustrated_q = ground_states(&g, q, &antiferro)?.frustrated;
    // a colouring exists iff the chromatic value is positive
    let expect_frustrated_q = limit.chromatic_value == "0";
    let expect_frustrated_two = count_proper_colourings(&g, 2) == 0;
    let pass = limit.pass && frustrated_q == expect_frustrated_q && frustrated_two == expect_frustrated_two;
    let details = json!({
        "graph": g.to_file(),
        "limit": limit,
        "frustrated_q2": frustrated_two,
        "frustrated_q": frustrated_q,
    });
    Ok(SuiteReport::new(Suite::ZeroTemp, pass, 3, details))
}

fn kn_suite(caps: &VerifyCaps) -> Result<SuiteReport> {
    let q = caps.q.as_ref().map_or(2.0, to_f64);
    let lambda = caps.lambda.unwrap_or(1.0);
    let report = convergence_report(q, lambda, &[4, 8, 12, 14], DEFAULT_GAP_THRESHOLD)?;
    let critical_ok = lambda_c(2.0) == 2.0;
    let eta_ref = 2f64.ln() - 0.25;
    let eta_err = (eta(1.0, 2.0)? - eta_ref).abs();
    let pass = report.pass && report.gaps_decreasing && critical_ok && eta_err < 1e-12;
    let details = json!({
        "report": report,
        "lambda_c_2": lambda_c(2.0),
        "eta_1_2_error": eta_err,
    });
    Ok(SuiteReport::new(Suite::Kn, pass, report.rows.len() + 2, details))
}

fn forest_suite(caps: &VerifyCaps) -> Result<SuiteReport> {
    let m = caps.edges(6);
    let graphs = caps.graphs_or(|| GraphFamily::connected_multigraphs(m + 1, m).generate());
    let r = conjecture_forest_scan(&graphs, m)?;
    let pass = r.counterexamples.is_empty();
    let n = r.graphs;
    Ok(SuiteReport::new(Suite::ForestConjecture, pass, n, serde_json::to_value(r)?))
}

fn simon_suite(caps: &VerifyCaps) -> Result<SuiteReport> {
    let graphs = caps.graphs_or(|| GraphFamily::simple_graphs(5, 10).connected().generate());
    let ps = caps.p_grid(&[(1, 4), (1, 2), (3, 4)]);
    let qs = caps.q_grid(&[(1, 1), (3, 2), (2, 1)]);
    let r = simon_scan(&graphs, &ps, &qs)?;
    let (pass, n) = (r.pass, r.instances);
    Ok(SuiteReport::new(Suite::Simon, pass, n, serde_json::to_value(r)?))
}
