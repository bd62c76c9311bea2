//! The `rcm` command line. Every subcommand writes one JSON document (or a
//! CSV table with `--format csv`) to `--out` or stdout.
//!
//! Exit codes: 0 success, 1 usage or resource error, 2 a verification
//! failed (the report still gets written).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::coupling::{parallel_two_point, SamplerConfig};
use crate::error::{usage, Error, Result};
use crate::flows::{
    count_flows, even_ratio_mc, flow_connection_mc, flow_connection_target, flow_correlation_mc,
    flow_correlation_target, orientation_invariance_check, simon_scan, FlowCounter,
};
use crate::graph::{GraphFamily, Multigraph};
use crate::kn::{convergence_report, DEFAULT_GAP_THRESHOLD};
use crate::measures::{
    potts_partition, potts_partition_exact, rc_connection_matrix, rc_partition, PottsParams, RcParams,
    DEFAULT_SPIN_CAP, TABLE_EDGE_CAP,
};
use crate::poly::{fmt_rational, parse_rational, to_f64, BivariatePolynomial, Rational};
use crate::polynomials::{
    chromatic_from_tutte, flow_from_tutte, rank_gen_poly, TutteComputer, DEFAULT_CACHE_CAPACITY,
};
use crate::suites::{exact_two_point, run_suite, verify_all, Suite, VerifyCaps};

/// Environment variable holding the default memo-cache capacity.
pub const CACHE_SIZE_ENV: &str = "RCM_CACHE_SIZE";

#[derive(Parser, Debug)]
#[command(name = "rcm", version, about = "Random-cluster, Potts and Tutte polynomial computations")]
struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct GraphArg {
    /// Graph file: {"n": <int>, "edges": [[u, v], ...]}.
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Args, Debug)]
struct CacheArg {
    /// Memo cache capacity; defaults to $RCM_CACHE_SIZE, then 2^20.
    #[arg(long)]
    cache_size: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tutte polynomial by deletion–contraction.
    Tutte {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        cache: CacheArg,
    },
    /// Whitney rank-generating function by subset enumeration.
    RankGen {
        #[command(flatten)]
        graph: GraphArg,
    },
    /// Chromatic polynomial, optionally evaluated at `--at`.
    Chromatic {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, value_parser = rational)]
        at: Option<Rational>,
        #[command(flatten)]
        cache: CacheArg,
    },
    /// Flow polynomial, optionally evaluated at `--at`.
    FlowPoly {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, value_parser = rational)]
        at: Option<Rational>,
        #[command(flatten)]
        cache: CacheArg,
    },
    /// Exact random-cluster partition function.
    RcPartition {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, value_parser = rational)]
        p: Rational,
        #[arg(long, value_parser = rational)]
        q: Rational,
        /// Also report the connection probabilities of all vertex pairs.
        #[arg(long)]
        connections: bool,
    },
    /// Potts partition function: exact with `--p`, floating point with `--beta`.
    PottsPartition {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long)]
        q: usize,
        #[arg(long, conflicts_with = "p", required_unless_present = "p")]
        beta: Option<f64>,
        /// Exact evaluation at `e^-beta = 1 - p` with all couplings 1.
        #[arg(long, value_parser = rational)]
        p: Option<Rational>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "beta")]
        couplings: Option<Vec<f64>>,
        /// One value per spin.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "beta")]
        fields: Option<Vec<f64>>,
    },
    /// Swendsen–Wang sampling of the joint spin/bond measure.
    SampleSw {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, value_parser = rational)]
        p: Rational,
        #[arg(long)]
        q: usize,
        /// Recorded sweeps, split evenly over the chains.
        #[arg(long, default_value_t = 10_000)]
        sweeps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        burn_in: usize,
        #[arg(long, default_value_t = 1)]
        thinning: usize,
        #[arg(long, default_value_t = 1)]
        chains: usize,
        #[arg(long, value_delimiter = ',', default_value = "tau,conn")]
        observables: Vec<Observable>,
        #[arg(long, default_value_t = 0)]
        x: usize,
        #[arg(long, default_value_t = 1)]
        y: usize,
    },
    /// Nowhere-zero mod-q flow count.
    FlowCount {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long)]
        q: u64,
        /// Also recount under 20 random orientations.
        #[arg(long)]
        orientations: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Monte Carlo flow-correlation estimators on Poisson graphs.
    FlowCorrMc {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, value_enum, default_value_t = FlowRoute::Flow)]
        route: FlowRoute,
        /// Poisson intensity (flow and even routes).
        #[arg(long)]
        lambda: Option<f64>,
        /// Edge parameter (connection route).
        #[arg(long, value_parser = rational)]
        p: Option<Rational>,
        #[arg(long, value_parser = rational, default_value = "2")]
        q: Rational,
        #[arg(long, default_value_t = 0)]
        x: usize,
        #[arg(long, default_value_t = 1)]
        y: usize,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Checks the Simon-type inequality over separating sets.
    SimonScan {
        /// Single graph; otherwise every connected simple graph up to `--max-vertices`.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        max_vertices: usize,
        #[arg(long, value_delimiter = ',', value_parser = rational, default_value = "1/4,1/2,3/4")]
        p_grid: Vec<Rational>,
        #[arg(long, value_delimiter = ',', value_parser = rational, default_value = "1,3/2,2")]
        q_grid: Vec<Rational>,
    },
    /// Runs a verification suite, or `all`.
    Verify {
        /// Suite name or `all`.
        suite: String,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long, value_parser = rational)]
        p: Option<Rational>,
        #[arg(long, value_parser = rational)]
        q: Option<Rational>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        max_edges: Option<usize>,
        /// Monte Carlo sample budget for the sampling suites.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Giant-component asymptotics on complete graphs.
    Kn {
        #[arg(long)]
        q: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long, value_delimiter = ',', default_value = "4,8,12,14")]
        n: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_GAP_THRESHOLD)]
        threshold: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Observable {
    Tau,
    Conn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FlowRoute {
    /// Flow counts at integer `q`, target `q tau` at `beta = lambda q`.
    Flow,
    /// Even-subgraph indicator, target `2 tau` at `beta = 2 lambda`.
    Even,
    /// Tutte evaluations at real `q`, target `(q-1) phi(x <-> y)`.
    Connection,
}

fn rational(s: &str) -> std::result::Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

/// A command's result: the JSON report, its tabular form and whether a
/// verification failed.
struct Output {
    json: Value,
    table: Option<Table>,
    failed: bool,
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Output {
    fn ok(json: Value, table: Table) -> Self {
        Self { json, table: Some(table), failed: false }
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let output = match execute(cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    if let Err(e) = emit(&output, cli.format, cli.out.as_deref()) {
        eprintln!("error: {e}");
        return 1;
    }
    if output.failed {
        eprintln!("verification failed");
        2
    } else {
        0
    }
}

fn emit(output: &Output, format: Format, out: Option<&Path>) -> Result<()> {
    let text = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&output.json)?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let Some(table) = &output.table else {
                return usage("this command has no tabular form; use --format json");
            };
            let mut w = csv::Writer::from_writer(Vec::new());
            let csv_err = |e: csv::Error| Error::Usage(format!("csv output: {e}"));
            w.write_record(&table.header).map_err(csv_err)?;
            for row in &table.rows {
                w.write_record(row).map_err(csv_err)?;
            }
            String::from_utf8(w.into_inner().map_err(|e| Error::Usage(e.to_string()))?)
                .map_err(|e| Error::Usage(e.to_string()))?
        }
    };
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load_graph(path: &Path) -> Result<Multigraph> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Usage(format!("cannot read graph file {}: {e}", path.display())))?;
    Multigraph::from_json(&text).map_err(|e| Error::Usage(format!("malformed graph file {}: {e}", path.display())))
}

fn cache_capacity(arg: &CacheArg) -> Result<usize> {
    cache_capacity_from(arg, std::env::var(CACHE_SIZE_ENV).ok())
}

fn cache_capacity_from(arg: &CacheArg, env: Option<String>) -> Result<usize> {
    if let Some(c) = arg.cache_size {
        return Ok(c);
    }
    match env {
        Some(v) => v
            .trim()
            .parse()
            .or_else(|_| usage(format!("{CACHE_SIZE_ENV}={v:?} is not a cache size"))),
        None => Ok(DEFAULT_CACHE_CAPACITY),
    }
}

fn poly_output(g: &Multigraph, key: &str, poly: &BivariatePolynomial, extra: Value) -> Output {
    let mut json = json!({
        "graph": g.to_file(),
        key: poly,
        "display": poly.to_string(),
    });
    if let (Value::Object(map), Value::Object(more)) = (&mut json, extra) {
        map.extend(more);
    }
    let rows = poly.terms().map(|(i, j, c)| vec![i.to_string(), j.to_string(), c.to_string()]).collect();
    Output::ok(json, Table { header: vec!["i", "j", "c"], rows })
}

fn single_row(header: Vec<&'static str>, row: Vec<String>) -> Table {
    Table { header, rows: vec![row] }
}

fn execute(command: Command) -> Result<Output> {
    match command {
        Command::Tutte { graph, cache } => {
            let g = load_graph(&graph.graph)?;
            let mut tc = TutteComputer::with_capacity(cache_capacity(&cache)?);
            let t = tc.tutte(&g);
            Ok(poly_output(&g, "tutte", &t, json!({"cached_minors": tc.cached_minors()})))
        }
        Command::RankGen { graph } => {
            let g = load_graph(&graph.graph)?;
            Ok(poly_output(&g, "rank_generating", &rank_gen_poly(&g)?, json!({})))
        }
        Command::Chromatic { graph, at, cache } => {
            let g = load_graph(&graph.graph)?;
            let mut tc = TutteComputer::with_capacity(cache_capacity(&cache)?);
            let chi = chromatic_from_tutte(&g, &tc.tutte(&g));
            let value = at.map(|q| json!({"at": fmt_rational(&q), "value": fmt_rational(&chi.eval_univariate(&q))}));
            Ok(poly_output(&g, "chromatic", &chi, json!({"evaluation": value})))
        }
        Command::FlowPoly { graph, at, cache } => {
            let g = load_graph(&graph.graph)?;
            let mut tc = TutteComputer::with_capacity(cache_capacity(&cache)?);
            let c = flow_from_tutte(&g, &tc.tutte(&g));
            let value = at.map(|q| json!({"at": fmt_rational(&q), "value": fmt_rational(&c.eval_univariate(&q))}));
            Ok(poly_output(&g, "flow", &c, json!({"evaluation": value})))
        }
        Command::RcPartition { graph, p, q, connections } => {
            let g = load_graph(&graph.graph)?;
            let params = RcParams::new(p.clone(), q.clone())?;
            let z = rc_partition(&g, &params)?;
            let mut json = json!({
                "graph": g.to_file(),
                "p": fmt_rational(&p),
                "q": fmt_rational(&q),
                "edge_cap": TABLE_EDGE_CAP,
                "z": fmt_rational(&z),
                "z_float": to_f64(&z),
            });
            let mut rows = vec![vec!["z".into(), "".into(), "".into(), fmt_rational(&z)]];
            if connections {
                let m = rc_connection_matrix(&g, &params)?;
                let strings: Vec<Vec<String>> = m.iter().map(|r| r.iter().map(fmt_rational).collect()).collect();
                for (x, r) in strings.iter().enumerate() {
                    for (y, v) in r.iter().enumerate() {
                        rows.push(vec!["connection".into(), x.to_string(), y.to_string(), v.clone()]);
                    }
                }
                json["connections"] = json!(strings);
            }
            Ok(Output::ok(json, Table { header: vec!["quantity", "x", "y", "value"], rows }))
        }
        Command::PottsPartition { graph, q, beta, p, couplings, fields } => {
            let g = load_graph(&graph.graph)?;
            if let Some(p) = p {
                let params = RcParams::new(p.clone(), Rational::from_integer(q.into()))?;
                let z = potts_partition_exact(&g, q, &params.potts_weight())?;
                let json = json!({
                    "graph": g.to_file(),
                    "q": q,
                    "p": fmt_rational(&p),
                    "spin_cap": DEFAULT_SPIN_CAP,
                    "z": fmt_rational(&z),
                    "z_float": to_f64(&z),
                });
                let table = single_row(vec!["q", "p", "z"], vec![q.to_string(), fmt_rational(&p), fmt_rational(&z)]);
                return Ok(Output::ok(json, table));
            }
            let beta = beta.expect("clap requires beta without p");
            let mut params = PottsParams::new(beta, q);
            if let Some(j) = couplings {
                params = params.with_couplings(j);
            }
            if let Some(h) = fields {
                params = params.with_fields(h);
            }
            let z = potts_partition(&g, &params)?;
            let json = json!({"graph": g.to_file(), "params": params, "spin_cap": DEFAULT_SPIN_CAP, "z": z});
            let table = single_row(vec!["q", "beta", "z"], vec![q.to_string(), beta.to_string(), z.to_string()]);
            Ok(Output::ok(json, table))
        }
        Command::SampleSw { graph, p, q, sweeps, seed, burn_in, thinning, chains, observables, x, y } => {
            let g = load_graph(&graph.graph)?;
            RcParams::new(p.clone(), Rational::from_integer(q.into()))?;
            if chains == 0 {
                return usage("need at least one chain");
            }
            let cfg = SamplerConfig { seed, burn_in, samples: sweeps.div_ceil(chains), thinning };
            let est = parallel_two_point(&g, to_f64(&p), q, &cfg, chains, x, y)?;
            let exact = exact_two_point(&g, &p, q, x, y).ok();
            let factor = 1.0 - 1.0 / q as f64;
            let mut obs = serde_json::Map::new();
            let mut rows = Vec::new();
            for o in &observables {
                let (name, e, target) = match o {
                    Observable::Tau => ("tau", est.tau, exact.as_ref().map(|(t, _)| to_f64(t))),
                    Observable::Conn => ("conn", est.connection, exact.as_ref().map(|(_, c)| to_f64(c))),
                };
                obs.insert(
                    name.into(),
                    json!({
                        "estimate": e,
                        "exact": target,
                        "within_3_se": target.map(|t| e.within(t, 3.0)),
                    }),
                );
                rows.push(vec![
                    name.to_string(),
                    e.mean.to_string(),
                    e.std_err.to_string(),
                    e.samples.to_string(),
                    target.map_or_else(String::new, |t| t.to_string()),
                ]);
            }
            let json = json!({
                "graph": g.to_file(),
                "p": fmt_rational(&p),
                "q": q,
                "x": x,
                "y": y,
                "chains": chains,
                "sampler": cfg,
                "seed": seed,
                "scaled_connection_factor": factor,
                "observables": obs,
            });
            Ok(Output::ok(json, Table { header: vec!["observable", "mean", "std_err", "samples", "exact"], rows }))
        }
        Command::FlowCount { graph, q, orientations, seed } => {
            let g = load_graph(&graph.graph)?;
            let brute = count_flows(&g, q)?;
            let dc = FlowCounter::new(q)?.count(&g);
            let agree = dc == num_bigint::BigInt::from(brute);
            let mut json = json!({
                "graph": g.to_file(),
                "q": q,
                "count": brute,
                "deletion_contraction": dc.to_string(),
                "routes_agree": agree,
            });
            let mut failed = !agree;
            let mut rows = vec![vec!["natural".into(), brute.to_string()]];
            if orientations {
                let r = orientation_invariance_check(&g, q, seed)?;
                failed |= !r.pass;
                rows.extend(r.counts.iter().skip(1).enumerate().map(|(i, c)| vec![format!("random-{i}"), c.to_string()]));
                json["orientations"] = serde_json::to_value(&r)?;
            }
            Ok(Output { json, table: Some(Table { header: vec!["orientation", "count"], rows }), failed })
        }
        Command::FlowCorrMc { graph, route, lambda, p, q, x, y, samples, seed } => {
            let g = load_graph(&graph.graph)?;
            let cfg = SamplerConfig::new(seed, samples);
            let (est, target) = match route {
                FlowRoute::Flow | FlowRoute::Even => {
                    let Some(lambda) = lambda else {
                        return usage("--lambda is required for this route");
                    };
                    if route == FlowRoute::Even {
                        (even_ratio_mc(&g, lambda, x, y, &cfg)?, flow_correlation_target(&g, lambda, 2, x, y)?)
                    } else {
                        if !q.is_integer() || q < Rational::from_integer(2.into()) {
                            return usage("the flow route needs an integer q >= 2");
                        }
                        let qi: u64 = q.to_integer().try_into().or_else(|_| usage("q too large"))?;
                        (flow_correlation_mc(&g, lambda, qi, x, y, &cfg)?, flow_correlation_target(&g, lambda, qi, x, y)?)
                    }
                }
                FlowRoute::Connection => {
                    let Some(p) = &p else {
                        return usage("--p is required for the connection route");
                    };
                    let est = flow_connection_mc(&g, p, &q, x, y, &cfg)?;
                    (est, to_f64(&flow_connection_target(&g, p, &q, x, y)?))
                }
            };
            let within = est.within(target, 3.0);
            let json = json!({
                "graph": g.to_file(),
                "route": format!("{route:?}").to_lowercase(),
                "q": fmt_rational(&q),
                "p": p.as_ref().map(fmt_rational),
                "x": x,
                "y": y,
                "estimate": est,
                "target": target,
                "within_3_se": within,
            });
            let table = single_row(
                vec!["estimate", "std_err", "samples", "seed", "lambda", "target"],
                vec![
                    est.estimate.to_string(),
                    est.std_err.to_string(),
                    est.samples.to_string(),
                    est.seed.to_string(),
                    est.lambda.to_string(),
                    target.to_string(),
                ],
            );
            Ok(Output::ok(json, table))
        }
        Command::SimonScan { graph, max_vertices, p_grid, q_grid } => {
            let graphs = match graph {
                Some(path) => vec![load_graph(&path)?],
                None => GraphFamily::simple_graphs(max_vertices, max_vertices * (max_vertices - 1) / 2)
                    .connected()
                    .generate(),
            };
            let r = simon_scan(&graphs, &p_grid, &q_grid)?;
            // violations at q = 1 or q = 2 contradict a theorem; elsewhere they are findings
            let failed = r.violations.iter().any(|v| v["q"] == "1" || v["q"] == "2");
            let rows = r
                .violations
                .iter()
                .map(|v| {
                    ["p", "q", "x", "z", "W", "lhs", "rhs"]
                        .iter()
                        .map(|k| match &v[*k] {
                            Value::String(s) => s.clone(),
                            other => other.to_string(),
                        })
                        .collect()
                })
                .collect();
            let table = Table { header: vec!["p", "q", "x", "z", "W", "lhs", "rhs"], rows };
            Ok(Output { json: serde_json::to_value(&r)?, table: Some(table), failed })
        }
        Command::Verify { suite, graph, p, q, lambda, max_edges, samples, seed } => {
            let graph = graph.map(|path| load_graph(&path)).transpose()?;
            let caps = VerifyCaps { seed, max_edges, samples, graph, p, q, lambda };
            let reports = if suite == "all" {
                let agg = verify_all(&caps)?;
                let failed = !agg.pass;
                (serde_json::to_value(&agg)?, agg.suites, failed)
            } else {
                let s: Suite = suite.parse()?;
                let r = run_suite(s, &caps)?;
                let failed = r.gating_failure();
                (serde_json::to_value(&r)?, vec![r], failed)
            };
            let (json, suites, failed) = reports;
            let rows = suites
                .iter()
                .map(|r| {
                    vec![r.suite.to_string(), r.informational.to_string(), r.pass.to_string(), r.instances.to_string()]
                })
                .collect();
            let table = Table { header: vec!["suite", "informational", "pass", "instances"], rows };
            Ok(Output { json, table: Some(table), failed })
        }
        Command::Kn { q, lambda, n, threshold } => {
            let r = convergence_report(q, lambda, &n, threshold)?;
            let rows = r.rows.iter().map(|row| vec![row.n.to_string(), row.rate.to_string(), row.gap.to_string()]).collect();
            let failed = !r.pass;
            Ok(Output {
                json: serde_json::to_value(&r)?,
                table: Some(Table { header: vec!["n", "rate", "gap"], rows }),
                failed,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        assert_eq!(run(["rcm", "frobnicate"]), 1);
        assert_eq!(run(["rcm", "kn", "--q", "2"]), 1);
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(run(["rcm", "--help"]), 0);
    }

    fn scratch(name: &str) -> PathBuf {
        std::env::temp_dir().join(format!("rcm-cli-{}-{name}", std::process::id()))
    }

    fn write_graph(name: &str, text: &str) -> String {
        let path = scratch(name);
        fs::write(&path, text).unwrap();
        path.to_string_lossy().into_owned()
    }

    fn run_to_file(args: &[&str], name: &str) -> (i32, String) {
        let out = scratch(name);
        let out_s = out.to_string_lossy().into_owned();
        let mut argv = vec!["rcm"];
        argv.extend_from_slice(args);
        argv.extend_from_slice(&["--out", &out_s]);
        let code = run(argv);
        (code, fs::read_to_string(&out).unwrap_or_default())
    }

    const TRIANGLE: &str = r#"{"n": 3, "edges": [[0, 1], [1, 2], [2, 0]]}"#;

    #[test]
    fn tutte_of_triangle() {
        let g = write_graph("tri.json", TRIANGLE);
        let (code, text) = run_to_file(&["tutte", "--graph", &g], "tutte.json");
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["display"], "x^2 + x + y");
        let t: BivariatePolynomial = serde_json::from_value(v["tutte"].clone()).unwrap();
        let expected = &(&BivariatePolynomial::x().pow(2) + &BivariatePolynomial::x()) + &BivariatePolynomial::y();
        assert_eq!(t, expected);
    }

    #[test]
    fn verify_corrconn_passes() {
        let g = write_graph("k4.json", r#"{"n": 4, "edges": [[0,1],[0,2],[0,3],[1,2],[1,3],[2,3]]}"#);
        let (code, text) = run_to_file(&["verify", "corrconn", "--graph", &g, "--p", "1/2", "--q", "2"], "cc.json");
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["pass"], true);
        assert_eq!(v["instances"], 16);
    }

    #[test]
    fn malformed_graph_is_usage_error() {
        let g = write_graph("bad.json", r#"{"n": 3, "edges": [[0, 1], [1 2]]}"#);
        assert_eq!(run(["rcm", "tutte", "--graph", &g]), 1);
        let g = write_graph("range.json", r#"{"n": 2, "edges": [[0, 5]]}"#);
        assert_eq!(run(["rcm", "tutte", "--graph", &g]), 1);
        assert_eq!(run(["rcm", "tutte", "--graph", "/nonexistent/graph.json"]), 1);
    }

    #[test]
    fn failing_verification_exits_two_and_writes_report() {
        let (code, text) = run_to_file(&["verify", "q-limits"], "limits.json");
        assert_eq!(code, 2);
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["pass"], false);
    }

    #[test]
    fn csv_tables() {
        let (code, text) = run_to_file(&["kn", "--q", "2", "--lambda", "1.0", "--n", "4,8", "--format", "csv"], "kn.csv");
        assert_eq!(code, 0);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n,rate,gap");
        assert_eq!(lines.len(), 3);
        let g = write_graph("tri2.json", TRIANGLE);
        let (code, text) = run_to_file(&["rc-partition", "--graph", &g, "--p", "1/2", "--q", "2", "--format", "csv"], "z.csv");
        assert_eq!(code, 0);
        assert_eq!(text.lines().nth(1), Some("z,,,7/2"));
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let g = write_graph("tri3.json", TRIANGLE);
        let args = ["sample-sw", "--graph", &g, "--p", "0.5", "--q", "2", "--sweeps", "4000", "--seed", "9", "--chains", "2"];
        let (a_code, a) = run_to_file(&args, "sw-a.json");
        let (_, b) = run_to_file(&args, "sw-b.json");
        assert_eq!(a_code, 0);
        assert_eq!(a, b);
    }

    #[test]
    fn cache_size_from_environment() {
        let none = CacheArg { cache_size: None };
        assert!(cache_capacity_from(&none, Some("not-a-number".into())).is_err());
        assert_eq!(cache_capacity_from(&none, Some("64".into())).unwrap(), 64);
        assert_eq!(cache_capacity_from(&none, None).unwrap(), DEFAULT_CACHE_CAPACITY);
        let explicit = CacheArg { cache_size: Some(7) };
        assert_eq!(cache_capacity_from(&explicit, Some("64".into())).unwrap(), 7);
    }

    #[test]
    fn rational_arguments_are_exact() {
        assert_eq!(rational("1/3").unwrap(), crate::poly::rat(1, 3));
        assert_eq!(rational("0.5").unwrap(), crate::poly::rat(1, 2));
        assert!(rational("x").is_err());
    }
}
