use anyhow::Result;
use clap::{Args, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use nndlab::crs::{self, fixtures, LinearOrder};
use nndlab::diagnostics::{diameter_experiment, expansion_check};
use nndlab::nnd::{run_nnd, FriendState, Mode, NndConfig, Stop};
use nndlab::ranking::{exact_knn_by_oracle, ByDistance, Ranking};
use nndlab::rng::derive;
use nndlab::spaces::{random_ranking_system, CircleSpace, LcsSpace, ParisSpace, PowersOfTwoSpace};
use nndlab::twonrq::{compute_schedule, derive_params, run_2nrq, SimOptions};
use nndlab::{exact_knn, Error, KnnGraph, RankTable, RankingOracle};

use crate::output::Document;

/// Accepts plain integers and scientific notation such as `1e7`.
pub fn parse_count(s: &str) -> std::result::Result<usize, String> {
    if let Ok(v) = s.parse::<usize>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if !(v >= 0.0 && v.fract() == 0.0 && v <= 2f64.powi(53)) {
        return Err(format!("expected a non-negative whole number, got {s}"));
    }
    Ok(v as usize)
}

fn config<T: Serialize>(experiment: &str, args: &T) -> Result<Value> {
    let mut v = serde_json::to_value(args)?;
    if let Value::Object(m) = &mut v {
        m.insert("experiment".into(), json!(experiment));
        m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    }
    Ok(v)
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(header)?;
    for r in rows {
        wtr.write_record(&r)?;
    }
    wtr.into_inner().map_err(|e| anyhow::anyhow!("{e}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceKind {
    Paris,
    Circle,
    Powers2,
    Lcs,
    RandomRanking,
    GenericCrs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeKind {
    Batch,
    Pointwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopKind {
    NoChange,
    Budget,
}

#[derive(Debug, Args, Serialize)]
pub struct NndArgs {
    #[arg(long, value_enum)]
    space: SpaceKind,
    #[arg(long, value_parser = parse_count)]
    n: usize,
    #[arg(long, value_parser = parse_count)]
    k: usize,
    #[arg(long, value_enum, default_value_t = ModeKind::Batch)]
    mode: ModeKind,
    /// Batch mode: use friends of friends only.
    #[arg(long)]
    no_cofriends: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Round budget; defaults to ceil(2 log_K n).
    #[arg(long, value_parser = parse_count)]
    max_rounds: Option<usize>,
    #[arg(long, value_enum, default_value_t = StopKind::NoChange)]
    stop: StopKind,
    /// String length for the LCS space.
    #[arg(long, default_value_t = 64)]
    m: usize,
    /// Alphabet size for the LCS space (uniform letters).
    #[arg(long, default_value_t = 4)]
    alphabet: usize,
    /// Largest n for which recall against the exact graph is computed.
    #[arg(long, value_parser = parse_count, default_value = "8192")]
    exact_limit: usize,
}

fn run_on<R: Ranking + ?Sized>(ranking: &R, cfg: &NndConfig, exact_limit: usize) -> Result<(nndlab::nnd::NndRun, Option<KnnGraph>)> {
    let exact = if ranking.len() <= exact_limit {
        Some(exact_knn_by_oracle(&RankingOracle::new(ranking), cfg.k)?)
    } else {
        None
    };
    let oracle = RankingOracle::new(ranking);
    Ok((run_nnd(&oracle, cfg, exact.as_ref())?, exact))
}

fn table_run(table: &RankTable, cfg: &NndConfig, exact_limit: usize) -> Result<nndlab::nnd::NndRun> {
    let exact = (table.n() <= exact_limit).then(|| exact_knn(table, cfg.k)).transpose()?;
    Ok(run_nnd(&RankingOracle::new(table), cfg, exact.as_ref())?)
}

pub fn nnd(a: &NndArgs) -> Result<Document> {
    let mode = match a.mode {
        ModeKind::Batch => Mode::Batch { include_cofriends: !a.no_cofriends },
        ModeKind::Pointwise => Mode::Pointwise { schedule: None },
    };
    let stop = match a.stop {
        StopKind::NoChange => Stop::NoChange,
        StopKind::Budget => Stop::Budget,
    };
    let cfg = NndConfig { k: a.k, mode, seed: derive(a.seed, 1), max_rounds: a.max_rounds, stop };
    let space_seed = derive(a.seed, 0);
    let run = match a.space {
        SpaceKind::Paris => run_on(&ByDistance(&ParisSpace::standard(a.n)), &cfg, a.exact_limit)?.0,
        SpaceKind::Circle => run_on(&ByDistance(&CircleSpace::sample(a.n, space_seed, false)), &cfg, a.exact_limit)?.0,
        SpaceKind::Powers2 => run_on(&ByDistance(&PowersOfTwoSpace::new(a.n)?), &cfg, a.exact_limit)?.0,
        SpaceKind::Lcs => {
            if a.alphabet < 2 {
                return Err(Error::Input("alphabet needs at least two letters".into()).into());
            }
            let mu = vec![1.0 / a.alphabet as f64; a.alphabet];
            let table = LcsSpace::sample(a.n, a.m, &mu, space_seed)?.rank_table()?;
            table_run(&table, &cfg, a.exact_limit)?
        }
        SpaceKind::RandomRanking => table_run(&random_ranking_system(a.n, space_seed)?, &cfg, a.exact_limit)?,
        SpaceKind::GenericCrs => table_run(&crs::generic_crs(a.n, space_seed)?.into_table(), &cfg, a.exact_limit)?,
    };
    let r = &run.report;
    let fmt_recall = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_default();
    let csv = csv_bytes(
        &["round", "changed", "comparisons", "recall"],
        r.per_round.iter().map(|s| vec![s.round.to_string(), s.changed.to_string(), s.comparisons.to_string(), fmt_recall(s.recall)]),
    )?;
    Ok(Document {
        name: "nnd".into(),
        config: config("nnd", a)?,
        notes: vec![
            ("rounds".into(), r.rounds.to_string()),
            ("comparisons".into(), r.comparisons.to_string()),
            ("recall".into(), fmt_recall(r.recall)),
        ],
        csv,
        json: serde_json::to_value(r)?,
    })
}

#[derive(Debug, Args, Serialize)]
pub struct TwoNrqParamsArgs {
    /// Mean number of points.
    #[arg(long, value_parser = parse_count, default_value = "20000")]
    n: usize,
    #[arg(long)]
    k: f64,
    #[arg(long, default_value_t = 2)]
    d: u32,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
}

#[derive(Debug, Subcommand)]
pub enum TwoNrqCmd {
    /// Radii and success rates, no simulation.
    Schedule(TwoNrqParamsArgs),
    /// Monte Carlo run on a Poisson sample of the torus.
    Simulate {
        #[command(flatten)]
        params: TwoNrqParamsArgs,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Vertices sampled per round for the sampling-property check.
        #[arg(long, default_value_t = 500)]
        sample_size: usize,
    },
}

pub fn twonrq(c: &TwoNrqCmd) -> Result<Document> {
    match c {
        TwoNrqCmd::Schedule(p) => {
            let params = derive_params(p.n as f64, p.k, p.d, p.alpha)?;
            let s = compute_schedule(&params)?;
            let mut csv = Vec::new();
            s.write_csv(&mut csv)?;
            Ok(Document {
                name: "2nrq-schedule".into(),
                config: config("2nrq-schedule", p)?,
                notes: vec![("tau".into(), s.tau.to_string()), ("t_prime".into(), s.t_prime.to_string())],
                csv,
                json: serde_json::to_value(&s)?,
            })
        }
        TwoNrqCmd::Simulate { params: p, seed, sample_size } => {
            let run = run_2nrq(p.n as f64, p.k, p.d, p.alpha, *seed, &SimOptions { sample_size: *sample_size })?;
            let r = &run.report;
            let f = |v: f64| format!("{v:.6}");
            let rows = r.per_round.iter().map(|x| {
                let s = x.sampling.as_ref();
                vec![
                    x.t.to_string(),
                    f(x.r_t),
                    f(x.theta_t),
                    x.edges.to_string(),
                    f(x.mean_degree),
                    f(x.max_edge_length),
                    x.distance_evals.to_string(),
                    s.map(|s| f(s.rate_mean)).unwrap_or_default(),
                    s.map(|s| f(s.rate_se)).unwrap_or_default(),
                    s.map(|s| f(s.ks_statistic)).unwrap_or_default(),
                ]
            });
            let csv = csv_bytes(
                &["t", "r_t", "theta_t", "edges", "mean_degree", "max_edge_length", "distance_evals", "rate_mean", "rate_se", "ks_statistic"],
                rows,
            )?;
            let mut cfg = config("2nrq-simulate", p)?;
            cfg["seed"] = json!(seed);
            cfg["sample_size"] = json!(sample_size);
            Ok(Document {
                name: "2nrq-simulate".into(),
                config: cfg,
                notes: vec![
                    ("points".into(), r.points.to_string()),
                    ("distance_evals".into(), r.distance_evals.to_string()),
                    ("work_bound".into(), format!("{:.0}", r.work_bound)),
                ],
                csv,
                json: serde_json::to_value(r)?,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpecialKind {
    Powers2,
    Baranyai,
    Eulerian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpecialCheck {
    /// No white edge leaves the order.
    Isolated,
    /// Size of the white component (capped breadth-first search).
    Component,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuiltinExample {
    /// Five-point concordant system with a fixed linear extension.
    Concordant5,
}

#[derive(Debug, Subcommand)]
pub enum CrsCmd {
    /// Exhaustive census over all linear orders (n <= 5).
    Enumerate {
        #[arg(long, value_parser = parse_count)]
        n: usize,
    },
    /// l-infinity embedding of a built-in or generic CRS.
    Embed {
        #[arg(long, value_enum, conflicts_with = "n")]
        example: Option<BuiltinExample>,
        #[arg(long, value_parser = parse_count, required_unless_present = "example")]
        n: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Special linear orders.
    Special {
        #[arg(long, value_enum)]
        kind: SpecialKind,
        #[arg(long, value_parser = parse_count)]
        n: usize,
        #[arg(long, value_enum)]
        check: Option<SpecialCheck>,
        #[arg(long, value_parser = parse_count, default_value = "20000")]
        cap: usize,
    },
    /// Fraction of white edges, exact and sampled.
    Fraction {
        #[arg(long, value_parser = parse_count)]
        n: usize,
        #[arg(long, value_parser = parse_count, default_value = "100000")]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn pair_rows(order: &LinearOrder) -> impl Iterator<Item = Vec<String>> + '_ {
    order.pairs().iter().enumerate().map(|(k, p)| vec![(k + 1).to_string(), p.i().to_string(), p.j().to_string()])
}

pub fn crs(c: &CrsCmd) -> Result<Document> {
    match c {
        CrsCmd::Enumerate { n } => {
            let census = crs::enumerate_small(*n)?;
            let csv = csv_bytes(
                &["component_size", "count"],
                census.component_sizes.iter().map(|(s, k)| vec![s.to_string(), k.to_string()]),
            )?;
            Ok(Document {
                name: "crs-enumerate".into(),
                config: json!({ "experiment": "crs-enumerate", "n": n, "version": env!("CARGO_PKG_VERSION") }),
                notes: vec![
                    ("orders".into(), census.orders.to_string()),
                    ("images".into(), census.images.to_string()),
                    ("all_concordant".into(), census.all_concordant.to_string()),
                    ("components_are_fibers".into(), census.components_are_fibers.to_string()),
                    ("mean_fiber".into(), census.mean_fiber.to_string()),
                    ("bounds".into(), format!("({}, {})", census.lower_bound, census.upper_bound)),
                    ("within_bounds".into(), census.within_bounds().to_string()),
                ],
                csv,
                json: json!({ "census": census, "within_bounds": census.within_bounds() }),
            })
        }
        CrsCmd::Embed { example, n, seed } => {
            let (crs, emb) = match (example, n) {
                (Some(BuiltinExample::Concordant5), _) => {
                    let crs = crs::concordancy_check(&fixtures::five_point_system());
                    let emb = crs::linf_embed_with_extension(&crs, &fixtures::five_point_extension())?;
                    (crs, emb)
                }
                (None, Some(n)) => {
                    let crs = crs::generic_crs(*n, derive(*seed, 0))?;
                    let emb = crs::linf_embed(&crs, derive(*seed, 1))?;
                    (crs, emb)
                }
                (None, None) => return Err(Error::Input("give --example or --n".into()).into()),
            };
            let verified = crs::verify_embedding(&crs, &emb);
            let mut csv = Vec::new();
            emb.write_csv(&mut csv)?;
            let rows: Vec<Vec<f64>> = (0..emb.n()).map(|x| emb.row(nndlab::ItemId::from(x)).to_vec()).collect();
            let columns: Vec<String> = emb.columns().iter().map(ToString::to_string).collect();
            Ok(Document {
                name: "crs-embed".into(),
                config: json!({ "experiment": "crs-embed", "example": example, "n": n, "seed": seed, "version": env!("CARGO_PKG_VERSION") }),
                notes: vec![("verified".into(), verified.to_string())],
                csv,
                json: json!({ "columns": columns, "rows": rows, "verified": verified }),
            })
        }
        CrsCmd::Special { kind, n, check, cap } => {
            let order = match kind {
                SpecialKind::Powers2 => crs::powers_of_two_order(*n)?,
                SpecialKind::Baranyai => crs::baranyai_order(*n)?,
                SpecialKind::Eulerian => crs::eulerian_order(*n)?,
            };
            let mut notes = Vec::new();
            let mut summary = json!({});
            match check {
                Some(SpecialCheck::Isolated) => {
                    let iso = crs::is_isolated(&order);
                    notes.push(("isolated".into(), iso.to_string()));
                    summary["isolated"] = json!(iso);
                }
                Some(SpecialCheck::Component) => {
                    let comp = crs::white_component(&order, *cap);
                    let base = crs::phi_table(&order);
                    let equal = comp.members.iter().all(|o| crs::phi_table(o) == base);
                    notes.push(("component_size".into(), comp.members.len().to_string()));
                    notes.push(("complete".into(), comp.complete.to_string()));
                    notes.push(("phi_equal".into(), equal.to_string()));
                    summary = json!({ "component_size": comp.members.len(), "complete": comp.complete, "phi_equal": equal });
                }
                None => {}
            }
            let csv = csv_bytes(&["position", "i", "j"], pair_rows(&order))?;
            let pairs: Vec<[u32; 2]> = order.pairs().iter().map(|p| [p.i().0, p.j().0]).collect();
            Ok(Document {
                name: "crs-special".into(),
                config: json!({ "experiment": "crs-special", "kind": kind, "n": n, "check": check, "cap": cap, "version": env!("CARGO_PKG_VERSION") }),
                notes,
                csv,
                json: json!({ "order": pairs, "checks": summary }),
            })
        }
        CrsCmd::Fraction { n, samples, seed } => {
            let f = crs::white_edge_fraction(*n, *samples, *seed)?;
            let csv = csv_bytes(
                &["n", "exact", "exact_value", "empirical", "samples"],
                [vec![
                    n.to_string(),
                    f.exact.to_string(),
                    format!("{:.6}", *f.exact.numer() as f64 / *f.exact.denom() as f64),
                    format!("{:.6}", f.empirical),
                    samples.to_string(),
                ]],
            )?;
            Ok(Document {
                name: "crs-fraction".into(),
                config: json!({ "experiment": "crs-fraction", "n": n, "samples": samples, "seed": seed, "version": env!("CARGO_PKG_VERSION") }),
                notes: vec![],
                csv,
                json: serde_json::to_value(&f)?,
            })
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum DiagCmd {
    /// Undirected diameters of random K-out graphs.
    Diameter {
        #[arg(long, value_parser = parse_count, default_value = "10000")]
        n: usize,
        #[arg(long, value_parser = parse_count)]
        k: usize,
        #[arg(long, value_parser = parse_count, default_value = "50")]
        trials: usize,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Vertex expansion of small random sets in a random K-out graph.
    Expansion {
        #[arg(long, value_parser = parse_count, default_value = "10000")]
        n: usize,
        #[arg(long, value_parser = parse_count)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        /// Sets have size below alpha n / ln n.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_parser = parse_count, default_value = "10000")]
        sets: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

pub fn diag(c: &DiagCmd) -> Result<Document> {
    match c {
        DiagCmd::Diameter { n, k, trials, eps, seed } => {
            let r = diameter_experiment(*n, *k, *trials, *eps, *seed)?;
            let mut csv = Vec::new();
            r.write_histogram_csv(&mut csv)?;
            Ok(Document {
                name: "diag-diameter".into(),
                config: json!({ "experiment": "diag-diameter", "n": n, "k": k, "trials": trials, "eps": eps, "seed": seed, "version": env!("CARGO_PKG_VERSION") }),
                notes: vec![("bound".into(), format!("{:.4}", r.bound)), ("fraction_within".into(), r.fraction_within.to_string())],
                csv,
                json: serde_json::to_value(&r)?,
            })
        }
        DiagCmd::Expansion { n, k, eps, alpha, sets, seed } => {
            let g = FriendState::init_random_kout(*n, *k, derive(*seed, 0))?.to_graph();
            let r = expansion_check(&g, *alpha, *eps, *sets, derive(*seed, 1))?;
            let csv = csv_bytes(
                &["n", "k", "expansion_alpha", "epsilon", "max_set_size", "sampled", "violations", "min_ratio"],
                [vec![
                    r.n.to_string(),
                    r.k.to_string(),
                    r.expansion_alpha.to_string(),
                    r.epsilon.to_string(),
                    r.max_set_size.to_string(),
                    r.sampled.to_string(),
                    r.violations.to_string(),
                    format!("{:.6}", r.min_ratio),
                ]],
            )?;
            Ok(Document {
                name: "diag-expansion".into(),
                config: json!({ "experiment": "diag-expansion", "n": n, "k": k, "eps": eps, "alpha": alpha, "sets": sets, "seed": seed, "version": env!("CARGO_PKG_VERSION") }),
                notes: vec![],
                csv,
                json: serde_json::to_value(&r)?,
            })
        }
    }
}
