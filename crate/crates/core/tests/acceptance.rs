//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line to stderr
//! (bypassing the test harness capture) before asserting.

use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use nndlab::crs::fixtures::{five_point_extension, five_point_system};
use nndlab::crs::{
    baranyai_order, concordancy_check, enumerate_small, eulerian_order, generic_crs, linf_embed,
    linf_embed_with_extension, phi_table, powers_of_two_order, verify_embedding, white_component, white_edge_fraction,
    PairId,
};
use nndlab::diagnostics::{diameter_experiment, expansion_check};
use nndlab::nnd::{run_nnd, FriendState, Mode, NndConfig, NndReport, Stop};
use nndlab::rng::derive;
use nndlab::spaces::{lcs_qk, LcsSpace, ParisSpace};
use nndlab::twonrq::{compute_schedule, derive_params, run_2nrq, SimOptions, TwoNrqRun};
use nndlab::{exact_knn, ranking_from_distances, ItemId, RankingOracle};
use num_rational::Ratio;

fn report(id: u32, name: &str, pass: bool, detail: impl AsRef<str>) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {id:>2} [{verdict}] {name}: {}", detail.as_ref());
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn criterion_01_schedule_golden_table() {
    let start = Instant::now();
    let p = derive_params(1e7, 28.0, 4, 0.5).unwrap();
    let s = compute_schedule(&p).unwrap();
    let elapsed = start.elapsed();
    let want_r = [0.869, 0.657, 0.420, 0.268, 0.171, 0.120, 0.072, 0.052];
    let want_theta = [0.0005, 0.0032, 0.0191, 0.1040, 0.3856];
    let mut bad = Vec::new();
    if s.tau != 8 {
        bad.push(format!("tau = {}", s.tau));
    }
    if s.t_prime != 2 {
        bad.push(format!("t' = {}", s.t_prime));
    }
    for (t, &w) in want_r.iter().enumerate() {
        match s.radii.get(t + 1) {
            Some(&r) if close(r, w, 0.001) => {}
            got => bad.push(format!("r_{} = {got:?} (want {w})", t + 1)),
        }
    }
    for (i, &w) in want_theta.iter().enumerate() {
        match s.rates.get(i + 4) {
            Some(&th) if close(th, w, 0.0003) => {}
            got => bad.push(format!("theta_{} = {got:?} (want {w})", i + 4)),
        }
    }
    if elapsed >= Duration::from_secs(1) {
        bad.push(format!("runtime {elapsed:?}"));
    }
    let radii: Vec<String> = s.radii.iter().map(|r| format!("{r:.4}")).collect();
    report(1, "schedule golden table", bad.is_empty(), format!("radii [{}]; mismatches: {bad:?}", radii.join(", ")));
    assert!(bad.is_empty(), "{bad:?}");
}

#[test]
fn criterion_02_parameter_table() {
    let p = derive_params(1e7, 28.0, 4, 0.5).unwrap();
    let s = compute_schedule(&p).unwrap();
    let floor = p.alpha * p.gamma.powi(4);
    let checks = [
        ("beta", close(p.beta, 1.386, 0.001)),
        ("gamma", close(p.gamma, 0.6387, 0.0005)),
        ("gamma*", close(p.gamma_star, 0.7621, 0.0005)),
        ("alpha gamma^d", close(floor, 0.083, 0.001)),
        ("t' = 2", s.t_prime == 2),
        ("t' below bound", (s.t_prime as f64) < p.t_prime_bound),
    ];
    let pass = checks.iter().all(|c| c.1);
    report(
        2,
        "parameter table",
        pass,
        format!(
            "beta={:.4} gamma={:.4} gamma*={:.4} alpha*gamma^d={:.4} t'={} bound={:.3}; failed: {:?}",
            p.beta,
            p.gamma,
            p.gamma_star,
            floor,
            s.t_prime,
            p.t_prime_bound,
            checks.iter().filter(|c| !c.1).map(|c| c.0).collect::<Vec<_>>()
        ),
    );
    assert!(pass);
}

const DESK_N: f64 = 2e4;
const DESK_K: f64 = 12.0;
const DESK_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn desk_runs() -> &'static Vec<(TwoNrqRun, Duration)> {
    static RUNS: OnceLock<Vec<(TwoNrqRun, Duration)>> = OnceLock::new();
    RUNS.get_or_init(|| {
        DESK_SEEDS
            .iter()
            .map(|&seed| {
                let start = Instant::now();
                let run = run_2nrq(DESK_N, DESK_K, 2, 0.5, seed, &SimOptions { sample_size: 500 }).unwrap();
                (run, start.elapsed())
            })
            .collect()
    })
}

#[test]
fn criterion_03_sampling_property() {
    let mut bad = Vec::new();
    let mut worst_rate_z: f64 = 0.0;
    let mut worst_degree_z: f64 = 0.0;
    for ((run, elapsed), seed) in desk_runs().iter().zip(DESK_SEEDS) {
        if *elapsed >= Duration::from_secs(120) {
            bad.push(format!("seed {seed}: runtime {elapsed:?}"));
        }
        for r in &run.report.per_round {
            let s = r.sampling.as_ref().expect("sampling verified every round");
            if s.long_edges > 0 {
                bad.push(format!("seed {seed} t={}: {} edges longer than r_t", r.t, s.long_edges));
            }
            let (rz, dz) = (s.rate_z(), s.degree_z(DESK_K));
            worst_rate_z = worst_rate_z.max(rz.abs());
            worst_degree_z = worst_degree_z.max(dz.abs());
            if s.sampled < 500 {
                bad.push(format!("seed {seed} t={}: only {} vertices sampled", r.t, s.sampled));
            }
            if rz.abs() > 3.0 {
                bad.push(format!("seed {seed} t={}: rate {:.5} vs theta {:.5} (z = {rz:.1})", r.t, s.rate_mean, s.theta_t));
            }
            if dz.abs() > 3.0 {
                bad.push(format!("seed {seed} t={}: mean degree {:.2} (z = {dz:.1})", r.t, s.degree_mean));
            }
        }
        let p = run.schedule.params;
        let last = run.schedule.rates[run.schedule.tau];
        if !(last > p.final_rate_floor() && last <= p.alpha) {
            bad.push(format!("seed {seed}: final theta {last} outside (alpha gamma^d, alpha]"));
        }
    }
    report(
        3,
        "2NRQ sampling property (desk scale)",
        bad.is_empty(),
        format!("worst |z| rate {worst_rate_z:.1}, degree {worst_degree_z:.1}; violations: {bad:?}"),
    );
    assert!(bad.is_empty(), "{bad:#?}");
}

#[test]
fn criterion_04_work_bound() {
    let mut bad = Vec::new();
    let mut ratio_max: f64 = 0.0;
    for ((run, _), seed) in desk_runs().iter().zip(DESK_SEEDS) {
        let tau = run.schedule.tau;
        let p = run.schedule.params;
        let bound = p.round_bound(run.schedule.t_prime);
        if tau as f64 > bound {
            bad.push(format!("seed {seed}: tau {tau} > {bound:.2}"));
        }
        let cap = 5.0 * DESK_N * DESK_K * DESK_K * tau as f64;
        let evals = run.report.distance_evals as f64;
        ratio_max = ratio_max.max(evals / cap);
        if evals > cap {
            bad.push(format!("seed {seed}: {evals} distance evaluations > {cap}"));
        }
    }
    report(4, "2NRQ work bound", bad.is_empty(), format!("max evals / (5 n K^2 tau) = {ratio_max:.3}; violations: {bad:?}"));
    assert!(bad.is_empty());
}

fn paris_runs() -> &'static Vec<NndReport> {
    static RUNS: OnceLock<Vec<NndReport>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let table = ranking_from_distances(&ParisSpace::standard(2048), &Default::default()).unwrap();
        let exact = exact_knn(&table, 8).unwrap();
        let oracle = RankingOracle::new(&table);
        (0..100)
            .map(|seed| {
                let cfg = NndConfig { k: 8, mode: Mode::Batch { include_cofriends: true }, seed, max_rounds: None, stop: Stop::NoChange };
                run_nnd(&oracle, &cfg, Some(&exact)).unwrap().report
            })
            .collect()
    })
}

#[test]
fn criterion_05_nnd_success_on_paris() {
    let limit = ((2048f64).ln() / 7f64.ln()).ceil() as usize;
    assert_eq!(limit, 4);
    let runs = paris_runs();
    let good = runs.iter().filter(|r| r.rounds_to_exact().is_some_and(|t| t <= limit)).count();
    let pass = good >= 95;
    report(5, "NND success on Paris metric", pass, format!("{good}/100 runs exact within {limit} rounds"));
    assert!(pass);
}

#[test]
fn criterion_06_nnd_failure_on_generic_crs() {
    let (n, k) = (512, 8);
    let budget = (2.0 * (n as f64).ln() / (k as f64).ln()).ceil() as usize;
    let mut low = 0;
    let mut recalls = Vec::new();
    for seed in 0..100 {
        let crs = generic_crs(n, seed).unwrap();
        let exact = exact_knn(crs.table(), k).unwrap();
        let oracle = RankingOracle::new(crs.table());
        let cfg = NndConfig { k, mode: Mode::Pointwise { schedule: None }, seed: derive(seed, 1), max_rounds: Some(budget), stop: Stop::NoChange };
        let rec = run_nnd(&oracle, &cfg, Some(&exact)).unwrap().report.recall.unwrap();
        recalls.push(rec);
        low += (rec < 0.5) as usize;
    }
    let paris_budget = (2.0 * 2048f64.ln() / 8f64.ln()).ceil() as usize;
    let paris_exact = paris_runs().iter().filter(|r| r.rounds_to_exact().is_some_and(|t| t <= paris_budget)).count();
    let mean = recalls.iter().sum::<f64>() / recalls.len() as f64;
    let pass = low >= 90 && paris_exact >= 95;
    report(
        6,
        "NND failure on generic CRS",
        pass,
        format!("{low}/100 runs below recall 0.5 after {budget} passes (mean {mean:.3}); Paris exact within {paris_budget} rounds in {paris_exact}/100"),
    );
    assert!(pass);
}

#[test]
fn criterion_07_census_n4() {
    let start = Instant::now();
    let c = enumerate_small(4).unwrap();
    let frac = white_edge_fraction(4, 1, 0).unwrap().exact;
    let elapsed = start.elapsed();
    let partition: u64 = c.component_sizes.iter().map(|(s, k)| s * k).sum();
    let checks = [
        ("720 orders", c.orders == 720 && partition == 720),
        ("all concordant", c.all_concordant),
        ("components are fibers", c.components_are_fibers),
        ("white fraction 1/5", frac == Ratio::new(1, 5)),
        ("lower bound 720/1296", close(c.lower_bound, 720.0 / 1296.0, 1e-12)),
        ("upper bound 360", c.upper_bound == 360.0),
        ("ratio strictly inside", c.within_bounds()),
        ("runtime", elapsed < Duration::from_secs(30)),
    ];
    let pass = checks.iter().all(|c| c.1);
    report(
        7,
        "CRS census n = 4",
        pass,
        format!(
            "|R_4| = {}, |L|/|R| = {:.3}, white fraction {frac}, {elapsed:?}; failed: {:?}",
            c.images,
            c.mean_fiber,
            checks.iter().filter(|c| !c.1).map(|c| c.0).collect::<Vec<_>>()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_08_embedding() {
    let letter = |c: u8| ItemId::from((c - b'a') as usize);
    let pair = |s: &str| PairId::new(letter(s.as_bytes()[0]), letter(s.as_bytes()[1])).unwrap();
    let expected: [(&str, &[(&str, f64)]); 5] = [
        ("a", &[("ab", 1.1), ("ae", 1.4), ("ad", 1.7), ("ac", 1.8)]),
        ("b", &[("ab", -1.1), ("bc", 1.5), ("bd", 1.9), ("be", 2.0)]),
        ("c", &[("cd", 1.2), ("ce", 1.3), ("bc", -1.5), ("ac", -1.8)]),
        ("d", &[("cd", -1.2), ("de", 1.6), ("ad", -1.7), ("bd", -1.9)]),
        ("e", &[("ce", -1.3), ("ae", -1.4), ("de", -1.6), ("be", -2.0)]),
    ];
    let crs = concordancy_check(&five_point_system());
    let emb = linf_embed_with_extension(&crs, &five_point_extension()).unwrap();
    let mut bad = Vec::new();
    for (row, entries) in expected {
        let x = letter(row.as_bytes()[0]);
        for p in five_point_extension().pairs() {
            let want = entries.iter().find(|(s, _)| pair(s) == *p).map_or(0.0, |e| e.1);
            let got = emb.get(x, *p).unwrap();
            if !close(got, want, 1e-12) {
                bad.push(format!("{row},{p}: {got} != {want}"));
            }
        }
    }
    if !verify_embedding(&crs, &emb) {
        bad.push("five-point embedding does not verify".into());
    }
    for seed in 0..100 {
        let g = generic_crs(8, seed).unwrap();
        let e = linf_embed(&g, seed).unwrap();
        if !verify_embedding(&g, &e) {
            bad.push(format!("seed {seed}: verification failed"));
        }
        let big_n = e.columns().len() as f64;
        for (c, p) in e.columns().iter().enumerate() {
            let want = 2.0 + 2.0 * (c + 1) as f64 / big_n;
            if !close(e.distance(p.i(), p.j()), want, 1e-12) {
                bad.push(format!("seed {seed}: distance of {p}"));
            }
        }
    }
    report(8, "l-infinity embedding", bad.is_empty(), format!("mismatches: {bad:?}"));
    assert!(bad.is_empty());
}

#[test]
fn criterion_09_special_orders() {
    let p2 = white_component(&powers_of_two_order(6).unwrap(), 100);
    let eu = white_component(&eulerian_order(5).unwrap(), 100);
    let bo = baranyai_order(6).unwrap();
    let comp = white_component(&bo, 20_000);
    let base = phi_table(&bo);
    let all_equal = comp.members.iter().all(|o| phi_table(o) == base);
    let checks = [
        ("powers-of-two isolated", p2.complete && p2.members.len() == 1),
        ("eulerian isolated", eu.complete && eu.members.len() == 1),
        ("baranyai component >= 7776", comp.members.len() >= 7776),
        ("baranyai component phi-equal", all_equal),
    ];
    let pass = checks.iter().all(|c| c.1);
    report(
        9,
        "special orders",
        pass,
        format!(
            "baranyai component explored {} orders (complete: {}); failed: {:?}",
            comp.members.len(),
            comp.complete,
            checks.iter().filter(|c| !c.1).map(|c| c.0).collect::<Vec<_>>()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_10_diameter_and_expansion() {
    let d = diameter_experiment(10_000, 3, 50, 0.5, 10).unwrap();
    let g = FriendState::init_random_kout(10_000, 16, 11).unwrap().to_graph();
    let e = expansion_check(&g, 0.05, 1.0, 10_000, 12).unwrap();
    let pass = d.fraction_within >= 0.95 && e.violations == 0 && e.sampled == 10_000;
    report(
        10,
        "diameter and expansion",
        pass,
        format!(
            "fraction within {:.2} = {:.2} (median diameter {:?}); expansion violations {}/{} (min ratio {:.2})",
            d.bound,
            d.fraction_within,
            d.median_diameter(),
            e.violations,
            e.sampled,
            e.min_ratio
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_11_lcs_analytics() {
    let (qk, q1) = lcs_qk(2f64.powi(16), 2f64.powi(33), 32.0, 2f64.powi(-4));
    let space = LcsSpace::sample(3000, 64, &[0.25; 4], 5).unwrap();
    let mut violations = 0;
    for t in 0..1000 {
        let (a, b, c) = (3 * t, 3 * t + 1, 3 * t + 2);
        let ab = space.lcs_distance(a, b).unwrap().rho;
        let bc = space.lcs_distance(b, c).unwrap().rho;
        let ac = space.lcs_distance(a, c).unwrap().rho;
        violations += (ac > ab + bc + 1e-12) as usize;
    }
    let pass = qk.round() == 15.0 && q1.round() == 16.0 && violations == 0;
    report(11, "LCS analytics", pass, format!("(q_K, q_1) = ({qk:.3}, {q1:.3}); triangle violations {violations}/1000"));
    assert!(pass);
}
