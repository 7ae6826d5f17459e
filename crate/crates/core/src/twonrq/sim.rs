use rand::seq::index;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use super::params::{derive_params, g_min_overlap, TwoNrqParams};
use super::schedule::{compute_schedule, Schedule};
use crate::error::{Error, Result};
use crate::rng::{derive, keyed_uniform, seeded};
use crate::spaces::{torus_distance, TorusSpace};
use crate::stats::{ks_critical, ks_two_sample, Summary};

/// Undirected edge set `E_t` on a Poisson sample of the torus.
#[derive(Debug, Clone)]
pub struct TwoNrqState {
    space: TorusSpace,
    /// Sorted, each `(u, v)` with `u < v`.
    edges: Vec<(u32, u32)>,
    t: usize,
    distance_evals: u64,
}

impl TwoNrqState {
    pub fn from_edges(space: TorusSpace, mut edges: Vec<(u32, u32)>, t: usize) -> Result<Self> {
        let n = space.len() as u32;
        for e in &mut edges {
            if e.0 == e.1 || e.0 >= n || e.1 >= n {
                return Err(Error::input(format!("bad edge ({}, {})", e.0, e.1)));
            }
            *e = (e.0.min(e.1), e.0.max(e.1));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(TwoNrqState { space, edges, t, distance_evals: 0 })
    }

    pub fn space(&self) -> &TorusSpace {
        &self.space
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn distance_evals(&self) -> u64 {
        self.distance_evals
    }

    pub fn degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.space.len()];
        for &(u, v) in &self.edges {
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        deg
    }

    /// Adjacency in CSR form: neighbors of `v` are `targets[offsets[v]..offsets[v + 1]]`.
    pub fn adjacency(&self) -> (Vec<usize>, Vec<u32>) {
        let n = self.space.len();
        let deg = self.degrees();
        let mut offsets = vec![0usize; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + deg[v] as usize;
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0u32; offsets[n]];
        for &(u, v) in &self.edges {
            targets[fill[u as usize]] = v;
            fill[u as usize] += 1;
            targets[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        (offsets, targets)
    }

    /// Longest edge under the torus metric (0 when there are none).
    pub fn max_edge_length(&self) -> f64 {
        self.edges
            .iter()
            .map(|&(u, v)| torus_distance(self.space.point(u as usize), self.space.point(v as usize)))
            .fold(0.0, f64::max)
    }
}

/// `E_0`: every pair joined independently at rate `K / n_mean`, realized by
/// drawing the edge count from a binomial and then that many distinct pairs.
pub fn init_e0(space: TorusSpace, k: f64, n_mean: f64, seed: u64) -> Result<TwoNrqState> {
    let n = space.len();
    if n < 2 {
        return Err(Error::input("need at least two points"));
    }
    let p = k / n_mean;
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Parameter(format!("edge rate K/n = {p} outside (0, 1]")));
    }
    let total = n * (n - 1) / 2;
    let mut rng = seeded(seed);
    let m = if p >= 1.0 {
        total
    } else {
        Binomial::new(total as u64, p).map_err(|e| Error::Parameter(e.to_string()))?.sample(&mut rng) as usize
    };
    let mut codes = index::sample(&mut rng, total, m).into_vec();
    codes.sort_unstable();
    let mut edges = Vec::with_capacity(m);
    let (mut i, mut start) = (0usize, 0usize);
    for c in codes {
        while c >= start + (n - i - 1) {
            start += n - i - 1;
            i += 1;
        }
        edges.push((i as u32, (i + 1 + c - start) as u32));
    }
    Ok(TwoNrqState { space, edges, t: 0, distance_evals: 0 })
}

/// One round of second-neighbor range queries.
///
/// Every hub with at least two neighbors in `E_{t-1}` offers each pair of its
/// neighbors; pairs within `r_t` are joined with probability
/// `g_value / ν_{r_prev}`. The new edge set replaces the old one.
pub fn range_query_round(state: &TwoNrqState, r_t: f64, r_prev: f64, g_value: f64, seed: u64) -> Result<TwoNrqState> {
    let (offsets, targets) = state.adjacency();
    let n = state.space.len();
    let round = state.t as u64 + 1;
    let space = &state.space;
    let per_hub: Vec<Result<(Vec<(u32, u32)>, u64)>> = (0..n)
        .into_par_iter()
        .filter(|&h| offsets[h + 1] - offsets[h] >= 2)
        .map(|h| {
            let nb = &targets[offsets[h]..offsets[h + 1]];
            let mut accepted = Vec::new();
            let mut evals = 0u64;
            for (a, &u) in nb.iter().enumerate() {
                for &v in &nb[a + 1..] {
                    evals += 1;
                    let (pu, pv) = (space.point(u as usize), space.point(v as usize));
                    if torus_distance(pu, pv) > r_t {
                        continue;
                    }
                    let nu = space.ball_overlap(u as usize, v as usize, r_prev);
                    let f = g_value / nu;
                    if !(f <= 1.0 + 1e-12) {
                        return Err(Error::Invariant(format!("acceptance rate {f} exceeds 1")));
                    }
                    let (lo, hi) = (u.min(v), u.max(v));
                    let pair = lo as u64 * n as u64 + hi as u64;
                    if keyed_uniform(seed, round, h as u64, pair) < f {
                        accepted.push((lo, hi));
                    }
                }
            }
            Ok((accepted, evals))
        })
        .collect();
    let mut edges = Vec::new();
    let mut evals = 0;
    for r in per_hub {
        let (acc, e) = r?;
        edges.extend(acc);
        evals += e;
    }
    edges.sort_unstable();
    edges.dedup();
    Ok(TwoNrqState { space: state.space.clone(), edges, t: state.t + 1, distance_evals: state.distance_evals + evals })
}

/// Empirical check of the sampling property at one round.
#[derive(Debug, Clone, Serialize)]
pub struct SamplingReport {
    pub t: usize,
    pub r_t: f64,
    pub theta_t: f64,
    pub sampled: usize,
    /// Edges (over the whole graph) longer than `r_t`.
    pub long_edges: usize,
    /// Mean of `deg(v) / |Q_t(v)|` over sampled vertices, and its standard error.
    pub rate_mean: f64,
    pub rate_se: f64,
    pub degree_mean: f64,
    /// `sqrt(K / sampled)`.
    pub degree_sigma: f64,
    /// Two-sample KS statistic of `(ρ/r_t)^d` for neighbors against all
    /// points in the sampled balls, with the 1% critical value.
    pub ks_statistic: f64,
    pub ks_critical: f64,
}

impl SamplingReport {
    pub fn rate_z(&self) -> f64 {
        if self.rate_se > 0.0 {
            (self.rate_mean - self.theta_t) / self.rate_se
        } else if self.rate_mean == self.theta_t {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn degree_z(&self, k: f64) -> f64 {
        (self.degree_mean - k) / self.degree_sigma
    }

    pub fn ks_pass(&self) -> bool {
        self.ks_statistic <= self.ks_critical
    }
}

const KS_POPULATION_CAP: usize = 200_000;

pub fn verify_sampling_property(state: &TwoNrqState, r_t: f64, theta_t: f64, k: f64, sample_size: usize, seed: u64) -> Result<SamplingReport> {
    let space = &state.space;
    let n = space.len();
    let d = space.dim() as i32;
    if n == 0 || sample_size == 0 {
        return Err(Error::input("need points and a positive sample size"));
    }
    let (offsets, targets) = state.adjacency();
    let long_edges = state
        .edges
        .iter()
        .filter(|&&(u, v)| torus_distance(space.point(u as usize), space.point(v as usize)) > r_t)
        .count();
    let sample = index::sample(&mut seeded(seed), n, sample_size.min(n)).into_vec();

    let mut rates = Vec::with_capacity(sample.len());
    let mut degrees = Vec::with_capacity(sample.len());
    let mut neighbor_stat = Vec::new();
    let mut ball_stat = Vec::new();
    let mut ball_total = 0usize;
    let per_vertex: Vec<Vec<f64>> = sample
        .iter()
        .map(|&v| {
            (0..n)
                .filter(|&w| w != v)
                .filter_map(|w| {
                    let rho = torus_distance(space.point(v), space.point(w));
                    (rho <= r_t).then(|| (rho / r_t).powi(d))
                })
                .collect()
        })
        .collect();
    for ball in &per_vertex {
        ball_total += ball.len();
    }
    let stride = ball_total.div_ceil(KS_POPULATION_CAP).max(1);
    let mut counter = 0usize;
    for (&v, ball) in sample.iter().zip(&per_vertex) {
        let nb = &targets[offsets[v]..offsets[v + 1]];
        degrees.push(nb.len() as f64);
        if !ball.is_empty() {
            rates.push(nb.len() as f64 / ball.len() as f64);
        }
        for &w in nb {
            let rho = torus_distance(space.point(v), space.point(w as usize));
            if rho <= r_t {
                neighbor_stat.push((rho / r_t).powi(d));
            }
        }
        for &x in ball {
            if counter.is_multiple_of(stride) {
                ball_stat.push(x);
            }
            counter += 1;
        }
    }
    let rate = Summary::of(&rates);
    let degree = Summary::of(&degrees);
    let (ks_statistic, ks_crit) = if neighbor_stat.is_empty() || ball_stat.is_empty() {
        (0.0, f64::INFINITY)
    } else {
        (ks_two_sample(&neighbor_stat, &ball_stat), ks_critical(0.01, neighbor_stat.len(), ball_stat.len()))
    };
    Ok(SamplingReport {
        t: state.t,
        r_t,
        theta_t,
        sampled: sample.len(),
        long_edges,
        rate_mean: rate.mean,
        rate_se: rate.std_err,
        degree_mean: degree.mean,
        degree_sigma: (k / sample.len() as f64).sqrt(),
        ks_statistic,
        ks_critical: ks_crit,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundReport {
    pub t: usize,
    pub r_t: f64,
    pub theta_t: f64,
    pub edges: usize,
    pub mean_degree: f64,
    pub max_edge_length: f64,
    pub distance_evals: u64,
    pub sampling: Option<SamplingReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WorkReport {
    pub points: usize,
    pub rounds: usize,
    pub distance_evals: u64,
    /// `t' + ln(n alpha / K) / (d ln(1/γ*))`.
    pub round_bound: f64,
    /// `n K^2 round_bound`.
    pub work_bound: f64,
    pub per_round: Vec<RoundReport>,
}

#[derive(Debug, Clone)]
pub struct SimOptions {
    /// Vertices sampled per round for [`verify_sampling_property`]; 0 skips it.
    pub sample_size: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { sample_size: 500 }
    }
}

pub struct TwoNrqRun {
    pub state: TwoNrqState,
    pub schedule: Schedule,
    pub report: WorkReport,
}

/// Samples the torus, builds `E_0` and runs every scheduled round.
pub fn run_2nrq(n_mean: f64, k: f64, d: u32, alpha: f64, seed: u64, opts: &SimOptions) -> Result<TwoNrqRun> {
    let params: TwoNrqParams = derive_params(n_mean, k, d, alpha)?;
    let schedule = compute_schedule(&params)?;
    let space = TorusSpace::poisson(n_mean, d as usize, derive(seed, 0));
    let mut state = init_e0(space, k, n_mean, derive(seed, 1))?;
    let coin_seed = derive(seed, 2);
    let mut per_round = Vec::with_capacity(schedule.tau + 1);
    for t in 0..=schedule.tau {
        if t > 0 {
            let (r, r_prev) = (schedule.radii[t], schedule.radii[t - 1]);
            state = range_query_round(&state, r, r_prev, g_min_overlap(r, r_prev, d), coin_seed)?;
        }
        let (r_t, theta_t) = (schedule.radii[t], schedule.rates[t]);
        let sampling = (opts.sample_size > 0)
            .then(|| verify_sampling_property(&state, r_t, theta_t, k, opts.sample_size, derive(seed, 3 + t as u64)))
            .transpose()?;
        let points = state.space.len().max(1) as f64;
        per_round.push(RoundReport {
            t,
            r_t,
            theta_t,
            edges: state.edges.len(),
            mean_degree: 2.0 * state.edges.len() as f64 / points,
            max_edge_length: state.max_edge_length(),
            distance_evals: state.distance_evals,
            sampling,
        });
    }
    let round_bound = params.round_bound(schedule.t_prime);
    let report = WorkReport {
        points: state.space.len(),
        rounds: schedule.tau,
        distance_evals: state.distance_evals,
        round_bound,
        work_bound: n_mean * k * k * round_bound,
        per_round,
    };
    Ok(TwoNrqRun { state, schedule, report })
}
