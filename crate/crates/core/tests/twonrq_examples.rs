use std::collections::BTreeMap;

use rand::Rng;
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, Discrete};

use nndlab::rng::{derive, seeded};
use nndlab::spaces::{torus_distance, TorusSpace};
use nndlab::twonrq::{
    compute_schedule, derive_params, g_min_overlap, init_e0, nu_overlap, range_query_round, verify_sampling_property,
    TwoNrqState,
};

/// Pearson statistic with pooled sparse bins; returns (statistic, dof).
fn chi_square<F: Fn(u64) -> f64>(counts: &BTreeMap<u64, u64>, total: u64, pmf: F, support_max: u64) -> (f64, f64) {
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for v in 0..=support_max {
        obs += *counts.get(&v).unwrap_or(&0) as f64;
        exp += pmf(v) * total as f64;
        if exp >= 5.0 {
            bins.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    let last = bins.last_mut().unwrap();
    last.0 += total as f64 - counts.range(..=support_max).map(|(_, c)| *c as f64).sum::<f64>() + obs;
    last.1 += exp + (total as f64 - (0..=support_max).map(|v| pmf(v) * total as f64).sum::<f64>());
    let stat = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    (stat, (bins.len() - 1) as f64)
}

fn sorted_adjacency(state: &TwoNrqState) -> Vec<Vec<u32>> {
    let (off, tgt) = state.adjacency();
    (0..state.space().len())
        .map(|v| {
            let mut nb = tgt[off[v]..off[v + 1]].to_vec();
            nb.sort_unstable();
            nb
        })
        .collect()
}

fn common(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

#[test]
fn overlap_volume_matches_monte_carlo() {
    let mut rng = seeded(5);
    let samples = 1_000_000;
    for trial in 0..5 {
        let (v, w): (Vec<f64>, Vec<f64>) = (0..3).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).unzip();
        let r = 0.3 + 0.1 * trial as f64;
        let space = TorusSpace::from_points(3, &[v.clone(), w.clone()]);
        let exact = nu_overlap(&space, 0, 1, r);
        let hits = (0..samples)
            .filter(|_| {
                let p: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
                torus_distance(&p, &v) <= r && torus_distance(&p, &w) <= r
            })
            .count();
        let frac = hits as f64 / samples as f64;
        let sigma = (frac * (1.0 - frac) / samples as f64).sqrt().max(1e-9);
        let estimate = frac * space.volume();
        assert!((estimate - exact).abs() <= 3.0 * sigma * space.volume() + 1e-12, "trial {trial}: {estimate} vs {exact}");
    }
    let same = TorusSpace::from_points(3, &[vec![0.2; 3], vec![0.2; 3]]);
    assert!((nu_overlap(&same, 0, 1, 0.4) - 0.8f64.powi(3)).abs() < 1e-12);
}

#[test]
fn e0_degrees_are_binomial() {
    let n_mean = 10_000.0;
    let k = 12.0;
    let space = TorusSpace::poisson(n_mean, 2, 31);
    let n = space.len();
    let state = init_e0(space, k, n_mean, 32).unwrap();
    let mut counts = BTreeMap::new();
    for d in state.degrees() {
        *counts.entry(d as u64).or_insert(0u64) += 1;
    }
    let binom = Binomial::new(k / n_mean, (n - 1) as u64).unwrap();
    let (stat, dof) = chi_square(&counts, n as u64, |v| binom.pmf(v), 60);
    let crit = ChiSquared::new(dof).unwrap().inverse_cdf(0.99);
    assert!(stat < crit, "chi2 {stat:.2} >= {crit:.2} with {dof} dof");
}

#[test]
fn e0_rate_is_k_over_n() {
    let n_mean = 20_000.0;
    let space = TorusSpace::poisson(n_mean, 2, 3);
    let state = init_e0(space, 12.0, n_mean, 4).unwrap();
    let rep = verify_sampling_property(&state, 1.0, 12.0 / n_mean, 12.0, 2000, 5).unwrap();
    assert_eq!(rep.long_edges, 0);
    assert!(rep.rate_z().abs() < 3.0, "z = {}", rep.rate_z());
}

/// Accepted proposals per pair within `r_t`, averaged over sampled pairs,
/// against `n θ_{t-1}^2 g / 2^d`. Returns (t, measured, expected, z).
fn proposal_means(seed: u64) -> Vec<(usize, f64, f64, f64)> {
    let (n_mean, k, d, alpha) = (2e4, 12.0, 2u32, 0.5);
    let params = derive_params(n_mean, k, d, alpha).unwrap();
    let sched = compute_schedule(&params).unwrap();
    let space = TorusSpace::poisson(n_mean, d as usize, derive(seed, 0));
    let mut state = init_e0(space, k, n_mean, derive(seed, 1)).unwrap();
    let mut rng = seeded(derive(seed, 99));
    let mut out = Vec::new();
    for t in 1..=sched.tau {
        let (r, r_prev) = (sched.radii[t], sched.radii[t - 1]);
        let g = g_min_overlap(r, r_prev, d);
        let adj = sorted_adjacency(&state);
        let n = state.space().len();
        let mut values = Vec::new();
        while values.len() < 40_000 {
            let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
            if u == v || torus_distance(state.space().point(u), state.space().point(v)) > r {
                continue;
            }
            let c = common(&adj[u], &adj[v]) as f64;
            values.push(c * g / nu_overlap(state.space(), u, v, r_prev));
        }
        let m = values.len() as f64;
        let mean = values.iter().sum::<f64>() / m;
        let sd = (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
        let theta = sched.rates[t - 1];
        let expected = n_mean * theta * theta * g / params.two_d();
        out.push((t, mean, expected, (mean - expected) / (sd / m.sqrt())));
        state = range_query_round(&state, r, r_prev, g, derive(seed, 2)).unwrap();
    }
    out
}

#[test]
fn accepted_proposals_match_the_thinned_mean() {
    let rows = proposal_means(1);
    let report: Vec<String> = rows.iter().map(|(t, m, e, z)| format!("t={t}: {m:.5} vs {e:.5} (z={z:.1})")).collect();
    assert!(rows.iter().all(|r| r.3.abs() <= 3.0), "{}", report.join("; "));
}

#[test]
fn doubling_n_adds_at_most_one_round() {
    for n in [1e4, 2e4, 5e4, 1e5, 1e6, 1e7] {
        let a = compute_schedule(&derive_params(n, 12.0, 2, 0.5).unwrap()).unwrap();
        let b = compute_schedule(&derive_params(2.0 * n, 12.0, 2, 0.5).unwrap()).unwrap();
        assert!(b.tau == a.tau || b.tau == a.tau + 1, "n={n}: {} -> {}", a.tau, b.tau);
    }
}

#[test]
fn radii_and_rates_are_sandwiched_after_t_prime() {
    for (n, k, d) in [(1e7, 28.0, 4u32), (2e4, 12.0, 2), (1e6, 20.0, 3), (1e8, 40.0, 2)] {
        let p = derive_params(n, k, d, 0.5).unwrap();
        let s = compute_schedule(&p).unwrap();
        assert!((s.tau as f64) <= p.round_bound(s.t_prime), "n={n}");
        for t in s.t_prime + 1..=s.tau {
            let ratio = s.radii[t] / s.radii[t - 1];
            assert!(p.gamma < ratio && ratio <= p.gamma_star + 1e-12, "n={n} t={t}: {ratio}");
            let rate_ratio = s.rates[t] / s.rates[t - 1];
            let di = d as i32;
            assert!(p.gamma_star.powi(-di) - 1e-9 <= rate_ratio && rate_ratio < p.gamma.powi(-di), "n={n} t={t}");
        }
        let last = s.rates[s.tau];
        assert!(last > 0.5 * p.gamma.powi(d as i32) && last <= 0.5, "n={n}: {last}");
    }
}

#[test]
fn rounds_keep_edges_short_and_rates_bounded() {
    let p = derive_params(5000.0, 12.0, 2, 0.5).unwrap();
    let s = compute_schedule(&p).unwrap();
    let mut state = init_e0(TorusSpace::poisson(5000.0, 2, 8), 12.0, 5000.0, 9).unwrap();
    for t in 1..=s.tau {
        let g = g_min_overlap(s.radii[t], s.radii[t - 1], 2);
        state = range_query_round(&state, s.radii[t], s.radii[t - 1], g, 10).unwrap();
        assert!(state.max_edge_length() <= s.radii[t]);
        assert_eq!(state.t(), t);
    }
}
