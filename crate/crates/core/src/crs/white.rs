use std::collections::{HashSet, VecDeque};

use num_rational::Ratio;
use rand::Rng;
use serde::Serialize;

use super::pair::{check_pos, LinearOrder, PairId};
use crate::error::{Error, Result};
use crate::rng::seeded;

/// An adjacent transposition at `pos` (1-based) is white iff the two pairs
/// are disjoint, i.e. the swap leaves `φ` unchanged.
pub fn swap_is_white(order: &LinearOrder, pos: usize) -> Result<bool> {
    check_pos(pos, order.len())?;
    Ok(order.at(pos).is_disjoint(order.at(pos + 1)))
}

/// No white edge leaves this order.
pub fn is_isolated(order: &LinearOrder) -> bool {
    order.pairs().windows(2).all(|w| !w[0].is_disjoint(w[1]))
}

#[derive(Debug, Clone)]
pub struct WhiteComponent {
    pub members: Vec<LinearOrder>,
    /// False when exploration stopped at the cap.
    pub complete: bool,
}

/// Breadth-first search over white edges, stopping once `cap` orders are
/// collected.
pub fn white_component(order: &LinearOrder, cap: usize) -> WhiteComponent {
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut members = Vec::new();
    let mut queue = VecDeque::new();
    seen.insert(order.codes());
    queue.push_back(order.clone());
    let mut complete = true;
    while let Some(o) = queue.pop_front() {
        if members.len() >= cap {
            complete = false;
            break;
        }
        for pos in 1..o.len() {
            if o.at(pos).is_disjoint(o.at(pos + 1)) {
                let next = o.swapped(pos).expect("position in range");
                if seen.insert(next.codes()) {
                    queue.push_back(next);
                }
            }
        }
        members.push(o);
    }
    WhiteComponent { members, complete }
}

/// Pairs of `{2^0, ..., 2^(n-1)}` ordered by `2^j - 2^i`.
pub fn powers_of_two_order(n: usize) -> Result<LinearOrder> {
    if n < 3 {
        return Err(Error::input("powers-of-two order needs n >= 3"));
    }
    let pairs = (1..n).flat_map(|j| (0..j).rev().map(move |i| PairId::of(i, j))).collect();
    LinearOrder::from_pairs(n, pairs)
}

/// Orders obtained from [`powers_of_two_order`] by permuting, for each `j`,
/// the pairs `{i, j}` with `i <= j - 2`. All of them are isolated.
///
/// Refuses when there would be more than `limit` orders.
pub fn powers_of_two_variants(n: usize, limit: usize) -> Result<Vec<LinearOrder>> {
    let base = powers_of_two_order(n)?;
    let mut count: usize = 1;
    for k in 1..n - 1 {
        count = (2..=k).try_fold(count, |c, f| c.checked_mul(f)).filter(|&c| c <= limit).ok_or_else(|| {
            Error::Refused(format!("more than {limit} block permutations at n = {n}"))
        })?;
    }
    let mut groups: Vec<Vec<Vec<PairId>>> = Vec::new();
    for j in 1..n {
        let block: Vec<PairId> = (0..j.saturating_sub(1)).rev().map(|i| PairId::of(i, j)).collect();
        groups.push(permutations(&block));
    }
    let mut out = Vec::with_capacity(count);
    let mut choice = vec![0usize; groups.len()];
    loop {
        let mut pairs = Vec::with_capacity(base.len());
        for (g, j) in (1..n).enumerate() {
            pairs.push(PairId::of(j - 1, j));
            pairs.extend_from_slice(&groups[g][choice[g]]);
        }
        out.push(LinearOrder::from_pairs(n, pairs)?);
        let mut g = 0;
        loop {
            if g == groups.len() {
                return Ok(out);
            }
            choice[g] += 1;
            if choice[g] < groups[g].len() {
                break;
            }
            choice[g] = 0;
            g += 1;
        }
    }
}

fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for k in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

/// Perfect matchings of the round-robin 1-factorization of `K_n`.
pub fn round_robin_matchings(n: usize) -> Result<Vec<Vec<PairId>>> {
    if n < 4 || n % 2 == 1 {
        return Err(Error::input(format!("round-robin factorization needs even n >= 4 (n = {n})")));
    }
    let m = n - 1;
    Ok((0..m)
        .map(|r| {
            let mut matching = vec![PairId::of(r, m)];
            matching.extend((1..n / 2).map(|k| PairId::of((r + k) % m, (r + m - k) % m)));
            matching
        })
        .collect())
}

/// Round-robin matchings concatenated.
pub fn baranyai_order(n: usize) -> Result<LinearOrder> {
    LinearOrder::from_pairs(n, round_robin_matchings(n)?.concat())
}

/// Edges of `K_n` in the order of an Eulerian circuit (Hierholzer, starting
/// at point 0, lowest neighbor first).
pub fn eulerian_order(n: usize) -> Result<LinearOrder> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::input(format!("K_n is Eulerian only for odd n >= 3 (n = {n})")));
    }
    let mut used = vec![false; PairId::count(n)];
    let mut next = vec![0usize; n];
    let mut stack = vec![0usize];
    let mut circuit = Vec::new();
    while let Some(&v) = stack.last() {
        while next[v] < n && (next[v] == v || used[PairId::of(v, next[v]).index(n)]) {
            next[v] += 1;
        }
        if next[v] < n {
            let w = next[v];
            used[PairId::of(v, w).index(n)] = true;
            stack.push(w);
        } else {
            circuit.push(v);
            stack.pop();
        }
    }
    circuit.reverse();
    let pairs = circuit.windows(2).map(|w| PairId::of(w[0], w[1])).collect();
    LinearOrder::from_pairs(n, pairs)
}

#[derive(Debug, Clone, Serialize)]
pub struct WhiteFraction {
    pub n: usize,
    #[serde(serialize_with = "ratio_as_string")]
    pub exact: Ratio<u64>,
    pub empirical: f64,
    pub samples: usize,
}

fn ratio_as_string<S: serde::Serializer>(r: &Ratio<u64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// `C(n-2, 2) / (C(n, 2) - 1)`, plus a Monte Carlo estimate over random
/// orders and positions.
pub fn white_edge_fraction(n: usize, samples: usize, seed: u64) -> Result<WhiteFraction> {
    if n < 3 {
        return Err(Error::input("white-edge fraction needs n >= 3"));
    }
    if samples == 0 {
        return Err(Error::input("need at least one sample"));
    }
    let c2 = |m: u64| m * m.saturating_sub(1) / 2;
    let exact = Ratio::new(c2(n as u64 - 2), c2(n as u64) - 1);
    let mut rng = seeded(seed);
    let big_n = PairId::count(n);
    let lookup: Vec<PairId> = (0..big_n).map(|k| PairId::from_index(k, n)).collect();
    let mut white = 0usize;
    for _ in 0..samples {
        // Two consecutive entries of a uniform order are a uniform ordered
        // pair of distinct pairs.
        let a = rng.random_range(0..big_n);
        let mut b = rng.random_range(0..big_n - 1);
        if b >= a {
            b += 1;
        }
        white += lookup[a].is_disjoint(lookup[b]) as usize;
    }
    Ok(WhiteFraction { n, exact, empirical: white as f64 / samples as f64, samples })
}
