use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::concord::{concordancy_check, phi_table};
use super::pair::{LinearOrder, PairId};
use crate::error::{Error, Result};

/// Exhaustive statistics over all linear orders on pairs of `n <= 5` points.
#[derive(Debug, Clone, Serialize)]
pub struct Census {
    pub n: usize,
    /// `|L_n| = N!`.
    pub orders: u64,
    /// Distinct `φ` images, `|R_n|`.
    pub images: u64,
    /// White component size -> number of components.
    pub component_sizes: BTreeMap<u64, u64>,
    pub all_concordant: bool,
    /// Components coincide with `φ` fibers.
    pub components_are_fibers: bool,
    /// `|L_n| / |R_n|`, the mean fiber size.
    pub mean_fiber: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

impl Census {
    pub fn within_bounds(&self) -> bool {
        self.lower_bound < self.mean_fiber && self.mean_fiber < self.upper_bound
    }
}

fn factorial(k: u64) -> f64 {
    (2..=k).map(|v| v as f64).product()
}

/// Enumerates every order by Lehmer rank, joins white neighbors with
/// union-find and compares the components with the `φ` fibers.
pub fn enumerate_small(n: usize) -> Result<Census> {
    if n > 5 {
        return Err(Error::Refused(format!("exhaustive census needs (n(n-1)/2)! orders; n = {n} is too large")));
    }
    if n < 2 {
        return Err(Error::input("census needs n >= 2"));
    }
    let big_n = PairId::count(n);
    let total: usize = (1..=big_n).product();
    let lookup: Vec<PairId> = (0..big_n).map(|k| PairId::from_index(k, n)).collect();
    let mut uf = UnionFind::new(total);
    let mut key_of = vec![0u64; total];
    let mut perm = vec![0usize; big_n];
    for rank in 0..total {
        unrank(rank, &mut perm);
        key_of[rank] = phi_key(&perm, &lookup, n);
        for pos in 0..big_n - 1 {
            if lookup[perm[pos]].is_disjoint(lookup[perm[pos + 1]]) {
                perm.swap(pos, pos + 1);
                let other = lehmer_rank(&perm);
                perm.swap(pos, pos + 1);
                uf.union(rank, other);
            }
        }
    }

    let mut fiber_root: HashMap<u64, usize> = HashMap::new();
    let mut fiber_size: HashMap<u64, u64> = HashMap::new();
    let mut comp_size: HashMap<usize, u64> = HashMap::new();
    let mut fibers_agree = true;
    for (rank, &key) in key_of.iter().enumerate() {
        let root = uf.find(rank);
        *comp_size.entry(root).or_default() += 1;
        *fiber_size.entry(key).or_default() += 1;
        if *fiber_root.entry(key).or_insert(root) != root {
            fibers_agree = false;
        }
    }
    let images = fiber_size.len() as u64;
    fibers_agree &= comp_size.len() as u64 == images;

    let mut representatives: HashMap<u64, usize> = HashMap::new();
    for (rank, &key) in key_of.iter().enumerate() {
        representatives.entry(key).or_insert(rank);
    }
    let all_concordant = representatives.values().all(|&rank| {
        unrank(rank, &mut perm);
        let codes: Vec<u32> = perm.iter().map(|&c| c as u32).collect();
        let order = LinearOrder::from_codes(n, &codes).expect("valid permutation");
        concordancy_check(&phi_table(&order)).is_concordant()
    });

    let mut component_sizes = BTreeMap::new();
    for &s in comp_size.values() {
        *component_sizes.entry(s).or_default() += 1;
    }
    let nf = factorial(big_n as u64);
    let lower_bound = nf / factorial(n as u64 - 1).powi(n as i32);
    let upper_bound = nf / (1..=n.saturating_sub(2) as u64).map(factorial).product::<f64>();
    Ok(Census {
        n,
        orders: total as u64,
        images,
        component_sizes,
        all_concordant,
        components_are_fibers: fibers_agree,
        mean_fiber: total as f64 / images as f64,
        lower_bound,
        upper_bound,
    })
}

// Packs every r_x(y) into 3 bits (n <= 5 keeps ranks below 8).
fn phi_key(perm: &[usize], lookup: &[PairId], n: usize) -> u64 {
    let mut count = [0u64; 5];
    let mut key = 0u64;
    for &c in perm {
        let p = lookup[c];
        let (a, b) = (p.i().idx(), p.j().idx());
        count[a] += 1;
        count[b] += 1;
        key |= count[a] << (3 * (a * (n - 1) + b - 1));
        key |= count[b] << (3 * (b * (n - 1) + a));
    }
    key
}

fn unrank(mut rank: usize, perm: &mut [usize]) {
    let m = perm.len();
    let mut avail: Vec<usize> = (0..m).collect();
    for (pos, slot) in perm.iter_mut().enumerate() {
        let f: usize = (1..m - pos).product();
        let d = rank / f;
        rank %= f;
        *slot = avail.remove(d);
    }
}

fn lehmer_rank(perm: &[usize]) -> usize {
    let m = perm.len();
    let mut rank = 0;
    for i in 0..m {
        let smaller = perm[i + 1..].iter().filter(|&&v| v < perm[i]).count();
        rank = rank * (m - i) + smaller;
    }
    rank
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let gp = self.parent[self.parent[x] as usize];
            self.parent[x] = gp;
            x = gp as usize;
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo as u32;
        }
    }
}
