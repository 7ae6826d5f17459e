//! K-nearest neighbor descent.
//!
//! The state is a K-out digraph: every point holds `K` friends, and the
//! transpose gives its cofriends. Rounds introduce points to friends of
//! friends (and, optionally, to cofriends and their friends); each point
//! keeps the `K` candidates it prefers. All preference queries go through a
//! [`RankingOracle`], whose meter is the work measure.

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranking::{recall, ItemId, KnnGraph, Ranking, RankingOracle};
use crate::rng::seeded;

/// Friend sets `F_t`, cofriend sets `C_t` and the comparison count so far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FriendState {
    n: usize,
    k: usize,
    t: usize,
    friends: Vec<ItemId>,
    cofriends: Vec<Vec<ItemId>>,
    work: u64,
}

impl FriendState {
    /// Every point picks a uniform random K-subset of the others,
    /// independently.
    pub fn init_random_kout(n: usize, k: usize, seed: u64) -> Result<FriendState> {
        if k == 0 || k >= n {
            return Err(Error::input(format!("K must satisfy 1 <= K < n (K = {k}, n = {n})")));
        }
        let mut rng = seeded(seed);
        let mut friends = Vec::with_capacity(n * k);
        for x in 0..n {
            friends.extend(index::sample(&mut rng, n - 1, k).into_iter().map(|i| ItemId::from(if i >= x { i + 1 } else { i })));
        }
        Ok(Self::from_friends(n, k, friends))
    }

    /// Builds a state from explicit friend lists (each of length `k`).
    pub fn from_lists(k: usize, lists: &[Vec<ItemId>]) -> Result<FriendState> {
        let n = lists.len();
        for (x, l) in lists.iter().enumerate() {
            if l.len() != k || l.iter().enumerate().any(|(i, y)| y.idx() >= n || y.idx() == x || l[..i].contains(y)) {
                return Err(Error::input(format!("friend list of {x} must hold {k} distinct other points")));
            }
        }
        Ok(Self::from_friends(n, k, lists.concat()))
    }

    fn from_friends(n: usize, k: usize, friends: Vec<ItemId>) -> FriendState {
        let mut s = FriendState { n, k, t: 0, friends, cofriends: Vec::new(), work: 0 };
        s.rebuild_cofriends();
        s
    }

    fn rebuild_cofriends(&mut self) {
        let mut cof = vec![Vec::new(); self.n];
        for x in 0..self.n {
            for &y in self.friends(ItemId::from(x)) {
                cof[y.idx()].push(ItemId::from(x));
            }
        }
        self.cofriends = cof;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Round (or pass) index.
    pub fn t(&self) -> usize {
        self.t
    }

    /// Comparisons spent so far.
    pub fn work(&self) -> u64 {
        self.work
    }

    #[inline]
    pub fn friends(&self, x: ItemId) -> &[ItemId] {
        &self.friends[x.idx() * self.k..(x.idx() + 1) * self.k]
    }

    pub fn cofriends(&self, x: ItemId) -> &[ItemId] {
        &self.cofriends[x.idx()]
    }

    /// The current approximation as a [`KnnGraph`].
    pub fn to_graph(&self) -> KnnGraph {
        KnnGraph::new(self.k, self.friends.chunks(self.k).map(<[ItemId]>::to_vec).collect())
            .expect("friend state is a valid K-out graph")
    }

    /// Reciprocal friend list requests between `x` and `y`.
    ///
    /// Each keeps its top K of `F(x) ∪ F(y)` minus itself, both computed from
    /// the sets as they were before the barter.
    pub fn friend_barter<R: Ranking + ?Sized>(&mut self, x: ItemId, y: ItemId, oracle: &RankingOracle<'_, R>) -> Result<()> {
        if x == y {
            return Err(Error::input("a barter needs two distinct points"));
        }
        let before = oracle.comparisons();
        let mut scratch = Scratch::new(self.n);
        let pool: Vec<ItemId> = self.friends(x).iter().chain(self.friends(y)).copied().collect();
        let new_x = scratch.top_k(x, pool.iter().copied(), self.k, oracle);
        let new_y = scratch.top_k(y, pool.iter().copied(), self.k, oracle);
        self.set_friends(x, &new_x);
        self.set_friends(y, &new_y);
        self.rebuild_cofriends();
        self.work += oracle.comparisons() - before;
        Ok(())
    }

    fn set_friends(&mut self, x: ItemId, list: &[ItemId]) {
        self.friends[x.idx() * self.k..(x.idx() + 1) * self.k].copy_from_slice(list);
    }

    /// All friend sets updated simultaneously from the current snapshot.
    ///
    /// Candidates for `x` are `F(x) ∪ F(F(x))`, and with `include_cofriends`
    /// also `C(x) ∪ F(C(x))`. Returns how many friend sets changed.
    pub fn batch_round<R: Ranking + ?Sized>(&mut self, oracle: &RankingOracle<'_, R>, include_cofriends: bool) -> usize {
        let before = oracle.comparisons();
        let snapshot = &*self;
        let lists: Vec<Vec<ItemId>> = (0..self.n)
            .into_par_iter()
            .map_init(
                || Scratch::new(snapshot.n),
                |scratch, x| {
                    let x = ItemId::from(x);
                    let fx = snapshot.friends(x);
                    let mut pool: Vec<ItemId> = fx.to_vec();
                    for &y in fx {
                        pool.extend_from_slice(snapshot.friends(y));
                    }
                    if include_cofriends {
                        for &u in snapshot.cofriends(x) {
                            pool.push(u);
                            pool.extend_from_slice(snapshot.friends(u));
                        }
                    }
                    scratch.top_k(x, pool.into_iter(), snapshot.k, oracle)
                },
            )
            .collect();
        let changed = lists
            .iter()
            .enumerate()
            .filter(|(x, l)| !same_set(self.friends(ItemId::from(*x)), l))
            .count();
        self.friends = lists.concat();
        self.rebuild_cofriends();
        self.t += 1;
        self.work += oracle.comparisons() - before;
        changed
    }

    /// One scheduled pointwise pass: visit points in `schedule` order, each
    /// replacing `F(x)` by the top K of `F(x) ∪ F(F(x))` using the sets as
    /// they stand at that moment.
    pub fn pointwise_pass<R: Ranking + ?Sized>(&mut self, schedule: &[ItemId], oracle: &RankingOracle<'_, R>) -> Result<usize> {
        check_permutation(schedule, self.n)?;
        let before = oracle.comparisons();
        let mut scratch = Scratch::new(self.n);
        let mut changed = 0;
        let mut pool = Vec::with_capacity(self.k * (self.k + 1));
        for &x in schedule {
            pool.clear();
            let fx = self.friends(x);
            pool.extend_from_slice(fx);
            for &y in fx {
                pool.extend_from_slice(self.friends(y));
            }
            let new = scratch.top_k(x, pool.iter().copied(), self.k, oracle);
            if !same_set(self.friends(x), &new) {
                changed += 1;
            }
            self.set_friends(x, &new);
        }
        self.rebuild_cofriends();
        self.t += 1;
        self.work += oracle.comparisons() - before;
        Ok(changed)
    }
}

fn same_set(a: &[ItemId], b: &[ItemId]) -> bool {
    a.len() == b.len() && b.iter().all(|y| a.contains(y))
}

fn check_permutation(schedule: &[ItemId], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if schedule.len() != n || schedule.iter().any(|x| x.idx() >= n || std::mem::replace(&mut seen[x.idx()], true)) {
        return Err(Error::input("schedule must be a permutation of all points"));
    }
    Ok(())
}

/// Per-worker buffers for candidate deduplication.
struct Scratch {
    stamp: Vec<u32>,
    epoch: u32,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch { stamp: vec![0; n], epoch: 0 }
    }

    /// Deduplicates `pool`, drops `x`, and returns the `k` candidates `x`
    /// prefers most, best first.
    fn top_k<R: Ranking + ?Sized>(
        &mut self,
        x: ItemId,
        pool: impl Iterator<Item = ItemId>,
        k: usize,
        oracle: &RankingOracle<'_, R>,
    ) -> Vec<ItemId> {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        self.stamp[x.idx()] = self.epoch;
        let mut cand: Vec<ItemId> = Vec::new();
        for y in pool {
            if self.stamp[y.idx()] != self.epoch {
                self.stamp[y.idx()] = self.epoch;
                cand.push(y);
            }
        }
        debug_assert!(cand.len() >= k);
        if cand.len() > k {
            cand.select_nth_unstable_by(k - 1, |&a, &b| oracle.compare(x, a, b));
            cand.truncate(k);
        }
        cand.sort_by(|&a, &b| oracle.compare(x, a, b));
        cand
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Mode {
    /// Simultaneous updates from the previous round's snapshot.
    Batch { include_cofriends: bool },
    /// Sequential passes in schedule order; identity order when `None`.
    Pointwise { schedule: Option<Vec<ItemId>> },
}

impl Default for Mode {
    fn default() -> Self {
        Mode::Batch { include_cofriends: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stop {
    /// Stop after a round that changes no friend set, or at the budget.
    #[default]
    NoChange,
    /// Always run the full budget.
    Budget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NndConfig {
    pub k: usize,
    pub mode: Mode,
    pub seed: u64,
    /// Round budget; `None` means `default_budget(n, k)`.
    pub max_rounds: Option<usize>,
    pub stop: Stop,
}

/// `⌈2 log_K n⌉`, the batch round budget (n itself when K = 1).
pub fn default_budget(n: usize, k: usize) -> usize {
    if k < 2 {
        return n;
    }
    let b = (2.0 * (n as f64).ln() / (k as f64).ln()).ceil() as usize;
    b.max(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundStat {
    pub round: usize,
    pub changed: usize,
    pub comparisons: u64,
    pub recall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NndReport {
    pub mode: Mode,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub rounds: usize,
    pub comparisons: u64,
    pub recall: Option<f64>,
    pub per_round: Vec<RoundStat>,
}

impl NndReport {
    /// First round after which recall reached 1, when tracked.
    pub fn rounds_to_exact(&self) -> Option<usize> {
        self.per_round.iter().find(|r| r.recall == Some(1.0)).map(|r| r.round)
    }
}

pub struct NndRun {
    pub graph: KnnGraph,
    pub report: NndReport,
}

/// Runs NND from a seeded random K-out start until the stop rule fires.
///
/// When `exact` is supplied, recall is recorded after every round.
pub fn run_nnd<R: Ranking + ?Sized>(
    oracle: &RankingOracle<'_, R>,
    config: &NndConfig,
    exact: Option<&KnnGraph>,
) -> Result<NndRun> {
    let n = oracle.len();
    let k = config.k;
    let mut state = FriendState::init_random_kout(n, k, config.seed)?;
    let budget = config.max_rounds.unwrap_or_else(|| default_budget(n, k));
    let schedule: Vec<ItemId> = match &config.mode {
        Mode::Pointwise { schedule: Some(s) } => {
            check_permutation(s, n)?;
            s.clone()
        }
        _ => (0..n).map(ItemId::from).collect(),
    };
    let mut per_round = Vec::new();
    for round in 1..=budget {
        let changed = match &config.mode {
            Mode::Batch { include_cofriends } => state.batch_round(oracle, *include_cofriends),
            Mode::Pointwise { .. } => state.pointwise_pass(&schedule, oracle)?,
        };
        let recall = exact.map(|e| recall(&state.to_graph(), e)).transpose()?;
        per_round.push(RoundStat { round, changed, comparisons: state.work(), recall });
        if changed == 0 && config.stop == Stop::NoChange {
            break;
        }
    }
    let graph = state.to_graph();
    let final_recall = exact.map(|e| recall(&graph, e)).transpose()?;
    Ok(NndRun {
        report: NndReport {
            mode: config.mode.clone(),
            n,
            k,
            seed: config.seed,
            rounds: per_round.len(),
            comparisons: state.work(),
            recall: final_recall,
            per_round,
        },
        graph,
    })
}
