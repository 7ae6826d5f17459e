use std::collections::VecDeque;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::pair::{LinearOrder, PairId};
use crate::error::{Error, Result};
use crate::ranking::{ItemId, RankTable};

/// Digraph on pairs with an arc `xy -> xz` whenever `z` directly follows `y`
/// in `x`'s ranking. Its reflexive-transitive closure is the order type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderTypeDag {
    n: usize,
    succ: Vec<Vec<u32>>,
}

impl OrderTypeDag {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> impl Iterator<Item = (PairId, PairId)> + '_ {
        self.succ.iter().enumerate().flat_map(move |(a, s)| {
            s.iter().map(move |&b| (PairId::from_index(a, self.n), PairId::from_index(b as usize, self.n)))
        })
    }

    pub fn arc_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    /// `a ≼ b` in the order type (reflexive).
    pub fn precedes(&self, a: PairId, b: PairId) -> bool {
        let (src, dst) = (a.index(self.n), b.index(self.n));
        if src == dst {
            return true;
        }
        let mut seen = vec![false; self.succ.len()];
        let mut stack = vec![src];
        seen[src] = true;
        while let Some(u) = stack.pop() {
            for &v in &self.succ[u] {
                let v = v as usize;
                if v == dst {
                    return true;
                }
                if !std::mem::replace(&mut seen[v], true) {
                    stack.push(v);
                }
            }
        }
        false
    }

    /// A linear extension: Kahn's algorithm, ties broken by the smallest
    /// `key(pair index)`.
    pub fn linear_extension<K: Ord>(&self, key: impl Fn(usize) -> K) -> LinearOrder {
        use std::cmp::Reverse;
        use std::collections::BinaryHeap;
        let mut indeg = self.in_degrees();
        let mut heap: BinaryHeap<Reverse<(K, usize)>> =
            (0..indeg.len()).filter(|&v| indeg[v] == 0).map(|v| Reverse((key(v), v))).collect();
        let mut pairs = Vec::with_capacity(indeg.len());
        while let Some(Reverse((_, u))) = heap.pop() {
            pairs.push(PairId::from_index(u, self.n));
            for &v in &self.succ[u] {
                let v = v as usize;
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    heap.push(Reverse((key(v), v)));
                }
            }
        }
        LinearOrder::from_pairs(self.n, pairs).expect("order type digraph is acyclic")
    }

    /// True when every arc goes forward in `order`.
    pub fn is_extended_by(&self, order: &LinearOrder) -> bool {
        order.n() == self.n && self.arcs().all(|(a, b)| order.sigma(a) < order.sigma(b))
    }

    fn in_degrees(&self) -> Vec<u32> {
        let mut indeg = vec![0u32; self.succ.len()];
        for s in &self.succ {
            for &v in s {
                indeg[v as usize] += 1;
            }
        }
        indeg
    }
}

/// Proof of concordancy or of its failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    Dag(OrderTypeDag),
    /// Directed cycle `p_0 -> p_1 -> ... -> p_0` in the consecutive-pair digraph.
    Cycle(Vec<PairId>),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum CertificateJson {
    Dag { n: usize, arcs: Vec<(PairId, PairId)> },
    Cycle { n: usize, cycle: Vec<PairId> },
}

/// A ranking system together with its concordancy certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Crs {
    table: RankTable,
    certificate: Certificate,
}

impl Crs {
    pub fn table(&self) -> &RankTable {
        &self.table
    }

    pub fn n(&self) -> usize {
        self.table.n()
    }

    pub fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    pub fn is_concordant(&self) -> bool {
        matches!(self.certificate, Certificate::Dag(_))
    }

    pub fn dag(&self) -> Option<&OrderTypeDag> {
        match &self.certificate {
            Certificate::Dag(d) => Some(d),
            Certificate::Cycle(_) => None,
        }
    }

    /// The order type digraph, or the cycle witness as an error.
    pub fn require_dag(&self) -> Result<&OrderTypeDag> {
        match &self.certificate {
            Certificate::Dag(d) => Ok(d),
            Certificate::Cycle(c) => Err(Error::NotConcordant { cycle: c.clone() }),
        }
    }

    pub fn into_table(self) -> RankTable {
        self.table
    }

    pub fn write_certificate_json<W: Write>(&self, w: W) -> Result<()> {
        let n = self.n();
        let doc = match &self.certificate {
            Certificate::Dag(d) => CertificateJson::Dag { n, arcs: d.arcs().collect() },
            Certificate::Cycle(c) => CertificateJson::Cycle { n, cycle: c.clone() },
        };
        serde_json::to_writer_pretty(w, &doc)?;
        Ok(())
    }
}

/// The ranking system `r_x(y) = |{z : xz ≼ xy}|` read off a linear order.
pub fn phi_table(order: &LinearOrder) -> RankTable {
    let n = order.n();
    let mut ranks = vec![0u32; n * n];
    let mut count = vec![0u32; n];
    for p in order.pairs() {
        let (a, b) = (p.i().idx(), p.j().idx());
        count[a] += 1;
        ranks[a * n + b] = count[a];
        count[b] += 1;
        ranks[b * n + a] = count[b];
    }
    RankTable::from_raw(n, ranks)
}

/// `φ`: the CRS induced by a linear order on pairs.
pub fn phi(order: &LinearOrder) -> Crs {
    let crs = concordancy_check(&phi_table(order));
    debug_assert!(crs.is_concordant());
    crs
}

/// Builds the consecutive-pair digraph of `table` and either certifies it
/// acyclic or extracts a directed cycle.
pub fn concordancy_check(table: &RankTable) -> Crs {
    let n = table.n();
    let big_n = PairId::count(n);
    let mut succ: Vec<Vec<u32>> = vec![Vec::new(); big_n];
    let mut pred: Vec<Vec<u32>> = vec![Vec::new(); big_n];
    for x in 0..n {
        let x = ItemId::from(x);
        let order = table.order(x);
        for w in order.windows(2) {
            let a = PairId::of(x.idx(), w[0].idx()).index(n);
            let b = PairId::of(x.idx(), w[1].idx()).index(n);
            succ[a].push(b as u32);
            pred[b].push(a as u32);
        }
    }
    let mut indeg: Vec<usize> = pred.iter().map(Vec::len).collect();
    let mut queue: VecDeque<usize> = (0..big_n).filter(|&v| indeg[v] == 0).collect();
    let mut removed = vec![false; big_n];
    while let Some(u) = queue.pop_front() {
        removed[u] = true;
        for &v in &succ[u] {
            let v = v as usize;
            indeg[v] -= 1;
            if indeg[v] == 0 {
                queue.push_back(v);
            }
        }
    }
    let certificate = match (0..big_n).find(|&v| !removed[v]) {
        None => Certificate::Dag(OrderTypeDag { n, succ }),
        Some(start) => Certificate::Cycle(backward_cycle(start, &pred, &removed, n)),
    };
    Crs { table: table.clone(), certificate }
}

// Every node left after Kahn has a surviving predecessor, so walking
// backwards must revisit a node.
fn backward_cycle(start: usize, pred: &[Vec<u32>], removed: &[bool], n: usize) -> Vec<PairId> {
    let mut pos_in_walk = vec![usize::MAX; pred.len()];
    let mut walk = Vec::new();
    let mut u = start;
    while pos_in_walk[u] == usize::MAX {
        pos_in_walk[u] = walk.len();
        walk.push(u);
        u = pred[u].iter().map(|&p| p as usize).find(|&p| !removed[p]).expect("surviving node has a surviving predecessor");
    }
    let mut cycle: Vec<PairId> = walk[pos_in_walk[u]..].iter().map(|&v| PairId::from_index(v, n)).collect();
    cycle.reverse();
    cycle
}
