use std::io::Write;

use super::concord::Crs;
use super::pair::{LinearOrder, PairId};
use crate::error::{Error, Result};
use crate::ranking::ItemId;
use crate::rng::mix64;

/// Points of a CRS as rows of an `n x N` matrix; column `c` belongs to the
/// pair at position `c + 1` of the chosen linear extension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    n: usize,
    columns: Vec<PairId>,
    coords: Vec<f64>,
}

impl EmbeddingMatrix {
    /// Raw constructor; `coords` is row-major `n x columns.len()`.
    pub fn from_parts(n: usize, columns: Vec<PairId>, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != n * columns.len() {
            return Err(Error::input("coordinate count does not match the matrix shape"));
        }
        Ok(EmbeddingMatrix { n, columns, coords })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn columns(&self) -> &[PairId] {
        &self.columns
    }

    pub fn row(&self, x: ItemId) -> &[f64] {
        let w = self.columns.len();
        &self.coords[x.idx() * w..(x.idx() + 1) * w]
    }

    /// Entry at row `x`, column of pair `p`.
    pub fn get(&self, x: ItemId, p: PairId) -> Option<f64> {
        self.columns.iter().position(|&q| q == p).map(|c| self.row(x)[c])
    }

    /// Sup-norm distance between rows.
    pub fn distance(&self, x: ItemId, y: ItemId) -> f64 {
        self.row(x).iter().zip(self.row(y)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        EmbeddingMatrix { coords: self.coords.iter().map(|v| v * factor).collect(), ..self.clone() }
    }

    pub fn with_rows_swapped(&self, a: ItemId, b: ItemId) -> Self {
        let mut out = self.clone();
        let w = self.columns.len();
        for c in 0..w {
            out.coords.swap(a.idx() * w + c, b.idx() * w + c);
        }
        out
    }

    /// Header `point,<pair>...` then one row per point.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["point".to_string()];
        header.extend(self.columns.iter().map(PairId::to_string));
        wtr.write_record(&header)?;
        for x in 0..self.n {
            let mut rec = vec![x.to_string()];
            rec.extend(self.row(ItemId::from(x)).iter().map(|v| v.to_string()));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Embeds a CRS in l-infinity so that sup-norm distances reproduce its
/// rankings. The linear extension comes from a seed-keyed topological sort.
pub fn linf_embed(crs: &Crs, seed: u64) -> Result<EmbeddingMatrix> {
    let dag = crs.require_dag()?;
    let ext = dag.linear_extension(|v| mix64(seed ^ mix64(v as u64)));
    linf_embed_with_extension(crs, &ext)
}

/// Embedding from an explicit linear extension. Within each pair the
/// lower-indexed point gets the positive entry.
pub fn linf_embed_with_extension(crs: &Crs, ext: &LinearOrder) -> Result<EmbeddingMatrix> {
    let dag = crs.require_dag()?;
    let n = crs.n();
    if ext.n() != n || !dag.is_extended_by(ext) {
        return Err(Error::input("supplied order is not a linear extension of the order type"));
    }
    let big_n = ext.len();
    let mut coords = vec![0.0; n * big_n];
    for (c, p) in ext.pairs().iter().enumerate() {
        let v = 1.0 + (c + 1) as f64 / big_n as f64;
        coords[p.i().idx() * big_n + c] = v;
        coords[p.j().idx() * big_n + c] = -v;
    }
    EmbeddingMatrix::from_parts(n, ext.pairs().to_vec(), coords)
}

/// True iff, for every `x`, sup-norm distances from `x` strictly increase
/// along `x`'s ranking.
pub fn verify_embedding(crs: &Crs, emb: &EmbeddingMatrix) -> bool {
    if emb.n() != crs.n() {
        return false;
    }
    let table = crs.table();
    (0..crs.n()).all(|x| {
        let x = ItemId::from(x);
        let d: Vec<f64> = table.order(x).into_iter().map(|y| emb.distance(x, y)).collect();
        d.windows(2).all(|w| w[0] < w[1])
    })
}
