use std::collections::HashSet;

use super::matrix::{axpy, scale_vec};
use super::{MatrixR, ResidueRing};

fn is_zero(v: &[u64]) -> bool {
    v.iter().all(|&x| x == 0)
}

/// Howell form of the row span of `m`: the canonical generating set of the row module.
///
/// Rows have strictly increasing pivot columns, pivots are powers of p, entries above a
/// pivot `p^a` are reduced into `0..p^a`, and for every column `c` the rows with pivot at or
/// after `c` span all elements of the module vanishing before `c`.
pub fn howell_form(m: &MatrixR) -> MatrixR {
    let ring = m.ring;
    let n = m.cols;
    let mut pending: Vec<Vec<u64>> =
        (0..m.rows).map(|i| m.row(i).to_vec()).filter(|r| !is_zero(r)).collect();
    let mut out: Vec<(usize, Vec<u64>)> = Vec::new();
    for c in 0..n {
        let mut best: Option<(usize, u32)> = None;
        for (i, row) in pending.iter().enumerate() {
            let v = ring.val(row[c]);
            if v < ring.k() && best.is_none_or(|(_, bv)| v < bv) {
                best = Some((i, v));
            }
        }
        let Some((bi, a)) = best else { continue };
        let mut piv = pending.remove(bi);
        let u = ring.inv(ring.unit_part(piv[c])).expect("unit part is invertible");
        scale_vec(&ring, &mut piv, u);
        let pa = piv[c];
        for row in pending.iter_mut() {
            if row[c] != 0 {
                let t = ring.div(row[c], pa).expect("pivot has minimal valuation");
                axpy(&ring, row, ring.neg(t), &piv);
            }
        }
        if a > 0 {
            let mut extra = piv.clone();
            scale_vec(&ring, &mut extra, ring.pow_p(ring.k() - a));
            if !is_zero(&extra) {
                pending.push(extra);
            }
        }
        pending.retain(|r| !is_zero(r));
        out.push((c, piv));
    }
    for i in 0..out.len() {
        let (c, ref piv) = out[i];
        let pa = piv[c];
        let piv = piv.clone();
        for (_, row) in out.iter_mut().take(i) {
            let quo = row[c] / pa;
            if quo > 0 {
                axpy(&ring, row, ring.neg(quo % ring.modulus()), &piv);
            }
        }
    }
    let rows: Vec<Vec<u64>> = out.into_iter().map(|(_, r)| r).collect();
    MatrixR::from_rows(ring, n, &rows)
}

fn pivot_col(row: &[u64]) -> Option<usize> {
    row.iter().position(|&x| x != 0)
}

/// A submodule of R^n stored by its Howell basis, so equality is structural.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Submodule {
    basis: MatrixR,
}

impl Submodule {
    pub fn from_generators(gens: &MatrixR) -> Self {
        Submodule { basis: howell_form(gens) }
    }

    pub fn from_rows(ring: ResidueRing, n: usize, rows: &[Vec<u64>]) -> Self {
        Self::from_generators(&MatrixR::from_rows(ring, n, rows))
    }

    pub fn zero(ring: ResidueRing, n: usize) -> Self {
        Submodule { basis: MatrixR::zeros(ring, 0, n) }
    }

    pub fn full(ring: ResidueRing, n: usize) -> Self {
        Submodule { basis: MatrixR::identity(ring, n) }
    }

    /// `p^{e_i} R` in coordinate `i`.
    pub fn diagonal(ring: ResidueRing, exps: &[u32]) -> Self {
        let n = exps.len();
        let rows: Vec<Vec<u64>> = exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e < ring.k())
            .map(|(i, &e)| {
                let mut v = vec![0; n];
                v[i] = ring.pow_p(e);
                v
            })
            .collect();
        Self::from_rows(ring, n, &rows)
    }

    pub fn ring(&self) -> ResidueRing {
        self.basis.ring
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.cols
    }

    pub fn basis(&self) -> &MatrixR {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.basis.rows == 0
    }

    /// Composition length (log_p of the cardinality).
    pub fn length(&self) -> u32 {
        let r = self.ring();
        (0..self.basis.rows)
            .map(|i| {
                let row = self.basis.row(i);
                let c = pivot_col(row).expect("Howell rows are nonzero");
                r.k() - r.val(row[c])
            })
            .sum()
    }

    /// Canonical representative of `v` modulo this submodule.
    pub fn reduce(&self, v: &[u64]) -> Vec<u64> {
        let r = self.ring();
        let mut v = v.to_vec();
        for i in 0..self.basis.rows {
            let row = self.basis.row(i);
            let c = pivot_col(row).unwrap();
            let quo = v[c] / row[c];
            if quo > 0 {
                axpy(&r, &mut v, r.neg(quo % r.modulus()), row);
            }
        }
        v
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        is_zero(&self.reduce(v))
    }

    pub fn contains_sub(&self, other: &Submodule) -> bool {
        (0..other.basis.rows).all(|i| self.contains(other.basis.row(i)))
    }

    pub fn sum(&self, other: &Submodule) -> Submodule {
        Self::from_generators(&self.basis.vstack(&other.basis))
    }

    pub fn intersect(&self, other: &Submodule) -> Submodule {
        let n = self.ambient_dim();
        let zero = MatrixR::zeros(self.ring(), other.basis.rows, n);
        let top = self.basis.hstack(&self.basis);
        let bottom = other.basis.hstack(&zero);
        let h = howell_form(&top.vstack(&bottom));
        tail_block(&h, n)
    }

    /// Image of the module under `v -> v * a`.
    pub fn image(&self, a: &MatrixR) -> Submodule {
        Self::from_generators(&self.basis.mul(a).expect("dimension"))
    }

    pub fn scale(&self, c: u64) -> Submodule {
        Self::from_generators(&self.basis.scale(c))
    }

    /// All elements, for brute-force checks on tiny modules.
    pub fn enumerate(&self) -> HashSet<Vec<u64>> {
        let r = self.ring();
        let mut out = HashSet::new();
        out.insert(vec![0; self.ambient_dim()]);
        for i in 0..self.basis.rows {
            let row = self.basis.row(i).to_vec();
            let mut next = HashSet::new();
            for v in &out {
                let mut w = v.clone();
                for _ in 0..r.modulus() {
                    next.insert(w.clone());
                    axpy(&r, &mut w, 1, &row);
                }
            }
            out = next;
        }
        out
    }
}

/// Rows of a Howell form whose first `split` entries vanish, restricted to the remaining columns.
fn tail_block(h: &MatrixR, split: usize) -> Submodule {
    let rows: Vec<Vec<u64>> = (0..h.rows)
        .map(|i| h.row(i))
        .filter(|row| pivot_col(row).is_some_and(|c| c >= split))
        .map(|row| row[split..].to_vec())
        .collect();
    Submodule::from_rows(h.ring, h.cols - split, &rows)
}

/// Solves `x * A = y (mod B)` for many right-hand sides, and exposes the solution kernel.
#[derive(Clone, Debug)]
pub struct Solver {
    h: MatrixR,
    m: usize,
    n: usize,
}

impl Solver {
    /// `a` is n x m; `modulo` is a submodule of R^m (zero if `None`).
    pub fn new(a: &MatrixR, modulo: Option<&Submodule>) -> Self {
        let ring = a.ring;
        let (n, m) = (a.rows, a.cols);
        let mut aug = a.hstack(&MatrixR::identity(ring, n));
        if let Some(b) = modulo {
            assert_eq!(b.ambient_dim(), m);
            aug = aug.vstack(&b.basis().hstack(&MatrixR::zeros(ring, b.basis().rows, n)));
        }
        Solver { h: howell_form(&aug), m, n }
    }

    pub fn solve(&self, y: &[u64]) -> Option<Vec<u64>> {
        assert_eq!(y.len(), self.m);
        let r = self.h.ring;
        let mut v = y.to_vec();
        v.resize(self.m + self.n, 0);
        let mut next = 0;
        for c in 0..self.m {
            if v[c] == 0 {
                continue;
            }
            while next < self.h.rows && pivot_col(self.h.row(next)).unwrap() < c {
                next += 1;
            }
            if next >= self.h.rows {
                return None;
            }
            let row = self.h.row(next);
            if pivot_col(row).unwrap() != c {
                return None;
            }
            let t = r.div(v[c], row[c])?;
            axpy(&r, &mut v, r.neg(t), row);
        }
        Some(v[self.m..].iter().map(|&x| r.neg(x)).collect())
    }

    /// `{x : x * A in B}`.
    pub fn kernel(&self) -> Submodule {
        tail_block(&self.h, self.m)
    }
}

/// `{x in R^n : x * A in target}` for an n x m matrix `A`.
pub fn preimage(a: &MatrixR, target: Option<&Submodule>) -> Submodule {
    Solver::new(a, target).kernel()
}

pub fn kernel(a: &MatrixR) -> Submodule {
    preimage(a, None)
}
