use serde::{Deserialize, Serialize};

use super::ResidueRing;
use crate::error::{Error, Result};

/// Dense matrix over Z/p^k. Maps act on row vectors: `v -> v * A`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MatrixR {
    pub ring: ResidueRing,
    pub rows: usize,
    pub cols: usize,
    data: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    p: u64,
    k: u32,
    rows: usize,
    cols: usize,
    entries: Vec<Vec<u64>>,
}

impl Serialize for MatrixR {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson {
            p: self.ring.p(),
            k: self.ring.k(),
            rows: self.rows,
            cols: self.cols,
            entries: self.row_vecs(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatrixR {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = MatrixJson::deserialize(d)?;
        let ring = ResidueRing::new(j.p, j.k).map_err(D::Error::custom)?;
        if j.entries.len() != j.rows || j.entries.iter().any(|r| r.len() != j.cols) {
            return Err(D::Error::custom("entries do not match rows/cols"));
        }
        if j.entries.iter().flatten().any(|&x| x >= ring.modulus()) {
            return Err(D::Error::custom("entry out of range"));
        }
        Ok(MatrixR::from_rows(ring, j.cols, &j.entries))
    }
}

impl MatrixR {
    pub fn zeros(ring: ResidueRing, rows: usize, cols: usize) -> Self {
        MatrixR { ring, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(ring: ResidueRing, n: usize) -> Self {
        let mut m = Self::zeros(ring, n, n);
        for i in 0..n {
            m[(i, i)] = 1 % ring.modulus();
        }
        m
    }

    /// Builds from rows; entries are reduced mod p^k.
    pub fn from_rows(ring: ResidueRing, cols: usize, rows: &[Vec<u64>]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "row length");
            data.extend(r.iter().map(|&x| x % ring.modulus()));
        }
        MatrixR { ring, rows: rows.len(), cols, data }
    }

    pub fn from_i64(ring: ResidueRing, rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows: Vec<Vec<u64>> =
            rows.iter().map(|r| r.iter().map(|&x| ring.reduce(x)).collect()).collect();
        Self::from_rows(ring, cols, &rows)
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn col(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.ring, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &MatrixR) -> Result<MatrixR> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let r = self.ring;
        let mut out = Self::zeros(r, self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = r.add(out[(i, j)], r.mul(a, other[(l, j)]));
                }
            }
        }
        Ok(out)
    }

    /// `v * A` for a row vector `v`.
    pub fn apply(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.rows, "vector length");
        let r = self.ring;
        let mut out = vec![0; self.cols];
        for (i, &a) in v.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o = r.add(*o, r.mul(a, self[(i, j)]));
            }
        }
        out
    }

    pub fn scale(&self, c: u64) -> Self {
        let mut m = self.clone();
        for x in m.data.iter_mut() {
            *x = self.ring.mul(*x, c);
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    /// Stacks `self` over `other`.
    pub fn vstack(&self, other: &MatrixR) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        MatrixR { ring: self.ring, rows: self.rows + other.rows, cols: self.cols, data }
    }

    /// Places `other` to the right of `self`.
    pub fn hstack(&self, other: &MatrixR) -> Self {
        assert_eq!(self.rows, other.rows);
        let mut m = Self::zeros(self.ring, self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            m.row_mut(i)[..self.cols].copy_from_slice(self.row(i));
            m.row_mut(i)[self.cols..].copy_from_slice(other.row(i));
        }
        m
    }

    pub fn select_cols(&self, cols: &[usize]) -> Self {
        let mut m = Self::zeros(self.ring, self.rows, cols.len());
        for i in 0..self.rows {
            for (jj, &j) in cols.iter().enumerate() {
                m[(i, jj)] = self[(i, j)];
            }
        }
        m
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let v: Vec<Vec<u64>> = rows.iter().map(|&i| self.row(i).to_vec()).collect();
        Self::from_rows(self.ring, self.cols, &v)
    }

    /// Reinterprets the entries in the ring `target`, reducing mod its modulus.
    pub fn reduce_to(&self, target: ResidueRing) -> Self {
        Self::from_rows(target, self.cols, &self.row_vecs())
    }

    /// Determinant of a square matrix by expansion over column subsets.
    pub fn det(&self) -> u64 {
        assert_eq!(self.rows, self.cols, "det of non-square matrix");
        let rows: Vec<usize> = (0..self.rows).collect();
        let cols: Vec<usize> = (0..self.cols).collect();
        self.minor(&rows, &cols)
    }

    /// Determinant of the submatrix on the given rows and columns.
    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> u64 {
        let n = rows.len();
        assert_eq!(n, cols.len());
        let r = self.ring;
        if n == 0 {
            return 1 % r.modulus();
        }
        // dp[mask]: determinant of rows[0..|mask|] against the columns in mask
        let mut dp = vec![0u64; 1 << n];
        dp[0] = 1 % r.modulus();
        for mask in 1usize..(1 << n) {
            let i = mask.count_ones() as usize - 1;
            let mut acc = 0;
            for j in 0..n {
                if mask & (1 << j) == 0 {
                    continue;
                }
                let a = self[(rows[i], cols[j])];
                if a != 0 && dp[mask ^ (1 << j)] != 0 {
                    // sign from the number of chosen columns after j
                    let after = (mask >> (j + 1)).count_ones() as usize;
                    let t = r.mul(a, dp[mask ^ (1 << j)]);
                    acc = if after.is_multiple_of(2) { r.add(acc, t) } else { r.sub(acc, t) };
                }
            }
            dp[mask] = acc;
        }
        dp[(1 << n) - 1]
    }
}

impl std::ops::Index<(usize, usize)> for MatrixR {
    type Output = u64;
    fn index(&self, (i, j): (usize, usize)) -> &u64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for MatrixR {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut u64 {
        &mut self.data[i * self.cols + j]
    }
}

/// `y += c * x` over the ring.
pub fn axpy(ring: &ResidueRing, y: &mut [u64], c: u64, x: &[u64]) {
    if c == 0 {
        return;
    }
    for (a, &b) in y.iter_mut().zip(x) {
        *a = ring.add(*a, ring.mul(c, b));
    }
}

pub fn scale_vec(ring: &ResidueRing, v: &mut [u64], c: u64) {
    for a in v.iter_mut() {
        *a = ring.mul(*a, c);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leibniz(m: &MatrixR) -> u64 {
        fn perms(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = vec![];
            for p in perms(n - 1) {
                for pos in 0..n {
                    let mut q = p.clone();
                    q.insert(pos, n - 1);
                    out.push(q);
                }
            }
            out
        }
        let r = m.ring;
        let mut acc = 0;
        for p in perms(m.rows) {
            let inv = (0..p.len())
                .flat_map(|i| (i + 1..p.len()).map(move |j| (i, j)))
                .filter(|&(i, j)| p[i] > p[j])
                .count();
            let t = (0..p.len()).fold(1, |t, i| r.mul(t, m[(i, p[i])]));
            acc = if inv % 2 == 0 { r.add(acc, t) } else { r.sub(acc, t) };
        }
        acc
    }

    #[test]
    fn det_matches_leibniz() {
        use rand::{Rng, SeedableRng};
        let r = ResidueRing::new(3, 2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in 0..=5 {
            for _ in 0..20 {
                let rows: Vec<Vec<u64>> =
                    (0..n).map(|_| (0..n).map(|_| rng.gen_range(0..9)).collect()).collect();
                let m = MatrixR::from_rows(r, n, &rows);
                assert_eq!(m.det(), leibniz(&m));
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let r = ResidueRing::new(5, 2).unwrap();
        let m = MatrixR::from_i64(r, &[vec![1, -1, 7], vec![0, 30, 24]]);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"p":5,"k":2,"rows":2,"cols":3,"entries":[[1,24,7],[0,5,24]]}"#);
        let back: MatrixR = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<MatrixR>(r#"{"p":5,"k":2,"rows":1,"cols":1,"entries":[[25]]}"#).is_err());
    }
}
