use super::{MatrixR, ResidueRing};

/// Smith form computed directly over Z/p^k by minimal-valuation pivoting.
///
/// `U * A * V = D` for some invertible `U`; only the column transform `V` and its inverse
/// `W` are tracked. `diag[i]` is the valuation of the i-th diagonal entry (`k` for zero), for
/// `i < min(rows, cols)`; the valuations are nondecreasing.
#[derive(Clone, Debug)]
pub struct Smith {
    pub diag: Vec<u32>,
    pub v: MatrixR,
    pub w: MatrixR,
}

pub fn smith(a: &MatrixR) -> Smith {
    let ring = a.ring;
    let (rows, cols) = (a.rows, a.cols);
    let mut m = a.clone();
    let mut v = MatrixR::identity(ring, cols);
    let mut w = MatrixR::identity(ring, cols);
    let mut diag = Vec::new();
    for s in 0..rows.min(cols) {
        let mut best: Option<(usize, usize, u32)> = None;
        for i in s..rows {
            for j in s..cols {
                let val = ring.val(m[(i, j)]);
                if val < ring.k() && best.is_none_or(|b| val < b.2) {
                    best = Some((i, j, val));
                }
            }
        }
        let Some((bi, bj, a)) = best else {
            diag.extend(std::iter::repeat_n(ring.k(), rows.min(cols) - s));
            break;
        };
        swap_rows(&mut m, s, bi);
        swap_cols(&mut m, s, bj);
        swap_cols(&mut v, s, bj);
        swap_rows(&mut w, s, bj);
        // scale column s so the pivot is exactly p^a
        let u = ring.unit_part(m[(s, s)]);
        let uinv = ring.inv(u).unwrap();
        scale_col(&ring, &mut m, s, uinv);
        scale_col(&ring, &mut v, s, uinv);
        scale_row(&ring, &mut w, s, u);
        let piv = m[(s, s)];
        for i in s + 1..rows {
            if m[(i, s)] != 0 {
                let t = ring.neg(ring.div(m[(i, s)], piv).unwrap());
                for j in s..cols {
                    let x = ring.mul(t, m[(s, j)]);
                    m[(i, j)] = ring.add(m[(i, j)], x);
                }
            }
        }
        for j in s + 1..cols {
            if m[(s, j)] != 0 {
                let t = ring.div(m[(s, j)], piv).unwrap();
                // col_j -= t col_s; W: row_s += t row_j
                for i in 0..rows {
                    let x = ring.mul(t, m[(i, s)]);
                    m[(i, j)] = ring.sub(m[(i, j)], x);
                }
                for i in 0..cols {
                    let x = ring.mul(t, v[(i, s)]);
                    v[(i, j)] = ring.sub(v[(i, j)], x);
                }
                for l in 0..cols {
                    let x = ring.mul(t, w[(j, l)]);
                    w[(s, l)] = ring.add(w[(s, l)], x);
                }
            }
        }
        diag.push(a);
    }
    Smith { diag, v, w }
}

/// Exponents `e_i` with R^cols / rowspan(a) = sum of R/p^{e_i}, one per column (0 = trivial).
pub fn cokernel_exponents(a: &MatrixR) -> Vec<u32> {
    let s = smith(a);
    let mut out: Vec<u32> = s.diag.clone();
    out.resize(a.cols, a.ring.k());
    out
}

fn swap_rows(m: &mut MatrixR, a: usize, b: usize) {
    if a != b {
        for j in 0..m.cols {
            let t = m[(a, j)];
            m[(a, j)] = m[(b, j)];
            m[(b, j)] = t;
        }
    }
}

fn swap_cols(m: &mut MatrixR, a: usize, b: usize) {
    if a != b {
        for i in 0..m.rows {
            let t = m[(i, a)];
            m[(i, a)] = m[(i, b)];
            m[(i, b)] = t;
        }
    }
}

fn scale_col(r: &ResidueRing, m: &mut MatrixR, j: usize, c: u64) {
    for i in 0..m.rows {
        m[(i, j)] = r.mul(m[(i, j)], c);
    }
}

fn scale_row(r: &ResidueRing, m: &mut MatrixR, i: usize, c: u64) {
    for j in 0..m.cols {
        m[(i, j)] = r.mul(m[(i, j)], c);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring_linalg::Submodule;
    use rand::{Rng, SeedableRng};

    /// Invariant factors of R^n / S read off from |M[p^j]| for every j.
    fn brute_exponents(ring: ResidueRing, a: &MatrixR) -> Vec<u32> {
        let sub = Submodule::from_generators(a);
        let all = Submodule::full(ring, a.cols).enumerate();
        let span = sub.enumerate().len() as f64;
        let p = ring.p() as f64;
        let mut counts = vec![0u32];
        for j in 1..=ring.k() {
            let pj = ring.pow_p(j);
            let n = all
                .iter()
                .filter(|x| sub.contains(&x.iter().map(|&c| ring.mul(c, pj)).collect::<Vec<_>>()))
                .count() as f64;
            counts.push((n / span).log(p).round() as u32);
        }
        // number of factors with exponent >= j is counts[j] - counts[j-1]
        let mut out = vec![];
        for j in 1..=ring.k() as usize {
            let ge_j = counts[j] - counts[j - 1];
            let ge_next = if j < ring.k() as usize { counts[j + 1] - counts[j] } else { 0 };
            out.extend(std::iter::repeat_n(j as u32, (ge_j - ge_next) as usize));
        }
        out.sort();
        out
    }

    #[test]
    fn exponents_match_torsion_counts() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for (p, k) in [(3, 2), (2, 3), (2, 2), (5, 2)] {
            let ring = ResidueRing::new(p, k).unwrap();
            for _ in 0..30 {
                let rows = rng.gen_range(1..4);
                let v: Vec<Vec<u64>> = (0..rows)
                    .map(|_| (0..3).map(|_| ring.mul(rng.gen_range(0..ring.modulus()), p.pow(rng.gen_range(0..k)))).collect())
                    .collect();
                let a = MatrixR::from_rows(ring, 3, &v);
                let mut got: Vec<u32> = cokernel_exponents(&a).into_iter().filter(|&e| e > 0).collect();
                got.sort();
                assert_eq!(got, brute_exponents(ring, &a), "{a:?}");
            }
        }
    }

    #[test]
    fn transforms_are_inverse_and_diagonalize() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let ring = ResidueRing::new(3, 3).unwrap();
        for _ in 0..30 {
            let v: Vec<Vec<u64>> =
                (0..3).map(|_| (0..4).map(|_| ring.mul(rng.gen_range(0..27), 3)).collect()).collect();
            let a = MatrixR::from_rows(ring, 4, &v);
            let s = smith(&a);
            assert_eq!(s.v.mul(&s.w).unwrap(), MatrixR::identity(ring, 4));
            // row span of A*V is the span of p^{d_i} e_i
            let av = Submodule::from_generators(&a.mul(&s.v).unwrap());
            let mut exps = s.diag.clone();
            exps.resize(4, ring.k());
            assert_eq!(av, Submodule::diagonal(ring, &exps));
        }
    }
}
