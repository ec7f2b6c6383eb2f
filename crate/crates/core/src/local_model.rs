//! Local theory at a prime from a Frobenius matrix acting on column vectors of `T = R^d`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::invert;
use crate::ring_linalg::{kernel, DiagModule, MatrixR, ModuleMap, ResidueRing, Submodule, Subquotient};

/// Polynomial over Z/p^k, coefficients in increasing degree.
pub type Poly = Vec<u64>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrobeniusModule {
    pub frobenius: MatrixR,
    /// Order of the tame quotient at the prime, as an integer.
    pub ram_exp: u64,
}

fn poly_mul(r: &ResidueRing, a: &[u64], b: &[u64]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = r.add(out[i + j], r.mul(x, y));
        }
    }
    out
}

fn poly_add(r: &ResidueRing, a: &[u64], b: &[u64], negate_b: bool) -> Poly {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            if negate_b {
                r.sub(x, y)
            } else {
                r.add(x, y)
            }
        })
        .collect()
}

pub fn poly_trim(mut p: Poly) -> Poly {
    while p.last() == Some(&0) {
        p.pop();
    }
    p
}

/// `p(A)` for a square matrix `A`.
pub fn poly_eval_matrix(p: &[u64], a: &MatrixR) -> MatrixR {
    let ring = a.ring;
    let mut acc = MatrixR::zeros(ring, a.rows, a.cols);
    for &c in p.iter().rev() {
        acc = acc.mul(a).unwrap();
        for i in 0..a.rows {
            acc[(i, i)] = ring.add(acc[(i, i)], c);
        }
    }
    acc
}

impl FrobeniusModule {
    pub fn new(frobenius: MatrixR, ram_exp: u64) -> Result<Self> {
        if frobenius.rows != frobenius.cols {
            return Err(Error::Dimension("Frobenius must be square".into()));
        }
        if !frobenius.ring.is_unit(frobenius.det()) {
            return Err(Error::Input("Frobenius is not invertible".into()));
        }
        Ok(FrobeniusModule { frobenius, ram_exp })
    }

    pub fn ring(&self) -> ResidueRing {
        self.frobenius.ring
    }

    pub fn rank(&self) -> usize {
        self.frobenius.rows
    }

    /// Frobenius as a map on row vectors.
    fn action(&self) -> MatrixR {
        self.frobenius.transpose()
    }

    fn fr_minus_one(&self) -> MatrixR {
        let ring = self.ring();
        let mut m = self.action();
        for i in 0..self.rank() {
            m[(i, i)] = ring.sub(m[(i, i)], 1);
        }
        m
    }

    /// `det(1 - Fr x)`, by expansion over column subsets with polynomial entries.
    pub fn char_poly(&self) -> Poly {
        let ring = self.ring();
        let d = self.rank();
        let entry = |i: usize, j: usize| -> Poly {
            let c = ring.neg(self.frobenius[(i, j)]);
            if i == j {
                vec![1, c]
            } else {
                vec![0, c]
            }
        };
        let mut dp: Vec<Poly> = vec![vec![]; 1 << d];
        dp[0] = vec![1 % ring.modulus()];
        for mask in 1usize..(1 << d) {
            let i = mask.count_ones() as usize - 1;
            let mut acc: Poly = vec![];
            for j in 0..d {
                if mask & (1 << j) == 0 {
                    continue;
                }
                let after = (mask >> (j + 1)).count_ones();
                let term = poly_mul(&ring, &entry(i, j), &dp[mask ^ (1 << j)]);
                acc = poly_add(&ring, &acc, &term, after % 2 == 1);
            }
            dp[mask] = acc;
        }
        let mut p = dp[(1 << d) - 1].clone();
        p.resize(d + 1, 0);
        p
    }

    /// `P(x) = det(1 - Fr x)` and `Q` with `(x - 1) Q = P`.
    pub fn char_poly_split(&self) -> Result<(Poly, Poly)> {
        let ring = self.ring();
        let p = self.char_poly();
        let p1 = p.iter().fold(0, |a, &c| ring.add(a, c));
        if p1 != 0 {
            return Err(Error::Input("det(1 - Fr) is not zero: prime not eligible".into()));
        }
        let d = p.len() - 1;
        let mut q = vec![0; d];
        let mut carry = 0;
        for i in (1..=d).rev() {
            carry = ring.add(carry, p[i]);
            q[i - 1] = carry;
        }
        Ok((p, q))
    }

    /// `H_f = T / (Fr - 1) T`.
    pub fn finite_part(&self) -> Subquotient {
        let ring = self.ring();
        Subquotient::new(&MatrixR::identity(ring, self.rank()), &Submodule::from_generators(&self.fr_minus_one()))
    }

    /// `T^{Fr = 1}`, standing in for `H_tr (x) G`.
    pub fn fixed_part(&self) -> Subquotient {
        let ring = self.ring();
        let ker = kernel(&self.fr_minus_one());
        Subquotient::new(ker.basis(), &Submodule::zero(ring, self.rank()))
    }

    /// The map `H_f -> T^{Fr=1}` induced by `Q(Fr^{-1})`.
    pub fn finite_singular_map(&self) -> Result<ModuleMap> {
        let (_, q) = self.char_poly_split()?;
        let finv = invert(&self.action()).expect("Frobenius invertible");
        let qf = poly_eval_matrix(&q, &finv);
        let hf = self.finite_part();
        let fixed = self.fixed_part();
        let mut rows = Vec::new();
        for i in 0..hf.gens.rows {
            let y = qf.apply(hf.gens.row(i));
            let c = fixed
                .coords(&y)
                .ok_or_else(|| Error::Input("Q(Fr^-1) T is not Frobenius-fixed".into()))?;
            rows.push(c);
        }
        // Q(Fr^{-1}) must kill (Fr - 1) T for the map to descend
        let fm1 = self.fr_minus_one();
        if !fm1.mul(&qf)?.is_zero() {
            return Err(Error::Input("Q(Fr^-1) does not kill (Fr - 1) T".into()));
        }
        let cod = fixed.module.clone();
        ModuleMap::new(hf.module.clone(), cod.clone(), MatrixR::from_rows(self.ring(), cod.dim(), &rows))
    }

    /// Exponent `j` of `I_q = m^j` (`k` means zero, `0` means the full ring).
    pub fn i_q_exponent(&self) -> u32 {
        let ring = self.ring();
        let ram_val = ring.val(self.ram_exp % ring.modulus());
        let rel = Submodule::from_generators(&self.fr_minus_one());
        for j in (1..=ring.k()).rev() {
            if ram_val < j {
                continue;
            }
            let with_pj = rel.sum(&Submodule::full(ring, self.rank()).scale(ring.pow_p(j)));
            let q = Subquotient::new(&MatrixR::identity(ring, self.rank()), &with_pj);
            if q.module == DiagModule::new(ring, vec![j]) {
                return j;
            }
        }
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u64, k: u32) -> ResidueRing {
        ResidueRing::new(p, k).unwrap()
    }

    #[test]
    fn rank_one_identity() {
        let r = ring(3, 2);
        let fm = FrobeniusModule::new(MatrixR::identity(r, 1), 9).unwrap();
        let (p, q) = fm.char_poly_split().unwrap();
        assert_eq!(p, vec![1, 8]);
        assert_eq!(q, vec![8]);
        let f = fm.finite_singular_map().unwrap();
        assert!(f.is_iso());
        assert_eq!(f.mat[(0, 0)], 8);
        assert_eq!(fm.i_q_exponent(), 2);
    }

    #[test]
    fn unipotent_block() {
        let r = ring(3, 2);
        let fm = FrobeniusModule::new(MatrixR::from_i64(r, &[vec![1, 1], vec![0, 1]]), 1).unwrap();
        let (p, q) = fm.char_poly_split().unwrap();
        assert_eq!(p, vec![1, r.reduce(-2), 1]);
        assert_eq!(q, vec![r.reduce(-1), 1]);
        let f = fm.finite_singular_map().unwrap();
        assert!(f.is_iso());
        // class of (0,1) goes to -(1,0)
        let hf = fm.finite_part();
        let fixed = fm.fixed_part();
        let cls = hf.coords(&[0, 1]).unwrap();
        assert_eq!(fixed.lift(&f.apply(&cls)), vec![8, 0]);
    }

    #[test]
    fn diagonal_with_unit() {
        let r = ring(5, 2);
        let u: u64 = 7;
        let fm = FrobeniusModule::new(MatrixR::from_i64(r, &[vec![1, 0], vec![0, u as i64]]), 25).unwrap();
        let (p, q) = fm.char_poly_split().unwrap();
        // (1 - x)(1 - u x) and -(1 - u x)
        assert_eq!(p, poly_mul(&r, &[1, r.reduce(-1)], &[1, r.reduce(-(u as i64))]));
        assert_eq!(q, vec![r.reduce(-1), u]);
    }

    #[test]
    fn identity_rank_two_is_not_eligible_for_iso() {
        let r = ring(3, 2);
        let fm = FrobeniusModule::new(MatrixR::identity(r, 2), 9).unwrap();
        let f = fm.finite_singular_map().unwrap();
        assert_eq!(f.dom.exps, vec![2, 2]);
        assert!(!f.is_iso());
        assert_eq!(fm.i_q_exponent(), 0);
    }

    #[test]
    fn i_q_limited_by_ramification() {
        let r = ring(3, 2);
        let fm = FrobeniusModule::new(MatrixR::identity(r, 1), 3).unwrap();
        assert_eq!(fm.i_q_exponent(), 1);
        let fm = FrobeniusModule::new(MatrixR::identity(r, 1), 2).unwrap();
        assert_eq!(fm.i_q_exponent(), 0);
    }

    #[test]
    fn ineligible_prime_is_rejected() {
        let r = ring(3, 2);
        let fm = FrobeniusModule::new(MatrixR::from_i64(r, &[vec![2]]), 1).unwrap();
        assert!(fm.char_poly_split().is_err());
    }
}
