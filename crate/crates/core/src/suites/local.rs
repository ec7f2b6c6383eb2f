//! Frobenius matrices: polynomial split and the finite-singular comparison.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::appendix::random_ring;
use super::{SuiteReport, Tally};
use crate::exterior::subsets;
use crate::local_model::FrobeniusModule;
use crate::ring_linalg::{MatrixR, ResidueRing};

/// Random invertible `Fr` with `det(1 - Fr) = 0`: `Fr = 1 + N` with a dependent row in `N`.
pub fn random_frobenius(ring: ResidueRing, d: usize, rng: &mut ChaCha8Rng) -> MatrixR {
    loop {
        let mut rows: Vec<Vec<u64>> =
            (0..d).map(|_| (0..d).map(|_| rng.gen_range(0..ring.modulus())).collect()).collect();
        let dep = rng.gen_range(0..d);
        let mut combo = vec![0; d];
        for (i, row) in rows.iter().enumerate() {
            if i != dep {
                let c = rng.gen_range(0..ring.modulus());
                for (x, &y) in combo.iter_mut().zip(row) {
                    *x = ring.add(*x, ring.mul(c, y));
                }
            }
        }
        rows[dep] = combo;
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = ring.add(row[i], 1);
        }
        let f = MatrixR::from_rows(ring, d, &rows);
        if ring.is_unit(f.det()) {
            return f;
        }
    }
}

/// Coefficient of `x^j` in `det(1 - x F)` is `(-1)^j` times the sum of principal `j`-minors.
fn char_poly_by_minors(f: &MatrixR) -> Vec<u64> {
    let ring = f.ring;
    (0..=f.rows)
        .map(|j| {
            let s = subsets(f.rows, j).iter().fold(0, |acc, t| ring.add(acc, f.minor(t, t)));
            if j % 2 == 0 {
                s
            } else {
                ring.neg(s)
            }
        })
        .collect()
}

pub fn run(seed: u64, cases: usize) -> SuiteReport {
    let mut t = Tally::default();
    let mut isos = 0;
    for i in 0..cases {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64).wrapping_mul(0x2545_f491_4f6c_dd1d));
        let ring = random_ring(&mut rng);
        let d = rng.gen_range(1..=3);
        let f = random_frobenius(ring, d, &mut rng);
        let fm = FrobeniusModule::new(f.clone(), ring.modulus()).unwrap();
        t.cases += 1;
        let label = format!("Fr={:?} mod {}", f.row_vecs(), ring.modulus());
        let (p, q) = match fm.char_poly_split() {
            Ok(pq) => pq,
            Err(e) => {
                t.fail(format!("{label}: {e}"));
                continue;
            }
        };
        t.check(p == char_poly_by_minors(&f), || format!("{label}: P differs from minor expansion"));
        // (x - 1) Q = P
        let mut xq = vec![0; q.len() + 1];
        for (j, &c) in q.iter().enumerate() {
            xq[j + 1] = ring.add(xq[j + 1], c);
            xq[j] = ring.sub(xq[j], c);
        }
        t.check(xq == p, || format!("{label}: (x-1)Q != P"));
        match fm.finite_singular_map() {
            Ok(map) => {
                let free_rank_one = map.dom.exps == vec![ring.k()];
                isos += map.is_iso() as usize;
                t.check(map.is_iso() == free_rank_one, || format!("{label}: iso criterion"));
            }
            Err(e) => t.fail(format!("{label}: {e}")),
        }
    }
    t.note(format!("{isos} of {cases} comparison maps were isomorphisms"));
    t.finish(3, "local: Frobenius split and finite-singular map")
}

#[cfg(test)]
mod tests {
    #[test]
    fn small_run_passes() {
        let rep = super::run(1, 60);
        assert!(rep.passed, "{rep:#?}");
    }
}
