//! Contraction maps and cartesian-square maps on random exact sequences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{brute, SuiteReport, Tally};
use crate::exterior::{
    contraction, exterior, exterior_map, functional_map, invert, psi_hat, psi_hat_split, CartesianSquare,
};
use crate::ring_linalg::{preimage, DiagModule, MatrixR, ModuleMap, ResidueRing, Submodule, Subquotient};

pub const RINGS: [(u64, u32); 4] = [(2, 2), (3, 2), (3, 3), (5, 3)];
const MAX_LENGTH: u32 = 8;

pub fn random_ring(rng: &mut ChaCha8Rng) -> ResidueRing {
    let (p, k) = RINGS[rng.gen_range(0..RINGS.len())];
    ResidueRing::new(p, k).unwrap()
}

pub fn random_module(ring: ResidueRing, max_dim: usize, rng: &mut ChaCha8Rng) -> DiagModule {
    loop {
        let d = rng.gen_range(1..=max_dim);
        let exps: Vec<u32> = (0..d).map(|_| rng.gen_range(1..=ring.k())).collect();
        if exps.iter().sum::<u32>() <= MAX_LENGTH {
            return DiagModule::new(ring, exps);
        }
    }
}

fn random_elem(ring: ResidueRing, rng: &mut ChaCha8Rng) -> u64 {
    let x = rng.gen_range(0..ring.modulus());
    // favour non-units so that non-surjective functionals are common
    if rng.gen_bool(0.3) {
        ring.mul(x, ring.p())
    } else {
        x
    }
}

/// A random map `m -> R^s`, well defined by construction.
pub fn random_functionals(m: &DiagModule, s: usize, rng: &mut ChaCha8Rng) -> MatrixR {
    let ring = m.ring;
    let rows: Vec<Vec<u64>> = m
        .exps
        .iter()
        .map(|&e| (0..s).map(|_| ring.mul(random_elem(ring, rng), ring.pow_p(ring.k() - e))).collect())
        .collect();
    MatrixR::from_rows(ring, s, &rows)
}

pub fn random_invertible(ring: ResidueRing, n: usize, rng: &mut ChaCha8Rng) -> MatrixR {
    loop {
        let rows: Vec<Vec<u64>> =
            (0..n).map(|_| (0..n).map(|_| rng.gen_range(0..ring.modulus())).collect()).collect();
        let m = MatrixR::from_rows(ring, n, &rows);
        if ring.is_unit(m.det()) {
            return m;
        }
    }
}

fn exact_sequence_case(ring: ResidueRing, rng: &mut ChaCha8Rng, t: &mut Tally) {
    let m = random_module(ring, 4, rng);
    let psi = random_functionals(&m, 1, rng).col(0);
    let r = rng.gen_range(1..=m.dim());
    let label = format!("M={:?} psi={psi:?} r={r} mod {}", m.exps, ring.modulus());
    let f = functional_map(&m, &psi).unwrap();
    let incl = f.kernel().inclusion(&m);
    let hat = match psi_hat(&incl, &psi, r) {
        Ok(h) => h,
        Err(e) => {
            t.fail(format!("{label}: {e}"));
            return;
        }
    };
    let to_m = exterior_map(&incl, r - 1);
    let formula = contraction(&m, &psi, r).unwrap();
    t.check(hat.then(&to_m).unwrap().mat == formula.mat, || format!("{label}: contraction formula"));

    let a = psi.iter().map(|&c| ring.val(c)).min().unwrap();
    let tgt = &hat.cod;
    if brute::size(tgt).is_some() {
        let image = brute::span(tgt, &hat.mat.row_vecs());
        let expected = brute::scaled_module(tgt, ring.pow_p(a));
        t.check(image == expected, || format!("{label}: image is not p^{a} wedge^(r-1) N"));
        match second_map(&hat, &to_m, &expected) {
            Some(Ok(())) => {
                t.check(true, String::new);
            }
            Some(Err(delta)) => t.counterexample(UNIQUENESS, format!("{label}: uniqueness fails, hat + {delta:?} also lifts the contraction with the same image")),
            None => t.fail(format!("{label}: uniqueness undetermined, search space too large")),
        }
    }
    match psi_hat_split(&incl, &psi, r) {
        Ok(Some(split)) => {
            t.check(split.mat == hat.mat, || format!("{label}: split construction disagrees"));
        }
        Ok(None) => {
            t.check(!m.is_free() || a == ring.k(), || format!("{label}: free module without splitting"));
        }
        Err(e) => t.fail(format!("{label}: split {e}")),
    };
    if m.is_free() && m.dim() == r {
        t.check(hat.is_iso() == (a == 0), || format!("{label}: iso criterion"));
    }
}

/// Counterexample kind: a second map satisfies both defining properties.
pub const UNIQUENESS: &str = "contraction lift not unique";

const UNIQUENESS_SEARCH: u64 = 1 << 16;

/// Searches for another map agreeing with `hat` after pushing to `wedge^{r-1} M` and with the
/// same image. `Some(Ok(()))` when `hat` is unique, `Some(Err(delta))` with a perturbation of
/// the generator values otherwise, `None` when the search space is too large.
fn second_map(
    hat: &ModuleMap,
    to_m: &ModuleMap,
    image: &std::collections::HashSet<Vec<u64>>,
) -> Option<Result<(), Vec<Vec<u64>>>> {
    let tgt = &hat.cod;
    let ring = tgt.ring;
    let killed: Vec<Vec<u64>> = image.iter().filter(|x| to_m.cod.is_zero(&to_m.apply(x))).cloned().collect();
    if killed.len() == 1 {
        // the image injects, so the lift condition pins the map down
        return Some(Ok(()));
    }
    let all = brute::span(tgt, &MatrixR::identity(ring, tgt.dim()).row_vecs());
    let kernel: Vec<Vec<u64>> = all.into_iter().filter(|x| to_m.cod.is_zero(&to_m.apply(x))).collect();
    let choices: Vec<Vec<Vec<u64>>> = hat
        .dom
        .exps
        .iter()
        .map(|&a| {
            let mut c: Vec<Vec<u64>> = kernel
                .iter()
                .filter(|x| tgt.is_zero(&x.iter().map(|&v| ring.mul(v, ring.pow_p(a))).collect::<Vec<_>>()))
                .cloned()
                .collect();
            c.sort();
            c
        })
        .collect();
    let total = choices.iter().try_fold(1u64, |acc, c| acc.checked_mul(c.len() as u64))?;
    if total > UNIQUENESS_SEARCH {
        return None;
    }
    let mut idx = vec![0usize; choices.len()];
    loop {
        let delta: Vec<Vec<u64>> = idx.iter().zip(&choices).map(|(&i, c)| c[i].clone()).collect();
        if delta.iter().any(|d| !tgt.is_zero(d)) {
            let rows: Vec<Vec<u64>> = (0..hat.mat.rows)
                .map(|i| tgt.reduce(&hat.mat.row(i).iter().zip(&delta[i]).map(|(&a, &b)| ring.add(a, b)).collect::<Vec<_>>()))
                .collect();
            if brute::span(tgt, &rows) == *image {
                return Some(Err(delta));
            }
        }
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return Some(Ok(()));
            }
            idx[pos] += 1;
            if idx[pos] < choices[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Random admissible functional basis: `psi * G` with `G` block lower triangular.
fn random_admissible(sq: &CartesianSquare, rng: &mut ChaCha8Rng) -> MatrixR {
    let ring = sq.h.ring;
    let (s1, s2) = (sq.s1(), sq.s2());
    let a = random_invertible(ring, s1, rng);
    let d = random_invertible(ring, s2 - s1, rng);
    let mut g = MatrixR::zeros(ring, s2, s2);
    for i in 0..s2 {
        for j in 0..s2 {
            g[(i, j)] = match (i < s1, j < s1) {
                (true, true) => a[(i, j)],
                (false, false) => d[(i - s1, j - s1)],
                (false, true) => rng.gen_range(0..ring.modulus()),
                (true, false) => 0,
            };
        }
    }
    sq.default_psi_basis().mul(&g).unwrap()
}

fn preimage_sub(m: &DiagModule, h: &MatrixR, c: &MatrixR) -> Subquotient {
    let a = preimage(h, Some(&Submodule::from_generators(c)));
    Subquotient::new(a.basis(), &m.relations())
}

fn cartesian_case(ring: ResidueRing, rng: &mut ChaCha8Rng, t: &mut Tally) {
    let s3 = rng.gen_range(1..=3usize);
    let r = rng.gen_range(0..=2usize);
    let free_rank = r + s3;
    let m3 = if rng.gen_bool(0.5) && free_rank as u32 * ring.k() <= MAX_LENGTH {
        DiagModule::free(ring, free_rank)
    } else {
        random_module(ring, 4, rng)
    };
    let h3 = random_functionals(&m3, s3, rng);
    let b = random_invertible(ring, s3, rng);
    let s2 = rng.gen_range(0..=s3);
    let s1 = rng.gen_range(0..=s2);
    let label = format!("M3={:?} s=({s1},{s2},{s3}) r={r} mod {}", m3.exps, ring.modulus());
    let rows = |n: usize| b.select_rows(&(0..n).collect::<Vec<_>>());

    let sq2 = preimage_sub(&m3, &h3, &rows(s2));
    let m2 = sq2.module.clone();
    let incl2 = sq2.inclusion(&m3);
    let binv = invert(&b).unwrap();
    let h2_rows: Vec<Vec<u64>> =
        (0..m2.dim()).map(|i| binv.apply(&h3.apply(sq2.gens.row(i)))[..s2].to_vec()).collect();
    let h2 = MatrixR::from_rows(ring, s2, &h2_rows);
    let c1_inner = MatrixR::identity(ring, s2).select_rows(&(0..s1).collect::<Vec<_>>());
    let sq1 = preimage_sub(&m2, &h2, &c1_inner);
    let incl1 = sq1.inclusion(&m2);

    let build = |incl: ModuleMap, h: MatrixR, c: MatrixR| CartesianSquare::new(incl, h, c);
    let (outer, inner, comp) = match (
        build(incl2.clone(), h3.clone(), rows(s2)),
        build(incl1.clone(), h2.clone(), c1_inner.clone()),
        build(incl1.then(&incl2).unwrap(), h3.clone(), rows(s1)),
    ) {
        (Ok(o), Ok(i), Ok(c)) => (o, i, c),
        (o, i, c) => {
            t.fail(format!("{label}: square rejected {:?}", [o.err(), i.err(), c.err()]));
            return;
        }
    };
    let maps = (outer.map(r, None), inner.map(r, None), comp.map(r, None));
    let (mo, mi, mc) = match maps {
        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
        (a, b, c) => {
            t.fail(format!("{label}: map failed {:?}", [a.err(), b.err(), c.err()]));
            return;
        }
    };
    t.check(mo.then(&mi).unwrap().mat == mc.mat, || format!("{label}: composition"));
    for sq in [&outer, &inner, &comp] {
        let alt = random_admissible(sq, rng);
        let base = sq.map(r, None).unwrap();
        t.check(sq.map(r, Some(&alt)).map(|m| m.mat) == Ok(base.mat), || {
            format!("{label}: depends on the functional basis")
        });
    }
    // image of the outer map when M3 is free of rank r + s3
    if m3.is_free() && m3.dim() == r + s3 {
        let tgt = exterior(&m2, r + s2);
        if brute::size(&tgt).is_some() {
            let shift = m2.length() as i64 - ((r + s2) as u32 * ring.k()) as i64;
            let image = brute::span(&tgt, &mo.mat.row_vecs());
            let expected = if shift < 0 { Default::default() } else { brute::scaled_module(&tgt, ring.pow_p(shift as u32)) };
            t.check(shift >= 0 && image == expected, || format!("{label}: image is not m^{shift} wedge M1"));
        }
    }
}

pub fn run(seed: u64, cases: usize) -> SuiteReport {
    let tallies: Vec<Tally> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let ring = random_ring(&mut rng);
            let mut t = Tally { cases: 1, ..Default::default() };
            exact_sequence_case(ring, &mut rng, &mut t);
            cartesian_case(ring, &mut rng, &mut t);
            t
        })
        .collect();
    let mut total = Tally::default();
    for t in tallies {
        total.merge(t);
    }
    total.finish(1, "appendix: contraction and cartesian maps")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniqueness_fails_without_a_diagonal_splitting() {
        // Z/3 + Z/27 + Z/9 with psi = (9, 24, 18): the contraction vanishes on wedge^3 M = Z/3
        // while the image 3 wedge^2 N does not, so hat and 2 hat both lift the contraction with the same image
        let ring = ResidueRing::new(3, 3).unwrap();
        let m = DiagModule::new(ring, vec![1, 3, 2]);
        let psi = vec![9, 24, 18];
        let incl = functional_map(&m, &psi).unwrap().kernel().inclusion(&m);
        let hat = psi_hat(&incl, &psi, 3).unwrap();
        let to_m = exterior_map(&incl, 2);
        assert!(hat.then(&to_m).unwrap().is_zero());
        assert!(!hat.is_zero());
        let image = brute::span(&hat.cod, &hat.mat.row_vecs());
        assert_eq!(image, brute::scaled_module(&hat.cod, 3));
        assert!(matches!(second_map(&hat, &to_m, &image), Some(Err(_))));
        assert_eq!(brute::span(&hat.cod, &hat.scale(2).mat.row_vecs()), image);
        assert!(psi_hat_split(&incl, &psi, 3).unwrap().is_none());
    }

    #[test]
    fn small_run_passes() {
        let rep = super::run(5, 40);
        assert!(rep.passed, "{:#?}", rep);
        println!("{}", rep.line());
    }
}
