//! Vanishing-order invariants of a system and recovery of the dual Selmer structure.

use serde::Serialize;

use super::Hasse;
use crate::error::{Error, Result};
use crate::graph_sheaf::Section;
use crate::ring_linalg::DiagModule;
use crate::selmer_instance::{nu, Vertex};

/// `phi(n)` is the largest `j` with the value at `n` in `m^j` of its stalk, `None` standing
/// for infinity (value zero).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvariantProfile {
    pub k: u32,
    pub phi: Vec<(Vertex, Option<u32>)>,
    /// `dphi[t]` is the minimum of `phi` over vertices with `t` prime factors.
    pub dphi: Vec<Option<u32>>,
    pub ord: Option<usize>,
    /// `d[i - ord] = dphi(i) - dphi(i + 1)` for `ord <= i < len(dphi) - 1`.
    pub d: Vec<u32>,
}

fn min_opt(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

pub fn invariant_profile(hasse: &Hasse, stalks: &[DiagModule], s: &Section) -> InvariantProfile {
    let k = stalks.first().map(|m| m.ring.k()).unwrap_or(0);
    let phi: Vec<(Vertex, Option<u32>)> =
        hasse.list.iter().zip(stalks).zip(&s.values).map(|((&n, m), x)| (n, m.depth(x))).collect();
    let top = nu(hasse.active);
    let mut dphi = vec![None; top + 1];
    for &(n, f) in &phi {
        dphi[nu(n)] = min_opt(dphi[nu(n)], f);
    }
    let ord = dphi.iter().position(Option::is_some);
    let d = match ord {
        None => vec![],
        Some(o) => (o..top).map_while(|i| Some(dphi[i]?.saturating_sub(dphi[i + 1]?))).collect(),
    };
    InvariantProfile { k, phi, dphi, ord, d }
}

impl InvariantProfile {
    /// `dphi` is nonincreasing and finite from `ord` on, and `d` is nonincreasing.
    pub fn laws_hold(&self) -> bool {
        let Some(o) = self.ord else { return true };
        let finite: Option<Vec<u32>> = self.dphi[o..].iter().copied().collect();
        let Some(f) = finite else { return false };
        let d: Vec<u32> = f.windows(2).map(|w| w[0].wrapping_sub(w[1])).collect();
        f.windows(2).all(|w| w[0] >= w[1]) && d.windows(2).all(|w| w[0] >= w[1]) && d == self.d
    }

    /// The profile is that of a primitive system: `dphi` reaches zero.
    pub fn reaches_zero(&self) -> bool {
        self.dphi.last().copied().flatten() == Some(0)
    }
}

/// `dphi(t)` for `p^s` times a generator when the dual invariant factors are `e`.
pub fn expected_dphi(e: &[u32], s: u32, k: u32, t: usize) -> Option<u32> {
    let mut sorted = e.to_vec();
    sorted.sort_by(|a, b| b.cmp(a));
    let v = s + sorted.iter().skip(t).sum::<u32>();
    (v < k).then_some(v)
}

/// Predicted invariant factors `R/m^{d(i)}` of the dual Selmer group at `1`, decreasing.
pub fn recover_structure(profile: &InvariantProfile) -> Result<Vec<u32>> {
    if profile.ord != Some(0) {
        return Err(Error::Input("the value at 1 vanishes: the dual Selmer length is not determined at this level".into()));
    }
    let mut out: Vec<u32> = profile.d.iter().copied().filter(|&d| d > 0).collect();
    out.sort_by(|a, b| b.cmp(a));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selmer_instance::{generate_instance, GenParams, SelmerInstance};
    use crate::systems::stark::stark_module;

    fn gen(p: u64, k: u32, r: usize, m: usize, e: &[u32], seed: u64) -> SelmerInstance {
        generate_instance(&GenParams { p, k, r, m, e: e.to_vec(), seed, levels: None }).unwrap()
    }

    fn scaled(s: &Section, c: u64, ring: crate::ring_linalg::ResidueRing) -> Section {
        Section { values: s.values.iter().map(|v| v.iter().map(|&x| ring.mul(x, c)).collect()).collect() }
    }

    #[test]
    fn split_generator_profile_is_zero() {
        let inst = gen(3, 2, 1, 2, &[], 1);
        let ss = stark_module(&inst, inst.all_primes()).unwrap();
        let p = invariant_profile(&ss.hasse, &ss.sheaf.stalks, &ss.generator().unwrap());
        assert_eq!(p.dphi, vec![Some(0); 3]);
        assert_eq!((p.ord, p.d.clone()), (Some(0), vec![0, 0]));
        assert_eq!(recover_structure(&p).unwrap(), Vec::<u32>::new());
    }

    #[test]
    fn profile_matches_formula_and_scaling() {
        for (seed, (p, k, m, e)) in [(3, 2, 3, vec![1]), (2, 4, 3, vec![2, 1]), (5, 3, 4, vec![1, 1])].into_iter().enumerate() {
            let inst = gen(p, k, 1, m, &e, seed as u64);
            let ss = stark_module(&inst, inst.all_primes()).unwrap();
            let g = ss.generator().unwrap();
            for s in 0..k {
                let sys = scaled(&g, inst.ring.pow_p(s), inst.ring);
                let prof = invariant_profile(&ss.hasse, &ss.sheaf.stalks, &sys);
                for t in 0..=m {
                    assert_eq!(prof.dphi[t], expected_dphi(&e, s, k, t), "e={e:?} s={s} t={t}");
                }
                assert!(prof.laws_hold());
                if prof.ord == Some(0) {
                    assert_eq!(recover_structure(&prof).unwrap(), e);
                }
            }
        }
    }

    #[test]
    fn vanishing_at_one_is_reported() {
        let inst = gen(3, 2, 1, 3, &[2], 2);
        let ss = stark_module(&inst, inst.all_primes()).unwrap();
        let prof = invariant_profile(&ss.hasse, &ss.sheaf.stalks, &ss.generator().unwrap());
        assert_eq!(prof.ord, Some(1));
        assert!(recover_structure(&prof).is_err());
    }
}
