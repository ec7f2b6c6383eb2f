//! Stark systems: compatible families in `Y_n = wedge^{r + nu(n)} H_{F^n}`.
//!
//! The factor `wedge^{nu(n)} W_n` is trivialized by `h_1 ^ ... ^ h_nu` with the `h_i` the
//! transverse coordinates of the primes of `n` in increasing order.

use rayon::prelude::*;

use super::Hasse;
use crate::error::{Error, Result};
use crate::exterior::{exterior, CartesianSquare};
use crate::graph_sheaf::{GlobalSections, Section, SheafOnGraph};
use crate::ring_linalg::{DiagModule, MatrixR, ModuleMap, Subquotient};
use crate::selmer_instance::{as_module, divides, nu, prime_indices, SelmerInstance, Vertex};

pub fn relaxed_module(inst: &SelmerInstance, n: Vertex) -> Subquotient {
    as_module(&inst.h_relaxed(n))
}

pub fn stark_stalk(inst: &SelmerInstance, n: Vertex) -> DiagModule {
    exterior(&relaxed_module(inst, n).module, inst.r + nu(n))
}

/// Inclusion of one submodule of `L` into a larger one, in diagonal coordinates.
pub(crate) fn inclusion(small: &Subquotient, big: &Subquotient) -> Result<ModuleMap> {
    let ring = big.module.ring;
    let rows = (0..small.gens.rows)
        .map(|i| big.coords(small.gens.row(i)).ok_or_else(|| Error::Dimension("not a submodule".into())))
        .collect::<Result<Vec<_>>>()?;
    ModuleMap::new(small.module.clone(), big.module.clone(), MatrixR::from_rows(ring, big.module.dim(), &rows))
}

fn permutation_is_odd(order: &[usize]) -> bool {
    let mut inv = 0;
    for i in 0..order.len() {
        for j in i + 1..order.len() {
            inv += (order[i] > order[j]) as usize;
        }
    }
    inv % 2 == 1
}

/// `Psi_{n,m}: Y_n -> Y_m` for `m | n`.
pub fn psi_map(inst: &SelmerInstance, n: Vertex, m: Vertex) -> Result<ModuleMap> {
    psi_map_ordered(inst, n, m, &prime_indices(n))
}

/// `Psi_{n,m}` computed with the primes of `n` processed in `order`, then renormalized to the
/// increasing-order trivialization of the `W` factors.
pub fn psi_map_ordered(inst: &SelmerInstance, n: Vertex, m: Vertex, order: &[usize]) -> Result<ModuleMap> {
    if !divides(m, n) {
        return Err(Error::Input(format!("{} does not divide {}", inst.vertex_name(m), inst.vertex_name(n))));
    }
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != prime_indices(n) {
        return Err(Error::Input("order is not a permutation of the primes of n".into()));
    }
    let ring = inst.ring;
    let hn = relaxed_module(inst, n);
    if n == m {
        return Ok(exterior(&hn.module, inst.r + nu(n)).identity());
    }
    let hm = relaxed_module(inst, m);
    let m1 = inclusion(&hm, &hn)?;
    let cols: Vec<usize> = order.iter().map(|&q| SelmerInstance::t_coord(q)).collect();
    let h = hn.gens.select_cols(&cols);
    let c1_rows: Vec<Vec<u64>> = order
        .iter()
        .enumerate()
        .filter(|(_, &q)| m >> q & 1 == 1)
        .map(|(j, _)| {
            let mut e = vec![0; order.len()];
            e[j] = 1;
            e
        })
        .collect();
    let c1 = MatrixR::from_rows(ring, order.len(), &c1_rows);
    let map = CartesianSquare::new(m1, h, c1)?.map(inst.r, None)?;
    let sub_order: Vec<usize> = order.iter().copied().filter(|&q| m >> q & 1 == 1).collect();
    let odd = permutation_is_odd(order) != permutation_is_odd(&sub_order);
    Ok(if odd { map.scale(ring.neg(1)) } else { map })
}

/// The module of Stark systems on the vertices built from `active`, as global sections of the
/// sheaf with stalks `Y_n` and edge maps `Psi_{nq,n}` and the identity.
#[derive(Clone, Debug)]
pub struct StarkModule {
    pub hasse: Hasse,
    pub relaxed: Vec<Subquotient>,
    pub sheaf: SheafOnGraph,
    pub gamma: GlobalSections,
}

pub fn stark_module(inst: &SelmerInstance, active: Vertex) -> Result<StarkModule> {
    let hasse = Hasse::new(inst, active);
    let relaxed: Vec<Subquotient> = hasse.list.par_iter().map(|&n| relaxed_module(inst, n)).collect();
    let stalks: Vec<DiagModule> =
        hasse.list.iter().zip(&relaxed).map(|(&n, h)| exterior(&h.module, inst.r + nu(n))).collect();
    let maps = (0..hasse.graph.edges.len())
        .into_par_iter()
        .map(|e| {
            let (n, q) = hasse.edge_ends(e);
            let low = stalks[hasse.index(n).unwrap()].identity();
            Ok((low, psi_map(inst, n | 1 << q, n)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let edge_modules = maps.iter().map(|(f, _)| f.cod.clone()).collect();
    let sheaf = SheafOnGraph::new(hasse.graph.clone(), stalks, edge_modules, maps)?;
    let gamma = sheaf.global_sections();
    Ok(StarkModule { hasse, relaxed, sheaf, gamma })
}

impl StarkModule {
    pub fn is_free_rank_one(&self) -> bool {
        self.gamma.module().exps == [self.sheaf.ring().k()]
    }

    /// A generator, when the module is cyclic.
    pub fn generator(&self) -> Option<Section> {
        (self.gamma.module().dim() == 1).then(|| self.gamma.section(&[1]))
    }

    pub fn projection(&self, n: Vertex) -> ModuleMap {
        self.gamma.evaluation(&self.sheaf, self.hasse.index(n).expect("active vertex"))
    }

    pub fn stalk(&self, n: Vertex) -> &DiagModule {
        &self.sheaf.stalks[self.hasse.index(n).expect("active vertex")]
    }

    /// Checks the compatibility `Psi_{n,m}(eps_n) = eps_m` for every divisor pair, not only edges.
    pub fn fully_compatible(&self, inst: &SelmerInstance, s: &Section) -> Result<bool> {
        for &n in &self.hasse.list {
            for &m in &self.hasse.list {
                if m != n && divides(m, n) {
                    let psi = psi_map(inst, n, m)?;
                    let y = self.stalk(m);
                    if y.reduce(&psi.apply(self.hasse.value(s, n))) != y.reduce(self.hasse.value(s, m)) {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring_linalg::{ResidueRing, Submodule};
    use crate::selmer_instance::{generate_instance, vertices, GenParams, PrimeData};

    fn inst_a() -> SelmerInstance {
        let ring = ResidueRing::new(3, 1).unwrap();
        let primes = vec![PrimeData { label: "q".into(), level: 1, fs_unit: 1 }];
        SelmerInstance::new(ring, 1, primes, Submodule::full(ring, 2)).unwrap()
    }

    fn gen(p: u64, k: u32, r: usize, m: usize, e: &[u32], seed: u64) -> SelmerInstance {
        generate_instance(&GenParams { p, k, r, m, e: e.to_vec(), seed, levels: None }).unwrap()
    }

    #[test]
    fn inst_a_psi_sends_f_wedge_t_to_minus_f() {
        let a = inst_a();
        let psi = psi_map(&a, 1, 0).unwrap();
        let hq = relaxed_module(&a, 1);
        let h1 = relaxed_module(&a, 0);
        // wedge^2 of R^2 has the single basis vector f ^ t when the generators are f, t
        let fwt = crate::exterior::wedge(&hq.module, &[hq.coords(&[1, 0]).unwrap(), hq.coords(&[0, 1]).unwrap()]);
        let image = psi.apply(&fwt);
        assert_eq!(h1.lift(&image), vec![2, 0]);
    }

    #[test]
    fn inst_a_stark_module_by_enumeration() {
        let a = inst_a();
        let ss = stark_module(&a, 1).unwrap();
        assert!(ss.is_free_rank_one());
        // brute force: all pairs (eps_1, eps_q) with Psi(eps_q) = eps_1
        let y1 = ss.stalk(0).clone();
        let yq = ss.stalk(1).clone();
        let psi = psi_map(&a, 1, 0).unwrap();
        let mut count = 0;
        for e1 in y1.elements() {
            for eq in yq.elements() {
                if y1.reduce(&psi.apply(&eq)) == e1 {
                    count += 1;
                }
            }
        }
        assert_eq!(count, 3);
        let g = ss.generator().unwrap();
        let (v1, vq) = (ss.hasse.value(&g, 0), ss.hasse.value(&g, 1));
        let hq = relaxed_module(&a, 1);
        let h1 = relaxed_module(&a, 0);
        // eps_1 = -f when eps_q = f ^ t
        let fwt = crate::exterior::wedge(&hq.module, &[hq.coords(&[1, 0]).unwrap(), hq.coords(&[0, 1]).unwrap()]);
        let c = vq[0] * a.ring.inv(fwt[0]).unwrap() % 3;
        assert_eq!(h1.lift(v1), vec![a.ring.mul(c, 2), 0]);
    }

    #[test]
    fn psi_identity_and_divisibility() {
        let inst = gen(3, 2, 1, 3, &[1], 1);
        let id = psi_map(&inst, 0b101, 0b101).unwrap();
        assert_eq!(id.mat, MatrixR::identity(inst.ring, id.dom.dim()));
        assert!(psi_map(&inst, 0b001, 0b010).is_err());
    }

    #[test]
    fn psi_transitive_and_order_independent() {
        for (seed, (p, k, r, m, e)) in
            [(2, 2, 1, 3, vec![1]), (3, 2, 2, 3, vec![]), (2, 3, 1, 3, vec![2]), (5, 1, 2, 4, vec![1])]
                .into_iter()
                .enumerate()
        {
            let inst = gen(p, k, r, m, &e, seed as u64);
            let all = inst.all_primes();
            for n in vertices(all) {
                for mid in vertices(n) {
                    for low in vertices(mid) {
                        let direct = psi_map(&inst, n, low).unwrap();
                        let composite = psi_map(&inst, n, mid).unwrap().then(&psi_map(&inst, mid, low).unwrap()).unwrap();
                        assert_eq!(direct.mat, composite.mat, "n={n} mid={mid} low={low}");
                    }
                }
                let mut order = prime_indices(n);
                order.reverse();
                for low in vertices(n) {
                    assert_eq!(
                        psi_map_ordered(&inst, n, low, &order).unwrap().mat,
                        psi_map(&inst, n, low).unwrap().mat
                    );
                }
            }
        }
    }

    #[test]
    fn split_instance_stark_module_matches_enumeration() {
        let inst = gen(3, 1, 1, 2, &[], 4);
        let ss = stark_module(&inst, inst.all_primes()).unwrap();
        assert!(ss.is_free_rank_one());
        // enumerate every tuple of stalk elements
        let mut tuples: Vec<Vec<Vec<u64>>> = vec![vec![]];
        for &n in &ss.hasse.list {
            let elems = ss.stalk(n).elements();
            tuples = tuples
                .into_iter()
                .flat_map(|t| elems.iter().map(move |x| [t.clone(), vec![x.clone()]].concat()))
                .collect();
        }
        assert_eq!(tuples.len(), 81);
        let count = tuples.into_iter().filter(|t| ss.sheaf.is_section(&Section { values: t.clone() })).count();
        assert_eq!(count, 3);
        for &n in &ss.hasse.list {
            assert!(ss.projection(n).is_surjective());
        }
    }
}
