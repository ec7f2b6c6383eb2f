//! The Selmer sheaf `S(n) = wedge^r H_{F(n)}`, its stub subsheaf `m^{lambda(n)} S(n)`,
//! Kolyvagin systems as global sections, and the transform from Stark systems.
//!
//! The factors `H_tr(q)` and `G_q` are free of rank one and trivialized by their stored
//! generators; the finite-singular comparison is multiplication by the prime's `fs_unit`.

use rayon::prelude::*;

use super::stark::{inclusion, relaxed_module, StarkModule};
use super::Hasse;
use crate::error::{Error, Result};
use crate::exterior::{exterior, psi_hat, wedge, CartesianSquare};
use crate::graph_sheaf::{GlobalSections, Section, SheafOnGraph};
use crate::ring_linalg::{DiagModule, MatrixR, ModuleMap, Subquotient};
use crate::selmer_instance::{as_module, nu, prime_indices, SelmerInstance, Vertex};

pub fn transverse_module(inst: &SelmerInstance, n: Vertex) -> Subquotient {
    as_module(&inst.h_transverse(n))
}

pub fn selmer_stalk(inst: &SelmerInstance, n: Vertex) -> DiagModule {
    exterior(&transverse_module(inst, n).module, inst.r)
}

/// The vertex-to-edge maps at the edge joining `n` and `nq`, from `S(n)` and `S(nq)` into
/// `wedge^{r-1} H_{F_q(n)}`: contraction by `u_q loc_q^f` and by `loc_q^tr`.
pub fn edge_maps(inst: &SelmerInstance, n: Vertex, q: usize) -> Result<(ModuleMap, ModuleMap)> {
    if n >> q & 1 == 1 {
        return Err(Error::Input(format!("{} divides {}", inst.primes[q].label, inst.vertex_name(n))));
    }
    let ring = inst.ring;
    let hn = transverse_module(inst, n);
    let hnq = transverse_module(inst, n | 1 << q);
    let hq = as_module(&inst.h_transverse_strict(n, q));
    let u = inst.primes[q].fs_unit;
    let f: Vec<u64> =
        (0..hn.gens.rows).map(|i| ring.mul(u, hn.gens[(i, SelmerInstance::f_coord(q))])).collect();
    let t: Vec<u64> = (0..hnq.gens.rows).map(|i| hnq.gens[(i, SelmerInstance::t_coord(q))]).collect();
    let upper = psi_hat(&inclusion(&hq, &hn)?, &f, inst.r)?;
    let lower = psi_hat(&inclusion(&hq, &hnq)?, &t, inst.r)?;
    Ok((upper, lower))
}

#[derive(Clone, Debug)]
pub struct SelmerSheaf {
    pub hasse: Hasse,
    pub sheaf: SheafOnGraph,
}

pub fn selmer_sheaf(inst: &SelmerInstance, active: Vertex) -> Result<SelmerSheaf> {
    let hasse = Hasse::new(inst, active);
    let stalks: Vec<DiagModule> = hasse.list.par_iter().map(|&n| selmer_stalk(inst, n)).collect();
    let maps = (0..hasse.graph.edges.len())
        .into_par_iter()
        .map(|e| {
            let (n, q) = hasse.edge_ends(e);
            edge_maps(inst, n, q)
        })
        .collect::<Result<Vec<_>>>()?;
    let edge_modules = maps.iter().map(|(f, _)| f.cod.clone()).collect();
    let sheaf = SheafOnGraph::new(hasse.graph.clone(), stalks, edge_modules, maps)?;
    Ok(SelmerSheaf { hasse, sheaf })
}

impl SelmerSheaf {
    pub fn stalk(&self, n: Vertex) -> &DiagModule {
        &self.sheaf.stalks[self.hasse.index(n).expect("active vertex")]
    }
}

/// The stub subsheaf, with stalk inclusions `S'(n) -> S(n)` and the subquotients realising them.
#[derive(Clone, Debug)]
pub struct StubSheaf {
    pub sheaf: SheafOnGraph,
    pub stalks_in_full: Vec<Subquotient>,
    pub inclusions: Vec<ModuleMap>,
}

fn stub_sheaf(inst: &SelmerInstance, full: &SelmerSheaf) -> Result<StubSheaf> {
    let ring = inst.ring;
    let hasse = &full.hasse;
    let stalks_in_full: Vec<Subquotient> = hasse
        .list
        .par_iter()
        .zip(&full.sheaf.stalks)
        .map(|(&n, s)| Subquotient::of(s, &MatrixR::identity(ring, s.dim()).scale(ring.pow_p(inst.lambda(n)))))
        .collect();
    let inclusions: Vec<ModuleMap> =
        stalks_in_full.iter().zip(&full.sheaf.stalks).map(|(sq, s)| sq.inclusion(s)).collect();
    let parts = (0..hasse.graph.edges.len())
        .into_par_iter()
        .map(|e| {
            let (a, b) = hasse.graph.edges[e];
            let (upper, lower) = &full.sheaf.maps[e];
            let edge = &full.sheaf.edge_modules[e];
            let from_a = inclusions[a].then(upper)?;
            let from_b = inclusions[b].then(lower)?;
            let image = Subquotient::of(edge, &from_a.mat);
            if Subquotient::of(edge, &from_b.mat).a != image.a {
                let (n, q) = hasse.edge_ends(e);
                return Err(Error::InvalidInstance(format!(
                    "stub images differ at the edge {} - {}",
                    inst.vertex_name(n),
                    inst.vertex_name(n | 1 << q)
                )));
            }
            let restrict = |f: &ModuleMap| -> Result<ModuleMap> {
                let rows: Vec<Vec<u64>> = (0..f.mat.rows).map(|i| image.coords(f.mat.row(i)).unwrap()).collect();
                ModuleMap::new(f.dom.clone(), image.module.clone(), MatrixR::from_rows(ring, image.module.dim(), &rows))
            };
            Ok((image.module.clone(), (restrict(&from_a)?, restrict(&from_b)?)))
        })
        .collect::<Result<Vec<_>>>()?;
    let (edge_modules, maps): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
    let stalks = stalks_in_full.iter().map(|sq| sq.module.clone()).collect();
    let sheaf = SheafOnGraph::new(hasse.graph.clone(), stalks, edge_modules, maps)?;
    Ok(StubSheaf { sheaf, stalks_in_full, inclusions })
}

/// Kolyvagin systems `KS_r` and stub Kolyvagin systems `KS'_r`.
#[derive(Clone, Debug)]
pub struct KolyvaginModules {
    pub selmer: SelmerSheaf,
    pub stub: StubSheaf,
    pub ks: GlobalSections,
    pub ks_stub: GlobalSections,
}

pub fn kolyvagin_modules(inst: &SelmerInstance, active: Vertex) -> Result<KolyvaginModules> {
    let selmer = selmer_sheaf(inst, active)?;
    let stub = stub_sheaf(inst, &selmer)?;
    let ks = selmer.sheaf.global_sections();
    let ks_stub = stub.sheaf.global_sections();
    Ok(KolyvaginModules { selmer, stub, ks, ks_stub })
}

impl KolyvaginModules {
    pub fn hasse(&self) -> &Hasse {
        &self.selmer.hasse
    }

    pub fn stub_to_full(&self, s: &Section) -> Section {
        Section { values: self.stub.inclusions.iter().zip(&s.values).map(|(f, x)| f.apply(x)).collect() }
    }

    /// The stub section with the same values, if every value lies in the stub stalk.
    pub fn full_to_stub(&self, s: &Section) -> Option<Section> {
        let values = self.stub.stalks_in_full.iter().zip(&s.values).map(|(sq, x)| sq.coords(x)).collect::<Option<_>>()?;
        Some(Section { values })
    }

    pub fn is_stub(&self, s: &Section) -> bool {
        self.full_to_stub(s).is_some()
    }

    /// The inclusion `KS'_r -> KS_r` on coordinates.
    pub fn stub_inclusion(&self) -> ModuleMap {
        let ring = self.selmer.sheaf.ring();
        let rows: Vec<Vec<u64>> = self
            .ks_stub
            .generators()
            .iter()
            .map(|s| self.ks.coords(&self.stub_to_full(s)).expect("stub sections are sections"))
            .collect();
        ModuleMap::new(self.ks_stub.module().clone(), self.ks.module().clone(), MatrixR::from_rows(ring, self.ks.module().dim(), &rows))
            .expect("inclusion of sections")
    }
}

/// `(-1)^{nu(n)} Pi_n: Y_n -> S(n)`, contracting by `u_q loc_q^f` over the primes of `n`.
pub fn pi_map(inst: &SelmerInstance, n: Vertex) -> Result<ModuleMap> {
    let ring = inst.ring;
    let hn = relaxed_module(inst, n);
    let ht = transverse_module(inst, n);
    let primes = prime_indices(n);
    let mut h = hn.gens.select_cols(&primes.iter().map(|&q| SelmerInstance::f_coord(q)).collect::<Vec<_>>());
    for (j, &q) in primes.iter().enumerate() {
        for i in 0..h.rows {
            h[(i, j)] = ring.mul(h[(i, j)], inst.primes[q].fs_unit);
        }
    }
    let c1 = MatrixR::zeros(ring, 0, primes.len());
    let map = CartesianSquare::new(inclusion(&ht, &hn)?, h, c1)?.map(inst.r, None)?;
    Ok(if nu(n) % 2 == 1 { map.scale(ring.neg(1)) } else { map })
}

/// `kappa_n = (-1)^{nu(n)} Pi_n(eps_n)` on the vertices of the Selmer sheaf.
pub fn pi_transform(inst: &SelmerInstance, stark: &StarkModule, eps: &Section, selmer: &SelmerSheaf) -> Result<Section> {
    let values = selmer
        .hasse
        .list
        .par_iter()
        .map(|&n| {
            let x = stark.hasse.value(eps, n);
            Ok(selmer.stalk(n).reduce(&pi_map(inst, n)?.apply(x)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Section { values })
}

/// The section supported at `n` with value `d_1 ^ ... ^ d_r`, where `H_{F(n)}` has exactly
/// `r` summands of exponent one spanned by the `d_i`.
pub fn remark_section(inst: &SelmerInstance, selmer: &SelmerSheaf, n: Vertex) -> Result<Section> {
    let k = inst.ring.k();
    let h = transverse_module(inst, n).module;
    let ds: Vec<usize> = (0..h.dim()).filter(|&i| h.exps[i] == 1).collect();
    if ds.len() != inst.r || h.exps.iter().filter(|&&e| e == k).count() != inst.r || h.dim() != 2 * inst.r {
        return Err(Error::Input(format!("H_F({}) is not R^r + (R/m)^r: {:?}", inst.vertex_name(n), h.exps)));
    }
    let basis: Vec<Vec<u64>> = ds
        .iter()
        .map(|&i| {
            let mut e = vec![0; h.dim()];
            e[i] = 1;
            e
        })
        .collect();
    let kappa = wedge(&h, &basis);
    let values = selmer
        .hasse
        .list
        .iter()
        .zip(&selmer.sheaf.stalks)
        .map(|(&v, s)| if v == n { kappa.clone() } else { s.zero() })
        .collect();
    Ok(Section { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph_sheaf::generates;
    use crate::ring_linalg::{ResidueRing, Submodule};
    use crate::selmer_instance::{generate_instance, GenParams, PrimeData};
    use crate::systems::stark::stark_module;

    fn inst_a() -> SelmerInstance {
        let ring = ResidueRing::new(3, 1).unwrap();
        let primes = vec![PrimeData { label: "q".into(), level: 1, fs_unit: 2 }];
        SelmerInstance::new(ring, 1, primes, Submodule::full(ring, 2)).unwrap()
    }

    fn gen(p: u64, k: u32, r: usize, m: usize, e: &[u32], seed: u64) -> SelmerInstance {
        generate_instance(&GenParams { p, k, r, m, e: e.to_vec(), seed, levels: None }).unwrap()
    }

    #[test]
    fn inst_a_kolyvagin_modules_by_enumeration() {
        let a = inst_a();
        let km = kolyvagin_modules(&a, 1).unwrap();
        assert_eq!(km.ks.module().exps, vec![1]);
        assert_eq!(km.ks_stub.module().exps, vec![1]);
        let (s1, sq) = (km.selmer.stalk(0).clone(), km.selmer.stalk(1).clone());
        let count = s1
            .elements()
            .iter()
            .flat_map(|x| sq.elements().into_iter().map(move |y| vec![x.clone(), y]))
            .filter(|v| km.selmer.sheaf.is_section(&Section { values: v.clone() }))
            .count();
        assert_eq!(count, 3);
    }

    #[test]
    fn inst_a_pi_generates_and_is_compatible() {
        let a = inst_a();
        let ss = stark_module(&a, 1).unwrap();
        let km = kolyvagin_modules(&a, 1).unwrap();
        let kappa = pi_transform(&a, &ss, &ss.generator().unwrap(), &km.selmer).unwrap();
        // both sides of the edge diagram evaluated directly
        let (up, low) = edge_maps(&a, 0, 0).unwrap();
        assert_eq!(up.apply(&kappa.values[0]), low.apply(&kappa.values[1]));
        assert!(km.selmer.sheaf.is_primitive(&kappa));
        assert_eq!(pi_map(&a, 0).unwrap().mat, MatrixR::identity(a.ring, 1));
    }

    #[test]
    fn pi_is_an_isomorphism_onto_stub_systems() {
        for (seed, (p, k, r, m, e)) in
            [(3, 2, 1, 3, vec![1]), (2, 2, 2, 3, vec![]), (2, 3, 1, 3, vec![2]), (5, 2, 2, 4, vec![2, 1])]
                .into_iter()
                .enumerate()
        {
            let inst = gen(p, k, r, m, &e, seed as u64 + 10);
            let all = inst.all_primes();
            let ss = stark_module(&inst, all).unwrap();
            let km = kolyvagin_modules(&inst, all).unwrap();
            assert!(ss.is_free_rank_one());
            assert_eq!(km.ks_stub.module().exps, vec![k]);
            let kappa = pi_transform(&inst, &ss, &ss.generator().unwrap(), &km.selmer).unwrap();
            assert!(km.selmer.sheaf.is_section(&kappa), "edge compatibility for {p}^{k} r={r} e={e:?}");
            let stub = km.full_to_stub(&kappa).expect("stub membership");
            assert!(km.stub.sheaf.is_primitive(&stub));
            for (&n, x) in km.hasse().list.iter().zip(&kappa.values) {
                assert!(generates(km.selmer.stalk(n), x, inst.lambda(n)) || inst.lambda(n) >= k);
            }
        }
    }

    #[test]
    fn remark_section_is_kolyvagin_but_not_stub() {
        let inst = gen(3, 2, 2, 4, &[1, 1], 5);
        let km = kolyvagin_modules(&inst, inst.all_primes()).unwrap();
        let s = remark_section(&inst, &km.selmer, 0).unwrap();
        assert!(km.selmer.sheaf.is_section(&s));
        assert!(!km.is_stub(&s));
        assert!(km.ks.module().length() > km.ks_stub.module().length());
    }

    #[test]
    fn rank_one_kolyvagin_systems_are_stub() {
        let inst = gen(3, 2, 1, 3, &[1, 1], 6);
        let km = kolyvagin_modules(&inst, inst.all_primes()).unwrap();
        assert!(km.stub_inclusion().is_iso());
    }
}
