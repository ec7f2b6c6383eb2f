//! Finite stages of a tower `T / m^j` with prime sets `P_j = {q : level(q) >= j}`.
//!
//! Values are compared across levels by reducing the stored generators of each
//! `H_{F^n}` modulo `p^j`.

use std::collections::HashMap;

use serde::Serialize;

use super::kolyvagin::{kolyvagin_modules, pi_transform};
use super::profile::invariant_profile;
use super::stark::{stark_module, StarkModule};
use crate::error::Result;
use crate::exterior::exterior_map;
use crate::graph_sheaf::Section;
use crate::ring_linalg::{DiagModule, MatrixR, ModuleMap, Subquotient};
use crate::selmer_instance::{nu, SelmerInstance, Vertex};

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct StageReport {
    pub level: u32,
    pub active: Vec<String>,
    pub free_rank_one: bool,
    /// `SS(T/m^k, P_k) -> SS(T/m^j, P_k)` is onto for every `k > j`.
    pub reduction_surjective: bool,
    /// `SS(T/m^j, P_j) -> SS(T/m^j, P_k)` is an isomorphism for every `k > j`.
    pub restriction_iso: bool,
    /// The top-level generator reduces to a generator of `SS(T/m^j, P_top)`.
    pub generator_persists: bool,
    pub profile_laws: bool,
    pub stub_free_rank_one: bool,
    pub transform_generates: bool,
}

impl StageReport {
    pub fn passed(&self) -> bool {
        self.free_rank_one
            && self.reduction_surjective
            && self.restriction_iso
            && self.generator_persists
            && self.profile_laws
            && self.stub_free_rank_one
            && self.transform_generates
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct TowerReport {
    pub top: u32,
    pub levels: Vec<u32>,
    pub stages: Vec<StageReport>,
}

impl TowerReport {
    pub fn passed(&self) -> bool {
        self.stages.iter().all(StageReport::passed)
    }
}

/// Reduction `Y_n (x) R/p^j -> Y_n` at level `j`, from the stored generators at the higher level.
fn reduction_map(from: &Subquotient, to: &Subquotient, degree: usize) -> ModuleMap {
    let ring = to.module.ring;
    let j = ring.k();
    let dom = DiagModule::new(ring, from.module.exps.iter().map(|&e| e.min(j)).collect());
    let gens = from.gens.reduce_to(ring);
    let rows: Vec<Vec<u64>> =
        (0..gens.rows).map(|i| to.coords(gens.row(i)).expect("reduction lands in the Selmer group")).collect();
    let f = ModuleMap::new(dom, to.module.clone(), MatrixR::from_rows(ring, to.module.dim(), &rows))
        .expect("reduction is well defined");
    exterior_map(&f, degree)
}

fn reduce_section(inst: &SelmerInstance, from: &StarkModule, to: &StarkModule, s: &Section) -> Section {
    let values = to
        .hasse
        .list
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let src = from.hasse.index(n).expect("same vertices");
            let f = reduction_map(&from.relaxed[src], &to.relaxed[i], inst.r + nu(n));
            let x = f.dom.reduce(&s.values[src]);
            to.sheaf.stalks[i].reduce(&f.apply(&x))
        })
        .collect();
    Section { values }
}

fn restrict_section(from: &StarkModule, to: &StarkModule, s: &Section) -> Section {
    Section { values: to.hasse.list.iter().map(|&n| from.hasse.value(s, n).to_vec()).collect() }
}

/// The span of the given sections, as a fraction of the whole module.
fn spans(target: &StarkModule, sections: &[Section]) -> bool {
    let rows: Option<Vec<Vec<u64>>> = sections.iter().map(|s| target.gamma.coords(s)).collect();
    match rows {
        None => false,
        Some(rows) => {
            let m = target.gamma.module();
            let mat = MatrixR::from_rows(m.ring, m.dim(), &rows);
            Subquotient::of(m, &mat).module.length() == m.length()
        }
    }
}

pub fn tower_check(inst: &SelmerInstance) -> Result<TowerReport> {
    let top = inst.ring.k();
    let levels = inst.tower_levels();
    let reduced: Vec<SelmerInstance> = (1..=top).map(|j| inst.reduce(j)).collect::<Result<_>>()?;
    let mut cache: HashMap<(u32, Vertex), StarkModule> = HashMap::new();
    let mut module = |j: u32, active: Vertex| -> Result<StarkModule> {
        if let Some(m) = cache.get(&(j, active)) {
            return Ok(m.clone());
        }
        let m = stark_module(&reduced[j as usize - 1], active)?;
        cache.insert((j, active), m.clone());
        Ok(m)
    };
    let p_top = levels[top as usize - 1];
    let top_module = module(top, p_top)?;
    let top_gen = top_module.generator();
    let mut stages = Vec::new();
    for j in 1..=top {
        let inst_j = &reduced[j as usize - 1];
        let p_j = levels[j as usize - 1];
        let here = module(j, p_j)?;
        let free_rank_one = here.is_free_rank_one();
        let mut reduction_surjective = true;
        let mut restriction_iso = true;
        for kk in j + 1..=top {
            let p_k = levels[kk as usize - 1];
            let upper = module(kk, p_k)?;
            let lower = module(j, p_k)?;
            let images: Vec<Section> = upper
                .gamma
                .generators()
                .iter()
                .map(|s| reduce_section(&reduced[j as usize - 1], &upper, &lower, s))
                .collect();
            reduction_surjective &= spans(&lower, &images);
            let restricted: Vec<Section> =
                here.gamma.generators().iter().map(|s| restrict_section(&here, &lower, s)).collect();
            let rows: Option<Vec<Vec<u64>>> = restricted.iter().map(|s| lower.gamma.coords(s)).collect();
            restriction_iso &= match rows {
                None => false,
                Some(rows) => {
                    let cod = lower.gamma.module().clone();
                    ModuleMap::new(here.gamma.module().clone(), cod.clone(), MatrixR::from_rows(cod.ring, cod.dim(), &rows))
                        .map(|f| f.is_iso())
                        .unwrap_or(false)
                }
            };
        }
        let generator_persists = match &top_gen {
            None => false,
            Some(g) => {
                let at_j = module(j, p_top)?;
                let red = reduce_section(inst_j, &top_module, &at_j, g);
                at_j.is_free_rank_one() && spans(&at_j, &[red])
            }
        };
        let (profile_laws, stub_free_rank_one, transform_generates) = match here.generator() {
            None => (false, false, false),
            Some(g) => {
                let laws = invariant_profile(&here.hasse, &here.sheaf.stalks, &g).laws_hold();
                let km = kolyvagin_modules(inst_j, p_j)?;
                let stub_ok = km.ks_stub.module().exps == [j];
                let kappa = pi_transform(inst_j, &here, &g, &km.selmer)?;
                let gen_ok = km.full_to_stub(&kappa).and_then(|s| km.ks_stub.coords(&s)).is_some_and(|c| {
                    c.len() == 1 && inst_j.ring.is_unit(c[0])
                });
                (laws, stub_ok, gen_ok)
            }
        };
        stages.push(StageReport {
            level: j,
            active: inst.labels(p_j),
            free_rank_one,
            reduction_surjective,
            restriction_iso,
            generator_persists,
            profile_laws,
            stub_free_rank_one,
            transform_generates,
        });
    }
    Ok(TowerReport { top, levels: inst.primes.iter().map(|q| q.level).collect(), stages })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selmer_instance::{generate_instance, GenParams};

    #[test]
    fn tower_with_uniform_levels() {
        let inst = generate_instance(&GenParams { p: 3, k: 3, r: 1, m: 3, e: vec![2], seed: 1, levels: None }).unwrap();
        let rep = tower_check(&inst).unwrap();
        assert!(rep.passed(), "{rep:#?}");
        assert_eq!(rep.stages.len(), 3);
    }

    #[test]
    fn tower_with_shrinking_prime_sets() {
        let inst = generate_instance(&GenParams {
            p: 2,
            k: 2,
            r: 1,
            m: 4,
            e: vec![1],
            seed: 3,
            levels: Some(vec![2, 2, 1, 2]),
        })
        .unwrap();
        assert_eq!(inst.tower_levels(), vec![0b1111, 0b1011]);
        let rep = tower_check(&inst).unwrap();
        assert!(rep.passed(), "{rep:#?}");
    }
}
