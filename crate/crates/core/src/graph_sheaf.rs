//! Sheaves of R-modules on finite graphs.
//!
//! Stalks and edge modules are diagonal modules; any presented module can be brought to this form
//! with [`crate::PresentedModule::diagonalize`].

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ring_linalg::{preimage, DiagModule, MatrixR, ModuleMap, ResidueRing, Submodule, Subquotient};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Graph {
    pub vertices: Vec<String>,
    /// Unordered pairs of vertex indices; the stored order fixes the orientation of the difference map.
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(vertices: Vec<String>, edges: Vec<(usize, usize)>) -> Result<Self> {
        for &(a, b) in &edges {
            if a >= vertices.len() || b >= vertices.len() {
                return Err(Error::Input(format!("edge ({a}, {b}) has an unknown endpoint")));
            }
            if a == b {
                return Err(Error::Input(format!("loop at vertex {}", vertices[a])));
            }
        }
        Ok(Graph { vertices, edges })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == label)
    }

    /// `(edge, other endpoint)` for every edge at `v`.
    pub fn incident(&self, v: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().enumerate().filter_map(move |(e, &(a, b))| {
            if a == v {
                Some((e, b))
            } else if b == v {
                Some((e, a))
            } else {
                None
            }
        })
    }
}

#[derive(Clone, Debug)]
pub struct SheafOnGraph {
    pub graph: Graph,
    pub stalks: Vec<DiagModule>,
    pub edge_modules: Vec<DiagModule>,
    /// For edge `(a, b)`: the maps from the stalks at `a` and at `b`.
    pub maps: Vec<(ModuleMap, ModuleMap)>,
}

/// One element per vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Section {
    pub values: Vec<Vec<u64>>,
}

/// Two surjective paths from `source` whose transports disagree, either at a common endpoint
/// (`edge = None`) or after mapping into the module of an edge joining the endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonodromyWitness {
    pub source: usize,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub edge: Option<usize>,
}

/// `x` generates `p^i m`.
pub fn generates(m: &DiagModule, x: &[u64], i: u32) -> bool {
    let ring = m.ring;
    let rel = m.relations();
    let span = Submodule::from_rows(ring, m.dim(), &[x.to_vec()]).sum(&rel);
    let target = Submodule::full(ring, m.dim()).scale(ring.pow_p(i)).sum(&rel);
    span == target
}

fn invert_cyclic_iso(f: &ModuleMap) -> ModuleMap {
    if f.dom.dim() == 0 {
        return ModuleMap::zero(f.cod.clone(), f.dom.clone());
    }
    let ring = f.dom.ring;
    let u = ring.inv(f.mat[(0, 0)]).expect("iso of cyclic modules has a unit entry");
    ModuleMap::new(f.cod.clone(), f.dom.clone(), MatrixR::from_rows(ring, 1, &[vec![u]])).unwrap()
}

/// Transport maps from a fixed source, with one path realising each.
struct Transports {
    /// Per vertex: distinct transport maps and a path realising each.
    maps: Vec<Vec<(ModuleMap, Vec<usize>)>>,
}

impl SheafOnGraph {
    pub fn new(
        graph: Graph,
        stalks: Vec<DiagModule>,
        edge_modules: Vec<DiagModule>,
        maps: Vec<(ModuleMap, ModuleMap)>,
    ) -> Result<Self> {
        if stalks.len() != graph.len() || edge_modules.len() != graph.edges.len() || maps.len() != graph.edges.len() {
            return Err(Error::Dimension("sheaf data does not match the graph".into()));
        }
        for (e, &(a, b)) in graph.edges.iter().enumerate() {
            let (fa, fb) = &maps[e];
            if fa.dom != stalks[a] || fb.dom != stalks[b] || fa.cod != edge_modules[e] || fb.cod != edge_modules[e] {
                return Err(Error::Dimension(format!("maps at edge {e} have the wrong source or target")));
            }
        }
        Ok(SheafOnGraph { graph, stalks, edge_modules, maps })
    }

    pub fn ring(&self) -> ResidueRing {
        self.stalks.first().or(self.edge_modules.first()).map(|m| m.ring).expect("sheaf on the empty graph")
    }

    /// The map from the stalk at `v` to the module of edge `e`.
    pub fn map_at(&self, e: usize, v: usize) -> &ModuleMap {
        let (a, _) = self.graph.edges[e];
        if v == a {
            &self.maps[e].0
        } else {
            &self.maps[e].1
        }
    }

    fn offsets(mods: &[DiagModule]) -> Vec<usize> {
        let mut out = vec![0];
        for m in mods {
            out.push(out.last().unwrap() + m.dim());
        }
        out
    }

    fn direct_sum(mods: &[DiagModule], ring: ResidueRing) -> DiagModule {
        DiagModule::new(ring, mods.iter().flat_map(|m| m.exps.iter().copied()).collect())
    }

    /// Oriented difference map: `(x_v) -> (psi_a(x_a) - psi_b(x_b))_e` for `e = (a, b)`.
    pub fn difference_map(&self) -> ModuleMap {
        let ring = self.ring();
        let vo = Self::offsets(&self.stalks);
        let eo = Self::offsets(&self.edge_modules);
        let mut d = MatrixR::zeros(ring, vo[self.stalks.len()], eo[self.edge_modules.len()]);
        for (e, &(a, b)) in self.graph.edges.iter().enumerate() {
            for (v, f, neg) in [(a, &self.maps[e].0, false), (b, &self.maps[e].1, true)] {
                for i in 0..f.mat.rows {
                    for j in 0..f.mat.cols {
                        let x = if neg { ring.neg(f.mat[(i, j)]) } else { f.mat[(i, j)] };
                        d[(vo[v] + i, eo[e] + j)] = ring.add(d[(vo[v] + i, eo[e] + j)], x);
                    }
                }
            }
        }
        ModuleMap::new(Self::direct_sum(&self.stalks, ring), Self::direct_sum(&self.edge_modules, ring), d)
            .expect("difference of well-defined maps")
    }

    pub fn global_sections(&self) -> GlobalSections {
        let ring = self.ring();
        let total = Self::direct_sum(&self.stalks, ring);
        let cod = Self::direct_sum(&self.edge_modules, ring);
        let d = self.difference_map();
        let ker = preimage(&d.mat, Some(&cod.relations()));
        GlobalSections { sub: Subquotient::new(ker.basis(), &total.relations()), offsets: Self::offsets(&self.stalks) }
    }

    pub fn is_section(&self, s: &Section) -> bool {
        s.values.len() == self.stalks.len()
            && self.graph.edges.iter().enumerate().all(|(e, &(a, b))| {
                let m = &self.edge_modules[e];
                m.reduce(&self.maps[e].0.apply(&s.values[a])) == m.reduce(&self.maps[e].1.apply(&s.values[b]))
            })
    }

    pub fn is_locally_cyclic(&self) -> bool {
        self.stalks.iter().chain(&self.edge_modules).all(DiagModule::is_cyclic)
            && self.maps.iter().all(|(f, g)| f.is_surjective() && g.is_surjective())
    }

    fn require_locally_cyclic(&self) -> Result<()> {
        if self.is_locally_cyclic() {
            Ok(())
        } else {
            Err(Error::NotLocallyCyclic("path operations need cyclic modules and surjective maps".into()))
        }
    }

    /// Steps `v -> w` along edge `e` allowed in a surjective path: the map at `w` is an isomorphism.
    fn surjective_steps(&self) -> Vec<Vec<(usize, usize)>> {
        let iso: Vec<(bool, bool)> = self.maps.iter().map(|(f, g)| (f.is_iso(), g.is_iso())).collect();
        (0..self.graph.len())
            .map(|v| {
                self.graph
                    .incident(v)
                    .filter(|&(e, w)| if w == self.graph.edges[e].0 { iso[e].0 } else { iso[e].1 })
                    .collect()
            })
            .collect()
    }

    fn step_map(&self, e: usize, from: usize, to: usize) -> ModuleMap {
        self.map_at(e, from).then(&invert_cyclic_iso(self.map_at(e, to))).unwrap()
    }

    /// All transport maps out of `source`, closed under surjective steps (paths may revisit vertices).
    fn transports(&self, source: usize, steps: &[Vec<(usize, usize)>]) -> Transports {
        let n = self.graph.len();
        let mut maps: Vec<Vec<(ModuleMap, Vec<usize>)>> = vec![vec![]; n];
        let mut seen: HashMap<(usize, Vec<u64>), ()> = HashMap::new();
        let id = self.stalks[source].identity();
        seen.insert((source, id.mat.row_vecs().concat()), ());
        maps[source].push((id, vec![source]));
        let mut queue = VecDeque::from([(source, 0usize)]);
        while let Some((v, idx)) = queue.pop_front() {
            let (phi, path) = maps[v][idx].clone();
            for &(e, w) in &steps[v] {
                let next = phi.then(&self.step_map(e, v, w)).unwrap();
                if seen.insert((w, next.mat.row_vecs().concat()), ()).is_none() {
                    let mut p = path.clone();
                    p.push(w);
                    maps[w].push((next, p));
                    queue.push_back((w, maps[w].len() - 1));
                }
            }
        }
        Transports { maps }
    }

    /// Simple surjective paths from `v` to `w`, at most `limit` of them.
    pub fn surjective_paths(&self, v: usize, w: usize, limit: usize) -> Result<Vec<Vec<usize>>> {
        self.require_locally_cyclic()?;
        let steps = self.surjective_steps();
        let mut out = Vec::new();
        let mut path = vec![v];
        let mut on_path = vec![false; self.graph.len()];
        on_path[v] = true;
        fn dfs(
            steps: &[Vec<(usize, usize)>],
            w: usize,
            limit: usize,
            path: &mut Vec<usize>,
            on_path: &mut [bool],
            out: &mut Vec<Vec<usize>>,
        ) {
            let u = *path.last().unwrap();
            if u == w {
                out.push(path.clone());
                return;
            }
            for &(_, x) in &steps[u] {
                if out.len() >= limit {
                    return;
                }
                if !on_path[x] {
                    on_path[x] = true;
                    path.push(x);
                    dfs(steps, w, limit, path, on_path, out);
                    path.pop();
                    on_path[x] = false;
                }
            }
        }
        dfs(&steps, w, limit, &mut path, &mut on_path, &mut out);
        Ok(out)
    }

    /// Transport along a surjective path.
    pub fn path_map(&self, path: &[usize]) -> Result<ModuleMap> {
        self.require_locally_cyclic()?;
        let mut acc = self.stalks[path[0]].identity();
        for pair in path.windows(2) {
            let (v, w) = (pair[0], pair[1]);
            let e = self
                .graph
                .incident(v)
                .find(|&(e, x)| x == w && self.map_at(e, w).is_iso())
                .map(|(e, _)| e)
                .ok_or_else(|| Error::Input(format!("no surjective step {v} -> {w}")))?;
            acc = acc.then(&self.step_map(e, v, w))?;
        }
        Ok(acc)
    }

    pub fn is_hub(&self, v: usize) -> Result<bool> {
        self.require_locally_cyclic()?;
        let steps = self.surjective_steps();
        let mut seen = vec![false; self.graph.len()];
        seen[v] = true;
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            for &(_, w) in &steps[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        Ok(seen.into_iter().all(|s| s))
    }

    pub fn hubs(&self) -> Result<Vec<usize>> {
        (0..self.graph.len()).filter_map(|v| self.is_hub(v).map(|h| h.then_some(v)).transpose()).collect()
    }

    /// `Ok(None)` for trivial monodromy, otherwise a witness.
    pub fn monodromy_witness(&self) -> Result<Option<MonodromyWitness>> {
        self.require_locally_cyclic()?;
        let steps = self.surjective_steps();
        for source in 0..self.graph.len() {
            let t = self.transports(source, &steps);
            for list in &t.maps {
                if list.len() > 1 {
                    return Ok(Some(MonodromyWitness {
                        source,
                        left: list[0].1.clone(),
                        right: list[1].1.clone(),
                        edge: None,
                    }));
                }
            }
            for (e, &(a, b)) in self.graph.edges.iter().enumerate() {
                for (fa, pa) in &t.maps[a] {
                    for (fb, pb) in &t.maps[b] {
                        if fa.then(&self.maps[e].0).unwrap().mat != fb.then(&self.maps[e].1).unwrap().mat {
                            return Ok(Some(MonodromyWitness {
                                source,
                                left: pa.clone(),
                                right: pb.clone(),
                                edge: Some(e),
                            }));
                        }
                    }
                }
            }
        }
        Ok(None)
    }

    pub fn has_trivial_monodromy(&self) -> Result<bool> {
        Ok(self.monodromy_witness()?.is_none())
    }

    /// The global section with value `x` at the hub `v`, obtained by transport.
    pub fn section_from_stalk(&self, v: usize, x: &[u64]) -> Result<Section> {
        if !self.is_hub(v)? {
            return Err(Error::Input(format!("vertex {} is not a hub", self.graph.vertices[v])));
        }
        if let Some(w) = self.monodromy_witness()? {
            return Err(Error::NontrivialMonodromy(format!(
                "paths {:?} and {:?} from {} disagree",
                w.left, w.right, self.graph.vertices[w.source]
            )));
        }
        let t = self.transports(v, &self.surjective_steps());
        let values = t.maps.iter().map(|list| list[0].0.apply(x)).collect();
        let s = Section { values };
        debug_assert!(self.is_section(&s));
        Ok(s)
    }

    /// Every section is primitive: its value generates each stalk.
    pub fn is_primitive(&self, s: &Section) -> bool {
        self.stalks.iter().zip(&s.values).all(|(m, x)| generates(m, x, 0))
    }

    /// If some value generates `p^i` of its stalk, every value does.
    pub fn propagation_holds(&self, s: &Section) -> bool {
        let k = self.ring().k();
        (0..k).all(|i| {
            let at: Vec<bool> =
                self.stalks.iter().zip(&s.values).map(|(m, x)| !m.is_zero(x) && generates(m, x, i)).collect();
            !at.iter().any(|&b| b) || self.stalks.iter().zip(&s.values).all(|(m, x)| generates(m, x, i))
        })
    }
}

/// Global sections as a submodule of the direct sum of the stalks.
#[derive(Clone, Debug)]
pub struct GlobalSections {
    pub sub: Subquotient,
    offsets: Vec<usize>,
}

impl GlobalSections {
    pub fn module(&self) -> &DiagModule {
        &self.sub.module
    }

    fn split(&self, flat: &[u64]) -> Section {
        Section { values: self.offsets.windows(2).map(|w| flat[w[0]..w[1]].to_vec()).collect() }
    }

    pub fn section(&self, coords: &[u64]) -> Section {
        self.split(&self.sub.lift(coords))
    }

    pub fn coords(&self, s: &Section) -> Option<Vec<u64>> {
        self.sub.coords(&s.values.concat())
    }

    pub fn generators(&self) -> Vec<Section> {
        (0..self.sub.gens.rows).map(|i| self.split(self.sub.gens.row(i))).collect()
    }

    /// Evaluation at `v`.
    pub fn evaluation(&self, sh: &SheafOnGraph, v: usize) -> ModuleMap {
        let ring = sh.ring();
        let (lo, hi) = (self.offsets[v], self.offsets[v + 1]);
        let rows: Vec<Vec<u64>> = (0..self.sub.gens.rows).map(|i| self.sub.gens.row(i)[lo..hi].to_vec()).collect();
        ModuleMap::new(self.module().clone(), sh.stalks[v].clone(), MatrixR::from_rows(ring, hi - lo, &rows))
            .expect("evaluation is well defined")
    }
}

/// Sheaf whose stalks and edge modules are `R/p^{e}` and whose maps are multiplication by scalars.
pub fn cyclic_sheaf(
    ring: ResidueRing,
    graph: Graph,
    stalk_exps: &[u32],
    edge_exps: &[u32],
    scalars: &[(u64, u64)],
) -> Result<SheafOnGraph> {
    let module = |e: u32| if e == 0 { DiagModule::new(ring, vec![]) } else { DiagModule::new(ring, vec![e]) };
    let stalks: Vec<DiagModule> = stalk_exps.iter().map(|&e| module(e)).collect();
    let edge_modules: Vec<DiagModule> = edge_exps.iter().map(|&e| module(e)).collect();
    let scalar = |dom: &DiagModule, cod: &DiagModule, c: u64| {
        let rows: Vec<Vec<u64>> = (0..dom.dim()).map(|_| vec![c; cod.dim()]).collect();
        ModuleMap::new(dom.clone(), cod.clone(), MatrixR::from_rows(ring, cod.dim(), &rows))
    };
    let mut maps = Vec::new();
    for (e, &(a, b)) in graph.edges.iter().enumerate() {
        let (ca, cb) = scalars[e];
        maps.push((scalar(&stalks[a], &edge_modules[e], ca)?, scalar(&stalks[b], &edge_modules[e], cb)?));
    }
    SheafOnGraph::new(graph, stalks, edge_modules, maps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suites::brute;

    fn ring(p: u64, k: u32) -> ResidueRing {
        ResidueRing::new(p, k).unwrap()
    }

    fn graph(n: usize, edges: &[(usize, usize)]) -> Graph {
        Graph::new((0..n).map(|i| format!("v{i}")).collect(), edges.to_vec()).unwrap()
    }

    /// Compatible tuples by enumeration of the full product.
    fn enumerate_sections(sh: &SheafOnGraph) -> Vec<Section> {
        let mut out = vec![Section { values: vec![] }];
        for m in &sh.stalks {
            out = out
                .into_iter()
                .flat_map(|s| {
                    m.elements().into_iter().map(move |x| {
                        let mut t = s.clone();
                        t.values.push(x);
                        t
                    })
                })
                .collect();
        }
        out.into_iter().filter(|s| sh.is_section(s)).collect()
    }

    #[test]
    fn single_vertex() {
        let r = ring(3, 2);
        let sh = cyclic_sheaf(r, graph(1, &[]), &[2], &[], &[]).unwrap();
        assert_eq!(sh.global_sections().module().exps, vec![2]);
    }

    #[test]
    fn one_edge_identity_is_diagonal() {
        let r = ring(3, 2);
        let sh = cyclic_sheaf(r, graph(2, &[(0, 1)]), &[2, 2], &[2], &[(1, 1)]).unwrap();
        let g = sh.global_sections();
        assert_eq!(g.module().exps, vec![2]);
        let s = &g.generators()[0];
        assert_eq!(s.values[0], s.values[1]);
        assert!(sh.is_primitive(s));
    }

    #[test]
    fn three_cycle_matches_enumeration() {
        for (p, k) in [(2, 2), (3, 2), (2, 3)] {
            let r = ring(p, k);
            for twist in r.elements() {
                for exps in [[k, k, k], [k, 1, k], [1, 1, 1]] {
                    let ee = [exps[0].min(exps[1]), exps[1].min(exps[2]), exps[0].min(exps[2])];
                    let sh = cyclic_sheaf(r, graph(3, &[(0, 1), (1, 2), (0, 2)]), &exps, &ee, &[(1, 1), (1, 1), (1, twist)])
                        .unwrap();
                    let g = sh.global_sections();
                    let all = enumerate_sections(&sh);
                    assert_eq!(r.p().pow(g.module().length()) as usize, all.len(), "twist {twist} exps {exps:?}");
                    for s in &all {
                        assert!(g.coords(s).is_some());
                    }
                    let span = brute::span(
                        &DiagModule::new(r, exps.to_vec()),
                        &g.generators().iter().map(|s| s.values.concat()).collect::<Vec<_>>(),
                    );
                    assert_eq!(span.len(), all.len());
                }
            }
        }
    }

    #[test]
    fn tree_with_identities() {
        let r = ring(5, 2);
        let sh = cyclic_sheaf(r, graph(4, &[(0, 1), (1, 2), (1, 3)]), &[2; 4], &[2; 3], &[(1, 1); 3]).unwrap();
        assert!(sh.is_locally_cyclic());
        assert_eq!(sh.hubs().unwrap(), vec![0, 1, 2, 3]);
        assert!(sh.has_trivial_monodromy().unwrap());
        let s = sh.section_from_stalk(2, &[1]).unwrap();
        assert!(s.values.iter().all(|x| x == &vec![1]));
        let z = sh.section_from_stalk(0, &[0]).unwrap();
        assert!(z.values.iter().all(|x| x == &vec![0]));
    }

    #[test]
    fn opposite_parallel_paths_have_monodromy() {
        let r = ring(3, 2);
        let minus = r.neg(1);
        // v0 - v1 - v3 and v0 - v2 - v3, the second path transporting by -1
        let g = graph(4, &[(0, 1), (1, 3), (0, 2), (2, 3)]);
        let sh = cyclic_sheaf(r, g, &[2; 4], &[2; 4], &[(1, 1), (1, 1), (1, 1), (minus, 1)]).unwrap();
        let w = sh.monodromy_witness().unwrap().expect("witness");
        let (l, rr) = (sh.path_map(&w.left).unwrap(), sh.path_map(&w.right).unwrap());
        match w.edge {
            None => assert_ne!(l.mat, rr.mat),
            Some(e) => {
                let (a, b) = (*w.left.last().unwrap(), *w.right.last().unwrap());
                assert_ne!(l.then(sh.map_at(e, a)).unwrap().mat, rr.then(sh.map_at(e, b)).unwrap().mat);
            }
        }
        // direct oracle: the two transports to v3 are 1 and -1
        let p1 = sh.path_map(&[0, 1, 3]).unwrap();
        let p2 = sh.path_map(&[0, 2, 3]).unwrap();
        assert_eq!((p1.mat[(0, 0)], p2.mat[(0, 0)]), (1, minus));
        assert!(sh.section_from_stalk(0, &[1]).is_err());
        // the evaluation at a hub is injective but not surjective
        let gs = sh.global_sections();
        let f = gs.evaluation(&sh, 0);
        assert!(f.is_injective());
        assert!(!f.is_surjective());
    }

    #[test]
    fn unit_multiples_are_forced() {
        let r = ring(5, 1);
        let g = graph(3, &[(0, 1), (1, 2)]);
        let sh = cyclic_sheaf(r, g, &[1; 3], &[1; 2], &[(2, 3), (4, 2)]).unwrap();
        let s = sh.section_from_stalk(0, &[1]).unwrap();
        let all = enumerate_sections(&sh);
        let forced: Vec<&Section> = all.iter().filter(|t| t.values[0] == vec![1]).collect();
        assert_eq!(forced.len(), 1);
        assert_eq!(&s, forced[0]);
    }

    #[test]
    fn non_surjective_edge_is_never_used() {
        let r = ring(3, 2);
        // edge (1, 2) has map from v2 multiplication by 3
        let g = graph(3, &[(0, 1), (1, 2)]);
        let sh = cyclic_sheaf(r, g, &[2, 2, 2], &[2, 2], &[(1, 1), (1, 3)]).unwrap();
        assert!(!sh.is_locally_cyclic());
        assert!(sh.surjective_paths(0, 2, 10).is_err());
        let g = graph(3, &[(0, 1), (1, 2)]);
        let sh = cyclic_sheaf(r, g, &[2, 2, 1], &[2, 1], &[(1, 1), (1, 1)]).unwrap();
        assert!(sh.is_locally_cyclic());
        assert!(sh.surjective_paths(0, 2, 10).unwrap().len() == 1);
        assert!(sh.surjective_paths(2, 0, 10).unwrap().is_empty());
        assert!(sh.is_hub(0).unwrap());
        assert!(!sh.is_hub(2).unwrap());
    }

    #[test]
    fn propagation_of_generator_index() {
        let r = ring(3, 3);
        let g = graph(3, &[(0, 1), (1, 2)]);
        let sh = cyclic_sheaf(r, g, &[3, 3, 2], &[3, 2], &[(1, 1), (1, 1)]).unwrap();
        let s = sh.section_from_stalk(0, &[3]).unwrap();
        assert_eq!(s.values, vec![vec![3], vec![3], vec![3]]);
        assert!(sh.propagation_holds(&s));
        assert!(generates(&sh.stalks[2], &s.values[2], 1));
    }
}
