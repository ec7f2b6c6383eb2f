//! Stark systems, the Selmer sheaf and its stub subsheaf, Kolyvagin systems, the transform
//! between them, vanishing-order invariants and structure recovery.

pub mod kolyvagin;
pub mod profile;
pub mod stark;
pub mod tower;

use std::collections::HashMap;

pub use kolyvagin::{
    edge_maps, kolyvagin_modules, pi_map, pi_transform, remark_section, selmer_sheaf, selmer_stalk,
    transverse_module, KolyvaginModules, SelmerSheaf, StubSheaf,
};
pub use profile::{expected_dphi, invariant_profile, recover_structure, InvariantProfile};
pub use stark::{psi_map, psi_map_ordered, relaxed_module, stark_module, stark_stalk, StarkModule};
pub use tower::{tower_check, StageReport, TowerReport};

use crate::graph_sheaf::{Graph, Section};
use crate::selmer_instance::{prime_indices, vertices, SelmerInstance, Vertex};

/// The vertices built from a set of active primes, with edges joining `n` to `nq`.
#[derive(Clone, Debug)]
pub struct Hasse {
    pub active: Vertex,
    pub list: Vec<Vertex>,
    pub graph: Graph,
    /// The prime added along each edge.
    pub edge_primes: Vec<usize>,
    pos: HashMap<Vertex, usize>,
    edge_pos: HashMap<(Vertex, usize), usize>,
}

impl Hasse {
    pub fn new(inst: &SelmerInstance, active: Vertex) -> Self {
        let list = vertices(active);
        let pos: HashMap<Vertex, usize> = list.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let mut edges = Vec::new();
        let mut edge_primes = Vec::new();
        let mut edge_pos = HashMap::new();
        for &n in &list {
            for q in prime_indices(active & !n) {
                edge_pos.insert((n, q), edges.len());
                edges.push((pos[&n], pos[&(n | 1 << q)]));
                edge_primes.push(q);
            }
        }
        let labels = list.iter().map(|&n| inst.vertex_name(n)).collect();
        let graph = Graph::new(labels, edges).expect("Hasse graph is simple");
        Hasse { active, list, graph, edge_primes, pos, edge_pos }
    }

    pub fn index(&self, n: Vertex) -> Option<usize> {
        self.pos.get(&n).copied()
    }

    /// The edge joining `n` (prime to `q`) and `nq`.
    pub fn edge(&self, n: Vertex, q: usize) -> Option<usize> {
        self.edge_pos.get(&(n, q)).copied()
    }

    /// Lower endpoint and prime of an edge.
    pub fn edge_ends(&self, e: usize) -> (Vertex, usize) {
        (self.list[self.graph.edges[e].0], self.edge_primes[e])
    }

    pub fn value<'a>(&self, s: &'a Section, n: Vertex) -> &'a [u64] {
        &s.values[self.pos[&n]]
    }
}
