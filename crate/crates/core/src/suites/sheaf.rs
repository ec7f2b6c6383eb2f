//! Locally cyclic sheaves with a hub: evaluation at hubs, monodromy and generator propagation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::appendix::random_ring;
use super::{SuiteReport, Tally};
use crate::graph_sheaf::{cyclic_sheaf, Graph, SheafOnGraph};
use crate::ring_linalg::ResidueRing;

fn random_unit(ring: ResidueRing, rng: &mut ChaCha8Rng) -> u64 {
    loop {
        let u = rng.gen_range(1..ring.modulus());
        if ring.is_unit(u) {
            return u;
        }
    }
}

/// A sheaf on a random connected graph for which vertex 0 is a hub.
///
/// Stalk exponents decrease along a spanning tree rooted at 0, so each tree edge is an isomorphism
/// at the child. Scalars are chosen so that a fixed unit at each vertex is a section; with
/// `twist` one extra edge is multiplied by a unit that is not 1 modulo its module.
pub fn hub_sheaf(ring: ResidueRing, n: usize, twist: bool, rng: &mut ChaCha8Rng) -> (SheafOnGraph, bool) {
    let k = ring.k();
    let mut exps = vec![k; n];
    let mut edges = Vec::new();
    let mut edge_exps = Vec::new();
    for w in 1..n {
        let parent = rng.gen_range(0..w);
        exps[w] = rng.gen_range(exps[parent].saturating_sub(1).max(1)..=exps[parent]);
        edges.push((parent, w));
        edge_exps.push(exps[w]);
    }
    let extra = rng.gen_range(0..=n);
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b || edges.contains(&(a, b)) || edges.contains(&(b, a)) {
            continue;
        }
        edges.push((a, b));
        edge_exps.push(rng.gen_range(1..=exps[a].min(exps[b])));
    }
    if twist && edges.len() == n - 1 {
        let adjacent = |a: usize, b: usize| edges.contains(&(a, b)) || edges.contains(&(b, a));
        if let Some((a, b)) = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).find(|&(a, b)| !adjacent(a, b)) {
            edges.push((a, b));
            edge_exps.push(exps[a].min(exps[b]));
        }
    }
    let gens: Vec<u64> = (0..n).map(|_| random_unit(ring, rng)).collect();
    let mut scalars: Vec<(u64, u64)> = edges
        .iter()
        .map(|&(a, b)| {
            let u = random_unit(ring, rng);
            (ring.mul(u, ring.inv(gens[a]).unwrap()), ring.mul(u, ring.inv(gens[b]).unwrap()))
        })
        .collect();
    let mut twisted = false;
    if twist {
        let candidates: Vec<usize> = (n - 1..edges.len())
            .filter(|&e| ring.p() > 2 || edge_exps[e] >= 2)
            .collect();
        if let Some(&e) = candidates.get(rng.gen_range(0..candidates.len().max(1))) {
            let c = edge_exps[e];
            let modc = ring.pow_big(c);
            let t = loop {
                let t = random_unit(ring, rng);
                if t % modc != 1 % modc {
                    break t;
                }
            };
            scalars[e].1 = ring.mul(scalars[e].1, t);
            twisted = true;
        }
    }
    let labels = (0..n).map(|i| format!("v{i}")).collect();
    let graph = Graph::new(labels, edges).unwrap();
    (cyclic_sheaf(ring, graph, &exps, &edge_exps, &scalars).unwrap(), twisted)
}

fn sheaf_case(ring: ResidueRing, rng: &mut ChaCha8Rng, t: &mut Tally) -> Option<bool> {
    let n = rng.gen_range(3..=7);
    let (sh, twisted) = hub_sheaf(ring, n, rng.gen_bool(0.5), rng);
    let label = format!("n={n} edges={:?} mod {}", sh.graph.edges, ring.modulus());
    if !t.check(sh.is_locally_cyclic(), || format!("{label}: not locally cyclic")) {
        return None;
    }
    let hubs = sh.hubs().unwrap();
    t.check(hubs.contains(&0), || format!("{label}: vertex 0 is not a hub"));
    let trivial = sh.has_trivial_monodromy().unwrap();
    t.check(trivial != twisted, || format!("{label}: twist {twisted} but trivial monodromy {trivial}"));
    let gamma = sh.global_sections();
    for &v in &hubs {
        let f = gamma.evaluation(&sh, v);
        t.check(f.is_injective(), || format!("{label}: evaluation at hub {v} not injective"));
        t.check(f.is_surjective() == trivial, || format!("{label}: evaluation at hub {v} surjective iff trivial"));
    }
    let primitive = gamma.generators().iter().any(|s| sh.is_primitive(s));
    t.check(primitive == trivial, || format!("{label}: primitive section exists iff trivial monodromy"));
    for s in gamma.generators() {
        t.check(sh.propagation_holds(&s), || format!("{label}: generator index does not propagate"));
    }
    if trivial {
        for i in 0..=ring.k() {
            let x = vec![ring.pow_p(i)];
            match sh.section_from_stalk(0, &x) {
                Ok(s) => {
                    t.check(sh.is_section(&s), || format!("{label}: transported tuple is not a section"));
                    t.check(sh.propagation_holds(&s), || format!("{label}: propagation from p^{i}"));
                }
                Err(e) => t.fail(format!("{label}: {e}")),
            }
        }
    } else {
        t.check(sh.section_from_stalk(0, &[1]).is_err(), || format!("{label}: section despite monodromy"));
    }
    Some(trivial)
}

pub fn run(seed: u64, cases: usize) -> SuiteReport {
    let results: Vec<(Tally, Option<bool>)> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0xd1b5_4a32_d192_ed03));
            let ring = random_ring(&mut rng);
            let mut t = Tally { cases: 1, ..Default::default() };
            let class = sheaf_case(ring, &mut rng, &mut t);
            (t, class)
        })
        .collect();
    let mut total = Tally::default();
    let (mut trivial, mut nontrivial) = (0, 0);
    for (t, class) in results {
        total.merge(t);
        match class {
            Some(true) => trivial += 1,
            Some(false) => nontrivial += 1,
            None => {}
        }
    }
    total.check(trivial > 0 && nontrivial > 0, || {
        format!("only one monodromy class: {trivial} trivial, {nontrivial} nontrivial")
    });
    total.note(format!("{trivial} sheaves with trivial monodromy, {nontrivial} without"));
    total.finish(2, "sheaf: hubs, evaluation maps and monodromy")
}

#[cfg(test)]
mod tests {
    #[test]
    fn small_run_passes() {
        let rep = super::run(3, 60);
        assert!(rep.passed, "{rep:#?}");
        println!("{} {:?}", rep.line(), rep.notes);
    }
}
