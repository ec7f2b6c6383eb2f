//! Stark systems, stub Kolyvagin systems and the transform between them on random instances.

use rayon::prelude::*;

use super::{case_rng, random_params, params_label, SuiteReport, Tally};
use crate::error::Result;
use crate::ring_linalg::{MatrixR, Subquotient};
use crate::selmer_instance::{generate_instance, nu, vertices, SelmerInstance};
use crate::systems::{kolyvagin_modules, pi_transform, stark_module};

/// Every check on one instance; errors from the construction count as failures.
pub fn main_checks(inst: &SelmerInstance, label: &str, t: &mut Tally) -> Result<()> {
    let ring = inst.ring;
    let k = ring.k();
    let all = inst.all_primes();
    let ss = stark_module(inst, all)?;
    t.check(ss.is_free_rank_one(), || format!("{label}: SS is {:?}", ss.gamma.module().exps));
    for &n in &ss.hasse.list {
        let stalk = ss.stalk(n);
        let image = ss.projection(n).image();
        let scaled = MatrixR::identity(ring, stalk.dim()).scale(ring.pow_p(inst.mu(n)));
        t.check(image.a == Subquotient::of(stalk, &scaled).a, || {
            format!("{label}: projection at {} is not m^mu Y", inst.vertex_name(n))
        });
    }

    let km = kolyvagin_modules(inst, all)?;
    let stub = &km.stub.sheaf;
    t.check(stub.is_locally_cyclic(), || format!("{label}: stub sheaf is not locally cyclic"));
    let core = inst.core_vertices(all);
    t.check(!core.is_empty(), || format!("{label}: no core vertex"));
    for &c in &core {
        let i = km.hasse().index(c).unwrap();
        t.check(stub.is_hub(i).unwrap_or(false), || format!("{label}: core vertex {} is not a hub", inst.vertex_name(c)));
    }
    t.check(stub.has_trivial_monodromy().unwrap_or(false), || format!("{label}: nontrivial monodromy"));
    t.check(km.ks_stub.module().exps == [k], || format!("{label}: KS' is {:?}", km.ks_stub.module().exps));

    if let Some(g) = ss.generator() {
        let kappa = pi_transform(inst, &ss, &g, &km.selmer)?;
        t.check(km.selmer.sheaf.is_section(&kappa), || format!("{label}: transform is not edge compatible"));
        let coords = km.full_to_stub(&kappa).and_then(|s| km.ks_stub.coords(&s));
        t.check(coords.is_some(), || format!("{label}: transform leaves the stub sheaf"));
        t.check(coords.is_some_and(|c| c.len() == 1 && ring.is_unit(c[0])), || {
            format!("{label}: transform does not send a generator to a generator")
        });
    }

    if let Some(&c0) = core.first() {
        let i0 = km.hasse().index(c0).unwrap();
        for &c in &core[1..] {
            let path = inst.core_path(c0, c, all);
            t.check(path.is_ok(), || format!("{label}: no core path to {}", inst.vertex_name(c)));
            let j = km.hasse().index(c).unwrap();
            let via_sheaf = stub.surjective_paths(i0, j, 1).map(|p| !p.is_empty()).unwrap_or(false);
            t.check(via_sheaf, || format!("{label}: no surjective path to {}", inst.vertex_name(c)));
        }
    }

    let min_core = core.iter().map(|&n| nu(n)).min();
    let nonzero = inst.dual_structure().len();
    t.check(min_core == Some(nonzero), || format!("{label}: min core nu {min_core:?} vs {nonzero} targets"));
    t.check(vertices(all).len() == ss.hasse.list.len(), || format!("{label}: vertex count"));
    Ok(())
}

pub fn run(seed: u64, cases: usize) -> SuiteReport {
    let tallies: Vec<Tally> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let mut rng = case_rng(seed, i);
            let params = random_params(&mut rng, 1, 3, 4);
            let label = params_label(&params);
            let mut t = Tally { cases: 1, ..Default::default() };
            match generate_instance(&params) {
                Ok(inst) => {
                    if let Err(err) = main_checks(&inst, &label, &mut t) {
                        t.fail(format!("{label}: {err}"));
                    }
                }
                Err(err) => t.fail(format!("{label}: generation failed: {err}")),
            }
            t
        })
        .collect();
    let mut total = Tally::default();
    for t in tallies {
        total.merge(t);
    }
    total.finish(5, "main theorem: SS and KS' free of rank one, transform iso")
}

#[cfg(test)]
mod tests {
    #[test]
    fn small_run_passes() {
        let rep = super::run(11, 6);
        assert!(rep.passed, "{rep:#?}");
    }
}
