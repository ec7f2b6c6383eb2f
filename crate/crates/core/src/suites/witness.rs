//! Kolyvagin systems outside the stub submodule when `r >= 2`, and none when `r = 1`.

use rayon::prelude::*;

use super::{case_rng, random_params, params_label, SuiteReport, Tally};
use crate::error::Result;
use crate::selmer_instance::{generate_instance, GenParams, SelmerInstance};
use crate::systems::{kolyvagin_modules, remark_section, transverse_module};

/// Counterexample kind: a rank-one Kolyvagin system that is not stub.
pub const RANK_ONE_EQUALITY: &str = "rank-one system outside the stub submodule";

/// The section supported at `1` built from the exponent-one summands of `H_F`.
fn witness_checks(inst: &SelmerInstance, label: &str, t: &mut Tally) -> Result<()> {
    let k = inst.ring.k();
    let r = inst.r;
    let km = kolyvagin_modules(inst, inst.all_primes())?;
    let h = transverse_module(inst, 0).module;
    let mut want = vec![1; r];
    want.extend(vec![k; r]);
    let mut exps = h.exps.clone();
    exps.sort_unstable();
    t.check(exps == want, || format!("{label}: H_F(1) has exponents {:?}", h.exps));
    let kappa = remark_section(inst, &km.selmer, 0)?;
    let is_section = km.selmer.sheaf.is_section(&kappa);
    let in_stub = km.is_stub(&kappa);
    if r >= 2 {
        t.check(is_section && km.ks.coords(&kappa).is_some(), || format!("{label}: witness is not a Kolyvagin system"));
        t.check(!in_stub, || format!("{label}: witness lies in the stub submodule"));
        t.check(!km.stub_inclusion().is_surjective(), || format!("{label}: KS' -> KS is onto"));
    } else {
        t.check(!is_section || in_stub, || format!("{label}: rank-one witness outside the stub submodule"));
    }
    Ok(())
}

pub fn run(seed: u64, cases: usize) -> SuiteReport {
    let rings = [(2u64, 2u32), (3, 2), (5, 2), (2, 3), (3, 3), (5, 3)];
    let tallies: Vec<(Tally, Option<bool>)> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let mut rng = case_rng(seed, i);
            let mut t = Tally { cases: 1, ..Default::default() };
            let (p, k) = rings[i % rings.len()];
            // even cases: r = 2 witnesses; odd cases: r = 1, both with one-dimensional
            // exponent-one summands and random rank-one instances
            let r = if i % 2 == 0 { 2 } else { 1 };
            let params = GenParams { p, k, r, m: 4, e: vec![1; r], seed: seed ^ i as u64, levels: None };
            let label = params_label(&params);
            match generate_instance(&params) {
                Ok(inst) => {
                    if let Err(err) = witness_checks(&inst, &label, &mut t) {
                        t.fail(format!("{label}: {err}"));
                    }
                }
                Err(err) => t.fail(format!("{label}: generation failed: {err}")),
            }
            let mut equal = None;
            if r == 1 {
                let mut params = random_params(&mut rng, 1, 3, 4);
                params.r = 1;
                let label = params_label(&params);
                match generate_instance(&params).and_then(|inst| kolyvagin_modules(&inst, inst.all_primes())) {
                    Ok(km) => {
                        let iso = km.stub_inclusion().is_iso();
                        equal = Some(iso);
                        if iso {
                            t.check(true, String::new);
                        } else {
                            t.counterexample(
                                RANK_ONE_EQUALITY,
                                format!("{label}: KS' -> KS is not an isomorphism, KS = {:?}", km.ks.module().exps),
                            );
                        }
                    }
                    Err(err) => t.fail(format!("{label}: {err}")),
                };
            }
            (t, equal)
        })
        .collect();
    let mut total = Tally::default();
    let tried = tallies.iter().filter(|(_, e)| e.is_some()).count();
    let equal = tallies.iter().filter(|(_, e)| *e == Some(true)).count();
    for (t, _) in tallies {
        total.merge(t);
    }
    total.note(format!("KS' = KS on {equal} of {tried} random rank-one instances"));
    total.finish(7, "stub witness: KS strictly larger than KS' for r = 2, equal for r = 1")
}

#[cfg(test)]
mod tests {
    #[test]
    fn small_run_passes() {
        let rep = super::run(4, 4);
        assert!(rep.passed, "{rep:#?}");
    }
}
