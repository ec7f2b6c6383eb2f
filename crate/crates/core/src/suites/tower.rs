//! Finite stages of towers: reduction and restriction lemmas and persistence of primitivity.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use super::{case_rng, random_target, SuiteReport, Tally};
use crate::selmer_instance::{generate_instance, GenParams};
use crate::systems::tower_check;

/// Retries with fresh seeds when the rejection budget runs out for a level pattern.
const ATTEMPTS: usize = 4;

pub fn run(seed: u64, cases: usize) -> SuiteReport {
    let tallies: Vec<(Tally, usize)> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let mut rng = case_rng(seed, i);
            let mut t = Tally { cases: 1, ..Default::default() };
            let (p, top) = *[(2u64, 2u32), (3, 2), (5, 2), (2, 3), (3, 3), (5, 3)].choose(&mut rng).unwrap();
            let r = rng.gen_range(1..=2);
            let m = rng.gen_range(r.max(2)..=4);
            let mut levels: Vec<u32> = (0..m).map(|_| rng.gen_range(1..=top)).collect();
            // keep at least r + 1 primes at the top level so the top stage is nontrivial
            for l in levels.iter_mut().take(r + 1) {
                *l = top;
            }
            levels.shuffle(&mut rng);
            let e = random_target(&mut rng, top, r, m, 4);
            let mut retries = 0;
            let mut inst = None;
            for a in 0..ATTEMPTS {
                let params = GenParams { p, k: top, r, m, e: e.clone(), seed: rng.gen(), levels: Some(levels.clone()) };
                match generate_instance(&params) {
                    Ok(x) => {
                        inst = Some(x);
                        break;
                    }
                    Err(_) => retries = a + 1,
                }
            }
            let label = format!("p={p} K={top} r={r} m={m} e={e:?} levels={levels:?}");
            match inst {
                None => t.fail(format!("{label}: no valid tower within {ATTEMPTS} seeds")),
                Some(inst) => match tower_check(&inst) {
                    Ok(rep) => {
                        for st in &rep.stages {
                            t.check(st.free_rank_one, || format!("{label}: stage {} not free of rank one", st.level));
                            t.check(st.reduction_surjective, || format!("{label}: stage {} reduction not onto", st.level));
                            t.check(st.restriction_iso, || format!("{label}: stage {} restriction not iso", st.level));
                            t.check(st.generator_persists, || format!("{label}: stage {} loses the generator", st.level));
                            t.check(st.profile_laws, || format!("{label}: stage {} profile laws", st.level));
                            t.check(st.stub_free_rank_one && st.transform_generates, || {
                                format!("{label}: stage {} stub systems", st.level)
                            });
                        }
                    }
                    Err(err) => t.fail(format!("{label}: {err}")),
                },
            }
            (t, retries)
        })
        .collect();
    let mut total = Tally::default();
    let retried = tallies.iter().filter(|(_, r)| *r > 0).count();
    for (t, _) in tallies {
        total.merge(t);
    }
    total.note(format!("{retried} level patterns needed a second generator seed"));
    total.finish(8, "towers: reduction, restriction and primitivity across levels")
}

#[cfg(test)]
mod tests {
    #[test]
    fn small_run_passes() {
        let rep = super::run(8, 4);
        assert!(rep.passed, "{rep:#?}");
    }
}
