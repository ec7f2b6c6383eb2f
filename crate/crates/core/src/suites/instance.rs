//! Generated instances: validity over every small target profile, kernel identities of the
//! Selmer groups, and the dual-rank profile.

use rayon::prelude::*;

use super::{SuiteReport, Tally};
use crate::error::Error;
use crate::ring_linalg::{annihilator, DiagModule, ModuleMap, Submodule};
use crate::selmer_instance::{
    check_instance, generate_instance, local_pairing, nu, prime_indices, vertices, GenParams, SelmerInstance,
    SelmerPattern, Vertex,
};
use crate::systems::relaxed_module;

pub const PRIMES: [u64; 3] = [2, 3, 5];

/// Decreasing sequences with parts in `1..=max_part` and sum at most `max_sum`.
pub fn profiles(max_part: u32, max_sum: u32) -> Vec<Vec<u32>> {
    fn go(prefix: &mut Vec<u32>, cap: u32, left: u32, out: &mut Vec<Vec<u32>>) {
        out.push(prefix.clone());
        for part in (1..=cap.min(left)).rev() {
            prefix.push(part);
            go(prefix, part, left - part, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), max_part, max_sum, &mut out);
    out
}

/// Elements of `H` killed by the given coordinates, computed as a kernel of a map out of `H`.
fn kernel_of_coords(inst: &SelmerInstance, n: Vertex, coords: &[usize]) -> Submodule {
    let ring = inst.ring;
    let h = relaxed_module(inst, n);
    let f = ModuleMap::new(h.module.clone(), DiagModule::free(ring, coords.len()), h.gens.select_cols(coords))
        .expect("coordinate map");
    let ker = f.kernel();
    let lifted: Vec<Vec<u64>> = (0..ker.gens.rows).map(|i| h.lift(ker.gens.row(i))).collect();
    Submodule::from_rows(ring, 2 * inst.m(), &lifted)
}

/// Kernel identities, duality laws and the dual-rank profile on one valid instance.
pub fn instance_checks(inst: &SelmerInstance, e: &[u32], label: &str, t: &mut Tally) {
    let ring = inst.ring;
    let k = ring.k();
    let m = inst.m();
    let all = inst.all_primes();
    let x = inst.x();
    t.check(x.length() + inst.dual_x().length() == 2 * m as u32 * k, || format!("{label}: duality length law"));
    t.check(
        annihilator(inst.dual_x(), &local_pairing(ring, m)).map(|a| a == *x).unwrap_or(false),
        || format!("{label}: double annihilator"),
    );
    for n in vertices(all) {
        let primes = prime_indices(n);
        for mm in vertices(n) {
            let extra: Vec<usize> =
                prime_indices(n & !mm).into_iter().map(SelmerInstance::t_coord).collect();
            t.check(kernel_of_coords(inst, n, &extra) == inst.h_relaxed(mm), || {
                format!("{label}: exact sequence for m={} | n={}", inst.vertex_name(mm), inst.vertex_name(n))
            });
        }
        for &q in &primes {
            let rest = n & !(1 << q);
            t.check(kernel_of_coords(inst, n, &[SelmerInstance::t_coord(q)]) == inst.h_relaxed(rest), || {
                format!("{label}: transverse-localization kernel at n={} q={q}", inst.vertex_name(n))
            });
            let twisted = inst.selmer_group(&SelmerPattern::modified(m, rest, 0, 1 << q)).unwrap();
            t.check(kernel_of_coords(inst, n, &[SelmerInstance::f_coord(q)]) == twisted, || {
                format!("{label}: finite-localization kernel at n={} q={q}", inst.vertex_name(n))
            });
        }
        t.check(inst.lambda(n) == inst.h_transverse(n).length() - inst.r as u32 * k, || {
            format!("{label}: lambda length formula at {}", inst.vertex_name(n))
        });
        t.check(inst.mu(n) == inst.h_relaxed(n).length() - (inst.r + nu(n)) as u32 * k, || {
            format!("{label}: mu length formula at {}", inst.vertex_name(n))
        });
    }
    for tt in 0..=m {
        let at: Vec<Vertex> = vertices(all).into_iter().filter(|&n| nu(n) == tt).collect();
        let dl = at.iter().map(|&n| inst.lambda(n)).min().unwrap();
        let dm = at.iter().map(|&n| inst.mu(n)).min().unwrap();
        let want: u32 = e.iter().skip(tt).sum();
        t.check(dl == want && dm == want, || format!("{label}: dlambda({tt})={dl} dmu({tt})={dm} want {want}"));
    }
    let min_core = vertices(all).into_iter().filter(|&n| inst.is_core_vertex(n)).map(nu).min();
    t.check(min_core == Some(e.len()), || format!("{label}: min nu over core vertices {min_core:?}"));
    if k > 1 {
        let clamped: Vec<u32> = e.iter().map(|&x| x.min(1)).collect();
        t.check(inst.reduce(1).map(|r| r.dual_structure() == clamped).unwrap_or(false), || {
            format!("{label}: reduction to level 1 does not clamp the targets")
        });
    }
}

/// Every feasible `(k, r, m, e)` with `e_i <= k <= 3`, `sum e <= 4`, `m <= 4`, `r <= 2`.
pub fn profile_grid() -> Vec<(u32, usize, usize, Vec<u32>)> {
    let mut out = Vec::new();
    for k in 1..=3 {
        for r in 1..=2 {
            for m in r..=4 {
                for e in profiles(k, 4) {
                    out.push((k, r, m, e));
                }
            }
        }
    }
    out
}

pub fn run(seed: u64) -> SuiteReport {
    let grid = profile_grid();
    let results: Vec<(Tally, bool)> = grid
        .par_iter()
        .enumerate()
        .map(|(i, (k, r, m, e))| {
            let mut t = Tally::default();
            let p = PRIMES[i % PRIMES.len()];
            let params = GenParams { p, k: *k, r: *r, m: *m, e: e.clone(), seed: seed.wrapping_add(i as u64), levels: None };
            let label = format!("p={p} k={k} r={r} m={m} e={e:?}");
            let feasible = e.len() <= m - r;
            match generate_instance(&params) {
                Ok(inst) => {
                    t.cases += 1;
                    t.check(feasible, || format!("{label}: generated an instance for an infeasible target"));
                    let rep = check_instance(&inst, inst.all_primes());
                    t.check(rep.passed(), || format!("{label}: {:?}", rep.failures()));
                    t.check(inst.dual_structure() == *e, || format!("{label}: dual structure {:?}", inst.dual_structure()));
                    instance_checks(&inst, e, &label, &mut t);
                }
                Err(Error::Generation(msg)) if !feasible => {
                    t.check(msg.contains("at most"), || format!("{label}: unexpected message {msg}"));
                }
                Err(err) => t.fail(format!("{label}: {err}")),
            }
            (t, feasible)
        })
        .collect();
    let mut total = Tally::default();
    let infeasible = results.iter().filter(|(_, f)| !f).count();
    for (t, _) in results {
        total.merge(t);
    }
    total.note(format!(
        "{} profiles generated and checked; {infeasible} need more than m - r nonzero exponents and are rejected",
        grid.len() - infeasible
    ));
    total.finish(4, "instances: generator, kernel identities, dual-rank profile")
}
