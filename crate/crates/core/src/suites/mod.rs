//! Property suites shared by the `selftest` command and the acceptance tests.

pub mod appendix;
pub mod brute;
pub mod instance;
pub mod local;
pub mod main_theorem;
pub mod recovery;
pub mod sheaf;
pub mod tower;
pub mod witness;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::selmer_instance::GenParams;

/// Per-case generator, independent of the thread schedule.
pub fn case_rng(seed: u64, i: usize) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// A random feasible target: `e_i <= k`, at most `m - r` parts, sum at most `max_sum`.
pub fn random_target(rng: &mut ChaCha8Rng, k: u32, r: usize, m: usize, max_sum: u32) -> Vec<u32> {
    let parts = rng.gen_range(0..=m - r);
    let mut e = Vec::new();
    let mut left = max_sum;
    for _ in 0..parts {
        if left == 0 {
            break;
        }
        let x = rng.gen_range(1..=k.min(left));
        e.push(x);
        left -= x;
    }
    e.sort_by(|a, b| b.cmp(a));
    e
}

/// A random feasible generator input with `p^k <= 125`, `k <= max_k`, `r <= 2`, `m <= 4`.
pub fn random_params(rng: &mut ChaCha8Rng, min_k: u32, max_k: u32, max_sum: u32) -> GenParams {
    let choices: Vec<(u64, u32)> = [2u64, 3, 5]
        .iter()
        .flat_map(|&p| (min_k..=max_k).map(move |k| (p, k)))
        .filter(|&(p, k)| p.pow(k) <= 125)
        .collect();
    let &(p, k) = choices.choose(rng).unwrap();
    let r = rng.gen_range(1..=2);
    let m = rng.gen_range(r.max(2)..=4);
    let e = random_target(rng, k, r, m, max_sum.min(k * 4));
    GenParams { p, k, r, m, e, seed: rng.gen(), levels: None }
}

pub fn params_label(s: &GenParams) -> String {
    format!("p={} k={} r={} m={} e={:?} seed={}", s.p, s.k, s.r, s.m, s.e, s.seed)
}

const MAX_FAILURES: usize = 20;

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct SuiteReport {
    pub criterion: u32,
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub checks: usize,
    pub failed: usize,
    /// Failures that are counterexamples to the claim under test, counted by kind.
    pub counterexamples: BTreeMap<String, usize>,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
}

impl SuiteReport {
    /// Every failure is a counterexample of one of the given kinds.
    pub fn only_counterexamples(&self, kinds: &[&str]) -> bool {
        self.counterexamples.keys().all(|k| kinds.contains(&k.as_str()))
            && self.counterexamples.values().sum::<usize>() == self.failed
    }

    pub fn line(&self) -> String {
        format!(
            "criterion {}: {} [{}] cases={} checks={} failed={}{}{}",
            self.criterion,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.checks,
            self.failed,
            if self.counterexamples.is_empty() { String::new() } else { format!(" counterexamples={:?}", self.counterexamples) },
            self.failures.first().map(|f| format!(" first failure: {f}")).unwrap_or_default()
        )
    }
}

/// Accumulates check outcomes for one suite.
#[derive(Debug, Default)]
pub struct Tally {
    pub cases: usize,
    pub checks: usize,
    failed: usize,
    counterexamples: BTreeMap<String, usize>,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Tally {
    pub fn check(&mut self, ok: bool, what: impl FnOnce() -> String) -> bool {
        self.checks += 1;
        if !ok {
            self.failed += 1;
            if self.failures.len() < MAX_FAILURES {
                self.failures.push(what());
            }
        }
        ok
    }

    pub fn fail(&mut self, what: String) {
        self.check(false, || what);
    }

    /// A failed check that exhibits a counterexample of the given kind.
    pub fn counterexample(&mut self, kind: &str, what: String) {
        *self.counterexamples.entry(kind.to_string()).or_default() += 1;
        self.fail(what);
    }

    pub fn note(&mut self, s: String) {
        self.notes.push(s);
    }

    pub fn merge(&mut self, other: Tally) {
        self.cases += other.cases;
        self.checks += other.checks;
        self.failed += other.failed;
        for (k, v) in other.counterexamples {
            *self.counterexamples.entry(k).or_default() += v;
        }
        for f in other.failures {
            if self.failures.len() < MAX_FAILURES {
                self.failures.push(f);
            }
        }
        self.notes.extend(other.notes);
    }

    pub fn finish(self, criterion: u32, name: &str) -> SuiteReport {
        SuiteReport {
            criterion,
            name: name.to_string(),
            passed: self.failed == 0 && self.checks > 0,
            cases: self.cases,
            checks: self.checks,
            failed: self.failed,
            counterexamples: self.counterexamples,
            failures: self.failures,
            notes: self.notes,
        }
    }
}

/// Case counts used by `selftest` and the acceptance tests.
pub const DEFAULT_CASES: [(u32, usize); 8] = [(1, 400), (2, 120), (3, 400), (4, 0), (5, 300), (6, 150), (7, 60), (8, 60)];

/// Runs one criterion's suite; `cases = None` uses the default count. Criterion 4 always
/// sweeps its whole grid.
pub fn run_criterion(criterion: u32, seed: u64, cases: Option<usize>) -> Option<SuiteReport> {
    let n = cases.unwrap_or(DEFAULT_CASES.iter().find(|(c, _)| *c == criterion)?.1);
    Some(match criterion {
        1 => appendix::run(seed, n),
        2 => sheaf::run(seed, n),
        3 => local::run(seed, n),
        4 => instance::run(seed),
        5 => main_theorem::run(seed, n),
        6 => recovery::run(seed, n),
        7 => witness::run(seed, n),
        8 => tower::run(seed, n),
        _ => return None,
    })
}

/// All eight suites in order.
pub fn run_all(seed: u64) -> Vec<SuiteReport> {
    DEFAULT_CASES.iter().filter_map(|&(c, _)| run_criterion(c, seed, None)).collect()
}
