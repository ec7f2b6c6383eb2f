//! Acceptance criteria 1 to 9, one line each. Run with `--nocapture` to see the lines.
//!
//! Criteria 1 and 7 contain claims with genuine counterexamples in the finite model. They are
//! reported as FAIL; the test only requires that every failure is such a counterexample.

use std::process::Command;

use klab::suites::{self, appendix, witness, SuiteReport};

const SEED: u64 = 1;

fn allowed_counterexamples(criterion: u32) -> &'static [&'static str] {
    match criterion {
        1 => &[appendix::UNIQUENESS],
        7 => &[witness::RANK_ONE_EQUALITY],
        _ => &[],
    }
}

fn selftest_bytes() -> (Vec<u8>, Option<i32>) {
    let out = Command::new(env!("CARGO_BIN_EXE_klab"))
        .args(["selftest", "--seed", &SEED.to_string()])
        .output()
        .expect("klab runs");
    (out.stdout, out.status.code())
}

#[test]
fn acceptance() {
    let mut unexpected = Vec::new();
    let mut reports: Vec<SuiteReport> = Vec::new();
    for c in 1..=8 {
        let start = std::time::Instant::now();
        let rep = suites::run_criterion(c, SEED, None).unwrap();
        println!("{} time={:.1}s", rep.line(), start.elapsed().as_secs_f64());
        for n in &rep.notes {
            println!("    note: {n}");
        }
        if !rep.passed && (rep.checks == 0 || !rep.only_counterexamples(allowed_counterexamples(c))) {
            unexpected.push(format!("criterion {c}: {:?}", rep.failures));
        }
        reports.push(rep);
    }

    let (first, code) = selftest_bytes();
    let (second, _) = selftest_bytes();
    let identical = !first.is_empty() && first == second;
    let expected_code = if reports.iter().all(|r| r.passed) { 0 } else { 1 };
    let deterministic = identical && code == Some(expected_code);
    println!(
        "criterion 9: {} [determinism: repeated selftest --seed {SEED}] bytes={} identical={identical} exit={code:?}",
        if deterministic { "PASS" } else { "FAIL" },
        first.len()
    );
    if !deterministic {
        unexpected.push("criterion 9: selftest reports differ".into());
    }
    assert!(unexpected.is_empty(), "{unexpected:#?}");
}
