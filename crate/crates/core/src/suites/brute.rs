//! Enumeration oracles, independent of the Howell and Smith code paths.

use std::collections::HashSet;

use crate::ring_linalg::DiagModule;

/// Largest module size the oracles will enumerate.
pub const ENUM_LIMIT: u64 = 1 << 20;

pub fn size(m: &DiagModule) -> Option<u64> {
    m.ring.p().checked_pow(m.length()).filter(|&s| s <= ENUM_LIMIT)
}

/// Every element of the span of `gens` inside `m`, by repeated addition.
pub fn span(m: &DiagModule, gens: &[Vec<u64>]) -> HashSet<Vec<u64>> {
    let r = m.ring;
    let mut out: HashSet<Vec<u64>> = HashSet::new();
    out.insert(m.zero());
    for g in gens {
        let g = m.reduce(g);
        if m.is_zero(&g) {
            continue;
        }
        let mut next = HashSet::new();
        for v in &out {
            let mut w = v.clone();
            loop {
                if !next.insert(w.clone()) {
                    break;
                }
                w = m.reduce(&w.iter().zip(&g).map(|(&a, &b)| r.add(a, b)).collect::<Vec<_>>());
            }
        }
        out = next;
    }
    out
}

/// `{c * x : x in m}` for a scalar `c`.
pub fn scaled_module(m: &DiagModule, c: u64) -> HashSet<Vec<u64>> {
    let r = m.ring;
    let gens: Vec<Vec<u64>> = (0..m.dim())
        .map(|i| {
            let mut e = m.zero();
            e[i] = c % r.modulus();
            e
        })
        .collect();
    span(m, &gens)
}
