//! Synthetic Selmer data: the image `X` of the relaxed Selmer group inside
//! `L = sum_q (R f_q + R t_q)`, with duality modeled by exact annihilation in `L`.
//!
//! Vertices are squarefree products of primes, stored as bitmasks over the prime list.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ring_linalg::{annihilator, MatrixR, ResidueRing, Submodule, Subquotient};

pub type Vertex = u32;

pub const MAX_PRIMES: usize = 8;
const GENERATION_BUDGET: usize = 400;

pub fn nu(n: Vertex) -> usize {
    n.count_ones() as usize
}

pub fn divides(m: Vertex, n: Vertex) -> bool {
    m & !n == 0
}

/// All subsets of `active`, in increasing numeric order.
pub fn vertices(active: Vertex) -> Vec<Vertex> {
    let mut out = Vec::new();
    let mut s: Vertex = 0;
    loop {
        out.push(s);
        if s == active {
            return out;
        }
        s = (s.wrapping_sub(active)) & active;
    }
}

/// Indices of the primes dividing `n`, increasing.
pub fn prime_indices(n: Vertex) -> Vec<usize> {
    (0..32).filter(|&i| n >> i & 1 == 1).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Finite,
    Transverse,
    Relaxed,
    Strict,
}

impl Condition {
    /// Condition on the dual side under the local pairing.
    pub fn dual(self) -> Condition {
        match self {
            Condition::Relaxed => Condition::Strict,
            Condition::Strict => Condition::Relaxed,
            c => c,
        }
    }

    fn kills_f(self) -> bool {
        matches!(self, Condition::Transverse | Condition::Strict)
    }

    fn kills_t(self) -> bool {
        matches!(self, Condition::Finite | Condition::Strict)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SelmerPattern(pub Vec<Condition>);

impl SelmerPattern {
    pub fn uniform(m: usize, c: Condition) -> Self {
        SelmerPattern(vec![c; m])
    }

    /// Relaxed on `relaxed`, strict on `strict`, transverse on `transverse`, finite elsewhere.
    pub fn modified(m: usize, relaxed: Vertex, strict: Vertex, transverse: Vertex) -> Self {
        SelmerPattern(
            (0..m)
                .map(|i| {
                    if relaxed >> i & 1 == 1 {
                        Condition::Relaxed
                    } else if strict >> i & 1 == 1 {
                        Condition::Strict
                    } else if transverse >> i & 1 == 1 {
                        Condition::Transverse
                    } else {
                        Condition::Finite
                    }
                })
                .collect(),
        )
    }

    /// Transverse at `n`, finite elsewhere.
    pub fn transverse_at(m: usize, n: Vertex) -> Self {
        Self::modified(m, 0, 0, n)
    }

    /// Relaxed at `n`, finite elsewhere.
    pub fn relaxed_at(m: usize, n: Vertex) -> Self {
        Self::modified(m, n, 0, 0)
    }

    pub fn dual(&self) -> Self {
        SelmerPattern(self.0.iter().map(|c| c.dual()).collect())
    }

    /// The coordinate submodule of `L` cut out by the pattern.
    pub fn coordinate_module(&self, ring: ResidueRing) -> Submodule {
        let k = ring.k();
        let exps: Vec<u32> = self
            .0
            .iter()
            .flat_map(|c| [if c.kills_f() { k } else { 0 }, if c.kills_t() { k } else { 0 }])
            .collect();
        Submodule::diagonal(ring, &exps)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeData {
    pub label: String,
    /// `I_q = m^level`; equal to `k` outside tower mode.
    pub level: u32,
    pub fs_unit: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelmerInstance {
    pub ring: ResidueRing,
    pub r: usize,
    pub primes: Vec<PrimeData>,
    x: Submodule,
    ann: Submodule,
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    p: u64,
    k: u32,
    r: usize,
    primes: Vec<PrimeData>,
    #[serde(rename = "X")]
    x: Vec<Vec<u64>>,
}

impl Serialize for SelmerInstance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        InstanceJson {
            p: self.ring.p(),
            k: self.ring.k(),
            r: self.r,
            primes: self.primes.clone(),
            x: self.x.basis().row_vecs(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SelmerInstance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = InstanceJson::deserialize(d)?;
        let ring = ResidueRing::new(j.p, j.k).map_err(D::Error::custom)?;
        let n = 2 * j.primes.len();
        if j.x.iter().any(|row| row.len() != n) {
            return Err(D::Error::custom(format!("rows of X must have length {n}")));
        }
        if j.x.iter().flatten().any(|&c| c >= ring.modulus()) {
            return Err(D::Error::custom("entry of X out of range"));
        }
        let x = Submodule::from_rows(ring, n, &j.x);
        SelmerInstance::new(ring, j.r, j.primes, x).map_err(D::Error::custom)
    }
}

/// Invariant factors (nonzero exponents, decreasing) of a submodule of a free module.
pub fn structure(s: &Submodule) -> Vec<u32> {
    let mut e = as_module(s).module.exps;
    e.sort_by(|a, b| b.cmp(a));
    e
}

/// A submodule of `R^n` as a diagonal module with generators in `R^n`.
pub fn as_module(s: &Submodule) -> Subquotient {
    Subquotient::new(s.basis(), &Submodule::zero(s.ring(), s.ambient_dim()))
}

/// `s[m]`: elements killed by `p`.
pub fn m_torsion(s: &Submodule) -> Submodule {
    let ring = s.ring();
    s.intersect(&Submodule::full(ring, s.ambient_dim()).scale(ring.pow_p(ring.k() - 1)))
}

/// Smallest valuation of coordinate `c` over `s`, as the exponent of the ideal it generates.
pub fn coordinate_ideal(s: &Submodule, c: usize) -> u32 {
    let ring = s.ring();
    (0..s.basis().rows).map(|i| ring.val(s.basis()[(i, c)])).min().unwrap_or(ring.k())
}

pub fn local_pairing(ring: ResidueRing, m: usize) -> MatrixR {
    let mut j = MatrixR::zeros(ring, 2 * m, 2 * m);
    for q in 0..m {
        j[(2 * q, 2 * q + 1)] = 1 % ring.modulus();
        j[(2 * q + 1, 2 * q)] = ring.neg(1);
    }
    j
}

impl SelmerInstance {
    pub fn new(ring: ResidueRing, r: usize, primes: Vec<PrimeData>, x: Submodule) -> Result<Self> {
        let m = primes.len();
        if r == 0 {
            return Err(Error::InvalidInstance("core rank must be at least 1".into()));
        }
        if m > MAX_PRIMES {
            return Err(Error::InvalidInstance(format!("at most {MAX_PRIMES} primes")));
        }
        if x.ring() != ring || x.ambient_dim() != 2 * m {
            return Err(Error::Dimension("X must live in R^(2m)".into()));
        }
        for (i, q) in primes.iter().enumerate() {
            if !ring.is_unit(q.fs_unit) {
                return Err(Error::InvalidInstance(format!("fs unit of {} is not a unit", q.label)));
            }
            if q.level == 0 || q.level > ring.k() {
                return Err(Error::InvalidInstance(format!("level of {} outside 1..=k", q.label)));
            }
            if primes[..i].iter().any(|o| o.label == q.label) {
                return Err(Error::InvalidInstance(format!("duplicate prime label {}", q.label)));
            }
        }
        let ann = annihilator(&x, &local_pairing(ring, m))?;
        Ok(SelmerInstance { ring, r, primes, x, ann })
    }

    pub fn m(&self) -> usize {
        self.primes.len()
    }

    pub fn all_primes(&self) -> Vertex {
        ((1u64 << self.m()) - 1) as Vertex
    }

    pub fn x(&self) -> &Submodule {
        &self.x
    }

    /// `Ann(X)`, the image of the relaxed dual Selmer group.
    pub fn dual_x(&self) -> &Submodule {
        &self.ann
    }

    pub fn f_coord(q: usize) -> usize {
        2 * q
    }

    pub fn t_coord(q: usize) -> usize {
        2 * q + 1
    }

    pub fn prime_index(&self, label: &str) -> Result<usize> {
        self.primes
            .iter()
            .position(|q| q.label == label)
            .ok_or_else(|| Error::Input(format!("unknown prime {label}")))
    }

    pub fn vertex_of(&self, labels: &[&str]) -> Result<Vertex> {
        labels.iter().try_fold(0, |acc, l| Ok(acc | 1 << self.prime_index(l)?))
    }

    pub fn labels(&self, n: Vertex) -> Vec<String> {
        prime_indices(n).into_iter().map(|i| self.primes[i].label.clone()).collect()
    }

    /// Display name of a vertex: `1` or labels joined by `*`.
    pub fn vertex_name(&self, n: Vertex) -> String {
        if n == 0 {
            "1".into()
        } else {
            self.labels(n).join("*")
        }
    }

    /// Primes with `level >= j`.
    pub fn primes_at_level(&self, j: u32) -> Vertex {
        self.primes.iter().enumerate().filter(|(_, q)| q.level >= j).fold(0, |acc, (i, _)| acc | 1 << i)
    }

    fn check_pattern(&self, pattern: &SelmerPattern) -> Result<()> {
        if pattern.0.len() != self.m() {
            return Err(Error::Input(format!("pattern has {} entries for {} primes", pattern.0.len(), self.m())));
        }
        Ok(())
    }

    pub fn selmer_group(&self, pattern: &SelmerPattern) -> Result<Submodule> {
        self.check_pattern(pattern)?;
        Ok(self.x.intersect(&pattern.coordinate_module(self.ring)))
    }

    /// The dual Selmer group of the pattern, inside `Ann(X)`.
    pub fn dual_selmer_group(&self, pattern: &SelmerPattern) -> Result<Submodule> {
        self.check_pattern(pattern)?;
        Ok(self.ann.intersect(&pattern.dual().coordinate_module(self.ring)))
    }

    /// `H_{F(n)}`: transverse at `n`.
    pub fn h_transverse(&self, n: Vertex) -> Submodule {
        self.selmer_group(&SelmerPattern::transverse_at(self.m(), n)).unwrap()
    }

    /// `H_{F^n}`: relaxed at `n`.
    pub fn h_relaxed(&self, n: Vertex) -> Submodule {
        self.selmer_group(&SelmerPattern::relaxed_at(self.m(), n)).unwrap()
    }

    /// `H_{F_q(n)}`: transverse at `n`, strict at `q`.
    pub fn h_transverse_strict(&self, n: Vertex, q: usize) -> Submodule {
        self.selmer_group(&SelmerPattern::modified(self.m(), 0, 1 << q, n)).unwrap()
    }

    pub fn dual_transverse(&self, n: Vertex) -> Submodule {
        self.dual_selmer_group(&SelmerPattern::transverse_at(self.m(), n)).unwrap()
    }

    /// Dual group strict at `n`, finite elsewhere.
    pub fn dual_strict(&self, n: Vertex) -> Submodule {
        self.dual_selmer_group(&SelmerPattern::relaxed_at(self.m(), n)).unwrap()
    }

    pub fn lambda(&self, n: Vertex) -> u32 {
        self.dual_transverse(n).length()
    }

    pub fn mu(&self, n: Vertex) -> u32 {
        self.dual_strict(n).length()
    }

    /// Dimension of the `m`-torsion of the dual group at `n`.
    pub fn lambda_bar(&self, n: Vertex) -> usize {
        structure(&self.dual_transverse(n)).len()
    }

    /// Invariant factors of the dual Selmer group at `1`.
    pub fn dual_structure(&self) -> Vec<u32> {
        structure(&self.dual_transverse(0))
    }

    pub fn is_core_vertex(&self, n: Vertex) -> bool {
        self.lambda(n) == 0
    }

    pub fn core_vertices(&self, active: Vertex) -> Vec<Vertex> {
        vertices(active).into_iter().filter(|&n| self.is_core_vertex(n)).collect()
    }

    /// Both edge maps at `(n, nq)` are isomorphisms (for core `n`): `loc_q^f` is nonzero on `H_{F(n)}[m]`.
    pub fn iso_edge(&self, n: Vertex, q: usize) -> bool {
        let tors = m_torsion(&self.h_transverse(n));
        coordinate_ideal(&tors, Self::f_coord(q)) < self.ring.k()
    }

    /// A prime `q` of `active` prime to `n` lowering the dual rank: `loc_q^f` nonzero on
    /// `m^{k-1} H_{F(n)}` and on the `m`-torsion of the dual group.
    pub fn descent_prime(&self, n: Vertex, active: Vertex) -> Option<usize> {
        let ring = self.ring;
        let k = ring.k();
        let top = self.h_transverse(n).scale(ring.pow_p(k - 1));
        let dual_tors = m_torsion(&self.dual_transverse(n));
        prime_indices(active & !n).into_iter().find(|&q| {
            coordinate_ideal(&top, Self::f_coord(q)) < k && coordinate_ideal(&dual_tors, Self::f_coord(q)) < k
        })
    }

    /// Shortest path between core vertices through core vertices and isomorphism edges.
    pub fn core_path(&self, from: Vertex, to: Vertex, active: Vertex) -> Result<Vec<Vertex>> {
        for v in [from, to] {
            if !divides(v, active) || !self.is_core_vertex(v) {
                return Err(Error::Input(format!("{} is not an active core vertex", self.vertex_name(v))));
            }
        }
        let size = 1usize << self.m();
        let mut prev: Vec<Option<Vertex>> = vec![None; size];
        let mut core: Vec<Option<bool>> = vec![None; size];
        let mut is_core = |v: Vertex| *core[v as usize].get_or_insert_with(|| self.is_core_vertex(v));
        prev[from as usize] = Some(from);
        let mut queue = std::collections::VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            if v == to {
                let mut path = vec![to];
                let mut cur = to;
                while cur != from {
                    cur = prev[cur as usize].unwrap();
                    path.push(cur);
                }
                path.reverse();
                return Ok(path);
            }
            for q in prime_indices(active) {
                let w = v ^ (1 << q);
                if prev[w as usize].is_some() || !is_core(w) {
                    continue;
                }
                let lower = v.min(w);
                if self.iso_edge(lower, q) {
                    prev[w as usize] = Some(v);
                    queue.push_back(w);
                }
            }
        }
        Err(Error::Richness(format!(
            "no core path from {} to {}",
            self.vertex_name(from),
            self.vertex_name(to)
        )))
    }

    /// `X mod p^j` over `Z/p^j`, levels clamped to `j`.
    pub fn reduce(&self, j: u32) -> Result<SelmerInstance> {
        let ring = self.ring.truncate(j)?;
        let x = Submodule::from_generators(&self.x.basis().reduce_to(ring));
        let primes = self
            .primes
            .iter()
            .map(|q| PrimeData { label: q.label.clone(), level: q.level.min(j), fs_unit: q.fs_unit % ring.modulus() })
            .collect();
        SelmerInstance::new(ring, self.r, primes, x)
    }

    /// The filtration `P = P_1 ⊇ P_2 ⊇ ... ⊇ P_k` by level.
    pub fn tower_levels(&self) -> Vec<Vertex> {
        (1..=self.ring.k()).map(|j| self.primes_at_level(j)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_json().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomVerdict {
    pub axiom: String,
    pub passed: bool,
    pub witnesses: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub model: String,
    pub active_primes: Vec<String>,
    pub axioms: Vec<AxiomVerdict>,
}

impl ValidityReport {
    pub fn passed(&self) -> bool {
        self.axioms.iter().all(|a| a.passed)
    }

    pub fn failures(&self) -> Vec<String> {
        self.axioms
            .iter()
            .filter(|a| !a.passed)
            .map(|a| format!("{}: {}", a.axiom, a.witnesses.first().cloned().unwrap_or_default()))
            .collect()
    }
}

const MAX_WITNESSES: usize = 8;

fn verdict(axiom: &str, witnesses: Vec<String>) -> AxiomVerdict {
    AxiomVerdict {
        axiom: axiom.into(),
        passed: witnesses.is_empty(),
        witnesses: witnesses.into_iter().take(MAX_WITNESSES).collect(),
    }
}

fn with_free(mut tors: Vec<u32>, k: u32, rank: usize) -> Vec<u32> {
    tors.extend(std::iter::repeat_n(k, rank));
    tors.sort_by(|a, b| b.cmp(a));
    tors
}

/// Checks the validity axioms over all vertices built from `active`.
pub fn check_instance(inst: &SelmerInstance, active: Vertex) -> ValidityReport {
    let ring = inst.ring;
    let k = ring.k();
    let m = inst.m();
    let r = inst.r;
    let verts = vertices(active);

    let v1 = {
        let len = inst.x.length();
        let want = (r + m) as u32 * k;
        let mut w = Vec::new();
        if len != want {
            w.push(format!("length(X) = {len}, expected {want}"));
        }
        if len + inst.ann.length() != 2 * m as u32 * k {
            w.push("length(X) + length(Ann X) differs from 2mk".into());
        }
        verdict("V1 Euler characteristic", w)
    };

    let v2 = verdict("V2 strict-everywhere group trivial (modeling assumption)", Vec::new());

    let per_vertex: Vec<(Vec<String>, u32)> = verts
        .par_iter()
        .map(|&n| {
            let mut w = Vec::new();
            let name = inst.vertex_name(n);
            let h = structure(&inst.h_transverse(n));
            let dual = inst.dual_transverse(n);
            if h != with_free(structure(&dual), k, r) {
                w.push(format!("H_F({name}) = {h:?} but dual = {:?}", structure(&dual)));
            }
            let hr = structure(&inst.h_relaxed(n));
            let ds = structure(&inst.dual_strict(n));
            if hr != with_free(ds.clone(), k, r + nu(n)) {
                w.push(format!("H_F^({name}) = {hr:?} but dual = {ds:?}"));
            }
            (w, dual.length())
        })
        .collect();
    let lambda: std::collections::HashMap<Vertex, u32> =
        verts.iter().zip(&per_vertex).map(|(&n, (_, l))| (n, *l)).collect();
    let v3 = verdict("V3 core-rank splitting", per_vertex.into_iter().flat_map(|(w, _)| w).collect());

    let v4_w: Vec<String> = verts
        .par_iter()
        .flat_map_iter(|&n| {
            let hn = inst.h_transverse(n);
            let lambda = &lambda;
            prime_indices(active & !n).into_iter().filter_map(move |q| {
                let nq = n | 1 << q;
                let up = (coordinate_ideal(&hn, SelmerInstance::f_coord(q)) + lambda[&n]).min(k);
                let down =
                    (coordinate_ideal(&inst.h_transverse(nq), SelmerInstance::t_coord(q)) + lambda[&nq]).min(k);
                (up != down).then(|| {
                    format!("n={} q={}: m^{up} vs m^{down}", inst.vertex_name(n), inst.primes[q].label)
                })
            })
        })
        .collect();
    let v4 = verdict("V4 local duality bridge", v4_w);

    let mut v5_w: Vec<String> = verts
        .par_iter()
        .filter(|&&n| lambda[&n] > 0)
        .filter_map(|&n| {
            inst.descent_prime(n, active)
                .is_none()
                .then(|| format!("no descent prime at non-core {}", inst.vertex_name(n)))
        })
        .collect();
    let core: Vec<Vertex> = verts.iter().copied().filter(|n| lambda[n] == 0).collect();
    match core.first() {
        None => v5_w.push("no core vertices".into()),
        Some(&c0) => {
            for &c in &core[1..] {
                if let Err(e) = inst.core_path(c0, c, active) {
                    v5_w.push(e.to_string());
                    break;
                }
            }
        }
    }
    let v5 = verdict("V5 richness", v5_w);

    ValidityReport {
        model: "faithful model: X is the injective image of the relaxed Selmer group".into(),
        active_primes: inst.labels(active),
        axioms: vec![v1, v2, v3, v4, v5],
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenParams {
    pub p: u64,
    pub k: u32,
    pub r: usize,
    pub m: usize,
    /// Target invariant factors of the dual Selmer group at `1`.
    pub e: Vec<u32>,
    pub seed: u64,
    /// Per-prime levels for tower mode; all equal to `k` when absent.
    pub levels: Option<Vec<u32>>,
}

fn random_unit(ring: ResidueRing, rng: &mut ChaCha8Rng) -> u64 {
    loop {
        let u = rng.gen_range(1..ring.modulus());
        if ring.is_unit(u) {
            return u;
        }
    }
}

fn random_matrix(ring: ResidueRing, rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> MatrixR {
    let entries: Vec<Vec<u64>> =
        (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(0..ring.modulus())).collect()).collect();
    MatrixR::from_rows(ring, cols, &entries)
}

fn random_invertible(ring: ResidueRing, n: usize, rng: &mut ChaCha8Rng) -> MatrixR {
    loop {
        let a = random_matrix(ring, n, n, rng);
        if ring.is_unit(a.det()) {
            return a;
        }
    }
}

fn full_rank_mod_p(a: &MatrixR) -> bool {
    let residue = ResidueRing::new(a.ring.p(), 1).unwrap();
    Submodule::from_generators(&a.reduce_to(residue)).length() as usize == a.rows
}

/// One candidate: `Ann(X)` is spanned by the rows of `[A | U D V]` in (f | t) coordinates,
/// with `D` carrying `p^{e_i}` times units, so the dual group at `1` is `sum R/p^{e_i}`.
fn candidate(params: &GenParams, ring: ResidueRing, levels: &[u32], rng: &mut ChaCha8Rng) -> Result<SelmerInstance> {
    let (m, r) = (params.m, params.r);
    let s = m - r;
    let mut e = params.e.clone();
    e.resize(s, 0);
    let a = loop {
        let a = random_matrix(ring, s, m, rng);
        if full_rank_mod_p(&a) {
            break a;
        }
    };
    let mut d = MatrixR::zeros(ring, s, m);
    for (i, &ei) in e.iter().enumerate() {
        d[(i, i)] = ring.mul(random_unit(ring, rng), ring.pow_p(ei));
    }
    let udv = random_invertible(ring, s, rng).mul(&d)?.mul(&random_invertible(ring, m, rng))?;
    let rows: Vec<Vec<u64>> = (0..s)
        .map(|i| (0..m).flat_map(|q| [a[(i, q)], udv[(i, q)]]).collect())
        .collect();
    let y = Submodule::from_rows(ring, 2 * m, &rows);
    let x = annihilator(&y, &local_pairing(ring, m))?;
    let primes = (0..m)
        .map(|i| PrimeData { label: format!("q{}", i + 1), level: levels[i], fs_unit: random_unit(ring, rng) })
        .collect();
    SelmerInstance::new(ring, r, primes, x)
}

/// Checks an instance at every stage of its tower (only the top stage outside tower mode).
pub fn tower_valid(inst: &SelmerInstance) -> Result<Vec<ValidityReport>> {
    let k = inst.ring.k();
    let stages: Vec<u32> = if inst.primes.iter().all(|q| q.level == k) { vec![k] } else { (1..=k).collect() };
    stages.into_iter().map(|j| Ok(check_instance(&inst.reduce(j)?, inst.primes_at_level(j)))).collect()
}

pub fn generate_instance(params: &GenParams) -> Result<SelmerInstance> {
    let ring = ResidueRing::new(params.p, params.k)?;
    let k = params.k;
    if params.m == 0 || params.m > MAX_PRIMES {
        return Err(Error::Generation(format!("prime count must be in 1..={MAX_PRIMES}")));
    }
    if params.r == 0 || params.r > params.m {
        return Err(Error::Generation(format!("core rank {} needs 1 <= r <= m = {}", params.r, params.m)));
    }
    if let Some(&bad) = params.e.iter().find(|&&e| e > k) {
        return Err(Error::Generation(format!("target exponent {bad} exceeds k = {k}")));
    }
    let e: Vec<u32> = params.e.iter().copied().filter(|&e| e > 0).collect();
    if e.len() > params.m - params.r {
        return Err(Error::Generation(format!(
            "{} nonzero target exponents but at most m - r = {} fit",
            e.len(),
            params.m - params.r
        )));
    }
    let levels = params.levels.clone().unwrap_or_else(|| vec![k; params.m]);
    if levels.len() != params.m || levels.iter().any(|&l| l == 0 || l > k) {
        return Err(Error::Generation("levels must list one value in 1..=k per prime".into()));
    }
    let mut sorted = e.clone();
    sorted.sort_by(|a, b| b.cmp(a));
    let params = GenParams { e: sorted.clone(), ..params.clone() };
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut last = String::new();
    for _ in 0..GENERATION_BUDGET {
        let inst = candidate(&params, ring, &levels, &mut rng)?;
        if inst.dual_structure() != sorted {
            last = format!("dual structure {:?}", inst.dual_structure());
            continue;
        }
        let reports = tower_valid(&inst)?;
        match reports.iter().find(|r| !r.passed()) {
            None => return Ok(inst),
            Some(rep) => last = rep.failures().join("; "),
        }
    }
    Err(Error::Generation(format!(
        "no valid instance for p={} k={} r={} m={} e={:?} within {GENERATION_BUDGET} attempts; last rejection: {last}",
        params.p, params.k, params.r, params.m, sorted
    )))
}
