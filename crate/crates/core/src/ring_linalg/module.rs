use serde::{Deserialize, Serialize};

use super::howell::{preimage, Solver};
use super::smith::{cokernel_exponents, smith};
use super::{MatrixR, ResidueRing, Submodule};
use crate::error::{Error, Result};

/// `R/p^{e_1} + ... + R/p^{e_d}` with `1 <= e_i <= k`. Elements are coordinate vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiagModule {
    pub ring: ResidueRing,
    pub exps: Vec<u32>,
}

impl DiagModule {
    pub fn new(ring: ResidueRing, exps: Vec<u32>) -> Self {
        assert!(exps.iter().all(|&e| e >= 1 && e <= ring.k()), "exponents out of range");
        DiagModule { ring, exps }
    }

    pub fn free(ring: ResidueRing, rank: usize) -> Self {
        DiagModule { ring, exps: vec![ring.k(); rank] }
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    pub fn length(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn free_rank(&self) -> usize {
        self.exps.iter().filter(|&&e| e == self.ring.k()).count()
    }

    pub fn is_free(&self) -> bool {
        self.free_rank() == self.dim()
    }

    pub fn is_cyclic(&self) -> bool {
        self.dim() <= 1
    }

    /// Invariant factor exponents, nonincreasing.
    pub fn invariant_factors(&self) -> Vec<u32> {
        let mut e = self.exps.clone();
        e.sort_by(|a, b| b.cmp(a));
        e
    }

    pub fn relations(&self) -> Submodule {
        Submodule::diagonal(self.ring, &self.exps)
    }

    pub fn reduce(&self, x: &[u64]) -> Vec<u64> {
        x.iter().zip(&self.exps).map(|(&c, &e)| c % self.ring.pow_big(e)).collect()
    }

    pub fn is_zero(&self, x: &[u64]) -> bool {
        self.reduce(x).iter().all(|&c| c == 0)
    }

    pub fn zero(&self) -> Vec<u64> {
        vec![0; self.dim()]
    }

    /// Largest `j` with `x` in `p^j M`; `None` for `x = 0`.
    pub fn depth(&self, x: &[u64]) -> Option<u32> {
        self.reduce(x).iter().filter(|&&c| c != 0).map(|&c| self.ring.val(c)).min()
    }

    /// Order exponent: smallest `j` with `p^j x = 0`.
    pub fn order(&self, x: &[u64]) -> u32 {
        self.reduce(x)
            .iter()
            .zip(&self.exps)
            .filter(|(&c, _)| c != 0)
            .map(|(&c, &e)| e - self.ring.val(c))
            .max()
            .unwrap_or(0)
    }

    pub fn elements(&self) -> Vec<Vec<u64>> {
        let mut out = vec![vec![]];
        for &e in &self.exps {
            let n = self.ring.pow_big(e);
            out = out
                .into_iter()
                .flat_map(|v: Vec<u64>| {
                    (0..n).map(move |c| {
                        let mut w = v.clone();
                        w.push(c);
                        w
                    })
                })
                .collect();
        }
        out
    }

    pub fn identity(&self) -> ModuleMap {
        ModuleMap::new(self.clone(), self.clone(), MatrixR::identity(self.ring, self.dim())).unwrap()
    }
}

/// A homomorphism between diagonal modules, `x -> x * mat`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleMap {
    pub dom: DiagModule,
    pub cod: DiagModule,
    pub mat: MatrixR,
}

impl ModuleMap {
    /// Checks that relations map to relations and stores entries reduced.
    pub fn new(dom: DiagModule, cod: DiagModule, mat: MatrixR) -> Result<Self> {
        if mat.rows != dom.dim() || mat.cols != cod.dim() {
            return Err(Error::Dimension(format!(
                "map matrix {}x{} for modules of dims {} and {}",
                mat.rows,
                mat.cols,
                dom.dim(),
                cod.dim()
            )));
        }
        let r = dom.ring;
        let mut mat = mat;
        for i in 0..mat.rows {
            for j in 0..mat.cols {
                let x = mat[(i, j)] % r.pow_big(cod.exps[j]);
                if x != 0 && r.val(x) + dom.exps[i] < cod.exps[j] {
                    return Err(Error::IllDefined(format!(
                        "generator {i} of order p^{} sent to an element of larger order",
                        dom.exps[i]
                    )));
                }
                mat[(i, j)] = x;
            }
        }
        Ok(ModuleMap { dom, cod, mat })
    }

    pub fn zero(dom: DiagModule, cod: DiagModule) -> Self {
        let mat = MatrixR::zeros(dom.ring, dom.dim(), cod.dim());
        ModuleMap { dom, cod, mat }
    }

    pub fn apply(&self, x: &[u64]) -> Vec<u64> {
        self.cod.reduce(&self.mat.apply(x))
    }

    /// `other` after `self`.
    pub fn then(&self, other: &ModuleMap) -> Result<ModuleMap> {
        if self.cod != other.dom {
            return Err(Error::Dimension("composition of incompatible maps".into()));
        }
        ModuleMap::new(self.dom.clone(), other.cod.clone(), self.mat.mul(&other.mat)?)
    }

    pub fn scale(&self, c: u64) -> ModuleMap {
        ModuleMap::new(self.dom.clone(), self.cod.clone(), self.mat.scale(c)).unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.mat.is_zero()
    }

    pub fn kernel(&self) -> Subquotient {
        let a = preimage(&self.mat, Some(&self.cod.relations()));
        Subquotient::new(a.basis(), &self.dom.relations())
    }

    pub fn image(&self) -> Subquotient {
        Subquotient::new(&self.mat, &self.cod.relations())
    }

    pub fn is_injective(&self) -> bool {
        self.kernel().module.dim() == 0
    }

    pub fn is_surjective(&self) -> bool {
        self.image().module.length() == self.cod.length()
    }

    pub fn is_iso(&self) -> bool {
        self.is_injective() && self.is_surjective()
    }
}

/// `A/B` for submodules `B <= A` of R^n, together with a diagonal presentation.
///
/// `gens` are representatives in R^n of the diagonal generators of `module`.
#[derive(Clone, Debug)]
pub struct Subquotient {
    pub a: Submodule,
    pub b: Submodule,
    pub module: DiagModule,
    pub gens: MatrixR,
    solver: Solver,
    to_diag: MatrixR,
    keep: Vec<usize>,
}

impl Subquotient {
    /// `A` is the span of `gens` plus `B`.
    pub fn new(gens: &MatrixR, b: &Submodule) -> Self {
        let ring = gens.ring;
        let n = gens.cols;
        assert_eq!(b.ambient_dim(), n);
        let a = Submodule::from_generators(gens).sum(b);
        let g = a.basis().clone();
        let solver = Solver::new(&g, Some(b));
        let k = solver.kernel();
        let s = smith(k.basis());
        let mut exps = s.diag.clone();
        exps.resize(g.rows, ring.k());
        let keep: Vec<usize> = (0..g.rows).filter(|&i| exps[i] > 0).collect();
        let w_rows = s.w.select_rows(&keep);
        let out_gens = if keep.is_empty() { MatrixR::zeros(ring, 0, n) } else { w_rows.mul(&g).unwrap() };
        let module = DiagModule::new(ring, keep.iter().map(|&i| exps[i]).collect());
        let out_gens = MatrixR::from_rows(
            ring,
            n,
            &(0..out_gens.rows).map(|i| b.reduce(out_gens.row(i))).collect::<Vec<_>>(),
        );
        Subquotient { a, b: b.clone(), module, gens: out_gens, solver, to_diag: s.v, keep }
    }

    /// Submodule of a diagonal module generated by the given coordinate vectors.
    pub fn of(parent: &DiagModule, gens: &MatrixR) -> Self {
        Self::new(gens, &parent.relations())
    }

    pub fn contains(&self, y: &[u64]) -> bool {
        self.a.contains(y)
    }

    /// Diagonal coordinates of `y`, or `None` if `y` is not in `A`.
    pub fn coords(&self, y: &[u64]) -> Option<Vec<u64>> {
        let c = self.solver.solve(y)?;
        let full = self.to_diag.apply(&c);
        Some(self.module.reduce(&self.keep.iter().map(|&i| full[i]).collect::<Vec<_>>()))
    }

    /// Representative in R^n of a coordinate vector.
    pub fn lift(&self, x: &[u64]) -> Vec<u64> {
        self.b.reduce(&self.gens.apply(x))
    }

    /// The inclusion into `parent`, when `B` is the relation module of `parent`.
    pub fn inclusion(&self, parent: &DiagModule) -> ModuleMap {
        assert_eq!(self.b, parent.relations(), "subquotient is not a submodule of parent");
        ModuleMap::new(self.module.clone(), parent.clone(), self.gens.clone()).expect("inclusion")
    }

    /// Matrix of the identity `self.module -> other.module` for equal `A/B`.
    pub fn transition_to(&self, other: &Subquotient) -> Result<ModuleMap> {
        if self.a != other.a || self.b != other.b {
            return Err(Error::Dimension("transition between different subquotients".into()));
        }
        let rows: Vec<Vec<u64>> =
            (0..self.gens.rows).map(|i| other.coords(self.gens.row(i)).unwrap()).collect();
        let mat = MatrixR::from_rows(self.module.ring, other.module.dim(), &rows);
        ModuleMap::new(self.module.clone(), other.module.clone(), mat)
    }
}

/// A module given by generators and relations: R^gens / rowspan(relations).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentedModule {
    pub gens: usize,
    pub relations: MatrixR,
}

impl PresentedModule {
    pub fn new(gens: usize, relations: MatrixR) -> Result<Self> {
        if relations.cols != gens {
            return Err(Error::Dimension("relation width differs from generator count".into()));
        }
        Ok(PresentedModule { gens, relations })
    }

    pub fn ring(&self) -> ResidueRing {
        self.relations.ring
    }

    pub fn invariant_factors(&self) -> Vec<u32> {
        let mut e: Vec<u32> = cokernel_exponents(&self.relations).into_iter().filter(|&e| e > 0).collect();
        e.sort_by(|a, b| b.cmp(a));
        e
    }

    pub fn length(&self) -> u32 {
        self.invariant_factors().iter().sum()
    }

    pub fn diagonalize(&self) -> Subquotient {
        let ring = self.ring();
        Subquotient::new(&MatrixR::identity(ring, self.gens), &Submodule::from_generators(&self.relations))
    }

    pub fn from_diag(d: &DiagModule) -> Self {
        let rel = d.relations();
        PresentedModule { gens: d.dim(), relations: rel.basis().clone() }
    }
}

/// `{y : <x, y> = 0 for all x in X}` for the bilinear form `<x, y> = x J y^T`.
pub fn annihilator(x: &Submodule, pairing: &MatrixR) -> Result<Submodule> {
    let ring = x.ring();
    if pairing.rows != pairing.cols || pairing.rows != x.ambient_dim() {
        return Err(Error::Dimension("pairing size".into()));
    }
    if !ring.is_unit(pairing.det()) {
        return Err(Error::PairingNotUnimodular);
    }
    let xj = x.basis().mul(pairing)?;
    Ok(preimage(&xj.transpose(), None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn rand_mat(ring: ResidueRing, rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> MatrixR {
        let v: Vec<Vec<u64>> = (0..rows)
            .map(|_| {
                (0..cols)
                    .map(|_| ring.mul(rng.gen_range(0..ring.modulus()), ring.pow_p(rng.gen_range(0..ring.k()))))
                    .collect()
            })
            .collect();
        MatrixR::from_rows(ring, cols, &v)
    }

    #[test]
    fn subquotient_generators_and_coordinates() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for (p, k) in [(2, 3), (3, 2), (5, 1)] {
            let ring = ResidueRing::new(p, k).unwrap();
            for _ in 0..40 {
                let b = Submodule::from_generators(&rand_mat(ring, 1, 3, &mut rng));
                let g = rand_mat(ring, 3, 3, &mut rng);
                let sq = Subquotient::new(&g, &b);
                let a_elems = sq.a.enumerate();
                let quotient: HashSet<Vec<u64>> = a_elems.iter().map(|v| b.reduce(v)).collect();
                assert_eq!(sq.module.elements().len(), quotient.len());
                // coordinates are inverse to lifting on the quotient
                for x in sq.module.elements() {
                    let y = sq.lift(&x);
                    assert!(sq.contains(&y));
                    assert_eq!(sq.coords(&y).unwrap(), x);
                }
                for v in a_elems.iter().take(30) {
                    let c = sq.coords(v).unwrap();
                    assert_eq!(b.reduce(&sq.lift(&c)), b.reduce(v));
                }
            }
        }
    }

    #[test]
    fn maps_check_well_definedness() {
        let ring = ResidueRing::new(3, 2).unwrap();
        let torsion = DiagModule::new(ring, vec![1]);
        let free = DiagModule::free(ring, 1);
        let m = MatrixR::from_rows(ring, 1, &[vec![1]]);
        assert!(ModuleMap::new(torsion.clone(), free.clone(), m.clone()).is_err());
        assert!(ModuleMap::new(free.clone(), torsion.clone(), m).is_ok());
        let mult3 = MatrixR::from_rows(ring, 1, &[vec![3]]);
        let f = ModuleMap::new(torsion.clone(), free.clone(), mult3).unwrap();
        assert!(f.is_injective() && !f.is_surjective());
        assert_eq!(f.image().module.exps, vec![1]);
    }

    #[test]
    fn kernel_and_image_lengths_add_up() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let ring = ResidueRing::new(2, 3).unwrap();
        for _ in 0..50 {
            let dom = DiagModule::new(ring, (0..3).map(|_| rng.gen_range(1..=3)).collect());
            let cod = DiagModule::free(ring, 2);
            // multiples of p^{k-e} keep the map well defined
            let mut mat = rand_mat(ring, 3, 2, &mut rng);
            for i in 0..3 {
                for j in 0..2 {
                    mat[(i, j)] = ring.mul(mat[(i, j)], ring.pow_p(ring.k() - dom.exps[i]));
                }
            }
            let f = ModuleMap::new(dom.clone(), cod, mat).unwrap();
            assert_eq!(f.kernel().module.length() + f.image().module.length(), dom.length());
            let brute = dom.elements().iter().filter(|x| f.cod.is_zero(&f.apply(x))).count();
            assert_eq!(brute as u64, ring.p().pow(f.kernel().module.length()));
        }
    }

    #[test]
    fn annihilator_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let ring = ResidueRing::new(3, 2).unwrap();
        let j = MatrixR::from_i64(ring, &[vec![0, 1], vec![-1, 0]]);
        for _ in 0..30 {
            let x = Submodule::from_generators(&rand_mat(ring, 1, 2, &mut rng));
            let ann = annihilator(&x, &j).unwrap();
            let xs = x.enumerate();
            let brute: HashSet<Vec<u64>> = Submodule::full(ring, 2)
                .enumerate()
                .into_iter()
                .filter(|y| xs.iter().all(|v| ring.sub(ring.mul(v[0], y[1]), ring.mul(v[1], y[0])) == 0))
                .collect();
            assert_eq!(ann.enumerate(), brute);
            assert_eq!(x.length() + ann.length(), 2 * ring.k());
        }
        let degenerate = MatrixR::from_i64(ring, &[vec![0, 3], vec![-3, 0]]);
        assert_eq!(annihilator(&Submodule::zero(ring, 2), &degenerate), Err(Error::PairingNotUnimodular));
    }

    #[test]
    fn presented_invariant_factors() {
        let ring = ResidueRing::new(2, 3).unwrap();
        let rel = MatrixR::from_i64(ring, &[vec![2, 4, 0], vec![0, 4, 0]]);
        let m = PresentedModule::new(3, rel).unwrap();
        assert_eq!(m.invariant_factors(), vec![3, 2, 1]);
        assert_eq!(m.diagonalize().module.invariant_factors(), vec![3, 2, 1]);
    }
}
