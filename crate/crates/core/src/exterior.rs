//! Exterior powers of diagonal modules, wedge contractions and the cartesian-square maps.

use crate::error::{Error, Result};
use crate::ring_linalg::{DiagModule, MatrixR, ModuleMap, PresentedModule, ResidueRing, Solver, Submodule, Subquotient};

fn binom(n: usize, r: usize) -> usize {
    if r > n {
        return 0;
    }
    (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// All `r`-subsets of `0..d` in colex order (index = combinatorial rank).
pub fn subsets(d: usize, r: usize) -> Vec<Vec<usize>> {
    if r > d {
        return vec![];
    }
    let mut out = Vec::with_capacity(binom(d, r));
    let mut cur: Vec<usize> = (0..r).collect();
    loop {
        out.push(cur.clone());
        // advance to next combination in colex order
        let mut i = 0;
        while i < r && (i + 1 == r && cur[i] + 1 == d || i + 1 < r && cur[i] + 1 == cur[i + 1]) {
            i += 1;
        }
        if i == r {
            break;
        }
        cur[i] += 1;
        for (j, c) in cur.iter_mut().enumerate().take(i) {
            *c = j;
        }
    }
    out
}

/// Colex rank of a sorted subset.
pub fn subset_rank(s: &[usize]) -> usize {
    s.iter().enumerate().map(|(i, &x)| binom(x, i + 1)).sum()
}

/// Sign and sorted result of `e_i ^ e_T`, or `None` when `i` is in `T`.
pub fn insert_sign(i: usize, t: &[usize]) -> Option<(bool, Vec<usize>)> {
    if t.contains(&i) {
        return None;
    }
    let before = t.iter().filter(|&&x| x < i).count();
    let mut s = t.to_vec();
    s.insert(before, i);
    Some((before % 2 == 1, s))
}

/// `wedge^r` of a diagonal module: basis `e_S` over colex subsets, exponent `min_{i in S} e_i`.
pub fn exterior(m: &DiagModule, r: usize) -> DiagModule {
    let k = m.ring.k();
    let exps = subsets(m.dim(), r).iter().map(|s| s.iter().map(|&i| m.exps[i]).min().unwrap_or(k)).collect();
    DiagModule::new(m.ring, exps)
}

/// `wedge^r f`, with matrix entries the `r x r` minors of `f`.
pub fn exterior_map(f: &ModuleMap, r: usize) -> ModuleMap {
    let src = subsets(f.dom.dim(), r);
    let dst = subsets(f.cod.dim(), r);
    let ring = f.dom.ring;
    let mut mat = MatrixR::zeros(ring, src.len(), dst.len());
    for (i, s) in src.iter().enumerate() {
        if s.iter().all(|&x| f.mat.row(x).iter().all(|&c| c == 0)) && r > 0 {
            continue;
        }
        for (j, t) in dst.iter().enumerate() {
            mat[(i, j)] = f.mat.minor(s, t);
        }
    }
    ModuleMap::new(exterior(&f.dom, r), exterior(&f.cod, r), mat).expect("wedge of a well-defined map")
}

/// `v_1 ^ ... ^ v_r` in the coordinates of `wedge^r m`.
pub fn wedge(m: &DiagModule, vs: &[Vec<u64>]) -> Vec<u64> {
    let r = vs.len();
    let mat = MatrixR::from_rows(m.ring, m.dim(), vs);
    let rows: Vec<usize> = (0..r).collect();
    let ext = exterior(m, r);
    let v: Vec<u64> = subsets(m.dim(), r).iter().map(|t| mat.minor(&rows, t)).collect();
    ext.reduce(&v)
}

/// The contraction formula on a monomial: `sum_j (-1)^j psi(m_{s_j}) e_{S - s_j}`, in `wedge^{r-1}`.
fn contraction_image(ring: &ResidueRing, s: &[usize], psi: &[u64], dim_mid: usize) -> Vec<u64> {
    let mut y = vec![0; dim_mid];
    for (j, &sj) in s.iter().enumerate() {
        let mut rest = s.to_vec();
        rest.remove(j);
        let idx = subset_rank(&rest);
        let c = if j % 2 == 0 { psi[sj] } else { ring.neg(psi[sj]) };
        y[idx] = ring.add(y[idx], c);
    }
    y
}

/// The plain contraction `wedge^r M -> wedge^{r-1} M` by a functional `psi: M -> R`.
pub fn contraction(m: &DiagModule, psi: &[u64], r: usize) -> Result<ModuleMap> {
    let rows: Vec<Vec<u64>> = subsets(m.dim(), r)
        .iter()
        .map(|s| contraction_image(&m.ring, s, psi, binom(m.dim(), r.saturating_sub(1))))
        .collect();
    let mid = exterior(m, r.saturating_sub(1));
    ModuleMap::new(exterior(m, r), mid.clone(), MatrixR::from_rows(m.ring, mid.dim(), &rows))
}

/// Checks that `psi` defines a map `M -> R`.
pub fn functional_map(m: &DiagModule, psi: &[u64]) -> Result<ModuleMap> {
    if psi.len() != m.dim() {
        return Err(Error::Dimension("functional length".into()));
    }
    let col: Vec<Vec<u64>> = psi.iter().map(|&c| vec![c]).collect();
    ModuleMap::new(m.clone(), DiagModule::free(m.ring, 1), MatrixR::from_rows(m.ring, 1, &col))
}

fn check_exact(incl: &ModuleMap, psi: &[u64]) -> Result<ModuleMap> {
    let f = functional_map(&incl.cod, psi)?;
    if !incl.is_injective() {
        return Err(Error::ContractionNotFactoring("kernel map is not injective".into()));
    }
    if incl.image().a != f.kernel().a {
        return Err(Error::ContractionNotFactoring("image of N is not the kernel of psi".into()));
    }
    Ok(f)
}

/// The unique map `wedge^r M -> C (x) wedge^{r-1} N` attached to `0 -> N -> M -> C = R`.
///
/// Built as `eta_2 . eta_1^{-1} . psi_0`: with `psi(M) = p^a R`, the contraction formula is
/// lifted through `wedge^{r-1} N -> wedge^{r-1} M` modulo `p^{k-a}` and multiplied by `p^a`.
/// Fails if the lift does not exist or is not unique up to the kernel of `eta_2`.
pub fn psi_hat(incl: &ModuleMap, psi: &[u64], r: usize) -> Result<ModuleMap> {
    if r == 0 {
        return Err(Error::Input("contraction degree must be at least 1".into()));
    }
    check_exact(incl, psi)?;
    psi_hat_unchecked(incl, psi, r)
}

pub(crate) fn psi_hat_unchecked(incl: &ModuleMap, psi: &[u64], r: usize) -> Result<ModuleMap> {
    let m = &incl.cod;
    let n = &incl.dom;
    let ring = m.ring;
    let k = ring.k();
    let src = exterior(m, r);
    let tgt = exterior(n, r - 1);
    let a = psi.iter().map(|&c| ring.val(c)).min().unwrap_or(k);
    if a == k {
        return Ok(ModuleMap::zero(src, tgt));
    }
    let pa = ring.pow_p(a);
    let tau: Vec<u64> = psi.iter().map(|&c| ring.div(c, pa).unwrap()).collect();
    let lam = exterior_map(incl, r - 1);
    let mid = &lam.cod;
    let modulus = Submodule::diagonal(ring, &mid.exps.iter().map(|&e| e.min(k - a)).collect::<Vec<_>>());
    let solver = Solver::new(&lam.mat, Some(&modulus));
    let ker = solver.kernel();
    for i in 0..ker.basis().rows {
        let x = ker.basis().row(i).to_vec();
        let scaled: Vec<u64> = x.iter().map(|&c| ring.mul(c, pa)).collect();
        if !tgt.is_zero(&scaled) {
            return Err(Error::ContractionNotFactoring("lift is not unique".into()));
        }
    }
    let mut rows = Vec::new();
    for s in subsets(m.dim(), r) {
        let y = contraction_image(&ring, &s, &tau, mid.dim());
        let x = solver
            .solve(&y)
            .ok_or_else(|| Error::ContractionNotFactoring(format!("no lift for monomial {s:?}")))?;
        rows.push(tgt.reduce(&x.iter().map(|&c| ring.mul(c, pa)).collect::<Vec<_>>()));
    }
    ModuleMap::new(src, tgt.clone(), MatrixR::from_rows(ring, tgt.dim(), &rows))
}

/// Second construction of the same map through a splitting `M = Rm + N_0` with `N_0` inside `N`.
///
/// Only splittings adapted to the diagonal basis are tried, so this returns `None` when none
/// of them exists (it always exists for free `M`).
pub fn psi_hat_split(incl: &ModuleMap, psi: &[u64], r: usize) -> Result<Option<ModuleMap>> {
    check_exact(incl, psi)?;
    let m = &incl.cod;
    let n = &incl.dom;
    let ring = m.ring;
    let k = ring.k();
    let d = m.dim();
    let a = psi.iter().map(|&c| ring.val(c)).min().unwrap_or(k);
    if a == k || r == 0 {
        return Ok(None);
    }
    let weight = |i: usize| ring.val(psi[i]) + m.exps[i];
    let Some(i0) = (0..d).find(|&i| {
        ring.val(psi[i]) == a && (0..d).all(|j| psi[j] == 0 || weight(j) >= weight(i))
    }) else {
        return Ok(None);
    };
    let order: Vec<usize> = std::iter::once(i0).chain((0..d).filter(|&i| i != i0)).collect();
    let new_m = DiagModule::new(ring, order.iter().map(|&i| m.exps[i]).collect());
    // old generator -> new coordinates: h_i0 = m, h_i = n_i + t_i m
    let mut p = MatrixR::zeros(ring, d, d);
    let mut t = vec![0; d];
    for (pos, &i) in order.iter().enumerate() {
        p[(i, pos)] = 1;
        if i != i0 {
            t[i] = ring.div(psi[i], psi[i0]).unwrap();
            p[(i, 0)] = t[i];
        }
    }
    let change = ModuleMap::new(m.clone(), new_m.clone(), p)?;
    // N coordinates of the n_i
    let solver = Solver::new(&incl.mat, Some(&m.relations()));
    let mut n0_rows = Vec::new();
    for &i in order.iter().skip(1) {
        let mut v = vec![0; d];
        v[i] = 1;
        v[i0] = ring.neg(t[i]);
        let x = solver
            .solve(&m.reduce(&v))
            .ok_or_else(|| Error::ContractionNotFactoring("complement not inside N".into()))?;
        n0_rows.push(n.reduce(&x));
    }
    let n0 = DiagModule::new(ring, new_m.exps[1..].to_vec());
    let n0_incl = ModuleMap::new(n0, n.clone(), MatrixR::from_rows(ring, n.dim(), &n0_rows))?;
    let wedge_n0 = exterior_map(&n0_incl, r - 1);
    let tgt = exterior(n, r - 1);
    let new_subsets = subsets(d, r);
    let mut on_new = MatrixR::zeros(ring, new_subsets.len(), tgt.dim());
    for (u_idx, u) in new_subsets.iter().enumerate() {
        if u[0] != 0 {
            continue;
        }
        let rest: Vec<usize> = u[1..].iter().map(|&x| x - 1).collect();
        let row = wedge_n0.mat.row(subset_rank(&rest));
        for (j, &c) in row.iter().enumerate() {
            on_new[(u_idx, j)] = ring.mul(c, psi[i0]);
        }
    }
    let on_new = ModuleMap::new(exterior(&new_m, r), tgt, on_new)?;
    Ok(Some(exterior_map(&change, r).then(&on_new)?))
}

/// `wedge^r` of a presented module, presented by the relations `rho ^ e_T`.
pub fn exterior_presented(m: &PresentedModule, r: usize) -> PresentedModule {
    let ring = m.ring();
    let g = m.gens;
    let dim = binom(g, r);
    let mut rels = Vec::new();
    if r > 0 {
        for i in 0..m.relations.rows {
            let rho = m.relations.row(i);
            for t in subsets(g, r - 1) {
                let mut v = vec![0; dim];
                for (j, &c) in rho.iter().enumerate() {
                    if c == 0 {
                        continue;
                    }
                    if let Some((neg, s)) = insert_sign(j, &t) {
                        let idx = subset_rank(&s);
                        v[idx] = if neg { ring.sub(v[idx], c) } else { ring.add(v[idx], c) };
                    }
                }
                rels.push(v);
            }
        }
    }
    PresentedModule::new(dim, MatrixR::from_rows(ring, dim, &rels)).unwrap()
}

/// A cartesian square `M1 -> M2`, `h: M2 -> C2 = R^{s2}`, `C1 -> C2` with `M1 = h^{-1}(C1)`.
#[derive(Clone, Debug)]
pub struct CartesianSquare {
    pub m1: ModuleMap,
    pub h: MatrixR,
    pub c1: MatrixR,
}

impl CartesianSquare {
    pub fn new(m1: ModuleMap, h: MatrixR, c1: MatrixR) -> Result<Self> {
        let sq = CartesianSquare { m1, h, c1 };
        sq.validate()?;
        Ok(sq)
    }

    pub fn m2(&self) -> &DiagModule {
        &self.m1.cod
    }

    pub fn s1(&self) -> usize {
        self.c1.rows
    }

    pub fn s2(&self) -> usize {
        self.h.cols
    }

    fn validate(&self) -> Result<()> {
        let ring = self.h.ring;
        let m2 = self.m2();
        if self.h.rows != m2.dim() || self.c1.cols != self.h.cols {
            return Err(Error::Dimension("cartesian square shapes".into()));
        }
        ModuleMap::new(m2.clone(), DiagModule::free(ring, self.s2()), self.h.clone())?;
        if self.c1.rows > 0 {
            let s = crate::ring_linalg::smith(&self.c1);
            if s.diag.iter().any(|&v| v != 0) {
                return Err(Error::NotSummand("C1 is not a free summand of C2".into()));
            }
        }
        if !self.m1.is_injective() {
            return Err(Error::NotCartesian("M1 -> M2 not injective".into()));
        }
        let c1 = Submodule::from_generators(&self.c1);
        let pre = crate::ring_linalg::preimage(&self.h, Some(&c1)).sum(&m2.relations());
        if pre != self.m1.image().a {
            return Err(Error::NotCartesian("M1 is not the preimage of C1".into()));
        }
        Ok(())
    }

    /// Dual basis of a completion of the rows of `c1` to a basis of R^{s2}, as columns.
    pub fn default_psi_basis(&self) -> MatrixR {
        let ring = self.h.ring;
        let s2 = self.s2();
        let mut rows = self.c1.row_vecs();
        for j in 0..s2 {
            if rows.len() == s2 {
                break;
            }
            let mut e = vec![0; s2];
            e[j] = 1;
            let mut cand = rows.clone();
            cand.push(e.clone());
            let red = MatrixR::from_rows(ring, s2, &cand).reduce_to(ResidueRing::new(ring.p(), 1).unwrap());
            if Submodule::from_generators(&red).length() as usize == cand.len() {
                rows = cand;
            }
        }
        let b = MatrixR::from_rows(ring, s2, &rows);
        invert(&b).expect("completed basis is invertible")
    }

    /// The map `wedge^{r+s2} M2 -> wedge^{r+s1} M1`, normalized against the standard dual basis
    /// of `C2` and the dual basis of the rows of `c1`.
    pub fn map(&self, r: usize, psi_basis: Option<&MatrixR>) -> Result<ModuleMap> {
        let ring = self.h.ring;
        let (s1, s2) = (self.s1(), self.s2());
        let default;
        let psi = match psi_basis {
            Some(b) => b,
            None => {
                default = self.default_psi_basis();
                &default
            }
        };
        let psi_c1 = self.c1.mul(psi)?;
        for j in s1..s2 {
            if psi_c1.col(j).iter().any(|&c| c != 0) {
                return Err(Error::Input("functional beyond s1 does not vanish on C1".into()));
            }
        }
        let delta = psi.det();
        let g = psi_c1.select_cols(&(0..s1).collect::<Vec<_>>());
        let delta1 = g.det();
        if !ring.is_unit(delta) || !ring.is_unit(delta1) {
            return Err(Error::Input("functional basis is not adapted to C1".into()));
        }
        let hpsi = self.h.mul(psi)?;
        let m2 = self.m2().clone();
        // current stage: module, generators in M2 coordinates, coordinate solver
        let mut cur_module = m2.clone();
        let mut cur_sq: Option<Subquotient> = None;
        let mut acc = exterior(&m2, r + s2).identity();
        for i in (s1..s2).rev() {
            let (next_module, next_gens_m2) = if i == s1 {
                (self.m1.dom.clone(), self.m1.mat.clone())
            } else {
                let cols: Vec<usize> = (i..s2).collect();
                let ker = ModuleMap::new(m2.clone(), DiagModule::free(ring, cols.len()), hpsi.select_cols(&cols))?
                    .kernel();
                (ker.module.clone(), ker.gens.clone())
            };
            let to_cur = |v: &[u64]| -> Vec<u64> {
                match &cur_sq {
                    None => m2.reduce(v),
                    Some(sq) => sq.coords(v).expect("kernel lies in current stage"),
                }
            };
            let incl_rows: Vec<Vec<u64>> = (0..next_gens_m2.rows).map(|j| to_cur(next_gens_m2.row(j))).collect();
            let incl = ModuleMap::new(
                next_module.clone(),
                cur_module.clone(),
                MatrixR::from_rows(ring, cur_module.dim(), &incl_rows),
            )?;
            let cur_gens = match &cur_sq {
                None => MatrixR::identity(ring, m2.dim()),
                Some(sq) => sq.gens.clone(),
            };
            let h_i: Vec<u64> = cur_gens.apply_cols(&hpsi.col(i));
            let step = psi_hat(&incl, &h_i, r + i + 1)?;
            acc = acc.then(&step)?;
            cur_sq = Some(Subquotient::of(&m2, &next_gens_m2));
            cur_module = next_module;
        }
        if s1 == s2 {
            let solver = Solver::new(&self.m1.mat, Some(&m2.relations()));
            let rows: Vec<Vec<u64>> = (0..m2.dim())
                .map(|j| {
                    let mut e = vec![0; m2.dim()];
                    e[j] = 1;
                    self.m1.dom.reduce(&solver.solve(&m2.reduce(&e)).expect("M1 = M2"))
                })
                .collect();
            let back = ModuleMap::new(m2.clone(), self.m1.dom.clone(), MatrixR::from_rows(ring, self.m1.dom.dim(), &rows))?;
            acc = exterior_map(&back, r + s1);
        }
        let unit = ring.mul(delta1, ring.inv(delta).unwrap());
        Ok(acc.scale(unit))
    }
}

impl MatrixR {
    /// `A * c` for a column vector `c`.
    pub fn apply_cols(&self, c: &[u64]) -> Vec<u64> {
        self.transpose().apply(c)
    }
}

/// Inverse of a square matrix over Z/p^k.
pub fn invert(b: &MatrixR) -> Option<MatrixR> {
    let n = b.rows;
    let solver = Solver::new(b, None);
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = vec![0; n];
        e[i] = 1;
        rows.push(solver.solve(&e)?);
    }
    Some(MatrixR::from_rows(b.ring, n, &rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colex_order_and_rank() {
        let s = subsets(4, 2);
        assert_eq!(s, vec![vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 3], vec![1, 3], vec![2, 3]]);
        for (i, t) in s.iter().enumerate() {
            assert_eq!(subset_rank(t), i);
        }
        assert_eq!(subsets(3, 0), vec![Vec::<usize>::new()]);
        assert!(subsets(2, 3).is_empty());
        for d in 0..7 {
            for r in 0..=d {
                assert_eq!(subsets(d, r).len(), binom(d, r));
            }
        }
    }

    #[test]
    fn split_counterexample_still_has_contraction() {
        // M = R + R/p over Z/27, psi = (p, p^2); ker psi is cyclic and no splitting exists
        let ring = ResidueRing::new(3, 3).unwrap();
        let m = DiagModule::new(ring, vec![3, 1]);
        let psi = vec![3, 9];
        let f = functional_map(&m, &psi).unwrap();
        let ker = f.kernel();
        assert_eq!(ker.module.exps, vec![2]);
        let incl = ker.inclusion(&m);
        assert!(psi_hat_split(&incl, &psi, 2).unwrap().is_none());
        let map = psi_hat(&incl, &psi, 2).unwrap();
        assert_eq!(map.dom.exps, vec![1]);
        assert!(!map.is_zero());
    }
}
