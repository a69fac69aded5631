//! Linear perturbation paths `H_j(t) = H_j + t V_j`, the Duhamel formula and
//! the first and second derivatives of `f(H(t))`.
//!
//! Rational functions are differentiated through resolvent products, which
//! need no eigendecomposition and apply verbatim to non-normal matrices.
//! Trig functions are differentiated through first-order operator integrals.

use crate::error::{Error, Result};
use crate::functions::{RationalSum, RationalTerm, ScalarFunction};
use crate::linalg::{
    first_noncommuting_pair, frobenius_norm, identity, inverse, CMatrix, CommutingTuple, HermitianMatrix,
    JointEigenDecomposition, Tolerances, C64,
};
use crate::moi::{moi_spectral, MoiSymbol, Slot, SymbolKind};
use std::collections::BTreeMap;

/// Times at which path commutativity is certified.
pub const CERTIFY_TIMES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Clone)]
pub struct PerturbationPath {
    base: Vec<HermitianMatrix>,
    direction: Vec<HermitianMatrix>,
    path_commuting: bool,
    tol: Tolerances,
}

impl PerturbationPath {
    pub fn new(base: Vec<HermitianMatrix>, direction: Vec<HermitianMatrix>, tol: Tolerances) -> Result<Self> {
        if base.len() != direction.len() {
            return Err(Error::ArityMismatch { expected: base.len(), found: direction.len() });
        }
        if base.is_empty() {
            return Err(Error::InvalidSpec("empty tuple".into()));
        }
        let n = base[0].dim();
        for m in base.iter().chain(&direction) {
            if m.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: m.dim() });
            }
        }
        let mut path = Self { base, direction, path_commuting: true, tol };
        for &t in &CERTIFY_TIMES {
            if first_noncommuting_pair(&path.at(t), tol.comm)?.is_some() {
                path.path_commuting = false;
                break;
            }
        }
        Ok(path)
    }

    pub fn arity(&self) -> usize {
        self.base.len()
    }

    pub fn dim(&self) -> usize {
        self.base[0].dim()
    }

    pub fn base(&self) -> &[HermitianMatrix] {
        &self.base
    }

    pub fn direction(&self) -> &[HermitianMatrix] {
        &self.direction
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    /// Commutativity certified at every time in [`CERTIFY_TIMES`].
    pub fn is_path_commuting(&self) -> bool {
        self.path_commuting
    }

    pub fn at(&self, t: f64) -> Vec<HermitianMatrix> {
        self.base.iter().zip(&self.direction).map(|(h, v)| h.add_scaled(t, v)).collect()
    }

    pub fn matrices_at(&self, t: f64) -> Vec<CMatrix> {
        self.at(t).into_iter().map(HermitianMatrix::into_matrix).collect()
    }

    pub fn directions(&self) -> Vec<CMatrix> {
        self.direction.iter().map(|v| v.matrix().clone()).collect()
    }

    pub fn tuple_at(&self, t: f64) -> Result<CommutingTuple> {
        CommutingTuple::new(self.at(t), self.tol.comm).map_err(|e| match e {
            Error::NotCommuting { i, j, norm } => Error::NotPathCommuting { t, i, j, norm },
            other => other,
        })
    }

    pub fn decompose_at(&self, t: f64) -> Result<JointEigenDecomposition> {
        crate::linalg::joint_diagonalize(&self.tuple_at(t)?, &self.tol)
    }

    /// A basis diagonalizing every `H_j` and every `V_j` at once, if the
    /// `2n` matrices commute.
    pub fn shared_eigenbasis(&self) -> Option<JointEigenDecomposition> {
        let all: Vec<HermitianMatrix> = self.base.iter().chain(&self.direction).cloned().collect();
        let tuple = CommutingTuple::new(all, self.tol.comm).ok()?;
        crate::linalg::joint_diagonalize(&tuple, &self.tol).ok()
    }
}

#[derive(Debug, Clone)]
pub struct DuhamelCheck {
    pub lhs: CMatrix,
    pub rhs: CMatrix,
    /// `||lhs - rhs||_F`.
    pub residual: f64,
}

/// Both sides of
/// `T_f^{..A..}(I..I) - T_f^{..B..}(I..I) = T_{f_j^{[1]}}^{..A,B..}(I..A-B..I)`,
/// where `others` fills the `n - 1` slots other than `j`. The operators need
/// not commute.
pub fn duhamel(
    f: &ScalarFunction,
    j: usize,
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    others: &[HermitianMatrix],
    tol: &Tolerances,
) -> Result<DuhamelCheck> {
    let n = f.arity();
    if others.len() + 1 != n {
        return Err(Error::ArityMismatch { expected: n - 1, found: others.len() });
    }
    if j >= n {
        return Err(Error::IndexOutOfRange { index: j, arity: n });
    }
    let da = JointEigenDecomposition::single(a, tol)?;
    let db = JointEigenDecomposition::single(b, tol)?;
    let ctx: Vec<JointEigenDecomposition> =
        others.iter().map(|h| JointEigenDecomposition::single(h, tol)).collect::<Result<_>>()?;
    let ctx_slot = |l: usize| Slot::new(&ctx[if l < j { l } else { l - 1 }], 0);
    let plain = MoiSymbol::new(f, SymbolKind::Plain)?;
    let with = |d: &JointEigenDecomposition| -> Result<CMatrix> {
        let slots: Vec<Slot> = (0..n).map(|l| if l == j { Slot::new(d, 0) } else { ctx_slot(l) }).collect();
        moi_spectral(&plain, &slots, &vec![None; n - 1])
    };
    let lhs = with(&da)? - with(&db)?;
    let diff = a.matrix() - b.matrix();
    let first = MoiSymbol::new(f, SymbolKind::First(j))?;
    let mut slots = Vec::with_capacity(n + 1);
    for l in 0..n {
        if l == j {
            slots.push(Slot::new(&da, 0));
            slots.push(Slot::new(&db, 0));
        } else {
            slots.push(ctx_slot(l));
        }
    }
    let mut vs: Vec<Option<&CMatrix>> = vec![None; n];
    vs[j] = Some(&diff);
    let rhs = moi_spectral(&first, &slots, &vs)?;
    let residual = frobenius_norm(&(&lhs - &rhs));
    Ok(DuhamelCheck { lhs, rhs, residual })
}

/// Resolvent powers `(z - A_l)^{-p}` for one pole, `p = 0..=max_power`.
struct ResolventPowers {
    powers: Vec<Vec<CMatrix>>,
}

impl ResolventPowers {
    fn new(pole: C64, ops: &[CMatrix], max_power: &[u32]) -> Result<Self> {
        let mut powers = Vec::with_capacity(ops.len());
        for (a, &m) in ops.iter().zip(max_power) {
            let n = a.nrows();
            let shifted = identity(n) * pole - a;
            let r = inverse(&shifted).map_err(|_| Error::PoleOnSpectrum { pole: format!("{pole}") })?;
            let mut list = vec![identity(n), r.clone()];
            for p in 2..=m as usize {
                let next = &list[p - 1] * &r;
                list.push(next);
            }
            powers.push(list);
        }
        Ok(Self { powers })
    }

    fn get(&self, l: usize, p: u32) -> &CMatrix {
        &self.powers[l][p as usize]
    }

    /// `prod_{l in range} R_l^{k_l}` in slot order.
    fn product(&self, term: &RationalTerm, range: std::ops::Range<usize>, n: usize) -> CMatrix {
        let mut acc = identity(n);
        for l in range {
            acc = acc * self.get(l, term.powers[l]);
        }
        acc
    }

    /// `sum_{p0 + p1 = k + 1} R^{p0} V R^{p1}`, the derivative of `R^k`.
    fn first_middle(&self, l: usize, k: u32, v: &CMatrix) -> CMatrix {
        let n = v.nrows();
        let mut acc = CMatrix::zeros(n, n);
        for p0 in 1..=k {
            acc += self.get(l, p0) * v * self.get(l, k + 1 - p0);
        }
        acc
    }

    /// `2 sum_{p0 + p1 + p2 = k + 2} R^{p0} V R^{p1} V R^{p2}`.
    fn second_middle(&self, l: usize, k: u32, v: &CMatrix) -> CMatrix {
        let n = v.nrows();
        let mut acc = CMatrix::zeros(n, n);
        for p0 in 1..=k {
            let left = self.get(l, p0) * v;
            for p1 in 1..=(k + 1 - p0) {
                let p2 = k + 2 - p0 - p1;
                acc += &left * self.get(l, p1) * v * self.get(l, p2);
            }
        }
        acc * C64::from(2.0)
    }
}

fn check_ops(f: &RationalSum, ops: &[CMatrix], dirs: Option<&[CMatrix]>) -> Result<usize> {
    if ops.len() != f.arity() {
        return Err(Error::ArityMismatch { expected: f.arity(), found: ops.len() });
    }
    if let Some(d) = dirs {
        if d.len() != ops.len() {
            return Err(Error::ArityMismatch { expected: ops.len(), found: d.len() });
        }
    }
    let n = ops[0].nrows();
    for m in ops.iter().chain(dirs.unwrap_or(&[])) {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.nrows() });
        }
    }
    Ok(n)
}

fn extra_powers(term: &RationalTerm, extra: u32) -> Vec<u32> {
    term.powers.iter().map(|&k| k + extra).collect()
}

/// `f(A_1, ..., A_n) = sum_k c_k prod_l (z_k - A_l)^{-k_l}` in slot order.
pub fn rational_apply(f: &RationalSum, ops: &[CMatrix]) -> Result<CMatrix> {
    let n = check_ops(f, ops, None)?;
    let mut total = CMatrix::zeros(n, n);
    for term in f.terms() {
        let r = ResolventPowers::new(term.pole, ops, &term.powers)?;
        total += r.product(term, 0..ops.len(), n) * term.coeff;
    }
    Ok(total)
}

/// `D_j = d/dt f(..., A_j + t V_j, ...)` at `t = 0`, for every `j`.
pub fn rational_first_parts(f: &RationalSum, ops: &[CMatrix], dirs: &[CMatrix]) -> Result<Vec<CMatrix>> {
    let n = check_ops(f, ops, Some(dirs))?;
    let arity = ops.len();
    let mut parts = vec![CMatrix::zeros(n, n); arity];
    for term in f.terms() {
        let r = ResolventPowers::new(term.pole, ops, &extra_powers(term, 1))?;
        for (j, part) in parts.iter_mut().enumerate() {
            let d = r.product(term, 0..j, n)
                * r.first_middle(j, term.powers[j], &dirs[j])
                * r.product(term, j + 1..arity, n);
            *part += d * term.coeff;
        }
    }
    Ok(parts)
}

/// The pieces of the second derivative: `D_{ij}` for `i < j` (one cross
/// term, entering the total with weight 2) and `D_{jj}` (the second
/// derivative of the `j`-th factor alone).
pub fn rational_second_parts(
    f: &RationalSum,
    ops: &[CMatrix],
    dirs: &[CMatrix],
) -> Result<BTreeMap<(usize, usize), CMatrix>> {
    let n = check_ops(f, ops, Some(dirs))?;
    let arity = ops.len();
    let mut parts = BTreeMap::new();
    for i in 0..arity {
        for j in i..arity {
            parts.insert((i, j), CMatrix::zeros(n, n));
        }
    }
    for term in f.terms() {
        let r = ResolventPowers::new(term.pole, ops, &extra_powers(term, 2))?;
        let firsts: Vec<CMatrix> = (0..arity).map(|l| r.first_middle(l, term.powers[l], &dirs[l])).collect();
        for i in 0..arity {
            let head = r.product(term, 0..i, n);
            let same = &head * r.second_middle(i, term.powers[i], &dirs[i]) * r.product(term, i + 1..arity, n);
            *parts.get_mut(&(i, i)).expect("present") += same * term.coeff;
            let mut left = &head * &firsts[i];
            for j in i + 1..arity {
                let d = &left * &firsts[j] * r.product(term, j + 1..arity, n);
                *parts.get_mut(&(i, j)).expect("present") += d * term.coeff;
                left = left * r.get(j, term.powers[j]);
            }
        }
    }
    Ok(parts)
}

/// `2 sum_{i<j} D_ij + sum_j D_jj`.
pub fn assemble_second(parts: &BTreeMap<(usize, usize), CMatrix>, n: usize) -> CMatrix {
    let mut total = CMatrix::zeros(n, n);
    for (&(i, j), d) in parts {
        total += if i == j { d.clone() } else { d * C64::from(2.0) };
    }
    total
}

/// `d/dt f(H(t))` at `t0`.
pub fn first_derivative(path: &PerturbationPath, f: &ScalarFunction, t0: f64) -> Result<CMatrix> {
    if f.arity() != path.arity() {
        return Err(Error::ArityMismatch { expected: path.arity(), found: f.arity() });
    }
    let parts = first_parts(path, f, t0)?;
    let n = path.dim();
    Ok(parts.into_iter().fold(CMatrix::zeros(n, n), |acc, d| acc + d))
}

/// `D_{H_j}^f(t0)` for every `j`.
pub fn first_parts(path: &PerturbationPath, f: &ScalarFunction, t0: f64) -> Result<Vec<CMatrix>> {
    match f {
        ScalarFunction::Rational(r) => rational_first_parts(r, &path.matrices_at(t0), &path.directions()),
        ScalarFunction::Trig(_) => trig_first_parts(path, f, t0),
    }
}

fn trig_first_parts(path: &PerturbationPath, f: &ScalarFunction, t0: f64) -> Result<Vec<CMatrix>> {
    let n = path.arity();
    let tol = path.tolerances();
    // One joint decomposition on commuting paths, one per operator otherwise.
    let (decomps, place): (Vec<JointEigenDecomposition>, Vec<(usize, usize)>) = if path.is_path_commuting() {
        (vec![path.decompose_at(t0)?], (0..n).map(|l| (0, l)).collect())
    } else {
        let singles = path.at(t0).iter().map(|h| JointEigenDecomposition::single(h, tol)).collect::<Result<_>>()?;
        (singles, (0..n).map(|l| (l, 0)).collect())
    };
    let slot_of = |l: usize| Slot::new(&decomps[place[l].0], place[l].1);
    let dirs = path.directions();
    let mut parts = Vec::with_capacity(n);
    for j in 0..n {
        let sym = MoiSymbol::new(f, SymbolKind::First(j))?;
        let mut slots = Vec::with_capacity(n + 1);
        for l in 0..n {
            slots.push(slot_of(l));
            if l == j {
                slots.push(slot_of(l));
            }
        }
        let mut vs: Vec<Option<&CMatrix>> = vec![None; n];
        vs[j] = Some(&dirs[j]);
        parts.push(moi_spectral(&sym, &slots, &vs)?);
    }
    Ok(parts)
}

#[derive(Debug, Clone)]
pub struct DerivativeBundle {
    pub t: f64,
    pub first: CMatrix,
    pub second: CMatrix,
    /// `D_{ij}` for `i <= j`.
    pub parts: BTreeMap<(usize, usize), CMatrix>,
}

/// First and second derivatives of `f(H(t))` at `t0` for rational `f`.
pub fn second_derivative(path: &PerturbationPath, f: &ScalarFunction, t0: f64) -> Result<DerivativeBundle> {
    let r = match f {
        ScalarFunction::Rational(r) => r,
        other => return Err(Error::UnsupportedClass(other.class_name().into())),
    };
    let ops = path.matrices_at(t0);
    let dirs = path.directions();
    let n = path.dim();
    let first = rational_first_parts(r, &ops, &dirs)?.into_iter().fold(CMatrix::zeros(n, n), |a, d| a + d);
    let parts = rational_second_parts(r, &ops, &dirs)?;
    let second = assemble_second(&parts, n);
    Ok(DerivativeBundle { t: t0, first, second, parts })
}

/// Constant `L` with `||D_j(t + e) - D_j(t)||_1 <= e L` for self-adjoint
/// paths: `sum_k |c_k| |Im z_k|^{-(|k|+2)} (sum_{i != j} k_i k_j s_i s_j + 2 k_j^2 s_j^2)`,
/// where `s_l` are the Hilbert-Schmidt norms of the directions.
pub fn first_part_lipschitz(f: &RationalSum, j: usize, hs_norms: &[f64]) -> f64 {
    f.terms()
        .iter()
        .map(|t| {
            let total: u32 = t.powers.iter().sum();
            let kj = t.powers[j] as f64;
            let cross: f64 = (0..hs_norms.len())
                .filter(|&i| i != j)
                .map(|i| t.powers[i] as f64 * kj * hs_norms[i] * hs_norms[j])
                .sum();
            t.coeff.norm() * t.pole.im.abs().powi(-(total as i32 + 2)) * (cross + 2.0 * kj * kj * hs_norms[j].powi(2))
        })
        .sum()
}
