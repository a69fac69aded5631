//! Dissipative matrices, Cayley transforms, the truncated Hardy shift
//! example and the first- and second-order trace identities for dissipative
//! tuples.
//!
//! Functions of dissipative tuples are rational sums with all poles in the
//! lower half-plane, applied through resolvent solves so that
//! non-diagonalizable matrices are handled exactly.

use crate::error::{Error, Result};
use crate::functions::{sup_norm_partial, RationalSum, ScalarFunction};
use crate::linalg::{
    commutator, frobenius_norm, identity, imaginary_part, inverse, operator_norm, real_part, singular_values, trace,
    trace_norm, CMatrix, HermitianMatrix, Tolerances, C64, I,
};
use crate::perturb::{assemble_second, rational_apply, rational_first_parts, rational_second_parts};
use crate::quadrature::UnitRule;
use crate::report::{BoundCheck, VerificationReport};

/// Allowed negative margin of the imaginary part.
pub const TOL_DISS: f64 = 1e-10;
/// `I - T` is treated as singular below this smallest singular value.
pub const CAYLEY_POLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipativityCheck {
    /// Smallest eigenvalue of `(L - L*) / 2i`.
    pub margin: f64,
    pub pass: bool,
}

pub fn is_dissipative(l: &CMatrix) -> Result<DissipativityCheck> {
    let im = HermitianMatrix::new(imaginary_part(l), f64::INFINITY)?;
    let eig = crate::linalg::eig_hermitian(&im, &Tolerances::default())?;
    let margin = eig.values.first().copied().unwrap_or(0.0);
    Ok(DissipativityCheck { margin, pass: margin >= -TOL_DISS })
}

/// Eigenvalues of a general complex matrix from its Schur form.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<C64>> {
    let schur = a.clone().try_schur(f64::EPSILON, 100_000).ok_or_else(|| Error::EigenFailure("Schur iteration".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|k| t[(k, k)]).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DissipativeMatrix(CMatrix);

impl DissipativeMatrix {
    pub fn new(l: CMatrix) -> Result<Self> {
        let check = is_dissipative(&l)?;
        if !check.pass {
            return Err(Error::NotDissipative { margin: check.margin });
        }
        Ok(Self(l))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }
}

/// `T = (L - iI)(L + iI)^{-1}`.
pub fn cayley(l: &DissipativeMatrix) -> Result<CMatrix> {
    let n = l.0.nrows();
    let id = identity(n);
    Ok((&l.0 - &id * I) * inverse(&(&l.0 + &id * I))?)
}

/// `L = i(I + T)(I - T)^{-1}`.
pub fn inverse_cayley(t: &CMatrix) -> Result<CMatrix> {
    let id = identity(t.nrows());
    let diff = &id - t;
    let sigma = singular_values(&diff).last().copied().unwrap_or(0.0);
    if sigma < CAYLEY_POLE_TOL {
        return Err(Error::CayleyPole { sigma });
    }
    Ok((&id + t) * inverse(&diff)? * I)
}

/// A tuple of dissipative matrices.
#[derive(Debug, Clone)]
pub struct DissipativeTuple {
    mats: Vec<DissipativeMatrix>,
    resolvent_commuting: bool,
}

/// Largest relative commutator norm of `(L_j + iI)^{-1}`.
pub fn resolvent_commutator_norm(mats: &[CMatrix]) -> Result<f64> {
    let rs: Vec<CMatrix> = mats
        .iter()
        .map(|l| inverse(&(l + identity(l.nrows()) * I)))
        .collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for i in 0..rs.len() {
        for j in i + 1..rs.len() {
            let scale = (frobenius_norm(&rs[i]) * frobenius_norm(&rs[j])).max(1.0);
            worst = worst.max(frobenius_norm(&commutator(&rs[i], &rs[j])) / scale);
        }
    }
    Ok(worst)
}

impl DissipativeTuple {
    pub fn new(mats: Vec<CMatrix>, tol_comm: f64) -> Result<Self> {
        let n = mats.first().map_or(0, |m| m.nrows());
        if let Some(m) = mats.iter().find(|m| m.nrows() != n || m.ncols() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: m.nrows() });
        }
        let resolvent_commuting = resolvent_commutator_norm(&mats)? <= tol_comm;
        let mats = mats.into_iter().map(DissipativeMatrix::new).collect::<Result<_>>()?;
        Ok(Self { mats, resolvent_commuting })
    }

    pub fn arity(&self) -> usize {
        self.mats.len()
    }

    pub fn dim(&self) -> usize {
        self.mats.first().map_or(0, |m| m.0.nrows())
    }

    pub fn mats(&self) -> &[DissipativeMatrix] {
        &self.mats
    }

    pub fn matrices(&self) -> Vec<CMatrix> {
        self.mats.iter().map(|m| m.0.clone()).collect()
    }

    pub fn is_resolvent_commuting(&self) -> bool {
        self.resolvent_commuting
    }
}

/// `N x N` lower shift.
pub fn lower_shift(n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |r, c| if r == c + 1 { C64::from(1.0) } else { C64::from(0.0) })
}

/// `L_k = i(I + S^k)(I - S^k)^{-1}`, `k = 1..=n`, with the inverse taken as
/// the terminating Neumann series.
pub fn hardy_shift_tuple(dim: usize, n: usize) -> Result<DissipativeTuple> {
    if dim < n + 1 {
        return Err(Error::InvalidSpec(format!("Hardy tuple needs N >= n + 1, got N = {dim}, n = {n}")));
    }
    let s = lower_shift(dim);
    let id = identity(dim);
    let mut mats = Vec::with_capacity(n);
    let mut t = id.clone();
    for _ in 0..n {
        t = &t * &s;
        let mut neumann = id.clone();
        let mut power = id.clone();
        loop {
            power = &power * &t;
            if power.iter().all(|x| *x == C64::from(0.0)) {
                break;
            }
            neumann += &power;
        }
        mats.push((&id + &t) * neumann * I);
    }
    DissipativeTuple::new(mats, Tolerances::default().comm)
}

/// `(zI - L_k)^{-1} = (z - i)^{-1} (I - T) sum_m w^m T^m` with `T = S^k`,
/// `w = (z + i)/(z - i)`.
pub fn hardy_resolvent(dim: usize, k: usize, z: C64) -> CMatrix {
    let s = lower_shift(dim);
    let id = identity(dim);
    let mut t = id.clone();
    for _ in 0..k {
        t = &t * &s;
    }
    let w = (z + I) / (z - I);
    let mut series = id.clone();
    let mut term = id.clone();
    for _ in 0..dim {
        term = &term * &t * w;
        series += &term;
    }
    (&id - &t) * series / (z - I)
}

fn require_lower(f: &RationalSum) -> Result<()> {
    if !f.is_lower() {
        return Err(Error::WrongHalfPlane);
    }
    Ok(())
}

/// `f(L_1, ..., L_n)` for a rational sum with poles in the lower half-plane.
pub fn apply_rational_lower(f: &RationalSum, tuple: &DissipativeTuple) -> Result<CMatrix> {
    require_lower(f)?;
    rational_apply(f, &tuple.matrices())
}

/// `L_j(t) = L_j + t V_j` with `L_j` and `L_j + V_j` dissipative.
#[derive(Debug, Clone)]
pub struct DissipativePath {
    base: Vec<CMatrix>,
    direction: Vec<CMatrix>,
    tol: Tolerances,
}

impl DissipativePath {
    pub fn new(base: Vec<CMatrix>, direction: Vec<CMatrix>, tol: Tolerances) -> Result<Self> {
        if base.len() != direction.len() {
            return Err(Error::ArityMismatch { expected: base.len(), found: direction.len() });
        }
        let n = base.first().map_or(0, |m| m.nrows());
        if let Some(m) = base.iter().chain(&direction).find(|m| m.nrows() != n || m.ncols() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: m.nrows() });
        }
        let path = Self { base, direction, tol };
        path.check_at(0.0)?;
        path.check_at(1.0)?;
        Ok(path)
    }

    pub fn arity(&self) -> usize {
        self.base.len()
    }

    pub fn dim(&self) -> usize {
        self.base.first().map_or(0, |m| m.nrows())
    }

    pub fn base(&self) -> &[CMatrix] {
        &self.base
    }

    pub fn direction(&self) -> &[CMatrix] {
        &self.direction
    }

    pub fn at(&self, t: f64) -> Vec<CMatrix> {
        self.base.iter().zip(&self.direction).map(|(l, v)| l + v * C64::from(t)).collect()
    }

    fn check_at(&self, t: f64) -> Result<()> {
        for (index, m) in self.at(t).iter().enumerate() {
            let c = is_dissipative(m)?;
            if !c.pass {
                return Err(Error::PathLeavesDissipative { t, index, margin: c.margin });
            }
        }
        Ok(())
    }

    /// Dissipativity at the quadrature nodes and endpoints, and whether the
    /// path is resolvent-commuting at all of them.
    pub fn certify(&self, rule: &UnitRule) -> Result<bool> {
        let mut commuting = true;
        for t in std::iter::once(0.0).chain(rule.nodes.iter().copied()).chain(std::iter::once(1.0)) {
            self.check_at(t)?;
            commuting &= resolvent_commutator_norm(&self.at(t))? <= self.tol.comm;
        }
        Ok(commuting)
    }
}

fn lower_rational(f: &ScalarFunction, arity: usize) -> Result<&RationalSum> {
    let r = match f {
        ScalarFunction::Rational(r) => r,
        other => return Err(Error::UnsupportedClass(other.class_name().into())),
    };
    require_lower(r)?;
    if r.arity() != arity {
        return Err(Error::ArityMismatch { expected: arity, found: r.arity() });
    }
    Ok(r)
}

fn real_box(path: &DissipativePath) -> Vec<(f64, f64)> {
    (0..path.arity())
        .map(|j| {
            let r = operator_norm(&path.base[j]) + operator_norm(&path.direction[j]);
            (-2.0 * (1.0 + r), 2.0 * (1.0 + r))
        })
        .collect()
}

fn endpoint_difference(path: &DissipativePath, f: &RationalSum) -> Result<C64> {
    Ok(trace(&rational_apply(f, &path.at(1.0))?) - trace(&rational_apply(f, &path.at(0.0))?))
}

/// First-order identity `Tr{f(L(1)) - f(L(0))} = sum_j int_0^1 Tr D_j(t) dt`,
/// the reduction `Tr D_j = Tr(d_j f(L(t)) V_j)` and the bound
/// `|Tr D_j| <= (||Re V_j||_1 + ||Im V_j||_1) sup |d_j f|`.
///
/// The reduction and the bound are asserted on resolvent-commuting paths and
/// reported as diagnostics otherwise.
pub fn dissipative_krein_verify(
    path: &DissipativePath,
    f: &ScalarFunction,
    q: usize,
    tol: f64,
) -> Result<VerificationReport> {
    let n = path.arity();
    let r = lower_rational(f, n)?;
    let rule = UnitRule::gauss_legendre(q);
    let commuting = path.certify(&rule)?;
    let lhs = endpoint_difference(path, r)?;
    let partials: Vec<RationalSum> = (0..n).map(|j| r.partial(j)).collect::<Result<_>>()?;
    let bbox = real_box(path);
    let mut rhs = C64::from(0.0);
    let mut reduction: f64 = 0.0;
    let mut worst = vec![0.0f64; n];
    for (t, w) in rule.iter() {
        let ops = path.at(t);
        let parts = rational_first_parts(r, &ops, &path.direction)?;
        for j in 0..n {
            let tr = trace(&parts[j]);
            rhs += tr * w;
            worst[j] = worst[j].max(tr.norm());
            let reduced = trace(&(rational_apply(&partials[j], &ops)? * &path.direction[j]));
            reduction = reduction.max((tr - reduced).norm() / (1.0 + tr.norm()));
        }
    }
    let mut report = VerificationReport::new("dissipative_krein", lhs, rhs, tol);
    let mark = |c: BoundCheck| if commuting { c } else { c.diagnostic() };
    report.push(mark(BoundCheck::new("reduction_to_partial", 1e-9, reduction)));
    for j in 0..n {
        let v = &path.direction[j];
        let weight = trace_norm(&real_part(v)) + trace_norm(&imaginary_part(v));
        let alpha: Vec<u32> = (0..n).map(|l| u32::from(l == j)).collect();
        let sup = sup_norm_partial(f, &alpha, &bbox, false)?.certified_upper;
        report.push(mark(BoundCheck::new(format!("partial_trace_bound[{}]", j + 1), weight * sup, worst[j])));
    }
    Ok(report)
}

/// Second-order identity
/// `Tr{f(L(1)) - f(L(0)) - sum_j D_j(0)} = 2 sum_{i<j} int (1-t) Tr D_ij + sum_j int (1-t) Tr D_jj`
/// with the bound `|Tr D_ij| <= ||V_i||_2 ||V_j||_2 sup |d_i d_j f|`.
pub fn dissipative_koplienko_verify(
    path: &DissipativePath,
    f: &ScalarFunction,
    q: usize,
    tol: f64,
) -> Result<VerificationReport> {
    let n = path.arity();
    let r = lower_rational(f, n)?;
    let rule = UnitRule::gauss_legendre(q);
    let commuting = path.certify(&rule)?;
    let first: C64 = rational_first_parts(r, &path.at(0.0), &path.direction)?.iter().map(trace).sum();
    let lhs = endpoint_difference(path, r)? - first;
    let dim = path.dim();
    let mut rhs = C64::from(0.0);
    let mut worst = std::collections::BTreeMap::new();
    for (t, w) in rule.iter() {
        let parts = rational_second_parts(r, &path.at(t), &path.direction)?;
        rhs += trace(&assemble_second(&parts, dim)) * ((1.0 - t) * w);
        for (k, d) in &parts {
            let e = worst.entry(*k).or_insert(0.0f64);
            *e = e.max(trace(d).norm());
        }
    }
    let mut report = VerificationReport::new("dissipative_koplienko", lhs, rhs, tol);
    let bbox = real_box(path);
    let hs: Vec<f64> = path.direction.iter().map(frobenius_norm).collect();
    for (&(i, j), &attained) in &worst {
        let mut alpha = vec![0u32; n];
        alpha[i] += 1;
        alpha[j] += 1;
        let sup = sup_norm_partial(f, &alpha, &bbox, false)?.certified_upper;
        let check = BoundCheck::new(format!("second_trace_bound[{},{}]", i + 1, j + 1), hs[i] * hs[j] * sup, attained);
        report.push(if commuting { check } else { check.diagnostic() });
    }
    Ok(report)
}
