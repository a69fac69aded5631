//! Dense complex linear algebra: Hermitian eigendecomposition, joint
//! diagonalization of commuting tuples, functional calculus and norms.

use crate::error::{Error, Result};
use crate::functions::ScalarFunction;
use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub herm: f64,
    pub comm: f64,
    pub eig: f64,
    pub diag: f64,
    pub unitary: f64,
    pub cluster: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-10,
            comm: 1e-10,
            eig: 1e-9,
            diag: 1e-9,
            unitary: 1e-11,
            cluster: 1e-8,
        }
    }
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn from_real_diag(d: &[f64]) -> CMatrix {
    let n = d.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { C64::from(d[i]) } else { C64::from(0.0) })
}

pub fn from_real(n: usize, entries: &[f64]) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| C64::from(entries[i * n + j]))
}

pub fn trace(a: &CMatrix) -> C64 {
    a.diagonal().iter().sum()
}

pub fn frobenius_norm(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn operator_norm(a: &CMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

pub fn trace_norm(a: &CMatrix) -> f64 {
    singular_values(a).iter().sum()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn hermitian_residual(a: &CMatrix) -> f64 {
    frobenius_norm(&(a - a.adjoint()))
}

/// `(A - A*) / 2i`, Hermitian for every square `A`.
pub fn imaginary_part(a: &CMatrix) -> CMatrix {
    (a - a.adjoint()) * C64::new(0.0, -0.5)
}

/// `(A + A*) / 2`.
pub fn real_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * C64::from(0.5)
}

pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    a.clone().lu().try_inverse().ok_or(Error::Singular)
}

fn check_square(a: &CMatrix) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
    }
    Ok(())
}

/// A square matrix certified Hermitian within `tol * max(1, ||A||_F)`.
/// The stored matrix is the exact Hermitian part `(A + A*)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(a: CMatrix, tol: f64) -> Result<Self> {
        check_square(&a)?;
        let residual = hermitian_residual(&a);
        let scaled = tol * frobenius_norm(&a).max(1.0);
        if residual > scaled {
            return Err(Error::NotHermitian { residual, tol: scaled });
        }
        Ok(Self(real_part(&a)))
    }

    pub fn from_real_diag(d: &[f64]) -> Self {
        Self(from_real_diag(d))
    }

    pub fn zeros(n: usize) -> Self {
        Self(CMatrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// `self + t * other`, Hermitian by construction.
    pub fn add_scaled(&self, t: f64, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 + &other.0 * C64::from(t))
    }

    /// Spectral absolute value `|A|`.
    pub fn abs(&self) -> Result<CMatrix> {
        let d = JointEigenDecomposition::single(self, &Tolerances::default())?;
        Ok(d.apply_with(|row| C64::from(row[0].abs())))
    }
}

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

/// Eigendecomposition `A = U diag(values) U*` with ascending eigenvalues.
pub fn eig_hermitian(a: &HermitianMatrix, tol: &Tolerances) -> Result<HermitianEigen> {
    let (values, vectors) = eig_raw(a.matrix())?;
    let n = a.dim();
    let scale = frobenius_norm(a.matrix()).max(1.0);
    let residual = frobenius_norm(&(a.matrix() * &vectors - &vectors * from_real_diag(&values)));
    if residual > tol.eig * scale {
        return Err(Error::EigenFailure(format!("residual {residual:.3e}")));
    }
    let unitary = frobenius_norm(&(vectors.adjoint() * &vectors - identity(n)));
    if unitary > tol.unitary * (n as f64).max(1.0) {
        return Err(Error::EigenFailure(format!("unitarity defect {unitary:.3e}")));
    }
    Ok(HermitianEigen { values, vectors })
}

fn eig_raw(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let eig = a
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 100_000)
        .ok_or_else(|| Error::EigenFailure("QR iteration did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(i);
        // Fix the phase so that the largest component is real and positive.
        let mut best = 0;
        for r in 0..n {
            if col[r].norm() > col[best].norm() * (1.0 + 1e-12) {
                best = r;
            }
        }
        let phase = if col[best].norm() > 0.0 { col[best].conj() / col[best].norm() } else { C64::from(1.0) };
        for r in 0..n {
            vectors[(r, c)] = col[r] * phase;
        }
    }
    Ok((values, vectors))
}

/// A tuple of pairwise commuting Hermitian matrices of equal dimension.
#[derive(Debug, Clone)]
pub struct CommutingTuple {
    mats: Vec<HermitianMatrix>,
}

impl CommutingTuple {
    pub fn new(mats: Vec<HermitianMatrix>, tol_comm: f64) -> Result<Self> {
        if let Some((i, j, norm)) = first_noncommuting_pair(&mats, tol_comm)? {
            return Err(Error::NotCommuting { i, j, norm });
        }
        Ok(Self { mats })
    }

    pub fn arity(&self) -> usize {
        self.mats.len()
    }

    pub fn dim(&self) -> usize {
        self.mats.first().map_or(0, |m| m.dim())
    }

    pub fn mats(&self) -> &[HermitianMatrix] {
        &self.mats
    }
}

/// First pair `(i, j)` whose commutator exceeds `tol * max(1, ||H_i|| ||H_j||)`.
pub fn first_noncommuting_pair(mats: &[HermitianMatrix], tol: f64) -> Result<Option<(usize, usize, f64)>> {
    let n = mats.first().map_or(0, |m| m.dim());
    for m in mats {
        if m.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.dim() });
        }
    }
    for i in 0..mats.len() {
        for j in i + 1..mats.len() {
            let norm = frobenius_norm(&commutator(mats[i].matrix(), mats[j].matrix()));
            let scale = (frobenius_norm(mats[i].matrix()) * frobenius_norm(mats[j].matrix())).max(1.0);
            if norm > tol * scale {
                return Ok(Some((i, j, norm)));
            }
        }
    }
    Ok(None)
}

/// Common eigenbasis `U` and eigentable `table[k][j]`, so that
/// `H_j = U diag(table[.][j]) U*`.
#[derive(Debug, Clone)]
pub struct JointEigenDecomposition {
    pub unitary: CMatrix,
    pub table: Vec<Vec<f64>>,
}

impl JointEigenDecomposition {
    pub fn single(h: &HermitianMatrix, tol: &Tolerances) -> Result<Self> {
        joint_diagonalize(&CommutingTuple { mats: vec![h.clone()] }, tol)
    }

    pub fn dim(&self) -> usize {
        self.table.len()
    }

    pub fn arity(&self) -> usize {
        self.table.first().map_or(0, |r| r.len())
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.table.iter().map(|r| r[j]).collect()
    }

    /// `U diag(g(row_k)) U*`.
    pub fn apply_with<G: FnMut(&[f64]) -> C64>(&self, mut g: G) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.unitary.clone();
        for k in 0..n {
            let v = g(&self.table[k]);
            for r in 0..n {
                scaled[(r, k)] *= v;
            }
        }
        scaled * self.unitary.adjoint()
    }

    pub fn apply_function(&self, f: &ScalarFunction) -> Result<CMatrix> {
        if f.arity() != self.arity() {
            return Err(Error::ArityMismatch { expected: self.arity(), found: f.arity() });
        }
        Ok(self.apply_with(|row| f.eval(row)))
    }

    pub fn reconstruct(&self, j: usize) -> CMatrix {
        self.apply_with(|row| C64::from(row[j]))
    }

    /// `U* A U`.
    pub fn to_eigenbasis(&self, a: &CMatrix) -> CMatrix {
        self.unitary.adjoint() * a * &self.unitary
    }
}

fn eig_block(h: &CMatrix, basis: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let b = basis.adjoint() * h * basis;
    let b = real_part(&b);
    let (vals, w) = eig_raw(&b)?;
    Ok((vals, basis * w))
}

/// Cascade diagonalization: diagonalize `H_1`, then rediagonalize each
/// later operator on the clusters of eigenvalues left degenerate so far.
pub fn joint_diagonalize(tuple: &CommutingTuple, tol: &Tolerances) -> Result<JointEigenDecomposition> {
    let n = tuple.dim();
    let arity = tuple.arity();
    let mut basis = identity(n);
    let mut clusters: Vec<(usize, usize)> = if n > 0 { vec![(0, n)] } else { Vec::new() };
    for hm in &tuple.mats {
        let h = hm.matrix();
        let gap = tol.cluster * frobenius_norm(h).max(1.0);
        let mut next = Vec::new();
        for &(start, len) in &clusters {
            let sub = basis.columns(start, len).into_owned();
            let (vals, vecs) = eig_block(h, &sub)?;
            basis.columns_mut(start, len).copy_from(&vecs);
            let mut s = 0;
            for k in 1..=len {
                if k == len || vals[k] - vals[k - 1] > gap {
                    next.push((start + s, k - s));
                    s = k;
                }
            }
        }
        clusters = next;
    }
    let mut table = vec![vec![0.0; arity]; n];
    // Read every column in the final basis; snapping makes ties exact.
    for (j, hm) in tuple.mats.iter().enumerate() {
        let gap = tol.cluster * frobenius_norm(hm.matrix()).max(1.0);
        let diag: Vec<f64> = (0..n)
            .map(|k| {
                let col = basis.column(k);
                (col.adjoint() * hm.matrix() * col)[(0, 0)].re
            })
            .collect();
        snap_column(&mut table, j, &diag, gap);
    }
    let decomp = JointEigenDecomposition { unitary: basis, table };
    verify_decomposition(tuple, &decomp, tol)?;
    Ok(decomp)
}

fn snap_column(table: &mut [Vec<f64>], j: usize, diag: &[f64], gap: f64) {
    let mut order: Vec<usize> = (0..diag.len()).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]).then(a.cmp(&b)));
    let mut s = 0;
    for k in 1..=order.len() {
        if k == order.len() || diag[order[k]] - diag[order[k - 1]] > gap {
            let mean = order[s..k].iter().map(|&r| diag[r]).sum::<f64>() / (k - s) as f64;
            for &r in &order[s..k] {
                table[r][j] = mean;
            }
            s = k;
        }
    }
}

fn verify_decomposition(tuple: &CommutingTuple, d: &JointEigenDecomposition, tol: &Tolerances) -> Result<()> {
    let n = tuple.dim();
    let defect = frobenius_norm(&(d.unitary.adjoint() * &d.unitary - identity(n)));
    if defect > tol.unitary * (n as f64).max(1.0) {
        return Err(Error::EigenFailure(format!("unitarity defect {defect:.3e}")));
    }
    for (j, h) in tuple.mats.iter().enumerate() {
        let scale = frobenius_norm(h.matrix()).max(1.0);
        let residual = frobenius_norm(&(d.reconstruct(j) - h.matrix()));
        if residual > tol.diag * scale {
            return Err(Error::JointDiagonalization { index: j, residual, tol: tol.diag * scale });
        }
    }
    Ok(())
}
