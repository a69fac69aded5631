//! Seeded instance families and random test functions.
//!
//! Every family is drawn from [`SplitMix64`] in a fixed order, so an
//! [`InstanceSpec`] reproduces bit-identical matrices.

use crate::dissipative::{hardy_shift_tuple, DissipativePath};
use crate::error::{Error, Result};
use crate::functions::{RationalSum, ScalarFunction, TrigSum};
use crate::linalg::{from_real_diag, identity, CMatrix, HermitianMatrix, Tolerances, C64};
use crate::perturb::PerturbationPath;
use crate::rng::SplitMix64;
use serde::{Deserialize, Serialize};

/// Haar-distributed unitary from the QR factorization of a complex Ginibre matrix.
pub fn random_unitary(n: usize, rng: &mut SplitMix64) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| C64::new(rng.normal(), rng.normal()));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::from(1.0) };
        for i in 0..n {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// Random Hermitian matrix with standard Gaussian entries.
pub fn random_hermitian(n: usize, rng: &mut SplitMix64) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| C64::new(rng.normal(), rng.normal()));
    (&g + g.adjoint()) * C64::from(0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `H_j`, `V_j` diagonal in one random unitary basis.
    SharedBasis,
    /// `H_j = p_j(H_0)`, `V_j = p_j(H_0 + V) - p_j(H_0)` with commuting
    /// `H_0`, `V` and real cubic polynomials `p_j`.
    FunctionOfOne,
    /// `H_k = I + .. + A_k + .. + I`, `V_k = 0 + .. + B_k + .. + 0` over `n`
    /// equal diagonal blocks.
    DirectSum,
    /// `H_j = P x .. x P A_j P x .. x P x C_j` and the same with `B_j`, on
    /// `(C^d)^{x n} x C^c` with a fixed projection `P` of rank `d - 1`.
    TensorProjection,
    /// Truncated Hardy shift tuple with a real diagonal perturbation.
    HardyDissipative,
}

fn default_scale() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub seed: u64,
    /// Matrix dimension `N`.
    pub dim: usize,
    /// Tuple size `n`.
    pub arity: usize,
    pub family: Family,
    /// Size of the perturbation.
    #[serde(default = "default_scale")]
    pub scale: f64,
    /// Draw `V_j >= 0`.
    #[serde(default)]
    pub positive: bool,
    /// Local dimension `d` of the tensor family.
    #[serde(default)]
    pub local_dim: Option<usize>,
    /// Hardy family: `V_j = scale * eps_j * I` instead of a general
    /// nonnegative diagonal, which keeps the path resolvent-commuting.
    #[serde(default)]
    pub scalar_direction: bool,
}

impl InstanceSpec {
    pub fn new(seed: u64, dim: usize, arity: usize, family: Family) -> Self {
        Self { seed, dim, arity, family, scale: default_scale(), positive: false, local_dim: None, scalar_direction: false }
    }
}

#[derive(Debug, Clone)]
pub enum Instance {
    Hermitian(PerturbationPath),
    Dissipative(DissipativePath),
}

impl Instance {
    pub fn hermitian(self) -> Result<PerturbationPath> {
        match self {
            Self::Hermitian(p) => Ok(p),
            Self::Dissipative(_) => Err(Error::InvalidSpec("instance is dissipative".into())),
        }
    }

    pub fn dissipative(self) -> Result<DissipativePath> {
        match self {
            Self::Dissipative(p) => Ok(p),
            Self::Hermitian(_) => Err(Error::InvalidSpec("instance is self-adjoint".into())),
        }
    }
}

fn conj(u: &CMatrix, d: &[f64]) -> CMatrix {
    u * from_real_diag(d) * u.adjoint()
}

fn herm(m: CMatrix) -> Result<HermitianMatrix> {
    HermitianMatrix::new(m, 1e-10)
}

fn direction_values(spec: &InstanceSpec, rng: &mut SplitMix64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| if spec.positive { spec.scale * rng.next_f64() } else { spec.scale * rng.uniform(-1.0, 1.0) })
        .collect()
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn gen(spec: &InstanceSpec) -> Result<Instance> {
    let (dim, n) = (spec.dim, spec.arity);
    if dim == 0 || n == 0 {
        return Err(Error::InvalidSpec("dimension and arity must be positive".into()));
    }
    if !(spec.scale.is_finite() && spec.scale >= 0.0) {
        return Err(Error::InvalidSpec(format!("scale {} must be nonnegative", spec.scale)));
    }
    let mut rng = SplitMix64::new(spec.seed);
    let tol = Tolerances::default();
    let (base, direction) = match spec.family {
        Family::SharedBasis => {
            let u = random_unitary(dim, &mut rng);
            let mut base = Vec::with_capacity(n);
            let mut direction = Vec::with_capacity(n);
            for _ in 0..n {
                let h: Vec<f64> = (0..dim).map(|_| rng.uniform(-1.0, 1.0)).collect();
                base.push(herm(conj(&u, &h))?);
            }
            for _ in 0..n {
                direction.push(herm(conj(&u, &direction_values(spec, &mut rng, dim)))?);
            }
            (base, direction)
        }
        Family::FunctionOfOne => {
            let u = random_unitary(dim, &mut rng);
            let h0: Vec<f64> = (0..dim).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let v: Vec<f64> = direction_values(spec, &mut rng, dim);
            let mut base = Vec::with_capacity(n);
            let mut direction = Vec::with_capacity(n);
            for _ in 0..n {
                let mut c: Vec<f64> = (0..4).map(|_| rng.uniform(-1.0, 1.0)).collect();
                if spec.positive {
                    // Increasing on [-1, 1 + scale]: p' = c1 + 2 c2 x + 3 c3 x^2 with |c2|, |c3| small.
                    c[1] = 1.0 + c[1].abs();
                    c[2] *= 0.1;
                    c[3] = 0.05 * c[3].abs();
                }
                let p = |x: f64| c[0] + x * (c[1] + x * (c[2] + x * c[3]));
                let hb: Vec<f64> = h0.iter().map(|&x| p(x)).collect();
                let vb: Vec<f64> = h0.iter().zip(&v).map(|(&x, &y)| p(x + y) - p(x)).collect();
                base.push(herm(conj(&u, &hb))?);
                direction.push(herm(conj(&u, &vb))?);
            }
            (base, direction)
        }
        Family::DirectSum => {
            if dim % n != 0 {
                return Err(Error::InvalidSpec(format!("direct sum needs n | N, got N = {dim}, n = {n}")));
            }
            let m = dim / n;
            let mut base = Vec::with_capacity(n);
            let mut direction = Vec::with_capacity(n);
            for k in 0..n {
                let a = random_hermitian(m, &mut rng) * C64::from(0.5);
                let b = if spec.positive {
                    let g = random_hermitian(m, &mut rng);
                    &g * &g * C64::from(spec.scale / m as f64)
                } else {
                    random_hermitian(m, &mut rng) * C64::from(spec.scale / (m as f64).sqrt())
                };
                let mut h = identity(dim);
                let mut v = CMatrix::zeros(dim, dim);
                h.view_mut((k * m, k * m), (m, m)).copy_from(&a);
                v.view_mut((k * m, k * m), (m, m)).copy_from(&b);
                base.push(herm(h)?);
                direction.push(herm(v)?);
            }
            (base, direction)
        }
        Family::TensorProjection => {
            let d = spec.local_dim.unwrap_or(3);
            let block = d.checked_pow(n as u32).filter(|&b| b > 0 && dim % b == 0);
            let Some(block) = block else {
                return Err(Error::InvalidSpec(format!("tensor family needs d^n | N, got N = {dim}, d = {d}, n = {n}")));
            };
            let c_dim = dim / block;
            let w = random_unitary(d, &mut rng);
            let mut pd = vec![1.0; d];
            pd[d - 1] = 0.0;
            let p = conj(&w, &pd);
            let uc = random_unitary(c_dim, &mut rng);
            let mut base = Vec::with_capacity(n);
            let mut direction = Vec::with_capacity(n);
            for j in 0..n {
                let a = &p * random_hermitian(d, &mut rng) * &p * C64::from(0.5);
                let b = if spec.positive {
                    let g = random_hermitian(d, &mut rng);
                    &p * &g * &g * &p * C64::from(spec.scale / d as f64)
                } else {
                    &p * random_hermitian(d, &mut rng) * &p * C64::from(spec.scale / (d as f64).sqrt())
                };
                let cj: Vec<f64> = (0..c_dim).map(|_| if spec.positive { rng.uniform(0.5, 1.0) } else { rng.uniform(-1.0, 1.0) }).collect();
                let c = conj(&uc, &cj);
                let build = |middle: &CMatrix| {
                    let mut acc = identity(1);
                    for l in 0..n {
                        acc = kron(&acc, if l == j { middle } else { &p });
                    }
                    kron(&acc, &c)
                };
                base.push(herm(build(&a))?);
                direction.push(herm(build(&b))?);
            }
            (base, direction)
        }
        Family::HardyDissipative => {
            let tuple = hardy_shift_tuple(dim, n)?;
            let direction = (0..n)
                .map(|_| {
                    if spec.scalar_direction {
                        identity(dim) * C64::from(spec.scale * rng.next_f64())
                    } else {
                        from_real_diag(&(0..dim).map(|_| spec.scale * rng.next_f64()).collect::<Vec<_>>())
                    }
                })
                .collect();
            return Ok(Instance::Dissipative(DissipativePath::new(tuple.matrices(), direction, tol)?));
        }
    };
    let path = PerturbationPath::new(base, direction, tol)?;
    if !path.is_path_commuting() {
        return Err(Error::InvalidSpec(format!("{:?} instance failed the commuting certificate", spec.family)));
    }
    Ok(Instance::Hermitian(path))
}

/// Trig sum with `terms` random frequencies in `[-2, 2]^n` and complex
/// Gaussian coefficients scaled by `1/terms`.
pub fn random_trig(arity: usize, terms: usize, rng: &mut SplitMix64) -> Result<ScalarFunction> {
    let list = (0..terms)
        .map(|_| {
            let freq = (0..arity).map(|_| rng.uniform(-2.0, 2.0)).collect();
            let coeff = C64::new(rng.normal(), rng.normal()) / terms.max(1) as f64;
            (freq, coeff)
        })
        .collect();
    Ok(ScalarFunction::Trig(TrigSum::new(arity, list)?))
}

/// Rational sum with poles `x + iy`, `|x| <= 1`, `|y| in [0.5, 2]`, powers
/// in `1..=3`. `lower` forces every pole into the lower half-plane.
pub fn random_rational(arity: usize, terms: usize, lower: bool, rng: &mut SplitMix64) -> Result<ScalarFunction> {
    let list = (0..terms)
        .map(|_| {
            let y = rng.uniform(0.5, 2.0);
            let sign = if lower { -1.0 } else { rng.sign() };
            let pole = C64::new(rng.uniform(-1.0, 1.0), sign * y);
            let powers = (0..arity).map(|_| rng.range(1, 3) as u32).collect();
            let coeff = C64::new(rng.normal(), rng.normal()) / terms.max(1) as f64;
            (pole, powers, coeff)
        })
        .collect();
    Ok(ScalarFunction::Rational(RationalSum::new(arity, list)?))
}

/// `prod_j (1 + sin(omega x_j))`, nondecreasing in every variable while
/// `|omega x_j| <= pi/2`.
pub fn monotone_trig(arity: usize, omega: f64) -> Result<ScalarFunction> {
    let factor = [(0.0, C64::from(1.0)), (omega, C64::new(0.0, -0.5)), (-omega, C64::new(0.0, 0.5))];
    let mut terms: Vec<(Vec<f64>, C64)> = vec![(Vec::new(), C64::from(1.0))];
    for _ in 0..arity {
        terms = terms
            .iter()
            .flat_map(|(f, c)| {
                factor.iter().map(move |&(w, a)| {
                    let mut g = f.clone();
                    g.push(w);
                    (g, c * a)
                })
            })
            .collect();
    }
    Ok(ScalarFunction::Trig(TrigSum::new(arity, terms)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, frobenius_norm};
    use crate::perturb::CERTIFY_TIMES;

    fn max_commutator(path: &PerturbationPath) -> f64 {
        let mut worst: f64 = 0.0;
        for &t in &CERTIFY_TIMES {
            let m = path.matrices_at(t);
            for i in 0..m.len() {
                for j in i + 1..m.len() {
                    worst = worst.max(frobenius_norm(&commutator(&m[i], &m[j])));
                }
            }
        }
        worst
    }

    #[test]
    fn shared_basis_commutes() {
        let path = gen(&InstanceSpec::new(7, 8, 2, Family::SharedBasis)).unwrap().hermitian().unwrap();
        assert!(max_commutator(&path) <= 1e-12);
    }

    #[test]
    fn every_family_generates() {
        for (family, dim, n) in [
            (Family::FunctionOfOne, 6, 3),
            (Family::DirectSum, 8, 2),
            (Family::TensorProjection, 18, 2),
            (Family::TensorProjection, 27, 3),
        ] {
            let path = gen(&InstanceSpec::new(3, dim, n, family)).unwrap().hermitian().unwrap();
            assert!(max_commutator(&path) <= 1e-10, "{family:?}");
        }
        assert!(gen(&InstanceSpec::new(1, 7, 2, Family::DirectSum)).is_err());
        let hardy = gen(&InstanceSpec::new(1, 8, 2, Family::HardyDissipative)).unwrap();
        assert!(hardy.dissipative().is_ok());
    }

    #[test]
    fn direct_sum_blocks() {
        let path = gen(&InstanceSpec::new(5, 6, 3, Family::DirectSum)).unwrap().hermitian().unwrap();
        let v = path.direction()[1].matrix();
        for r in 0..6 {
            for c in 0..6 {
                if !(2..4).contains(&r) || !(2..4).contains(&c) {
                    assert_eq!(v[(r, c)], C64::from(0.0));
                }
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = InstanceSpec::new(42, 8, 3, Family::SharedBasis);
        let a = gen(&spec).unwrap().hermitian().unwrap();
        let b = gen(&spec).unwrap().hermitian().unwrap();
        assert_eq!(a.base(), b.base());
        assert_eq!(a.direction(), b.direction());
    }

    #[test]
    fn monotone_trig_is_product_of_sines() {
        let f = monotone_trig(2, 0.5).unwrap();
        let x = [0.3, -0.7];
        let expect = (1.0 + (0.5f64 * 0.3).sin()) * (1.0 + (-0.5f64 * 0.7).sin());
        assert!((f.eval(&x).re - expect).abs() < 1e-15 && f.eval(&x).im.abs() < 1e-15);
    }
}
