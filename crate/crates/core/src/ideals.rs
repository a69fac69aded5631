//! Singular value sequences, Lorentz and root-ideal norms, and the ideal
//! inequalities checked on truncated sequences.

use crate::error::{Error, Result};
use crate::linalg::{singular_values as svd_values, CMatrix};

/// Concave normalizing function of a Lorentz ideal.
#[derive(Debug, Clone, PartialEq)]
pub enum PsiFunction {
    /// `log(1 + t)`; the shift keeps `psi(1) > 0`.
    Log1p,
    /// `t^eps`.
    Power(f64),
    /// Piecewise-linear interpolation of monotone samples `(t, psi(t))`,
    /// held constant beyond the last sample.
    Table(Vec<(f64, f64)>),
}

impl PsiFunction {
    pub fn table(mut samples: Vec<(f64, f64)>) -> Result<Self> {
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        if samples.is_empty() {
            return Err(Error::IllConditionedPsi("empty table".into()));
        }
        if let Some(k) = samples.windows(2).position(|w| w[1].1 < w[0].1 || w[1].0 == w[0].0) {
            return Err(Error::NotMonotone(k + 1));
        }
        Ok(Self::Table(samples))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Log1p => t.ln_1p(),
            Self::Power(e) => t.powf(*e),
            Self::Table(s) => {
                let k = s.partition_point(|p| p.0 <= t);
                if k == 0 {
                    s[0].1
                } else if k == s.len() {
                    s[k - 1].1
                } else {
                    let (a, b) = (s[k - 1], s[k]);
                    a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
                }
            }
        }
    }
}

/// Nonincreasing, nonnegative, finite.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularValueSeq(Vec<f64>);

impl SingularValueSeq {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(k) = values.iter().position(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::NotMonotone(k));
        }
        if let Some(k) = values.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::NotMonotone(k + 1));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn powf(&self, p: f64) -> Self {
        Self(self.0.iter().map(|x| x.powf(p)).collect())
    }
}

pub fn singular_values(a: &CMatrix) -> SingularValueSeq {
    SingularValueSeq(svd_values(a).into_iter().map(|x| x.max(0.0)).collect())
}

/// `max_{0 <= n < len} (1 / psi(1 + n)) sum_{k <= n} s(k)`.
pub fn lorentz_norm(s: &SingularValueSeq, psi: &PsiFunction) -> Result<f64> {
    let p1 = psi.eval(1.0);
    if !(p1 > 0.0) {
        return Err(Error::IllConditionedPsi(format!("psi(1) = {p1}")));
    }
    let mut partial = 0.0;
    let mut best: f64 = 0.0;
    for (n, &x) in s.0.iter().enumerate() {
        partial += x;
        best = best.max(partial / psi.eval(1.0 + n as f64));
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthCertificate {
    /// `max psi(t) / t^eps` over the grid.
    pub constant: f64,
    pub grid_points: usize,
    pub t_max: f64,
    /// Where the maximum was attained.
    pub argmax: f64,
    /// The maximum sits at the right end of the grid, so the constant is
    /// not certified to stay bounded as `t_max` grows.
    pub non_uniform: bool,
}

/// Smallest `C` with `psi(t) <= C t^eps` on a log-spaced grid over `[1, t_max]`.
pub fn psi_growth_certificate(psi: &PsiFunction, eps: f64, t_max: f64) -> Result<GrowthCertificate> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::IllConditionedPsi(format!("exponent {eps} outside (0, 1)")));
    }
    let t_max = t_max.max(1.0);
    let per_decade = 200;
    let grid_points = ((t_max.log10() * per_decade as f64).ceil() as usize).max(1) + 1;
    let mut constant = f64::NEG_INFINITY;
    let mut argmax = 1.0;
    let mut last_index = 0;
    for k in 0..grid_points {
        let t = if grid_points == 1 { 1.0 } else { t_max.powf(k as f64 / (grid_points - 1) as f64) };
        let c = psi.eval(t) / t.powf(eps);
        if c > constant * (1.0 + 1e-12) {
            constant = c;
            argmax = t;
            last_index = k;
        }
    }
    let non_uniform = grid_points > 1 && last_index == grid_points - 1;
    Ok(GrowthCertificate { constant, grid_points, t_max, argmax, non_uniform })
}

/// Underlying norm of a root ideal.
#[derive(Debug, Clone, PartialEq)]
pub enum IdealNorm {
    Trace,
    Lorentz(PsiFunction),
}

impl IdealNorm {
    pub fn of_sequence(&self, s: &SingularValueSeq) -> Result<f64> {
        match self {
            Self::Trace => Ok(s.0.iter().sum()),
            Self::Lorentz(psi) => lorentz_norm(s, psi),
        }
    }

    pub fn of(&self, a: &CMatrix) -> Result<f64> {
        self.of_sequence(&singular_values(a))
    }
}

/// `||A||_{I^{1/2}} = || |A|^2 ||_I^{1/2}`; the singular values of `|A|^2`
/// are the squares of those of `A`.
pub fn root_ideal_norm(a: &CMatrix, norm: &IdealNorm) -> Result<f64> {
    Ok(norm.of_sequence(&singular_values(a).powf(2.0))?.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolderReport {
    pub product_norm: f64,
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
}

/// `||AB||_I <= ||A||_{I^{1/2}} ||B||_{I^{1/2}}`.
pub fn holder_check(a: &CMatrix, b: &CMatrix, norm: &IdealNorm) -> Result<HolderReport> {
    let product_norm = norm.of(&(a * b))?;
    let bound = root_ideal_norm(a, norm)? * root_ideal_norm(b, norm)?;
    Ok(HolderReport { product_norm, bound, slack: bound - product_norm, pass: product_norm <= bound + 1e-10 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub checked: usize,
    /// Smallest `rhs - lhs` over the range.
    pub min_slack: f64,
    pub worst_index: usize,
    pub pass: bool,
}

/// `s(n)^{1/alpha} <= psi(1 + n) / (n + 1) * ||s^{1/alpha}||_psi` for every `n`.
pub fn singular_value_decay_check(s: &SingularValueSeq, psi: &PsiFunction, alpha: f64) -> Result<DecayReport> {
    if !(alpha >= 1.0) {
        return Err(Error::InvalidSpec(format!("decay exponent {alpha} must be at least 1")));
    }
    let root = s.powf(1.0 / alpha);
    let norm = lorentz_norm(&root, psi)?;
    let mut min_slack = f64::INFINITY;
    let mut worst_index = 0;
    for (n, &x) in root.0.iter().enumerate() {
        let rhs = psi.eval(1.0 + n as f64) / (n as f64 + 1.0) * norm;
        let slack = rhs - x;
        if slack < min_slack {
            min_slack = slack;
            worst_index = n;
        }
    }
    let tol = 1e-12 * norm.max(1.0);
    Ok(DecayReport { checked: root.len(), min_slack, worst_index, pass: min_slack >= -tol })
}

/// Finite-dimensional decomposition of a trace functional into its four
/// positive parts. Only the ordinary trace survives at finite dimension,
/// so the tuple is always `(Tr, 0, 0, 0)` and flagged degenerate.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceJordanParts {
    pub parts: [f64; 4],
    pub degenerate: bool,
}

pub fn trace_jordan_parts(a: &CMatrix) -> TraceJordanParts {
    let tr = crate::linalg::trace(a);
    TraceJordanParts { parts: [tr.re, 0.0, 0.0, 0.0], degenerate: true }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_real, from_real_diag, identity, C64};

    #[test]
    fn singular_value_examples() {
        assert_eq!(singular_values(&from_real_diag(&[3.0, -1.0, 2.0])).values(), &[3.0, 2.0, 1.0]);
        let s = singular_values(&from_real(2, &[0.0, 0.0, 1.0, 0.0]));
        assert!((s.values()[0] - 1.0).abs() < 1e-15 && s.values()[1].abs() < 1e-15);
    }

    #[test]
    fn lorentz_examples() {
        let s = SingularValueSeq::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let v = lorentz_norm(&s, &PsiFunction::Log1p).unwrap();
        assert!((v - 1.0 / 2f64.ln()).abs() < 1e-15);
        assert_eq!(lorentz_norm(&SingularValueSeq::new(vec![0.0; 5]).unwrap(), &PsiFunction::Log1p).unwrap(), 0.0);
        let bad = PsiFunction::table(vec![(1.0, 0.0), (2.0, 1.0)]).unwrap();
        assert!(matches!(lorentz_norm(&s, &bad), Err(Error::IllConditionedPsi(_))));
    }

    #[test]
    fn growth_certificates() {
        let c = psi_growth_certificate(&PsiFunction::Power(0.3), 0.3, 1e6).unwrap();
        assert!((c.constant - 1.0).abs() < 1e-12);
        let c = psi_growth_certificate(&PsiFunction::Log1p, 0.5, 1e6).unwrap();
        assert!(c.constant.is_finite() && !c.non_uniform);
        let c = psi_growth_certificate(&PsiFunction::Power(0.9), 0.4, 1e6).unwrap();
        assert!(c.non_uniform);
    }

    #[test]
    fn holder_examples() {
        let id = identity(4);
        let r = holder_check(&id, &id, &IdealNorm::Trace).unwrap();
        assert!((r.product_norm - 4.0).abs() < 1e-14 && (r.bound - 4.0).abs() < 1e-14 && r.pass);
        assert!((root_ideal_norm(&id, &IdealNorm::Trace).unwrap() - 2.0).abs() < 1e-15);
        let mut e = CMatrix::zeros(3, 3);
        e[(0, 0)] = C64::from(1.0);
        let r = holder_check(&e, &e, &IdealNorm::Trace).unwrap();
        assert!((r.product_norm - 1.0).abs() < 1e-15 && (r.bound - 1.0).abs() < 1e-15);
    }

    #[test]
    fn decay_examples() {
        let s = SingularValueSeq::new((0..=10_000).map(|k| (1.0 + k as f64).powi(-2)).collect()).unwrap();
        assert!(singular_value_decay_check(&s, &PsiFunction::Log1p, 2.0).unwrap().pass);
        let c = SingularValueSeq::new(vec![0.5; 10]).unwrap();
        assert!(singular_value_decay_check(&c, &PsiFunction::Log1p, 1.0).unwrap().pass);
        assert_eq!(SingularValueSeq::new(vec![1.0, 2.0]), Err(Error::NotMonotone(1)));
    }

    #[test]
    fn degenerate_trace_tuple() {
        let t = trace_jordan_parts(&from_real_diag(&[1.0, 2.0]));
        assert_eq!(t.parts, [3.0, 0.0, 0.0, 0.0]);
        assert!(t.degenerate);
    }
}
