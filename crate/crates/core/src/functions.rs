//! The two function classes: trigonometric sums (Fourier transforms of
//! finite measures with finitely many atoms) and rational sums of products
//! of resolvent powers.

use crate::error::{Error, Result};
use crate::linalg::{C64, I};
use std::f64::consts::TAU;

/// Frequencies closer than this (in every coordinate) are merged.
pub const FREQ_MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TrigTerm {
    pub freq: Vec<f64>,
    pub coeff: C64,
}

/// `f(lambda) = sum_k c_k exp(i t_k . lambda)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigSum {
    arity: usize,
    terms: Vec<TrigTerm>,
}

impl TrigSum {
    pub fn new(arity: usize, terms: Vec<(Vec<f64>, C64)>) -> Result<Self> {
        let mut merged: Vec<TrigTerm> = Vec::with_capacity(terms.len());
        for (freq, coeff) in terms {
            if freq.len() != arity {
                return Err(Error::ArityMismatch { expected: arity, found: freq.len() });
            }
            if freq.iter().any(|t| !t.is_finite()) || !coeff.re.is_finite() || !coeff.im.is_finite() {
                return Err(Error::InvalidFunction("non-finite trig term".into()));
            }
            match merged
                .iter_mut()
                .find(|m| m.freq.iter().zip(&freq).all(|(a, b)| (a - b).abs() <= FREQ_MERGE_TOL))
            {
                Some(m) => m.coeff += coeff,
                None => merged.push(TrigTerm { freq, coeff }),
            }
        }
        merged.retain(|t| t.coeff != C64::from(0.0));
        Ok(Self { arity, terms: merged })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> &[TrigTerm] {
        &self.terms
    }

    pub fn eval(&self, x: &[f64]) -> C64 {
        self.terms.iter().map(|t| t.coeff * (I * dot(&t.freq, x)).exp()).sum()
    }

    pub fn partial(&self, j: usize) -> Result<TrigSum> {
        self.check_index(j)?;
        let terms = self.terms.iter().map(|t| (t.freq.clone(), t.coeff * I * t.freq[j])).collect();
        TrigSum::new(self.arity, terms)
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j >= self.arity {
            return Err(Error::IndexOutOfRange { index: j, arity: self.arity });
        }
        Ok(())
    }

    /// `sum_k |c_k| prod_l |t_{k,l}|^{alpha_l}`, an upper bound for
    /// `sup |d^alpha f|` over all of R^n.
    pub fn wiener_seminorm(&self, alpha: &[u32]) -> Result<f64> {
        if alpha.len() != self.arity {
            return Err(Error::ArityMismatch { expected: self.arity, found: alpha.len() });
        }
        Ok(self
            .terms
            .iter()
            .map(|t| t.coeff.norm() * t.freq.iter().zip(alpha).map(|(w, &a)| w.abs().powi(a as i32)).product::<f64>())
            .sum())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalTerm {
    pub pole: C64,
    pub powers: Vec<u32>,
    pub coeff: C64,
}

impl RationalTerm {
    pub fn eval(&self, x: &[f64]) -> C64 {
        let mut v = self.coeff;
        for (&k, &xl) in self.powers.iter().zip(x) {
            v *= (self.pole - xl).inv().powi(k as i32);
        }
        v
    }
}

/// `f(lambda) = sum_k c_k prod_l (z_k - lambda_l)^{-k_l}` with `Im z_k != 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalSum {
    arity: usize,
    terms: Vec<RationalTerm>,
}

impl RationalSum {
    pub fn new(arity: usize, terms: Vec<(C64, Vec<u32>, C64)>) -> Result<Self> {
        let mut merged: Vec<RationalTerm> = Vec::with_capacity(terms.len());
        for (pole, powers, coeff) in terms {
            if powers.len() != arity {
                return Err(Error::ArityMismatch { expected: arity, found: powers.len() });
            }
            if pole.im == 0.0 || !pole.im.is_finite() || !pole.re.is_finite() {
                return Err(Error::RealPole { pole: format!("{pole}") });
            }
            if powers.iter().any(|&k| k == 0) {
                return Err(Error::InvalidFunction("resolvent powers must be positive".into()));
            }
            match merged.iter_mut().find(|m| m.pole == pole && m.powers == powers) {
                Some(m) => m.coeff += coeff,
                None => merged.push(RationalTerm { pole, powers, coeff }),
            }
        }
        merged.retain(|t| t.coeff != C64::from(0.0));
        Ok(Self { arity, terms: merged })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> &[RationalTerm] {
        &self.terms
    }

    /// Every pole in the open lower half-plane.
    pub fn is_lower(&self) -> bool {
        self.terms.iter().all(|t| t.pole.im < 0.0)
    }

    pub fn eval(&self, x: &[f64]) -> C64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    /// Evaluate at complex points; used for non-selfadjoint spectra.
    pub fn eval_complex(&self, x: &[C64]) -> C64 {
        self.terms
            .iter()
            .map(|t| {
                let mut v = t.coeff;
                for (&k, &xl) in t.powers.iter().zip(x) {
                    v *= (t.pole - xl).inv().powi(k as i32);
                }
                v
            })
            .sum()
    }

    pub fn partial(&self, j: usize) -> Result<RationalSum> {
        if j >= self.arity {
            return Err(Error::IndexOutOfRange { index: j, arity: self.arity });
        }
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let mut p = t.powers.clone();
                p[j] += 1;
                (t.pole, p, t.coeff * t.powers[j] as f64)
            })
            .collect();
        RationalSum::new(self.arity, terms)
    }

    /// `sum_k |c_k| prod_l |Im z_k|^{-k_l}`, an upper bound for `sup |f|`.
    pub fn triangle_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff.norm() * t.powers.iter().map(|&k| t.pole.im.abs().powi(-(k as i32))).product::<f64>())
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarFunction {
    Trig(TrigSum),
    Rational(RationalSum),
}

impl ScalarFunction {
    pub fn arity(&self) -> usize {
        match self {
            ScalarFunction::Trig(f) => f.arity(),
            ScalarFunction::Rational(f) => f.arity(),
        }
    }

    pub fn class_name(&self) -> &'static str {
        match self {
            ScalarFunction::Trig(_) => "trig",
            ScalarFunction::Rational(_) => "rational",
        }
    }

    pub fn eval(&self, x: &[f64]) -> C64 {
        match self {
            ScalarFunction::Trig(f) => f.eval(x),
            ScalarFunction::Rational(f) => f.eval(x),
        }
    }

    pub fn checked_eval(&self, x: &[f64]) -> Result<C64> {
        if x.len() != self.arity() {
            return Err(Error::ArityMismatch { expected: self.arity(), found: x.len() });
        }
        Ok(self.eval(x))
    }

    pub fn partial(&self, j: usize) -> Result<ScalarFunction> {
        Ok(match self {
            ScalarFunction::Trig(f) => ScalarFunction::Trig(f.partial(j)?),
            ScalarFunction::Rational(f) => ScalarFunction::Rational(f.partial(j)?),
        })
    }

    pub fn partial_multi(&self, alpha: &[u32]) -> Result<ScalarFunction> {
        if alpha.len() != self.arity() {
            return Err(Error::ArityMismatch { expected: self.arity(), found: alpha.len() });
        }
        let mut g = self.clone();
        for (j, &a) in alpha.iter().enumerate() {
            for _ in 0..a {
                g = g.partial(j)?;
            }
        }
        Ok(g)
    }

    /// Upper bound for `sup |f|` over R^n from the triangle inequality.
    pub fn triangle_bound(&self) -> f64 {
        match self {
            ScalarFunction::Trig(f) => f.terms.iter().map(|t| t.coeff.norm()).sum(),
            ScalarFunction::Rational(f) => f.triangle_bound(),
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupEstimate {
    /// Largest sampled value; a lower estimate of the supremum.
    pub grid_max: f64,
    /// Rigorous upper bound for the supremum over R^n.
    pub certified_upper: f64,
}

/// Estimate `sup_{R^n} |d^alpha f|` by sampling `bbox` with two local
/// refinements around the maximum.
///
/// The certified bound is the triangle-inequality bound, tightened by
/// `grid_max + Lipschitz slack` when that slack is valid on all of R^n:
/// for rational sums together with an analytic tail bound outside the box,
/// and for trig sums when `periodic` says the box covers a full period.
pub fn sup_norm_partial(f: &ScalarFunction, alpha: &[u32], bbox: &[(f64, f64)], periodic: bool) -> Result<SupEstimate> {
    let n = f.arity();
    if bbox.len() != n {
        return Err(Error::ArityMismatch { expected: n, found: bbox.len() });
    }
    let g = f.partial_multi(alpha)?;
    let per_axis = ((1u64 << 18) as f64).powf(1.0 / n.max(1) as f64).round().clamp(5.0, 65.0) as usize;
    let (mut best, mut arg) = grid_max(&g, bbox, per_axis);
    let coarse_h = bbox.iter().map(|(a, b)| (b - a) / (per_axis - 1) as f64).fold(0.0, f64::max);
    let mut h: Vec<f64> = bbox.iter().map(|(a, b)| (b - a) / (per_axis - 1) as f64).collect();
    let fine = if n <= 2 { 17 } else { 9 };
    for _ in 0..2 {
        let local: Vec<(f64, f64)> = arg.iter().zip(&h).map(|(&x, &hl)| (x - hl, x + hl)).collect();
        let (v, a) = grid_max(&g, &local, fine);
        if v > best {
            best = v;
            arg = a;
        }
        h = local.iter().map(|(a, b)| (b - a) / (fine - 1) as f64).collect();
    }
    let triangle = g.triangle_bound();
    let lipschitz: f64 = (0..n).map(|l| g.partial(l).map(|d| d.triangle_bound()).unwrap_or(f64::INFINITY)).sum();
    let slack = lipschitz * coarse_h * (n as f64).sqrt() / 2.0;
    let certified = match &g {
        ScalarFunction::Rational(r) => triangle.min((best + slack).max(rational_tail_bound(r, bbox))),
        ScalarFunction::Trig(_) if periodic => triangle.min(best + slack),
        ScalarFunction::Trig(_) => triangle,
    };
    Ok(SupEstimate { grid_max: best, certified_upper: certified.max(best) })
}

fn grid_max(g: &ScalarFunction, bbox: &[(f64, f64)], per_axis: usize) -> (f64, Vec<f64>) {
    let n = bbox.len();
    let mut idx = vec![0usize; n];
    let mut x = vec![0.0; n];
    let mut best = -1.0;
    let mut arg = vec![0.0; n];
    loop {
        for l in 0..n {
            let (a, b) = bbox[l];
            x[l] = a + (b - a) * idx[l] as f64 / (per_axis - 1) as f64;
        }
        let v = g.eval(&x).norm();
        if v > best {
            best = v;
            arg.copy_from_slice(&x);
        }
        let mut l = 0;
        loop {
            if l == n {
                return (best, arg);
            }
            idx[l] += 1;
            if idx[l] < per_axis {
                break;
            }
            idx[l] = 0;
            l += 1;
        }
    }
}

/// Bound for `|g|` outside the box: some coordinate `l` leaves `[lo_l, hi_l]`,
/// so `|z - lambda_l| >= sqrt(Im z^2 + d^2)` with `d` the distance from
/// `Re z` to the complement of the interval.
fn rational_tail_bound(g: &RationalSum, bbox: &[(f64, f64)]) -> f64 {
    (0..g.arity())
        .map(|l| {
            g.terms
                .iter()
                .map(|t| {
                    let y = t.pole.im.abs();
                    let (lo, hi) = bbox[l];
                    let x = t.pole.re;
                    let d = if x > lo && x < hi { (x - lo).min(hi - x) } else { 0.0 };
                    let mut v = t.coeff.norm();
                    for (m, &k) in t.powers.iter().enumerate() {
                        let r = if m == l { (y * y + d * d).sqrt() } else { y };
                        v *= r.powi(-(k as i32));
                    }
                    v
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Samples of a real function on a uniform tensor grid; `values` is
/// row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSamples {
    pub axes: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BumpSynthesis {
    pub function: TrigSum,
    /// Per-axis period of the synthesized sum.
    pub period: Vec<f64>,
    /// Origin of the period box.
    pub origin: Vec<f64>,
    /// Largest deviation from the samples on the grid.
    pub max_error: f64,
}

impl BumpSynthesis {
    pub fn period_box(&self) -> Vec<(f64, f64)> {
        self.origin.iter().zip(&self.period).map(|(&o, &p)| (o, o + p)).collect()
    }
}

/// Truncated discrete Fourier series of grid samples, treating each axis as
/// one period of length `m_l h_l`; keeps `|k_l| <= (cutoff - 1) / 2` modes.
pub fn synthesize_bump(samples: &GridSamples, cutoff: usize) -> Result<BumpSynthesis> {
    let n = samples.axes.len();
    let sizes: Vec<usize> = samples.axes.iter().map(|a| a.len()).collect();
    let total: usize = sizes.iter().product();
    if n == 0 || total != samples.values.len() {
        return Err(Error::NonUniformGrid(format!("{} values for grid of {} points", samples.values.len(), total)));
    }
    let mut period = Vec::with_capacity(n);
    for axis in &samples.axes {
        if axis.len() < 2 {
            return Err(Error::NonUniformGrid("axis needs at least two points".into()));
        }
        let h = axis[1] - axis[0];
        if h <= 0.0 || axis.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1.0)) {
            return Err(Error::NonUniformGrid("spacing varies".into()));
        }
        period.push(h * axis.len() as f64);
    }
    let origin: Vec<f64> = samples.axes.iter().map(|a| a[0]).collect();
    let kmax: Vec<i64> = sizes.iter().map(|&m| ((cutoff.min(m).max(1) as i64) - 1) / 2).collect();
    // Per-axis tables exp(-i w_k (x - x0)).
    let tables: Vec<Vec<Vec<C64>>> = (0..n)
        .map(|l| {
            (-kmax[l]..=kmax[l])
                .map(|k| {
                    (0..sizes[l]).map(|x| (-I * (TAU * k as f64 * x as f64 / sizes[l] as f64)).exp()).collect()
                })
                .collect()
        })
        .collect();
    let mut terms = Vec::new();
    let modes: Vec<usize> = kmax.iter().map(|&k| (2 * k + 1) as usize).collect();
    for_each_index(&modes, |kidx| {
        let mut acc = C64::from(0.0);
        for_each_index(&sizes, |xidx| {
            let flat = flat_index(xidx, &sizes);
            let mut e = C64::from(samples.values[flat]);
            for l in 0..n {
                e *= tables[l][kidx[l]][xidx[l]];
            }
            acc += e;
        });
        acc /= total as f64;
        let freq: Vec<f64> = (0..n).map(|l| TAU * (kidx[l] as i64 - kmax[l]) as f64 / period[l]).collect();
        let shift = (-I * dot(&freq, &origin)).exp();
        terms.push((freq, acc * shift));
    });
    let scale = terms.iter().map(|t| t.1.norm()).fold(0.0, f64::max);
    terms.retain(|t| t.1.norm() > 1e-15 * scale);
    let function = TrigSum::new(n, terms)?;
    let mut max_error: f64 = 0.0;
    for_each_index(&sizes, |xidx| {
        let x: Vec<f64> = (0..n).map(|l| samples.axes[l][xidx[l]]).collect();
        let v = samples.values[flat_index(xidx, &sizes)];
        max_error = max_error.max((function.eval(&x) - v).norm());
    });
    Ok(BumpSynthesis { function, period, origin, max_error })
}

fn flat_index(idx: &[usize], sizes: &[usize]) -> usize {
    idx.iter().zip(sizes).fold(0, |acc, (&i, &m)| acc * m + i)
}

/// Visit every multi-index below `sizes`, last axis fastest.
pub(crate) fn for_each_index<F: FnMut(&[usize])>(sizes: &[usize], mut visit: F) {
    if sizes.iter().any(|&m| m == 0) {
        return;
    }
    let n = sizes.len();
    let mut idx = vec![0usize; n];
    loop {
        visit(&idx);
        let mut l = n;
        loop {
            if l == 0 {
                return;
            }
            l -= 1;
            idx[l] += 1;
            if idx[l] < sizes[l] {
                break;
            }
            idx[l] = 0;
        }
    }
}

/// Separable bump `prod_l cos^{2p}(pi (x_l - c) / (b - a))` on `(a, b)`,
/// zero elsewhere, sampled on `[a - pad, a - pad + period)` per axis.
pub fn bump_samples(n: usize, a: f64, b: f64, p: u32, points: usize, period_factor: f64) -> GridSamples {
    let period = period_factor * (b - a);
    let pad = 0.5 * (period - (b - a));
    let h = period / points as f64;
    let axis: Vec<f64> = (0..points).map(|k| a - pad + h * k as f64).collect();
    let c = 0.5 * (a + b);
    let one = |x: f64| {
        if x > a && x < b {
            (std::f64::consts::PI * (x - c) / (b - a)).cos().powi(2 * p as i32)
        } else {
            0.0
        }
    };
    let sizes = vec![points; n];
    let mut values = Vec::with_capacity(points.pow(n as u32));
    for_each_index(&sizes, |idx| values.push(idx.iter().map(|&i| one(axis[i])).product()));
    GridSamples { axes: vec![axis; n], values }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn cosine_trig_sum() {
        let f = TrigSum::new(1, vec![(vec![1.0], c(0.5, 0.0)), (vec![-1.0], c(0.5, 0.0))]).unwrap();
        assert!((f.eval(&[0.0]) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((f.eval(&[std::f64::consts::PI]) - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rational_product() {
        let f = RationalSum::new(2, vec![(c(0.0, 2.0), vec![1, 1], c(1.0, 0.0))]).unwrap();
        assert!((f.eval(&[0.0, 0.0]) - c(-0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn real_pole_rejected() {
        assert!(matches!(RationalSum::new(1, vec![(c(1.0, 0.0), vec![1], c(1.0, 0.0))]), Err(Error::RealPole { .. })));
    }

    #[test]
    fn frequencies_merge() {
        let f = TrigSum::new(1, vec![(vec![1.0], c(1.0, 0.0)), (vec![1.0 + 1e-13], c(2.0, 0.0))]).unwrap();
        assert_eq!(f.terms().len(), 1);
        assert_eq!(f.terms()[0].coeff, c(3.0, 0.0));
    }

    #[test]
    fn partial_out_of_range() {
        let f = TrigSum::new(2, vec![(vec![1.0, 2.0], c(1.0, 0.0))]).unwrap();
        assert!(matches!(f.partial(2), Err(Error::IndexOutOfRange { index: 2, arity: 2 })));
    }

    #[test]
    fn partials_match_central_differences() {
        let t = ScalarFunction::Trig(
            TrigSum::new(2, vec![(vec![1.3, -0.4], c(0.3, 0.7)), (vec![-0.2, 0.9], c(-1.1, 0.2))]).unwrap(),
        );
        let r = ScalarFunction::Rational(
            RationalSum::new(
                2,
                vec![(c(0.3, 1.1), vec![2, 1], c(0.5, -0.4)), (c(-0.7, -0.8), vec![1, 3], c(1.0, 0.0))],
            )
            .unwrap(),
        );
        let x = [0.37, -0.52];
        let h = 1e-5;
        for f in [&t, &r] {
            for j in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[j] += h;
                xm[j] -= h;
                let fd = (f.eval(&xp) - f.eval(&xm)) / (2.0 * h);
                let d = f.partial(j).unwrap().eval(&x);
                assert!((fd - d).norm() < 1e-8 * (1.0 + d.norm()));
            }
        }
    }

    #[test]
    fn wiener_seminorm_values() {
        let f = TrigSum::new(2, vec![(vec![2.0, -3.0], c(0.0, 2.0)), (vec![1.0, 1.0], c(1.0, 0.0))]).unwrap();
        assert_eq!(f.wiener_seminorm(&[0, 0]).unwrap(), 3.0);
        assert_eq!(f.wiener_seminorm(&[1, 2]).unwrap(), 2.0 * 2.0 * 9.0 + 1.0);
    }

    #[test]
    fn sup_norm_single_resolvent() {
        // sup |(z - x)^{-1}| = 1 / |Im z|, attained at x = Re z.
        let f = ScalarFunction::Rational(RationalSum::new(1, vec![(c(0.2, 0.5), vec![1], c(1.0, 0.0))]).unwrap());
        let s = sup_norm_partial(&f, &[0], &[(-3.0, 3.0)], false).unwrap();
        assert!(s.grid_max <= 2.0 + 1e-12 && s.grid_max > 1.99);
        assert!(s.certified_upper >= 2.0 - 1e-12 && s.certified_upper <= 2.0 + 1e-12);
    }

    #[test]
    fn synthesize_recovers_trig_polynomial() {
        // A trig polynomial with period 2 pi is reproduced exactly.
        let n = 32;
        let axis: Vec<f64> = (0..n).map(|k| TAU * k as f64 / n as f64).collect();
        let values = axis.iter().map(|&x| 1.0 + x.cos() - 0.5 * (3.0 * x).sin()).collect();
        let s = synthesize_bump(&GridSamples { axes: vec![axis], values }, 9).unwrap();
        assert!(s.max_error < 1e-13);
        assert!((s.function.eval(&[0.4]).re - (1.0 + 0.4f64.cos() - 0.5 * 1.2f64.sin())).abs() < 1e-13);
        assert_eq!(s.function.terms().len(), 5);
    }

    #[test]
    fn synthesize_rejects_nonuniform() {
        let g = GridSamples { axes: vec![vec![0.0, 0.1, 0.3]], values: vec![0.0; 3] };
        assert!(matches!(synthesize_bump(&g, 3), Err(Error::NonUniformGrid(_))));
    }
}
