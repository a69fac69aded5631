//! Constructive spectral shift measures and verification of the trace
//! formulas.
//!
//! At finite dimension both measures are built explicitly. The first-order
//! measure `mu_j` is a Gauss-Legendre combination in `t` of the atomic
//! measures `Tr(E_t(.) V_j)`. The second-order measure `nu_ij` pushes the
//! uniform measure on a unit square (mixed pairs) or on the 2-simplex (same
//! index) forward to the divided-difference nodes, so that integrating
//! `d^2 f` against it reproduces the second-order divided difference.

use crate::divdiff::{dd2_mixed_unchecked, dd2_same_unchecked, sinc};
use crate::error::{Error, Result};
use crate::functions::{dot, sup_norm_partial, BumpSynthesis, ScalarFunction};
use crate::linalg::{frobenius_norm, operator_norm, trace, trace_norm, JointEigenDecomposition, C64, I};
use crate::perturb::{first_derivative, rational_second_parts, PerturbationPath, CERTIFY_TIMES};
use crate::quadrature::{simplex_rule, UnitRule};
use crate::report::{BoundCheck, VerificationReport};
use std::cmp::Ordering;
use std::collections::BTreeMap;

/// Points closer than this in every coordinate are merged.
pub const ATOM_MERGE_TOL: f64 = 1e-10;
/// Weights below this fraction of the total variation are dropped.
pub const WEIGHT_DROP_REL: f64 = 1e-14;

pub const KREIN_DEFAULT_Q: usize = 16;
pub const KOPLIENKO_DEFAULT_Q: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub point: Vec<f64>,
    pub weight: C64,
}

/// Finite complex measure on R^n, kept in canonical form: atoms sorted
/// lexicographically by point, near-equal points merged, negligible
/// weights dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    arity: usize,
    atoms: Vec<Atom>,
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| *o != Ordering::Equal).unwrap_or(Ordering::Equal)
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

impl AtomicMeasure {
    pub fn new(arity: usize, mut atoms: Vec<Atom>) -> Result<Self> {
        if let Some(a) = atoms.iter().find(|a| a.point.len() != arity) {
            return Err(Error::ArityMismatch { expected: arity, found: a.point.len() });
        }
        atoms.sort_by(|a, b| lex_cmp(&a.point, &b.point));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for atom in atoms {
            match merged.last_mut() {
                Some(last) if close(&last.point, &atom.point, ATOM_MERGE_TOL) => last.weight += atom.weight,
                _ => merged.push(atom),
            }
        }
        let total: f64 = merged.iter().map(|a| a.weight.norm()).sum();
        merged.retain(|a| a.weight.norm() > WEIGHT_DROP_REL * total);
        Ok(Self { arity, atoms: merged })
    }

    pub fn empty(arity: usize) -> Self {
        Self { arity, atoms: Vec::new() }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight.norm()).fold(0.0, |s, x| s + x)
    }

    pub fn integrate<G: Fn(&[f64]) -> C64>(&self, g: G) -> C64 {
        self.atoms.iter().map(|a| g(&a.point) * a.weight).sum()
    }

    pub fn integrate_function(&self, f: &ScalarFunction) -> C64 {
        self.integrate(|x| f.eval(x))
    }
}

/// Uniform probability on the segment `start + s * direction`, `s in [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: Vec<f64>,
    pub direction: Vec<f64>,
    pub weight: C64,
}

/// Exact first-order measure of a path with a shared eigenbasis: each
/// eigenline `lambda_k + t v_k` carries the weight `(V_j)_{kk}` spread
/// uniformly over `t in [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentMeasure {
    arity: usize,
    segments: Vec<Segment>,
}

impl SegmentMeasure {
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn total_variation(&self) -> f64 {
        self.segments.iter().map(|s| s.weight.norm()).fold(0.0, |s, x| s + x)
    }

    /// Composite Gauss-Legendre along each segment.
    pub fn integrate<G: Fn(&[f64]) -> C64>(&self, g: G) -> C64 {
        let rule = UnitRule::composite(16, 8);
        let mut x = vec![0.0; self.arity];
        let mut total = C64::from(0.0);
        for seg in &self.segments {
            let mut acc = C64::from(0.0);
            for (s, w) in rule.iter() {
                for l in 0..self.arity {
                    x[l] = seg.start[l] + s * seg.direction[l];
                }
                acc += g(&x) * w;
            }
            total += acc * seg.weight;
        }
        total
    }

    /// `int g d(mu)`; trig sums in closed form, rational sums by quadrature.
    pub fn integrate_function(&self, g: &ScalarFunction) -> C64 {
        match g {
            ScalarFunction::Trig(t) => self
                .segments
                .iter()
                .map(|seg| {
                    t.terms()
                        .iter()
                        .map(|term| {
                            let omega = dot(&term.freq, &seg.direction);
                            let avg = (I * 0.5 * omega).exp() * sinc(0.5 * omega);
                            term.coeff * (I * dot(&term.freq, &seg.start)).exp() * avg
                        })
                        .sum::<C64>()
                        * seg.weight
                })
                .sum(),
            ScalarFunction::Rational(_) => self.integrate(|x| g.eval(x)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct KreinMeasures {
    /// `mu_j` from `t`-quadrature, `j = 0..n`.
    pub quadrature: Vec<AtomicMeasure>,
    /// Exact eigenline measures when the path has a shared eigenbasis.
    pub eigenline: Option<Vec<SegmentMeasure>>,
}

fn check_arity(path: &PerturbationPath, f: &ScalarFunction) -> Result<()> {
    if f.arity() != path.arity() {
        return Err(Error::ArityMismatch { expected: path.arity(), found: f.arity() });
    }
    Ok(())
}

fn trace_of(decomp: &JointEigenDecomposition, f: &ScalarFunction) -> C64 {
    decomp.table.iter().map(|row| f.eval(row)).sum()
}

/// `Tr f(H(1)) - Tr f(H(0))`.
pub fn krein_lhs(path: &PerturbationPath, f: &ScalarFunction) -> Result<C64> {
    check_arity(path, f)?;
    Ok(trace_of(&path.decompose_at(1.0)?, f) - trace_of(&path.decompose_at(0.0)?, f))
}

pub fn krein_ssm(path: &PerturbationPath, q: usize) -> Result<KreinMeasures> {
    let n = path.arity();
    let rule = UnitRule::gauss_legendre(q);
    let mut atoms: Vec<Vec<Atom>> = vec![Vec::new(); n];
    for (t, w) in rule.iter() {
        let d = path.decompose_at(t)?;
        for (j, v) in path.direction().iter().enumerate() {
            let vv = d.to_eigenbasis(v.matrix());
            for (k, row) in d.table.iter().enumerate() {
                atoms[j].push(Atom { point: row.clone(), weight: vv[(k, k)] * w });
            }
        }
    }
    let quadrature = atoms.into_iter().map(|a| AtomicMeasure::new(n, a)).collect::<Result<_>>()?;
    Ok(KreinMeasures { quadrature, eigenline: eigenline_measures(path) })
}

/// Eigenlines `(lambda_k, v_k)` of a path with a shared eigenbasis.
pub fn eigenlines(path: &PerturbationPath) -> Option<Vec<(Vec<f64>, Vec<f64>)>> {
    let shared = path.shared_eigenbasis()?;
    let n = path.arity();
    Some(shared.table.iter().map(|row| (row[..n].to_vec(), row[n..].to_vec())).collect())
}

fn eigenline_measures(path: &PerturbationPath) -> Option<Vec<SegmentMeasure>> {
    let lines = eigenlines(path)?;
    let n = path.arity();
    Some(
        (0..n)
            .map(|j| SegmentMeasure {
                arity: n,
                segments: lines
                    .iter()
                    .filter(|(_, v)| v[j] != 0.0)
                    .map(|(l, v)| Segment { start: l.clone(), direction: v.clone(), weight: C64::from(v[j]) })
                    .collect(),
            })
            .collect(),
    )
}

/// Box containing every spectrum along the path, padded by `2 (1 + max ||V_j||)`.
pub fn spectral_box(path: &PerturbationPath) -> Result<Vec<(f64, f64)>> {
    let n = path.arity();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    let vmax = path.direction().iter().map(|v| operator_norm(v.matrix())).fold(0.0, f64::max);
    for (j, (h, v)) in path.base().iter().zip(path.direction()).enumerate() {
        let d = JointEigenDecomposition::single(h, path.tolerances())?;
        let r = operator_norm(v.matrix());
        lo[j] = d.table.first().map_or(0.0, |r0| r0[0]) - r;
        hi[j] = d.table.last().map_or(0.0, |r1| r1[0]) + r;
    }
    let pad = 2.0 * (1.0 + vmax);
    Ok(lo.into_iter().zip(hi).map(|(a, b)| (a - pad, b + pad)).collect())
}

/// Both sides of the first-order trace formula with measure bound checks.
pub fn krein_verify(path: &PerturbationPath, f: &ScalarFunction, q: usize, tol: f64) -> Result<VerificationReport> {
    check_arity(path, f)?;
    let lhs = krein_lhs(path, f)?;
    let measures = krein_ssm(path, q)?;
    let n = path.arity();
    let partials: Vec<ScalarFunction> = (0..n).map(|j| f.partial(j)).collect::<Result<_>>()?;
    let rhs: C64 = measures.quadrature.iter().zip(&partials).map(|(mu, d)| mu.integrate_function(d)).sum();
    let mut report = VerificationReport::new("krein", lhs, rhs, tol);
    let bbox = spectral_box(path)?;
    let rule = UnitRule::gauss_legendre(q);
    for j in 0..n {
        let tv = trace_norm(path.direction()[j].matrix());
        report.push(BoundCheck::new(format!("measure_total_variation[{}]", j + 1), tv, measures.quadrature[j].total_variation()));
        let alpha: Vec<u32> = (0..n).map(|l| u32::from(l == j)).collect();
        let sup = sup_norm_partial(f, &alpha, &bbox, false)?.certified_upper;
        let mut worst: f64 = 0.0;
        for &t in &rule.nodes {
            let d = path.decompose_at(t)?;
            let dv = d.to_eigenbasis(path.direction()[j].matrix());
            let value: C64 = d.table.iter().enumerate().map(|(k, row)| partials[j].eval(row) * dv[(k, k)]).sum();
            worst = worst.max(value.norm());
        }
        report.push(BoundCheck::new(format!("partial_trace_bound[{}]", j + 1), tv * sup, worst));
    }
    if let (Some(lines), Some(exact)) = (eigenlines(path), measures.eigenline.as_ref()) {
        let lhs_exact: C64 = lines
            .iter()
            .map(|(l, v)| {
                let end: Vec<f64> = l.iter().zip(v).map(|(a, b)| a + b).collect();
                f.eval(&end) - f.eval(l)
            })
            .sum();
        let rhs_exact: C64 = exact.iter().zip(&partials).map(|(mu, d)| mu.integrate_function(d)).sum();
        let scale = 1.0 + lhs.norm();
        report.push(BoundCheck::new("eigenline_lhs_agreement", 1e-10, (lhs - lhs_exact).norm() / scale));
        report.push(BoundCheck::new("eigenline_rhs_agreement", 1e-10, (rhs_exact - lhs_exact).norm() / scale));
    }
    Ok(report)
}

/// One component of a second-order measure.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexComponent {
    pub weight: C64,
    /// All `n` coordinates; the active ones are placeholders.
    pub spectator: Vec<f64>,
    /// `(i, j)` with `i < j` for mixed pairs, `(j, j)` for same-index.
    pub active: (usize, usize),
    /// Mixed: `[mu_0, mu_1, eta_0, eta_1]`; same-index: `[x_0, x_1, x_2]`.
    pub nodes: Vec<f64>,
}

impl SimplexComponent {
    fn key(&self) -> Vec<f64> {
        self.nodes.iter().chain(&self.spectator).copied().collect()
    }
}

/// Sum of pushforwards: for mixed pairs the uniform measure on `[0,1]^2`
/// under `(u, v) -> (.., (1-u) mu_0 + u mu_1, .., (1-v) eta_0 + v eta_1, ..)`;
/// for same-index pairs the uniform probability on the 2-simplex under
/// `s -> s_0 x_0 + s_1 x_1 + s_2 x_2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSimplexMeasure {
    arity: usize,
    pair: (usize, usize),
    components: Vec<SimplexComponent>,
}

impl ProductSimplexMeasure {
    pub fn new(arity: usize, pair: (usize, usize), mut components: Vec<SimplexComponent>) -> Self {
        components.sort_by(|a, b| lex_cmp(&a.key(), &b.key()));
        let mut merged: Vec<SimplexComponent> = Vec::with_capacity(components.len());
        for c in components {
            match merged.last_mut() {
                Some(last) if close(&last.key(), &c.key(), ATOM_MERGE_TOL) => last.weight += c.weight,
                _ => merged.push(c),
            }
        }
        let total: f64 = merged.iter().map(|c| c.weight.norm()).sum();
        merged.retain(|c| c.weight.norm() > WEIGHT_DROP_REL * total);
        Self { arity, pair, components: merged }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn pair(&self) -> (usize, usize) {
        self.pair
    }

    pub fn components(&self) -> &[SimplexComponent] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn total_variation(&self) -> f64 {
        self.components.iter().map(|c| c.weight.norm()).fold(0.0, |s, x| s + x)
    }

    /// `int g d(nu)` by product Gauss-Legendre (Duffy map on the simplex),
    /// exact for polynomials of degree below `2q - 1`.
    pub fn integrate<G: Fn(&[f64]) -> C64>(&self, g: G, q: usize) -> C64 {
        let (i, j) = self.pair;
        let line = UnitRule::gauss_legendre(q);
        let tri = simplex_rule(q);
        let mut x = vec![0.0; self.arity];
        let mut total = C64::from(0.0);
        for c in &self.components {
            x.copy_from_slice(&c.spectator);
            let mut acc = C64::from(0.0);
            if i == j {
                for (s, w) in &tri {
                    x[j] = (1.0 - s[0] - s[1]) * c.nodes[0] + s[0] * c.nodes[1] + s[1] * c.nodes[2];
                    acc += g(&x) * *w;
                }
            } else {
                for (u, wu) in line.iter() {
                    x[i] = (1.0 - u) * c.nodes[0] + u * c.nodes[1];
                    for (v, wv) in line.iter() {
                        x[j] = (1.0 - v) * c.nodes[2] + v * c.nodes[3];
                        acc += g(&x) * (wu * wv);
                    }
                }
            }
            total += acc * c.weight;
        }
        total
    }

    /// `int d^2 f / d lambda_i d lambda_j d(nu)` in closed form through the
    /// Hermite-Genocchi identities.
    pub fn integrate_second_partial(&self, f: &ScalarFunction) -> C64 {
        let (i, j) = self.pair;
        self.components
            .iter()
            .map(|c| {
                let v = if i == j {
                    // The uniform probability on the simplex has density 2.
                    dd2_same_unchecked(f, j, [c.nodes[0], c.nodes[1], c.nodes[2]], &c.spectator) * 2.0
                } else {
                    dd2_mixed_unchecked(f, i, j, [c.nodes[0], c.nodes[1]], [c.nodes[2], c.nodes[3]], &c.spectator)
                };
                v * c.weight
            })
            .sum()
    }
}

fn require_rational(f: &ScalarFunction) -> Result<()> {
    match f {
        ScalarFunction::Rational(_) => Ok(()),
        other => Err(Error::UnsupportedClass(other.class_name().into())),
    }
}

/// `Tr{f(H(1)) - f(H(0)) - d/dt f(H(t))|_0}`.
pub fn koplienko_lhs(path: &PerturbationPath, f: &ScalarFunction) -> Result<C64> {
    require_rational(f)?;
    check_arity(path, f)?;
    Ok(krein_lhs(path, f)? - trace(&first_derivative(path, f, 0.0)?))
}

/// Second-order measures `nu_ij`, `i <= j`. The measures depend only on the
/// path; `f` fixes the function class.
pub fn koplienko_ssm(
    path: &PerturbationPath,
    f: &ScalarFunction,
    q: usize,
) -> Result<BTreeMap<(usize, usize), ProductSimplexMeasure>> {
    require_rational(f)?;
    check_arity(path, f)?;
    let n = path.arity();
    let rule = UnitRule::gauss_legendre(q);
    let mut comps: BTreeMap<(usize, usize), Vec<SimplexComponent>> = BTreeMap::new();
    for i in 0..n {
        for j in i..n {
            comps.insert((i, j), Vec::new());
        }
    }
    for (t, w) in rule.iter() {
        let d = path.decompose_at(t)?;
        let ws: Vec<_> = path.direction().iter().map(|v| d.to_eigenbasis(v.matrix())).collect();
        let scale = (1.0 - t) * w;
        let dim = d.dim();
        for i in 0..n {
            for j in i..n {
                let list = comps.get_mut(&(i, j)).expect("present");
                for a in 0..dim {
                    for b in 0..dim {
                        let weight = if i == j {
                            C64::from(ws[j][(a, b)].norm_sqr() * scale)
                        } else {
                            ws[i][(a, b)] * ws[j][(b, a)] * scale
                        };
                        if weight == C64::from(0.0) {
                            continue;
                        }
                        let (ra, rb) = (&d.table[a], &d.table[b]);
                        let spectator: Vec<f64> = (0..n).map(|l| if l > i && l < j { rb[l] } else { ra[l] }).collect();
                        let nodes = if i == j { vec![ra[j], rb[j], ra[j]] } else { vec![ra[i], rb[i], rb[j], ra[j]] };
                        list.push(SimplexComponent { weight, spectator, active: (i, j), nodes });
                    }
                }
            }
        }
    }
    Ok(comps.into_iter().map(|(k, v)| (k, ProductSimplexMeasure::new(n, k, v))).collect())
}

/// Both sides of the second-order trace formula.
pub fn koplienko_verify(path: &PerturbationPath, f: &ScalarFunction, q: usize, tol: f64) -> Result<VerificationReport> {
    let lhs = koplienko_lhs(path, f)?;
    let measures = koplienko_ssm(path, f, q)?;
    let mut rhs = C64::from(0.0);
    let mut integrals = BTreeMap::new();
    for (&(i, j), nu) in &measures {
        let v = nu.integrate_second_partial(f);
        integrals.insert((i, j), v);
        rhs += if i == j { v } else { v * 2.0 };
    }
    let mut report = VerificationReport::new("koplienko", lhs, rhs, tol);
    let n = path.arity();
    let r = match f {
        ScalarFunction::Rational(r) => r,
        _ => unreachable!("checked by koplienko_lhs"),
    };
    // Second route: the kernel from resolvent products at the same nodes.
    let rule = UnitRule::gauss_legendre(q);
    let mut kernel: BTreeMap<(usize, usize), C64> = integrals.keys().map(|&k| (k, C64::from(0.0))).collect();
    let mut worst: BTreeMap<(usize, usize), f64> = integrals.keys().map(|&k| (k, 0.0)).collect();
    let dirs = path.directions();
    for (t, w) in rule.iter() {
        let parts = rational_second_parts(r, &path.matrices_at(t), &dirs)?;
        for (k, d) in &parts {
            let tr = trace(d);
            *kernel.get_mut(k).expect("present") += tr * ((1.0 - t) * w);
            let e = worst.get_mut(k).expect("present");
            *e = e.max(tr.norm());
        }
    }
    let bbox = spectral_box(path)?;
    let hs: Vec<f64> = dirs.iter().map(frobenius_norm).collect();
    for (&(i, j), nu) in &measures {
        let tag = format!("[{},{}]", i + 1, j + 1);
        let k = kernel[&(i, j)];
        let v = integrals[&(i, j)];
        report.push(BoundCheck::new(format!("kernel_route_agreement{tag}"), 1e-9, (v - k).norm() / (1e-300 + k.norm().max(1e-12))));
        report.push(BoundCheck::new(format!("measure_total_variation{tag}"), 0.5 * hs[i] * hs[j], nu.total_variation()));
        let mut alpha = vec![0u32; n];
        alpha[i] += 1;
        alpha[j] += 1;
        let sup = sup_norm_partial(f, &alpha, &bbox, false)?.certified_upper;
        report.push(BoundCheck::new(format!("second_trace_bound{tag}"), hs[i] * hs[j] * sup, worst[&(i, j)]));
    }
    if let Some(lines) = eigenlines(path) {
        let grads: Vec<ScalarFunction> = (0..n).map(|j| f.partial(j)).collect::<Result<_>>()?;
        let exact: C64 = lines
            .iter()
            .map(|(l, v)| {
                let end: Vec<f64> = l.iter().zip(v).map(|(a, b)| a + b).collect();
                let lin: C64 = grads.iter().zip(v).map(|(g, &vj)| g.eval(l) * vj).sum();
                f.eval(&end) - f.eval(l) - lin
            })
            .sum();
        report.push(BoundCheck::new("eigenline_taylor_agreement", 1e-12, (lhs - exact).norm() / (1.0 + lhs.norm())));
    }
    Ok(report)
}

/// The two weaker first-order estimates for a trig sum synthesized from a
/// bump supported in `(a, b)^n`:
/// `|Tr(f(H(1)) - f(H(0)))| <= sum_j ||V_j||_1 ||d_j f||_W` and
/// `<= C sum_j ||V_j||_1 sup |d_1 .. d_j^2 .. d_n f|`
/// with `C = pi^{-n/2} (b-a)^{n/2} (b-a+1)^n`.
pub fn weaker_bound_check(path: &PerturbationPath, bump: &BumpSynthesis, a: f64, b: f64) -> Result<Vec<BoundCheck>> {
    let n = path.arity();
    let f = ScalarFunction::Trig(bump.function.clone());
    check_arity(path, &f)?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &t in &CERTIFY_TIMES {
        for row in &path.decompose_at(t)?.table {
            for &x in row {
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
    }
    if lo <= a || hi >= b {
        return Err(Error::BoxTooSmall { lo, hi, a, b });
    }
    let lhs = krein_lhs(path, &f)?.norm();
    let norms: Vec<f64> = path.direction().iter().map(|v| trace_norm(v.matrix())).collect();
    let mut wiener = 0.0;
    let mut sup_sum = 0.0;
    let pbox = bump.period_box();
    for j in 0..n {
        let e: Vec<u32> = (0..n).map(|l| u32::from(l == j)).collect();
        wiener += norms[j] * bump.function.wiener_seminorm(&e)?;
        let alpha: Vec<u32> = (0..n).map(|l| if l == j { 2 } else { 1 }).collect();
        sup_sum += norms[j] * sup_norm_partial(&f, &alpha, &pbox, true)?.certified_upper;
    }
    let len = b - a;
    let c = std::f64::consts::PI.powf(-(n as f64) / 2.0) * len.powf(n as f64 / 2.0) * (len + 1.0).powi(n as i32);
    Ok(vec![BoundCheck::new("wiener_bound", wiener, lhs), BoundCheck::new("smooth_bump_bound", c * sup_sum, lhs)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{RationalSum, TrigSum};
    use crate::linalg::{HermitianMatrix, Tolerances};

    fn diag_path(h: &[&[f64]], v: &[&[f64]]) -> PerturbationPath {
        PerturbationPath::new(
            h.iter().map(|d| HermitianMatrix::from_real_diag(d)).collect(),
            v.iter().map(|d| HermitianMatrix::from_real_diag(d)).collect(),
            Tolerances::default(),
        )
        .unwrap()
    }

    fn rational2() -> ScalarFunction {
        ScalarFunction::Rational(RationalSum::new(2, vec![(C64::new(0.0, 2.0), vec![1, 1], C64::from(1.0))]).unwrap())
    }

    #[test]
    fn diagonal_krein_lhs() {
        let p = diag_path(&[&[0.0, 1.0], &[0.0, 2.0]], &[&[1.0, 0.0], &[0.0, 1.0]]);
        let f = rational2();
        let lhs = krein_lhs(&p, &f).unwrap();
        let e = |a: f64, b: f64| f.eval(&[a, b]);
        let expect = (e(1.0, 0.0) - e(0.0, 0.0)) + (e(1.0, 3.0) - e(1.0, 2.0));
        assert!((lhs - expect).norm() < 1e-15);
        let r = krein_verify(&p, &f, 16, 1e-8).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn zero_perturbation_gives_empty_measures() {
        let p = diag_path(&[&[0.0, 1.0], &[0.5, 2.0]], &[&[0.0, 0.0], &[0.0, 0.0]]);
        let m = krein_ssm(&p, 16).unwrap();
        assert!(m.quadrature.iter().all(|mu| mu.is_empty()));
        let nu = koplienko_ssm(&p, &rational2(), 8).unwrap();
        assert!(nu.values().all(|m| m.is_empty()));
        assert_eq!(krein_lhs(&p, &rational2()).unwrap(), C64::from(0.0));
    }

    #[test]
    fn scalar_koplienko_closed_form() {
        let p = diag_path(&[&[0.0]], &[&[1.0]]);
        let z = C64::new(0.0, 2.0);
        let f = ScalarFunction::Rational(RationalSum::new(1, vec![(z, vec![1], C64::from(1.0))]).unwrap());
        let expect = (z - 1.0).inv() - z.inv() - z.inv().powi(2);
        let lhs = koplienko_lhs(&p, &f).unwrap();
        assert!((lhs - expect).norm() < 1e-15);
        let r = koplienko_verify(&p, &f, 24, 1e-7).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn trig_koplienko_unsupported() {
        let p = diag_path(&[&[0.0]], &[&[1.0]]);
        let f = ScalarFunction::Trig(TrigSum::new(1, vec![(vec![1.0], C64::from(1.0))]).unwrap());
        assert!(matches!(koplienko_ssm(&p, &f, 8), Err(Error::UnsupportedClass(_))));
    }

    #[test]
    fn atoms_merge_and_sort() {
        let m = AtomicMeasure::new(
            1,
            vec![
                Atom { point: vec![1.0], weight: C64::from(1.0) },
                Atom { point: vec![0.0], weight: C64::from(2.0) },
                Atom { point: vec![1.0 + 1e-12], weight: C64::from(3.0) },
            ],
        )
        .unwrap();
        assert_eq!(m.atoms().len(), 2);
        assert_eq!(m.atoms()[0].point, vec![0.0]);
        assert_eq!(m.atoms()[1].weight, C64::from(4.0));
    }

    #[test]
    fn simplex_measure_integrates_polynomials_exactly() {
        let nu = ProductSimplexMeasure::new(
            2,
            (0, 0),
            vec![SimplexComponent { weight: C64::from(1.0), spectator: vec![0.0, 0.5], active: (0, 0), nodes: vec![0.0, 1.0, 2.0] }],
        );
        // E[x^2] for x = s1 + 2 s2 on the uniform simplex: E[s1^2] + 4E[s1 s2] + 4E[s2^2] = 1/6 + 1/3 + 2/3.
        let v = nu.integrate(|x| C64::from(x[0] * x[0]), 4);
        assert!((v.re - 7.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn eigenline_closed_form_matches_quadrature() {
        let seg = SegmentMeasure {
            arity: 2,
            segments: vec![Segment { start: vec![0.1, -0.3], direction: vec![0.4, 0.2], weight: C64::new(0.7, 0.1) }],
        };
        let f = ScalarFunction::Trig(
            TrigSum::new(2, vec![(vec![1.5, -0.5], C64::new(1.0, 0.2)), (vec![0.0, 0.0], C64::from(0.5))]).unwrap(),
        );
        let a = seg.integrate_function(&f);
        let b = seg.integrate(|x| f.eval(x));
        assert!((a - b).norm() < 1e-14);
    }

    #[test]
    fn weaker_bounds_on_scalar_instance() {
        let p = diag_path(&[&[-0.2]], &[&[0.3]]);
        let samples = crate::functions::bump_samples(1, -1.0, 1.0, 2, 64, 2.0);
        let bump = crate::functions::synthesize_bump(&samples, 31).unwrap();
        let checks = weaker_bound_check(&p, &bump, -1.0, 1.0).unwrap();
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
        let too_small = weaker_bound_check(&p, &bump, -0.1, 1.0);
        assert!(matches!(too_small, Err(Error::BoxTooSmall { .. })));
    }
}
