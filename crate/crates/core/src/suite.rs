//! The acceptance matrix: twelve seeded checks over generated instances,
//! shared by the `suite` command and the acceptance test target.

use crate::dissipative::{dissipative_koplienko_verify, dissipative_krein_verify};
use crate::divdiff::{dd1, dd2_mixed, dd2_same};
use crate::error::{Error, Result};
use crate::functions::{bump_samples, sup_norm_partial, synthesize_bump, RationalSum, ScalarFunction};
use crate::generators::{gen, monotone_trig, random_hermitian, random_rational, random_trig, Family, InstanceSpec};
use crate::ideals::{
    holder_check, lorentz_norm, psi_growth_certificate, singular_values, IdealNorm, PsiFunction, SingularValueSeq,
};
use crate::io::{write_json, write_measure_csv, ReportDoc, SimplexMeasureDoc};
use crate::linalg::{frobenius_norm, identity, operator_norm, trace_norm, CMatrix, HermitianMatrix, JointEigenDecomposition, Tolerances, C64};
use crate::moi::{moi_fourier, moi_norm_bound, moi_spectral, MoiSymbol, Slot, SymbolKind};
use crate::perturb::{duhamel, first_derivative, rational_apply, second_derivative, PerturbationPath};
use crate::quadrature::{simplex_rule, UnitRule};
use crate::rng::SplitMix64;
use crate::ssm::{koplienko_ssm, koplienko_verify, krein_ssm, krein_verify, weaker_bound_check};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

pub const CRITERIA: [(u32, &str); 12] = [
    (1, "krein_identity"),
    (2, "koplienko_identity"),
    (3, "measure_bounds"),
    (4, "moi_cross_validation"),
    (5, "duhamel_identity"),
    (6, "derivative_oracles"),
    (7, "positivity"),
    (8, "dissipative_identities"),
    (9, "divided_difference_bounds"),
    (10, "ideal_inequalities"),
    (11, "weaker_formula_bounds"),
    (12, "determinism"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    #[serde(default = "default_krein_q")]
    pub krein_q: usize,
    #[serde(default = "default_koplienko_q")]
    pub koplienko_q: usize,
    /// Fraction of the full instance counts, in `(0, 1]`.
    #[serde(default = "default_size")]
    pub size: f64,
    /// Criteria to run; `None` runs all of them.
    #[serde(default)]
    pub criteria: Option<Vec<u32>>,
}

fn default_krein_q() -> usize {
    16
}

fn default_koplienko_q() -> usize {
    24
}

fn default_size() -> f64 {
    1.0
}

impl SuiteConfig {
    pub fn new(seed: u64) -> Self {
        Self { seed, krein_q: 16, koplienko_q: 24, size: 1.0, criteria: None }
    }

    fn count(&self, full: usize) -> usize {
        ((full as f64 * self.size).ceil() as usize).clamp(1, full)
    }

    fn rng(&self, id: u32) -> SplitMix64 {
        SplitMix64::new(self.seed ^ u64::from(id).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub instances: usize,
    /// Worst value of the headline metric.
    pub worst: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub seed: u64,
    pub pass: bool,
    pub criteria: Vec<CriterionOutcome>,
}

struct Tally {
    instances: usize,
    worst: f64,
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Self { instances: 0, worst: 0.0, failures: Vec::new() }
    }

    fn record(&mut self, value: f64, ok: bool, label: impl FnOnce() -> String) {
        self.instances += 1;
        if value.is_nan() {
            self.worst = f64::NAN;
        } else if !self.worst.is_nan() {
            self.worst = self.worst.max(value);
        }
        if !ok {
            self.failures.push(label());
        }
    }

    fn finish(self, id: u32, threshold: f64, extra: &str) -> CriterionOutcome {
        let name = CRITERIA[id as usize - 1].1.to_string();
        let pass = self.failures.is_empty();
        let mut detail = extra.to_string();
        if !pass {
            let shown: Vec<&str> = self.failures.iter().take(5).map(String::as_str).collect();
            detail = format!("{} failure(s): {}", self.failures.len(), shown.join("; "));
        }
        CriterionOutcome { id, name, pass, instances: self.instances, worst: self.worst, threshold, detail }
    }
}

fn failed_checks(r: &crate::report::VerificationReport) -> String {
    let names: Vec<&str> = r.failures().iter().map(|c| c.name.as_str()).collect();
    format!("rel {:.3e}, failed checks [{}]", r.rel_residual, names.join(", "))
}

fn write_outputs(out: Option<&Path>, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    match out {
        Some(dir) => write(dir),
        None => Ok(()),
    }
}

/// Krein identity on shared-basis instances, trig and rational functions.
fn krein_identity(cfg: &SuiteConfig, out: Option<&Path>) -> Result<CriterionOutcome> {
    let mut rng = cfg.rng(1);
    let mut tally = Tally::new();
    let mut eigenline_worst: f64 = 0.0;
    for k in 0..cfg.count(60) {
        let dim = [4, 8, 16, 32][k % 4];
        let n = [2, 3, 4][(k / 4) % 3];
        let path = gen(&InstanceSpec::new(rng.next_u64(), dim, n, Family::SharedBasis))?.hermitian()?;
        let f = if k % 2 == 0 {
            let terms = rng.range(1, 20);
            random_trig(n, terms, &mut rng)?
        } else {
            let terms = rng.range(1, 5);
            random_rational(n, terms, false, &mut rng)?
        };
        let r = krein_verify(&path, &f, cfg.krein_q, 1e-8)?;
        for c in r.bound_checks.iter().filter(|c| c.name.starts_with("eigenline")) {
            eigenline_worst = eigenline_worst.max(c.attained);
        }
        tally.record(r.rel_residual, r.passed(), || format!("instance {k} (N={dim}, n={n}): {}", failed_checks(&r)));
        if k == 0 {
            write_outputs(out, |dir| {
                let m = krein_ssm(&path, cfg.krein_q)?;
                for (j, mu) in m.quadrature.iter().enumerate() {
                    write_measure_csv(fs::File::create(dir.join(format!("krein_mu_{}.csv", j + 1)))?, mu)?;
                }
                write_json(&dir.join("krein_report.json"), &ReportDoc::from_report(&r))
            })?;
        }
    }
    Ok(tally.finish(1, 1e-8, &format!("eigenline agreement {eigenline_worst:.3e}")))
}

/// Koplienko identity on rational functions plus the scalar closed form.
fn koplienko_identity(cfg: &SuiteConfig, out: Option<&Path>) -> Result<CriterionOutcome> {
    let mut rng = cfg.rng(2);
    let mut tally = Tally::new();
    for k in 0..cfg.count(54) {
        let dim = [4, 8, 16][k % 3];
        let n = [2, 3, 4][(k / 3) % 3];
        let path = gen(&InstanceSpec::new(rng.next_u64(), dim, n, Family::SharedBasis))?.hermitian()?;
        let terms = rng.range(1, 5);
        let f = random_rational(n, terms, false, &mut rng)?;
        let r = koplienko_verify(&path, &f, cfg.koplienko_q, 1e-7)?;
        tally.record(r.rel_residual, r.passed(), || format!("instance {k} (N={dim}, n={n}): {}", failed_checks(&r)));
        if k == 0 {
            write_outputs(out, |dir| {
                for ((i, j), nu) in koplienko_ssm(&path, &f, cfg.koplienko_q)? {
                    write_json(&dir.join(format!("koplienko_nu_{}_{}.json", i + 1, j + 1)), &SimplexMeasureDoc::from_measure(&nu))?;
                }
                write_json(&dir.join("koplienko_report.json"), &ReportDoc::from_report(&r))
            })?;
        }
    }
    let path = PerturbationPath::new(
        vec![HermitianMatrix::from_real_diag(&[0.0])],
        vec![HermitianMatrix::from_real_diag(&[1.0])],
        Tolerances::default(),
    )?;
    let z = C64::new(0.0, 2.0);
    let f = ScalarFunction::Rational(RationalSum::new(1, vec![(z, vec![1], C64::from(1.0))])?);
    let closed = (z - 1.0).inv() - z.inv() - z.inv().powi(2);
    let r = koplienko_verify(&path, &f, cfg.koplienko_q, 1e-7)?;
    let err = (r.lhs - closed).norm().max((r.rhs - closed).norm());
    tally.record(r.rel_residual, err <= 1e-12 && r.passed(), || format!("scalar closed form off by {err:.3e}"));
    Ok(tally.finish(2, 1e-7, &format!("scalar closed form error {err:.3e}")))
}

fn family_spec(k: usize, seed: u64, positive: bool) -> InstanceSpec {
    let (family, dim, n) = match k % 4 {
        0 => (Family::SharedBasis, 8, 2 + k % 3),
        1 => (Family::FunctionOfOne, 8, 2 + k % 2),
        2 => (Family::DirectSum, 12, [2, 3, 4][k % 3]),
        _ => (Family::TensorProjection, 18, 2),
    };
    let mut spec = InstanceSpec::new(seed, dim, n, family);
    spec.positive = positive;
    spec
}

/// Total variation of both measures against the trace-ideal bounds.
fn measure_bounds(cfg: &SuiteConfig) -> Result<CriterionOutcome> {
    let mut rng = cfg.rng(3);
    let mut tally = Tally::new();
    for k in 0..cfg.count(40) {
        let spec = family_spec(k, rng.next_u64(), false);
        let path = gen(&spec)?.hermitian()?;
        let n = path.arity();
        let dirs = path.directions();
        let mut worst: f64 = 0.0;
        let m = krein_ssm(&path, cfg.krein_q)?;
        for (j, mu) in m.quadrature.iter().enumerate() {
            let bound = trace_norm(&dirs[j]);
            worst = worst.max(mu.total_variation() / bound.max(f64::MIN_POSITIVE));
        }
        let probe = ScalarFunction::Rational(RationalSum::new(n, vec![(C64::new(0.0, 1.0), vec![1; n], C64::from(1.0))])?);
        for ((i, j), nu) in koplienko_ssm(&path, &probe, cfg.koplienko_q)? {
            let bound = 0.5 * frobenius_norm(&dirs[i]) * frobenius_norm(&dirs[j]);
            worst = worst.max(nu.total_variation() / bound.max(f64::MIN_POSITIVE));
        }
        tally.record(worst, worst <= 1.0 + 1e-9, || format!("instance {k} ({:?}): ratio {worst:.6}", spec.family));
    }
    let worst = tally.worst;
    Ok(tally.finish(3, 1.0, &format!("largest measure/bound ratio {worst:.6}")))
}

/// Fourier route against spectral sums, with operator and trace norm bounds.
fn moi_cross_validation(cfg: &SuiteConfig) -> Result<CriterionOutcome> {
    let mut rng = cfg.rng(4);
    let mut tally = Tally::new();
    let dim = 8;
    let tol = Tolerances::default();
    let mut bound_ratio: f64 = 0.0;
    for k in 0..cfg.count(16) {
        let n = 2 + k % 2;
        let f = random_trig(n, 8, &mut rng)?;
        let decomps: Vec<JointEigenDecomposition> = (0..n + 2)
            .map(|_| JointEigenDecomposition::single(&HermitianMatrix::new(random_hermitian(dim, &mut rng), 1e-10)?, &tol))
            .collect::<Result<_>>()?;
        let vs: Vec<CMatrix> = (0..n + 1).map(|_| random_hermitian(dim, &mut rng) * C64::from(0.3)).collect();
        let id = identity(dim);
        let j = k % n;
        for kind in [SymbolKind::Plain, SymbolKind::First(j), SymbolKind::SecondSame(j), SymbolKind::SecondMixed(0, n - 1)] {
            let sym = MoiSymbol::new(&f, kind)?;
            let m = sym.arity();
            let slots: Vec<Slot> = (0..m).map(|s| Slot::new(&decomps[s], 0)).collect();
            let general: Vec<Option<&CMatrix>> = vs[..m - 1].iter().map(Some).collect();
            let a = moi_spectral(&sym, &slots, &general)?;
            let b = moi_fourier(&sym, &slots, &general, cfg.koplienko_q)?;
            let rel = frobenius_norm(&(&a - &b)) / (1.0 + frobenius_norm(&a));
            let constant = moi_norm_bound(&sym)?;
            let op_bound = constant * general.iter().map(|v| operator_norm(v.unwrap())).product::<f64>();
            let mut ratio = operator_norm(&a) / op_bound.max(f64::MIN_POSITIVE);
            // Ideal-norm form: identities off the active positions.
            let active: Vec<usize> = match kind {
                SymbolKind::Plain => Vec::new(),
                SymbolKind::First(j) => vec![j],
                SymbolKind::SecondSame(j) => vec![j, j + 1],
                SymbolKind::SecondMixed(j, k) => vec![j, k + 1],
            };
            if !active.is_empty() {
                let sparse: Vec<Option<&CMatrix>> =
                    (0..m - 1).map(|p| Some(if active.contains(&p) { &vs[p] } else { &id })).collect();
                let t = moi_spectral(&sym, &slots, &sparse)?;
                let ideal_bound = if active.len() == 1 {
                    constant * trace_norm(&vs[active[0]])
                } else {
                    constant * frobenius_norm(&vs[active[0]]) * frobenius_norm(&vs[active[1]])
                };
                ratio = ratio.max(trace_norm(&t) / ideal_bound.max(f64::MIN_POSITIVE));
            }
            bound_ratio = bound_ratio.max(ratio);
            tally.record(rel, rel <= 1e-8 && ratio <= 1.0 + 1e-9, || {
                format!("instance {k} {kind:?}: rel {rel:.3e}, bound ratio {ratio:.6}")
            });
        }
    }
    Ok(tally.finish(4, 1e-8, &format!("largest norm/bound ratio {bound_ratio:.6}")))
}

/// Duhamel formula for random slots and non-commuting operators.
fn duhamel_identity(cfg: &SuiteConfig) -> Result<CriterionOutcome> {
    let mut rng = cfg.rng(5);
    let mut tally = Tally::new();
    let tol = Tolerances::default();
    for k in 0..cfg.count(100) {
        let n = rng.range(1, 3);
        let j = rng.range(0, n - 1);
        let dim = rng.range(3, 6);
        let herm = |rng: &mut SplitMix64| HermitianMatrix::new(random_hermitian(dim, rng) * C64::from(0.5), 1e-10);
        let a = herm(&mut rng)?;
        let b = herm(&mut rng)?;
        let others: Vec<HermitianMatrix> = (0..n - 1).map(|_| herm(&mut rng)).collect::<Result<_>>()?;
        let f = if k % 2 == 0 {
            let terms = rng.range(1, 10);
            random_trig(n, terms, &mut rng)?
        } else {
            let terms = rng.range(1, 4);
            random_rational(n, terms, false, &mut rng)?
        };
        let d = duhamel(&f, j, &a, &b, &others, &tol)?;
        let rel = d.residual / (1.0 + frobenius_norm(&d.lhs));
        tally.record(rel, rel <= 1e-9, || format!("instance {k}: rel {rel:.3e}"));
    }
    Ok(tally.finish(5, 1e-9, ""))
}

fn matrix_of(path: &PerturbationPath, f: &ScalarFunction, t: f64) -> Result<CMatrix> {
    match f {
        ScalarFunction::Rational(r) => rational_apply(r, &path.matrices_at(t)),
        _ => path.decompose_at(t)?.apply_function(f),
    }
}

/// `e(h) / e(h/2)` for central differences of `F(t) = f(H(t0 + t))`.
fn richardson(path: &PerturbationPath, f: &ScalarFunction, t0: f64, exact: &CMatrix, order: u8, h: f64) -> Result<f64> {
    let err = |h: f64| -> Result<f64> {
        let plus = matrix_of(path, f, t0 + h)?;
        let minus = matrix_of(path, f, t0 - h)?;
        let fd = if order == 1 {
            (plus - minus) / C64::from(2.0 * h)
        } else {
            (plus - matrix_of(path, f, t0)? * C64::from(2.0) + minus) / C64::from(h * h)
        };
        Ok(frobenius_norm(&(fd - exact)))
    };
    Ok(err(h)? / err(0.5 * h)?)
}

/// First and second derivatives against central finite differences.
fn derivative_oracles(cfg: &SuiteConfig) -> Result<CriterionOutcome> {
    let mut rng = cfg.rng(6);
    let mut tally = Tally::new();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..cfg.count(50) {
        let n = 2 + k % 2;
        let dim = [4, 6, 8][k % 3];
        let path = if k % 5 == 4 {
            // Non-commuting rational instance: resolvent calculus only.
            let base = (0..n).map(|_| HermitianMatrix::new(random_hermitian(dim, &mut rng) * C64::from(0.4), 1e-10)).collect::<Result<_>>()?;
            let dir = (0..n).map(|_| HermitianMatrix::new(random_hermitian(dim, &mut rng) * C64::from(0.2), 1e-10)).collect::<Result<_>>()?;
            PerturbationPath::new(base, dir, Tolerances::default())?
        } else {
            gen(&InstanceSpec::new(rng.next_u64(), dim, n, Family::SharedBasis))?.hermitian()?
        };
        let t0 = rng.uniform(0.2, 0.8);
        let rational = k % 5 == 4 || k % 2 == 1;
        let f = if rational {
            let terms = rng.range(1, 4);
            random_rational(n, terms, false, &mut rng)?
        } else {
            let terms = rng.range(2, 8);
            random_trig(n, terms, &mut rng)?
        };
        let first = first_derivative(&path, &f, t0)?;
        let mut ratios = vec![richardson(&path, &f, t0, &first, 1, 2e-2)?];
        if rational {
            let bundle = second_derivative(&path, &f, t0)?;
            ratios.push(richardson(&path, &f, t0, &bundle.second, 2, 2e-2)?);
        }
        for r in ratios {
            lo = lo.min(r);
            hi = hi.max(r);
            tally.record((r - 4.0).abs(), (3.8..=4.2).contains(&r), || format!("instance {k}: ratio {r:.4}"));
        }
    }
    Ok(tally.finish(6, 0.2, &format!("Richardson ratios in [{lo:.4}, {hi:.4}]")))
}

/// Nonnegative perturbations and an increasing function give a
/// nonnegative trace difference and nonnegative first-order atoms.
fn positivity(cfg: &SuiteConfig) -> Result<CriterionOutcome> {
    let mut rng = cfg.rng(7);
    let mut tally = Tally::new();
    for k in 0..cfg.count(20) {
        let spec = family_spec(k, rng.next_u64(), true);
        let path = gen(&spec)?.hermitian()?;
        let reach = spectral_reach(&path)?;
        let f = monotone_trig(path.arity(), 0.95 * std::f64::consts::FRAC_PI_2 / reach)?;
        let lhs = crate::ssm::krein_lhs(&path, &f)?;
        let m = krein_ssm(&path, cfg.krein_q)?;
        let min_atom = m
            .quadrature
            .iter()
            .flat_map(|mu| mu.atoms().iter().map(|a| a.weight.re))
            .fold(f64::INFINITY, f64::min);
        let ok = lhs.re >= -1e-10 && min_atom >= -1e-12;
        tally.record((-lhs.re.min(min_atom)).max(0.0), ok, || {
            format!("instance {k} ({:?}): lhs {:.3e}, min atom {min_atom:.3e}", spec.family, lhs.re)
        });
    }
    Ok(tally.finish(7, 1e-10, ""))
}

/// Largest `|lambda|` over the spectra along the path.
fn spectral_reach(path: &PerturbationPath) -> Result<f64> {
    let mut reach: f64 = 1e-3;
    for &t in &crate::perturb::CERTIFY_TIMES {
        for row in &path.decompose_at(t)?.table {
            reach = row.iter().fold(reach, |r, x| r.max(x.abs()));
        }
    }
    Ok(reach)
}

/// Dissipative trace identities on truncated Hardy tuples.
fn dissipative_identities(cfg: &SuiteConfig) -> Result<CriterionOutcome> {
    let mut rng = cfg.rng(8);
    let mut tally = Tally::new();
    let mut asserted_bounds = 0;
    for k in 0..cfg.count(18) {
        let dim = [4, 16, 64][k % 3];
        let n = 1 + (k / 3) % 3;
        let mut spec = InstanceSpec::new(rng.next_u64(), dim, n, Family::HardyDissipative);
        spec.scale = 0.1;
        spec.scalar_direction = (k / 9) % 2 == 0;
        let path = gen(&spec)?.dissipative()?;
        let terms = rng.range(1, 5);
        let f = random_rational(n, terms, true, &mut rng)?;
        for r in [
            dissipative_krein_verify(&path, &f, cfg.krein_q, 1e-7)?,
            dissipative_koplienko_verify(&path, &f, cfg.koplienko_q, 1e-7)?,
        ] {
            asserted_bounds += r.bound_checks.iter().filter(|c| c.asserted).count();
            tally.record(r.rel_residual, r.passed(), || {
                format!("instance {k} (N={dim}, n={n}) {}: {}", r.identity, failed_checks(&r))
            });
        }
    }
    Ok(tally.finish(8, 1e-7, &format!("{asserted_bounds} asserted bound checks")))
}

/// Sup bounds of divided differences and Hermite-Genocchi quadrature.
fn divided_difference_bounds(cfg: &SuiteConfig) -> Result<CriterionOutcome> {
    let mut rng = cfg.rng(9);
    let mut tally = Tally::new();
    let line = UnitRule::gauss_legendre(64);
    let tri = simplex_rule(48);
    for k in 0..cfg.count(200) {
        let n = 2;
        let f = if k % 2 == 0 {
            let terms = rng.range(1, 6);
            random_trig(n, terms, &mut rng)?
        } else {
            let terms = rng.range(1, 4);
            random_rational(n, terms, false, &mut rng)?
        };
        let mut node = || rng.uniform(-1.5, 1.5);
        let point = [node(), node()];
        let mu = [node(), node(), node()];
        let eta = [node(), node()];
        let bbox = vec![(-1.5, 1.5); n];
        let sup = |alpha: [u32; 2]| sup_norm_partial(&f, &alpha, &bbox, false).map(|s| s.certified_upper);
        let d1 = dd1(&f, 0, [mu[0], mu[1]], &point)?;
        let d2 = dd2_same(&f, 0, mu, &point)?;
        let dm = dd2_mixed(&f, 0, 1, [mu[0], mu[1]], eta, &point)?;
        let mut ratio = (d1.norm() / sup([1, 0])?).max(2.0 * d2.norm() / sup([2, 0])?);
        ratio = ratio.max(dm.norm() / sup([1, 1])?);
        // Hermite-Genocchi: averages of derivatives over segments and simplices.
        let df = f.partial(0)?;
        let ddf = df.partial(0)?;
        let dxy = df.partial(1)?;
        let at = |g: &ScalarFunction, x0: f64, x1: f64| g.eval(&[x0, x1]);
        let hg1: C64 = line.iter().map(|(s, w)| at(&df, (1.0 - s) * mu[0] + s * mu[1], point[1]) * w).sum();
        let hg2: C64 = tri
            .iter()
            .map(|(s, w)| at(&ddf, (1.0 - s[0] - s[1]) * mu[0] + s[0] * mu[1] + s[1] * mu[2], point[1]) * (0.5 * w))
            .sum();
        let mut hgm = C64::from(0.0);
        for (u, wu) in line.iter() {
            for (v, wv) in line.iter() {
                hgm += at(&dxy, (1.0 - u) * mu[0] + u * mu[1], (1.0 - v) * eta[0] + v * eta[1]) * (wu * wv);
            }
        }
        let scale = |a: C64| 1.0 + a.norm();
        let hg = ((hg1 - d1).norm() / scale(d1)).max((hg2 - d2).norm() / scale(d2)).max((hgm - dm).norm() / scale(dm));
        tally.record(hg, hg <= 1e-10 && ratio <= 1.0 + 1e-9, || format!("node set {k}: HG {hg:.3e}, bound ratio {ratio:.6}"));
    }
    Ok(tally.finish(9, 1e-10, ""))
}

fn random_matrix(dim: usize, rng: &mut SplitMix64) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| C64::new(rng.normal(), rng.normal()))
}

/// Lorentz norm axioms, Holder inequality and the psi growth certificate.
fn ideal_inequalities(cfg: &SuiteConfig) -> Result<CriterionOutcome> {
    let mut rng = cfg.rng(10);
    let mut tally = Tally::new();
    let psi = PsiFunction::Log1p;
    let lorentz = IdealNorm::Lorentz(psi.clone());
    for k in 0..cfg.count(100) {
        let dim = [4, 8][k % 2];
        let a = random_matrix(dim, &mut rng);
        let b = random_matrix(dim, &mut rng);
        let c = rng.uniform(0.1, 5.0);
        let na = lorentz.of(&a)?;
        let nb = lorentz.of(&b)?;
        let triangle = lorentz.of(&(&a + &b))? - (na + nb);
        let homogeneity = (lorentz.of(&(&a * C64::from(c)))? - c * na).abs() / (c * na);
        // 0 <= P <= P + Q for positive P, Q.
        let p = &a * a.adjoint();
        let q = &b * b.adjoint();
        let dominance = lorentz.of(&p)? - lorentz.of(&(&p + &q))?;
        let holder_t = holder_check(&a, &b, &IdealNorm::Trace)?;
        let holder_l = holder_check(&a, &b, &lorentz)?;
        let worst = triangle.max(dominance).max(homogeneity - 1e-12).max(-holder_t.slack).max(-holder_l.slack);
        let ok = triangle <= 1e-10 * (na + nb)
            && homogeneity <= 1e-12
            && dominance <= 1e-10
            && holder_t.pass
            && holder_l.pass
            && lorentz_norm(&singular_values(&a), &psi)? == na;
        tally.record(worst, ok, || format!("pair {k}: triangle {triangle:.3e}, homogeneity {homogeneity:.3e}, dominance {dominance:.3e}"));
    }
    let cert = psi_growth_certificate(&psi, 0.4, 1e6)?;
    tally.record(0.0, cert.constant.is_finite() && !cert.non_uniform, || format!("growth certificate {cert:?}"));
    let zero = lorentz_norm(&SingularValueSeq::new(vec![0.0; 4])?, &psi)?;
    tally.record(zero, zero == 0.0, || "zero sequence has nonzero norm".into());
    Ok(tally.finish(10, 1e-10, &format!("growth constant C = {:.6} (argmax t = {:.3})", cert.constant, cert.argmax)))
}

/// Weaker first-order bounds for bump functions.
fn weaker_formula_bounds(cfg: &SuiteConfig) -> Result<CriterionOutcome> {
    let mut rng = cfg.rng(11);
    let mut tally = Tally::new();
    for k in 0..cfg.count(10) {
        let n = 1 + k % 2;
        let (a, b) = (-rng.uniform(1.5, 2.5), rng.uniform(1.5, 2.5));
        let p = 2 + (k / 2) as u32 % 3;
        let (points, cutoff) = if n == 1 { (64, 31) } else { (24, 11) };
        let bump = synthesize_bump(&bump_samples(n, a, b, p, points, 2.0), cutoff)?;
        let mut spec = InstanceSpec::new(rng.next_u64(), [4, 8][k % 2], n, Family::SharedBasis);
        spec.scale = 0.3;
        let path = if n == 1 {
            let base = vec![HermitianMatrix::from_real_diag(&(0..spec.dim).map(|_| rng.uniform(-0.8, 0.8)).collect::<Vec<_>>())];
            let dir = vec![HermitianMatrix::from_real_diag(&(0..spec.dim).map(|_| rng.uniform(-0.3, 0.3)).collect::<Vec<_>>())];
            PerturbationPath::new(base, dir, Tolerances::default())?
        } else {
            gen(&spec)?.hermitian()?
        };
        let checks = weaker_bound_check(&path, &bump, a, b)?;
        let worst = checks.iter().map(|c| c.attained / c.bound.max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
        tally.record(worst, checks.iter().all(|c| c.pass), || format!("bump {k} (n={n}): ratio {worst:.6}"));
    }
    let worst = tally.worst;
    Ok(tally.finish(11, 1.0, &format!("largest lhs/bound ratio {worst:.6}")))
}

/// Two runs of a reduced suite with the same seed, compared byte for byte.
fn determinism(cfg: &SuiteConfig) -> Result<CriterionOutcome> {
    let small = SuiteConfig {
        seed: cfg.seed,
        krein_q: cfg.krein_q,
        koplienko_q: cfg.koplienko_q,
        size: 0.05,
        criteria: Some(vec![1, 2, 3, 8]),
    };
    let dirs = [tempfile::tempdir()?, tempfile::tempdir()?];
    for d in &dirs {
        run_suite(&small, Some(d.path()))?;
    }
    let a = read_tree(dirs[0].path())?;
    let b = read_tree(dirs[1].path())?;
    let mut tally = Tally::new();
    let same = a == b;
    tally.record(if same { 0.0 } else { 1.0 }, same && !a.is_empty(), || format!("{} vs {} files differ", a.len(), b.len()));
    Ok(tally.finish(12, 0.0, &format!("{} files compared", a.len())))
}

fn read_tree(dir: &Path) -> Result<Vec<(PathBuf, Vec<u8>)>> {
    let mut out = Vec::new();
    let mut names: Vec<PathBuf> = fs::read_dir(dir)?.map(|e| e.map(|e| e.path())).collect::<std::io::Result<_>>()?;
    names.sort();
    for p in names {
        out.push((p.strip_prefix(dir).map_err(|e| Error::Io(e.to_string()))?.to_path_buf(), fs::read(&p)?));
    }
    Ok(out)
}

pub fn run_criterion(id: u32, cfg: &SuiteConfig, out: Option<&Path>) -> Result<CriterionOutcome> {
    match id {
        1 => krein_identity(cfg, out),
        2 => koplienko_identity(cfg, out),
        3 => measure_bounds(cfg),
        4 => moi_cross_validation(cfg),
        5 => duhamel_identity(cfg),
        6 => derivative_oracles(cfg),
        7 => positivity(cfg),
        8 => dissipative_identities(cfg),
        9 => divided_difference_bounds(cfg),
        10 => ideal_inequalities(cfg),
        11 => weaker_formula_bounds(cfg),
        12 => determinism(cfg),
        other => Err(Error::InvalidSpec(format!("unknown criterion {other}"))),
    }
}

/// Runs the selected criteria and writes one JSON document per criterion
/// plus `summary.json` into `out`.
pub fn run_suite(cfg: &SuiteConfig, out: Option<&Path>) -> Result<SuiteSummary> {
    if !(cfg.size > 0.0 && cfg.size <= 1.0) {
        return Err(Error::InvalidSpec(format!("suite size {} outside (0, 1]", cfg.size)));
    }
    let ids: Vec<u32> = match &cfg.criteria {
        Some(list) => list.clone(),
        None => CRITERIA.iter().map(|c| c.0).collect(),
    };
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
    }
    let mut criteria = Vec::with_capacity(ids.len());
    for id in ids {
        let outcome = run_criterion(id, cfg, out)?;
        write_outputs(out, |dir| write_json(&dir.join(format!("criterion_{id:02}.json")), &outcome))?;
        criteria.push(outcome);
    }
    let summary = SuiteSummary { seed: cfg.seed, pass: criteria.iter().all(|c| c.pass), criteria };
    write_outputs(out, |dir| write_json(&dir.join("summary.json"), &summary))?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_criterion_is_rejected() {
        assert!(run_criterion(13, &SuiteConfig::new(1), None).is_err());
    }

    #[test]
    fn selection() {
        let cfg = SuiteConfig { criteria: Some(vec![5]), size: 0.05, ..SuiteConfig::new(3) };
        let s = run_suite(&cfg, None).unwrap();
        assert_eq!(s.criteria.len(), 1);
        assert!(s.pass, "{s:?}");
        let empty = SuiteConfig { criteria: Some(Vec::new()), ..SuiteConfig::new(3) };
        let s = run_suite(&empty, None).unwrap();
        assert!(s.criteria.is_empty() && s.pass);
    }
}
