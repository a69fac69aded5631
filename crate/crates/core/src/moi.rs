//! Multiple operator integrals with divided-difference symbols.
//!
//! Two evaluation routes: a spectral sum over eigenbases, valid for every
//! symbol, and a Fourier route for trig sums that integrates products of
//! matrix exponentials with Gauss-Legendre quadrature.

use crate::divdiff::{dd1_unchecked, dd2_mixed_unchecked, dd2_same_unchecked};
use crate::error::{Error, Result};
use crate::functions::{for_each_index, ScalarFunction, TrigTerm};
use crate::linalg::{CMatrix, JointEigenDecomposition, C64, I};
use crate::quadrature::UnitRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    /// `f` itself.
    Plain,
    /// `f_j^{[1]}`.
    First(usize),
    /// `f_j^{[2]}`.
    SecondSame(usize),
    /// `f_{jk}^{[2]}` with `j != k`.
    SecondMixed(usize, usize),
}

#[derive(Debug, Clone, Copy)]
pub struct MoiSymbol<'a> {
    pub f: &'a ScalarFunction,
    pub kind: SymbolKind,
}

impl<'a> MoiSymbol<'a> {
    pub fn new(f: &'a ScalarFunction, kind: SymbolKind) -> Result<Self> {
        let n = f.arity();
        let check = |j: usize| if j < n { Ok(()) } else { Err(Error::IndexOutOfRange { index: j, arity: n }) };
        let kind = match kind {
            SymbolKind::Plain => kind,
            SymbolKind::First(j) | SymbolKind::SecondSame(j) => {
                check(j)?;
                kind
            }
            SymbolKind::SecondMixed(j, k) => {
                check(j)?;
                check(k)?;
                if j == k {
                    return Err(Error::InvalidFunction("mixed symbol needs distinct coordinates".into()));
                }
                SymbolKind::SecondMixed(j.min(k), j.max(k))
            }
        };
        Ok(Self { f, kind })
    }

    /// Number of operator slots.
    pub fn arity(&self) -> usize {
        self.f.arity()
            + match self.kind {
                SymbolKind::Plain => 0,
                SymbolKind::First(_) => 1,
                SymbolKind::SecondSame(_) | SymbolKind::SecondMixed(..) => 2,
            }
    }

    /// Evaluate the symbol at slot values `x`; `point` is scratch of length `n`.
    pub fn eval(&self, x: &[f64], point: &mut [f64]) -> C64 {
        let n = self.f.arity();
        match self.kind {
            SymbolKind::Plain => self.f.eval(x),
            SymbolKind::First(j) => {
                for l in 0..n {
                    point[l] = if l < j { x[l] } else { x[l + 1] };
                }
                dd1_unchecked(self.f, j, [x[j], x[j + 1]], point)
            }
            SymbolKind::SecondSame(j) => {
                for l in 0..n {
                    point[l] = if l < j { x[l] } else { x[l + 2] };
                }
                dd2_same_unchecked(self.f, j, [x[j], x[j + 1], x[j + 2]], point)
            }
            SymbolKind::SecondMixed(j, k) => {
                for l in 0..n {
                    point[l] = if l < j {
                        x[l]
                    } else if l < k {
                        x[l + 1]
                    } else {
                        x[l + 2]
                    };
                }
                dd2_mixed_unchecked(self.f, j, k, [x[j], x[j + 1]], [x[k + 1], x[k + 2]], point)
            }
        }
    }
}

/// One operator slot: column `column` of a joint eigendecomposition.
#[derive(Debug, Clone, Copy)]
pub struct Slot<'a> {
    pub decomp: &'a JointEigenDecomposition,
    pub column: usize,
}

impl<'a> Slot<'a> {
    pub fn new(decomp: &'a JointEigenDecomposition, column: usize) -> Self {
        Self { decomp, column }
    }
}

fn check_inputs(sym: &MoiSymbol, slots: &[Slot], vs: &[Option<&CMatrix>]) -> Result<usize> {
    let m = sym.arity();
    if slots.len() != m {
        return Err(Error::ArityMismatch { expected: m, found: slots.len() });
    }
    if vs.len() + 1 != m {
        return Err(Error::ArityMismatch { expected: m - 1, found: vs.len() });
    }
    let n = slots[0].decomp.dim();
    for s in slots {
        if s.decomp.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: s.decomp.dim() });
        }
        if s.column >= s.decomp.arity() {
            return Err(Error::IndexOutOfRange { index: s.column, arity: s.decomp.arity() });
        }
    }
    for v in vs.iter().flatten() {
        if v.nrows() != n || v.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: v.nrows() });
        }
    }
    Ok(n)
}

/// `T_phi^{H_1..H_m}(V_1, ..., V_{m-1})` by summing over eigenbases.
///
/// `None` stands for the identity. Consecutive slots drawn from the same
/// decomposition with an identity between them share one summation index.
pub fn moi_spectral(sym: &MoiSymbol, slots: &[Slot], vs: &[Option<&CMatrix>]) -> Result<CMatrix> {
    let n = check_inputs(sym, slots, vs)?;
    // groups[g] = slots sharing a summation index; links[g] joins g and g+1.
    let mut groups: Vec<Vec<usize>> = vec![vec![0]];
    let mut links: Vec<CMatrix> = Vec::new();
    for s in 1..slots.len() {
        let same = std::ptr::eq(slots[s].decomp, slots[s - 1].decomp);
        match (vs[s - 1], same) {
            (None, true) => groups.last_mut().expect("nonempty").push(s),
            (v, _) => {
                let u_prev = &slots[s - 1].decomp.unitary;
                let u_next = &slots[s].decomp.unitary;
                let w = match v {
                    Some(v) => u_prev.adjoint() * v * u_next,
                    None => u_prev.adjoint() * u_next,
                };
                links.push(w);
                groups.push(vec![s]);
            }
        }
    }
    let first = slots[groups[0][0]].decomp;
    let last = slots[*groups.last().expect("nonempty").last().expect("nonempty")].decomp;
    let mut inner = CMatrix::zeros(n, n);
    let mut x = vec![0.0; slots.len()];
    let mut point = vec![0.0; sym.f.arity()];
    let sizes = vec![n; groups.len()];
    for_each_index(&sizes, |idx| {
        let mut w = C64::from(1.0);
        for (g, link) in links.iter().enumerate() {
            w *= link[(idx[g], idx[g + 1])];
            if w == C64::from(0.0) {
                return;
            }
        }
        for (g, group) in groups.iter().enumerate() {
            for &s in group {
                x[s] = slots[s].decomp.table[idx[g]][slots[s].column];
            }
        }
        inner[(idx[0], idx[groups.len() - 1])] += sym.eval(&x, &mut point) * w;
    });
    Ok(&first.unitary * inner * last.unitary.adjoint())
}

fn exp_slot(slot: &Slot, theta: f64) -> CMatrix {
    let u = &slot.decomp.unitary;
    let mut scaled = u.clone();
    for k in 0..u.ncols() {
        let e = (I * theta * slot.decomp.table[k][slot.column]).exp();
        for r in 0..u.nrows() {
            scaled[(r, k)] *= e;
        }
    }
    scaled * u.adjoint()
}

/// `e^{i theta_1 H_1} V_1 e^{i theta_2 H_2} ... e^{i theta_m H_m}`.
fn chain(slots: &[Slot], vs: &[Option<&CMatrix>], theta: &[f64]) -> CMatrix {
    let mut acc = exp_slot(&slots[0], theta[0]);
    for s in 1..slots.len() {
        if let Some(v) = vs[s - 1] {
            acc = acc * v;
        }
        acc = acc * exp_slot(&slots[s], theta[s]);
    }
    acc
}

/// The same operator via the Fourier representation of the symbol; each
/// inner time integral uses a `q`-point Gauss-Legendre rule (a Duffy map
/// for the triangle of the same-index second order symbol).
pub fn moi_fourier(sym: &MoiSymbol, slots: &[Slot], vs: &[Option<&CMatrix>], q: usize) -> Result<CMatrix> {
    let n = check_inputs(sym, slots, vs)?;
    let f = match sym.f {
        ScalarFunction::Trig(f) => f,
        other => return Err(Error::UnsupportedClass(other.class_name().into())),
    };
    let rule = UnitRule::gauss_legendre(q);
    let mut total = CMatrix::zeros(n, n);
    let mut theta = vec![0.0; slots.len()];
    for term in f.terms() {
        let TrigTerm { freq, coeff } = term;
        match sym.kind {
            SymbolKind::Plain => {
                theta.copy_from_slice(freq);
                total += chain(slots, vs, &theta) * *coeff;
            }
            SymbolKind::First(j) => {
                let t = freq[j];
                for l in 0..freq.len() {
                    theta[if l < j { l } else { l + 1 }] = freq[l];
                }
                for (u, w) in rule.iter() {
                    let s = t * u;
                    theta[j] = t - s;
                    theta[j + 1] = s;
                    total += chain(slots, vs, &theta) * (*coeff * I * (w * t));
                }
            }
            SymbolKind::SecondSame(j) => {
                let t = freq[j];
                for l in 0..freq.len() {
                    theta[if l < j { l } else { l + 2 }] = freq[l];
                }
                for (u, wu) in rule.iter() {
                    for (v, wv) in rule.iter() {
                        let s = t * u;
                        let p = t * u * v;
                        theta[j] = t - s;
                        theta[j + 1] = s - p;
                        theta[j + 2] = p;
                        total += chain(slots, vs, &theta) * (-*coeff * (wu * wv * t * t * u));
                    }
                }
            }
            SymbolKind::SecondMixed(j, k) => {
                let (tj, tk) = (freq[j], freq[k]);
                for l in 0..freq.len() {
                    let slot = if l < j {
                        l
                    } else if l < k {
                        l + 1
                    } else {
                        l + 2
                    };
                    theta[slot] = freq[l];
                }
                for (u, wu) in rule.iter() {
                    for (v, wv) in rule.iter() {
                        let s = tj * u;
                        let p = tk * v;
                        theta[j] = tj - s;
                        theta[j + 1] = s;
                        theta[k + 1] = tk - p;
                        theta[k + 2] = p;
                        total += chain(slots, vs, &theta) * (-*coeff * (wu * wv * tj * tk));
                    }
                }
            }
        }
    }
    Ok(total)
}

/// Operator-norm bound `||T_phi(V_1, ..)|| <= B prod ||V_l||` from the
/// Fourier representation: `B = sum |c|` for `f`, `sum |c| |t_j|` for
/// `f_j^{[1]}`, `sum |c| t_j^2 / 2` for `f_j^{[2]}` and `sum |c| |t_j t_k|`
/// for `f_{jk}^{[2]}`. The same constant bounds the trace norm when one
/// `V` is measured in trace norm (or two in Hilbert-Schmidt norm).
pub fn moi_norm_bound(sym: &MoiSymbol) -> Result<f64> {
    let f = match sym.f {
        ScalarFunction::Trig(f) => f,
        other => return Err(Error::UnsupportedClass(other.class_name().into())),
    };
    Ok(f.terms()
        .iter()
        .map(|t| {
            t.coeff.norm()
                * match sym.kind {
                    SymbolKind::Plain => 1.0,
                    SymbolKind::First(j) => t.freq[j].abs(),
                    SymbolKind::SecondSame(j) => 0.5 * t.freq[j] * t.freq[j],
                    SymbolKind::SecondMixed(j, k) => (t.freq[j] * t.freq[k]).abs(),
                }
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{RationalSum, TrigSum};
    use crate::generators::random_unitary;
    use crate::linalg::{frobenius_norm, from_real_diag, operator_norm, HermitianMatrix, Tolerances};
    use crate::rng::SplitMix64;

    fn random_hermitian(n: usize, rng: &mut SplitMix64) -> JointEigenDecomposition {
        let u = random_unitary(n, rng);
        let vals: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let h = HermitianMatrix::new(&u * from_real_diag(&vals) * u.adjoint(), 1e-10).unwrap();
        JointEigenDecomposition::single(&h, &Tolerances::default()).unwrap()
    }

    fn random_matrix(n: usize, rng: &mut SplitMix64) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| C64::new(rng.normal(), rng.normal()) * 0.3)
    }

    fn random_trig(n: usize, rng: &mut SplitMix64) -> ScalarFunction {
        ScalarFunction::Trig(
            TrigSum::new(
                n,
                (0..5)
                    .map(|_| ((0..n).map(|_| rng.uniform(-2.0, 2.0)).collect(), C64::new(rng.normal(), rng.normal())))
                    .collect(),
            )
            .unwrap(),
        )
    }

    #[test]
    fn plain_symbol_with_identities_is_functional_calculus() {
        let mut rng = SplitMix64::new(1);
        let d = random_hermitian(5, &mut rng);
        let f = ScalarFunction::Rational(RationalSum::new(1, vec![(C64::new(0.1, 0.7), vec![2], C64::from(1.0))]).unwrap());
        let sym = MoiSymbol::new(&f, SymbolKind::Plain).unwrap();
        let t = moi_spectral(&sym, &[Slot::new(&d, 0)], &[]).unwrap();
        assert!(frobenius_norm(&(t - d.apply_function(&f).unwrap())) < 1e-13);
    }

    #[test]
    fn first_order_symbol_gives_difference() {
        // T_{f^{[1]}}^{A,B}(A - B) = f(A) - f(B).
        let mut rng = SplitMix64::new(2);
        let a = random_hermitian(6, &mut rng);
        let b = random_hermitian(6, &mut rng);
        let diff = a.reconstruct(0) - b.reconstruct(0);
        let f = random_trig(1, &mut rng);
        let sym = MoiSymbol::new(&f, SymbolKind::First(0)).unwrap();
        let t = moi_spectral(&sym, &[Slot::new(&a, 0), Slot::new(&b, 0)], &[Some(&diff)]).unwrap();
        let expect = a.apply_function(&f).unwrap() - b.apply_function(&f).unwrap();
        assert!(frobenius_norm(&(t - expect)) < 1e-12);
    }

    #[test]
    fn fourier_matches_spectral() {
        let mut rng = SplitMix64::new(4);
        let n = 5;
        let f = random_trig(2, &mut rng);
        let ds: Vec<JointEigenDecomposition> = (0..4).map(|_| random_hermitian(n, &mut rng)).collect();
        let vs: Vec<CMatrix> = (0..3).map(|_| random_matrix(n, &mut rng)).collect();
        for kind in [SymbolKind::Plain, SymbolKind::First(1), SymbolKind::SecondSame(0), SymbolKind::SecondMixed(0, 1)] {
            let sym = MoiSymbol::new(&f, kind).unwrap();
            let m = sym.arity();
            let slots: Vec<Slot> = (0..m).map(|s| Slot::new(&ds[s], 0)).collect();
            let v: Vec<Option<&CMatrix>> = vs[..m - 1].iter().map(Some).collect();
            let a = moi_spectral(&sym, &slots, &v).unwrap();
            let b = moi_fourier(&sym, &slots, &v, 24).unwrap();
            assert!(frobenius_norm(&(&a - &b)) <= 1e-10 * (1.0 + frobenius_norm(&a)), "{kind:?}");
            let bound = moi_norm_bound(&sym).unwrap() * v.iter().map(|x| operator_norm(x.unwrap())).product::<f64>();
            assert!(operator_norm(&a) <= bound * (1.0 + 1e-9), "{kind:?}");
        }
    }

    #[test]
    fn constant_function_has_zero_first_order_bound() {
        let f = ScalarFunction::Trig(TrigSum::new(1, vec![(vec![0.0], C64::from(1.0))]).unwrap());
        let sym = MoiSymbol::new(&f, SymbolKind::First(0)).unwrap();
        assert_eq!(moi_norm_bound(&sym).unwrap(), 0.0);
    }
}
