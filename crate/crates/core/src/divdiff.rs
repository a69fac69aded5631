//! Partial divided differences of first and second order.
//!
//! `point` always carries all `n` coordinates; the active coordinates are
//! replaced by the nodes and the remaining ones act as spectators.

use crate::error::{Error, Result};
use crate::functions::{RationalTerm, ScalarFunction, TrigTerm};
use crate::linalg::{C64, I};

/// Nodes closer than `CONFLUENT_REL * (1 + |a| + |b|)` are treated as equal.
pub const CONFLUENT_REL: f64 = 1e-8;

fn confluent(a: f64, b: f64) -> bool {
    (a - b).abs() <= CONFLUENT_REL * (1.0 + a.abs() + b.abs())
}

pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// `g[a, b]` for `g(x) = exp(i t x)`.
pub(crate) fn exp_dd1(t: f64, a: f64, b: f64) -> C64 {
    if confluent(a, b) {
        let m = 0.5 * (a + b);
        return I * t * (I * t * m).exp();
    }
    (I * t * 0.5 * (a + b)).exp() * I * t * sinc(0.5 * t * (a - b))
}

/// `g[a, b, c]` for `g(x) = exp(i t x)`.
pub(crate) fn exp_dd2(t: f64, a: f64, b: f64, c: f64) -> C64 {
    let mut x = [a, b, c];
    x.sort_by(f64::total_cmp);
    let spread = x[2] - x[0];
    let m = (x[0] + x[1] + x[2]) / 3.0;
    if confluent(x[0], x[2]) {
        return 0.5 * (I * t).powi(2) * (I * t * m).exp();
    }
    if (t * spread).abs() <= 0.5 {
        // Taylor series about the mean: sum_{k>=2} g^(k)(m)/k! h_{k-2}(d).
        let d = [x[0] - m, x[1] - m, x[2] - m];
        let dmax = d[0].abs().max(d[2].abs());
        let mut h2 = 1.0;
        let mut h3 = 1.0;
        let mut pow_a = 1.0;
        let mut it_pow = (I * t).powi(2);
        let mut fact = 2.0;
        let mut sum = it_pow / fact;
        for k in 3..60 {
            pow_a *= d[0];
            h2 = pow_a + d[1] * h2;
            h3 = h2 + d[2] * h3;
            it_pow *= I * t;
            fact *= k as f64;
            sum += it_pow * h3 / fact;
            // |h_{k-2}(d)| <= C(k, 2) dmax^{k-2} bounds the next term.
            let next = t * t * ((k + 1) * k / 2) as f64 * (t.abs() * dmax).powi(k as i32 - 1) / (fact * (k + 1) as f64);
            if next <= 1e-18 * sum.norm() {
                break;
            }
        }
        return (I * t * m).exp() * sum;
    }
    (exp_dd1(t, x[0], x[1]) - exp_dd1(t, x[1], x[2])) / (x[0] - x[2])
}

fn resolvent_dd1(r: &[C64; 2], k: u32) -> C64 {
    let mut s = C64::from(0.0);
    for p0 in 1..=k {
        s += r[0].powi(p0 as i32) * r[1].powi((k + 1 - p0) as i32);
    }
    s
}

fn resolvent_dd2(r: &[C64; 3], k: u32) -> C64 {
    let mut s = C64::from(0.0);
    for p0 in 1..=k {
        for p1 in 1..=(k + 1 - p0) {
            let p2 = k + 2 - p0 - p1;
            s += r[0].powi(p0 as i32) * r[1].powi(p1 as i32) * r[2].powi(p2 as i32);
        }
    }
    s
}

fn trig_spectator(t: &TrigTerm, point: &[f64], skip: &[usize]) -> C64 {
    let phase: f64 = (0..point.len()).filter(|l| !skip.contains(l)).map(|l| t.freq[l] * point[l]).sum();
    t.coeff * (I * phase).exp()
}

fn rational_spectator(t: &RationalTerm, point: &[f64], skip: &[usize]) -> C64 {
    let mut v = t.coeff;
    for l in (0..point.len()).filter(|l| !skip.contains(l)) {
        v *= (t.pole - point[l]).inv().powi(t.powers[l] as i32);
    }
    v
}

fn check(f: &ScalarFunction, idx: &[usize], point: &[f64]) -> Result<()> {
    let n = f.arity();
    if point.len() != n {
        return Err(Error::ArityMismatch { expected: n, found: point.len() });
    }
    for &j in idx {
        if j >= n {
            return Err(Error::IndexOutOfRange { index: j, arity: n });
        }
    }
    Ok(())
}

/// First-order divided difference of `f` in coordinate `j` at nodes `mu`.
pub fn dd1(f: &ScalarFunction, j: usize, mu: [f64; 2], point: &[f64]) -> Result<C64> {
    check(f, &[j], point)?;
    Ok(dd1_unchecked(f, j, mu, point))
}

pub(crate) fn dd1_unchecked(f: &ScalarFunction, j: usize, mu: [f64; 2], point: &[f64]) -> C64 {
    match f {
        ScalarFunction::Trig(s) => {
            s.terms().iter().map(|t| trig_spectator(t, point, &[j]) * exp_dd1(t.freq[j], mu[0], mu[1])).sum()
        }
        ScalarFunction::Rational(s) => s
            .terms()
            .iter()
            .map(|t| {
                let r = [(t.pole - mu[0]).inv(), (t.pole - mu[1]).inv()];
                rational_spectator(t, point, &[j]) * resolvent_dd1(&r, t.powers[j])
            })
            .sum(),
    }
}

/// Second-order divided difference of `f` in coordinate `j` at nodes `mu`.
pub fn dd2_same(f: &ScalarFunction, j: usize, mu: [f64; 3], point: &[f64]) -> Result<C64> {
    check(f, &[j], point)?;
    Ok(dd2_same_unchecked(f, j, mu, point))
}

pub(crate) fn dd2_same_unchecked(f: &ScalarFunction, j: usize, mu: [f64; 3], point: &[f64]) -> C64 {
    match f {
        ScalarFunction::Trig(s) => s
            .terms()
            .iter()
            .map(|t| trig_spectator(t, point, &[j]) * exp_dd2(t.freq[j], mu[0], mu[1], mu[2]))
            .sum(),
        ScalarFunction::Rational(s) => s
            .terms()
            .iter()
            .map(|t| {
                let r = [(t.pole - mu[0]).inv(), (t.pole - mu[1]).inv(), (t.pole - mu[2]).inv()];
                rational_spectator(t, point, &[j]) * resolvent_dd2(&r, t.powers[j])
            })
            .sum(),
    }
}

/// Mixed divided difference: first order in `j` at `mu` and in `k` at `eta`.
/// Symmetric under `(j, mu) <-> (k, eta)` bit for bit.
pub fn dd2_mixed(f: &ScalarFunction, j: usize, k: usize, mu: [f64; 2], eta: [f64; 2], point: &[f64]) -> Result<C64> {
    check(f, &[j, k], point)?;
    if j == k {
        return Err(Error::InvalidFunction("mixed divided difference needs distinct coordinates".into()));
    }
    Ok(dd2_mixed_unchecked(f, j, k, mu, eta, point))
}

pub(crate) fn dd2_mixed_unchecked(
    f: &ScalarFunction,
    j: usize,
    k: usize,
    mu: [f64; 2],
    eta: [f64; 2],
    point: &[f64],
) -> C64 {
    let (j, k, mu, eta) = if j < k { (j, k, mu, eta) } else { (k, j, eta, mu) };
    match f {
        ScalarFunction::Trig(s) => s
            .terms()
            .iter()
            .map(|t| {
                trig_spectator(t, point, &[j, k]) * exp_dd1(t.freq[j], mu[0], mu[1]) * exp_dd1(t.freq[k], eta[0], eta[1])
            })
            .sum(),
        ScalarFunction::Rational(s) => s
            .terms()
            .iter()
            .map(|t| {
                let r = [(t.pole - mu[0]).inv(), (t.pole - mu[1]).inv()];
                let q = [(t.pole - eta[0]).inv(), (t.pole - eta[1]).inv()];
                rational_spectator(t, point, &[j, k]) * resolvent_dd1(&r, t.powers[j]) * resolvent_dd1(&q, t.powers[k])
            })
            .sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{RationalSum, TrigSum};
    use crate::quadrature::{simplex_rule, UnitRule};
    use crate::rng::SplitMix64;

    fn trig1(t: f64) -> ScalarFunction {
        ScalarFunction::Trig(TrigSum::new(1, vec![(vec![t], C64::from(1.0))]).unwrap())
    }

    #[test]
    fn confluent_limit_is_derivative() {
        let f = trig1(1.0);
        let v = dd1(&f, 0, [0.0, 0.0], &[0.0]).unwrap();
        assert!((v - I).norm() < 1e-15);
        let w = dd2_same(&f, 0, [0.3, 0.3, 0.3], &[0.0]).unwrap();
        let expect = -0.5 * (I * 0.3).exp();
        assert!((w - expect).norm() < 1e-15);
    }

    #[test]
    fn near_confluent_is_continuous() {
        let f = trig1(1.7);
        let exact = dd1(&f, 0, [0.4, 0.4], &[0.0]).unwrap();
        let near = dd1(&f, 0, [0.4, 0.4 + 1e-7], &[0.0]).unwrap();
        assert!((exact - near).norm() < 1e-6);
        let e2 = dd2_same(&f, 0, [0.4, 0.4, 0.4], &[0.0]).unwrap();
        let n2 = dd2_same(&f, 0, [0.4, 0.4 + 3e-6, 0.4 - 2e-6], &[0.0]).unwrap();
        assert!((e2 - n2).norm() < 1e-5);
    }

    #[test]
    fn resolvent_first_order() {
        // (1/(z-a) - 1/(z-b)) / (a-b) = 1/((z-a)(z-b)).
        let z = C64::new(0.5, 1.0);
        let f = ScalarFunction::Rational(RationalSum::new(1, vec![(z, vec![1], C64::from(1.0))]).unwrap());
        let v = dd1(&f, 0, [0.2, -0.6], &[0.0]).unwrap();
        assert!((v - ((z - 0.2) * (z + 0.6)).inv()).norm() < 1e-15);
    }

    fn hermite_genocchi_1(f: &ScalarFunction, j: usize, mu: [f64; 2], point: &[f64]) -> C64 {
        let d = f.partial(j).unwrap();
        let rule = UnitRule::gauss_legendre(64);
        let mut x = point.to_vec();
        rule.iter()
            .map(|(u, w)| {
                x[j] = (1.0 - u) * mu[0] + u * mu[1];
                d.eval(&x) * w
            })
            .sum()
    }

    fn hermite_genocchi_2(f: &ScalarFunction, j: usize, mu: [f64; 3], point: &[f64]) -> C64 {
        let d = f.partial(j).unwrap().partial(j).unwrap();
        let mut x = point.to_vec();
        simplex_rule(48)
            .iter()
            .map(|(s, w)| {
                x[j] = (1.0 - s[0] - s[1]) * mu[0] + s[0] * mu[1] + s[1] * mu[2];
                d.eval(&x) * (0.5 * w)
            })
            .sum()
    }

    fn random_pair(rng: &mut SplitMix64) -> (ScalarFunction, ScalarFunction) {
        let t = TrigSum::new(
            2,
            (0..4)
                .map(|_| (vec![rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)], C64::new(rng.normal(), rng.normal())))
                .collect(),
        )
        .unwrap();
        let r = RationalSum::new(
            2,
            (0..3)
                .map(|_| {
                    (
                        C64::new(rng.uniform(-1.0, 1.0), rng.sign() * rng.uniform(0.6, 1.5)),
                        vec![rng.range(1, 3) as u32, rng.range(1, 2) as u32],
                        C64::new(rng.normal(), rng.normal()),
                    )
                })
                .collect(),
        )
        .unwrap();
        (ScalarFunction::Trig(t), ScalarFunction::Rational(r))
    }

    #[test]
    fn matches_hermite_genocchi() {
        let mut rng = SplitMix64::new(5);
        for _ in 0..20 {
            let (t, r) = random_pair(&mut rng);
            let point = [rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)];
            let mu = [rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)];
            for f in [&t, &r] {
                let a = dd1(f, 1, [mu[0], mu[1]], &point).unwrap();
                let b = hermite_genocchi_1(f, 1, [mu[0], mu[1]], &point);
                assert!((a - b).norm() <= 1e-10 * (1.0 + b.norm()), "{a} vs {b}");
                let a = dd2_same(f, 0, mu, &point).unwrap();
                let b = hermite_genocchi_2(f, 0, mu, &point);
                assert!((a - b).norm() <= 1e-10 * (1.0 + b.norm()), "{a} vs {b} {} {mu:?}", f.class_name());
            }
        }
    }

    #[test]
    fn mixed_is_iterated_first_order() {
        let mut rng = SplitMix64::new(8);
        let (t, r) = random_pair(&mut rng);
        for f in [&t, &r] {
            let mu = [0.3, -0.2];
            let eta = [0.7, 0.1];
            let v = dd2_mixed(f, 0, 1, mu, eta, &[0.0, 0.0]).unwrap();
            // [f(mu0, .) - f(mu1, .)]/(mu0 - mu1), then in the second slot.
            let g = |a: f64, b: f64| f.eval(&[a, b]);
            let inner = |b: f64| (g(mu[0], b) - g(mu[1], b)) / (mu[0] - mu[1]);
            let expect = (inner(eta[0]) - inner(eta[1])) / (eta[0] - eta[1]);
            assert!((v - expect).norm() < 1e-12 * (1.0 + expect.norm()));
            let w = dd2_mixed(f, 1, 0, eta, mu, &[0.0, 0.0]).unwrap();
            assert_eq!(v, w);
        }
    }
}
