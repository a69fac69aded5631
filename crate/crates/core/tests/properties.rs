use num_complex::Complex64 as C64;
use proptest::prelude::*;
use ssmlab::divdiff::{dd1, dd2_mixed, dd2_same};
use ssmlab::functions::{RationalSum, ScalarFunction, TrigSum};
use ssmlab::generators::{gen, random_hermitian, Family, InstanceSpec};
use ssmlab::ideals::{lorentz_norm, PsiFunction, SingularValueSeq};
use ssmlab::io::{from_json, to_json};
use ssmlab::linalg::{frobenius_norm, joint_diagonalize, CommutingTuple, Tolerances};
use ssmlab::rng::SplitMix64;
use ssmlab::ssm::{krein_verify, Atom, AtomicMeasure};

fn trig2(freqs: &[(f64, f64)]) -> ScalarFunction {
    ScalarFunction::Trig(
        TrigSum::new(2, freqs.iter().map(|&(a, b)| (vec![a, b], C64::new(1.0, 0.5 * a))).collect()).unwrap(),
    )
}

fn rational2(re: f64, im: f64) -> ScalarFunction {
    ScalarFunction::Rational(RationalSum::new(2, vec![(C64::new(re, im), vec![2, 1], C64::new(0.5, -1.0))]).unwrap())
}

fn decreasing(mut v: Vec<f64>) -> SingularValueSeq {
    v.sort_by(|a, b| b.total_cmp(a));
    SingularValueSeq::new(v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn first_difference_is_symmetric(a in -3.0..3.0f64, b in -3.0..3.0f64, y in -1.0..1.0f64, w in -2.0..2.0f64) {
        for f in [trig2(&[(w, 0.5), (1.0, -w)]), rational2(w, 1.5)] {
            let p = [0.0, y];
            let x = dd1(&f, 0, [a, b], &p).unwrap();
            let z = dd1(&f, 0, [b, a], &p).unwrap();
            prop_assert!((x - z).norm() <= 1e-13 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn second_difference_is_permutation_invariant(a in -2.0..2.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64) {
        let f = trig2(&[(1.3, 0.2), (-0.7, 1.0)]);
        let p = [0.0, 0.4];
        let x = dd2_same(&f, 0, [a, b, c], &p).unwrap();
        for perm in [[b, a, c], [c, b, a], [a, c, b]] {
            let z = dd2_same(&f, 0, perm, &p).unwrap();
            prop_assert!((x - z).norm() <= 1e-12 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn mixed_difference_is_bit_symmetric(m0 in -2.0..2.0f64, m1 in -2.0..2.0f64, e0 in -2.0..2.0f64, e1 in -2.0..2.0f64) {
        let f = rational2(0.3, -0.9);
        let p = [0.0, 0.0];
        let x = dd2_mixed(&f, 0, 1, [m0, m1], [e0, e1], &p).unwrap();
        let z = dd2_mixed(&f, 1, 0, [e0, e1], [m0, m1], &p).unwrap();
        prop_assert_eq!(x, z);
    }

    #[test]
    fn floats_round_trip_through_json(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let text = to_json(&vec![x]).unwrap();
        let back: Vec<f64> = from_json(&text).unwrap();
        prop_assert_eq!(back[0].to_bits(), x.to_bits());
    }

    #[test]
    fn lorentz_norm_is_a_norm(a in prop::collection::vec(0.0..10.0f64, 1..30), c in 0.0..10.0f64) {
        let psi = PsiFunction::Log1p;
        let len = a.len();
        let b: Vec<f64> = a.iter().rev().map(|x| x * 0.5 + 0.1).collect();
        let (sa, sb) = (decreasing(a.clone()), decreasing(b.clone()));
        // Singular values of a sum of commuting diagonals are majorized by the
        // sum of the sorted sequences.
        let sum = decreasing(sa.values().iter().zip(sb.values()).map(|(x, y)| x + y).collect());
        let na = lorentz_norm(&sa, &psi).unwrap();
        let nb = lorentz_norm(&sb, &psi).unwrap();
        prop_assert!(lorentz_norm(&sum, &psi).unwrap() <= na + nb + 1e-12 * (na + nb));
        let scaled = SingularValueSeq::new(sa.values().iter().map(|x| c * x).collect()).unwrap();
        prop_assert!((lorentz_norm(&scaled, &psi).unwrap() - c * na).abs() <= 1e-12 * (1.0 + c * na));
        prop_assert_eq!(sa.len(), len);
    }

    #[test]
    fn atomic_measures_are_canonical(points in prop::collection::vec((-2.0..2.0f64, -1.0..1.0f64), 0..40)) {
        let atoms: Vec<Atom> = points.iter().map(|&(x, w)| Atom { point: vec![(x * 4.0).round() / 4.0], weight: C64::new(w, 0.0) }).collect();
        let total: C64 = atoms.iter().map(|a| a.weight).sum();
        let m = AtomicMeasure::new(1, atoms).unwrap();
        prop_assert!(m.atoms().windows(2).all(|w| w[0].point[0] < w[1].point[0]));
        let again = AtomicMeasure::new(1, m.atoms().to_vec()).unwrap();
        prop_assert_eq!(&again, &m);
        prop_assert!((m.integrate(|_| C64::from(1.0)) - total).norm() <= 1e-12 * (1.0 + m.total_variation()));
    }

    #[test]
    fn joint_diagonalization_reconstructs(seed in any::<u64>()) {
        let path = gen(&InstanceSpec::new(seed, 6, 3, Family::SharedBasis)).unwrap().hermitian().unwrap();
        let tuple = CommutingTuple::new(path.base().to_vec(), 1e-10).unwrap();
        let d = joint_diagonalize(&tuple, &Tolerances::default()).unwrap();
        for (j, h) in path.base().iter().enumerate() {
            prop_assert!(frobenius_norm(&(d.reconstruct(j) - h.matrix())) <= 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn krein_identity_holds_on_random_instances(seed in any::<u64>(), trig in any::<bool>(), one in any::<bool>()) {
        // Function-of-one paths move eigenvalues much farther relative to the
        // pole distance, so the t-rule needs more nodes there.
        let (family, q) = if one { (Family::FunctionOfOne, 64) } else { (Family::SharedBasis, 16) };
        let path = gen(&InstanceSpec::new(seed, 6, 2, family)).unwrap().hermitian().unwrap();
        let mut rng = SplitMix64::new(seed);
        let f = if trig {
            ssmlab::generators::random_trig(2, 6, &mut rng).unwrap()
        } else {
            ssmlab::generators::random_rational(2, 3, false, &mut rng).unwrap()
        };
        let r = krein_verify(&path, &f, q, 1e-8).unwrap();
        prop_assert!(r.passed(), "{:?}", r);
    }

    #[test]
    fn cayley_round_trip(seed in any::<u64>()) {
        use ssmlab::dissipative::{cayley, inverse_cayley, DissipativeMatrix};
        use ssmlab::linalg::{identity, operator_norm};
        let mut rng = SplitMix64::new(seed);
        let h = random_hermitian(5, &mut rng);
        let g = random_hermitian(5, &mut rng);
        let pos = &g * &g + identity(5) * C64::from(0.1);
        let l = h + pos * C64::new(0.0, 1.0);
        let t = cayley(&DissipativeMatrix::new(l.clone()).unwrap()).unwrap();
        prop_assert!(operator_norm(&t) <= 1.0 + 1e-10);
        let back = inverse_cayley(&t).unwrap();
        prop_assert!(frobenius_norm(&(back - &l)) <= 1e-9 * (1.0 + frobenius_norm(&l)));
    }
}
