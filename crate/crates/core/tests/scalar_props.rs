use epsilon_core::scalar::{sqrt_of_prime, CycNumber, FloatScalar, Scalar, ScaledScalar, Q};
use num_complex::Complex64;
use num_rational::Rational64;
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= TOL * a.norm().max(b.norm()).max(1.0)
}

/// A small element of `Q(ζ_N)` as `Σ c_e·ζ_N^e`.
fn element() -> impl Strategy<Value = (u64, Vec<(i64, i64, i64)>)> {
    prop::sample::select(vec![1u64, 2, 3, 4, 5, 6, 8, 9, 12, 15, 20, 25, 27])
        .prop_flat_map(|n| (Just(n), prop::collection::vec((0..n as i64, -4i64..=4, 1i64..=3), 0..5)))
}

fn build((n, terms): &(u64, Vec<(i64, i64, i64)>)) -> (CycNumber, Complex64) {
    let mut x = CycNumber::zero();
    let mut z = Complex64::new(0.0, 0.0);
    for &(e, num, den) in terms {
        let r = Q::new(num as i128, den as i128);
        x = &x + &CycNumber::root_of_unity(e, *n).unwrap().scale(r);
        z += Complex64::from_polar(1.0, std::f64::consts::TAU * e as f64 / *n as f64) * (num as f64 / den as f64);
    }
    (x, z)
}

proptest! {
    #[test]
    fn ring_operations_match_complex_embedding(a in element(), b in element()) {
        let (x, zx) = build(&a);
        let (y, zy) = build(&b);
        prop_assert!(close((&x + &y).to_complex(), zx + zy));
        prop_assert!(close((&x - &y).to_complex(), zx - zy));
        prop_assert!(close((&x * &y).to_complex(), zx * zy));
        prop_assert!(close(x.conjugate().to_complex(), zx.conj()));
        prop_assert!(close((-&x).to_complex(), -zx));
    }

    #[test]
    fn ring_laws_hold_exactly(a in element(), b in element(), c in element()) {
        let (x, _) = build(&a);
        let (y, _) = build(&b);
        let (z, _) = build(&c);
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert_eq!(&x + &y, &y + &x);
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert!((&x - &x).is_zero());
        prop_assert_eq!((&x * &y).conjugate(), &x.conjugate() * &y.conjugate());
    }

    #[test]
    fn representation_is_canonical(a in element(), lift in prop::sample::select(vec![2u64, 3, 5])) {
        // the same number written in a larger cyclotomic field compares equal
        let (x, _) = build(&a);
        let y = x.lift(x.order().max(1) * lift);
        prop_assert_eq!(&x, &y);
        prop_assert!(close(x.to_complex(), y.to_complex()));
    }

    #[test]
    fn float_backend_tracks_exact(a in element(), b in element()) {
        let (x, zx) = build(&a);
        let (y, zy) = build(&b);
        let fx = FloatScalar(zx);
        let fy = FloatScalar(zy);
        prop_assert!(close(fx.mul(&fy).to_complex(), (&x * &y).to_complex()));
        prop_assert!(close(fx.add(&fy).conj().to_complex(), (&x + &y).conjugate().to_complex()));
    }

    #[test]
    fn scaled_products_add_exponents(num in -6i64..=6, den in 1i64..=4, m in -6i64..=6, q in prop::sample::select(vec![3u64, 5, 7])) {
        let a = ScaledScalar::<CycNumber>::q_power(Rational64::new(num, den), q);
        let b = ScaledScalar::<CycNumber>::q_power(Rational64::new(m, 2), q);
        let prod = a.try_mul(&b).unwrap();
        let expected = (q as f64).powf(num as f64 / den as f64 + m as f64 / 2.0);
        prop_assert!(close(prod.to_complex(), Complex64::new(expected, 0.0)));
        prop_assert!(prod.approx_eq(&ScaledScalar::q_power(Rational64::new(num, den) + Rational64::new(m, 2), q), 0.0));
    }
}

#[test]
fn fourth_root_of_unity_is_i() {
    let i = CycNumber::root_of_unity(1, 4).unwrap();
    assert!(close(i.to_complex(), Complex64::new(0.0, 1.0)));
    assert_eq!(&i * &i, CycNumber::from_integer(-1));
}

#[test]
fn fifth_roots_sum_to_zero() {
    let s = (0..5).fold(CycNumber::zero(), |acc, k| &acc + &CycNumber::root_of_unity(k, 5).unwrap());
    assert!(s.is_zero());
    assert_eq!(CycNumber::from_root_counts(5, &[1, 1, 1, 1, 1]), CycNumber::zero());
}

#[test]
fn conjugate_of_one_plus_zeta8() {
    let z = CycNumber::root_of_unity(1, 8).unwrap();
    let x = &CycNumber::one() + &z;
    assert_eq!(x.conjugate(), &CycNumber::one() + &CycNumber::root_of_unity(7, 8).unwrap());
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!(close(x.conjugate().to_complex(), Complex64::new(1.0 + h, -h)));
}

#[test]
fn square_roots_of_primes() {
    for q in [3u64, 7, 11] {
        assert!(sqrt_of_prime(q).is_none(), "q = {q} is 3 mod 4");
    }
    assert!(sqrt_of_prime(9).is_none());
    for q in [5u64, 13, 17, 29] {
        let r = sqrt_of_prime(q).unwrap();
        assert_eq!(&r * &r, CycNumber::from_integer(q as i128), "q = {q}");
        assert!(close(r.to_complex(), Complex64::new((q as f64).sqrt(), 0.0)));
    }
    // √5 = 1 + 2(ζ_5 + ζ_5^4)
    let z = &CycNumber::root_of_unity(1, 5).unwrap() + &CycNumber::root_of_unity(4, 5).unwrap();
    let r5 = &CycNumber::one() + &z.scale(Q::from_integer(2));
    assert_eq!(r5, sqrt_of_prime(5).unwrap());
}

#[test]
fn half_integral_powers_fold_into_the_coefficient() {
    let a = ScaledScalar::<CycNumber>::q_power(Rational64::new(1, 2), 5);
    let sq = a.try_mul(&a).unwrap();
    assert_eq!(sq.coeff(), &CycNumber::from_integer(5));
    assert_eq!(sq.qexp(), Rational64::from_integer(0));
    assert!(close(sq.to_complex(), Complex64::new(5.0, 0.0)));
}
