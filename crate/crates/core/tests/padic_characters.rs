mod common;

use common::{chi, close, dlog_table, modpow, psi, units};
use epsilon_core::characters::{enumerate_chars, v_chi, v_chi_solutions, MultChar, ResidueClass};
use epsilon_core::padic::{
    check_odd_prime, dlog, padic_abs, psi_eval, totient_prime_power, unit_group, AdditiveCharacter, PadicNumber,
};
use epsilon_core::scalar::{CycNumber, Scalar};
use epsilon_core::Error;
use num_complex::Complex64;
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn order_mod(g: u64, m: u64) -> u64 {
    let mut x = g % m;
    let mut k = 1;
    while x != 1 {
        x = x * g % m;
        k += 1;
    }
    k
}

#[test]
fn generators_are_smallest_primitive_roots() {
    assert_eq!(unit_group(3, 1).unwrap().generator(), 2);
    assert_eq!(unit_group(3, 1).unwrap().order(), 2);
    let ug = unit_group(5, 2).unwrap();
    assert_eq!((ug.generator(), ug.order()), (2, 20));
    assert_eq!(order_mod(2, 25), 20);
    let ug = unit_group(7, 2).unwrap();
    assert_eq!(ug.order(), 42);
    for k in [1u64, 2, 3, 6, 7, 14, 21] {
        assert_ne!(modpow(ug.generator(), k, 49), 1, "g^{k} = 1");
    }
    for (p, t) in [(3u64, 1u32), (3, 3), (5, 2), (7, 2), (11, 1), (13, 2)] {
        let m = p.pow(t);
        let phi = totient_prime_power(p, t);
        let g = unit_group(p, t).unwrap().generator();
        let smallest = (2..m).find(|&x| x % p != 0 && order_mod(x, m) == phi).unwrap();
        assert_eq!(g, smallest, "p = {p}, t = {t}");
    }
}

#[test]
fn dlog_examples() {
    let ug = unit_group(5, 2).unwrap();
    assert_eq!(dlog(&ug, 1).unwrap(), 0);
    assert_eq!(dlog(&ug, 4).unwrap(), 2);
    assert_eq!(dlog(&ug, 24).unwrap(), 10);
    assert_eq!(modpow(2, 10, 25), 24);
    assert!(matches!(dlog(&ug, 10), Err(Error::NonUnit { .. })));
}

#[test]
fn dlog_is_an_isomorphism_up_to_343() {
    for (p, t) in [(3u64, 1u32), (3, 2), (3, 3), (3, 4), (3, 5), (5, 1), (5, 2), (5, 3), (7, 1), (7, 2), (7, 3)] {
        let ug = unit_group(p, t).unwrap();
        let m = ug.modulus();
        let phi = ug.order();
        let logs = dlog_table(p, t);
        let us = units(p, t);
        for &x in &us {
            let d = ug.dlog(x).unwrap();
            assert_eq!(Some(d), logs[x as usize]);
            assert_eq!(modpow(ug.generator(), d, m), x);
            for &y in &us {
                assert_eq!(ug.dlog(x * y % m).unwrap(), (d + ug.dlog(y).unwrap()) % phi);
            }
        }
    }
}

#[test]
fn even_or_composite_moduli_are_rejected() {
    for p in [2u64, 4, 9, 15] {
        assert!(check_odd_prime(p).is_err(), "p = {p}");
        assert!(unit_group(p, 1).is_err(), "p = {p}");
    }
}

#[test]
fn psi_examples() {
    let p = 5;
    let x = PadicNumber::new(p, 2, -1, 3).unwrap();
    assert_eq!(psi_eval::<CycNumber>(&x).unwrap(), CycNumber::root_of_unity(2, 5).unwrap());
    let integral = PadicNumber::new(p, 7, 0, 3).unwrap();
    assert_eq!(psi_eval::<CycNumber>(&integral).unwrap(), CycNumber::one());
    for val in -3..=0 {
        for u in units(p, 3) {
            let x = PadicNumber::new(p, u, val, 3).unwrap();
            let prod = psi_eval::<CycNumber>(&x).unwrap().mul(&psi_eval(&x.neg()).unwrap());
            assert_eq!(prod, CycNumber::one());
        }
    }
}

#[test]
fn psi_sums_vanish_on_nontrivial_levels() {
    for (p, t) in [(3u64, 1u32), (3, 3), (5, 2), (7, 1)] {
        let s = (0..p.pow(t)).map(|u| psi(u, p, t)).sum::<Complex64>();
        assert!(s.norm() < TOL);
        // the same through the library, one term per residue
        let mut acc = CycNumber::zero();
        for u in 0..p.pow(t) {
            let term = if u == 0 {
                CycNumber::one()
            } else {
                let v = (0..t).take_while(|i| u % p.pow(i + 1) == 0).count() as i64;
                let x = PadicNumber::new(p, u / p.pow(v as u32), v - t as i64, t).unwrap();
                psi_eval(&x).unwrap()
            };
            acc = &acc + &term;
        }
        assert!(acc.is_zero(), "p = {p}, t = {t}");
    }
}

#[test]
fn twisted_character_conductor_shifts_by_valuation() {
    // n(ψ_a) is the least n with ψ(a·p^{-n}O) ≠ 1 failing, scanned directly
    let p = 5;
    for v in -2i64..=2 {
        let a = PadicNumber::new(p, 3, v, 10).unwrap();
        let psi_a = AdditiveCharacter::twisted(a);
        let trivial_on = |n: i64| {
            (0..p.pow(4)).filter(|u| u % p != 0).all(|u| {
                let x = PadicNumber::new(p, u, n, 10).unwrap();
                psi_a.eval::<CycNumber>(&x).unwrap() == CycNumber::one()
            })
        };
        let n = (-4..=4).find(|&n| trivial_on(n)).unwrap();
        assert!((n..=4).all(trivial_on));
        assert_eq!(n, -v, "v(a) = {v}");
        assert_eq!(psi_a.conductor(), -v);
    }
}

#[test]
fn absolute_value_examples() {
    let check = |x: PadicNumber, e: i64| {
        let a = padic_abs::<CycNumber>(&x);
        assert!(close(a.to_complex(), Complex64::new(5f64.powi(e as i32), 0.0), TOL));
        assert_eq!(a.q(), 5);
    };
    check(PadicNumber::new(5, 1, 1, 3).unwrap(), -1);
    check(PadicNumber::new(5, 4, 0, 3).unwrap(), 0);
    check(PadicNumber::new(5, 3, -2, 3).unwrap(), 2);
}

#[test]
fn character_evaluation_examples() {
    let quad = MultChar::new(5, 2, 10).unwrap();
    let two = PadicNumber::new(5, 2, 0, 2).unwrap();
    assert_eq!(quad.eval::<CycNumber>(&two).unwrap(), CycNumber::from_integer(-1));
    // χ(p^m u) = χ(u)
    let shifted = PadicNumber::new(5, 2, 3, 2).unwrap();
    assert_eq!(quad.eval::<CycNumber>(&shifted).unwrap(), CycNumber::from_integer(-1));
    let triv = MultChar::trivial(5);
    assert_eq!(triv.eval::<CycNumber>(&two).unwrap(), CycNumber::one());
}

#[test]
fn conductor_examples() {
    assert_eq!(MultChar::trivial(5).conductor(), 0);
    assert_eq!(MultChar::new(5, 2, 5).unwrap().conductor(), 1);
    assert_eq!(MultChar::new(5, 2, 1).unwrap().conductor(), 2);
    let c = MultChar::new(5, 1, 2).unwrap();
    assert_eq!(c.induce(2).unwrap().conductor(), 1);
    assert_eq!(c.mul(&c).unwrap().conductor(), 0);
}

/// Smallest `a` with `χ` trivial on `1 + p^a`, scanned over values.
fn conductor_by_scan(p: u64, t: u32, k: u64) -> u32 {
    let logs = dlog_table(p, t);
    let m = p.pow(t);
    (0..=t)
        .find(|&a| {
            let step = p.pow(a);
            (0..m / step.max(1)).all(|i| {
                let x = if a == 0 { i } else { (1 + i * step) % m };
                x % p == 0 || close(chi(p, t, k, x, &logs), Complex64::new(1.0, 0.0), TOL)
            })
        })
        .unwrap()
}

#[test]
fn enumeration_counts() {
    assert_eq!(enumerate_chars(5, 2, None).unwrap().len(), 20);
    assert_eq!(enumerate_chars(5, 2, Some(2)).unwrap().len(), 16);
    assert_eq!(enumerate_chars(5, 2, Some(0)).unwrap(), vec![MultChar::new(5, 2, 0).unwrap()]);
    assert_eq!(enumerate_chars(3, 1, None).unwrap().len(), 2);
    for (p, t) in [(3u64, 4u32), (5, 3), (7, 2)] {
        for a in 1..=t {
            let expected = totient_prime_power(p, a) - totient_prime_power(p, a - 1);
            assert_eq!(enumerate_chars(p, t, Some(a)).unwrap().len() as u64, expected);
        }
    }
}

#[test]
fn conductor_matches_value_scan() {
    for (p, t) in [(3u64, 3u32), (5, 2), (7, 2)] {
        for c in enumerate_chars(p, t, None).unwrap() {
            assert_eq!(c.conductor(), conductor_by_scan(p, t, c.k), "{c}");
        }
    }
}

#[test]
fn evaluation_matches_oracle() {
    for (p, t) in [(3u64, 3u32), (5, 2), (7, 2)] {
        let logs = dlog_table(p, t);
        for c in enumerate_chars(p, t, None).unwrap() {
            for x in units(p, t) {
                let v = c.eval_unit::<CycNumber>(x).unwrap();
                assert!(close(v.to_complex(), chi(p, t, c.k, x, &logs), TOL));
            }
        }
    }
}

#[test]
fn orthogonality_up_to_343() {
    for (p, t) in [(3u64, 2u32), (3, 4), (5, 2), (5, 3), (7, 3)] {
        let chars = enumerate_chars(p, t, None).unwrap();
        let phi = chars.len() as i128;
        for u in units(p, t) {
            let s = chars
                .iter()
                .fold(CycNumber::zero(), |acc, c| &acc + &c.eval_unit::<CycNumber>(u).unwrap());
            let expected = if u == 1 { phi } else { 0 };
            assert_eq!(s, CycNumber::from_integer(expected), "p = {p}, t = {t}, u = {u}");
        }
    }
}

#[test]
fn v_chi_conductor_one_is_vacuous() {
    let psi = AdditiveCharacter::standard(5).unwrap();
    for c in enumerate_chars(5, 1, Some(1)).unwrap() {
        assert_eq!(v_chi(&c, &psi).unwrap(), ResidueClass::vacuous(5));
    }
    assert!(matches!(v_chi(&MultChar::trivial(5), &psi), Err(Error::Unramified)));
}

/// Every `v mod p^{⌊a/2⌋}` with `χ(1 + u p^{⌈a/2⌉}) = e(u v b_0 / p^{⌊a/2⌋})`,
/// written against the float oracle. `b_0` is the unit of the twist.
fn v_chi_oracle(p: u64, t: u32, k: u64, a: u32, b0: u64) -> Vec<u64> {
    let logs = dlog_table(p, t);
    let (fl, ce) = (a / 2, a - a / 2);
    let m = p.pow(fl);
    let pt = p.pow(t);
    (1..m)
        .filter(|v| v % p != 0)
        .filter(|v| {
            (0..m).all(|u| {
                let x = (1 + u * p.pow(ce)) % pt;
                close(chi(p, t, k, x, &logs), psi(u * v % m * (b0 % m) % m, p, fl), TOL)
            })
        })
        .collect()
}

#[test]
fn v_chi_matches_oracle_and_is_unique() {
    for (p, t) in [(3u64, 4u32), (5, 2), (5, 3), (7, 2)] {
        let psi = AdditiveCharacter::standard(p).unwrap();
        for c in enumerate_chars(p, t, None).unwrap() {
            let a = c.conductor();
            if a < 2 {
                continue;
            }
            let oracle = v_chi_oracle(p, t, c.k, a, 1);
            assert_eq!(oracle.len(), 1, "{c}");
            assert_eq!(v_chi_solutions(&c, &psi).unwrap(), oracle);
            let class = v_chi(&c, &psi).unwrap();
            assert_eq!((class.m, class.rep), (a / 2, oracle[0]));
        }
    }
}

#[test]
fn v_chi_example_p5() {
    // χ(2) = ζ_20 at level 2
    let c = MultChar::new(5, 2, 1).unwrap();
    let psi = AdditiveCharacter::standard(5).unwrap();
    let sols = v_chi_solutions(&c, &psi).unwrap();
    assert_eq!(sols.len(), 1);
    assert!((1..5).contains(&sols[0]));
}

#[test]
fn v_chi_rescales_under_twist() {
    // ψ_b(x) = ψ(bx) with b a unit replaces v_χ by v_χ/b
    let p = 5;
    for c in enumerate_chars(p, 3, Some(3)).unwrap().into_iter().step_by(7) {
        let base = v_chi(&c, &AdditiveCharacter::standard(p).unwrap()).unwrap();
        for b0 in [2u64, 3, 4] {
            let twisted = AdditiveCharacter::twisted(PadicNumber::new(p, b0, 0, 3).unwrap());
            let cls = v_chi(&c, &twisted).unwrap();
            assert_eq!(cls.rep * b0 % p, base.rep % p, "{c} b = {b0}");
            assert_eq!(vec![cls.rep], v_chi_oracle(p, 3, c.k, 3, b0));
        }
    }
}

#[test]
fn algebra_examples() {
    let c = MultChar::new(7, 2, 5).unwrap();
    assert!(c.mul(&c.inverse()).unwrap().is_trivial());
    let quad = MultChar::new(5, 1, 2).unwrap();
    assert!(quad.pow(2).is_trivial());
    assert!(MultChar::new(5, 1, 1).unwrap().mul(&MultChar::new(7, 1, 1).unwrap()).is_err());
}

fn char_strategy() -> impl Strategy<Value = (u64, u32, u64, u64)> {
    prop::sample::select(vec![(3u64, 4u32), (5, 3), (7, 2)]).prop_flat_map(|(p, t)| {
        let phi = totient_prime_power(p, t);
        (Just(p), Just(t), 0..phi, 0..phi)
    })
}

proptest! {
    #[test]
    fn evaluation_is_independent_of_level((p, t, k, _) in char_strategy(), x in 1u64..2000) {
        prop_assume!(x % p != 0);
        let c = MultChar::new(p, t, k).unwrap();
        let x = PadicNumber::new(p, x % p.pow(t + 1), 0, t + 1).unwrap();
        let hi = c.induce(t + 1).unwrap();
        prop_assert_eq!(hi.conductor(), c.conductor());
        prop_assert_eq!(c.eval::<CycNumber>(&x).unwrap(), hi.eval::<CycNumber>(&x).unwrap());
        prop_assert_eq!(c.primitive().eval::<CycNumber>(&x).unwrap(), c.eval::<CycNumber>(&x).unwrap());
    }

    #[test]
    fn characters_are_multiplicative((p, t, k, j) in char_strategy(), x in 1u64..1000, y in 1u64..1000) {
        prop_assume!(x % p != 0 && y % p != 0);
        let m = p.pow(t);
        let c = MultChar::new(p, t, k).unwrap();
        let d = MultChar::new(p, t, j).unwrap();
        let cx: CycNumber = c.eval_unit(x % m).unwrap();
        let cy: CycNumber = c.eval_unit(y % m).unwrap();
        prop_assert_eq!(c.eval_unit::<CycNumber>(x * y % m).unwrap(), cx.mul(&cy));
        let cd: CycNumber = c.mul(&d).unwrap().eval_unit(x % m).unwrap();
        prop_assert_eq!(cd, cx.mul(&d.eval_unit(x % m).unwrap()));
        prop_assert_eq!(c.inverse().eval_unit::<CycNumber>(x % m).unwrap(), cx.conj());
        prop_assert_eq!(c.sign() as i128, {
            let s: CycNumber = c.eval_unit(m - 1).unwrap();
            s.as_rational().unwrap().to_integer()
        });
    }

    #[test]
    fn padic_multiplication_adds_valuations(p in prop::sample::select(vec![3u64, 5, 7]), u in 1u64..300, w in 1u64..300, a in -4i64..4, b in -4i64..4) {
        prop_assume!(u % p != 0 && w % p != 0);
        let x = PadicNumber::new(p, u % p.pow(4), a, 4).unwrap();
        let y = PadicNumber::new(p, w % p.pow(4), b, 4).unwrap();
        let xy = x.mul(&y);
        prop_assert_eq!(xy.valuation(), a + b);
        prop_assert_eq!(xy.unit_mod(4).unwrap(), u * w % p.pow(4));
        prop_assert_eq!(x.mul(&x.inv()).unit_mod(4).unwrap(), 1);
        let abs = padic_abs::<CycNumber>(&xy);
        let expected = (p as f64).powi(-(a + b) as i32);
        prop_assert!(close(abs.to_complex(), Complex64::new(expected, 0.0), TOL));
    }
}
