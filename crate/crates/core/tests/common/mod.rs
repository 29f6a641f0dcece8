//! Brute-force floating-point oracles, written from the definitions and
//! sharing nothing with the library beyond the choice of generator.
#![allow(dead_code)]

use std::f64::consts::TAU;

use epsilon_core::padic::unit_group;
use num_complex::Complex64;

pub fn modpow(b: u64, mut e: u64, m: u64) -> u64 {
    let (mut r, mut b) = (1u128, b as u128 % m as u128);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m as u128;
        }
        b = b * b % m as u128;
        e >>= 1;
    }
    r as u64
}

pub fn units(p: u64, t: u32) -> Vec<u64> {
    (1..p.pow(t)).filter(|x| x % p != 0).collect()
}

/// Discrete logarithms to the library's generator, by repeated multiplication.
pub fn dlog_table(p: u64, t: u32) -> Vec<Option<u64>> {
    let m = p.pow(t);
    let g = unit_group(p, t).unwrap().generator();
    let phi = m / p * (p - 1);
    let mut table = vec![None; m as usize];
    let mut x = 1u64;
    for j in 0..phi {
        table[x as usize] = Some(j);
        x = x * g % m;
    }
    table
}

/// `χ_k(x)` at level `t`: `χ_k(g^j) = e^{2πi kj/φ(p^t)}`.
pub fn chi(p: u64, t: u32, k: u64, x: u64, logs: &[Option<u64>]) -> Complex64 {
    let m = p.pow(t);
    let phi = m / p * (p - 1);
    match logs[(x % m) as usize] {
        Some(j) => Complex64::from_polar(1.0, TAU * ((k * j) % phi) as f64 / phi as f64),
        None => Complex64::new(0.0, 0.0),
    }
}

/// `ψ(u·p^{-a}) = e^{2πi u/p^a}`.
pub fn psi(u: u64, p: u64, a: u32) -> Complex64 {
    let m = p.pow(a);
    Complex64::from_polar(1.0, TAU * (u % m) as f64 / m as f64)
}

/// `Σ_{x mod p^a} χ(x) ψ(x/p^a)` for `χ` given at level `t ≥ a`.
pub fn gauss(p: u64, t: u32, k: u64, a: u32) -> Complex64 {
    let logs = dlog_table(p, t);
    let m = p.pow(a);
    units(p, t)
        .into_iter()
        .map(|x| chi(p, t, k, x, &logs) * psi(x % m, p, a))
        .sum::<Complex64>()
        / (p.pow(t - a) as f64)
}

/// `Σ ω(x_1) ψ(p^{-t}[x_1 + … + x_{n-1} + y/(x_1⋯x_{n-1})])`.
pub fn kloosterman(p: u64, t: u32, omega_k: u64, n: u32, y: u64) -> Complex64 {
    let m = p.pow(t);
    let phi = m / p * (p - 1);
    let logs = dlog_table(p, t);
    let us = units(p, t);
    let inv = |x: u64| modpow(x, phi - 1, m);
    let mut total = Complex64::new(0.0, 0.0);
    let mut idx = vec![0usize; n as usize - 1];
    loop {
        let xs: Vec<u64> = idx.iter().map(|&i| us[i]).collect();
        let prod = xs.iter().fold(1u64, |a, &x| a * x % m);
        let s = xs.iter().fold(0u64, |a, &x| (a + x) % m);
        let arg = (s + y % m * inv(prod)) % m;
        total += chi(p, t, omega_k, xs[0], &logs) * psi(arg, p, t);
        let mut d = 0;
        loop {
            if d == idx.len() {
                return total;
            }
            idx[d] += 1;
            if idx[d] < us.len() {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

pub fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}
