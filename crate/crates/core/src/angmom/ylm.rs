//! Spherical harmonics via normalized associated Legendre recurrences.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{parity_sign, HalfInt};
use crate::error::{Error, Result};

/// Normalized associated Legendre values P̄_l^m(cos θ) for l = m..=l_max at
/// fixed m ≥ 0, so that Y_l^m(θ, φ) = P̄_l^m(cos θ) e^{imφ}. Includes the
/// Condon–Shortley phase. Entry `i` holds l = m + i.
pub fn legendre_normalized_column(l_max: i32, m: i32, theta: f64) -> Vec<f64> {
    assert!(m >= 0, "column requires m >= 0");
    if l_max < m {
        return Vec::new();
    }
    let (s, x) = theta.sin_cos();
    let s = s.abs();
    // P̄_m^m by the diagonal recurrence
    let mut pmm = 1.0 / (4.0 * PI).sqrt();
    for k in 1..=m {
        let kf = k as f64;
        pmm *= -((2.0 * kf + 1.0) / (2.0 * kf)).sqrt() * s;
    }
    let mut out = Vec::with_capacity((l_max - m + 1) as usize);
    out.push(pmm);
    if l_max == m {
        return out;
    }
    let mf = m as f64;
    let mut p_prev = pmm;
    let mut p_cur = (2.0 * mf + 3.0).sqrt() * x * pmm;
    out.push(p_cur);
    let a = |l: f64| ((4.0 * l * l - 1.0) / (l * l - mf * mf)).sqrt();
    let mut a_prev = a(mf + 1.0);
    for l in (m + 2)..=l_max {
        let lf = l as f64;
        let al = a(lf);
        let p_next = al * (x * p_cur - p_prev / a_prev);
        p_prev = p_cur;
        p_cur = p_next;
        a_prev = al;
        out.push(p_cur);
    }
    out
}

/// Y_l^m(θ, φ) for integer l ≥ 0 and |m| ≤ l. Returns 0 for |m| > l.
pub fn ylm(l: i32, m: i32, theta: f64, phi: f64) -> Complex64 {
    if l < 0 || m.abs() > l {
        return Complex64::new(0.0, 0.0);
    }
    let p = *legendre_normalized_column(l, m.abs(), theta).last().unwrap();
    let y = Complex64::from_polar(p, m.abs() as f64 * phi);
    if m < 0 {
        parity_sign(m) * y.conj()
    } else {
        y
    }
}

/// Spherical harmonic with domain checking.
pub fn spherical_harmonic(l: HalfInt, m: HalfInt, theta: f64, phi: f64) -> Result<Complex64> {
    let (Some(li), Some(mi)) = (l.as_int(), m.as_int()) else {
        return Err(Error::domain("spherical harmonics need integer l and m"));
    };
    if li < 0 || mi.abs() > li {
        return Err(Error::domain(format!("|m| = {} exceeds l = {}", mi.abs(), li)));
    }
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::domain(format!("theta = {theta} outside [0, pi]")));
    }
    Ok(ylm(li, mi, theta, phi))
}
