//! Symmetrized scattering amplitudes from T-matrix sets.
//!
//! All amplitudes for a fixed final projection pair (m1', m2') carry a single
//! m' = m1 + m2 − m1' − m2', so each is stored as partial-wave coefficients
//! f(R̂) = Σ_{l'} A_{l'} Y_{l'}^{m'}(R̂) [+ Σ_{l'} B_{l'} Y_{l'}^{m'}(−R̂)].
//! The θ-independent Clebsch–Gordan contractions happen once per transition;
//! grid evaluation is then a short sum.
//!
//! Unsymmetrized amplitude for incoming direction ±ẑ, molecule 1 in a and
//! molecule 2 in b, final molecule 1 in a', molecule 2 in b':
//!
//! f̃ = (i√π/√(kk')) Σ √(2l+1) i^{l−l'} (±1)^l Y_{l'}^{m'}(R̂)
//!       C^{JM}_{l'm' j12'm12'} C^{JM}_{l0 j12 m12} C^{j12'm12'}_{a'b'} C^{j12 m12}_{ab}
//!       T^J(a'b' j12' l' | ab j12 l)
//!
//! with M = m12 = m_a + m_b the only contributing total projection.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::angmom::{cg, parity_sign, ylm};
use crate::basis::{ChannelKey, MolState};
use crate::entangle::{pm_coefficients, PmSign};
use crate::error::{Error, Result};
use crate::tmx::{check_exchange_relation, TMatrixSet};

/// Compensated complex accumulator.
#[derive(Copy, Clone, Debug, Default)]
pub struct KahanSum {
    sum: Complex64,
    comp: Complex64,
}

impl KahanSum {
    pub fn add(&mut self, x: Complex64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> Complex64 {
        self.sum
    }
}

/// Initial pair (molecule 1, molecule 2) and final pair with projections.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct TransitionSpec {
    pub initial: [MolState; 2],
    pub final_states: [MolState; 2],
}

impl TransitionSpec {
    pub fn new(initial: [MolState; 2], final_states: [MolState; 2]) -> Result<Self> {
        for s in initial.iter().chain(final_states.iter()) {
            s.validate()?;
        }
        Ok(TransitionSpec { initial, final_states })
    }

    pub fn m_prime(&self) -> i32 {
        let [a, b] = self.initial;
        let [c, d] = self.final_states;
        a.m + b.m - c.m - d.m
    }

    /// (k, k') from the set's level table; the final pair must be open.
    pub fn wavenumbers(&self, set: &TMatrixSet) -> Result<(f64, f64)> {
        let [a, b] = self.initial;
        let [c, d] = self.final_states;
        let (k, open_i) = set
            .pair_wavenumber(a.j, a.v, b.j, b.v)
            .ok_or_else(|| Error::domain(format!("initial levels {a}, {b} absent from the T-matrix set")))?;
        let (kp, open_f) = set
            .pair_wavenumber(c.j, c.v, d.j, d.v)
            .ok_or_else(|| Error::domain(format!("final levels {c}, {d} absent from the T-matrix set")))?;
        if !open_i || k == 0.0 {
            return Err(Error::domain("initial channel is not open"));
        }
        if !open_f || kp == 0.0 {
            return Err(Error::domain(format!(
                "final channel (j1'={}, v1'={}, j2'={}, v2'={}) is closed",
                c.j, c.v, d.j, d.v
            )));
        }
        Ok((k, kp))
    }

    fn prefactor(&self, set: &TMatrixSet) -> Result<Complex64> {
        let (k, kp) = self.wavenumbers(set)?;
        Ok(Complex64::new(0.0, PI.sqrt() / (k * kp).sqrt()))
    }
}

/// Partial-wave form of one amplitude at fixed (m1', m2').
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PartialWaves {
    pub m_prime: i32,
    /// (l', A_{l'}) multiplying Y_{l'}^{m'}(R̂).
    pub direct: Vec<(i32, Complex64)>,
    /// (l', B_{l'}) multiplying Y_{l'}^{m'}(−R̂).
    pub reflected: Vec<(i32, Complex64)>,
}

impl PartialWaves {
    fn from_maps(m_prime: i32, d: BTreeMap<i32, KahanSum>, r: BTreeMap<i32, KahanSum>) -> Self {
        PartialWaves {
            m_prime,
            direct: d.into_iter().map(|(l, s)| (l, s.value())).collect(),
            reflected: r.into_iter().map(|(l, s)| (l, s.value())).collect(),
        }
    }

    pub fn eval(&self, theta: f64, phi: f64) -> Complex64 {
        let mut acc = KahanSum::default();
        for &(l, a) in &self.direct {
            acc.add(a * ylm(l, self.m_prime, theta, phi));
        }
        for &(l, b) in &self.reflected {
            acc.add(b * ylm(l, self.m_prime, PI - theta, phi + PI));
        }
        acc.value()
    }

    /// Reflected terms folded in with Y(−R̂) = (−1)^{l'} Y(R̂).
    pub fn collapsed(&self) -> Vec<(i32, Complex64)> {
        let mut m: BTreeMap<i32, KahanSum> = BTreeMap::new();
        for &(l, a) in &self.direct {
            m.entry(l).or_default().add(a);
        }
        for &(l, b) in &self.reflected {
            m.entry(l).or_default().add(b * parity_sign(l));
        }
        m.into_iter().map(|(l, s)| (l, s.value())).collect()
    }

    /// ∫|f|² dΩ by orthonormality of the Y_{l'}^{m'}.
    pub fn sphere_integral(&self) -> f64 {
        self.collapsed().iter().map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Coefficient of partial wave l' after folding.
    pub fn coefficient(&self, l: i32) -> Complex64 {
        self.collapsed().into_iter().find(|(x, _)| *x == l).map(|(_, a)| a).unwrap_or_default()
    }

    pub fn linear_combination(terms: &[(Complex64, &PartialWaves)]) -> PartialWaves {
        let m_prime = terms.first().map(|t| t.1.m_prime).unwrap_or(0);
        let mut d: BTreeMap<i32, KahanSum> = BTreeMap::new();
        let mut r: BTreeMap<i32, KahanSum> = BTreeMap::new();
        for (c, pw) in terms {
            debug_assert_eq!(pw.m_prime, m_prime);
            for &(l, a) in &pw.direct {
                d.entry(l).or_default().add(c * a);
            }
            for &(l, b) in &pw.reflected {
                r.entry(l).or_default().add(c * b);
            }
        }
        PartialWaves::from_maps(m_prime, d, r)
    }
}

fn ket_key(a: MolState, b: MolState, j12: i32, l: i32) -> ChannelKey {
    ChannelKey::new(a.j, a.v, b.j, b.v, j12, l)
}

/// T lookup that records absent entries (parity-forbidden pairs are zero).
struct Lookup<'a> {
    set: &'a TMatrixSet,
    missing: Vec<String>,
}

impl<'a> Lookup<'a> {
    fn new(set: &'a TMatrixSet) -> Self {
        Lookup { set, missing: Vec::new() }
    }

    fn t(&mut self, big_j: i32, bra: ChannelKey, ket: ChannelKey) -> Complex64 {
        if bra.parity() != ket.parity() {
            return Complex64::default();
        }
        match self.set.get(big_j, &bra, &ket) {
            Some(v) => v,
            None => {
                self.missing.push(format!("J={big_j} ({bra}|{ket})"));
                Complex64::default()
            }
        }
    }

    fn finish(mut self) -> Result<()> {
        if self.missing.is_empty() {
            Ok(())
        } else {
            self.missing.sort();
            self.missing.dedup();
            Err(Error::MissingEntries(self.missing))
        }
    }
}

/// i^n for integer n.
fn i_pow(n: i32) -> Complex64 {
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Iterates the angular skeleton shared by every route: for each
/// (J, j12, l, j12', l') with nonzero C^{JM}_{l'm' j12'm12'} C^{JM}_{l0 j12 m12},
/// calls `f(J, j12, l, j12', l', weight)` with
/// weight = √(2l+1) i^{l−l'} C^{JM}_{l'm'..} C^{JM}_{l0..}.
/// Angular momenta of the initial (final) pair come from `ji` (`jf`).
fn skeleton(
    set: &TMatrixSet,
    ji: (i32, i32),
    jf: (i32, i32),
    m12: i32,
    m12p: i32,
    mut f: impl FnMut(i32, i32, i32, i32, i32, f64, Complex64),
) {
    let big_m = m12;
    let mp = big_m - m12p;
    for big_j in set.big_js() {
        if big_m.abs() > big_j {
            continue;
        }
        for j12 in (ji.0 - ji.1).abs()..=(ji.0 + ji.1) {
            if m12.abs() > j12 {
                continue;
            }
            for l in (big_j - j12).abs()..=(big_j + j12) {
                let c_in = cg(l, 0, j12, m12, big_j, big_m);
                if c_in == 0.0 {
                    continue;
                }
                for j12p in (jf.0 - jf.1).abs()..=(jf.0 + jf.1) {
                    if m12p.abs() > j12p {
                        continue;
                    }
                    for lp in (big_j - j12p).abs()..=(big_j + j12p) {
                        if mp.abs() > lp {
                            continue;
                        }
                        let c_out = cg(lp, mp, j12p, m12p, big_j, big_m);
                        if c_out == 0.0 {
                            continue;
                        }
                        let w = ((2 * l + 1) as f64).sqrt() * c_in * c_out;
                        f(big_j, j12, l, j12p, lp, w, i_pow(l - lp));
                    }
                }
            }
        }
    }
}

/// Partial waves of f̃ (incoming ±ẑ, optionally exchanged initial labels).
pub fn partial_waves_unsym(
    set: &TMatrixSet,
    tr: &TransitionSpec,
    reversed_z: bool,
    exchanged_initial: bool,
) -> Result<PartialWaves> {
    let pref = tr.prefactor(set)?;
    let [a0, b0] = tr.initial;
    let (a, b) = if exchanged_initial { (b0, a0) } else { (a0, b0) };
    let [ap, bp] = tr.final_states;
    let m12 = a.m + b.m;
    let m12p = ap.m + bp.m;
    let mut look = Lookup::new(set);
    let mut acc: BTreeMap<i32, KahanSum> = BTreeMap::new();
    skeleton(set, (a.j, b.j), (ap.j, bp.j), m12, m12p, |big_j, j12, l, j12p, lp, w, ph| {
        let c_i = cg(a.j, a.m, b.j, b.m, j12, m12);
        let c_f = cg(ap.j, ap.m, bp.j, bp.m, j12p, m12p);
        if c_i == 0.0 || c_f == 0.0 {
            return;
        }
        let t = look.t(big_j, ket_key(ap, bp, j12p, lp), ket_key(a, b, j12, l));
        let dir = if reversed_z { parity_sign(l) } else { 1.0 };
        acc.entry(lp).or_default().add(pref * ph * (w * c_i * c_f * dir) * t);
    });
    look.finish()?;
    Ok(PartialWaves::from_maps(tr.m_prime(), acc, BTreeMap::new()))
}

/// f̃ at one direction.
pub fn amplitude_unsym(
    set: &TMatrixSet,
    tr: &TransitionSpec,
    reversed_z: bool,
    exchanged_initial: bool,
    theta: f64,
    phi: f64,
) -> Result<Complex64> {
    Ok(partial_waves_unsym(set, tr, reversed_z, exchanged_initial)?.eval(theta, phi))
}

/// Incoming-symmetrized amplitude of the unentangled pair:
/// f = f̃(ẑ; a b) + f̃(−ẑ; b a). With a = b this is the satellite amplitude.
pub fn partial_waves_pair(set: &TMatrixSet, tr: &TransitionSpec) -> Result<PartialWaves> {
    let d = partial_waves_unsym(set, tr, false, false)?;
    let x = partial_waves_unsym(set, tr, true, true)?;
    let one = Complex64::new(1.0, 0.0);
    Ok(PartialWaves::linear_combination(&[(one, &d), (one, &x)]))
}

/// f± from the combined incoming-symmetrized form
/// (1/√2) Σ … [1 ± (−1)^l][C_ab T(·|ab) ± C_ba T(·|ba)].
pub fn partial_waves_pm(set: &TMatrixSet, tr: &TransitionSpec, sign: PmSign) -> Result<PartialWaves> {
    let pref = tr.prefactor(set)? * FRAC_1_SQRT_2;
    let s = sign.sign();
    let [a, b] = tr.initial;
    let [ap, bp] = tr.final_states;
    let m12 = a.m + b.m;
    let m12p = ap.m + bp.m;
    let mut look = Lookup::new(set);
    let mut acc: BTreeMap<i32, KahanSum> = BTreeMap::new();
    skeleton(set, (a.j, b.j), (ap.j, bp.j), m12, m12p, |big_j, j12, l, j12p, lp, w, ph| {
        let parity_factor = 1.0 + s * parity_sign(l);
        if parity_factor == 0.0 {
            return;
        }
        let c_f = cg(ap.j, ap.m, bp.j, bp.m, j12p, m12p);
        if c_f == 0.0 {
            return;
        }
        let bra = ket_key(ap, bp, j12p, lp);
        let c_ab = cg(a.j, a.m, b.j, b.m, j12, m12);
        let c_ba = cg(b.j, b.m, a.j, a.m, j12, m12);
        let mut inner = Complex64::default();
        if c_ab != 0.0 {
            inner += c_ab * look.t(big_j, bra, ket_key(a, b, j12, l));
        }
        if c_ba != 0.0 {
            inner += s * c_ba * look.t(big_j, bra, ket_key(b, a, j12, l));
        }
        acc.entry(lp).or_default().add(pref * ph * (w * c_f * parity_factor) * inner);
    });
    look.finish()?;
    Ok(PartialWaves::from_maps(tr.m_prime(), acc, BTreeMap::new()))
}

pub fn amplitude_pm(set: &TMatrixSet, tr: &TransitionSpec, sign: PmSign, theta: f64, phi: f64) -> Result<Complex64> {
    Ok(partial_waves_pm(set, tr, sign)?.eval(theta, phi))
}

/// f_{α,β} = c₊ f₊ + c₋ f₋.
pub fn partial_waves_general(set: &TMatrixSet, tr: &TransitionSpec, alpha: f64, beta: f64) -> Result<PartialWaves> {
    let (cp, cm) = pm_coefficients(alpha, beta);
    let fp = partial_waves_pm(set, tr, PmSign::Plus)?;
    let fm = partial_waves_pm(set, tr, PmSign::Minus)?;
    Ok(PartialWaves::linear_combination(&[(cp, &fp), (cm, &fm)]))
}

pub fn amplitude_general(
    set: &TMatrixSet,
    tr: &TransitionSpec,
    alpha: f64,
    beta: f64,
    theta: f64,
    phi: f64,
) -> Result<Complex64> {
    Ok(partial_waves_general(set, tr, alpha, beta)?.eval(theta, phi))
}

/// f± with the outgoing state symmetrized instead:
/// (1/√2)[f̃(R̂; a'b' ← ab) + f̃(−R̂; b'a' ← ab) ± f̃(R̂; a'b' ← ba) ± f̃(−R̂; b'a' ← ba)],
/// all with incoming direction ẑ. Terms with −R̂ are kept as Y(−R̂).
pub fn partial_waves_outgoing_sym(set: &TMatrixSet, tr: &TransitionSpec, sign: PmSign) -> Result<PartialWaves> {
    let pref = tr.prefactor(set)? * FRAC_1_SQRT_2;
    let s = sign.sign();
    let [a, b] = tr.initial;
    let [ap, bp] = tr.final_states;
    let m12 = a.m + b.m;
    let m12p = ap.m + bp.m;
    let mut look = Lookup::new(set);
    let mut dir: BTreeMap<i32, KahanSum> = BTreeMap::new();
    let mut refl: BTreeMap<i32, KahanSum> = BTreeMap::new();
    skeleton(set, (a.j, b.j), (ap.j, bp.j), m12, m12p, |big_j, j12, l, j12p, lp, w, ph| {
        let c_ab = cg(a.j, a.m, b.j, b.m, j12, m12);
        let c_ba = cg(b.j, b.m, a.j, a.m, j12, m12);
        let c_apbp = cg(ap.j, ap.m, bp.j, bp.m, j12p, m12p);
        let c_bpap = cg(bp.j, bp.m, ap.j, ap.m, j12p, m12p);
        let bra = ket_key(ap, bp, j12p, lp);
        let bra_x = ket_key(bp, ap, j12p, lp);
        let ket = ket_key(a, b, j12, l);
        let ket_x = ket_key(b, a, j12, l);
        let mut d = Complex64::default();
        let mut r = Complex64::default();
        if c_ab != 0.0 {
            if c_apbp != 0.0 {
                d += c_ab * c_apbp * look.t(big_j, bra, ket);
            }
            if c_bpap != 0.0 {
                r += c_ab * c_bpap * look.t(big_j, bra_x, ket);
            }
        }
        if c_ba != 0.0 {
            if c_apbp != 0.0 {
                d += s * c_ba * c_apbp * look.t(big_j, bra, ket_x);
            }
            if c_bpap != 0.0 {
                r += s * c_ba * c_bpap * look.t(big_j, bra_x, ket_x);
            }
        }
        let c = pref * ph * w;
        dir.entry(lp).or_default().add(c * d);
        refl.entry(lp).or_default().add(c * r);
    });
    look.finish()?;
    Ok(PartialWaves::from_maps(tr.m_prime(), dir, refl))
}

pub fn amplitude_outgoing_sym(
    set: &TMatrixSet,
    tr: &TransitionSpec,
    sign: PmSign,
    theta: f64,
    phi: f64,
) -> Result<Complex64> {
    Ok(partial_waves_outgoing_sym(set, tr, sign)?.eval(theta, phi))
}

/// Relative tolerance on the exchange relation required by the reduced form.
pub const REDUCED_FORM_TOLERANCE: f64 = 1e-6;

/// Reduced f± for (j1, j2) = (4, 0), m1 = m2 = 0 → (2, 2), valid when
/// T(2020 j12' l'|4000 4 l) = (−1)^{j12'} T(2020 j12' l'|0040 4 l):
///
/// f± = (1/√2)(i√π/√(kk')) Σ_{J n l j12' m12'} √(2l+1) (−1)^n Y_{l+2n}^{−m12'}(R̂)
///      C^{J0}_{(l+2n)(−m12') j12' m12'} C^{J0}_{l0 40} C^{j12'm12'}_{2m1' 2m2'}
///      C^{40}_{4000} [1 ± (−1)^l] T^J(2020 j12' (l+2n) | 4000 4 l) [1 + (−1)^{l+j12'}]
pub fn partial_waves_reduced_2020(set: &TMatrixSet, tr: &TransitionSpec, sign: PmSign) -> Result<PartialWaves> {
    let [a, b] = tr.initial;
    let [ap, bp] = tr.final_states;
    if !(a.j == 4 && b.j == 0 && a.m == 0 && b.m == 0 && a.v == b.v && ap.j == 2 && bp.j == 2 && ap.v == bp.v) {
        return Err(Error::domain(
            "the reduced form applies to (j1, j2) = (4, 0), m1 = m2 = 0 → (j1', j2') = (2, 2) with equal v",
        ));
    }
    let report = check_exchange_relation(set, Some([(2, ap.v), (2, bp.v)]), Some([(4, a.v), (0, b.v)]))?;
    if report.max_rel_deviation > REDUCED_FORM_TOLERANCE {
        return Err(Error::Invariant(format!(
            "exchange relation violated (max relative deviation {:.3e}); use the full incoming-symmetrized amplitude instead",
            report.max_rel_deviation
        )));
    }
    let pref = tr.prefactor(set)? * FRAC_1_SQRT_2;
    let s = sign.sign();
    let m12p = ap.m + bp.m;
    let mp = -m12p;
    let c40 = cg(4, 0, 0, 0, 4, 0);
    let mut look = Lookup::new(set);
    let mut acc: BTreeMap<i32, KahanSum> = BTreeMap::new();
    for big_j in set.big_js() {
        for l in (big_j - 4).abs()..=(big_j + 4) {
            let pf = 1.0 + s * parity_sign(l);
            if pf == 0.0 {
                continue;
            }
            let c_in = cg(l, 0, 4, 0, big_j, 0);
            if c_in == 0.0 {
                continue;
            }
            for j12p in 0..=4 {
                let sel = 1.0 + parity_sign(l + j12p);
                if sel == 0.0 || m12p.abs() > j12p {
                    continue;
                }
                let c_f = cg(2, ap.m, 2, bp.m, j12p, m12p);
                if c_f == 0.0 {
                    continue;
                }
                // l' = l + 2n ranges over the triangle (l', j12', J) with l' ≡ l (mod 2)
                let lo = (big_j - j12p).abs();
                for lp in (lo..=(big_j + j12p)).filter(|lp| (lp - l) % 2 == 0) {
                    if mp.abs() > lp {
                        continue;
                    }
                    let n = (lp - l) / 2;
                    let c_out = cg(lp, mp, j12p, m12p, big_j, 0);
                    if c_out == 0.0 {
                        continue;
                    }
                    let t = look.t(
                        big_j,
                        ChannelKey::new(2, ap.v, 2, bp.v, j12p, lp),
                        ChannelKey::new(4, a.v, 0, b.v, 4, l),
                    );
                    let w = ((2 * l + 1) as f64).sqrt() * parity_sign(n) * c_out * c_in * c_f * c40 * pf * sel;
                    acc.entry(lp).or_default().add(pref * w * t);
                }
            }
        }
    }
    look.finish()?;
    Ok(PartialWaves::from_maps(mp, acc, BTreeMap::new()))
}

pub fn amplitude_reduced_2020(
    set: &TMatrixSet,
    tr: &TransitionSpec,
    sign: PmSign,
    theta: f64,
    phi: f64,
) -> Result<Complex64> {
    Ok(partial_waves_reduced_2020(set, tr, sign)?.eval(theta, phi))
}

/// Every final projection pair (m1', m2') for a final level pair.
pub fn final_projections(j1: i32, v1: i32, j2: i32, v2: i32) -> Vec<[MolState; 2]> {
    let mut out = Vec::new();
    for m1 in -j1..=j1 {
        for m2 in -j2..=j2 {
            out.push([MolState::new(j1, m1, v1), MolState::new(j2, m2, v2)]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::CollisionSpec;
    use crate::constants::Constants;
    use crate::tmx::{synthesize_unitary, SynthOptions, TmxHeader, Provenance};

    fn st(j: i32, m: i32, v: i32) -> MolState {
        MolState::new(j, m, v)
    }

    fn synth(seed: u64, initial: [MolState; 2], j_max: i32, big_j: i32, e_k: f64, sym: bool) -> TMatrixSet {
        let c = Constants::default();
        let mut spec = CollisionSpec::h2_h2(e_k, initial, j_max, big_j, &c);
        spec.pair_energy_max = Some(1300.0);
        synthesize_unitary(&spec, seed, SynthOptions { exchange_symmetric: sym, real: false }).unwrap()
    }

    fn elastic20() -> TransitionSpec {
        TransitionSpec::new([st(2, 0, 0), st(0, 0, 0)], [st(2, 1, 0), st(0, 0, 0)]).unwrap()
    }

    #[test]
    fn zero_t_gives_zero() {
        let mut set = synth(1, [st(2, 0, 0), st(0, 0, 0)], 2, 4, 4.0, true);
        set.map_values(|_, _, _, _| Complex64::default());
        let tr = elastic20();
        for th in [0.0, 0.7, PI] {
            assert_eq!(amplitude_pm(&set, &tr, PmSign::Plus, th, 0.3).unwrap(), Complex64::default());
            assert_eq!(amplitude_outgoing_sym(&set, &tr, PmSign::Minus, th, 0.3).unwrap(), Complex64::default());
        }
    }

    #[test]
    fn single_element_reduces_to_one_harmonic() {
        // T(2000 2 l'=1 | 2000 2 l=1) at J=2 only; initial (2,0)(0,0), final (2,1)(0,0)
        let c = Constants::default();
        let spec = CollisionSpec::h2_h2(4.0, [st(2, 0, 0), st(0, 0, 0)], 2, 2, &c);
        let mut set = TMatrixSet::new(TmxHeader::from_spec(&spec, Provenance::Synthetic, None).unwrap());
        for l in 0..=4 {
            for lp in (0..=4).filter(|lp| (lp - l) % 2 == 0) {
                let (bra, ket) = (ChannelKey::new(2, 0, 0, 0, 2, lp), ChannelKey::new(2, 0, 0, 0, 2, l));
                for (x, y) in [(bra, ket), (bra.exchanged(), ket.exchanged()), (bra, ket.exchanged()), (bra.exchanged(), ket)] {
                    set.insert(2, x, y, Complex64::default()).unwrap();
                }
            }
        }
        let key = ChannelKey::new(2, 0, 0, 0, 2, 1);
        let t = Complex64::new(0.3, -0.2);
        *set.get_mut(2, &key, &key).unwrap() = t;
        let tr = elastic20();
        let (k, kp) = tr.wavenumbers(&set).unwrap();
        let (th, ph) = (0.9, 0.4);
        let f = amplitude_unsym(&set, &tr, false, false, th, ph).unwrap();
        // m' = −1, M = 0, m12 = 0, m12' = 1
        let coef = Complex64::new(0.0, PI.sqrt() / (k * kp).sqrt())
            * 3f64.sqrt()
            * cg(1, -1, 2, 1, 2, 0)
            * cg(1, 0, 2, 0, 2, 0)
            * cg(2, 1, 0, 0, 2, 1)
            * cg(2, 0, 0, 0, 2, 0)
            * t;
        let want = coef * ylm(1, -1, th, ph);
        assert!((f - want).norm() < 1e-15, "{f} vs {want}");
    }

    #[test]
    fn pm_equals_four_unsym_terms() {
        let set = synth(2, [st(2, 0, 0), st(0, 0, 0)], 2, 5, 4.0, false);
        for tr in [elastic20(), TransitionSpec::new([st(2, 1, 0), st(0, 0, 0)], [st(0, 0, 0), st(2, -1, 0)]).unwrap()] {
            for sign in [PmSign::Plus, PmSign::Minus] {
                for (th, ph) in [(0.3, 0.1), (2.0, 4.0)] {
                    let u = |rz, ex| amplitude_unsym(&set, &tr, rz, ex, th, ph).unwrap();
                    let s = sign.sign();
                    let want = (u(false, false) + u(true, true) + s * u(false, true) + s * u(true, false)) * FRAC_1_SQRT_2;
                    let got = amplitude_pm(&set, &tr, sign, th, ph).unwrap();
                    assert!((got - want).norm() < 1e-13 * want.norm().max(1e-3));
                }
            }
        }
    }

    #[test]
    fn parity_exclusivity_and_single_l_set() {
        let set = synth(3, [st(2, 0, 0), st(0, 0, 0)], 2, 5, 4.0, false);
        let tr = elastic20();
        // f₊ has no odd incoming l, f₋ no even; check by filtering the set
        let mut even_only = set.clone();
        even_only.map_values(|_, _, ket, v| if ket.l % 2 == 0 { v } else { Complex64::default() });
        let mut odd_only = set.clone();
        odd_only.map_values(|_, _, ket, v| if ket.l % 2 == 1 { v } else { Complex64::default() });
        for (th, ph) in [(0.4, 0.0), (1.9, 1.0)] {
            let fp = amplitude_pm(&set, &tr, PmSign::Plus, th, ph).unwrap();
            let fm = amplitude_pm(&set, &tr, PmSign::Minus, th, ph).unwrap();
            assert_eq!(amplitude_pm(&odd_only, &tr, PmSign::Plus, th, ph).unwrap(), Complex64::default());
            assert_eq!(amplitude_pm(&even_only, &tr, PmSign::Minus, th, ph).unwrap(), Complex64::default());
            assert!((amplitude_pm(&even_only, &tr, PmSign::Plus, th, ph).unwrap() - fp).norm() < 1e-14);
            assert!((amplitude_pm(&odd_only, &tr, PmSign::Minus, th, ph).unwrap() - fm).norm() < 1e-14);
        }
    }

    #[test]
    fn minus_sign_with_only_s_waves_vanishes() {
        let mut set = synth(4, [st(2, 0, 0), st(0, 0, 0)], 2, 3, 4.0, true);
        set.map_values(|_, _, ket, v| if ket.l == 0 { v } else { Complex64::default() });
        let tr = elastic20();
        assert_eq!(partial_waves_pm(&set, &tr, PmSign::Minus).unwrap().sphere_integral(), 0.0);
    }

    #[test]
    fn routes_agree_on_exchange_symmetric_sets() {
        for seed in 0..4 {
            let set = synth(seed, [st(4, 0, 0), st(0, 0, 0)], 4, 6, 4.0, true);
            let trs = [
                TransitionSpec::new([st(4, 0, 0), st(0, 0, 0)], [st(2, 1, 0), st(2, -2, 0)]).unwrap(),
                TransitionSpec::new([st(4, 0, 0), st(0, 0, 0)], [st(4, 0, 0), st(0, 0, 0)]).unwrap(),
            ];
            for tr in trs {
                for sign in [PmSign::Plus, PmSign::Minus] {
                    let a = partial_waves_pm(&set, &tr, sign).unwrap();
                    let b = partial_waves_outgoing_sym(&set, &tr, sign).unwrap();
                    let scale = a.sphere_integral().sqrt().max(1e-300);
                    for i in 0..12 {
                        let th = PI * i as f64 / 11.0;
                        let d = (a.eval(th, 0.7) - b.eval(th, 0.7)).norm();
                        assert!(d < 1e-10 * scale, "seed {seed} {sign:?} θ={th}: {d}");
                    }
                }
            }
        }
    }

    #[test]
    fn reduced_form_matches_and_selects_j12_parity() {
        let set = synth(9, [st(4, 0, 0), st(0, 0, 0)], 4, 6, 4.0, true);
        let tr = TransitionSpec::new([st(4, 0, 0), st(0, 0, 0)], [st(2, 1, 0), st(2, -1, 0)]).unwrap();
        for sign in [PmSign::Plus, PmSign::Minus] {
            let a = partial_waves_pm(&set, &tr, sign).unwrap();
            let b = partial_waves_reduced_2020(&set, &tr, sign).unwrap();
            for th in [0.2, 1.1, 2.9] {
                let (x, y) = (a.eval(th, 0.3), b.eval(th, 0.3));
                assert!((x - y).norm() < 1e-10 * x.norm().max(1e-8), "{sign:?}: {x} vs {y}");
            }
        }
        // zero every even-j12' entry: f₊ must vanish
        let mut z = set.clone();
        z.map_values(|_, bra, _, v| if bra.j1 == 2 && bra.j2 == 2 && bra.j12 % 2 == 0 { Complex64::default() } else { v });
        assert_eq!(partial_waves_reduced_2020(&z, &tr, PmSign::Plus).unwrap().sphere_integral(), 0.0);
        assert!(partial_waves_pm(&z, &tr, PmSign::Plus).unwrap().sphere_integral() < 1e-28);
        // a generic set is refused
        let bad = synth(9, [st(4, 0, 0), st(0, 0, 0)], 4, 6, 4.0, false);
        assert!(matches!(partial_waves_reduced_2020(&bad, &tr, PmSign::Plus), Err(Error::Invariant(_))));
    }

    #[test]
    fn missing_entries_are_listed() {
        let c = Constants::default();
        let spec = CollisionSpec::h2_h2(4.0, [st(2, 0, 0), st(0, 0, 0)], 2, 2, &c);
        let mut set = TMatrixSet::new(TmxHeader::from_spec(&spec, Provenance::Ingested, None).unwrap());
        let k = ChannelKey::new(2, 0, 0, 0, 2, 0);
        set.insert(2, k, k, Complex64::new(0.1, 0.0)).unwrap();
        match amplitude_pm(&set, &elastic20(), PmSign::Plus, 1.0, 0.0) {
            Err(Error::MissingEntries(keys)) => assert!(!keys.is_empty()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn closed_final_channel_is_an_error() {
        let set = synth(1, [st(2, 0, 0), st(0, 0, 0)], 2, 2, 4.0, true);
        let tr = TransitionSpec::new([st(2, 0, 0), st(0, 0, 0)], [st(2, 0, 0), st(2, 0, 0)]).unwrap();
        assert!(matches!(amplitude_pm(&set, &tr, PmSign::Plus, 1.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn general_is_linear_in_pm_coefficients() {
        let set = synth(5, [st(2, 0, 0), st(0, 0, 0)], 2, 4, 4.0, true);
        let tr = elastic20();
        let fp = amplitude_pm(&set, &tr, PmSign::Plus, 1.2, 0.5).unwrap();
        let fm = amplitude_pm(&set, &tr, PmSign::Minus, 1.2, 0.5).unwrap();
        assert!((amplitude_general(&set, &tr, PI / 4.0, 0.0, 1.2, 0.5).unwrap() - fp).norm() < 1e-14);
        assert!((amplitude_general(&set, &tr, PI / 4.0, PI, 1.2, 0.5).unwrap() - fm).norm() < 1e-14);
        let (cp, cm) = pm_coefficients(0.3, 1.1);
        let g = amplitude_general(&set, &tr, 0.3, 1.1, 1.2, 0.5).unwrap();
        assert!((g - (cp * fp + cm * fm)).norm() < 1e-14);
    }
}
