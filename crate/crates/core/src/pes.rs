//! Diatom–diatom interaction potentials as angular expansions and their
//! matrix elements in the coupled channel basis.
//!
//! The expansion uses the Green normalization
//!
//! V(R, r̂1, r̂2) = Σ v_{λ1λ2λ}(R) A_{λ1λ2λ}(r̂1, r̂2, R̂),
//! A_{λ1λ2λ} = (4π)^{3/2}/√(2λ+1) Σ_{μ1μ2μ} C^{λμ}_{λ1μ1λ2μ2}
//!             Y_{λ1}^{μ1}(r̂1) Y_{λ2}^{μ2}(r̂2) Y_λ^{μ*}(R̂),
//!
//! so A_000 = 1 and the isotropic term is diagonal with unit factor. In the
//! |l j12 J⟩ coupling of [`crate::basis`] the angular factor is the standard
//! space-fixed result (Green, J. Chem. Phys. 62, 2271 (1975)):
//!
//! ⟨l' j12' J|A|l j12 J⟩ = (4π)^{3/2}/√(2λ+1) (−1)^{l+j12'+J}
//!     {J j12' l'; λ l j12} ⟨l'‖Y_λ‖l⟩ ⟨j1'j2'j12'‖[Y_λ1 ⊗ Y_λ2]^λ‖j1j2j12⟩,
//!
//! with the compound reduced element expressed through a 9j symbol. Only
//! rigid-rotor (v-diagonal) couplings are produced.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::angmom::{nine_j, parity_sign, six_j, three_j, triangle};
use crate::basis::ChannelState;
use crate::constants::line_of;
use crate::error::{Error, Result};
use crate::quadrature::CubicSpline;

pub const POTENTIAL_SCHEMA: u32 = 1;

/// Radial coefficient function v(R), R in Å, value in cm⁻¹.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Radial {
    /// 4ε[(σ/R)¹² − (σ/R)⁶]
    LennardJones { epsilon: f64, sigma: f64 },
    /// a·exp(−βR)
    Exponential { a: f64, beta: f64 },
    /// c / Rⁿ
    InversePower { c: f64, n: i32 },
    /// Cubic spline in ln R through the given points; zero outside the grid.
    Table { r: Vec<f64>, v: Vec<f64> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialTerm {
    /// (λ1, λ2, λ)
    pub lambda: [i32; 3],
    pub radial: Radial,
    #[serde(skip)]
    spline: Option<CubicSpline>,
}

impl PartialEq for RadialTerm {
    fn eq(&self, other: &Self) -> bool {
        self.lambda == other.lambda && self.radial == other.radial
    }
}

impl RadialTerm {
    pub fn new(lambda: [i32; 3], radial: Radial) -> Result<Self> {
        let mut t = RadialTerm {
            lambda,
            radial,
            spline: None,
        };
        t.prepare()?;
        Ok(t)
    }

    fn prepare(&mut self) -> Result<()> {
        let [l1, l2, l] = self.lambda;
        if !triangle(l1, l2, l) || (l1 + l2 + l) % 2 != 0 {
            return Err(Error::config(format!(
                "expansion term {:?} must satisfy the triangle rule with λ1+λ2+λ even",
                self.lambda
            )));
        }
        if let Radial::Table { r, v } = &self.radial {
            if r.iter().any(|&x| !(x > 0.0)) {
                return Err(Error::config("tabulated radial grid must be positive"));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::config("tabulated radial values must be finite"));
            }
            let x: Vec<f64> = r.iter().map(|x| x.ln()).collect();
            self.spline = Some(CubicSpline::new(x, v.clone()).ok_or_else(|| {
                Error::config("tabulated radial grid needs ≥ 2 strictly increasing points")
            })?);
        }
        Ok(())
    }

    /// v(R) in cm⁻¹.
    pub fn eval(&self, r: f64) -> f64 {
        match &self.radial {
            Radial::LennardJones { epsilon, sigma } => {
                let s6 = (sigma / r).powi(6);
                4.0 * epsilon * (s6 * s6 - s6)
            }
            Radial::Exponential { a, beta } => a * (-beta * r).exp(),
            Radial::InversePower { c, n } => c / r.powi(*n),
            Radial::Table { .. } => self
                .spline
                .as_ref()
                .and_then(|s| s.eval(r.ln()))
                .unwrap_or(0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialModel {
    pub schema: u32,
    #[serde(default)]
    pub name: String,
    pub symmetric_under_exchange: bool,
    /// Beyond this distance the potential is taken as exactly zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_cutoff: Option<f64>,
    #[serde(rename = "term")]
    pub terms: Vec<RadialTerm>,
}

impl PotentialModel {
    pub fn new(
        name: &str,
        terms: Vec<RadialTerm>,
        symmetric_under_exchange: bool,
        r_cutoff: Option<f64>,
    ) -> Result<Self> {
        let m = PotentialModel {
            schema: POTENTIAL_SCHEMA,
            name: name.to_string(),
            symmetric_under_exchange,
            r_cutoff,
            terms,
        };
        m.validate()?;
        Ok(m)
    }

    /// No interaction at all.
    pub fn zero() -> Self {
        PotentialModel {
            schema: POTENTIAL_SCHEMA,
            name: "zero".into(),
            symmetric_under_exchange: true,
            r_cutoff: None,
            terms: Vec::new(),
        }
    }

    /// The built-in H₂–H₂-like model: an isotropic Lennard-Jones well
    /// (ε = 24 cm⁻¹, σ = 3.03 Å) plus the exchange-symmetric anisotropic
    /// pair (2,0,2)/(0,2,2) with radial 1000·exp(−1.6 R) cm⁻¹.
    pub fn default_h2() -> Self {
        let aniso = Radial::Exponential { a: 1000.0, beta: 1.6 };
        Self::new(
            "default-h2h2",
            vec![
                RadialTerm::new(
                    [0, 0, 0],
                    Radial::LennardJones {
                        epsilon: 24.0,
                        sigma: 3.03,
                    },
                )
                .unwrap(),
                RadialTerm::new([2, 0, 2], aniso.clone()).unwrap(),
                RadialTerm::new([0, 2, 2], aniso).unwrap(),
            ],
            true,
            None,
        )
        .expect("default model is valid")
    }

    /// Isotropic Lennard-Jones only.
    pub fn isotropic_lj(epsilon: f64, sigma: f64) -> Self {
        Self::new(
            "isotropic-lj",
            vec![RadialTerm::new([0, 0, 0], Radial::LennardJones { epsilon, sigma }).unwrap()],
            true,
            None,
        )
        .expect("valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != POTENTIAL_SCHEMA {
            return Err(Error::config(format!(
                "potential schema {} not supported (expected {POTENTIAL_SCHEMA})",
                self.schema
            )));
        }
        if let Some(c) = self.r_cutoff {
            if !(c > 0.0) {
                return Err(Error::config("r_cutoff must be positive"));
            }
        }
        if self.symmetric_under_exchange {
            for t in &self.terms {
                let [l1, l2, l] = t.lambda;
                let partner_sum: Vec<&RadialTerm> = self
                    .terms
                    .iter()
                    .filter(|u| u.lambda == [l2, l1, l])
                    .collect();
                let own_sum: Vec<&RadialTerm> =
                    self.terms.iter().filter(|u| u.lambda == t.lambda).collect();
                let probe = [1.5, 2.5, 3.5, 5.0, 8.0, 12.0];
                let ok = !partner_sum.is_empty()
                    && probe.iter().all(|&r| {
                        let a: f64 = own_sum.iter().map(|u| u.eval(r)).sum();
                        let b: f64 = partner_sum.iter().map(|u| u.eval(r)).sum();
                        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
                    });
                if !ok {
                    return Err(Error::config(format!(
                        "model flagged exchange-symmetric but term {:?} has no equal ({l2},{l1},{l}) partner",
                        t.lambda
                    )));
                }
            }
        }
        Ok(())
    }

    /// Whether every term has even λ1 and λ2 (homonuclear molecules).
    pub fn is_homonuclear(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.lambda[0] % 2 == 0 && t.lambda[1] % 2 == 0)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Parse { line, message, .. } => Error::Parse {
                path: path.to_path_buf(),
                line,
                message,
            },
            other => other,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let mut m: PotentialModel = toml::from_str(text).map_err(|e| Error::Parse {
            path: "<potential>".into(),
            line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
            message: e.message().to_string(),
        })?;
        for t in &mut m.terms {
            t.prepare()?;
        }
        m.validate()?;
        Ok(m)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("potential serializes")
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.to_toml().as_bytes());
        hex::encode(h.finalize())
    }

    /// Radial coefficients at R, zero beyond the cutoff.
    pub fn radial_values(&self, r: f64) -> Vec<f64> {
        if self.r_cutoff.is_some_and(|c| r > c) {
            return vec![0.0; self.terms.len()];
        }
        self.terms.iter().map(|t| t.eval(r)).collect()
    }

    /// Collinear value V(R) with r̂1 = r̂2 = R̂ = ẑ.
    pub fn collinear(&self, r: f64) -> f64 {
        self.radial_values(r)
            .iter()
            .zip(&self.terms)
            .map(|(v, t)| v * collinear_factor(t.lambda))
            .sum()
    }
}

/// A_{λ1λ2λ}(ẑ, ẑ, ẑ) = (4π)^{3/2}/√(2λ+1) C^{λ0}_{λ1 0 λ2 0} Y_λ1^0(0) Y_λ2^0(0) Y_λ^0(0).
pub fn collinear_factor(lambda: [i32; 3]) -> f64 {
    let [l1, l2, l] = lambda;
    let y0 = |k: i32| ((2 * k + 1) as f64 / (4.0 * PI)).sqrt();
    (4.0 * PI).powf(1.5) / ((2 * l + 1) as f64).sqrt()
        * crate::angmom::cg(l1, 0, l2, 0, l, 0)
        * y0(l1)
        * y0(l2)
        * y0(l)
}

/// ⟨l'‖Y_λ‖l⟩ in the Edmonds convention.
fn reduced_y(lp: i32, lam: i32, l: i32) -> f64 {
    parity_sign(lp)
        * (((2 * lp + 1) * (2 * lam + 1) * (2 * l + 1)) as f64 / (4.0 * PI)).sqrt()
        * three_j(lp, lam, l, 0, 0, 0)
}

/// Angular factor multiplying v_{λ1λ2λ}(R) in ⟨bra|V|ket⟩.
pub fn coupling_matrix_element(bra: &ChannelState, ket: &ChannelState, term: &RadialTerm) -> Result<f64> {
    if bra.big_j != ket.big_j {
        return Err(Error::domain(format!(
            "coupling between different total J ({} vs {})",
            bra.big_j, ket.big_j
        )));
    }
    Ok(angular_factor(bra, ket, term.lambda))
}

fn angular_factor(bra: &ChannelState, ket: &ChannelState, lambda: [i32; 3]) -> f64 {
    if bra.v1 != ket.v1 || bra.v2 != ket.v2 {
        return 0.0;
    }
    let [l1, l2, lam] = lambda;
    if (bra.l + lam + ket.l) % 2 != 0
        || (bra.j1 + l1 + ket.j1) % 2 != 0
        || (bra.j2 + l2 + ket.j2) % 2 != 0
    {
        return 0.0;
    }
    let big_j = bra.big_j;
    let sixj = six_j(big_j, bra.j12, bra.l, lam, ket.l, ket.j12);
    if sixj == 0.0 {
        return 0.0;
    }
    let ninej = nine_j([
        bra.j1, ket.j1, l1, bra.j2, ket.j2, l2, bra.j12, ket.j12, lam,
    ]);
    if ninej == 0.0 {
        return 0.0;
    }
    let red_l = reduced_y(bra.l, lam, ket.l);
    let red_12 = (((2 * bra.j12 + 1) * (2 * lam + 1) * (2 * ket.j12 + 1)) as f64).sqrt()
        * ninej
        * reduced_y(bra.j1, l1, ket.j1)
        * reduced_y(bra.j2, l2, ket.j2);
    (4.0 * PI).powf(1.5) / ((2 * lam + 1) as f64).sqrt()
        * parity_sign(ket.l + bra.j12 + big_j)
        * sixj
        * red_l
        * red_12
}

/// Per-term angular coupling matrices for a basis, so that
/// W(R) = Σ_t v_t(R) · A_t.
#[derive(Clone, Debug)]
pub struct CouplingTable {
    pub n: usize,
    pub matrices: Vec<DMatrix<f64>>,
}

impl CouplingTable {
    pub fn new(basis: &[ChannelState], model: &PotentialModel) -> Self {
        let n = basis.len();
        let matrices = model
            .terms
            .iter()
            .map(|t| {
                let mut a = DMatrix::zeros(n, n);
                for i in 0..n {
                    for j in 0..=i {
                        let v = angular_factor(&basis[i], &basis[j], t.lambda);
                        a[(i, j)] = v;
                        a[(j, i)] = v;
                    }
                }
                a
            })
            .collect();
        CouplingTable { n, matrices }
    }

    /// Potential matrix in cm⁻¹ at R.
    pub fn potential(&self, model: &PotentialModel, r: f64) -> DMatrix<f64> {
        let mut w = DMatrix::zeros(self.n, self.n);
        self.potential_into(model, r, &mut w);
        w
    }

    /// Same as [`CouplingTable::potential`], reusing `out`.
    pub fn potential_into(&self, model: &PotentialModel, r: f64, out: &mut DMatrix<f64>) {
        out.fill(0.0);
        for (v, a) in model.radial_values(r).into_iter().zip(&self.matrices) {
            if v != 0.0 {
                *out += a * v;
            }
        }
    }
}

/// W(R)_ij = Σ_t v_t(R) ⟨i|A_t|j⟩ in cm⁻¹.
pub fn potential_matrix(r: f64, basis: &[ChannelState], model: &PotentialModel) -> Result<DMatrix<f64>> {
    if !(r > 0.0) {
        return Err(Error::domain(format!("R must be positive, got {r}")));
    }
    Ok(CouplingTable::new(basis, model).potential(model, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angmom::{cg, ylm};
    use crate::basis::{build_channel_basis, CollisionSpec, MolState};
    use crate::constants::Constants;
    use crate::quadrature::GaussLegendre;
    use num_complex::Complex64;

    fn basis(j_max: i32, big_j: i32) -> Vec<ChannelState> {
        let s = CollisionSpec::h2_h2(
            4.0,
            [MolState::new(2, 0, 0), MolState::new(0, 0, 0)],
            j_max,
            20,
            &Constants::default(),
        );
        build_channel_basis(&s, big_j).unwrap()
    }

    /// ∫ Y_a^{ma*} Y_b^{mb} Y_c^{mc} dΩ by quadrature (GL in cos θ, uniform φ).
    fn gaunt_numeric(a: (i32, i32), b: (i32, i32), c: (i32, i32), conj_c: bool) -> Complex64 {
        thread_local! {
            static MEMO: std::cell::RefCell<std::collections::HashMap<(i32, i32, i32, i32, i32, i32, bool), Complex64>> =
                Default::default();
        }
        let key = (a.0, a.1, b.0, b.1, c.0, c.1, conj_c);
        if let Some(v) = MEMO.with(|m| m.borrow().get(&key).copied()) {
            return v;
        }
        let v = gaunt_quadrature(a, b, c, conj_c);
        MEMO.with(|m| m.borrow_mut().insert(key, v));
        v
    }

    fn gaunt_quadrature(a: (i32, i32), b: (i32, i32), c: (i32, i32), conj_c: bool) -> Complex64 {
        let gl = GaussLegendre::new(24);
        let nphi = 32;
        let mut s = Complex64::new(0.0, 0.0);
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            let th = x.acos();
            for k in 0..nphi {
                let ph = 2.0 * PI * k as f64 / nphi as f64;
                let yc = ylm(c.0, c.1, th, ph);
                let yc = if conj_c { yc.conj() } else { yc };
                s += w * (2.0 * PI / nphi as f64) * ylm(a.0, a.1, th, ph).conj() * ylm(b.0, b.1, th, ph) * yc;
            }
        }
        s
    }

    /// Brute-force ⟨bra|A|ket⟩ at M = 0: expand both coupled states into
    /// uncoupled products and integrate each sphere numerically.
    fn oracle(bra: &ChannelState, ket: &ChannelState, lambda: [i32; 3]) -> f64 {
        let [l1, l2, lam] = lambda;
        let big_m = 0;
        let pref = (4.0 * PI).powf(1.5) / ((2 * lam + 1) as f64).sqrt();
        let mut total = Complex64::new(0.0, 0.0);
        let comps = |c: &ChannelState| {
            let mut v = Vec::new();
            for ml in -c.l..=c.l {
                let m12 = big_m - ml;
                let a = cg(c.l, ml, c.j12, m12, c.big_j, big_m);
                if a == 0.0 {
                    continue;
                }
                for m1 in -c.j1..=c.j1 {
                    let m2 = m12 - m1;
                    let b = cg(c.j1, m1, c.j2, m2, c.j12, m12);
                    if b != 0.0 {
                        v.push((ml, m1, m2, a * b));
                    }
                }
            }
            v
        };
        let cb = comps(bra);
        let ck = comps(ket);
        for &(mlp, m1p, m2p, cp) in &cb {
            for &(ml, m1, m2, c) in &ck {
                for mu1 in -l1..=l1 {
                    for mu2 in -l2..=l2 {
                        let mu = mu1 + mu2;
                        let w = cg(l1, mu1, l2, mu2, lam, mu);
                        if w == 0.0 {
                            continue;
                        }
                        let i1 = gaunt_numeric((bra.j1, m1p), (ket.j1, m1), (l1, mu1), false);
                        let i2 = gaunt_numeric((bra.j2, m2p), (ket.j2, m2), (l2, mu2), false);
                        let ir = gaunt_numeric((bra.l, mlp), (ket.l, ml), (lam, mu), true);
                        total += cp * c * w * i1 * i2 * ir;
                    }
                }
            }
        }
        assert!(total.im.abs() < 1e-10);
        pref * total.re
    }

    #[test]
    fn isotropic_term_is_identity() {
        let b = basis(4, 3);
        let t = RadialTerm::new([0, 0, 0], Radial::Exponential { a: 1.0, beta: 0.0 }).unwrap();
        for x in &b {
            for y in &b {
                let v = coupling_matrix_element(x, y, &t).unwrap();
                let want = if x.key() == y.key() { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn recoupling_matches_quadrature_202_at_j0() {
        let b = basis(2, 0);
        let find = |j1, j2, j12, l| {
            *b.iter()
                .find(|c| c.j1 == j1 && c.j2 == j2 && c.j12 == j12 && c.l == l)
                .unwrap()
        };
        let ket = find(0, 0, 0, 0);
        let bra = find(2, 0, 2, 2);
        let a = angular_factor(&bra, &ket, [2, 0, 2]);
        let o = oracle(&bra, &ket, [2, 0, 2]);
        assert!(a.abs() > 1e-3);
        assert!((a - o).abs() < 1e-10, "{a} {o}");
    }

    #[test]
    fn recoupling_matches_quadrature_all_pairs_small_basis() {
        // all bra/ket pairs with j ≤ 2 at J = 1 and a sample at J = 2 with j ≤ 4
        for (j_max, big_j, stride) in [(2, 1, 1), (4, 2, 7)] {
            let b = basis(j_max, big_j);
            for lambda in [[2, 0, 2], [0, 2, 2], [2, 2, 4], [2, 2, 0]] {
                for (i, x) in b.iter().enumerate().step_by(stride) {
                    for y in b.iter().skip(i % 3).step_by(stride.max(1)) {
                        let a = angular_factor(x, y, lambda);
                        let o = oracle(x, y, lambda);
                        assert!((a - o).abs() < 1e-8, "{} | {} {lambda:?}: {a} vs {o}", x.key(), y.key());
                    }
                }
            }
        }
    }

    #[test]
    fn parity_violating_pairs_vanish() {
        let b = basis(4, 3);
        let t = RadialTerm::new([2, 0, 2], Radial::Exponential { a: 1.0, beta: 0.0 }).unwrap();
        for x in &b {
            for y in &b {
                if (x.l + y.l + 2) % 2 != 0 {
                    assert_eq!(coupling_matrix_element(x, y, &t).unwrap(), 0.0);
                }
            }
        }
    }

    #[test]
    fn j_mismatch_is_domain_error() {
        let a = basis(2, 1)[0];
        let b = basis(2, 2)[0];
        let t = RadialTerm::new([0, 0, 0], Radial::Exponential { a: 1.0, beta: 0.0 }).unwrap();
        assert!(coupling_matrix_element(&a, &b, &t).is_err());
    }

    #[test]
    fn potential_matrix_symmetric_and_exchange_invariant() {
        let model = PotentialModel::default_h2();
        let b = basis(4, 4);
        let idx: std::collections::HashMap<_, _> = b.iter().enumerate().map(|(i, c)| (c.key(), i)).collect();
        for r in [2.0, 3.3, 7.0] {
            let w = potential_matrix(r, &b, &model).unwrap();
            let scale = w.abs().max();
            assert!((&w - w.transpose()).abs().max() <= 1e-12 * scale);
            for (i, x) in b.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    let pi = idx[&x.key().exchanged()];
                    let pj = idx[&y.key().exchanged()];
                    let lhs = w[(pi, pj)] * x.key().exchange_phase() * y.key().exchange_phase();
                    assert!((lhs - w[(i, j)]).abs() <= 1e-12 * scale, "{} {}", x.key(), y.key());
                }
            }
        }
    }

    #[test]
    fn isotropic_matrix_is_uniform_diagonal_and_vanishes_beyond_cutoff() {
        let mut model = PotentialModel::isotropic_lj(24.0, 3.03);
        let b = basis(2, 2);
        let w = potential_matrix(3.5, &b, &model).unwrap();
        let d = w[(0, 0)];
        for i in 0..b.len() {
            for j in 0..b.len() {
                let want = if i == j { d } else { 0.0 };
                assert!((w[(i, j)] - want).abs() < 1e-12);
            }
        }
        model.r_cutoff = Some(50.0);
        assert_eq!(potential_matrix(60.0, &b, &model).unwrap().abs().max(), 0.0);
        assert!(potential_matrix(0.0, &b, &model).is_err());
    }

    #[test]
    fn collinear_factor_values() {
        assert!((collinear_factor([0, 0, 0]) - 1.0).abs() < 1e-14);
        assert!((collinear_factor([2, 0, 2]) - 5f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn file_round_trip_and_table_extrapolation() {
        let r: Vec<f64> = (0..60).map(|i| 1.0 * (1.05f64).powi(i)).collect();
        let v: Vec<f64> = r.iter().map(|x| 100.0 * (-x).exp()).collect();
        let model = PotentialModel::new(
            "tab",
            vec![
                RadialTerm::new([0, 0, 0], Radial::Table { r: r.clone(), v }).unwrap(),
                RadialTerm::new([2, 0, 2], Radial::InversePower { c: -5.0, n: 6 }).unwrap(),
                RadialTerm::new([0, 2, 2], Radial::InversePower { c: -5.0, n: 6 }).unwrap(),
            ],
            true,
            None,
        )
        .unwrap();
        let text = model.to_toml();
        let back = PotentialModel::from_toml(&text).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.hash(), model.hash());
        let t = &back.terms[0];
        assert!((t.eval(3.0) - 100.0 * (-3.0f64).exp()).abs() < 1e-4);
        assert_eq!(t.eval(0.5), 0.0);
        assert_eq!(t.eval(100.0), 0.0);
    }

    #[test]
    fn bad_files_rejected() {
        assert!(PotentialModel::from_toml("schema = 2\nsymmetric_under_exchange = true\nterm = []\n").is_err());
        let asym = "schema = 1\nsymmetric_under_exchange = true\n[[term]]\nlambda = [2, 0, 2]\nradial = { kind = \"exponential\", a = 1.0, beta = 1.0 }\n";
        assert!(PotentialModel::from_toml(asym).is_err());
        let unknown = "schema = 1\nsymmetric_under_exchange = false\nbogus = 3\nterm = []\n";
        let e = PotentialModel::from_toml(unknown).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        let bad_tri = "schema = 1\nsymmetric_under_exchange = false\n[[term]]\nlambda = [2, 0, 4]\nradial = { kind = \"exponential\", a = 1.0, beta = 1.0 }\n";
        assert!(PotentialModel::from_toml(bad_tri).is_err());
    }
}
