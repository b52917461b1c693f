//! Entangled and superposed pair states.
//!
//! |ψ⟩_{α,β} = cos α |a⟩|b⟩ + sin α e^{iβ} |b⟩|a⟩ with a = (j1 m1 v1),
//! b = (j2 m2 v2) and the first ket belonging to molecule 1. The ± states
//! are (α, β) = (π/4, 0) and (π/4, π).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::basis::MolState;
use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct EntangledPairState {
    pub a: MolState,
    pub b: MolState,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum PmSign {
    Plus,
    Minus,
}

impl PmSign {
    pub fn sign(self) -> f64 {
        match self {
            PmSign::Plus => 1.0,
            PmSign::Minus => -1.0,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            PmSign::Plus => "plus",
            PmSign::Minus => "minus",
        }
    }
}

impl EntangledPairState {
    pub fn new(a: MolState, b: MolState, alpha: f64, beta: f64) -> Result<Self> {
        a.validate()?;
        b.validate()?;
        if a == b {
            return Err(Error::domain("entangled pair needs two distinct molecular states"));
        }
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(Error::domain("mixing angles must be finite"));
        }
        Ok(EntangledPairState { a, b, alpha, beta })
    }

    pub fn pm(a: MolState, b: MolState, sign: PmSign) -> Result<Self> {
        let beta = if sign == PmSign::Plus { 0.0 } else { PI };
        Self::new(a, b, FRAC_PI_4, beta)
    }

    /// Coefficients on (|a⟩|b⟩, |b⟩|a⟩).
    pub fn product_coefficients(&self) -> (Complex64, Complex64) {
        (
            Complex64::new(self.alpha.cos(), 0.0),
            Complex64::from_polar(self.alpha.sin(), self.beta),
        )
    }
}

/// (c₊, c₋) with |ψ⟩_{α,β} = c₊|ψ⟩₊ + c₋|ψ⟩₋, c± = (cos α ± sin α e^{iβ})/√2.
pub fn pm_basis_coefficients(state: &EntangledPairState) -> (Complex64, Complex64) {
    pm_coefficients(state.alpha, state.beta)
}

pub fn pm_coefficients(alpha: f64, beta: f64) -> (Complex64, Complex64) {
    let c = Complex64::new(alpha.cos(), 0.0);
    let s = Complex64::from_polar(alpha.sin(), beta);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    ((c + s) * r, (c - s) * r)
}

/// Two single-molecule superpositions cos αᵢ|a⟩ + sin αᵢ e^{iβᵢ}|b⟩.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct ProductPrep {
    pub alpha1: f64,
    pub beta1: f64,
    pub alpha2: f64,
    pub beta2: f64,
}

impl ProductPrep {
    /// Coefficients of |aa⟩, |ab⟩, |ba⟩, |bb⟩ in the direct product.
    pub fn expand(&self) -> [Complex64; 4] {
        let a1 = Complex64::new(self.alpha1.cos(), 0.0);
        let b1 = Complex64::from_polar(self.alpha1.sin(), self.beta1);
        let a2 = Complex64::new(self.alpha2.cos(), 0.0);
        let b2 = Complex64::from_polar(self.alpha2.sin(), self.beta2);
        [a1 * a2, a1 * b2, b1 * a2, b1 * b2]
    }
}

/// |ψ_dp⟩ = y e^{iγ} |ψ⟩_{α,β} + sat₁|aa⟩ + sat₂|bb⟩.
///
/// α is folded into [0, π/2]: a negative sin α₁ cos α₂ adds π to β, a
/// negative cos α₁ sin α₂ adds π to both β and the global phase γ. Without
/// folding γ = β₂ and β = β₁ − β₂.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    pub y: f64,
    pub alpha: f64,
    pub beta: f64,
    pub global_phase: f64,
    pub satellite1: Complex64,
    pub satellite2: Complex64,
}

impl Decomposition {
    pub fn norm(&self) -> f64 {
        self.y * self.y + self.satellite1.norm_sqr() + self.satellite2.norm_sqr()
    }

    /// Coefficients of |aa⟩, |ab⟩, |ba⟩, |bb⟩ rebuilt from the record.
    pub fn reconstruct(&self) -> [Complex64; 4] {
        let g = Complex64::from_polar(self.y, self.global_phase);
        [
            self.satellite1,
            g * self.alpha.cos(),
            g * Complex64::from_polar(self.alpha.sin(), self.beta),
            self.satellite2,
        ]
    }

    /// Weights y²|c±|² of σ₊ and σ₋ in the entangled-component cross section.
    pub fn pm_weights(&self) -> (f64, f64) {
        let (cp, cm) = pm_coefficients(self.alpha, self.beta);
        let y2 = self.y * self.y;
        (y2 * cp.norm_sqr(), y2 * cm.norm_sqr())
    }
}

/// Below this y the product is treated as a pure satellite.
const Y_DEGENERATE: f64 = 1e-12;

pub fn decompose_product(prep: &ProductPrep) -> Result<Decomposition> {
    let (c1, s1) = (prep.alpha1.cos(), prep.alpha1.sin());
    let (c2, s2) = (prep.alpha2.cos(), prep.alpha2.sin());
    let y = (c1 * c1 * s2 * s2 + s1 * s1 * c2 * c2).sqrt();
    if y < Y_DEGENERATE {
        return Err(Error::domain(
            "degenerate decomposition: both molecules share one basis state (y = 0)",
        ));
    }
    let mut beta = prep.beta1 - prep.beta2;
    let mut global = prep.beta2;
    let cos_a = c1 * s2 / y;
    let sin_a = s1 * c2 / y;
    if sin_a < 0.0 {
        beta += PI;
    }
    if cos_a < 0.0 {
        beta += PI;
        global += PI;
    }
    let alpha = cos_a.abs().clamp(0.0, 1.0).acos().min(FRAC_PI_2);
    Ok(Decomposition {
        y,
        alpha,
        beta: wrap(beta),
        global_phase: wrap(global),
        satellite1: Complex64::new(c1 * c2, 0.0),
        satellite2: Complex64::from_polar(s1 * s2, prep.beta1 + prep.beta2),
    })
}

/// Angle in (−π, π].
fn wrap(x: f64) -> f64 {
    let t = x.rem_euclid(2.0 * PI);
    if t > PI {
        t - 2.0 * PI
    } else {
        t
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntanglementCase {
    /// Only the projections m differ.
    CaseA,
    /// Only the vibrational quanta differ.
    CaseB,
    /// Only the rotational quanta j differ.
    CaseC,
    Mixed,
}

pub fn classify_case(state: &EntangledPairState) -> EntanglementCase {
    let (a, b) = (state.a, state.b);
    match (a.j != b.j, a.m != b.m, a.v != b.v) {
        (false, true, false) => EntanglementCase::CaseA,
        (false, false, true) => EntanglementCase::CaseB,
        (true, false, false) => EntanglementCase::CaseC,
        _ => EntanglementCase::Mixed,
    }
}

/// Weights on σ⁺ and σ⁻ for α₁ = α₂ = π/4 and relative phase β:
/// y² = 1/2, α = π/4, so (w₊, w₋) = ((1 + cos β)/4, (1 − cos β)/4).
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct BetaWeights {
    pub plus: f64,
    pub minus: f64,
}

pub fn beta_switch_coefficients(beta: f64) -> BetaWeights {
    let d = decompose_product(&ProductPrep { alpha1: FRAC_PI_4, beta1: beta, alpha2: FRAC_PI_4, beta2: 0.0 })
        .expect("α₁ = α₂ = π/4 is never degenerate");
    let (plus, minus) = d.pm_weights();
    BetaWeights { plus, minus }
}
