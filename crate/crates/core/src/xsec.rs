//! Differential and integral cross sections, the ± averaging identity, the
//! control metric and satellite bookkeeping.
//!
//! Convention: σ(θ) is the φ-integrated differential cross section summed
//! over final projections,
//!
//! σ(θ) = (k'/k) Σ_{m1'm2'} ∫₀^{2π} |f(θ, φ)|² dφ = 2π (k'/k) Σ_{m1'm2'} |f(θ, 0)|²,
//!
//! in Å² per unit cos θ, so that the total is ∫₀^π σ(θ) sin θ dθ over the
//! full angular range with no identical-particle factor of 1/2.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplitude::{
    final_projections, partial_waves_general, partial_waves_outgoing_sym, partial_waves_pair, partial_waves_pm,
    partial_waves_reduced_2020, partial_waves_unsym, PartialWaves, TransitionSpec,
};
use crate::basis::MolState;
use crate::entangle::{decompose_product, Decomposition, PmSign, ProductPrep};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::tmx::TMatrixSet;

pub const DCS_SCHEMA: &str = "pairscat-dcs/1";
pub const DEFAULT_PROFILE_NODES: usize = 721;
pub const DEFAULT_TOTAL_NODES: usize = 64;
/// Relative change under node doubling above which a total is flagged.
pub const TOTAL_CONVERGENCE_TOL: f64 = 1e-3;

/// Final level pair (j1', v1'), (j2', v2').
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FinalChannel {
    pub j1: i32,
    pub v1: i32,
    pub j2: i32,
    pub v2: i32,
}

impl FinalChannel {
    pub fn new(j1: i32, v1: i32, j2: i32, v2: i32) -> Self {
        FinalChannel { j1, v1, j2, v2 }
    }
}

impl fmt::Display for FinalChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}/{}:{}", self.j1, self.v1, self.j2, self.v2)
    }
}

impl FromStr for FinalChannel {
    type Err = Error;

    /// `j1,v1,j2,v2` (also accepts the `j1:v1/j2:v2` display form).
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split([',', ':', '/']).map(str::trim).collect();
        let nums: std::result::Result<Vec<i32>, _> = parts.iter().map(|p| p.parse::<i32>()).collect();
        match nums {
            Ok(v) if v.len() == 4 => Ok(FinalChannel::new(v[0], v[1], v[2], v[3])),
            _ => Err(Error::config(format!("final channel {s:?} is not of the form j1,v1,j2,v2"))),
        }
    }
}

/// Initial pair state built from the two molecular states a and b.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialSpec {
    Plus,
    Minus,
    Entangled { alpha: f64, beta: f64 },
    /// Unentangled, exchange-symmetrized |ab⟩.
    Pair,
}

impl InitialSpec {
    pub fn tag(&self) -> String {
        match self {
            InitialSpec::Plus => "plus".into(),
            InitialSpec::Minus => "minus".into(),
            InitialSpec::Entangled { alpha, beta } => format!("alpha={alpha},beta={beta}"),
            InitialSpec::Pair => "pair".into(),
        }
    }
}

impl FromStr for InitialSpec {
    type Err = Error;

    /// `plus`, `minus`, `pair` or `alpha=<rad>,beta=<rad>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "plus" | "+" => return Ok(InitialSpec::Plus),
            "minus" | "-" => return Ok(InitialSpec::Minus),
            "pair" => return Ok(InitialSpec::Pair),
            _ => {}
        }
        let mut alpha = None;
        let mut beta = None;
        for kv in s.split(',') {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::config(format!("initial state {s:?}: expected key=value")))?;
            let x: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::config(format!("initial state {s:?}: {v:?} is not a number")))?;
            match k.trim() {
                "alpha" => alpha = Some(x),
                "beta" => beta = Some(x),
                other => return Err(Error::config(format!("initial state {s:?}: unknown key {other:?}"))),
            }
        }
        match (alpha, beta) {
            (Some(alpha), Some(beta)) => Ok(InitialSpec::Entangled { alpha, beta }),
            _ => Err(Error::config(format!(
                "initial state {s:?}: use plus, minus, pair or alpha=..,beta=.."
            ))),
        }
    }
}

/// Which amplitude formula supplies f.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Incoming state symmetrized.
    #[default]
    Incoming,
    /// Outgoing state symmetrized.
    Outgoing,
    /// Reduced (4,0) → (2,2) form; ± states only.
    Reduced,
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "incoming" => Ok(Route::Incoming),
            "outgoing" => Ok(Route::Outgoing),
            "reduced" => Ok(Route::Reduced),
            _ => Err(Error::config(format!("unknown route {s:?} (incoming, outgoing, reduced)"))),
        }
    }
}

/// Partial-wave sets for every final projection pair, plus (k, k').
pub struct AmplitudeSet {
    pub waves: Vec<PartialWaves>,
    pub k: f64,
    pub k_prime: f64,
}

impl AmplitudeSet {
    /// σ(θ) at one angle.
    pub fn sigma(&self, theta: f64) -> f64 {
        let s: f64 = self.waves.iter().map(|w| w.eval(theta, 0.0).norm_sqr()).sum();
        2.0 * PI * self.k_prime / self.k * s
    }

    /// σ(θ) with the φ integral done by an n-point periodic trapezoid rule.
    pub fn sigma_numeric_phi(&self, theta: f64, n_phi: usize) -> f64 {
        let h = 2.0 * PI / n_phi as f64;
        let mut s = 0.0;
        for i in 0..n_phi {
            let phi = i as f64 * h;
            s += self.waves.iter().map(|w| w.eval(theta, phi).norm_sqr()).sum::<f64>();
        }
        self.k_prime / self.k * s * h
    }

    /// Total by orthonormality of the spherical harmonics.
    pub fn total_analytic(&self) -> f64 {
        self.k_prime / self.k * self.waves.iter().map(PartialWaves::sphere_integral).sum::<f64>()
    }

    /// Total by Gauss–Legendre quadrature in cos θ.
    pub fn total_quadrature(&self, nodes: usize) -> f64 {
        GaussLegendre::new(nodes).integrate(|x| self.sigma(x.clamp(-1.0, 1.0).acos()))
    }
}

fn transitions(a: MolState, b: MolState, fin: FinalChannel) -> Result<Vec<TransitionSpec>> {
    final_projections(fin.j1, fin.v1, fin.j2, fin.v2)
        .into_iter()
        .map(|f| TransitionSpec::new([a, b], f))
        .collect()
}

fn build(
    set: &TMatrixSet,
    a: MolState,
    b: MolState,
    fin: FinalChannel,
    mut f: impl FnMut(&TransitionSpec) -> Result<PartialWaves>,
) -> Result<AmplitudeSet> {
    let trs = transitions(a, b, fin)?;
    let (k, k_prime) = trs[0].wavenumbers(set)?;
    let waves = trs.iter().map(&mut f).collect::<Result<Vec<_>>>()?;
    Ok(AmplitudeSet { waves, k, k_prime })
}

/// Amplitudes for an initial pair built from a and b.
pub fn amplitude_set(
    set: &TMatrixSet,
    a: MolState,
    b: MolState,
    init: InitialSpec,
    fin: FinalChannel,
    route: Route,
) -> Result<AmplitudeSet> {
    if a == b {
        return Err(Error::domain("the pair states a and b must differ; use satellite_set for |aa⟩"));
    }
    let pm = |s: PmSign| -> Result<AmplitudeSet> {
        match route {
            Route::Incoming => build(set, a, b, fin, |t| partial_waves_pm(set, t, s)),
            Route::Outgoing => build(set, a, b, fin, |t| partial_waves_outgoing_sym(set, t, s)),
            Route::Reduced => build(set, a, b, fin, |t| partial_waves_reduced_2020(set, t, s)),
        }
    };
    let general = |alpha: f64, beta: f64| -> Result<AmplitudeSet> {
        match route {
            Route::Incoming => build(set, a, b, fin, |t| partial_waves_general(set, t, alpha, beta)),
            _ => {
                let p = pm(PmSign::Plus)?;
                let m = pm(PmSign::Minus)?;
                let (cp, cm) = crate::entangle::pm_coefficients(alpha, beta);
                let waves = p
                    .waves
                    .iter()
                    .zip(&m.waves)
                    .map(|(x, y)| PartialWaves::linear_combination(&[(cp, x), (cm, y)]))
                    .collect();
                Ok(AmplitudeSet { waves, k: p.k, k_prime: p.k_prime })
            }
        }
    };
    match init {
        InitialSpec::Plus => pm(PmSign::Plus),
        InitialSpec::Minus => pm(PmSign::Minus),
        InitialSpec::Entangled { alpha, beta } => general(alpha, beta),
        InitialSpec::Pair => match route {
            Route::Incoming => build(set, a, b, fin, |t| partial_waves_pair(set, t)),
            // |ab⟩ = (|+⟩ + |−⟩)/√2
            _ => general(0.0, 0.0),
        },
    }
}

/// Amplitudes of the identical pair |aa⟩; None when the final pair is closed.
pub fn satellite_set(set: &TMatrixSet, a: MolState, fin: FinalChannel) -> Result<Option<AmplitudeSet>> {
    let (_, open) = set
        .pair_wavenumber(fin.j1, fin.v1, fin.j2, fin.v2)
        .ok_or_else(|| Error::domain(format!("final levels {fin} absent from the satellite T-matrix set")))?;
    if !open {
        return Ok(None);
    }
    build(set, a, a, fin, |t| partial_waves_pair(set, t)).map(Some)
}

/// σ(θ) table and totals for one initial state and final channel.
#[derive(Clone, Debug, Serialize)]
pub struct CrossSectionReport {
    pub initial_tag: String,
    pub final_channel: FinalChannel,
    pub e_k: f64,
    pub k: f64,
    pub k_prime: f64,
    pub route: Route,
    pub theta: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Σ|A|² total (Å²).
    pub total_analytic: f64,
    /// Gauss–Legendre total (Å²).
    pub total: f64,
    pub total_nodes: usize,
    /// Doubling the nodes changed the total by less than 0.1 %.
    pub total_converged: bool,
}

/// Uniform θ grid on [0, π].
pub fn theta_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect(),
    }
}

pub struct TotalEstimate {
    pub value: f64,
    pub converged: bool,
}

pub fn total(amps: &AmplitudeSet, nodes: usize) -> TotalEstimate {
    let t1 = amps.total_quadrature(nodes);
    let t2 = amps.total_quadrature(2 * nodes);
    let scale = t2.abs().max(f64::MIN_POSITIVE);
    TotalEstimate { value: t1, converged: t1 == t2 || (t1 - t2).abs() / scale <= TOTAL_CONVERGENCE_TOL }
}

pub fn report(
    amps: &AmplitudeSet,
    set: &TMatrixSet,
    tag: String,
    fin: FinalChannel,
    route: Route,
    theta: &[f64],
    total_nodes: usize,
) -> CrossSectionReport {
    let sigma: Vec<f64> = theta.par_iter().map(|&t| amps.sigma(t)).collect();
    let tot = total(amps, total_nodes);
    CrossSectionReport {
        initial_tag: tag,
        final_channel: fin,
        e_k: set.header.e_k,
        k: amps.k,
        k_prime: amps.k_prime,
        route,
        theta: theta.to_vec(),
        sigma,
        total_analytic: amps.total_analytic(),
        total: tot.value,
        total_nodes,
        total_converged: tot.converged,
    }
}

/// Differential cross section of one initial pair state.
pub fn dcs(
    set: &TMatrixSet,
    a: MolState,
    b: MolState,
    init: InitialSpec,
    fin: FinalChannel,
    route: Route,
    theta: &[f64],
) -> Result<CrossSectionReport> {
    let amps = amplitude_set(set, a, b, init, fin, route)?;
    Ok(report(&amps, set, init.tag(), fin, route, theta, DEFAULT_TOTAL_NODES))
}

/// d_c = |100 (σ⁺ − σ⁻) / σ_ref| in percent.
pub fn control_metric(sigma_plus: f64, sigma_minus: f64, sigma_ref: f64) -> Result<f64> {
    if sigma_ref == 0.0 || !sigma_ref.is_finite() {
        return Err(Error::domain("control metric undefined for a zero reference cross section"));
    }
    Ok((100.0 * (sigma_plus - sigma_minus) / sigma_ref).abs())
}

/// σ⁺, σ⁻ and the unentangled reference with d_c.
#[derive(Clone, Debug, Serialize)]
pub struct PmComparison {
    pub plus: CrossSectionReport,
    pub minus: CrossSectionReport,
    pub reference: CrossSectionReport,
    pub d_c: f64,
}

pub fn compare_pm(
    set: &TMatrixSet,
    a: MolState,
    b: MolState,
    fin: FinalChannel,
    route: Route,
    theta: &[f64],
) -> Result<PmComparison> {
    let plus = dcs(set, a, b, InitialSpec::Plus, fin, route, theta)?;
    let minus = dcs(set, a, b, InitialSpec::Minus, fin, route, theta)?;
    let reference = dcs(set, a, b, InitialSpec::Pair, fin, Route::Incoming, theta)?;
    let d_c = control_metric(plus.total_analytic, minus.total_analytic, reference.total_analytic)?;
    Ok(PmComparison { plus, minus, reference, d_c })
}

/// Deviations in the ± averaging identity for one transition.
///
/// With f the symmetrized unentangled amplitude and g = f̃(ẑ; ba) + f̃(−ẑ; ab)
/// its partner, f± = (f ± g)/√2 so |f₊|² + |f₋|² = |f|² + |g|² at every R̂.
/// Integrated over the sphere g and f give equal totals (g is f seen from
/// the reflected incidence direction), hence ∫|f|² = (∫|f₊|² + ∫|f₋|²)/2.
/// Pointwise in θ the identity holds only in the two-amplitude form.
#[derive(Clone, Debug, Serialize)]
pub struct AveragingReport {
    pub total_pair: f64,
    pub total_partner: f64,
    pub total_plus: f64,
    pub total_minus: f64,
    /// |σ_f − (σ₊ + σ₋)/2| / σ_f on totals from Σ|A|².
    pub total_deviation: f64,
    /// Same with Gauss–Legendre totals.
    pub quadrature_deviation: f64,
    /// max_θ |σ₊ + σ₋ − σ_f − σ_g| / max_θ (σ_f + σ_g).
    pub pointwise_deviation: f64,
}

impl AveragingReport {
    pub fn max_deviation(&self) -> f64 {
        self.total_deviation.max(self.quadrature_deviation).max(self.pointwise_deviation)
    }
}

pub fn averaging_identity_check(
    set: &TMatrixSet,
    a: MolState,
    b: MolState,
    fin: FinalChannel,
    theta: &[f64],
) -> Result<AveragingReport> {
    let f = build(set, a, b, fin, |t| partial_waves_pair(set, t))?;
    let g = build(set, a, b, fin, |t| {
        let one = Complex64::new(1.0, 0.0);
        let x = partial_waves_unsym(set, t, false, true)?;
        let y = partial_waves_unsym(set, t, true, false)?;
        Ok(PartialWaves::linear_combination(&[(one, &x), (one, &y)]))
    })?;
    let p = build(set, a, b, fin, |t| partial_waves_pm(set, t, PmSign::Plus))?;
    let m = build(set, a, b, fin, |t| partial_waves_pm(set, t, PmSign::Minus))?;
    let rel = |x: f64, y: f64| {
        let s = x.abs().max(y.abs());
        if s == 0.0 {
            0.0
        } else {
            (x - y).abs() / s
        }
    };
    let (tf, tg, tp, tm) = (f.total_analytic(), g.total_analytic(), p.total_analytic(), m.total_analytic());
    let q = |s: &AmplitudeSet| s.total_quadrature(DEFAULT_TOTAL_NODES);
    let quadrature_deviation = rel(q(&f), 0.5 * (q(&p) + q(&m)));
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for &t in theta {
        let (sf, sg) = (f.sigma(t), g.sigma(t));
        num = num.max((p.sigma(t) + m.sigma(t) - sf - sg).abs());
        den = den.max(sf + sg);
    }
    Ok(AveragingReport {
        total_pair: tf,
        total_partner: tg,
        total_plus: tp,
        total_minus: tm,
        total_deviation: rel(tf, 0.5 * (tp + tm)),
        quadrature_deviation,
        pointwise_deviation: if den == 0.0 { 0.0 } else { num / den },
    })
}

/// Largest relative difference between the incoming- and
/// outgoing-symmetrized f± over an n_θ × n_φ grid, every final projection
/// and both signs. Differences are scaled by the largest |f| of the
/// incoming route for that sign.
pub fn route_deviation(
    set: &TMatrixSet,
    a: MolState,
    b: MolState,
    fin: FinalChannel,
    n_theta: usize,
    n_phi: usize,
) -> Result<f64> {
    let thetas = theta_grid(n_theta);
    let phis: Vec<f64> = (0..n_phi).map(|i| 2.0 * PI * i as f64 / n_phi as f64).collect();
    let mut worst = 0.0f64;
    for sign in [PmSign::Plus, PmSign::Minus] {
        let x = build(set, a, b, fin, |t| partial_waves_pm(set, t, sign))?;
        let y = build(set, a, b, fin, |t| partial_waves_outgoing_sym(set, t, sign))?;
        let mut scale = 0.0f64;
        let mut diff = 0.0f64;
        for (wx, wy) in x.waves.iter().zip(&y.waves) {
            for &th in &thetas {
                for &ph in &phis {
                    let (fx, fy) = (wx.eval(th, ph), wy.eval(th, ph));
                    scale = scale.max(fx.norm());
                    diff = diff.max((fx - fy).norm());
                }
            }
        }
        if scale > 0.0 {
            worst = worst.max(diff / scale);
        } else if diff > 0.0 {
            worst = f64::INFINITY;
        }
    }
    Ok(worst)
}

/// Parity exclusivity of f±: with every even-l (odd-l) ket removed from the
/// set, f₊ (f₋) must vanish and the other sign must be unchanged. Returns
/// the largest violation relative to the unfiltered Σ|A|² norm.
pub fn parity_exclusivity(set: &TMatrixSet, a: MolState, b: MolState, fin: FinalChannel) -> Result<f64> {
    let pw = |s: &TMatrixSet, sign: PmSign| build(s, a, b, fin, |t| partial_waves_pm(s, t, sign));
    let full_p = pw(set, PmSign::Plus)?;
    let full_m = pw(set, PmSign::Minus)?;
    let norm = |x: &AmplitudeSet| x.waves.iter().map(PartialWaves::sphere_integral).sum::<f64>().sqrt();
    let diff = |x: &AmplitudeSet, y: &AmplitudeSet| {
        x.waves
            .iter()
            .zip(&y.waves)
            .map(|(u, v)| {
                let d = PartialWaves::linear_combination(&[(Complex64::new(1.0, 0.0), u), (Complex64::new(-1.0, 0.0), v)]);
                d.sphere_integral()
            })
            .sum::<f64>()
            .sqrt()
    };
    let scale = norm(&full_p).max(norm(&full_m)).max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for drop_even in [true, false] {
        let mut filtered = set.clone();
        filtered.map_values(|_, _, ket, v| if (ket.l % 2 == 0) == drop_even { Complex64::default() } else { v });
        let p = pw(&filtered, PmSign::Plus)?;
        let m = pw(&filtered, PmSign::Minus)?;
        let (vanish, keep, full) = if drop_even { (&p, &m, &full_m) } else { (&m, &p, &full_p) };
        worst = worst.max(norm(vanish) / scale).max(diff(keep, full) / scale);
    }
    Ok(worst)
}

/// Interior local minima of a sampled profile on the open interval.
///
/// Consecutive samples closer than `flat_tol · max|σ|` are merged so that a
/// flat bottom counts once; the first and last samples are never minima.
pub fn count_minima(sigma: &[f64], flat_tol: f64) -> usize {
    let scale = sigma.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let eps = flat_tol * scale;
    let mut runs: Vec<f64> = Vec::with_capacity(sigma.len());
    for &x in sigma {
        match runs.last() {
            Some(&y) if (x - y).abs() <= eps => {}
            _ => runs.push(x),
        }
    }
    runs.windows(3).filter(|w| w[1] < w[0] && w[1] < w[2]).count()
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SatelliteMode {
    /// Report only the entangled component.
    Drop,
    /// Add satellite cross sections incoherently.
    #[default]
    Incoherent,
}

impl FromStr for SatelliteMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "drop" => Ok(SatelliteMode::Drop),
            "incoherent" => Ok(SatelliteMode::Incoherent),
            _ => Err(Error::config(format!("unknown satellite mode {s:?} (drop, incoherent)"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SatelliteTerm {
    pub label: String,
    pub weight: f64,
    /// Total cross section of the identical pair (Å²); 0 when closed.
    pub total: f64,
    pub closed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SatelliteReport {
    pub decomposition: Decomposition,
    pub mode: SatelliteMode,
    /// y² σ_{α,β} (Å²).
    pub entangled: f64,
    pub satellites: [SatelliteTerm; 2],
    /// Σ weight·σ over satellites divided by the entangled term.
    pub satellite_ratio: f64,
    pub combined: f64,
}

/// Whether the final pair is closed for |cc⟩ at the kinetic energy of `set`.
fn satellite_closed(set: &TMatrixSet, c: MolState, fin: FinalChannel) -> Result<bool> {
    let e = |j, v| {
        set.level_energy(j, v)
            .ok_or_else(|| Error::domain(format!("level j={j} v={v} absent from the level table")))
    };
    let available = set.header.e_k + 2.0 * e(c.j, c.v)?;
    Ok(e(fin.j1, fin.v1)? + e(fin.j2, fin.v2)? > available)
}

/// Cross section of cos α₁|a⟩ + sin α₁ e^{iβ₁}|b⟩ times the same for
/// molecule 2, split into the entangled component and the |aa⟩, |bb⟩
/// satellites. `sat_sets` hold T matrices for |aa⟩ and |bb⟩ at the same
/// kinetic energy; they may be None when that satellite's final pair is closed.
pub fn satellite_accounting(
    set: &TMatrixSet,
    sat_sets: [Option<&TMatrixSet>; 2],
    a: MolState,
    b: MolState,
    prep: &ProductPrep,
    fin: FinalChannel,
    mode: SatelliteMode,
) -> Result<SatelliteReport> {
    let d = decompose_product(prep)?;
    let ent = amplitude_set(set, a, b, InitialSpec::Entangled { alpha: d.alpha, beta: d.beta }, fin, Route::Incoming)?;
    let entangled = d.y * d.y * ent.total_analytic();
    let mut terms = Vec::with_capacity(2);
    for (i, (c, w)) in [(a, d.satellite1.norm_sqr()), (b, d.satellite2.norm_sqr())].into_iter().enumerate() {
        let label = format!("|{c}{c}>");
        let closed = satellite_closed(set, c, fin)?;
        let total = if closed || w == 0.0 || mode == SatelliteMode::Drop {
            0.0
        } else {
            let s = sat_sets[i].ok_or_else(|| {
                Error::domain(format!("satellite {label} is open for {fin} but no T-matrix set was supplied"))
            })?;
            satellite_set(s, c, fin)?.map(|x| x.total_analytic()).unwrap_or(0.0)
        };
        terms.push(SatelliteTerm { label, weight: w, total, closed });
    }
    let sat_sum: f64 = terms.iter().map(|t| t.weight * t.total).sum();
    let satellite_ratio = if entangled > 0.0 { sat_sum / entangled } else { 0.0 };
    let combined = entangled + if mode == SatelliteMode::Incoherent { sat_sum } else { 0.0 };
    let satellites: [SatelliteTerm; 2] = terms.try_into().expect("two satellites");
    Ok(SatelliteReport { decomposition: d, mode, entangled, satellites, satellite_ratio, combined })
}

/// Default pair for the product-state scan: α₁ = α₂ = π/4, β₁ = β, β₂ = 0.
pub fn equal_weight_prep(beta: f64) -> ProductPrep {
    ProductPrep { alpha1: FRAC_PI_4, beta1: beta, alpha2: FRAC_PI_4, beta2: 0.0 }
}

/// 17-significant-digit rendering used by every numeric emitter.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV with columns theta_rad, sigma, initial_tag, final_channel, E_k.
pub fn write_dcs_csv<W: Write>(w: &mut W, reports: &[&CrossSectionReport], timestamp: Option<&str>) -> Result<()> {
    let io = |e| Error::io("<csv output>", e);
    writeln!(w, "# schema: {DCS_SCHEMA}").map_err(io)?;
    if let Some(ts) = timestamp {
        writeln!(w, "# generated: {ts}").map_err(io)?;
    }
    for r in reports {
        writeln!(
            w,
            "# total initial={} final={} analytic={} quadrature={} converged={}",
            r.initial_tag,
            r.final_channel,
            fmt_num(r.total_analytic),
            fmt_num(r.total),
            r.total_converged
        )
        .map_err(io)?;
    }
    writeln!(w, "theta_rad,sigma,initial_tag,final_channel,E_k").map_err(io)?;
    for r in reports {
        for (t, s) in r.theta.iter().zip(&r.sigma) {
            writeln!(w, "{},{},{},{},{}", fmt_num(*t), fmt_num(*s), r.initial_tag, r.final_channel, fmt_num(r.e_k))
                .map_err(io)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angmom::ylm;
    use crate::basis::{ChannelKey, CollisionSpec};
    use crate::constants::Constants;
    use crate::tmx::{synthesize_unitary, Provenance, SynthOptions, TmxHeader};

    fn st(j: i32, m: i32, v: i32) -> MolState {
        MolState::new(j, m, v)
    }

    fn synth(seed: u64, j_max: i32, big_j: i32, sym: bool) -> TMatrixSet {
        let c = Constants::default();
        let spec = CollisionSpec::h2_h2(4.0, [st(2, 0, 0), st(0, 0, 0)], j_max, big_j, &c);
        synthesize_unitary(&spec, seed, SynthOptions { exchange_symmetric: sym, real: false }).unwrap()
    }

    const EL: FinalChannel = FinalChannel { j1: 2, v1: 0, j2: 0, v2: 0 };

    #[test]
    fn zero_t_gives_zero_sigma() {
        let mut set = synth(1, 2, 4, true);
        set.map_values(|_, _, _, _| Complex64::default());
        let r = dcs(&set, st(2, 0, 0), st(0, 0, 0), InitialSpec::Plus, EL, Route::Incoming, &theta_grid(11)).unwrap();
        assert!(r.sigma.iter().all(|&s| s == 0.0));
        assert_eq!(r.total, 0.0);
    }

    #[test]
    fn s_wave_only_is_isotropic() {
        // J = 0 with j1 = j2 = 0 has the single channel (0000 0 0)
        let c = Constants::default();
        let spec = CollisionSpec::h2_h2(4.0, [st(0, 0, 0), st(0, 0, 0)], 0, 0, &c);
        let mut set = TMatrixSet::new(TmxHeader::from_spec(&spec, Provenance::Synthetic, None).unwrap());
        let key = ChannelKey::new(0, 0, 0, 0, 0, 0);
        let t = Complex64::new(0.4, 0.3);
        set.insert(0, key, key, t).unwrap();
        let fin = FinalChannel::new(0, 0, 0, 0);
        let amps = build(&set, st(0, 0, 0), st(0, 0, 0), fin, |tr| partial_waves_unsym(&set, tr, false, false)).unwrap();
        let s0 = amps.sigma(0.0);
        for th in [0.5, 1.5, 3.0] {
            assert!((amps.sigma(th) - s0).abs() < 1e-14 * s0);
        }
        // |f|² = (π/k²)|T|²|Y00|² and σ(θ) = 2π|f|²
        let k = amps.k;
        let want = 2.0 * PI * PI / (k * k) * t.norm_sqr() * ylm(0, 0, 0.0, 0.0).norm_sqr();
        assert!((s0 - want).abs() < 1e-13 * want);
        // total = 2σ for constant σ
        assert!((amps.total_quadrature(16) - 2.0 * s0).abs() < 1e-12 * s0);
        assert!((amps.total_analytic() - 2.0 * s0).abs() < 1e-12 * s0);
    }

    #[test]
    fn averaging_identity_on_synthetic_sets() {
        for seed in 0..5 {
            let set = synth(seed, 2, 5, seed % 2 == 0);
            let r = averaging_identity_check(&set, st(2, 0, 0), st(0, 0, 0), EL, &theta_grid(91)).unwrap();
            assert!(r.max_deviation() < 1e-10, "{r:?}");
            let fin = FinalChannel::new(0, 0, 2, 0);
            let r = averaging_identity_check(&set, st(2, 1, 0), st(0, 0, 0), fin, &theta_grid(91)).unwrap();
            assert!(r.max_deviation() < 1e-10, "{r:?}");
        }
    }

    #[test]
    fn pointwise_plain_average_is_not_an_identity() {
        // σ_f(θ) ≠ (σ₊ + σ₋)/2 pointwise in general; only the reflected form holds
        let set = synth(7, 2, 5, true);
        let (a, b) = (st(2, 0, 0), st(0, 0, 0));
        let f = amplitude_set(&set, a, b, InitialSpec::Pair, EL, Route::Incoming).unwrap();
        let p = amplitude_set(&set, a, b, InitialSpec::Plus, EL, Route::Incoming).unwrap();
        let m = amplitude_set(&set, a, b, InitialSpec::Minus, EL, Route::Incoming).unwrap();
        let dev = (0..50)
            .map(|i| {
                let t = 0.05 + 0.06 * i as f64;
                (f.sigma(t) - 0.5 * (p.sigma(t) + m.sigma(t))).abs() / f.sigma(t).max(1e-30)
            })
            .fold(0.0, f64::max);
        assert!(dev > 1e-6);
    }

    #[test]
    fn totals_agree_between_quadrature_and_orthonormality() {
        let set = synth(3, 2, 6, true);
        let amps = amplitude_set(&set, st(2, 0, 0), st(0, 0, 0), InitialSpec::Minus, EL, Route::Incoming).unwrap();
        let t = total(&amps, 64);
        assert!(t.converged);
        assert!((t.value - amps.total_analytic()).abs() < 1e-10 * t.value);
        let th = 1.234;
        assert!((amps.sigma(th) - amps.sigma_numeric_phi(th, 32)).abs() < 1e-12 * amps.sigma(th));
    }

    #[test]
    fn pair_route_matches_pm_mixture() {
        let set = synth(4, 2, 5, true);
        let (a, b) = (st(2, 0, 0), st(0, 0, 0));
        let x = amplitude_set(&set, a, b, InitialSpec::Pair, EL, Route::Incoming).unwrap();
        let y = amplitude_set(&set, a, b, InitialSpec::Pair, EL, Route::Outgoing).unwrap();
        for th in [0.1, 1.0, 2.5] {
            assert!((x.sigma(th) - y.sigma(th)).abs() < 1e-10 * x.sigma(th));
        }
    }

    #[test]
    fn control_metric_arithmetic() {
        assert!((control_metric(511.0, 346.0, 428.0).unwrap() - 38.551).abs() < 1e-3);
        assert!((control_metric(1014.0, 11.0, 512.5).unwrap() - 195.707).abs() < 1e-3);
        assert_eq!(control_metric(3.0, 3.0, 1.0).unwrap(), 0.0);
        assert!(control_metric(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn minima_counting() {
        let th = theta_grid(721);
        let cos2: Vec<f64> = th.iter().map(|t| t.cos().powi(2)).collect();
        assert_eq!(count_minima(&cos2, 1e-12), 1);
        let p4: Vec<f64> = th.iter().map(|t| (1.0 + (4.0 * t).cos()) + 0.1).collect();
        assert_eq!(count_minima(&p4, 1e-12), 2);
        assert_eq!(count_minima(&[1.0, 1.0, 1.0], 1e-12), 0);
        // flat bottom counts once
        assert_eq!(count_minima(&[3.0, 1.0, 1.0, 1.0, 2.0], 1e-12), 1);
    }

    #[test]
    fn closed_satellites_are_exactly_zero() {
        // (0,0) satellite cannot reach (2,0) below 364.8 cm⁻¹ (6B)
        let c = Constants::default();
        let spec = CollisionSpec::h2_h2(4.0, [st(2, 0, 0), st(0, 0, 0)], 2, 4, &c);
        let set = synthesize_unitary(&spec, 2, SynthOptions { exchange_symmetric: true, real: false }).unwrap();
        let prep = equal_weight_prep(0.0);
        let fin = FinalChannel::new(2, 0, 0, 0);
        // |aa⟩ = (2,0)(2,0) can reach (2,0)(0,0) but without a set it must be reported missing
        assert!(satellite_accounting(&set, [None, None], st(2, 0, 0), st(0, 0, 0), &prep, fin, SatelliteMode::Incoherent)
            .is_err());
        let r = satellite_accounting(&set, [None, None], st(2, 0, 0), st(0, 0, 0), &prep, fin, SatelliteMode::Drop).unwrap();
        assert!(r.satellites[1].closed);
        assert_eq!(r.satellites[1].total, 0.0);
        // β = 0, α = π/4 product: entangled part is σ₊/2
        let p = amplitude_set(&set, st(2, 0, 0), st(0, 0, 0), InitialSpec::Plus, fin, Route::Incoming).unwrap();
        assert!((r.entangled - 0.5 * p.total_analytic()).abs() < 1e-12 * r.entangled);
        assert!((2.0 * 6.0 * c.b_cm1 - 729.6).abs() < 1e-9 && (6.0 * c.b_cm1 - 364.8).abs() < 1e-9);
    }

    #[test]
    fn parse_initial_and_final() {
        assert_eq!("plus".parse::<InitialSpec>().unwrap(), InitialSpec::Plus);
        assert_eq!(
            "alpha=0.5,beta=1".parse::<InitialSpec>().unwrap(),
            InitialSpec::Entangled { alpha: 0.5, beta: 1.0 }
        );
        assert!("alpha=0.5".parse::<InitialSpec>().is_err());
        assert_eq!("2,0,0,0".parse::<FinalChannel>().unwrap(), EL);
        assert_eq!(EL.to_string().parse::<FinalChannel>().unwrap(), EL);
    }

    #[test]
    fn csv_has_schema_and_17_digits() {
        let set = synth(5, 2, 4, true);
        let r = dcs(&set, st(2, 0, 0), st(0, 0, 0), InitialSpec::Plus, EL, Route::Incoming, &theta_grid(3)).unwrap();
        let mut out = Vec::new();
        write_dcs_csv(&mut out, &[&r], None).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert!(s.starts_with("# schema: pairscat-dcs/1\n"));
        let row = s.lines().find(|l| l.starts_with("0.0")).unwrap();
        assert_eq!(row.split(',').next().unwrap().split('e').next().unwrap().len(), 18);
    }
}
