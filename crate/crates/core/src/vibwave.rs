//! Frozen-rotation collinear model of vibration–vibration transfer.
//!
//! Two homonuclear diatoms on a line with bonds parallel to the approach
//! direction. Coordinates: R (centre-of-mass separation) and the two bond
//! displacements x1, x2. Each bond is a Morse oscillator whose eigenstates
//! come from a sinc-DVR on a uniform r grid; the wavefunction is expanded as
//! Σ_{v1 v2} ψ_{v1 v2}(R) φ_{v1}(x1) φ_{v2}(x2) with ψ on an FFT grid in R.
//!
//! The intermolecular term is the collinear slice of a [`PotentialModel`],
//! evaluated at the separation of the inner atoms shifted by the bond
//! stretches: V(R − (x1 + x2)/2). Time stepping is Strang splitting
//! e^{−iVΔt/2} e^{−iTΔt} e^{−iVΔt/2} with the channel matrix exponentiated
//! exactly at every R. Outgoing flux per channel is accumulated at an
//! analysis surface beyond the initial packet; a quadratic absorber follows.
//!
//! Time is measured in ħ/(1 cm⁻¹) ≈ 5.309 ps.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::pes::PotentialModel;

/// Morse oscillator for one bond.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorseOscillator {
    /// Harmonic constant ωe (cm⁻¹).
    pub omega_e: f64,
    /// Anharmonic constant ωe·xe (cm⁻¹).
    pub omega_e_xe: f64,
    /// Bond reduced mass (amu).
    pub reduced_mass: f64,
    /// Equilibrium bond length (Å).
    pub r_e: f64,
}

impl Default for MorseOscillator {
    fn default() -> Self {
        MorseOscillator { omega_e: 4401.0, omega_e_xe: 121.3, reduced_mass: 0.50391, r_e: 0.741 }
    }
}

impl MorseOscillator {
    pub fn depth(&self) -> f64 {
        self.omega_e * self.omega_e / (4.0 * self.omega_e_xe)
    }

    /// Range parameter a (Å⁻¹) from ωe = 2a √(C D / m).
    pub fn range(&self, hbar2_2amu: f64) -> f64 {
        self.omega_e / (2.0 * (hbar2_2amu * self.depth() / self.reduced_mass).sqrt())
    }

    pub fn potential(&self, r: f64, hbar2_2amu: f64) -> f64 {
        let e = 1.0 - (-self.range(hbar2_2amu) * (r - self.r_e)).exp();
        self.depth() * e * e
    }

    /// Exact bound-state energy ωe(v + ½) − ωexe(v + ½)², measured from the
    /// potential minimum.
    pub fn level(&self, v: usize) -> f64 {
        let x = v as f64 + 0.5;
        self.omega_e * x - self.omega_e_xe * x * x
    }
}

/// Oscillator eigenstates on a uniform bond grid.
#[derive(Clone, Debug)]
pub struct OscillatorBasis {
    /// Grid displacements x = r − r_e (Å).
    pub x: Vec<f64>,
    /// Energies relative to the potential minimum (cm⁻¹).
    pub energies: Vec<f64>,
    /// Columns are states normalised as Σ_i φ(x_i)² = 1.
    pub vectors: DMatrix<f64>,
}

/// Colbert–Miller sinc-DVR eigenstates of the Morse bond on [r_min, r_max].
pub fn oscillator_basis(
    osc: &MorseOscillator,
    r_min: f64,
    r_max: f64,
    nodes: usize,
    n_states: usize,
    hbar2_2amu: f64,
) -> Result<OscillatorBasis> {
    if nodes < 8 || n_states == 0 || n_states > nodes || !(r_max > r_min && r_min > 0.0) {
        return Err(Error::config("oscillator grid needs ≥ 8 nodes, 0 < r_min < r_max and n_states ≤ nodes"));
    }
    let dx = (r_max - r_min) / (nodes - 1) as f64;
    let c = hbar2_2amu / osc.reduced_mass;
    let mut h = DMatrix::<f64>::zeros(nodes, nodes);
    for i in 0..nodes {
        for j in 0..nodes {
            h[(i, j)] = if i == j {
                c * PI * PI / (3.0 * dx * dx)
            } else {
                let d = i as f64 - j as f64;
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                c * 2.0 * sign / (dx * dx * d * d)
            };
        }
        h[(i, i)] += osc.potential(r_min + i as f64 * dx, hbar2_2amu);
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..nodes).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut vectors = DMatrix::<f64>::zeros(nodes, n_states);
    let mut energies = Vec::with_capacity(n_states);
    for (k, &idx) in order.iter().take(n_states).enumerate() {
        let mut col = eig.eigenvectors.column(idx).clone_owned();
        // fix sign: positive lobe on the inner turning side
        let first = col.iter().copied().find(|x| x.abs() > 1e-8).unwrap_or(1.0);
        if first < 0.0 {
            col *= -1.0;
        }
        vectors.set_column(k, &col);
        energies.push(eig.eigenvalues[idx]);
    }
    let x = (0..nodes).map(|i| r_min + i as f64 * dx - osc.r_e).collect();
    Ok(OscillatorBasis { x, energies, vectors })
}

/// Grid, absorber and time-step settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VibGridSpec {
    pub r_min: f64,
    pub r_max: f64,
    /// Power of two.
    pub r_nodes: usize,
    pub bond_min: f64,
    pub bond_max: f64,
    pub bond_nodes: usize,
    /// Vibrational states kept per molecule.
    pub n_vib: usize,
    /// Analysis surface for outgoing flux (Å).
    pub r_analysis: f64,
    /// Absorber starts here and extends to r_max (Å).
    pub absorber_start: f64,
    /// Peak absorbing potential (cm⁻¹) at r_max.
    pub absorber_strength: f64,
    /// Time step in ħ/cm⁻¹.
    pub dt: f64,
    pub t_max: f64,
    /// Stop once the norm inside the analysis surface drops below this.
    pub stop_norm: f64,
    /// Largest separation at which the coupling matrix is built (Å).
    pub coupling_range: f64,
    /// Cap on the intermolecular potential (cm⁻¹).
    pub potential_cap: f64,
}

impl Default for VibGridSpec {
    fn default() -> Self {
        VibGridSpec {
            r_min: 1.6,
            r_max: 56.0,
            r_nodes: 1024,
            bond_min: 0.35,
            bond_max: 1.75,
            bond_nodes: 64,
            n_vib: 4,
            r_analysis: 40.0,
            absorber_start: 44.0,
            absorber_strength: 4000.0,
            dt: 1e-4,
            t_max: 2.0,
            stop_norm: 1e-6,
            coupling_range: 10.0,
            potential_cap: 6e4,
        }
    }
}

/// |ψ⟩ = g(R) ⊗ [cos α |v_a, v_b⟩ + e^{iβ} sin α |v_b, v_a⟩].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VibInitialState {
    pub alpha: f64,
    pub beta: f64,
    /// (v1, v2) of the cos α component.
    pub v_pair: (usize, usize),
    /// Mean collision energy (cm⁻¹).
    pub energy: f64,
    /// Packet centre (Å).
    pub r0: f64,
    /// Spatial width σ_R of |g|² (Å).
    pub width: f64,
}

impl VibInitialState {
    pub fn new(alpha: f64, beta: f64, energy: f64) -> Self {
        VibInitialState { alpha, beta, v_pair: (0, 2), energy, r0: 24.0, width: 3.0 }
    }

    /// 1σ energy spread of the packet, 2Ck₀Δk/μ with Δk = 1/(2σ_R).
    pub fn energy_width(&self, mu: f64, hbar2_2amu: f64) -> f64 {
        let k0 = (mu * self.energy / hbar2_2amu).sqrt();
        2.0 * hbar2_2amu * k0 / (2.0 * self.width) / mu
    }
}

/// Physical inputs shared by every propagation.
#[derive(Clone, Debug)]
pub struct VibSystem {
    pub grid: VibGridSpec,
    pub oscillator: MorseOscillator,
    pub mu: f64,
    pub hbar2_2amu: f64,
    pub model: PotentialModel,
    /// Weight s in V(R − s(x1 + x2)); 0.5 for the inner-atom geometry, 0
    /// decouples the bonds from the collision.
    pub stretch_factor: f64,
}

impl VibSystem {
    pub fn new(grid: VibGridSpec, model: PotentialModel, c: &Constants) -> Self {
        VibSystem {
            grid,
            oscillator: MorseOscillator::default(),
            mu: c.mu_h2_h2(),
            hbar2_2amu: c.hbar2_over_2amu_a2_cm1,
            model,
            stretch_factor: 0.5,
        }
    }

    pub fn validate(&self, init: &VibInitialState) -> Result<()> {
        let g = &self.grid;
        if !g.r_nodes.is_power_of_two() || g.r_nodes < 16 {
            return Err(Error::config("r_nodes must be a power of two ≥ 16"));
        }
        if !(g.r_min < init.r0 && init.r0 < g.r_analysis && g.r_analysis < g.absorber_start && g.absorber_start < g.r_max) {
            return Err(Error::config(
                "need r_min < r0 < r_analysis < absorber_start < r_max",
            ));
        }
        if init.r0 + 4.0 * init.width > g.r_analysis {
            return Err(Error::config(format!(
                "initial packet overlaps the analysis surface; move r_analysis beyond {:.2} Å",
                init.r0 + 4.0 * init.width
            )));
        }
        if init.r0 - 4.0 * init.width < g.coupling_range {
            return Err(Error::config(format!(
                "initial packet overlaps the interaction region; place r0 beyond {:.2} Å",
                g.coupling_range + 4.0 * init.width
            )));
        }
        if init.v_pair.0.max(init.v_pair.1) >= g.n_vib {
            return Err(Error::config("initial vibrational quanta exceed n_vib"));
        }
        if !(init.energy > 0.0 && init.width > 0.0) {
            return Err(Error::config("packet energy and width must be positive"));
        }
        // grid must resolve the fastest component: Δx < π / k_max
        let dx = (g.r_max - g.r_min) / g.r_nodes as f64;
        let e_hi = init.energy + 6.0 * init.energy_width(self.mu, self.hbar2_2amu) + self.max_release(init)?;
        let k_max = (self.mu * e_hi / self.hbar2_2amu).sqrt();
        if dx >= PI / k_max {
            return Err(Error::config(format!(
                "R grid spacing {dx:.4} Å does not resolve k = {k_max:.3} Å⁻¹; use more than {} nodes",
                ((g.r_max - g.r_min) * k_max / PI).ceil()
            )));
        }
        // phase accumulated per step by the fastest populated component
        let dt_max = 1.0 / e_hi;
        if !(g.dt > 0.0 && g.dt <= dt_max) {
            return Err(Error::config(format!(
                "time step {:.3e} too large for energies up to {e_hi:.1} cm⁻¹; use dt ≤ {dt_max:.3e}",
                g.dt
            )));
        }
        Ok(())
    }

    /// Internal energy released when the initial pair relaxes to (0, 0).
    fn max_release(&self, init: &VibInitialState) -> Result<f64> {
        let e = self.basis()?.energies;
        Ok(e[init.v_pair.0] + e[init.v_pair.1] - 2.0 * e[0])
    }

    pub fn basis(&self) -> Result<OscillatorBasis> {
        let g = &self.grid;
        oscillator_basis(&self.oscillator, g.bond_min, g.bond_max, g.bond_nodes, g.n_vib, self.hbar2_2amu)
    }
}

/// Outcome of one propagation.
#[derive(Clone, Debug, Serialize)]
pub struct VibResult {
    pub energy: f64,
    pub alpha: f64,
    pub beta: f64,
    /// ((v1', v2'), probability) from time-integrated outgoing flux.
    pub channels: Vec<((usize, usize), f64)>,
    /// Norm removed by the absorber.
    pub absorbed: f64,
    /// Norm left inside the analysis surface at the end.
    pub interior: f64,
    /// |Σ channels + interior − 1|.
    pub accounting_defect: f64,
    pub steps: usize,
    pub time: f64,
}

impl VibResult {
    pub fn probability(&self, v1: usize, v2: usize) -> f64 {
        self.channels.iter().find(|(k, _)| *k == (v1, v2)).map(|x| x.1).unwrap_or(0.0)
    }
}

/// Precomputed propagators for one system and time step.
pub struct VibPropagator {
    sys: VibSystem,
    n_ch: usize,
    channels: Vec<(usize, usize)>,
    r: Vec<f64>,
    k: Vec<f64>,
    /// e^{−iTΔt} on the FFT frequency grid.
    kinetic: Vec<Complex64>,
    /// Half-step channel propagator per R node inside the coupling range.
    coupled: Vec<Option<DMatrix<Complex64>>>,
    /// Diagonal half-step phases outside the coupling range.
    diag_half: Vec<Complex64>,
    /// Absorber half-step damping per R node.
    damp_half: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    analysis_index_phase: Vec<Complex64>,
}

impl VibPropagator {
    pub fn new(sys: VibSystem) -> Result<Self> {
        Self::with_dt(sys.clone(), sys.grid.dt)
    }

    fn with_dt(sys: VibSystem, dt: f64) -> Result<Self> {
        let g = sys.grid.clone();
        let basis = sys.basis()?;
        let nv = g.n_vib;
        let channels: Vec<(usize, usize)> = (0..nv).flat_map(|a| (0..nv).map(move |b| (a, b))).collect();
        let n_ch = channels.len();
        let internal: Vec<f64> = channels.iter().map(|&(a, b)| basis.energies[a] + basis.energies[b]).collect();
        let e0 = internal.iter().copied().fold(f64::INFINITY, f64::min);
        let internal: Vec<f64> = internal.iter().map(|e| e - e0).collect();
        let n = g.r_nodes;
        let dx = (g.r_max - g.r_min) / n as f64;
        let r: Vec<f64> = (0..n).map(|i| g.r_min + i as f64 * dx).collect();
        let k: Vec<f64> = (0..n)
            .map(|i| {
                let m = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
                2.0 * PI * m / (n as f64 * dx)
            })
            .collect();
        let kin_scale = sys.hbar2_2amu / sys.mu;
        let kinetic = k.iter().map(|&q| Complex64::from_polar(1.0, -kin_scale * q * q * dt)).collect();
        let diag_half = internal.iter().map(|&e| Complex64::from_polar(1.0, -e * dt / 2.0)).collect();
        let damp_half = r
            .iter()
            .map(|&x| {
                if x <= g.absorber_start {
                    1.0
                } else {
                    let s = (x - g.absorber_start) / (g.r_max - g.absorber_start);
                    (-g.absorber_strength * s * s * dt / 2.0).exp()
                }
            })
            .collect();
        // coupling matrices ⟨v1 v2|V(R − (x1 + x2)/2)|v1' v2'⟩
        let nb = basis.x.len();
        let phi = &basis.vectors;
        let coupled: Vec<Option<DMatrix<Complex64>>> = r
            .par_iter()
            .map(|&rr| {
                if rr > g.coupling_range {
                    return None;
                }
                let mut w = DMatrix::<f64>::zeros(nb, nb);
                for i in 0..nb {
                    for j in 0..nb {
                        let rho = rr - sys.stretch_factor * (basis.x[i] + basis.x[j]);
                        let v = if rho <= 0.0 { g.potential_cap } else { sys.model.collinear(rho).min(g.potential_cap) };
                        w[(i, j)] = v;
                    }
                }
                // M[(a,b),(c,d)] = Σ_ij φa(i) φb(j) W(i,j) φc(i) φd(j)
                let mut h = DMatrix::<f64>::zeros(n_ch, n_ch);
                for (p, &(a, b)) in channels.iter().enumerate() {
                    for (q, &(c, d)) in channels.iter().enumerate().skip(p) {
                        let mut s = 0.0;
                        for i in 0..nb {
                            let fi = phi[(i, a)] * phi[(i, c)];
                            if fi == 0.0 {
                                continue;
                            }
                            let mut t = 0.0;
                            for j in 0..nb {
                                t += phi[(j, b)] * phi[(j, d)] * w[(i, j)];
                            }
                            s += fi * t;
                        }
                        h[(p, q)] = s;
                        h[(q, p)] = s;
                    }
                    h[(p, p)] += internal[p];
                }
                let eig = SymmetricEigen::new(h);
                let q = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
                let ph = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -l * dt / 2.0)));
                Some(&q * ph * q.transpose())
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let xa = g.r_analysis - g.r_min;
        let analysis_index_phase = k.iter().map(|&q| Complex64::from_polar(1.0 / n as f64, q * xa)).collect();
        Ok(VibPropagator { sys, n_ch, channels, r, k, kinetic, coupled, diag_half, damp_half, fft, ifft, analysis_index_phase })
    }

    fn dx(&self) -> f64 {
        self.r[1] - self.r[0]
    }

    pub fn channel_index(&self, v1: usize, v2: usize) -> Option<usize> {
        self.channels.iter().position(|&c| c == (v1, v2))
    }

    /// Initial wavefunction, channel-major: psi[c][i].
    pub fn initial_state(&self, init: &VibInitialState) -> Result<Vec<Vec<Complex64>>> {
        self.sys.validate(init)?;
        let (va, vb) = init.v_pair;
        let ia = self.channel_index(va, vb).expect("validated");
        let ib = self.channel_index(vb, va).expect("validated");
        let k0 = (self.sys.mu * init.energy / self.sys.hbar2_2amu).sqrt();
        let norm = (2.0 * PI * init.width * init.width).powf(-0.25);
        let g: Vec<Complex64> = self
            .r
            .iter()
            .map(|&x| {
                let d = x - init.r0;
                Complex64::from_polar(norm * (-d * d / (4.0 * init.width * init.width)).exp(), -k0 * x)
            })
            .collect();
        let mut psi = vec![vec![Complex64::default(); self.r.len()]; self.n_ch];
        let ca = Complex64::new(init.alpha.cos(), 0.0);
        let cb = Complex64::from_polar(init.alpha.sin(), init.beta);
        for (i, gi) in g.iter().enumerate() {
            psi[ia][i] += ca * gi;
            psi[ib][i] += cb * gi;
        }
        // normalise on the grid
        let n = self.norm(&psi);
        for c in psi.iter_mut() {
            for x in c.iter_mut() {
                *x /= n.sqrt();
            }
        }
        Ok(psi)
    }

    pub fn norm(&self, psi: &[Vec<Complex64>]) -> f64 {
        self.dx() * psi.iter().flat_map(|c| c.iter()).map(|x| x.norm_sqr()).sum::<f64>()
    }

    fn norm_below(&self, psi: &[Vec<Complex64>], r_lim: f64) -> f64 {
        let m = self.r.iter().take_while(|&&x| x < r_lim).count();
        self.dx() * psi.iter().flat_map(|c| c[..m].iter()).map(|x| x.norm_sqr()).sum::<f64>()
    }

    fn potential_half(&self, psi: &mut [Vec<Complex64>], absorb: bool) {
        let mut col = vec![Complex64::default(); self.n_ch];
        for i in 0..self.r.len() {
            match &self.coupled[i] {
                Some(u) => {
                    for c in 0..self.n_ch {
                        col[c] = psi[c][i];
                    }
                    for c in 0..self.n_ch {
                        let mut s = Complex64::default();
                        for d in 0..self.n_ch {
                            s += u[(c, d)] * col[d];
                        }
                        psi[c][i] = s;
                    }
                }
                None => {
                    for c in 0..self.n_ch {
                        psi[c][i] *= self.diag_half[c];
                    }
                }
            }
            if absorb && self.damp_half[i] != 1.0 {
                for c in psi.iter_mut() {
                    c[i] *= self.damp_half[i];
                }
            }
        }
    }

    /// One Strang step; returns the per-channel flux through the analysis
    /// surface evaluated in the kinetic stage.
    fn step(&self, psi: &mut [Vec<Complex64>], absorb: bool, flux: Option<&mut [f64]>) {
        self.potential_half(psi, absorb);
        let scale = 2.0 * self.sys.hbar2_2amu / self.sys.mu;
        let mut flux = flux;
        for (c, ch) in psi.iter_mut().enumerate() {
            self.fft.process(ch);
            for (x, p) in ch.iter_mut().zip(&self.kinetic) {
                *x *= p;
            }
            if let Some(f) = flux.as_deref_mut() {
                let mut val = Complex64::default();
                let mut der = Complex64::default();
                for ((x, ph), &q) in ch.iter().zip(&self.analysis_index_phase).zip(&self.k) {
                    let t = x * ph;
                    val += t;
                    der += t * Complex64::new(0.0, q);
                }
                f[c] = scale * (val.conj() * der).im;
            }
            self.ifft.process(ch);
            let inv = 1.0 / ch.len() as f64;
            for x in ch.iter_mut() {
                *x *= inv;
            }
        }
        self.potential_half(psi, absorb);
    }

    /// Propagates until the interior norm falls below `stop_norm` or `t_max`.
    pub fn run(&self, init: &VibInitialState) -> Result<VibResult> {
        let mut psi = self.initial_state(init)?;
        let g = &self.sys.grid;
        let mut acc = vec![0.0; self.n_ch];
        let mut flux = vec![0.0; self.n_ch];
        let max_steps = (g.t_max / g.dt).ceil() as usize;
        let mut steps = 0;
        let check_every = 50;
        while steps < max_steps {
            self.step(&mut psi, true, Some(&mut flux));
            for (a, f) in acc.iter_mut().zip(&flux) {
                *a += f * g.dt;
            }
            steps += 1;
            if steps % check_every == 0 {
                let interior = self.norm_below(&psi, g.r_analysis);
                if !interior.is_finite() {
                    return Err(Error::numerical("wavepacket norm became non-finite"));
                }
                if interior < g.stop_norm {
                    break;
                }
            }
        }
        let interior = self.norm_below(&psi, g.r_analysis);
        let absorbed = 1.0 - self.norm(&psi);
        let total: f64 = acc.iter().sum();
        Ok(VibResult {
            energy: init.energy,
            alpha: init.alpha,
            beta: init.beta,
            channels: self.channels.iter().copied().zip(acc).collect(),
            absorbed,
            interior,
            accounting_defect: (total + interior - 1.0).abs(),
            steps,
            time: steps as f64 * g.dt,
        })
    }

    /// n steps with the absorber off (for conservation checks).
    pub fn evolve_free(&self, psi: &mut [Vec<Complex64>], n: usize) {
        for _ in 0..n {
            self.step(psi, false, None);
        }
    }

    /// Same system with the time step negated, for reversibility checks.
    pub fn reversed(&self) -> Result<Self> {
        Self::with_dt(self.sys.clone(), -self.sys.grid.dt)
    }
}

/// One propagation.
pub fn propagate_vib(sys: &VibSystem, init: &VibInitialState) -> Result<VibResult> {
    sys.validate(init)?;
    VibPropagator::new(sys.clone())?.run(init)
}

/// P_{(1,1)}-type curves: one propagation per (E, β), parallel over cells.
pub fn energy_scan(
    sys: &VibSystem,
    template: &VibInitialState,
    energies: &[f64],
    betas: &[f64],
) -> Result<Vec<VibResult>> {
    for &e in energies {
        sys.validate(&VibInitialState { energy: e, ..template.clone() })?;
    }
    let prop = VibPropagator::new(sys.clone())?;
    let cells: Vec<(f64, f64)> = energies.iter().flat_map(|&e| betas.iter().map(move |&b| (e, b))).collect();
    cells
        .par_iter()
        .map(|&(e, b)| prop.run(&VibInitialState { energy: e, beta: b, ..template.clone() }))
        .collect()
}
