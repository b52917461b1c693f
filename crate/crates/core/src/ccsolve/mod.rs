//! Coupled-channel solver: log-derivative propagation per total J and
//! parity block, matching to Riccati–Bessel asymptotics, S and T = I − S.

mod logderiv;
mod riccati;

pub use logderiv::{propagate as propagate_log_derivative, Segment};
pub use riccati::{decaying_log_derivative, growing_log_derivative, riccati_bessel, RiccatiTable};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{build_channel_basis, parity_blocks, ChannelState, CollisionSpec};
use crate::error::{Error, Result};
use crate::pes::{CouplingTable, PotentialModel};

/// Radial grid and truncation for one solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationConfig {
    /// Å
    pub r_start: f64,
    /// Å
    pub r_match: f64,
    /// Step inside `r_switch`, Å.
    pub step: f64,
    /// Step beyond `r_switch`, Å.
    pub step_long: f64,
    /// Å
    pub r_switch: f64,
    /// Upper bound on h·k for the fastest open channel; tightens either
    /// step when needed.
    #[serde(default = "default_phase_step")]
    pub phase_step: f64,
    pub big_j_max: i32,
}

fn default_phase_step() -> f64 {
    0.02
}

impl PropagationConfig {
    /// Defaults keyed on collision energy: matching at 30 Å from 4 cm⁻¹ up,
    /// 200 Å at 0.04 cm⁻¹ and below, log-interpolated in between.
    pub fn for_energy(e_k: f64, big_j_max: i32) -> Self {
        let r_match = if e_k >= 4.0 {
            30.0
        } else if e_k <= 0.04 {
            200.0
        } else {
            let t = (4.0f64.ln() - e_k.ln()) / (4.0f64.ln() - 0.04f64.ln());
            (30.0f64.ln() + t * (200.0f64.ln() - 30.0f64.ln())).exp().round()
        };
        PropagationConfig {
            r_start: 1.5,
            r_match,
            step: 0.005,
            step_long: 0.02,
            r_switch: 10.0,
            phase_step: default_phase_step(),
            big_j_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_start > 0.0 && self.r_start < self.r_match) {
            return Err(Error::config(format!(
                "need 0 < r_start < r_match, got {} and {}",
                self.r_start, self.r_match
            )));
        }
        if !(self.step > 0.0 && self.step_long > 0.0 && self.phase_step > 0.0) {
            return Err(Error::config("propagation steps must be positive"));
        }
        if self.big_j_max < 0 {
            return Err(Error::config("J_max must be non-negative"));
        }
        Ok(())
    }

    fn segments(&self, k_max: f64) -> Vec<Segment> {
        let cap = if k_max > 0.0 { self.phase_step / k_max } else { f64::INFINITY };
        let (inner, outer) = (self.step.min(cap), self.step_long.min(cap));
        if self.r_switch > self.r_start && self.r_switch < self.r_match {
            vec![
                Segment { r0: self.r_start, r1: self.r_switch, h_max: inner },
                Segment { r0: self.r_switch, r1: self.r_match, h_max: outer },
            ]
        } else {
            vec![Segment { r0: self.r_start, r1: self.r_match, h_max: inner }]
        }
    }

    /// Same grid with both steps halved.
    pub fn halved(&self) -> Self {
        PropagationConfig {
            step: self.step / 2.0,
            step_long: self.step_long / 2.0,
            phase_step: self.phase_step / 2.0,
            ..self.clone()
        }
    }
}

/// Partial-wave cutoff used when none is given: covers impact parameters
/// out to 6 Å for the fastest open channel plus the rotational recoupling
/// spread.
pub fn default_big_j_max(spec: &CollisionSpec) -> Result<i32> {
    let levels = spec.level_list()?;
    let e_total = spec.total_energy();
    let e_min = levels.iter().map(|l| l.energy).fold(f64::INFINITY, f64::min);
    let (k_max, _) = crate::basis::wavenumber(e_total, 2.0 * e_min, spec.mu, spec.hbar2_2amu);
    Ok((6.0 * k_max).ceil() as i32 + 4 + 2 * spec.j_max)
}

/// S on the open channels of one total J (both parities).
#[derive(Clone, Debug)]
pub struct SMatrixBlock {
    pub big_j: i32,
    pub open_channels: Vec<ChannelState>,
    pub s: DMatrix<Complex64>,
}

/// Solves every J in 0..=cfg.big_j_max in parallel on the current rayon pool.
pub fn solve_all(spec: &CollisionSpec, model: &PotentialModel, cfg: &PropagationConfig) -> Result<Vec<SMatrixBlock>> {
    cfg.validate()?;
    spec.validate()?;
    model.validate()?;
    (0..=cfg.big_j_max).into_par_iter().map(|j| propagate(j, spec, model, cfg)).collect()
}

/// Solves one total-J block.
pub fn propagate(big_j: i32, spec: &CollisionSpec, model: &PotentialModel, cfg: &PropagationConfig) -> Result<SMatrixBlock> {
    let basis = build_channel_basis(spec, big_j)?;
    solve_channels(&basis, model, cfg, spec.mu, spec.hbar2_2amu, spec.total_energy())
}

/// Solves a prepared channel list (all sharing one J) at total energy
/// `e_total` (cm⁻¹), reduced mass `mu` (amu).
pub fn solve_channels(
    basis: &[ChannelState],
    model: &PotentialModel,
    cfg: &PropagationConfig,
    mu: f64,
    hbar2_2amu: f64,
    e_total: f64,
) -> Result<SMatrixBlock> {
    cfg.validate()?;
    let Some(first) = basis.first() else {
        return Err(Error::domain("empty channel basis"));
    };
    let big_j = first.big_j;
    if basis.iter().any(|c| c.big_j != big_j) {
        return Err(Error::domain("channels of different J in one block"));
    }
    let open_idx: Vec<usize> = (0..basis.len()).filter(|&i| basis[i].open).collect();
    if open_idx.is_empty() {
        return Err(Error::domain(format!("no open channels at J={big_j}")));
    }
    let no = open_idx.len();
    let mut s = DMatrix::<Complex64>::zeros(no, no);
    let pos_in_open = |i: usize| open_idx.iter().position(|&x| x == i);
    for (_, idx) in parity_blocks(basis) {
        let sub: Vec<ChannelState> = idx.iter().map(|&i| basis[i].clone()).collect();
        if !sub.iter().any(|c| c.open) {
            continue;
        }
        let (s_sub, open_sub) = solve_block(&sub, model, cfg, mu, hbar2_2amu, e_total)?;
        let glob: Vec<usize> = open_sub.iter().map(|&a| pos_in_open(idx[a]).unwrap()).collect();
        for (a, &ga) in glob.iter().enumerate() {
            for (b, &gb) in glob.iter().enumerate() {
                s[(ga, gb)] = s_sub[(a, b)];
            }
        }
    }
    Ok(SMatrixBlock {
        big_j,
        open_channels: open_idx.iter().map(|&i| basis[i].clone()).collect(),
        s,
    })
}

/// One parity block; returns S on its open channels and their local indices.
fn solve_block(
    basis: &[ChannelState],
    model: &PotentialModel,
    cfg: &PropagationConfig,
    mu: f64,
    hbar2_2amu: f64,
    e_total: f64,
) -> Result<(DMatrix<Complex64>, Vec<usize>)> {
    let n = basis.len();
    let scale = mu / hbar2_2amu;
    let table = CouplingTable::new(basis, model);
    let mut vbuf = DMatrix::zeros(n, n);
    let mut fill_w = |r: f64, w: &mut DMatrix<f64>| {
        table.potential_into(model, r, &mut vbuf);
        w.copy_from(&vbuf);
        *w *= scale;
        for (i, c) in basis.iter().enumerate() {
            let l = c.l as f64;
            w[(i, i)] += l * (l + 1.0) / (r * r) + scale * (c.channel_energy - e_total);
        }
    };

    // Start from the free regular solution with the local diagonal momentum.
    let a = cfg.r_start;
    let mut w0 = DMatrix::zeros(n, n);
    fill_w(a, &mut w0);
    let mut y0 = DMatrix::zeros(n, n);
    for (i, c) in basis.iter().enumerate() {
        let l = c.l as f64;
        let k2 = l * (l + 1.0) / (a * a) - w0[(i, i)];
        y0[(i, i)] = regular_log_derivative(c.l as usize, k2, a);
    }

    let k_max = basis.iter().filter(|c| c.open).map(|c| c.k).fold(0.0, f64::max);
    let y = propagate_log_derivative(y0, &cfg.segments(k_max), fill_w)?;

    let r = cfg.r_match;
    let mut jv = vec![0.0; n];
    let mut jp = vec![0.0; n];
    let mut nv = vec![0.0; n];
    let mut np = vec![0.0; n];
    for (i, c) in basis.iter().enumerate() {
        let l = c.l as usize;
        if c.open && c.k > 0.0 {
            let t = riccati_bessel(l, c.k * r);
            let sk = c.k.sqrt();
            jv[i] = t.j[l] / sk;
            jp[i] = t.jp[l] * sk;
            nv[i] = t.n[l] / sk;
            np[i] = t.np[l] * sk;
        } else {
            let kappa = c.k.max(1e-12);
            jv[i] = 1.0;
            jp[i] = kappa * growing_log_derivative(l, kappa * r);
            nv[i] = 1.0;
            np[i] = kappa * decaying_log_derivative(l, kappa * r);
        }
    }
    // K = −(Y N − N')⁻¹ (Y J − J')
    let mut lhs = y.clone();
    let mut rhs = y;
    for j in 0..n {
        for i in 0..n {
            lhs[(i, j)] *= nv[j];
            rhs[(i, j)] *= jv[j];
        }
        lhs[(j, j)] -= np[j];
        rhs[(j, j)] -= jp[j];
    }
    let k_full = lhs.clone().lu().solve(&rhs).ok_or_else(|| {
        let sv = lhs.singular_values();
        let cond = sv.max() / sv.min();
        Error::numerical(format!(
            "singular asymptotic match at R_match = {r} Å (J = {}, condition ≈ {cond:.3e})",
            basis[0].big_j
        ))
    })?;
    let open: Vec<usize> = (0..n).filter(|&i| basis[i].open && basis[i].k > 0.0).collect();
    let no = open.len();
    let mut k = DMatrix::<f64>::zeros(no, no);
    for (a, &i) in open.iter().enumerate() {
        for (b, &j) in open.iter().enumerate() {
            k[(a, b)] = -k_full[(i, j)];
        }
    }
    let kt = k.transpose();
    k = (k + kt) * 0.5;
    Ok((s_from_k(&k)?, open))
}

/// Log-derivative of the free regular solution at R = a with local
/// squared momentum k2 (negative in forbidden regions).
fn regular_log_derivative(l: usize, k2: f64, a: f64) -> f64 {
    const CLAMP: f64 = 1e30;
    let v = if k2 > 0.0 {
        let k = k2.sqrt();
        let t = riccati_bessel(l, k * a);
        k * t.jp[l] / t.j[l]
    } else if k2 < 0.0 {
        let kappa = (-k2).sqrt();
        kappa * growing_log_derivative(l, kappa * a)
    } else {
        (l as f64 + 1.0) / a
    };
    if v.is_finite() {
        v.clamp(-CLAMP, CLAMP)
    } else {
        CLAMP
    }
}

/// S = (I + iK)(I − iK)⁻¹.
pub fn s_from_k(k: &DMatrix<f64>) -> Result<DMatrix<Complex64>> {
    let n = k.nrows();
    let i = Complex64::i();
    let eye = DMatrix::<Complex64>::identity(n, n);
    let kc = k.map(|x| Complex64::new(x, 0.0));
    let num = &eye + &kc * i;
    let den = &eye - &kc * i;
    // (I + iK) and (I − iK)⁻¹ commute
    den.lu()
        .solve(&num)
        .ok_or_else(|| Error::numerical("I − iK is singular"))
}

/// T = I − S.
pub fn t_from_s(s: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    DMatrix::identity(s.nrows(), s.ncols()) - s
}

/// S = I − T.
pub fn s_from_t(t: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    DMatrix::identity(t.nrows(), t.ncols()) - t
}

/// max |S†S − I|.
pub fn unitarity_defect(s: &DMatrix<Complex64>) -> f64 {
    let p = s.adjoint() * s;
    let n = p.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - want).norm());
        }
    }
    worst
}

/// max |S − Sᵀ|.
pub fn symmetry_defect(s: &DMatrix<Complex64>) -> f64 {
    let n = s.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..i {
            worst = worst.max((s[(i, j)] - s[(j, i)]).norm());
        }
    }
    worst
}

/// max over rows of |Σ_f |S_if|² − 1|.
pub fn flux_defect(s: &DMatrix<Complex64>) -> f64 {
    s.row_iter()
        .map(|r| (r.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::MolState;
    use crate::constants::Constants;

    fn single_channel(l: i32, e_k: f64, c: &Constants) -> Vec<ChannelState> {
        let mu = c.mu_h2_h2();
        let (k, open) = crate::basis::wavenumber(e_k, 0.0, mu, c.hbar2_over_2amu_a2_cm1);
        vec![ChannelState { j1: 0, v1: 0, j2: 0, v2: 0, j12: 0, l, big_j: l, channel_energy: 0.0, k, open }]
    }

    /// Independent single-channel integrator: Numerov outward from deep in
    /// the repulsive wall, tan δ from two-point matching.
    fn numerov_phase(l: i32, e_k: f64, model: &PotentialModel, r_match: f64, c: &Constants) -> f64 {
        let mu = c.mu_h2_h2();
        let s = mu / c.hbar2_over_2amu_a2_cm1;
        let k2 = s * e_k;
        let k = k2.sqrt();
        let lf = l as f64;
        let f = |r: f64| lf * (lf + 1.0) / (r * r) + s * model.collinear(r) - k2;
        let h = 5e-4;
        let r0 = 1.5;
        let n = ((r_match - r0) / h).round() as usize;
        let h = (r_match - r0) / n as f64;
        let (mut u0, mut u1) = (0.0, 1e-30);
        let (mut f0, mut f1) = (f(r0), f(r0 + h));
        let c12 = h * h / 12.0;
        for i in 2..=n {
            let r = r0 + i as f64 * h;
            let f2 = f(r);
            let u2 = (2.0 * u1 * (1.0 + 5.0 * c12 * f1) - u0 * (1.0 - c12 * f0)) / (1.0 - c12 * f2);
            u0 = u1;
            u1 = u2;
            f0 = f1;
            f1 = f2;
            if u1.abs() > 1e200 {
                u0 *= 1e-200;
                u1 *= 1e-200;
            }
        }
        // u0 at r_match − h, u1 at r_match
        let la = l as usize;
        let b1 = riccati_bessel(la, k * (r_match - h));
        let b2 = riccati_bessel(la, k * r_match);
        let t = (u1 * b1.j[la] - u0 * b2.j[la]) / (u0 * b2.n[la] - u1 * b1.n[la]);
        t.atan()
    }

    fn wrap_phase(d: f64) -> f64 {
        let p = std::f64::consts::PI;
        (d + p / 2.0).rem_euclid(p) - p / 2.0
    }

    #[test]
    fn zero_potential_gives_identity() {
        let c = Constants::default();
        let spec = CollisionSpec::h2_h2(4.0, [MolState::new(2, 0, 0), MolState::new(0, 0, 0)], 2, 3, &c);
        let cfg = PropagationConfig { step: 0.002, ..PropagationConfig::for_energy(4.0, 3) };
        for b in solve_all(&spec, &PotentialModel::zero(), &cfg).unwrap() {
            let t = t_from_s(&b.s);
            assert!(t.iter().all(|z| z.norm() < 1e-6), "J={} max|T|={}", b.big_j, t.camax());
        }
    }

    #[test]
    fn single_channel_matches_numerov() {
        let c = Constants::default();
        let model = PotentialModel::isotropic_lj(24.0, 3.03);
        for (l, e) in [(0, 4.0), (1, 4.0), (3, 40.0), (0, 0.4)] {
            let basis = single_channel(l, e, &c);
            let cfg = PropagationConfig { step: 0.002, step_long: 0.01, ..PropagationConfig::for_energy(e, l) };
            let b = solve_channels(&basis, &model, &cfg, c.mu_h2_h2(), c.hbar2_over_2amu_a2_cm1, e).unwrap();
            let delta = b.s[(0, 0)].arg() / 2.0;
            let want = numerov_phase(l, e, &model, cfg.r_match, &c);
            let d = wrap_phase(delta - want);
            assert!(d.abs() < 1e-6, "l={l} E={e}: {delta} vs {want}");
        }
    }

    #[test]
    fn default_model_is_unitary_and_symmetric() {
        let c = Constants::default();
        let spec = CollisionSpec::h2_h2(4.0, [MolState::new(2, 0, 0), MolState::new(0, 0, 0)], 2, 4, &c);
        let cfg = PropagationConfig::for_energy(4.0, 4);
        for b in solve_all(&spec, &PotentialModel::default_h2(), &cfg).unwrap() {
            assert!(unitarity_defect(&b.s) < 1e-6, "J={}", b.big_j);
            assert!(symmetry_defect(&b.s) < 1e-6);
            assert!(flux_defect(&b.s) < 1e-6);
        }
    }

    #[test]
    fn exchanged_channels_obey_signed_symmetry() {
        // S(a|b) = ε_a ε_b S(Pa|Pb) for an exchange-symmetric model
        let c = Constants::default();
        let spec = CollisionSpec::h2_h2(4.0, [MolState::new(2, 0, 0), MolState::new(0, 0, 0)], 2, 3, &c);
        let cfg = PropagationConfig::for_energy(4.0, 3);
        for b in solve_all(&spec, &PotentialModel::default_h2(), &cfg).unwrap() {
            let keys: Vec<_> = b.open_channels.iter().map(|c| c.key()).collect();
            for (i, ki) in keys.iter().enumerate() {
                let pi = keys.iter().position(|x| *x == ki.exchanged()).unwrap();
                for (j, kj) in keys.iter().enumerate() {
                    let pj = keys.iter().position(|x| *x == kj.exchanged()).unwrap();
                    let lhs = b.s[(i, j)];
                    let rhs = b.s[(pi, pj)] * (ki.exchange_phase() * kj.exchange_phase());
                    assert!((lhs - rhs).norm() < 1e-9, "J={} {ki:?} {kj:?}", b.big_j);
                }
            }
        }
    }

    #[test]
    fn t_s_round_trip() {
        let k = DMatrix::from_row_slice(2, 2, &[0.3, -0.1, -0.1, 1.7]);
        let s = s_from_k(&k).unwrap();
        assert!(unitarity_defect(&s) < 1e-14);
        let back = s_from_t(&t_from_s(&s));
        assert!((back - &s).camax() < 1e-15);
        // diagonal S = e^{2iδ} ⇒ |T| = 2|sin δ|
        let d = 0.4f64;
        let s = s_from_k(&DMatrix::from_element(1, 1, d.tan())).unwrap();
        assert!((t_from_s(&s)[(0, 0)].norm() - 2.0 * d.sin().abs()).abs() < 1e-14);
    }

    #[test]
    fn halving_the_step_reduces_unitarity_defect_or_keeps_it_tiny() {
        let c = Constants::default();
        let spec = CollisionSpec::h2_h2(4.0, [MolState::new(2, 0, 0), MolState::new(0, 0, 0)], 2, 2, &c);
        let cfg = PropagationConfig { step: 0.02, step_long: 0.05, ..PropagationConfig::for_energy(4.0, 2) };
        let coarse = propagate(2, &spec, &PotentialModel::default_h2(), &cfg).unwrap();
        let fine = propagate(2, &spec, &PotentialModel::default_h2(), &cfg.halved()).unwrap();
        let (dc, df) = (unitarity_defect(&coarse.s), unitarity_defect(&fine.s));
        assert!(df <= dc.max(1e-12), "{dc} -> {df}");
    }
}
