//! Rovibrational levels and coupled channel bases |j1 v1 j2 v2 j12 l; J⟩.
//!
//! Molecular angular momenta are integers throughout (spinless bosons), so
//! channel labels are stored as `i32`; [`HalfInt`] views are provided where
//! the angular-momentum API wants them.
//!
//! Coupling order: j1 ⊗ j2 → j12, then l ⊗ j12 → J, i.e.
//! |l j12 J M⟩ = Σ C^{JM}_{l m_l j12 m12} |l m_l⟩|j12 m12⟩.
//!
//! Channels are sorted by the key (j1, v1, j2, v2, j12, l) in lexicographic
//! order. The basis is the distinguishable-molecule one: (j1 v1) ≠ (j2 v2)
//! pairs appear in both orders as distinct channels.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::angmom::{triangle, HalfInt};
use crate::constants::Constants;
use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MolecularLevel {
    pub j: i32,
    pub v: i32,
    /// cm⁻¹
    pub energy: f64,
}

/// A single-molecule state |j m v⟩.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MolState {
    pub j: i32,
    pub m: i32,
    pub v: i32,
}

impl MolState {
    pub fn new(j: i32, m: i32, v: i32) -> Self {
        MolState { j, m, v }
    }

    pub fn validate(&self) -> Result<()> {
        if self.j < 0 || self.v < 0 || self.m.abs() > self.j {
            return Err(Error::domain(format!("invalid molecular state {self}")));
        }
        Ok(())
    }
}

impl fmt::Display for MolState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(j={}, m={}, v={})", self.j, self.m, self.v)
    }
}

/// Rigid-rotor plus harmonic level model:
/// E(j, v) = B·j(j+1) + vib_spacing·v.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelModel {
    pub rotor_b: f64,
    pub vib_spacing: f64,
}

impl LevelModel {
    pub fn from_constants(c: &Constants) -> Self {
        LevelModel {
            rotor_b: c.b_cm1,
            vib_spacing: c.vib_spacing_cm1,
        }
    }

    pub fn energy(&self, j: i32, v: i32) -> f64 {
        self.rotor_b * (j * (j + 1)) as f64 + self.vib_spacing * v as f64
    }
}

/// All levels with j ≤ j_max and v ≤ v_max, ordered by (v, j).
pub fn enumerate_levels(
    j_max: i32,
    v_max: i32,
    rotor_b: f64,
    vib_spacing: f64,
    para_only: bool,
) -> Result<Vec<MolecularLevel>> {
    if j_max < 0 || v_max < 0 {
        return Err(Error::domain("j_max and v_max must be non-negative"));
    }
    if !(rotor_b >= 0.0) || !(vib_spacing >= 0.0) {
        return Err(Error::domain("level constants must be non-negative"));
    }
    let model = LevelModel {
        rotor_b,
        vib_spacing,
    };
    let mut out = Vec::new();
    for v in 0..=v_max {
        for j in 0..=j_max {
            if para_only && j % 2 != 0 {
                continue;
            }
            out.push(MolecularLevel {
                j,
                v,
                energy: model.energy(j, v),
            });
        }
    }
    Ok(out)
}

/// Wavenumber k (Å⁻¹) for kinetic energy E_total − E_channel, with the
/// open/closed flag. Closed channels carry the magnitude √(2μ|ΔE|)/ħ.
pub fn wavenumber(e_total: f64, e_channel: f64, mu: f64, hbar2_2amu: f64) -> (f64, bool) {
    let de = e_total - e_channel;
    let k = (mu * de.abs() / hbar2_2amu).sqrt();
    (k, de >= 0.0)
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelState {
    pub j1: i32,
    pub v1: i32,
    pub j2: i32,
    pub v2: i32,
    pub j12: i32,
    pub l: i32,
    pub big_j: i32,
    /// Internal energy E(j1 v1) + E(j2 v2), cm⁻¹.
    pub channel_energy: f64,
    /// |k| in Å⁻¹.
    pub k: f64,
    pub open: bool,
}

/// Quantum-number key of a channel inside a J block.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChannelKey {
    pub j1: i32,
    pub v1: i32,
    pub j2: i32,
    pub v2: i32,
    pub j12: i32,
    pub l: i32,
}

impl ChannelKey {
    pub fn new(j1: i32, v1: i32, j2: i32, v2: i32, j12: i32, l: i32) -> Self {
        ChannelKey {
            j1,
            v1,
            j2,
            v2,
            j12,
            l,
        }
    }

    /// The same channel with the two molecules' labels swapped.
    pub fn exchanged(&self) -> Self {
        ChannelKey {
            j1: self.j2,
            v1: self.v2,
            j2: self.j1,
            v2: self.v1,
            j12: self.j12,
            l: self.l,
        }
    }

    /// Sign of the exchange operator on this channel:
    /// P|j1v1 j2v2 j12 l⟩ = (−1)^{j1+j2−j12+l} |j2v2 j1v1 j12 l⟩.
    pub fn exchange_phase(&self) -> f64 {
        crate::angmom::parity_sign(self.j1 + self.j2 - self.j12 + self.l)
    }

    /// Total parity (−1)^{j1+j2+l}.
    pub fn parity(&self) -> i32 {
        if (self.j1 + self.j2 + self.l) % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

impl fmt::Display for ChannelKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} {} {}",
            self.j1, self.v1, self.j2, self.v2, self.j12, self.l
        )
    }
}

impl ChannelState {
    pub fn key(&self) -> ChannelKey {
        ChannelKey::new(self.j1, self.v1, self.j2, self.v2, self.j12, self.l)
    }

    pub fn j12_half(&self) -> HalfInt {
        HalfInt::int(self.j12)
    }

    pub fn l_half(&self) -> HalfInt {
        HalfInt::int(self.l)
    }

    pub fn big_j_half(&self) -> HalfInt {
        HalfInt::int(self.big_j)
    }

    /// Checks the triangle rules and the open-flag consistency.
    pub fn validate(&self, e_total: f64) -> Result<()> {
        if !triangle(self.j1, self.j2, self.j12) || !triangle(self.j12, self.l, self.big_j) {
            return Err(Error::Invariant(format!(
                "channel {} violates triangle rules at J={}",
                self.key(),
                self.big_j
            )));
        }
        if self.open != (e_total >= self.channel_energy) {
            return Err(Error::Invariant(format!("open flag wrong for {}", self.key())));
        }
        Ok(())
    }
}

/// Everything that defines the collision and the basis truncation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionSpec {
    /// Collision (kinetic) energy, cm⁻¹.
    pub e_k: f64,
    pub initial: [MolState; 2],
    pub j_max: i32,
    pub v_max: i32,
    pub big_j_max: i32,
    /// Reduced mass, amu.
    pub mu: f64,
    pub levels: LevelModel,
    pub para_only: bool,
    /// Drop molecule pairs whose internal energy exceeds this (cm⁻¹).
    pub pair_energy_max: Option<f64>,
    pub hbar2_2amu: f64,
    /// Allows both molecules in the same state (satellite components of a
    /// product preparation).
    #[serde(default)]
    pub satellite: bool,
}

impl CollisionSpec {
    /// H₂ + H₂ defaults from a constants set: para levels, v = 0 only.
    pub fn h2_h2(e_k: f64, initial: [MolState; 2], j_max: i32, big_j_max: i32, c: &Constants) -> Self {
        CollisionSpec {
            e_k,
            initial,
            j_max,
            v_max: 0,
            big_j_max,
            mu: c.mu_h2_h2(),
            levels: LevelModel::from_constants(c),
            para_only: true,
            pair_energy_max: None,
            hbar2_2amu: c.hbar2_over_2amu_a2_cm1,
            satellite: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e_k > 0.0) {
            return Err(Error::domain(format!("collision energy must be positive, got {}", self.e_k)));
        }
        if !(self.mu > 0.0) || !(self.hbar2_2amu > 0.0) {
            return Err(Error::domain("reduced mass and unit constant must be positive"));
        }
        for s in &self.initial {
            s.validate()?;
            if s.j > self.j_max || s.v > self.v_max {
                return Err(Error::domain(format!("initial state {s} outside the basis truncation")));
            }
            if self.para_only && s.j % 2 != 0 {
                return Err(Error::domain(format!("initial state {s} is not para")));
            }
        }
        if self.initial[0] == self.initial[1] && !self.satellite {
            return Err(Error::domain(
                "the two initial molecular states must differ for an entangled pair",
            ));
        }
        if self.big_j_max < 0 {
            return Err(Error::domain("J_max must be non-negative"));
        }
        Ok(())
    }

    pub fn level_list(&self) -> Result<Vec<MolecularLevel>> {
        enumerate_levels(
            self.j_max,
            self.v_max,
            self.levels.rotor_b,
            self.levels.vib_spacing,
            self.para_only,
        )
    }

    /// Internal energy of the initial pair.
    pub fn initial_internal_energy(&self) -> f64 {
        let [a, b] = self.initial;
        self.levels.energy(a.j, a.v) + self.levels.energy(b.j, b.v)
    }

    /// E_total = E_k + E(j1 v1) + E(j2 v2).
    pub fn total_energy(&self) -> f64 {
        self.e_k + self.initial_internal_energy()
    }

    pub fn wavenumber_for(&self, channel_energy: f64) -> (f64, bool) {
        wavenumber(self.total_energy(), channel_energy, self.mu, self.hbar2_2amu)
    }
}

/// All channels of total angular momentum J, canonically ordered.
pub fn build_channel_basis(spec: &CollisionSpec, big_j: i32) -> Result<Vec<ChannelState>> {
    spec.validate()?;
    if big_j < 0 {
        return Err(Error::domain("J must be non-negative"));
    }
    let levels = spec.level_list()?;
    let e_total = spec.total_energy();
    let mut out = Vec::new();
    for a in &levels {
        for b in &levels {
            let e_pair = a.energy + b.energy;
            if let Some(cut) = spec.pair_energy_max {
                if e_pair > cut {
                    continue;
                }
            }
            for j12 in (a.j - b.j).abs()..=(a.j + b.j) {
                for l in (big_j - j12).abs()..=(big_j + j12) {
                    let (k, open) = wavenumber(e_total, e_pair, spec.mu, spec.hbar2_2amu);
                    out.push(ChannelState {
                        j1: a.j,
                        v1: a.v,
                        j2: b.j,
                        v2: b.v,
                        j12,
                        l,
                        big_j,
                        channel_energy: e_pair,
                        k,
                        open,
                    });
                }
            }
        }
    }
    if out.is_empty() {
        return Err(Error::domain(format!("empty channel basis at J={big_j}")));
    }
    out.sort_by_key(|c| c.key());
    Ok(out)
}

/// Splits a basis into total-parity blocks; returns (parity, indices) pairs
/// with parity +1 first.
pub fn parity_blocks(basis: &[ChannelState]) -> Vec<(i32, Vec<usize>)> {
    let mut out = Vec::new();
    for p in [1, -1] {
        let idx: Vec<usize> = basis
            .iter()
            .enumerate()
            .filter(|(_, c)| c.key().parity() == p)
            .map(|(i, _)| i)
            .collect();
        if !idx.is_empty() {
            out.push((p, idx));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(e_k: f64, j_max: i32) -> CollisionSpec {
        CollisionSpec::h2_h2(
            e_k,
            [MolState::new(2, 0, 0), MolState::new(0, 0, 0)],
            j_max,
            10,
            &Constants::default(),
        )
    }

    #[test]
    fn level_examples() {
        let l = enumerate_levels(0, 0, 60.8, 4161.2, true).unwrap();
        assert_eq!(l, vec![MolecularLevel { j: 0, v: 0, energy: 0.0 }]);
        let l = enumerate_levels(2, 0, 59.3, 4161.2, true).unwrap();
        assert!((l[1].energy - 355.8).abs() < 1e-12);
        let l = enumerate_levels(3, 0, 60.8, 4161.2, true).unwrap();
        assert_eq!(l.iter().map(|x| x.j).collect::<Vec<_>>(), vec![0, 2]);
        assert!(enumerate_levels(-1, 0, 1.0, 1.0, false).is_err());
    }

    #[test]
    fn level_energy_monotone_in_j() {
        let l = enumerate_levels(8, 2, 60.8, 4161.2, false).unwrap();
        for w in l.windows(2) {
            if w[0].v == w[1].v {
                assert!(w[1].energy >= w[0].energy);
            }
        }
    }

    #[test]
    fn wavenumber_examples() {
        let c = Constants::default();
        assert_eq!(wavenumber(10.0, 10.0, 1.0, c.hbar2_over_2amu_a2_cm1), (0.0, true));
        let (k, open) = wavenumber(c.hbar2_over_2amu_a2_cm1, 0.0, 1.0, c.hbar2_over_2amu_a2_cm1);
        assert!((k - 1.0).abs() < 1e-15 && open);
        let (k, open) = wavenumber(0.0, 16.857, 1.0, 16.857);
        assert!((k - 1.0).abs() < 1e-15 && !open);
    }

    #[test]
    fn single_level_j0() {
        let mut s = spec(4.0, 0);
        s.initial = [MolState::new(0, 0, 0), MolState::new(0, 0, 1)];
        s.v_max = 1;
        s.pair_energy_max = Some(1.0);
        let b = build_channel_basis(&s, 0).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].key(), ChannelKey::new(0, 0, 0, 0, 0, 0));
    }

    #[test]
    fn channel_count_matches_brute_force() {
        let s = spec(4.0, 4);
        let b = build_channel_basis(&s, 2).unwrap();
        // independent count over all integer tuples
        let mut n = 0;
        for j1 in [0, 2, 4] {
            for j2 in [0, 2, 4] {
                for j12 in 0..=20 {
                    for l in 0..=30 {
                        let t1 = j12 >= (j1 - j2 as i32).abs() && j12 <= j1 + j2;
                        let t2 = 2 >= (j12 - l as i32).abs() && 2 <= j12 + l;
                        if t1 && t2 {
                            n += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(b.len(), n);
    }

    #[test]
    fn closed_flags_and_exchange_closure() {
        let s = spec(4.0, 4);
        let e_tot = s.total_energy();
        let b = build_channel_basis(&s, 3).unwrap();
        let keys: std::collections::HashSet<_> = b.iter().map(|c| c.key()).collect();
        for c in &b {
            c.validate(e_tot).unwrap();
            assert!(keys.contains(&c.key().exchanged()));
            assert_eq!(c.open, c.channel_energy <= e_tot);
        }
        assert!(b.iter().any(|c| !c.open));
        let mut sorted = b.clone();
        sorted.sort_by_key(|c| c.key());
        assert_eq!(sorted, b);
    }

    #[test]
    fn rejects_identical_initial_states() {
        let mut s = spec(4.0, 2);
        s.initial = [MolState::new(2, 0, 0), MolState::new(2, 0, 0)];
        assert!(build_channel_basis(&s, 0).is_err());
        let mut s = spec(-1.0, 2);
        s.e_k = -1.0;
        assert!(build_channel_basis(&s, 0).is_err());
    }

    #[test]
    fn parity_blocks_partition() {
        let b = build_channel_basis(&spec(4.0, 4), 4).unwrap();
        let blocks = parity_blocks(&b);
        let total: usize = blocks.iter().map(|(_, i)| i.len()).sum();
        assert_eq!(total, b.len());
    }
}
