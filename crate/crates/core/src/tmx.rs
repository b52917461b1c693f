//! T-matrix sets: storage, a line-oriented text format, seeded synthesis of
//! unitary sets, and the exchange-relation check.
//!
//! File layout (one item per line, `#` starts a comment line):
//!
//! ```text
//! pairscat-tmx
//! schema 1
//! units energy=cm-1 length=angstrom mass=amu
//! convention T=1-S
//! coupling l,j12->J
//! phase condon-shortley
//! provenance synthetic
//! potential_hash none
//! e_k 4.0000000000000000e0
//! e_total 3.6880000000000001e2
//! mu 1.0079400000000000e0
//! hbar2_over_2amu 1.6857629...e1
//! truncation j_max=2 v_max=0 J_max=3
//! level 0 0 0.0000000000000000e0
//! level 2 0 3.6480000000000001e2
//! records 2
//! 0 0 0 0 0 0 0 0 0 0 0 0 0 1.0000000000000000e-1 -2.5000000000000000e-1
//! ...
//! end
//! ```
//!
//! Each record is `J j1' v1' j2' v2' j12' l' j1 v1 j2 v2 j12 l re im`:
//! final (bra) channel first, then initial (ket). Values are written with 17
//! significant digits so a save/load round trip is exact. There is no M
//! index; T^{JM} is stored once per J.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::angmom::triangle;
use crate::basis::{build_channel_basis, parity_blocks, wavenumber, ChannelKey, ChannelState, CollisionSpec, MolecularLevel};
use crate::ccsolve::{solve_all, t_from_s, PropagationConfig, SMatrixBlock};
use crate::pes::PotentialModel;
use crate::error::{Error, Result};

pub const TMX_SCHEMA: u32 = 1;
const MAGIC: &str = "pairscat-tmx";
const CONVENTION: &str = "T=1-S";
const COUPLING: &str = "l,j12->J";
const PHASE: &str = "condon-shortley";
const UNITS: &str = "energy=cm-1 length=angstrom mass=amu";

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Solved,
    Ingested,
    Synthetic,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Solved => "solved",
            Provenance::Ingested => "ingested",
            Provenance::Synthetic => "synthetic",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "solved" => Some(Provenance::Solved),
            "ingested" => Some(Provenance::Ingested),
            "synthetic" => Some(Provenance::Synthetic),
            _ => None,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Truncation {
    pub j_max: i32,
    pub v_max: i32,
    pub big_j_max: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TmxHeader {
    /// cm⁻¹
    pub e_k: f64,
    /// cm⁻¹
    pub e_total: f64,
    /// amu
    pub mu: f64,
    /// ħ²/(2·amu·Å²) in cm⁻¹
    pub hbar2_2amu: f64,
    pub provenance: Provenance,
    pub potential_hash: Option<String>,
    pub truncation: Truncation,
    pub levels: Vec<MolecularLevel>,
}

impl TmxHeader {
    pub fn from_spec(spec: &CollisionSpec, provenance: Provenance, potential_hash: Option<String>) -> Result<Self> {
        Ok(TmxHeader {
            e_k: spec.e_k,
            e_total: spec.total_energy(),
            mu: spec.mu,
            hbar2_2amu: spec.hbar2_2amu,
            provenance,
            potential_hash,
            truncation: Truncation { j_max: spec.j_max, v_max: spec.v_max, big_j_max: spec.big_j_max },
            levels: spec.level_list()?,
        })
    }
}

type Entry = (ChannelKey, ChannelKey);

/// T^J(bra|ket) for a single collision energy.
#[derive(Clone, Debug, PartialEq)]
pub struct TMatrixSet {
    pub header: TmxHeader,
    entries: BTreeMap<i32, HashMap<Entry, Complex64>>,
}

impl TMatrixSet {
    pub fn new(header: TmxHeader) -> Self {
        TMatrixSet { header, entries: BTreeMap::new() }
    }

    /// Collects T = I − S from solved blocks.
    pub fn from_blocks(header: TmxHeader, blocks: &[SMatrixBlock]) -> Result<Self> {
        let mut set = TMatrixSet::new(header);
        for b in blocks {
            let t = t_from_s(&b.s);
            for (i, ci) in b.open_channels.iter().enumerate() {
                for (j, cj) in b.open_channels.iter().enumerate() {
                    set.insert(b.big_j, ci.key(), cj.key(), t[(i, j)])?;
                }
            }
        }
        Ok(set)
    }

    pub fn insert(&mut self, big_j: i32, bra: ChannelKey, ket: ChannelKey, value: Complex64) -> Result<()> {
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::domain(format!("non-finite T value at J={big_j} ({bra} | {ket})")));
        }
        for c in [&bra, &ket] {
            if !(triangle(c.j1, c.j2, c.j12) && triangle(c.l, c.j12, big_j)) || c.v1 < 0 || c.v2 < 0 {
                return Err(Error::domain(format!("channel ({c}) violates coupling rules at J={big_j}")));
            }
        }
        self.entries.entry(big_j).or_default().insert((bra, ket), value);
        Ok(())
    }

    pub fn get(&self, big_j: i32, bra: &ChannelKey, ket: &ChannelKey) -> Option<Complex64> {
        self.entries.get(&big_j)?.get(&(*bra, *ket)).copied()
    }

    /// Mutable access for perturbation studies.
    pub fn get_mut(&mut self, big_j: i32, bra: &ChannelKey, ket: &ChannelKey) -> Option<&mut Complex64> {
        self.entries.get_mut(&big_j)?.get_mut(&(*bra, *ket))
    }

    pub fn big_js(&self) -> impl Iterator<Item = i32> + '_ {
        self.entries.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(|m| m.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All records in canonical order (J, bra, ket).
    pub fn records(&self) -> Vec<(i32, ChannelKey, ChannelKey, Complex64)> {
        let mut out = Vec::with_capacity(self.len());
        for (&j, m) in &self.entries {
            let mut keys: Vec<&Entry> = m.keys().collect();
            keys.sort();
            out.extend(keys.into_iter().map(|e| (j, e.0, e.1, m[e])));
        }
        out
    }

    /// Applies `f` to every stored value.
    pub fn map_values(&mut self, mut f: impl FnMut(i32, &ChannelKey, &ChannelKey, Complex64) -> Complex64) {
        for (&j, m) in self.entries.iter_mut() {
            for ((bra, ket), v) in m.iter_mut() {
                *v = f(j, bra, ket, *v);
            }
        }
    }

    /// Channels appearing in the J block, sorted.
    pub fn channels(&self, big_j: i32) -> Vec<ChannelKey> {
        let mut keys: Vec<ChannelKey> = self
            .entries
            .get(&big_j)
            .map(|m| m.keys().flat_map(|(a, b)| [*a, *b]).collect())
            .unwrap_or_default();
        keys.sort();
        keys.dedup();
        keys
    }

    pub fn level_energy(&self, j: i32, v: i32) -> Option<f64> {
        self.header.levels.iter().find(|l| l.j == j && l.v == v).map(|l| l.energy)
    }

    /// (k, open) for the molecule pair (j1 v1)(j2 v2) at the set's total energy.
    pub fn pair_wavenumber(&self, j1: i32, v1: i32, j2: i32, v2: i32) -> Option<(f64, bool)> {
        let e = self.level_energy(j1, v1)? + self.level_energy(j2, v2)?;
        let h = &self.header;
        Some(wavenumber(h.e_total, e, h.mu, h.hbar2_2amu))
    }

    /// Structural checks: levels known, exchange partners paired.
    pub fn validate(&self) -> Result<()> {
        let mut missing = Vec::new();
        for (&j, m) in &self.entries {
            for (bra, ket) in m.keys() {
                for c in [bra, ket] {
                    if self.pair_wavenumber(c.j1, c.v1, c.j2, c.v2).is_none() {
                        return Err(Error::domain(format!("channel ({c}) uses a level absent from the header")));
                    }
                }
                let partner = (bra.exchanged(), ket.exchanged());
                if !m.contains_key(&partner) {
                    missing.push(format!("J={j} ({}|{})", partner.0, partner.1));
                }
            }
        }
        if !missing.is_empty() {
            return Err(Error::MissingEntries(missing));
        }
        Ok(())
    }

    /// max |S†S − I| per J over blocks whose open-channel square is complete.
    pub fn unitarity_defects(&self) -> Vec<(i32, f64)> {
        let mut out = Vec::new();
        for j in self.big_js() {
            let ch = self.channels(j);
            let n = ch.len();
            let mut t = DMatrix::<Complex64>::zeros(n, n);
            let mut complete = true;
            for (a, ca) in ch.iter().enumerate() {
                for (b, cb) in ch.iter().enumerate() {
                    match self.get(j, ca, cb) {
                        Some(v) => t[(a, b)] = v,
                        // parity-forbidden entries may be omitted
                        None if ca.parity() != cb.parity() => {}
                        None => complete = false,
                    }
                }
            }
            if complete {
                out.push((j, crate::ccsolve::unitarity_defect(&crate::ccsolve::s_from_t(&t))));
            }
        }
        out
    }

    pub fn to_text(&self) -> Result<String> {
        let h = &self.header;
        let mut s = String::new();
        let num = |x: f64| format!("{x:.16e}");
        writeln!(s, "{MAGIC}").unwrap();
        writeln!(s, "schema {TMX_SCHEMA}").unwrap();
        writeln!(s, "units {UNITS}").unwrap();
        writeln!(s, "convention {CONVENTION}").unwrap();
        writeln!(s, "coupling {COUPLING}").unwrap();
        writeln!(s, "phase {PHASE}").unwrap();
        writeln!(s, "provenance {}", h.provenance.as_str()).unwrap();
        writeln!(s, "potential_hash {}", h.potential_hash.as_deref().unwrap_or("none")).unwrap();
        writeln!(s, "e_k {}", num(h.e_k)).unwrap();
        writeln!(s, "e_total {}", num(h.e_total)).unwrap();
        writeln!(s, "mu {}", num(h.mu)).unwrap();
        writeln!(s, "hbar2_over_2amu {}", num(h.hbar2_2amu)).unwrap();
        let t = h.truncation;
        writeln!(s, "truncation j_max={} v_max={} J_max={}", t.j_max, t.v_max, t.big_j_max).unwrap();
        for l in &h.levels {
            writeln!(s, "level {} {} {}", l.j, l.v, num(l.energy)).unwrap();
        }
        let recs = self.records();
        writeln!(s, "records {}", recs.len()).unwrap();
        for (j, bra, ket, v) in recs {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::domain(format!("non-finite T value at J={j} ({bra} | {ket})")));
            }
            writeln!(s, "{j} {bra} {ket} {} {}", num(v.re), num(v.im)).unwrap();
        }
        writeln!(s, "end").unwrap();
        Ok(s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = self.to_text()?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Parses the text format; `origin` labels diagnostics.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse { path: origin.to_path_buf(), line, message };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let mut next = |what: &str| -> Result<(usize, &str)> {
            lines
                .next()
                .ok_or_else(|| err(text.lines().count(), format!("truncated file: expected {what}")))
        };
        let (ln, magic) = next("file tag")?;
        if magic != MAGIC {
            return Err(err(ln, format!("not a T-matrix file (expected '{MAGIC}')")));
        }

        let field = |ln: usize, line: &str, key: &str| -> Result<String> {
            match line.split_once(char::is_whitespace) {
                Some((k, rest)) if k == key => Ok(rest.trim().to_string()),
                _ => Err(err(ln, format!("expected '{key} ...', found '{line}'"))),
            }
        };
        let float = |ln: usize, s: &str| -> Result<f64> {
            let v: f64 = s.parse().map_err(|_| err(ln, format!("bad number '{s}'")))?;
            if !v.is_finite() {
                return Err(err(ln, format!("non-finite value '{s}'")));
            }
            Ok(v)
        };
        let int = |ln: usize, s: &str| -> Result<i32> { s.parse().map_err(|_| err(ln, format!("bad integer '{s}'"))) };

        let (ln, l) = next("schema")?;
        let schema = field(ln, l, "schema")?;
        if schema != TMX_SCHEMA.to_string() {
            return Err(err(ln, format!("schema version {schema} not supported (expected {TMX_SCHEMA})")));
        }
        for (key, want) in [("units", UNITS), ("convention", CONVENTION), ("coupling", COUPLING), ("phase", PHASE)] {
            let (ln, l) = next(key)?;
            let got = field(ln, l, key)?;
            if got != want {
                return Err(err(ln, format!("{key} '{got}' not supported (expected '{want}')")));
            }
        }
        let (ln, l) = next("provenance")?;
        let p = field(ln, l, "provenance")?;
        let provenance = Provenance::parse(&p).ok_or_else(|| err(ln, format!("unknown provenance '{p}'")))?;
        let (ln, l) = next("potential_hash")?;
        let hash = field(ln, l, "potential_hash")?;
        let potential_hash = (hash != "none").then_some(hash);
        let mut scalars = [0.0; 4];
        for (slot, key) in scalars.iter_mut().zip(["e_k", "e_total", "mu", "hbar2_over_2amu"]) {
            let (ln, l) = next(key)?;
            *slot = float(ln, &field(ln, l, key)?)?;
        }
        let (ln, l) = next("truncation")?;
        let tr = field(ln, l, "truncation")?;
        let mut tvals = [None; 3];
        for part in tr.split_whitespace() {
            let (k, v) = part.split_once('=').ok_or_else(|| err(ln, format!("bad truncation item '{part}'")))?;
            let idx = match k {
                "j_max" => 0,
                "v_max" => 1,
                "J_max" => 2,
                _ => return Err(err(ln, format!("unknown truncation key '{k}'"))),
            };
            tvals[idx] = Some(int(ln, v)?);
        }
        let [Some(j_max), Some(v_max), Some(big_j_max)] = tvals else {
            return Err(err(ln, "truncation needs j_max, v_max and J_max".into()));
        };

        let mut levels = Vec::new();
        let count;
        loop {
            let (ln, l) = next("level or records line")?;
            if let Ok(rest) = field(ln, l, "level") {
                let p: Vec<&str> = rest.split_whitespace().collect();
                if p.len() != 3 {
                    return Err(err(ln, "level line needs 'j v energy'".into()));
                }
                levels.push(MolecularLevel { j: int(ln, p[0])?, v: int(ln, p[1])?, energy: float(ln, p[2])? });
            } else {
                let c = field(ln, l, "records")?;
                count = c.parse::<usize>().map_err(|_| err(ln, format!("bad record count '{c}'")))?;
                break;
            }
        }

        let header = TmxHeader {
            e_k: scalars[0],
            e_total: scalars[1],
            mu: scalars[2],
            hbar2_2amu: scalars[3],
            provenance,
            potential_hash,
            truncation: Truncation { j_max, v_max, big_j_max },
            levels,
        };
        let mut set = TMatrixSet::new(header);
        for _ in 0..count {
            let (ln, l) = next("record")?;
            let p: Vec<&str> = l.split_whitespace().collect();
            if p.len() != 15 {
                return Err(err(ln, format!("record needs 15 fields, found {}", p.len())));
            }
            let q: Vec<i32> = p[..13].iter().map(|s| int(ln, s)).collect::<Result<_>>()?;
            let bra = ChannelKey::new(q[1], q[2], q[3], q[4], q[5], q[6]);
            let ket = ChannelKey::new(q[7], q[8], q[9], q[10], q[11], q[12]);
            let v = Complex64::new(float(ln, p[13])?, float(ln, p[14])?);
            if set.get(q[0], &bra, &ket).is_some() {
                return Err(err(ln, "duplicate record".into()));
            }
            set.insert(q[0], bra, ket, v).map_err(|e| err(ln, e.to_string()))?;
        }
        let (ln, l) = next("end")?;
        if l != "end" {
            return Err(err(ln, format!("expected 'end' after {count} records, found '{l}'")));
        }
        if let Some((ln, _)) = lines.next() {
            return Err(err(ln, "content after 'end'".into()));
        }
        Ok(set)
    }
}

/// Solves every J of `spec` with `model` and collects T = I − S.
pub fn solve_set(spec: &CollisionSpec, model: &PotentialModel, cfg: &PropagationConfig) -> Result<TMatrixSet> {
    let mut spec = spec.clone();
    spec.big_j_max = cfg.big_j_max;
    let blocks = solve_all(&spec, model, cfg)?;
    let header = TmxHeader::from_spec(&spec, Provenance::Solved, Some(model.hash()))?;
    TMatrixSet::from_blocks(header, &blocks)
}

#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub struct SynthOptions {
    /// Make S commute with the signed exchange operator, so that
    /// T(a|b) = ε_a ε_b T(Pa|Pb).
    pub exchange_symmetric: bool,
    /// Real orthogonal S (hence real T).
    pub real: bool,
}

/// Random symmetric unitary S per (J, parity) block on the open channels of
/// `spec`'s basis, reproducible from `seed`; stored as T = I − S.
pub fn synthesize_unitary(spec: &CollisionSpec, seed: u64, opts: SynthOptions) -> Result<TMatrixSet> {
    let header = TmxHeader::from_spec(spec, Provenance::Synthetic, None)?;
    let mut set = TMatrixSet::new(header);
    for big_j in 0..=spec.big_j_max {
        let basis: Vec<ChannelState> = build_channel_basis(spec, big_j)?.into_iter().filter(|c| c.open).collect();
        for (parity, idx) in parity_blocks(&basis) {
            let keys: Vec<ChannelKey> = idx.iter().map(|&i| basis[i].key()).collect();
            let block_seed = seed
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add((2 * big_j as u64) + u64::from(parity < 0));
            let mut rng = ChaCha8Rng::seed_from_u64(block_seed);
            let s = if opts.exchange_symmetric {
                exchange_symmetric_s(&keys, &mut rng, opts.real)
            } else {
                symmetric_unitary(keys.len(), &mut rng, opts.real)
            };
            let t = t_from_s(&s);
            for (a, ka) in keys.iter().enumerate() {
                for (b, kb) in keys.iter().enumerate() {
                    set.insert(big_j, *ka, *kb, t[(a, b)])?;
                }
            }
        }
    }
    Ok(set)
}

/// Haar-distributed unitary (or orthogonal) matrix from the QR of a
/// Gaussian matrix, with R's diagonal phases folded into Q.
fn haar(n: usize, rng: &mut ChaCha8Rng, real: bool) -> DMatrix<Complex64> {
    let z = DMatrix::<Complex64>::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = if real { 0.0 } else { StandardNormal.sample(rng) };
        Complex64::new(re, im)
    });
    let qr = z.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// S = W Wᵀ (complex), or W diag(±1) Wᵀ (real); symmetric and unitary.
fn symmetric_unitary(n: usize, rng: &mut ChaCha8Rng, real: bool) -> DMatrix<Complex64> {
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let w = haar(n, rng, real);
    if real {
        let signs: Vec<f64> = (0..n).map(|_| if rand::Rng::random::<bool>(rng) { 1.0 } else { -1.0 }).collect();
        let mut wd = w.clone();
        for (j, s) in signs.iter().enumerate() {
            for i in 0..n {
                wd[(i, j)] *= *s;
            }
        }
        wd * w.transpose()
    } else {
        &w * w.transpose()
    }
}

/// Symmetric unitary S with ΠSΠ = S for the signed exchange operator
/// Π e_b = ε_b e_{Pb}, assembled in Π's ±1 eigenbasis.
fn exchange_symmetric_s(keys: &[ChannelKey], rng: &mut ChaCha8Rng, real: bool) -> DMatrix<Complex64> {
    let n = keys.len();
    let pos: HashMap<ChannelKey, usize> = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let mut plus: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut minus: Vec<Vec<(usize, f64)>> = Vec::new();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for (a, ka) in keys.iter().enumerate() {
        let pa = pos[&ka.exchanged()];
        let eps = ka.exchange_phase();
        if pa == a {
            if eps > 0.0 { &mut plus } else { &mut minus }.push(vec![(a, 1.0)]);
        } else if a < pa {
            plus.push(vec![(a, h), (pa, eps * h)]);
            minus.push(vec![(a, h), (pa, -eps * h)]);
        }
    }
    let mut s = DMatrix::<Complex64>::zeros(n, n);
    for vecs in [&plus, &minus] {
        let m = vecs.len();
        let sub = symmetric_unitary(m, rng, real);
        // S += Q sub Qᵀ with Q's columns given sparsely
        for (p, vp) in vecs.iter().enumerate() {
            for (q, vq) in vecs.iter().enumerate() {
                let x = sub[(p, q)];
                for &(i, ci) in vp {
                    for &(j, cj) in vq {
                        s[(i, j)] += x * (ci * cj);
                    }
                }
            }
        }
    }
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct ExchangeOffender {
    pub big_j: i32,
    pub bra: String,
    pub ket: String,
    pub abs_deviation: f64,
    pub rel_deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExchangeReport {
    pub compared: usize,
    pub max_abs_deviation: f64,
    pub max_rel_deviation: f64,
    /// Largest relative deviations first.
    pub worst: Vec<ExchangeOffender>,
}

/// Molecule-pair filter ((j1, v1), (j2, v2)) for exchange checks.
pub type PairLabels = [(i32, i32); 2];

/// Checks T(a|b) = ε_a ε_b T(Pa|Pb) over all stored entries whose bra and
/// ket molecule pairs match the optional filters. For a bra with identical
/// molecule labels this is T(a|b) = (−1)^{j12'} T(a|Pb) once parity is
/// conserved. Relative deviations use max(|T1|, |T2|, 1e−6) as scale:
/// |T| ≤ 2 for unitary S, and entries that vanish by symmetry come out of
/// the propagator at ~1e−13, so below the floor the comparison is absolute.
pub fn check_exchange_relation(
    set: &TMatrixSet,
    bra_labels: Option<PairLabels>,
    ket_labels: Option<PairLabels>,
) -> Result<ExchangeReport> {
    const FLOOR: f64 = 1e-6;
    let matches = |k: &ChannelKey, f: &Option<PairLabels>| match f {
        None => true,
        Some([(a, b), (c, d)]) => k.j1 == *a && k.v1 == *b && k.j2 == *c && k.v2 == *d,
    };
    let mut missing = Vec::new();
    let mut all = Vec::new();
    let mut compared = 0;
    for (j, bra, ket, t1) in set.records() {
        if !matches(&bra, &bra_labels) || !matches(&ket, &ket_labels) {
            continue;
        }
        let (pb, pk) = (bra.exchanged(), ket.exchanged());
        let Some(t2) = set.get(j, &pb, &pk) else {
            missing.push(format!("J={j} ({pb}|{pk})"));
            continue;
        };
        compared += 1;
        let d = (t1 - t2 * (bra.exchange_phase() * ket.exchange_phase())).norm();
        let scale = t1.norm().max(t2.norm()).max(FLOOR);
        all.push(ExchangeOffender {
            big_j: j,
            bra: bra.to_string(),
            ket: ket.to_string(),
            abs_deviation: d,
            rel_deviation: d / scale,
        });
    }
    if !missing.is_empty() {
        return Err(Error::MissingEntries(missing));
    }
    if compared == 0 {
        return Err(Error::domain("no T entries match the requested labels"));
    }
    let max_abs = all.iter().map(|o| o.abs_deviation).fold(0.0, f64::max);
    let max_rel = all.iter().map(|o| o.rel_deviation).fold(0.0, f64::max);
    all.sort_by(|a, b| b.rel_deviation.total_cmp(&a.rel_deviation));
    all.truncate(5);
    Ok(ExchangeReport { compared, max_abs_deviation: max_abs, max_rel_deviation: max_rel, worst: all })
}
