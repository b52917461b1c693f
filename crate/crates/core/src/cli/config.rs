//! Run configuration: a TOML file with environment and command-line
//! overrides applied on top, validated against a closed schema.
//!
//! Precedence is file < `PAIRSCAT__SECTION__KEY=value` environment
//! variables < `--set section.key=value` flags. Override values are parsed
//! as TOML literals and fall back to plain strings.

use std::path::{Path, PathBuf};

use log::info;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::basis::{CollisionSpec, LevelModel, MolState};
use crate::ccsolve::{default_big_j_max, PropagationConfig};
use crate::constants::{line_of, Constants};
use crate::error::{Error, Result};
use crate::pes::PotentialModel;
use crate::vibwave::{MorseOscillator, VibGridSpec, VibInitialState, VibSystem};

pub const ENV_PREFIX: &str = "PAIRSCAT__";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub collision: Option<CollisionSection>,
    #[serde(default)]
    pub potential: PotentialSection,
    #[serde(default)]
    pub propagation: PropagationSection,
    #[serde(default)]
    pub constants: ConstantsSection,
    pub vib: Option<VibSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollisionSection {
    pub e_k: f64,
    /// (j, m, v) of molecule state a.
    pub a: [i32; 3],
    /// (j, m, v) of molecule state b.
    pub b: [i32; 3],
    pub j_max: i32,
    #[serde(default)]
    pub v_max: i32,
    pub big_j_max: Option<i32>,
    pub pair_energy_max: Option<f64>,
    #[serde(default = "yes")]
    pub para_only: bool,
    #[serde(default)]
    pub satellite: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    /// `default_h2`, `zero` or `isotropic_lj`.
    pub builtin: Option<String>,
    /// Potential model file (TOML); takes precedence over `builtin`.
    pub file: Option<PathBuf>,
    pub lj_epsilon: Option<f64>,
    pub lj_sigma: Option<f64>,
}

impl Default for PotentialSection {
    fn default() -> Self {
        PotentialSection { builtin: Some("default_h2".into()), file: None, lj_epsilon: None, lj_sigma: None }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationSection {
    pub r_start: Option<f64>,
    pub r_match: Option<f64>,
    pub step: Option<f64>,
    pub step_long: Option<f64>,
    pub r_switch: Option<f64>,
    pub phase_step: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSection {
    pub file: Option<PathBuf>,
    pub rotor_b: Option<f64>,
    pub vib_spacing: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VibSection {
    pub energies: Vec<f64>,
    #[serde(default = "default_betas")]
    pub betas: Vec<f64>,
    #[serde(default = "quarter_pi")]
    pub alpha: f64,
    #[serde(default = "default_v_pair")]
    pub v_pair: [usize; 2],
    #[serde(default = "default_r0")]
    pub r0: f64,
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default = "half")]
    pub stretch_factor: f64,
    #[serde(default)]
    pub oscillator: Option<MorseOscillator>,
    #[serde(default)]
    pub grid: VibGridSpec,
}

fn default_betas() -> Vec<f64> {
    vec![0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::PI]
}
fn quarter_pi() -> f64 {
    std::f64::consts::FRAC_PI_4
}
fn default_v_pair() -> [usize; 2] {
    [0, 2]
}
fn default_r0() -> f64 {
    24.0
}
fn default_width() -> f64 {
    3.0
}
fn half() -> f64 {
    0.5
}

/// One applied override, for logging and provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Override {
    pub source: &'static str,
    pub path: String,
    pub value: String,
}

fn parse_value(raw: &str) -> Value {
    // A bare TOML literal; anything that does not parse is a string.
    let doc = format!("v = {raw}");
    match doc.parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.to_string())),
        Err(_) => Value::String(raw.to_string()),
    }
}

fn set_path(table: &mut Table, path: &str, value: Value) -> Result<()> {
    let keys: Vec<&str> = path.split('.').filter(|k| !k.is_empty()).collect();
    let Some((last, parents)) = keys.split_last() else {
        return Err(Error::config(format!("empty override key {path:?}")));
    };
    let mut cur = table;
    for k in parents {
        let entry = cur.entry(k.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(format!("override {path:?}: {k:?} is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

/// `section.key=value` pairs from PAIRSCAT__SECTION__KEY variables.
pub fn env_overrides(vars: impl IntoIterator<Item = (String, String)>) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = vars
        .into_iter()
        .filter_map(|(k, v)| {
            k.strip_prefix(ENV_PREFIX)
                .map(|rest| (rest.split("__").map(str::to_lowercase).collect::<Vec<_>>().join("."), v))
        })
        .collect();
    out.sort();
    out
}

impl RunConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        Self::layered(text, origin, &[], &[]).map(|(c, _)| c)
    }

    /// File text, then environment pairs, then `--set` pairs.
    pub fn layered(
        text: &str,
        origin: &Path,
        env: &[(String, String)],
        flags: &[String],
    ) -> Result<(Self, Vec<Override>)> {
        let mut table: Table = text.parse().map_err(|e: toml::de::Error| Error::Parse {
            path: origin.to_path_buf(),
            line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
            message: e.message().to_string(),
        })?;
        let mut applied = Vec::new();
        for (k, v) in env {
            set_path(&mut table, k, parse_value(v))?;
            applied.push(Override { source: "env", path: k.clone(), value: v.clone() });
        }
        for f in flags {
            let (k, v) = f
                .split_once('=')
                .ok_or_else(|| Error::config(format!("--set expects section.key=value, got {f:?}")))?;
            set_path(&mut table, k.trim(), parse_value(v.trim()))?;
            applied.push(Override { source: "flag", path: k.trim().to_string(), value: v.trim().to_string() });
        }
        for o in &applied {
            info!("config override from {}: {} = {}", o.source, o.path, o.value);
        }
        let cfg: RunConfig = Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::config(format!("{}: {}", origin.display(), e.message())))?;
        cfg.validate()?;
        Ok((cfg, applied))
    }

    pub fn load(path: &Path, env: &[(String, String)], flags: &[String]) -> Result<(Self, Vec<Override>)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::layered(&text, path, env, flags)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(p) = &self.potential.builtin {
            if !["default_h2", "zero", "isotropic_lj"].contains(&p.as_str()) {
                return Err(Error::config(format!(
                    "potential.builtin {p:?} unknown (default_h2, zero, isotropic_lj)"
                )));
            }
        }
        if let Some(v) = &self.vib {
            if v.energies.is_empty() {
                return Err(Error::config("vib.energies is empty"));
            }
        }
        Ok(())
    }

    pub fn constants(&self) -> Result<Constants> {
        let mut c = match &self.constants.file {
            Some(p) => Constants::load(p)?,
            None => Constants::from_env()?,
        };
        if let Some(b) = self.constants.rotor_b {
            c.b_cm1 = b;
        }
        if let Some(v) = self.constants.vib_spacing {
            c.vib_spacing_cm1 = v;
        }
        Ok(c)
    }

    pub fn potential(&self) -> Result<PotentialModel> {
        if let Some(f) = &self.potential.file {
            return PotentialModel::load(f);
        }
        match self.potential.builtin.as_deref().unwrap_or("default_h2") {
            "zero" => Ok(PotentialModel::zero()),
            "isotropic_lj" => Ok(PotentialModel::isotropic_lj(
                self.potential.lj_epsilon.unwrap_or(24.0),
                self.potential.lj_sigma.unwrap_or(3.03),
            )),
            _ => Ok(PotentialModel::default_h2()),
        }
    }

    fn collision_section(&self) -> Result<&CollisionSection> {
        self.collision.as_ref().ok_or_else(|| Error::config("missing [collision] section"))
    }

    pub fn pair_states(&self) -> Result<(MolState, MolState)> {
        let c = self.collision_section()?;
        Ok((MolState::new(c.a[0], c.a[1], c.a[2]), MolState::new(c.b[0], c.b[1], c.b[2])))
    }

    /// Collision spec at the configured energy, or at `e_k` when given.
    pub fn collision_spec(&self, e_k: Option<f64>) -> Result<CollisionSpec> {
        let c = self.collision_section()?;
        let consts = self.constants()?;
        let (a, b) = self.pair_states()?;
        let mut spec = CollisionSpec::h2_h2(e_k.unwrap_or(c.e_k), [a, b], c.j_max, 0, &consts);
        spec.v_max = c.v_max;
        spec.pair_energy_max = c.pair_energy_max;
        spec.para_only = c.para_only;
        spec.satellite = c.satellite;
        spec.levels = LevelModel::from_constants(&consts);
        spec.big_j_max = match c.big_j_max {
            Some(j) => j,
            None => default_big_j_max(&spec)?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn propagation(&self, spec: &CollisionSpec) -> Result<PropagationConfig> {
        let p = &self.propagation;
        let mut cfg = PropagationConfig::for_energy(spec.e_k, spec.big_j_max);
        if let Some(x) = p.r_start {
            cfg.r_start = x;
        }
        if let Some(x) = p.r_match {
            cfg.r_match = x;
        }
        if let Some(x) = p.step {
            cfg.step = x;
        }
        if let Some(x) = p.step_long {
            cfg.step_long = x;
        }
        if let Some(x) = p.r_switch {
            cfg.r_switch = x;
        }
        if let Some(x) = p.phase_step {
            cfg.phase_step = x;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn vib_system(&self) -> Result<(VibSystem, VibInitialState, &VibSection)> {
        let v = self.vib.as_ref().ok_or_else(|| Error::config("missing [vib] section"))?;
        let mut sys = VibSystem::new(v.grid.clone(), self.potential()?, &self.constants()?);
        sys.stretch_factor = v.stretch_factor;
        if let Some(o) = &v.oscillator {
            sys.oscillator = o.clone();
        }
        let init = VibInitialState {
            alpha: v.alpha,
            beta: 0.0,
            v_pair: (v.v_pair[0], v.v_pair[1]),
            energy: v.energies[0],
            r0: v.r0,
            width: v.width,
        };
        Ok((sys, init, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
[collision]
e_k = 4.0
a = [2, 0, 0]
b = [0, 0, 0]
j_max = 2
big_j_max = 3
"#;

    #[test]
    fn unknown_keys_are_rejected() {
        let e = RunConfig::from_toml_str(&format!("{BASIC}\nbogus = 1\n"), Path::new("x.toml")).unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
        let e = RunConfig::from_toml_str(&format!("{BASIC}\n[potential]\nbuiltn = \"zero\"\n"), Path::new("x.toml"))
            .unwrap_err();
        assert!(matches!(e, Error::Config(_)));
    }

    #[test]
    fn precedence_file_env_flag() {
        let env = env_overrides(vec![
            ("PAIRSCAT__COLLISION__E_K".to_string(), "8.0".to_string()),
            ("PAIRSCAT__COLLISION__J_MAX".to_string(), "4".to_string()),
            ("UNRELATED".to_string(), "1".to_string()),
        ]);
        assert_eq!(env.len(), 2);
        let flags = vec!["collision.e_k=16".to_string(), "potential.builtin=zero".to_string()];
        let (cfg, applied) = RunConfig::layered(BASIC, Path::new("x.toml"), &env, &flags).unwrap();
        let c = cfg.collision.as_ref().unwrap();
        assert_eq!(c.e_k, 16.0);
        assert_eq!(c.j_max, 4);
        assert_eq!(cfg.potential.builtin.as_deref(), Some("zero"));
        assert_eq!(applied.len(), 4);
        assert_eq!(applied[0].source, "env");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match RunConfig::from_toml_str("[collision]\ne_k = = 3\n", Path::new("bad.toml")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn spec_and_propagation_from_config() {
        let cfg = RunConfig::from_toml_str(&format!("{BASIC}\n[propagation]\nr_match = 25.0\n"), Path::new("x"))
            .unwrap();
        let spec = cfg.collision_spec(None).unwrap();
        assert_eq!(spec.big_j_max, 3);
        assert_eq!(cfg.propagation(&spec).unwrap().r_match, 25.0);
    }
}
