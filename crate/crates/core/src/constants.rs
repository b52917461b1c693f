//! Physical constants and the unit system.
//!
//! Energies are in cm⁻¹, lengths in Å, masses in amu. The only conversion
//! needed by the dynamics is ħ²/(2·amu·Å²) expressed in cm⁻¹, so that
//! k² [Å⁻²] = μ [amu] · E [cm⁻¹] / `hbar2_over_2amu_a2_cm1`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable naming a constants file that overrides the defaults.
pub const CONSTANTS_ENV: &str = "PAIRSCAT_CONSTANTS";

pub const CONSTANTS_SCHEMA: u32 = 1;

// CODATA 2018 exact / recommended values, SI.
const HBAR_J_S: f64 = 1.054_571_817e-34;
const AMU_KG: f64 = 1.660_539_066_60e-27;
const PLANCK_J_S: f64 = 6.626_070_15e-34;
const LIGHT_CM_S: f64 = 2.997_924_58e10;
const ANGSTROM_M: f64 = 1e-10;

/// ħ²/(2·amu·Å²) in cm⁻¹, from the SI constants above (≈ 16.8576).
pub fn hbar2_over_2amu_a2_cm1() -> f64 {
    let joules = HBAR_J_S * HBAR_J_S / (2.0 * AMU_KG * ANGSTROM_M * ANGSTROM_M);
    joules / (PLANCK_J_S * LIGHT_CM_S)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    pub schema: u32,
    pub hbar2_over_2amu_a2_cm1: f64,
    #[serde(rename = "mass_H2_amu")]
    pub mass_h2_amu: f64,
    /// Rigid-rotor constant of H₂. 60.8 cm⁻¹ puts j=2 at 364.8 cm⁻¹.
    #[serde(rename = "B_cm1")]
    pub b_cm1: f64,
    pub vib_spacing_cm1: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            schema: CONSTANTS_SCHEMA,
            hbar2_over_2amu_a2_cm1: hbar2_over_2amu_a2_cm1(),
            mass_h2_amu: 2.015_88,
            b_cm1: 60.8,
            vib_spacing_cm1: 4161.2,
        }
    }
}

impl Constants {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let c: Constants = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.span().map(|s| line_of(&text, s.start)).unwrap_or(0),
            message: e.message().to_string(),
        })?;
        if c.schema != CONSTANTS_SCHEMA {
            return Err(Error::config(format!(
                "constants schema {} not supported (expected {})",
                c.schema, CONSTANTS_SCHEMA
            )));
        }
        if !(c.hbar2_over_2amu_a2_cm1 > 0.0 && c.mass_h2_amu > 0.0 && c.b_cm1 >= 0.0) {
            return Err(Error::config("constants must be positive"));
        }
        Ok(c)
    }

    /// Defaults, or the file named by `PAIRSCAT_CONSTANTS` when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CONSTANTS_ENV) {
            Some(p) => Self::load(Path::new(&p)),
            None => Ok(Self::default()),
        }
    }

    /// Reduced mass of two H₂ molecules.
    pub fn mu_h2_h2(&self) -> f64 {
        self.mass_h2_amu / 2.0
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("constants serialize")
    }
}

pub(crate) fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}
