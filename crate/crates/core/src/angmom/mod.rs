//! Angular-momentum special functions: Clebsch–Gordan coefficients, Wigner
//! 3j/6j/9j symbols and spherical harmonics (Condon–Shortley phase).

mod wigner;
mod ylm;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use wigner::{cg, clebsch_gordan, nine_j, six_j, three_j, wigner_3j, wigner_6j, wigner_9j};
pub use ylm::{legendre_normalized_column, spherical_harmonic, ylm};

/// Angular momentum or projection stored as twice its value, so integer and
/// half-integer quantum numbers share one exact representation.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HalfInt {
    twice: i32,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt { twice }
    }

    pub const fn int(v: i32) -> Self {
        HalfInt { twice: 2 * v }
    }

    pub const fn twice(self) -> i32 {
        self.twice
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    pub fn to_f64(self) -> f64 {
        self.twice as f64 / 2.0
    }

    /// The integer value, if this is not a half-integer.
    pub const fn as_int(self) -> Option<i32> {
        if self.is_integer() {
            Some(self.twice / 2)
        } else {
            None
        }
    }

    /// Checks that `self` is a valid magnitude (j ≥ 0).
    pub fn check_magnitude(self) -> Result<Self> {
        if self.twice < 0 {
            return Err(Error::domain(format!("negative angular momentum {self}")));
        }
        Ok(self)
    }

    /// Checks that `m` is a projection compatible with `self` as magnitude:
    /// 2m ≡ 2j (mod 2). Out-of-range |m| > j is not an error here.
    pub fn check_projection(self, m: HalfInt) -> Result<()> {
        self.check_magnitude()?;
        if (self.twice - m.twice).rem_euclid(2) != 0 {
            return Err(Error::domain(format!(
                "projection {m} has the wrong parity for j = {self}"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl From<i32> for HalfInt {
    fn from(v: i32) -> Self {
        HalfInt::int(v)
    }
}

/// (-1)^n for integer n.
#[inline]
pub fn parity_sign(n: i32) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Whether a, b, c (given as twice values) satisfy the triangle rule with
/// integer perimeter.
#[inline]
pub(crate) fn triangle2(a: i32, b: i32, c: i32) -> bool {
    a >= 0
        && b >= 0
        && c >= 0
        && c >= (a - b).abs()
        && c <= a + b
        && (a + b + c) % 2 == 0
}

/// Integer triangle rule.
#[inline]
pub fn triangle(a: i32, b: i32, c: i32) -> bool {
    triangle2(2 * a, 2 * b, 2 * c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_conversion() {
        assert_eq!(HalfInt::int(3).to_string(), "3");
        assert_eq!(HalfInt::from_twice(3).to_string(), "3/2");
        assert_eq!(HalfInt::from_twice(3).as_int(), None);
        assert_eq!(HalfInt::from(2).as_int(), Some(2));
        assert_eq!(HalfInt::from_twice(-1).to_f64(), -0.5);
    }

    #[test]
    fn validation() {
        assert!(HalfInt::int(-1).check_magnitude().is_err());
        assert!(HalfInt::int(1).check_projection(HalfInt::from_twice(1)).is_err());
        assert!(HalfInt::from_twice(3).check_projection(HalfInt::from_twice(-1)).is_ok());
    }

    #[test]
    fn triangle_rule() {
        assert!(triangle(1, 1, 2));
        assert!(triangle(2, 0, 2));
        assert!(!triangle(2, 0, 1));
        assert!(!triangle2(1, 1, 1));
    }
}
