use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Number of fractional digits a [`Decimal`] can carry.
pub const MAX_SCALE: u32 = 6;

const UNIT: i128 = 1_000_000;

/// Exact fixed-point decimal with at most six fractional digits.
///
/// Guard comparisons such as `X <= 10` are decided on this type, so there is
/// no rounding anywhere between the lexical form and the comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Decimal {
    micros: i128,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecimalError {
    #[error("`{0}` is not a decimal number")]
    Lexical(String),
    #[error("`{0}` has more than {MAX_SCALE} fractional digits")]
    Scale(String),
    #[error("`{0}` is out of range")]
    Range(String),
}

impl Decimal {
    pub const ZERO: Decimal = Decimal { micros: 0 };

    pub fn from_integer(value: i64) -> Self {
        Decimal {
            micros: value as i128 * UNIT,
        }
    }

    pub fn is_integer(&self) -> bool {
        self.micros % UNIT == 0
    }

    /// True when `text` has the lexical shape of a decimal (`-?digits(.digits)?`).
    pub fn is_lexical(text: &str) -> bool {
        let body = text.strip_prefix('-').unwrap_or(text);
        let (int, frac) = match body.split_once('.') {
            Some((i, f)) => (i, Some(f)),
            None => (body, None),
        };
        !int.is_empty()
            && int.bytes().all(|b| b.is_ascii_digit())
            && frac.is_none_or(|f| !f.is_empty() && f.bytes().all(|b| b.is_ascii_digit()))
    }
}

impl FromStr for Decimal {
    type Err = DecimalError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        if !Decimal::is_lexical(text) {
            return Err(DecimalError::Lexical(text.to_string()));
        }
        let negative = text.starts_with('-');
        let body = text.trim_start_matches('-');
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        let frac = frac.trim_end_matches('0');
        if frac.len() > MAX_SCALE as usize {
            return Err(DecimalError::Scale(text.to_string()));
        }
        let range = || DecimalError::Range(text.to_string());
        let int_part: i128 = int.parse().map_err(|_| range())?;
        let mut frac_part: i128 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| range())?
        };
        for _ in frac.len()..MAX_SCALE as usize {
            frac_part *= 10;
        }
        let magnitude = int_part
            .checked_mul(UNIT)
            .and_then(|m| m.checked_add(frac_part))
            .filter(|m| *m <= i64::MAX as i128 * UNIT)
            .ok_or_else(range)?;
        Ok(Decimal {
            micros: if negative { -magnitude } else { magnitude },
        })
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.micros < 0 { "-" } else { "" };
        let magnitude = self.micros.unsigned_abs();
        let int = magnitude / UNIT as u128;
        let frac = magnitude % UNIT as u128;
        if frac == 0 {
            write!(f, "{sign}{int}")
        } else {
            let digits = format!("{frac:06}");
            write!(f, "{sign}{int}.{}", digits.trim_end_matches('0'))
        }
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_display() {
        assert_eq!(d("8").to_string(), "8");
        assert_eq!(d("8.50").to_string(), "8.5");
        assert_eq!(d("-0.000001").to_string(), "-0.000001");
        assert_eq!(d("010").to_string(), "10");
    }

    #[test]
    fn exact_comparison_at_boundary() {
        assert_eq!(d("10"), d("10.000000"));
        assert!(d("10.000001") > d("10"));
        assert!(d("9.999999") < d("10"));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!("abc".parse::<Decimal>(), Err(DecimalError::Lexical(_))));
        assert!(matches!("1.".parse::<Decimal>(), Err(DecimalError::Lexical(_))));
        assert!(matches!(".5".parse::<Decimal>(), Err(DecimalError::Lexical(_))));
        assert!(matches!("1.0000001".parse::<Decimal>(), Err(DecimalError::Scale(_))));
        assert!(matches!(
            "99999999999999999999999".parse::<Decimal>(),
            Err(DecimalError::Range(_))
        ));
    }
}
