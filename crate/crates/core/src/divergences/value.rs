use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// A divergence or exponent in bits, with `+∞` as a first-class value.
///
/// Arithmetic follows the extended reals: `∞` absorbs finite summands and
/// compares greater than every finite value. JSON encodes `∞` as `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DivergenceValue {
    Finite(f64),
    Infinite,
}

impl DivergenceValue {
    pub const ZERO: Self = DivergenceValue::Finite(0.0);

    pub fn from_f64(x: f64) -> Self {
        if x == f64::INFINITY {
            DivergenceValue::Infinite
        } else {
            DivergenceValue::Finite(x)
        }
    }

    /// The value as an `f64`; `+∞` maps to `f64::INFINITY`.
    pub fn value(&self) -> f64 {
        match *self {
            DivergenceValue::Finite(x) => x,
            DivergenceValue::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, DivergenceValue::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            DivergenceValue::Finite(x) => Some(x),
            DivergenceValue::Infinite => None,
        }
    }

    pub fn add(self, other: Self) -> Self {
        match (self, other) {
            (DivergenceValue::Finite(a), DivergenceValue::Finite(b)) => DivergenceValue::Finite(a + b),
            _ => DivergenceValue::Infinite,
        }
    }

    pub fn scale(self, c: f64) -> Self {
        assert!(c >= 0.0, "extended values only scale by non-negative factors");
        match self {
            DivergenceValue::Finite(a) => DivergenceValue::Finite(a * c),
            DivergenceValue::Infinite if c == 0.0 => DivergenceValue::ZERO,
            DivergenceValue::Infinite => DivergenceValue::Infinite,
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl PartialOrd for DivergenceValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value().partial_cmp(&other.value())
    }
}

impl From<f64> for DivergenceValue {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl fmt::Display for DivergenceValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DivergenceValue::Finite(x) => write!(f, "{x}"),
            DivergenceValue::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for DivergenceValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            DivergenceValue::Finite(x) => s.serialize_f64(*x),
            DivergenceValue::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for DivergenceValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = DivergenceValue;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, x: f64) -> Result<Self::Value, E> {
                Ok(DivergenceValue::Finite(x))
            }
            fn visit_i64<E: de::Error>(self, x: i64) -> Result<Self::Value, E> {
                Ok(DivergenceValue::Finite(x as f64))
            }
            fn visit_u64<E: de::Error>(self, x: u64) -> Result<Self::Value, E> {
                Ok(DivergenceValue::Finite(x as f64))
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<Self::Value, E> {
                if s == "inf" {
                    Ok(DivergenceValue::Infinite)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(s), &self))
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Which quantum Rényi family to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenyiFamily {
    Petz,
    Sandwiched,
}

impl fmt::Display for RenyiFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RenyiFamily::Petz => "petz",
            RenyiFamily::Sandwiched => "sandwiched",
        })
    }
}

impl std::str::FromStr for RenyiFamily {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "petz" => Ok(RenyiFamily::Petz),
            "sandwiched" => Ok(RenyiFamily::Sandwiched),
            other => Err(crate::Error::Domain(format!("unknown Rényi family '{other}'"))),
        }
    }
}

/// Where an optimization over the Rényi order ended up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "alpha")]
pub enum AlphaStar {
    /// Interior optimizer.
    Value(f64),
    /// Supremum approached as `α → 1`.
    LimitOne,
    /// Supremum approached as `α → ∞`.
    Infinity,
    /// Supremum approached as `α → 0`.
    LimitZero,
    /// No order is relevant (e.g. a closed-form or infinite value).
    NotApplicable,
}

impl AlphaStar {
    pub fn is_boundary(&self) -> bool {
        !matches!(self, AlphaStar::Value(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_dominates() {
        let a = DivergenceValue::Finite(3.0);
        assert_eq!(a.add(DivergenceValue::Infinite), DivergenceValue::Infinite);
        assert!(DivergenceValue::Infinite > a);
        assert_eq!(a.max(DivergenceValue::Infinite), DivergenceValue::Infinite);
        assert_eq!(a.min(DivergenceValue::Infinite), a);
    }

    #[test]
    fn json_encoding() {
        let inf = serde_json::to_string(&DivergenceValue::Infinite).unwrap();
        assert_eq!(inf, "\"inf\"");
        let back: DivergenceValue = serde_json::from_str(&inf).unwrap();
        assert_eq!(back, DivergenceValue::Infinite);
        let x: DivergenceValue = serde_json::from_str("0.5").unwrap();
        assert_eq!(x, DivergenceValue::Finite(0.5));
        assert!(serde_json::from_str::<DivergenceValue>("\"nan\"").is_err());
    }
}
