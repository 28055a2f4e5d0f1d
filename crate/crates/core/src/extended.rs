//! Reals extended by a distinguished `+inf`.
//!
//! Divergences that blow up because of a support mismatch are a semantic
//! outcome, not an overflow, so they get their own variant rather than
//! `f64::INFINITY` leaking into arithmetic.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Wraps an `f64`, mapping `+inf` to [`ExtReal::Infinite`].
    pub fn from_f64(x: f64) -> Self {
        if x == f64::INFINITY {
            ExtReal::Infinite
        } else {
            ExtReal::Finite(x)
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::Infinite => None,
        }
    }

    /// Value as `f64`, with `Infinite` mapped to `f64::INFINITY`.
    pub fn to_f64(&self) -> f64 {
        match *self {
            ExtReal::Finite(x) => x,
            ExtReal::Infinite => f64::INFINITY,
        }
    }

    pub fn map(self, f: impl FnOnce(f64) -> f64) -> Self {
        match self {
            ExtReal::Finite(x) => ExtReal::from_f64(f(x)),
            ExtReal::Infinite => ExtReal::Infinite,
        }
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::from_f64(x)
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            (ExtReal::Finite(_), ExtReal::Infinite) => Some(Ordering::Less),
            (ExtReal::Infinite, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::Infinite, ExtReal::Infinite) => Some(Ordering::Equal),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => s.serialize_f64(*x),
            ExtReal::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(ExtReal::Finite(x)),
            Raw::Str(s) if s == "inf" => Ok(ExtReal::Infinite),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("expected number or \"inf\", got {s:?}"))),
        }
    }
}
