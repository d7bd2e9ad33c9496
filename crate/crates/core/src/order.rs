//! The order parameter of the Rényi family.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A finite order: strictly positive, finite and different from 1.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(a: f64) -> Result<Self> {
        if a.is_finite() && a > 0.0 && a != 1.0 {
            Ok(Alpha(a))
        } else {
            Err(Error::InvalidOrder(a))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn below_one(self) -> bool {
        self.0 < 1.0
    }
}

/// An order of a Rényi measure. The limit orders `0`, `1` and `inf` are
/// separate variants so callers never evaluate a finite formula at its
/// removable singularity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Order {
    Zero,
    One,
    Infinity,
    Finite(Alpha),
}

impl Order {
    /// A finite order; rejects `a <= 0`, `a == 1` and non-finite values.
    pub fn finite(a: f64) -> Result<Self> {
        Alpha::new(a).map(Order::Finite)
    }

    /// Classifies any real: `0`, `1` and `+inf` map to the limit orders.
    pub fn from_value(a: f64) -> Result<Self> {
        if a == 0.0 {
            Ok(Order::Zero)
        } else if a == 1.0 {
            Ok(Order::One)
        } else if a == f64::INFINITY {
            Ok(Order::Infinity)
        } else {
            Order::finite(a)
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Order::Zero => 0.0,
            Order::One => 1.0,
            Order::Infinity => f64::INFINITY,
            Order::Finite(a) => a.get(),
        }
    }

    pub fn as_finite(self) -> Option<Alpha> {
        match self {
            Order::Finite(a) => Some(a),
            _ => None,
        }
    }
}

impl From<Alpha> for Order {
    fn from(a: Alpha) -> Self {
        Order::Finite(a)
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Zero => f.write_str("0"),
            Order::One => f.write_str("1"),
            Order::Infinity => f.write_str("inf"),
            Order::Finite(a) => write!(f, "{}", a.get()),
        }
    }
}

impl std::str::FromStr for Order {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "Infinity" => Ok(Order::Infinity),
            t => {
                let v: f64 = t.parse().map_err(|_| Error::Parse(format!("invalid order {t:?}")))?;
                Order::from_value(v)
            }
        }
    }
}

impl Serialize for Order {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Order::Zero => s.serialize_str("0"),
            Order::One => s.serialize_str("1"),
            Order::Infinity => s.serialize_str("inf"),
            Order::Finite(a) => s.serialize_f64(a.get()),
        }
    }
}

impl<'de> Deserialize<'de> for Order {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(v) => Order::from_value(v),
            Raw::Text(t) => t.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}
