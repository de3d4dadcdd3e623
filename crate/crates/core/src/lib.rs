//! # mmslab-core
//!
//! Numerical invariants of finite metric measure spaces (pm-spaces) and the
//! algebra of atom vectors that parameterize scale-invariant pyramids.
//!
//! A [`FinitePmSpace`] is a distance matrix together with a probability mass
//! vector; every module consumes it.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`space`] | validation, scaling, l_p products, mm-isomorphism, Prokhorov / Ky Fan / total variation, entropy, McShane extension |
//! | [`boxmetric`] | box-distance bounds and an exact tiny-instance solver |
//! | [`order`] | Lipschitz-order domination search and witnesses |
//! | [`observables`] | partial / observable diameter, separation distance, variance family |
//! | [`functional`] | Poincare and log-Sobolev constants of 1-D weighted grids |
//! | [`atoms`] | atom vectors, contraction, products, membership, dissipation |
//! | [`generators`] | example spaces and approximation sequences |
//! | [`experiment`] | experiment plans, CSV/JSON reports, pairwise comparison |
//!
//! Values that are only estimates or bounds carry a [`Certificate`] so they
//! are never confused with exact values.

pub mod atoms;
pub mod boxmetric;
pub mod experiment;
pub mod flow;
pub mod functional;
pub mod generators;
pub mod observables;
pub mod order;
pub mod space;
pub mod special;

mod error;

pub use error::{Error, Result, Violation};
pub use space::{Coupling, FinitePmSpace, LipschitzFunction};

/// Tolerance used when validating distance matrices and mass vectors.
pub const VALIDATION_TOL: f64 = 1e-12;

/// Tolerance used when comparing derived real quantities for equality.
pub const EQ_TOL: f64 = 1e-9;

/// How much trust a reported number deserves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Certificate {
    /// Computed exactly (up to floating point).
    Exact,
    /// A one-sided bound; the field name says which side.
    Bound,
    /// A statistical or heuristic estimate.
    Estimate,
}

impl std::fmt::Display for Certificate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Certificate::Exact => "exact",
            Certificate::Bound => "bound",
            Certificate::Estimate => "estimate",
        })
    }
}

/// Formats a real for CSV/JSON output, printing `inf` for infinities.
pub fn fmt_real(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

/// JSON value for a real, using the string `"inf"` for infinities.
pub fn json_real(x: f64) -> serde_json::Value {
    if x.is_finite() {
        serde_json::json!(x)
    } else {
        serde_json::Value::String(fmt_real(x))
    }
}

/// Serde adapter for reals that may be infinite, written as `"inf"`.
pub mod real {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_str(&super::fmt_real(*x))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Str(s) => parse(&s).ok_or_else(|| de::Error::custom(format!("not a real: {s:?}"))),
        }
    }

    /// Parses a real, accepting `inf` and `-inf`.
    pub fn parse(s: &str) -> Option<f64> {
        match s.trim() {
            "inf" | "+inf" | "infinity" => Some(f64::INFINITY),
            "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
            t => t.parse().ok().filter(|x: &f64| x.is_finite()),
        }
    }
}
