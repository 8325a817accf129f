//! The ψ_s profile family.
//!
//! ψ_s(t) = (s/2)·[R − ln((1+R)/2) − 1] with R = √(1 + 4t²/s²), extended by
//! ψ_0(t) = t and ψ_∞(t) = t².

use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::profile::AdmissibleProfile;

/// The parameter s ∈ [0, ∞) ∪ {∞}.
///
/// Serialized as a JSON number, or as the string `"inf"` for the Gaussian end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SParam {
    Finite(f64),
    Infinite,
}

pub type PsiS = SParam;

impl SParam {
    pub fn new(s: f64) -> Result<Self> {
        if s.is_nan() || s < 0.0 {
            return Err(Error::InvalidInput(format!("s must be >= 0, got {s}")));
        }
        Ok(if s.is_infinite() {
            SParam::Infinite
        } else {
            SParam::Finite(s)
        })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, SParam::Finite(s) if *s == 0.0)
    }

    /// The value as a float, with `f64::INFINITY` for the Gaussian end.
    pub fn as_f64(&self) -> f64 {
        match self {
            SParam::Finite(s) => *s,
            SParam::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for SParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SParam::Finite(s) => write!(f, "{s}"),
            SParam::Infinite => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for SParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if matches!(t, "inf" | "Inf" | "infinity" | "∞") {
            return Ok(SParam::Infinite);
        }
        let v: f64 = t
            .parse()
            .map_err(|_| Error::InvalidInput(format!("cannot parse s = {t:?}")))?;
        SParam::new(v)
    }
}

impl Serialize for SParam {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SParam::Finite(s) => ser.serialize_f64(*s),
            SParam::Infinite => ser.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for SParam {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = SParam;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a nonnegative number or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<SParam, E> {
                SParam::new(v).map_err(E::custom)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<SParam, E> {
                Ok(SParam::Finite(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<SParam, E> {
                SParam::new(v as f64).map_err(E::custom)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<SParam, E> {
                v.parse().map_err(E::custom)
            }
        }
        de.deserialize_any(V)
    }
}

/// Ψ_s(q) = ψ_s(√q) for finite s > 0, stable for both small and large q/s².
pub(crate) fn psi_s_of_square(s: f64, q: f64) -> f64 {
    let u = 4.0 * q / (s * s);
    if u < 1e-8 {
        return q / (2.0 * s) - q * q / (4.0 * s * s * s);
    }
    if !u.is_finite() {
        return f64::INFINITY;
    }
    let r = (1.0 + u).sqrt();
    let x = u / (r + 1.0);
    0.5 * s * (x - (0.5 * x).ln_1p())
}

/// dΨ_s/dq and d²Ψ_s/dq².
pub(crate) fn psi_s_square_derivatives(s: f64, q: f64) -> (f64, f64) {
    let r = (1.0 + 4.0 * q / (s * s)).sqrt();
    let d1 = 1.0 / (s * (1.0 + r));
    let d2 = -2.0 / (s * s * s * r * (1.0 + r) * (1.0 + r));
    (d1, d2)
}

/// The t solving ψ_s(t) = v for finite s > 0.
pub(crate) fn psi_s_inverse(s: f64, v: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    if v.is_infinite() {
        return f64::INFINITY;
    }
    // with y = R − 1 the equation reads y − ln(1 + y/2) = 2v/s, convex in y
    let x = 2.0 * v / s;
    let mut y = 2.0 * x;
    for _ in 0..100 {
        let g = y - (0.5 * y).ln_1p() - x;
        let dg = (1.0 + y) / (2.0 + y);
        let step = g / dg;
        y -= step;
        if step.abs() <= 1e-16 * y.max(1e-300) {
            break;
        }
    }
    0.5 * s * (y * (y + 2.0)).sqrt()
}

/// Evaluates ψ_s(t).
pub fn psi_s_eval(s: SParam, t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidInput(format!("t must be >= 0, got {t}")));
    }
    Ok(psi_s_value(s, t))
}

pub(crate) fn psi_s_value(s: SParam, t: f64) -> f64 {
    match s {
        SParam::Infinite => t * t,
        SParam::Finite(s) if s == 0.0 => t,
        SParam::Finite(s) => psi_s_of_square(s, t * t),
    }
}

/// The admissible profile ψ_s.
pub fn profile_of(s: SParam) -> AdmissibleProfile {
    AdmissibleProfile::Psi { s }
}

/// Checks that s ↦ ψ_s(√s·t) is nondecreasing along `s_grid` and that
/// Φ'(z) = z / (4√(z+1)(1+√(z+1))²) is positive on sampled z.
pub fn scaled_monotonicity_check(t: f64, s_grid: &[f64]) -> bool {
    const SLACK: f64 = 1e-12;
    if s_grid.iter().any(|&s| s < 1.0) || s_grid.windows(2).any(|w| w[1] <= w[0]) {
        return false;
    }
    let values: Vec<f64> = s_grid
        .iter()
        .map(|&s| psi_s_value(SParam::Finite(s), s.sqrt() * t))
        .collect();
    let monotone = values.windows(2).all(|w| w[1] >= w[0] - SLACK);
    let derivative_positive = s_grid.iter().all(|&s| {
        let z = t * t / s;
        let r = (z + 1.0).sqrt();
        let phi = z / (4.0 * r * (1.0 + r) * (1.0 + r));
        z == 0.0 || phi > 0.0
    });
    monotone && derivative_positive
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn anchor_values() {
        for s in [0.0, 0.3, 2.0, 1e5] {
            assert_eq!(psi_s_eval(SParam::Finite(s), 0.0).unwrap(), 0.0);
        }
        // mpmath at 30 digits: 1 − ln 1.5
        let v = psi_s_eval(SParam::Finite(2.0), 3f64.sqrt()).unwrap();
        assert!((v - 0.594_534_891_891_835_6).abs() < 1e-15, "{v}");
        assert_eq!(psi_s_eval(SParam::Infinite, 2.0).unwrap(), 4.0);
        assert!(psi_s_eval(SParam::Finite(1.0), -1.0).is_err());
    }

    #[test]
    fn series_branch_is_continuous() {
        let s = 3.0;
        // u = 4q/s² just above the switch at 1e-8, closed form vs series
        let q = 1e-8 * s * s / 4.0 * (1.0 + 1e-6);
        let closed = psi_s_of_square(s, q);
        let series = q / (2.0 * s) - q * q / (4.0 * s * s * s);
        assert!((closed - series).abs() <= 1e-12 * series);
    }

    #[test]
    fn gaussian_scaling_limit() {
        let v = psi_s_value(SParam::Finite(1e6), 1e3);
        assert!((v - 0.5).abs() < 1e-5, "{v}");
    }

    #[test]
    fn scaled_monotone_grid() {
        let grid: Vec<f64> = (0..=10).map(|k| 2f64.powi(k)).collect();
        assert!(scaled_monotonicity_check(1.0, &grid));
        assert!(scaled_monotonicity_check(0.0, &grid));
        assert!(!scaled_monotonicity_check(1.0, &[0.5, 1.0]));
    }

    #[test]
    fn sparam_json() {
        let v: SParam = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(v, SParam::Infinite);
        let v: SParam = serde_json::from_str("2.5").unwrap();
        assert_eq!(v, SParam::Finite(2.5));
        assert_eq!(serde_json::to_string(&SParam::Infinite).unwrap(), "\"inf\"");
        assert!(serde_json::from_str::<SParam>("-1").is_err());
    }

    proptest! {
        #[test]
        fn inverse_roundtrip(s in 0.01f64..100.0, t in 0.0f64..1e3) {
            let v = psi_s_value(SParam::Finite(s), t);
            let back = psi_s_inverse(s, v);
            prop_assert!((back - t).abs() <= 1e-8 * (1.0 + t));
        }

        #[test]
        fn increasing_in_s(t in 0.01f64..50.0, s in 0.01f64..100.0, k in 1.01f64..10.0) {
            // ℓ_s = e^{-ψ_s} increases in s, i.e. ψ_s decreases
            let a = psi_s_value(SParam::Finite(s), t);
            let b = psi_s_value(SParam::Finite(s * k), t);
            prop_assert!(b <= a);
        }
    }

    #[test]
    fn convex_on_log_grid() {
        for s in [0.0, 0.5, 1.0, 2.0, 10.0, 100.0] {
            let ts: Vec<f64> = (0..400).map(|k| 1e-4 * 1.05f64.powi(k)).collect();
            for w in ts.windows(3) {
                let (t1, t2, t3) = (w[0], w[1], w[2]);
                let p = |t| psi_s_value(SParam::Finite(s), t);
                let lin = p(t1) + (p(t3) - p(t1)) * (t2 - t1) / (t3 - t1);
                assert!(p(t2) <= lin + 1e-10, "s={s} t={t2}");
            }
        }
    }
}
