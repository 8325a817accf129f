//! Admissible one-dimensional profiles ψ on [0, ∞).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::legendre;
use crate::psi::{self, SParam};

/// A convex profile ψ with ψ(0) = 0, nondecreasing, diverging at the end of
/// its effective domain. `+∞` values are returned as `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AdmissibleProfile {
    /// ψ_s.
    Psi { s: SParam },
    /// scale·t^exponent, exponent ≥ 1.
    Power { scale: f64, exponent: f64 },
    /// max(0, t − τ): flat on [0, τ], slope one afterwards.
    Flat { tau: f64 },
    /// 0 on [0, τ], +∞ beyond.
    Indicator { tau: f64 },
    /// −(s/2)·ln(1 − t²) on [0, 1), +∞ from 1 on; the profile of h-functions.
    HeightCap { s: f64 },
    /// Monotone conjugate r ↦ sup_{t≥0} (rt − ψ(t)) of another profile.
    Conjugate { of: Box<AdmissibleProfile> },
}

/// How the solver should encode the constraint ψ(|L|) ≤ w.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintForm {
    /// Through Ψ(q) = ψ(√q), smooth in q = |L|².
    Quadratic,
    /// Through |L| ≤ u(w) with u the upper inverse of ψ.
    Inverse,
}

impl AdmissibleProfile {
    pub fn psi(s: SParam) -> Self {
        AdmissibleProfile::Psi { s }
    }

    pub fn power(scale: f64, exponent: f64) -> Result<Self> {
        if !(scale > 0.0 && exponent >= 1.0 && scale.is_finite() && exponent.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "power profile needs scale > 0 and exponent >= 1, got {scale}, {exponent}"
            )));
        }
        Ok(AdmissibleProfile::Power { scale, exponent })
    }

    pub fn flat(tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidInput(format!("flat profile needs tau > 0, got {tau}")));
        }
        Ok(AdmissibleProfile::Flat { tau })
    }

    pub fn indicator(tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidInput(format!("indicator needs tau > 0, got {tau}")));
        }
        Ok(AdmissibleProfile::Indicator { tau })
    }

    /// The profile χ with h_B = e^{−χ(|x|)}: indicator of \[0,1\] at s = 0, t² at s = ∞.
    pub fn height_cap(s: SParam) -> Self {
        match s {
            SParam::Infinite => AdmissibleProfile::Psi {
                s: SParam::Infinite,
            },
            SParam::Finite(v) if v == 0.0 => AdmissibleProfile::Indicator { tau: 1.0 },
            SParam::Finite(v) => AdmissibleProfile::HeightCap { s: v },
        }
    }

    pub fn conjugate(of: AdmissibleProfile) -> Self {
        // closed forms where they are cheap
        match &of {
            AdmissibleProfile::Power { scale, exponent } if *exponent == 2.0 => {
                AdmissibleProfile::Power {
                    scale: 0.25 / scale,
                    exponent: 2.0,
                }
            }
            AdmissibleProfile::Psi { s: SParam::Infinite } => AdmissibleProfile::Power {
                scale: 0.25,
                exponent: 2.0,
            },
            AdmissibleProfile::Indicator { tau } => AdmissibleProfile::Power {
                scale: *tau,
                exponent: 1.0,
            },
            AdmissibleProfile::Conjugate { of: inner } => (**inner).clone(),
            _ => AdmissibleProfile::Conjugate { of: Box::new(of) },
        }
    }

    /// ψ(t), `+∞` outside the effective domain.
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.abs();
        match self {
            AdmissibleProfile::Psi { s } => psi::psi_s_value(*s, t),
            AdmissibleProfile::Power { scale, exponent } => scale * t.powf(*exponent),
            AdmissibleProfile::Flat { tau } => (t - tau).max(0.0),
            AdmissibleProfile::Indicator { tau } => {
                if t <= *tau {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            AdmissibleProfile::HeightCap { s } => {
                if t < 1.0 {
                    -0.5 * s * (-t * t).ln_1p()
                } else {
                    f64::INFINITY
                }
            }
            AdmissibleProfile::Conjugate { of } => legendre::conjugate_point(of, t).value,
        }
    }

    /// Right derivative ψ'(t).
    pub fn derivative(&self, t: f64) -> f64 {
        let t = t.abs();
        match self {
            AdmissibleProfile::Psi { s } => match s {
                SParam::Infinite => 2.0 * t,
                SParam::Finite(v) if *v == 0.0 => 1.0,
                SParam::Finite(v) => 2.0 * t * psi::psi_s_square_derivatives(*v, t * t).0,
            },
            AdmissibleProfile::Power { scale, exponent } => {
                if *exponent == 1.0 {
                    *scale
                } else {
                    scale * exponent * t.powf(exponent - 1.0)
                }
            }
            AdmissibleProfile::Flat { tau } => {
                if t < *tau {
                    0.0
                } else {
                    1.0
                }
            }
            AdmissibleProfile::Indicator { tau } => {
                if t < *tau {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            AdmissibleProfile::HeightCap { s } => {
                if t < 1.0 {
                    s * t / (1.0 - t * t)
                } else {
                    f64::INFINITY
                }
            }
            AdmissibleProfile::Conjugate { of } => legendre::conjugate_point(of, t).argmax,
        }
    }

    /// ψ''(t) on the interior of the domain (central difference for conjugates).
    pub fn second_derivative(&self, t: f64) -> f64 {
        let t = t.abs();
        match self {
            AdmissibleProfile::Psi { s } => match s {
                SParam::Infinite => 2.0,
                SParam::Finite(v) if *v == 0.0 => 0.0,
                SParam::Finite(v) => {
                    let (d1, d2) = psi::psi_s_square_derivatives(*v, t * t);
                    2.0 * d1 + 4.0 * t * t * d2
                }
            },
            AdmissibleProfile::Power { scale, exponent } => {
                if *exponent == 1.0 {
                    0.0
                } else {
                    scale * exponent * (exponent - 1.0) * t.powf(exponent - 2.0)
                }
            }
            AdmissibleProfile::Flat { .. } | AdmissibleProfile::Indicator { .. } => 0.0,
            AdmissibleProfile::HeightCap { s } => {
                let w = 1.0 - t * t;
                s * (1.0 + t * t) / (w * w)
            }
            AdmissibleProfile::Conjugate { .. } => {
                let h = 1e-5 * (1.0 + t);
                let lo = (t - h).max(0.0);
                (self.derivative(t + h) - self.derivative(lo)) / (t + h - lo)
            }
        }
    }

    /// τ = sup of the effective domain.
    pub fn domain_bound(&self) -> f64 {
        match self {
            AdmissibleProfile::Indicator { tau } => *tau,
            AdmissibleProfile::HeightCap { .. } => 1.0,
            AdmissibleProfile::Conjugate { of } => of.growth_slope(),
            _ => f64::INFINITY,
        }
    }

    /// Whether ψ(τ) is finite (the domain includes its end point).
    pub fn domain_closed(&self) -> bool {
        let tau = self.domain_bound();
        tau.is_infinite() || self.eval(tau).is_finite()
    }

    /// lim ψ(t)/t.
    pub fn growth_slope(&self) -> f64 {
        match self {
            AdmissibleProfile::Psi { s } => match s {
                SParam::Infinite => f64::INFINITY,
                SParam::Finite(_) => 1.0,
            },
            AdmissibleProfile::Power { scale, exponent } => {
                if *exponent == 1.0 {
                    *scale
                } else {
                    f64::INFINITY
                }
            }
            AdmissibleProfile::Flat { .. } => 1.0,
            AdmissibleProfile::Indicator { .. } | AdmissibleProfile::HeightCap { .. } => {
                f64::INFINITY
            }
            AdmissibleProfile::Conjugate { of } => of.domain_bound(),
        }
    }

    pub fn strictly_increasing(&self) -> bool {
        match self {
            AdmissibleProfile::Flat { .. } | AdmissibleProfile::Indicator { .. } => false,
            // the conjugate is flat near zero iff the primal has a kink there
            AdmissibleProfile::Conjugate { of } => of.derivative(0.0) == 0.0,
            _ => true,
        }
    }

    /// Order of growth at infinity: 1 for linear growth, p for t^p, ∞ for
    /// bounded domains.
    pub fn growth_order(&self) -> f64 {
        match self {
            AdmissibleProfile::Psi { s } => match s {
                SParam::Infinite => 2.0,
                SParam::Finite(_) => 1.0,
            },
            AdmissibleProfile::Power { exponent, .. } => *exponent,
            AdmissibleProfile::Flat { .. } => 1.0,
            AdmissibleProfile::Indicator { .. } | AdmissibleProfile::HeightCap { .. } => {
                f64::INFINITY
            }
            AdmissibleProfile::Conjugate { of } => {
                let p = of.growth_order();
                if of.domain_bound().is_finite() || p.is_infinite() {
                    1.0
                } else if p <= 1.0 {
                    f64::INFINITY
                } else {
                    p / (p - 1.0)
                }
            }
        }
    }

    /// lim ψ(t)/t^q for q the growth order (∞ for bounded domains).
    pub fn tail_coefficient(&self) -> f64 {
        match self {
            AdmissibleProfile::Psi { .. } | AdmissibleProfile::Flat { .. } => 1.0,
            AdmissibleProfile::Power { scale, .. } => *scale,
            AdmissibleProfile::Indicator { .. } | AdmissibleProfile::HeightCap { .. } => f64::INFINITY,
            AdmissibleProfile::Conjugate { .. } => {
                let q = self.growth_order();
                let t = 1e6;
                (self.eval(2.0 * t) - self.eval(t)) / ((2.0 * t).powf(q) - t.powf(q))
            }
        }
    }

    pub fn constraint_form(&self) -> ConstraintForm {
        match self {
            AdmissibleProfile::Psi { s } if !s.is_zero() => ConstraintForm::Quadratic,
            AdmissibleProfile::Power { exponent, .. } if *exponent >= 2.0 => {
                ConstraintForm::Quadratic
            }
            AdmissibleProfile::HeightCap { .. } => ConstraintForm::Quadratic,
            _ => ConstraintForm::Inverse,
        }
    }

    /// Ψ(q) = ψ(√q) with its first two q-derivatives. Only meaningful for
    /// [`ConstraintForm::Quadratic`] profiles.
    pub fn square_form(&self, q: f64) -> (f64, f64, f64) {
        match self {
            AdmissibleProfile::Psi { s: SParam::Infinite } => (q, 1.0, 0.0),
            AdmissibleProfile::Psi {
                s: SParam::Finite(s),
            } => {
                let (d1, d2) = psi::psi_s_square_derivatives(*s, q);
                (psi::psi_s_of_square(*s, q), d1, d2)
            }
            AdmissibleProfile::Power { scale, exponent } => {
                let h = 0.5 * exponent;
                if h == 1.0 {
                    return (scale * q, *scale, 0.0);
                }
                (
                    scale * q.powf(h),
                    scale * h * q.powf(h - 1.0),
                    scale * h * (h - 1.0) * q.powf(h - 2.0),
                )
            }
            AdmissibleProfile::HeightCap { s } => {
                if q >= 1.0 {
                    (f64::INFINITY, f64::INFINITY, f64::INFINITY)
                } else {
                    let w = 1.0 - q;
                    (-0.5 * s * (-q).ln_1p(), 0.5 * s / w, 0.5 * s / (w * w))
                }
            }
            _ => {
                let t = q.max(0.0).sqrt();
                let v = self.eval(t);
                let d1 = if t > 0.0 { self.derivative(t) / (2.0 * t) } else { 0.0 };
                (v, d1, 0.0)
            }
        }
    }

    /// u(v) = sup{t ≥ 0 : ψ(t) ≤ v} for v ≥ 0, with u'(v) and u''(v).
    pub fn upper_inverse(&self, v: f64) -> (f64, f64, f64) {
        if v < 0.0 {
            return (f64::NAN, f64::NAN, f64::NAN);
        }
        match self {
            AdmissibleProfile::Psi { s } => match s {
                SParam::Finite(x) if *x == 0.0 => (v, 1.0, 0.0),
                SParam::Infinite => {
                    let u = v.sqrt();
                    (u, 0.5 / u, -0.25 / (u * u * u))
                }
                SParam::Finite(x) => {
                    let u = psi::psi_s_inverse(*x, v);
                    self.inverse_derivatives(u)
                }
            },
            AdmissibleProfile::Power { scale, exponent } => {
                let r = 1.0 / exponent;
                let u = (v / scale).powf(r);
                let d1 = r * u / v;
                let d2 = r * (r - 1.0) * u / (v * v);
                if v == 0.0 && *exponent == 1.0 {
                    (0.0, 1.0 / scale, 0.0)
                } else {
                    (u, d1, d2)
                }
            }
            AdmissibleProfile::Flat { tau } => (tau + v, 1.0, 0.0),
            AdmissibleProfile::Indicator { tau } => (*tau, 0.0, 0.0),
            AdmissibleProfile::HeightCap { s } => {
                let e = (-2.0 * v / s).exp();
                let u = (1.0 - e).max(0.0).sqrt();
                self.inverse_derivatives(u)
            }
            AdmissibleProfile::Conjugate { .. } => {
                let u = self.numeric_inverse(v);
                self.inverse_derivatives(u)
            }
        }
    }

    fn inverse_derivatives(&self, u: f64) -> (f64, f64, f64) {
        let p1 = self.derivative(u);
        let p2 = self.second_derivative(u);
        if p1 <= 0.0 {
            return (u, f64::INFINITY, f64::NEG_INFINITY);
        }
        (u, 1.0 / p1, -p2 / (p1 * p1 * p1))
    }

    fn numeric_inverse(&self, v: f64) -> f64 {
        let tau = self.domain_bound();
        let mut lo = 0.0;
        let mut hi = if tau.is_finite() { tau } else { 1.0 };
        if tau.is_infinite() {
            while self.eval(hi) <= v {
                lo = hi;
                hi *= 2.0;
                if hi > 1e300 {
                    return f64::INFINITY;
                }
            }
        } else if self.eval(tau) <= v {
            return tau;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) <= v {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        lo
    }

    /// Grid check of ψ(0) = 0, monotonicity and convexity.
    pub fn check_admissible(&self) -> Result<()> {
        if self.eval(0.0) != 0.0 {
            return Err(Error::InvalidInput("profile must vanish at zero".into()));
        }
        let tau = self.domain_bound();
        let top = if tau.is_finite() { tau * (1.0 - 1e-6) } else { 50.0 };
        let n = 400;
        let ts: Vec<f64> = (0..=n).map(|k| top * (k as f64 / n as f64)).collect();
        let vals: Vec<f64> = ts.iter().map(|&t| self.eval(t)).collect();
        for k in 1..=n {
            if vals[k] < vals[k - 1] - 1e-10 {
                return Err(Error::InvalidInput(format!(
                    "profile decreases near t = {}",
                    ts[k]
                )));
            }
        }
        for k in 1..n {
            let lin = 0.5 * (vals[k - 1] + vals[k + 1]);
            if vals[k] > lin + 1e-10 * (1.0 + lin.abs()) {
                return Err(Error::InvalidInput(format!(
                    "profile is not convex near t = {}",
                    ts[k]
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn growth_and_domain() {
        assert_eq!(AdmissibleProfile::psi(SParam::Finite(0.0)).growth_slope(), 1.0);
        assert_eq!(AdmissibleProfile::psi(SParam::Finite(5.0)).growth_slope(), 1.0);
        assert!(AdmissibleProfile::psi(SParam::Infinite).growth_slope().is_infinite());
        let ind = AdmissibleProfile::indicator(1.0).unwrap();
        assert_eq!(ind.eval(1.0), 0.0);
        assert!(ind.eval(1.0 + 1e-12).is_infinite());
        assert!(ind.domain_closed());
        assert!(!AdmissibleProfile::height_cap(SParam::Finite(2.0)).domain_closed());
    }

    #[test]
    fn admissibility_grid() {
        for p in [
            AdmissibleProfile::psi(SParam::Finite(5.0)),
            AdmissibleProfile::psi(SParam::Finite(0.0)),
            AdmissibleProfile::psi(SParam::Infinite),
            AdmissibleProfile::flat(1.0).unwrap(),
            AdmissibleProfile::height_cap(SParam::Finite(1.5)),
            AdmissibleProfile::conjugate(AdmissibleProfile::psi(SParam::Finite(2.0))),
        ] {
            p.check_admissible().unwrap();
        }
    }

    #[test]
    fn inverse_matches_eval() {
        let profiles = [
            AdmissibleProfile::psi(SParam::Finite(0.0)),
            AdmissibleProfile::psi(SParam::Finite(1.7)),
            AdmissibleProfile::psi(SParam::Infinite),
            AdmissibleProfile::power(2.0, 1.5).unwrap(),
            AdmissibleProfile::flat(0.5).unwrap(),
            AdmissibleProfile::height_cap(SParam::Finite(3.0)),
        ];
        for p in &profiles {
            for v in [0.01, 0.3, 1.0, 4.0] {
                let (u, d1, _) = p.upper_inverse(v);
                assert!((p.eval(u) - v).abs() < 1e-9, "{p:?} v={v}");
                let h = 1e-6;
                let fd = (p.upper_inverse(v + h).0 - p.upper_inverse(v - h).0) / (2.0 * h);
                assert!((fd - d1).abs() < 1e-5 * (1.0 + d1.abs()), "{p:?} v={v}");
            }
        }
    }

    #[test]
    fn square_form_derivatives() {
        let p = AdmissibleProfile::psi(SParam::Finite(0.8));
        let q = 0.7;
        let h = 1e-6;
        let (_, d1, d2) = p.square_form(q);
        let fd1 = (p.square_form(q + h).0 - p.square_form(q - h).0) / (2.0 * h);
        let fd2 = (p.square_form(q + h).1 - p.square_form(q - h).1) / (2.0 * h);
        assert!((d1 - fd1).abs() < 1e-8);
        assert!((d2 - fd2).abs() < 1e-6);
    }

    #[test]
    fn serde_roundtrip() {
        let p = AdmissibleProfile::conjugate(AdmissibleProfile::psi(SParam::Finite(2.0)));
        let j = serde_json::to_string(&p).unwrap();
        let back: AdmissibleProfile = serde_json::from_str(&j).unwrap();
        assert_eq!(back, p);
    }
}
