//! Log-conjugates of radial profiles, the height functions h_E, and the
//! duality checks between h_E and ℓ_E.

use nalgebra::DVector;

use crate::ellipsoid::{ellipsoidal_eval, DEllipsoid};
use crate::error::{Error, Result};
use crate::integrals::v_psi;
use crate::profile::AdmissibleProfile;
use crate::psi::SParam;
use crate::quadrature::QuadratureSpec;

const T_TOL: f64 = 1e-10;
const UNBOUNDED_AT: f64 = 1e12;

/// Value and maximizer of t ↦ rt − ψ(t) on [0, ∞).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugatePoint {
    pub value: f64,
    pub argmax: f64,
}

/// ψ*(r) = sup_{t≥0} (rt − ψ(t)), by subgradient bracketing and golden section.
pub fn conjugate_point(profile: &AdmissibleProfile, r: f64) -> ConjugatePoint {
    let r = r.max(0.0);
    let g = |t: f64| r * t - profile.eval(t);
    let tau = profile.domain_bound();
    let (lo, hi) = if tau.is_finite() {
        let top = if profile.domain_closed() {
            tau
        } else {
            // an open end has ψ → ∞ there, so the maximizer stays inside
            let mut top = tau * (1.0 - 1e-3);
            while profile.derivative(top) <= r && top < tau {
                let next = 0.5 * (top + tau);
                if next == top {
                    break;
                }
                top = next;
            }
            top
        };
        if profile.derivative(0.0) >= r {
            return ConjugatePoint {
                value: 0.0,
                argmax: 0.0,
            };
        }
        (0.0, top)
    } else {
        if profile.derivative(0.0) >= r {
            return ConjugatePoint {
                value: 0.0,
                argmax: 0.0,
            };
        }
        let mut hi = 1.0;
        while profile.derivative(hi) <= r {
            hi *= 2.0;
            if hi > UNBOUNDED_AT {
                let far = g(hi);
                let near = g(0.5 * hi);
                if far > near + 1e-12 * near.abs().max(1.0) {
                    return ConjugatePoint {
                        value: f64::INFINITY,
                        argmax: f64::INFINITY,
                    };
                }
                return ConjugatePoint {
                    value: far.max(near),
                    argmax: hi,
                };
            }
        }
        (if hi > 1.0 { 0.5 * hi } else { 0.0 }, hi)
    };
    let (t, v) = golden_max(&g, lo, hi, T_TOL);
    // end points matter for kinked or capped profiles
    let mut best = ConjugatePoint { value: v, argmax: t };
    for e in [lo, hi] {
        let ge = g(e);
        if ge > best.value {
            best = ConjugatePoint {
                value: ge,
                argmax: e,
            };
        }
    }
    best
}

/// Golden-section search for the maximum of a concave function on [a, b].
pub fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0;
    while (b - a) > tol * (1.0 + a.abs().max(b.abs()).min(1.0)) && iter < 400 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        iter += 1;
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// A profile paired with its monotone conjugate.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfilePair {
    pub primal: AdmissibleProfile,
    pub dual: AdmissibleProfile,
}

impl RadialProfilePair {
    /// Max |ψ**(t) − ψ(t)| over `grid` points inside the open domain.
    pub fn biconjugacy_residual(&self, grid: &[f64]) -> f64 {
        let tau = self.primal.domain_bound();
        grid.iter()
            .filter(|&&t| t < tau)
            .map(|&t| {
                let back = conjugate_point(&self.dual, t).value;
                (back - self.primal.eval(t)).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// The conjugate profile ψ*, restricted to [0, ∞). The grid is used to verify
/// convexity and monotonicity of the result.
pub fn legendre_profile(profile: &AdmissibleProfile, grid: &[f64]) -> Result<AdmissibleProfile> {
    let dual = AdmissibleProfile::conjugate(profile.clone());
    let vals: Vec<(f64, f64)> = grid
        .iter()
        .map(|&r| (r, dual.eval(r)))
        .filter(|(_, v)| v.is_finite())
        .collect();
    if vals.first().is_some_and(|(r, v)| *r == 0.0 && v.abs() > 1e-12) {
        return Err(Error::Numerical("conjugate does not vanish at zero".into()));
    }
    for w in vals.windows(2) {
        if w[1].1 < w[0].1 - 1e-9 {
            return Err(Error::Numerical(format!(
                "conjugate decreases near r = {}",
                w[1].0
            )));
        }
    }
    for w in vals.windows(3) {
        let (r1, v1) = w[0];
        let (r2, v2) = w[1];
        let (r3, v3) = w[2];
        let lin = v1 + (v3 - v1) * (r2 - r1) / (r3 - r1);
        if v2 > lin + 1e-8 * (1.0 + lin.abs()) {
            return Err(Error::Numerical(format!("conjugate not convex near r = {r2}")));
        }
    }
    Ok(dual)
}

/// h_E(x) = (1/α)·[1 − |A⁻¹(x − a)|²]^{s/2} on A·B + a, 0 outside; the
/// indicator at s = 0 and (1/α)·e^{−|A⁻¹(x−a)|²} at s = ∞.
pub fn h_eval(s: SParam, e: &DEllipsoid, x: &DVector<f64>) -> f64 {
    let y = e.inverse_apply(x);
    let r2 = y.norm_squared();
    match s {
        SParam::Infinite => (-r2).exp() / e.height,
        SParam::Finite(s) => {
            if s == 0.0 {
                if r2 <= 1.0 {
                    1.0 / e.height
                } else {
                    0.0
                }
            } else if r2 < 1.0 {
                (1.0 - r2).powf(0.5 * s) / e.height
            } else {
                0.0
            }
        }
    }
}

/// h_E written as an ellipsoidal function: profile χ_s with parameters (A⁻¹ ⊕ 1/α, a).
pub fn h_as_ellipsoidal(s: SParam, e: &DEllipsoid) -> (AdmissibleProfile, DEllipsoid) {
    let inv = e.inverse_position();
    (AdmissibleProfile::height_cap(s), inv)
}

/// The radial profile of the conjugate of h_B, i.e. r ↦ sup_{t∈dom}(rt − χ_s(t)).
pub fn h_dual_profile(s: SParam) -> AdmissibleProfile {
    AdmissibleProfile::conjugate(AdmissibleProfile::height_cap(s))
}

/// Sup over the points y of |(h_E)°(y) − ℓ_E(y)|, with (h_E)° computed by
/// numerical conjugation of its radial profile. E must be centered.
pub fn duality_check(s: SParam, e: &DEllipsoid, grid: &[DVector<f64>]) -> Result<f64> {
    if e.center.norm() > 0.0 {
        return Err(Error::InvalidInput(
            "duality check is stated for centered ellipsoids".into(),
        ));
    }
    let cap = AdmissibleProfile::height_cap(s);
    let ell = AdmissibleProfile::psi(s);
    let mut worst: f64 = 0.0;
    for y in grid {
        if y.len() != e.dim() {
            return Err(Error::DimensionMismatch {
                expected: e.dim(),
                got: y.len(),
            });
        }
        // (1/α)e^{−χ(|A⁻¹x|)} conjugates to α·e^{−χ*(|A y|)}
        let r = (&e.matrix * y).norm();
        let polar = e.height * (-conjugate_point(&cap, r).value).exp();
        let target = ellipsoidal_eval(&ell, e, y);
        worst = worst.max((polar - target).abs());
    }
    Ok(worst)
}

/// Relative residual of ∫h_E·∫ℓ_E = ∫h_B·∫ℓ_B, both sides by quadrature.
pub fn mahler_identity_check(s: SParam, e: &DEllipsoid, spec: &QuadratureSpec) -> Result<f64> {
    let d = e.dim();
    let ell = AdmissibleProfile::psi(s);
    let cap = AdmissibleProfile::height_cap(s);
    let v_ell = v_psi(&ell, d, spec)?;
    let v_cap = v_psi(&cap, d, spec)?;
    let (_, inv) = h_as_ellipsoidal(s, e);
    let int_h = crate::ellipsoid::ellipsoidal_integral(&inv, v_cap);
    let int_l = crate::ellipsoid::ellipsoidal_integral(e, v_ell);
    let lhs = int_h * int_l;
    let rhs = v_cap * v_ell;
    Ok(((lhs - rhs) / rhs).abs())
}

/// Mahler residual with both integrals by direct d-dimensional cubature of
/// h_E and ℓ_E, independent of the radial reduction.
pub fn mahler_identity_cubature(s: SParam, e: &DEllipsoid, spec: &QuadratureSpec) -> Result<f64> {
    let ell = AdmissibleProfile::psi(s);
    let cap = AdmissibleProfile::height_cap(s);
    let (_, inv) = h_as_ellipsoidal(s, e);
    let unit = DEllipsoid::unit(e.dim());
    let lhs = crate::integrals::cubature_ellipsoidal(&cap, &inv, spec)?
        * crate::integrals::cubature_ellipsoidal(&ell, e, spec)?;
    let rhs = crate::integrals::cubature_ellipsoidal(&cap, &unit, spec)?
        * crate::integrals::cubature_ellipsoidal(&ell, &unit, spec)?;
    Ok(((lhs - rhs) / rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn closed_form_conjugates() {
        let half = AdmissibleProfile::power(0.5, 2.0).unwrap();
        for r in [0.0, 0.3, 1.0, 2.5] {
            let c = conjugate_point(&AdmissibleProfile::Power { scale: 0.5, exponent: 1.5 }, r);
            assert!(c.value.is_finite());
            let v = AdmissibleProfile::Conjugate { of: Box::new(half.clone()) }.eval(r);
            assert!((v - 0.5 * r * r).abs() < 1e-9, "{v}");
            let g = AdmissibleProfile::Conjugate {
                of: Box::new(AdmissibleProfile::psi(SParam::Infinite)),
            }
            .eval(r);
            assert!((g - 0.25 * r * r).abs() < 1e-9);
            let ind = AdmissibleProfile::Conjugate {
                of: Box::new(AdmissibleProfile::indicator(1.0).unwrap()),
            }
            .eval(r);
            assert!((ind - r).abs() < 1e-9);
        }
    }

    #[test]
    fn heightcap_conjugate_is_psi() {
        // the radial duality between χ_s and ψ_s at finite s
        for s in [0.5, 1.0, 2.0, 7.0] {
            let cap = AdmissibleProfile::height_cap(SParam::Finite(s));
            for r in [0.0, 0.1, 0.7, 3.0, 20.0] {
                let c = conjugate_point(&cap, r).value;
                let p = crate::psi::psi_s_value(SParam::Finite(s), r);
                assert!((c - p).abs() < 1e-9 * (1.0 + p), "s={s} r={r} {c} {p}");
            }
        }
    }

    #[test]
    fn h_values() {
        let e = DEllipsoid::unit(2);
        let x = DVector::from_vec(vec![0.6, 0.0]);
        assert!((h_eval(SParam::Finite(2.0), &e, &x) - 0.64).abs() < 1e-15);
        assert_eq!(h_eval(SParam::Finite(1.0), &e, &DVector::zeros(2)), 1.0);
        let e2 = DEllipsoid::new(DMatrix::identity(2, 2), 2.0, DVector::zeros(2)).unwrap();
        let x = DVector::from_vec(vec![0.5, 0.0]);
        assert_eq!(h_eval(SParam::Finite(0.0), &e2, &x), 0.5);
    }

    #[test]
    fn unbounded_conjugate_is_infinite() {
        let lin = AdmissibleProfile::psi(SParam::Finite(0.0));
        assert!(conjugate_point(&lin, 1.5).value.is_infinite());
        assert_eq!(conjugate_point(&lin, 0.5).value, 0.0);
    }

    #[test]
    fn biconjugate_recovers_primal() {
        let primal = AdmissibleProfile::psi(SParam::Finite(1.5));
        let pair = RadialProfilePair {
            dual: legendre_profile(&primal, &[0.0, 0.2, 0.5, 0.9]).unwrap(),
            primal,
        };
        let grid: Vec<f64> = (0..20).map(|k| 0.25 * k as f64).collect();
        assert!(pair.biconjugacy_residual(&grid) < 1e-8);
    }
}
