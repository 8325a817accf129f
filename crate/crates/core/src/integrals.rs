//! V_Ψ(d) = ∫ e^{−ψ(|x|)} dx by radial quadrature, the Tricomi function U and
//! its closed-form expression of V_Ψ for the ψ_s family.

use std::f64::consts::PI;

use nalgebra::DVector;
use statrs::function::gamma::ln_gamma;

use crate::ellipsoid::{ellipsoidal_eval, DEllipsoid};
use crate::error::{Error, Result};
use crate::profile::AdmissibleProfile;
use crate::psi::SParam;
use crate::quadrature::{integrate, integrate_ellipsoid_region, integrate_to_infinity, integrate_with_breaks, QuadEstimate, QuadratureSpec};

/// Volume of the Euclidean unit ball in ℝ^d.
pub fn unit_ball_volume(d: usize) -> f64 {
    let h = 0.5 * d as f64;
    (h * PI.ln() - ln_gamma(h + 1.0)).exp()
}

/// ∫h_B for the height function [1 − |x|²]^{s/2}: π^{d/2}Γ(s/2+1)/Γ(s/2+d/2+1).
pub fn h_volume(s: SParam, d: usize) -> f64 {
    let h = 0.5 * d as f64;
    match s {
        SParam::Infinite => PI.powf(h),
        SParam::Finite(s) => {
            (h * PI.ln() + ln_gamma(0.5 * s + 1.0) - ln_gamma(0.5 * s + h + 1.0)).exp()
        }
    }
}

/// Truncation point T of the radial integral and a bound on the discarded tail.
///
/// Past T the profile lies above its tangent, so the tail is at most
/// e^{−ψ(T)}·∫₀^∞ (T+u)^{d−1} e^{−ψ'(T)u} du, which is available in closed form.
pub fn radial_cutoff(profile: &AdmissibleProfile, d: usize, target: f64) -> (f64, f64) {
    let tail = |t: f64| -> f64 {
        let k = profile.derivative(t);
        if k <= 0.0 {
            return f64::INFINITY;
        }
        let mut sum = 0.0;
        let mut binom = 1.0;
        let mut fact = 1.0;
        for j in 0..d {
            if j > 0 {
                binom *= (d - j) as f64 / j as f64;
                fact *= j as f64;
            }
            sum += binom * t.powi((d - 1 - j) as i32) * fact / k.powi(j as i32 + 1);
        }
        (-profile.eval(t)).exp() * sum * d as f64 * unit_ball_volume(d)
    };
    let mut t = 1.0;
    while profile.eval(t) < 1.0 {
        t *= 2.0;
    }
    let mut bound = tail(t);
    while bound > target && t < 1e15 {
        t *= 1.25;
        bound = tail(t);
    }
    (t, bound)
}

fn radial_estimate(profile: &AdmissibleProfile, d: usize, spec: &QuadratureSpec, cutoff: Option<f64>) -> Result<(QuadEstimate, f64)> {
    if d == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    let surface = d as f64 * unit_ball_volume(d);
    let integrand = |t: f64| {
        let p = profile.eval(t);
        if p.is_infinite() {
            0.0
        } else {
            surface * t.powi(d as i32 - 1) * (-p).exp()
        }
    };
    let tau = profile.domain_bound();
    if tau.is_finite() {
        let est = integrate(integrand, 0.0, tau, spec);
        return Ok((est, 0.0));
    }
    // a coarse pass fixes the scale that the tail has to be small against
    let coarse = integrate_to_infinity(integrand, 0.0, 1.0, &QuadratureSpec::new(1e-12, 1e-6, 2000)?);
    let target = 1e-3 * spec.rel_tol * coarse.value.abs().max(spec.abs_tol);
    let (t, bound) = match cutoff {
        Some(t) => (t, f64::NAN),
        None => radial_cutoff(profile, d, target),
    };
    let mut breaks = vec![0.0];
    if let AdmissibleProfile::Flat { tau } = profile {
        if *tau < t {
            breaks.push(*tau);
        }
    }
    breaks.push(t);
    Ok((integrate_with_breaks(integrand, &breaks, spec), bound))
}

/// V_Ψ(d) = d·ω_d·∫₀^∞ t^{d−1}e^{−ψ(t)} dt.
///
/// Infinite domains are cut at T where the tangent-line tail bound drops below
/// 1e-3·rel_tol of the integral; finite domains integrate up to τ.
pub fn v_psi(profile: &AdmissibleProfile, d: usize, spec: &QuadratureSpec) -> Result<f64> {
    let (est, _) = radial_estimate(profile, d, spec, None)?;
    est.into_result()
}

/// Like [`v_psi`], with the truncation point given explicitly.
pub fn v_psi_with_cutoff(profile: &AdmissibleProfile, d: usize, cutoff: f64, spec: &QuadratureSpec) -> Result<f64> {
    let (est, _) = radial_estimate(profile, d, spec, Some(cutoff))?;
    est.into_result()
}

/// λ₁\[ψ\] = V_Ψ in dimension one.
pub fn lambda1(profile: &AdmissibleProfile, spec: &QuadratureSpec) -> Result<f64> {
    v_psi(profile, 1, spec)
}

/// Tricomi's confluent hypergeometric function
/// U(a; b; z) = (1/Γ(a))·∫₀^∞ v^{a−1}(1 + v)^{b−a−1}e^{−zv} dv, for a > 0, z > 0.
pub fn tricomi_u(a: f64, b: f64, z: f64) -> Result<f64> {
    if !(a > 0.0 && z > 0.0 && b.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "the integral defining U({a}; {b}; {z}) diverges; need a > 0 and z > 0"
        )));
    }
    let spec = QuadratureSpec::new(1e-300, 1e-10, 4000)?;
    let c = b - a - 1.0;
    // the decay rate of the integrand near its peak sets the panel scale
    let rate = (z - c.max(0.0)).abs().max(0.1 * z).max(1e-3);
    let est = if a < 1.0 {
        // v = w^{1/a} removes the endpoint singularity
        let inv = 1.0 / a;
        integrate_to_infinity(
            |w: f64| {
                let v = w.powf(inv);
                (c * v.ln_1p() - z * v).exp() * inv
            },
            0.0,
            (1.0 / rate).powf(a),
            &spec,
        )
    } else {
        integrate_to_infinity(
            |v: f64| {
                if v == 0.0 {
                    return if a == 1.0 { 1.0 } else { 0.0 };
                }
                ((a - 1.0) * v.ln() + c * v.ln_1p() - z * v).exp()
            },
            0.0,
            a.max(1.0) / rate,
            &spec,
        )
    };
    let value = est.into_result()?;
    Ok(value * (-ln_gamma(a)).exp())
}

/// V_Ψ(ψ_s, d) = π^{d/2}s^d·[(d/2)·U(d/2+1; d+s/2+1; s) + U(d/2; d+s/2+1; s)].
///
/// Derived from the radial integral through R = 1 + 2v, under which
/// e^{−ψ_s} = (1+v)^{s/2}e^{−sv} and t² = s²v(1+v).
pub fn v_psi_s_closed(s: f64, d: usize) -> Result<f64> {
    closed_form(s, d, 0.5 * d as f64)
}

/// The variant of [`v_psi_s_closed`] with coefficient d in front of the first
/// U term. It does not agree with the radial integral; kept so the discrepancy
/// can be reproduced.
pub fn v_psi_s_closed_published(s: f64, d: usize) -> Result<f64> {
    closed_form(s, d, d as f64)
}

fn closed_form(s: f64, d: usize, first_coefficient: f64) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidInput(format!("closed form needs 0 < s < ∞, got {s}")));
    }
    if d == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    let h = 0.5 * d as f64;
    let b = d as f64 + 0.5 * s + 1.0;
    let u1 = tricomi_u(h + 1.0, b, s)?;
    let u0 = tricomi_u(h, b, s)?;
    Ok(PI.powf(h) * s.powi(d as i32) * (first_coefficient * u1 + u0))
}

/// ∫ℓ_E by nested Cartesian cubature over the ellipsoid {|A(x−a)| ≤ R} (d ≤ 3),
/// R the domain bound or the radius where ψ reaches 45.
pub fn cubature_ellipsoidal(profile: &AdmissibleProfile, e: &DEllipsoid, spec: &QuadratureSpec) -> Result<f64> {
    let d = e.dim();
    if d > 3 {
        return Err(Error::InvalidInput("box cubature supports d ≤ 3".into()));
    }
    let tau = profile.domain_bound();
    let radius = if tau.is_finite() {
        tau
    } else {
        let mut r = 1.0;
        while profile.eval(r) < 45.0 {
            r *= 1.5;
        }
        r
    };
    let q = &e.matrix * &e.matrix;
    let f = |x: &[f64]| ellipsoidal_eval(profile, e, &DVector::from_column_slice(x));
    let est = integrate_ellipsoid_region(&f, e.center.as_slice(), &q, radius, spec);
    if est.converged || est.error <= 1e-6 * est.value.abs() {
        Ok(est.value)
    } else {
        Err(Error::Quadrature { estimate: est.value, error: est.error })
    }
}
