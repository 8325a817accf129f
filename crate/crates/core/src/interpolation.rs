//! Explicit constructions that certify non-optimality: interpolation of two
//! ψ-ellipsoidal functions and the two "sausage" ellipsoids lying above the
//! minimum of two translates.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::ellipsoid::{ellipsoidal_neg_log, DEllipsoid};
use crate::error::{Error, Result};
use crate::optimize::{halton, nelder_mead_min, sphere_points};
use crate::profile::AdmissibleProfile;

/// E with A = β₁A₁ + β₂A₂, α = α₁^{β₁}α₂^{β₂} and
/// a = A⁻¹(β₁A₁a₁ + β₂A₂a₂).
pub fn interpolate(e1: &DEllipsoid, e2: &DEllipsoid, beta1: f64) -> Result<DEllipsoid> {
    if e1.dim() != e2.dim() {
        return Err(Error::DimensionMismatch {
            expected: e1.dim(),
            got: e2.dim(),
        });
    }
    if !(beta1 > 0.0 && beta1 < 1.0) {
        return Err(Error::InvalidInput(format!("beta1 must lie in (0,1), got {beta1}")));
    }
    let beta2 = 1.0 - beta1;
    let a = &e1.matrix * beta1 + &e2.matrix * beta2;
    let rhs = &e1.matrix * &e1.center * beta1 + &e2.matrix * &e2.center * beta2;
    let center = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("combined matrix lost definiteness".into()))?
        .solve(&rhs);
    let height = (beta1 * e1.height.ln() + beta2 * e2.height.ln()).exp();
    DEllipsoid::new(a, height, center)
}

/// Output of a sausage construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Sausage {
    /// The ψ-ellipsoidal function lying above min{ℓ_{E1}, ℓ_{E2}}.
    pub ellipsoid: DEllipsoid,
    /// ∫ℓ_E / ∫ℓ_{E1}; always < 1.
    pub integral_factor: f64,
    /// The infimum ε₁ (strictly increasing case only).
    pub eps1: Option<f64>,
    /// The shrink parameter actually used (strictly increasing case only).
    pub eps: Option<f64>,
}

struct Normalized {
    mid: DVector<f64>,
    /// −A·c where ±c are the centers after moving the midpoint to 0.
    a: DVector<f64>,
}

fn normalize(matrix: &DMatrix<f64>, a1: &DVector<f64>, a2: &DVector<f64>) -> Result<Normalized> {
    let d = matrix.nrows();
    if a1.len() != d || a2.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: a1.len().min(a2.len()),
        });
    }
    let c = (a1 - a2) * 0.5;
    if c.norm() == 0.0 {
        return Err(Error::InvalidInput("the two centers coincide".into()));
    }
    Ok(Normalized {
        mid: (a1 + a2) * 0.5,
        a: -(matrix * c),
    })
}

/// The strictly-increasing construction. With y = Ax and a = −Ac,
/// ε₁ = (1/2d)·inf{ψ(|y + a|) − ψ(|y|) : ⟨y, a⟩ ≥ 0, ψ(|y|) ≤ 2d},
/// ε = min{ε₁, 1}/2 and E = ((1−ε)A ⊕ αe^{−2dε}, m) with m the midpoint.
///
/// The infimum is taken over `grid_budget` Halton points of the compact
/// region, its boundary pieces, and then polished by Nelder–Mead.
pub fn sausage_increasing(
    profile: &AdmissibleProfile,
    matrix: &DMatrix<f64>,
    alpha: f64,
    a1: &DVector<f64>,
    a2: &DVector<f64>,
    grid_budget: usize,
) -> Result<Sausage> {
    if !profile.strictly_increasing() || profile.domain_bound().is_finite() {
        return Err(Error::InvalidInput(
            "profile must be strictly increasing with full domain".into(),
        ));
    }
    let d = matrix.nrows();
    let e1 = DEllipsoid::new(matrix.clone(), alpha, a1.clone())?;
    let n = normalize(matrix, a1, a2)?;
    let a = &n.a;
    let radius = profile.upper_inverse(2.0 * d as f64).0;
    let inside = |y: &DVector<f64>| y.dot(a) >= 0.0 && y.norm() <= radius;
    let gap = |y: &DVector<f64>| profile.eval((y + a).norm()) - profile.eval(y.norm());
    let penalized = |y: &DVector<f64>| if inside(y) { gap(y) } else { f64::INFINITY };

    let mut samples: Vec<DVector<f64>> = vec![DVector::zeros(d)];
    let budget = grid_budget.max(16);
    if d == 1 {
        let dir = a[0].signum();
        samples.extend((0..=budget).map(|k| DVector::from_element(1, dir * radius * k as f64 / budget as f64)));
    } else {
        for k in 0..budget {
            let h = halton(k + 1, d);
            let y = DVector::from_iterator(d, h.into_iter().map(|u| radius * (2.0 * u - 1.0)));
            if inside(&y) {
                samples.push(y);
            }
        }
        let ahat = a / a.norm();
        for u in sphere_points(d, budget / 4 + 8) {
            for r in [radius, 0.5 * radius] {
                let y = &u * r;
                let y = if y.dot(a) < 0.0 { &y - &ahat * (2.0 * y.dot(&ahat)) } else { y };
                // also the flat face ⟨y,a⟩ = 0
                let flat = &y - &ahat * y.dot(&ahat);
                samples.push(y);
                samples.push(flat);
            }
        }
    }
    let mut scored: Vec<(f64, DVector<f64>)> = samples.into_iter().map(|y| (penalized(&y), y)).collect();
    scored.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut best = scored[0].0;
    if d > 1 {
        for (_, y) in scored.iter().take(4) {
            let (_, v) = nelder_mead_min(&penalized, y, 0.05 * radius, 1e-12, 2000);
            best = best.min(v);
        }
    }
    let eps1 = best / (2.0 * d as f64);
    if !(eps1 > 1e-12) {
        return Err(Error::NotStrictlyIncreasing(eps1));
    }
    let eps = eps1.min(1.0) / 2.0;
    let height = alpha * (-2.0 * d as f64 * eps).exp();
    let ellipsoid = DEllipsoid::new(matrix * (1.0 - eps), height, n.mid.clone())?;
    let factor = shrink_factor(d, eps);
    debug_assert!((ellipsoid.objective() - e1.objective() - factor.ln()).abs() < 1e-9);
    Ok(Sausage {
        ellipsoid,
        integral_factor: factor,
        eps1: Some(eps1),
        eps: Some(eps),
    })
}

/// e^{−2dε}/(1−ε)^d, the integral ratio of the strictly-increasing sausage.
pub fn shrink_factor(d: usize, eps: f64) -> f64 {
    (-2.0 * d as f64 * eps).exp() / (1.0 - eps).powi(d as i32)
}

/// The bounded-domain construction. With δ = |a|: if δ ≥ τ the supports are
/// (at most) touching and (2A ⊕ α, m) works; otherwise the function
/// x ↦ αe^{−ψ(|MAx|)}, M = Id + (τ/(τ−δ) − 1)ââᵀ, is represented with the
/// symmetric matrix (AᵀM²A)^{1/2}.
pub fn sausage_bounded(
    profile: &AdmissibleProfile,
    matrix: &DMatrix<f64>,
    alpha: f64,
    a1: &DVector<f64>,
    a2: &DVector<f64>,
) -> Result<Sausage> {
    let tau = profile.domain_bound();
    if !tau.is_finite() {
        return Err(Error::InvalidInput("profile must have a bounded domain".into()));
    }
    let d = matrix.nrows();
    DEllipsoid::new(matrix.clone(), alpha, a1.clone())?;
    let n = normalize(matrix, a1, a2)?;
    let delta = n.a.norm();
    if delta >= tau {
        return Ok(Sausage {
            ellipsoid: DEllipsoid::new(matrix * 2.0, alpha, n.mid)?,
            integral_factor: 0.5f64.powi(d as i32),
            eps1: None,
            eps: None,
        });
    }
    let ahat = &n.a / delta;
    let gain = tau / (tau - delta);
    let m = DMatrix::identity(d, d) + &ahat * ahat.transpose() * (gain - 1.0);
    let b = symmetric_factor(&(&m * matrix))?;
    Ok(Sausage {
        ellipsoid: DEllipsoid::new(b, alpha, n.mid)?,
        integral_factor: 1.0 / gain,
        eps1: None,
        eps: None,
    })
}

/// The symmetric positive square root of BᵀB, so that |Sx| = |Bx|.
fn symmetric_factor(b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let g = b.transpose() * b;
    let eig = SymmetricEigen::new(0.5 * (&g + g.transpose()));
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::Numerical("singular sausage matrix".into()));
    }
    let root = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|l| l.sqrt()));
    let s = &eig.eigenvectors * DMatrix::from_diagonal(&root) * eig.eigenvectors.transpose();
    Ok(0.5 * (&s + s.transpose()))
}

/// Largest log min{ℓ_{E1}, ℓ_{E2}} − log ℓ_E over `points`; ≤ 0 means E
/// dominates. Points outside both supports are skipped.
pub fn domination_gap(
    profile: &AdmissibleProfile,
    e1: &DEllipsoid,
    e2: &DEllipsoid,
    e: &DEllipsoid,
    points: &[DVector<f64>],
) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for x in points {
        let lower = ellipsoidal_neg_log(profile, e1, x).max(ellipsoidal_neg_log(profile, e2, x));
        if lower.is_infinite() {
            continue;
        }
        let upper = ellipsoidal_neg_log(profile, e, x);
        worst = worst.max(upper - lower);
    }
    worst
}

/// Largest β₁log ℓ₁ + β₂log ℓ₂ − log ℓ_E over `points` (≤ 0 when the
/// interpolant dominates the geometric mean).
pub fn interpolation_gap(
    profile: &AdmissibleProfile,
    e1: &DEllipsoid,
    e2: &DEllipsoid,
    e: &DEllipsoid,
    beta1: f64,
    points: &[DVector<f64>],
) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for x in points {
        let l1 = ellipsoidal_neg_log(profile, e1, x);
        let l2 = ellipsoidal_neg_log(profile, e2, x);
        if l1.is_infinite() || l2.is_infinite() {
            continue;
        }
        let upper = ellipsoidal_neg_log(profile, e, x);
        worst = worst.max(upper - beta1 * l1 - (1.0 - beta1) * l2);
    }
    worst
}

/// A regular grid of about `n` points on the box [lo, hi]^d.
pub fn grid_points(d: usize, lo: f64, hi: f64, n: usize) -> Vec<DVector<f64>> {
    let per = ((n as f64).powf(1.0 / d as f64).round() as usize).max(2);
    let total = per.pow(d as u32);
    (0..total)
        .map(|mut k| {
            DVector::from_iterator(
                d,
                (0..d).map(|_| {
                    let i = k % per;
                    k /= per;
                    lo + (hi - lo) * i as f64 / (per - 1) as f64
                }),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psi::SParam;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn interpolating_mirror_images_centers_at_origin() {
        let e1 = DEllipsoid::new(DMatrix::identity(2, 2), 1.5, v(&[1.0, -0.5])).unwrap();
        let e2 = DEllipsoid::new(DMatrix::identity(2, 2), 1.5, v(&[-1.0, 0.5])).unwrap();
        let e = interpolate(&e1, &e2, 0.5).unwrap();
        assert!(e.center.norm() < 1e-15);
        assert!((e.height - 1.5).abs() < 1e-15);
    }

    #[test]
    fn minkowski_determinant_gap() {
        let e1 = DEllipsoid::unit(2);
        let e2 = DEllipsoid::new(DMatrix::identity(2, 2) * 4.0, 1.0, DVector::zeros(2)).unwrap();
        let e = interpolate(&e1, &e2, 0.5).unwrap();
        assert!((e.det() - 6.25).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_eps1_is_one_half() {
        let p = AdmissibleProfile::psi(SParam::Finite(0.0));
        let one = DMatrix::identity(1, 1);
        let out = sausage_increasing(&p, &one, 1.0, &v(&[1.0]), &v(&[-1.0]), 1000).unwrap();
        assert!((out.eps1.unwrap() - 0.5).abs() < 1e-12);
        assert!((out.integral_factor - (-0.5f64).exp() / 0.75).abs() < 1e-12);
        assert!(out.integral_factor < 1.0);
    }

    #[test]
    fn indicator_sausage_halves_the_integral() {
        let p = AdmissibleProfile::indicator(1.0).unwrap();
        let id = DMatrix::identity(2, 2);
        let out = sausage_bounded(&p, &id, 1.0, &v(&[0.5, 0.0]), &v(&[-0.5, 0.0])).unwrap();
        let m = &out.ellipsoid.matrix;
        assert!((m[(0, 0)] - 2.0).abs() < 1e-12 && (m[(1, 1)] - 1.0).abs() < 1e-12);
        assert!((out.integral_factor - 0.5).abs() < 1e-12);
        let far = sausage_bounded(&p, &id, 1.0, &v(&[2.0, 0.0]), &v(&[-2.0, 0.0])).unwrap();
        assert!((far.ellipsoid.matrix[(0, 0)] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn flat_profile_is_rejected() {
        let p = AdmissibleProfile::flat(1.0).unwrap();
        let id = DMatrix::identity(1, 1);
        assert!(sausage_increasing(&p, &id, 1.0, &v(&[0.1]), &v(&[-0.1]), 100).is_err());
    }
}
