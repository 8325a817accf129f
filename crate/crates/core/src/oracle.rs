//! Numerical test of f ≤ ℓ_E: a search for sup (log f − log ℓ_E).
//!
//! The search runs along rays from the center in the normalized coordinates
//! y = A(x − a), refines the best rays locally, and separately compares the
//! tails through the recession functions of φ and ψ.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::density::{probe_points, LogDensity};
use crate::ellipsoid::DEllipsoid;
use crate::error::{Error, Result};
use crate::legendre::golden_max;
use crate::optimize::nelder_mead_min;
use crate::profile::AdmissibleProfile;

/// Slack on the tail ratio c_ψ|Aw|^q / φ_q(w) before it counts as a violation.
pub(crate) const TAIL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateStatus {
    Holds,
    Violated,
    Inconclusive,
}

/// Outcome of [`is_below`]. `margin` is −sup(log f − log ℓ) over the searched points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub holds: bool,
    pub witness: Option<Vec<f64>>,
    pub margin: f64,
    pub status: CertificateStatus,
    /// Number of evaluations of log f − log ℓ spent.
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Scan {
    /// sup of log f − log ℓ found; +∞ when the tails are out of order.
    pub max_violation: f64,
    pub witness: Option<DVector<f64>>,
    /// Separated points with positive violation, best first.
    pub cuts: Vec<DVector<f64>>,
    /// Unit directions w with c_ψ|Aw|^q > φ_q(w).
    pub tail_cuts: Vec<DVector<f64>>,
    /// max_w c_ψ|Aw|^q / φ_q(w), or 0 when the tails are not comparable at order q.
    pub tail_ratio: f64,
    pub evaluations: usize,
    pub saw_nan: bool,
}

/// log f(x) − log ℓ(x), with −∞ wherever f vanishes.
fn gap(f: &LogDensity, profile: &AdmissibleProfile, log_alpha: f64, y_norm: f64, x: &DVector<f64>) -> f64 {
    let phi = f.phi(x);
    if phi.is_infinite() {
        return f64::NEG_INFINITY;
    }
    profile.eval(y_norm) - log_alpha - phi
}

/// The order q at which f and ψ must be compared in the tails, if any.
pub(crate) fn tail_order(f: &LogDensity, profile: &AdmissibleProfile) -> Option<f64> {
    let q = profile.growth_order();
    (q.is_finite() && f.growth_order() == q).then_some(q)
}

/// Directions in ℝ^d used by both searches.
fn directions(d: usize, n: usize) -> Vec<DVector<f64>> {
    probe_points(d, n)
}

fn tail_scan(
    f: &LogDensity,
    profile: &AdmissibleProfile,
    e: &DEllipsoid,
    q: f64,
    n_dirs: usize,
    max_cuts: usize,
) -> (f64, Vec<DVector<f64>>) {
    let d = e.dim();
    let c = profile.tail_coefficient();
    let ratio = |w: &DVector<f64>| {
        let nw = w.norm();
        if nw == 0.0 {
            return 0.0;
        }
        let w = w / nw;
        let r = f.recession(&w, q);
        let top = c * (&e.matrix * &w).norm().powf(q);
        if r == 0.0 {
            f64::INFINITY
        } else {
            top / r
        }
    };
    let mut cand: Vec<DVector<f64>> = directions(d, n_dirs);
    cand.extend(f.candidate_directions());
    let eig = e.matrix.clone().symmetric_eigen();
    for k in 0..d {
        let v = eig.eigenvectors.column(k).into_owned();
        cand.push(-&v);
        cand.push(v);
    }
    let mut scored: Vec<(DVector<f64>, f64)> = cand.into_iter().map(|w| {
        let r = ratio(&w);
        (w, r)
    }).collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    // local refinement of the leading directions
    if d > 1 {
        let lead: Vec<DVector<f64>> = scored.iter().take(4).map(|(w, _)| w.clone()).collect();
        for w in lead {
            let (x, v) = nelder_mead_min(&|z: &DVector<f64>| -ratio(z), &w, 0.02, 1e-15, 400 * d);
            if -v > 0.0 {
                let nx = x.norm();
                scored.push((x / nx, -v));
            }
        }
        scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    }
    let best = scored.first().map(|s| s.1).unwrap_or(0.0);
    let mut cuts: Vec<DVector<f64>> = Vec::new();
    for (w, r) in &scored {
        if *r <= 1.0 + TAIL_SLACK || cuts.len() >= max_cuts {
            break;
        }
        let w = w / w.norm();
        if cuts.iter().all(|u| (u - &w).norm() > 0.05) {
            cuts.push(w);
        }
    }
    (best, cuts)
}

/// Full violation search for ℓ_E with profile ψ against f.
pub(crate) fn scan(
    f: &LogDensity,
    profile: &AdmissibleProfile,
    e: &DEllipsoid,
    n_dirs: usize,
    max_cuts: usize,
) -> Scan {
    let d = e.dim();
    let log_alpha = e.height.ln();
    let inv: DMatrix<f64> = e.inverse_position().matrix;
    let a = e.center.clone();
    let x_of = |y: &DVector<f64>| &a + &inv * y;
    let g_of_y = |y: &DVector<f64>| gap(f, profile, log_alpha, y.norm(), &x_of(y));
    let (mode, phi_min) = f.mode_value();
    let tau = profile.domain_bound();
    let mut evaluations = 0usize;
    let mut saw_nan = false;

    // tails first
    let (tail_ratio, tail_cuts) = match tail_order(f, profile) {
        Some(q) => tail_scan(f, profile, e, q, n_dirs, max_cuts),
        None => (0.0, Vec::new()),
    };

    let mut found: Vec<(DVector<f64>, f64)> = Vec::new();
    let mut infinite: Vec<(DVector<f64>, f64)> = Vec::new();
    let y_mode = e.apply(&mode);
    found.push((y_mode.clone(), g_of_y(&y_mode)));
    found.push((DVector::zeros(d), g_of_y(&DVector::zeros(d))));

    let mut reach: f64 = 0.0;
    for u in directions(d, n_dirs) {
        let phi_at = |t: f64| f.phi(&x_of(&(&u * t)));
        // far end of the ray: f negligible relative to its peak, or the edge of its support
        let mut lo = 0.0;
        let mut t = 1.0;
        let mut far = loop {
            let p = phi_at(t);
            evaluations += 1;
            if p.is_infinite() {
                let mut hi = t;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if phi_at(mid).is_finite() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                evaluations += 60;
                break lo;
            }
            if p - phi_min >= 40.0 || t >= 1e8 {
                break t;
            }
            lo = t;
            t *= 2.0;
        };
        if tau.is_finite() {
            if far > tau * (1.0 + 1e-12) {
                // f lives beyond the support of ℓ along this ray
                infinite.push((&u * far, far / tau));
            }
            far = far.min(tau);
        }
        reach = reach.max(far);
        let n_lin = 120;
        let mut ts: Vec<f64> = (1..=n_lin).map(|k| far * k as f64 / n_lin as f64).collect();
        ts.extend((1..=30).map(|j| far * 0.5f64.powi(j)));
        ts.sort_by(f64::total_cmp);
        let vals: Vec<f64> = ts.iter().map(|&t| g_of_y(&(&u * t))).collect();
        evaluations += ts.len();
        // every sampled local maximum is polished: kinks of φ make narrow peaks
        let mut peaks: Vec<usize> = Vec::new();
        for (k, v) in vals.iter().enumerate() {
            if v.is_nan() {
                saw_nan = true;
                continue;
            }
            let left = if k == 0 { f64::NEG_INFINITY } else { vals[k - 1] };
            let right = vals.get(k + 1).copied().unwrap_or(f64::NEG_INFINITY);
            if !(left > *v) && !(right > *v) {
                peaks.push(k);
            }
        }
        peaks.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
        for &k in peaks.iter().take(4) {
            let a_t = if k == 0 { 0.0 } else { ts[k - 1] };
            let b_t = if k + 1 < ts.len() { ts[k + 1] } else { ts[k] };
            let (t_star, g_star) = golden_max(&|t: f64| g_of_y(&(&u * t)), a_t, b_t, 1e-12 * (1.0 + b_t));
            evaluations += 80;
            if g_star >= vals[k] {
                found.push((&u * t_star, g_star));
            } else {
                found.push((&u * ts[k], vals[k]));
            }
        }
    }

    found.retain(|(_, g)| !g.is_nan());
    found.sort_by(|p, q| q.1.total_cmp(&p.1));

    // local refinement off the rays
    if d > 1 && tau.is_infinite() {
        let mut seeds: Vec<DVector<f64>> = Vec::new();
        for (y, _) in &found {
            if seeds.len() >= max_cuts.max(2) {
                break;
            }
            if seeds.iter().all(|s| (s - y).norm() > 0.05 * (1.0 + y.norm())) {
                seeds.push(y.clone());
            }
        }
        for y0 in seeds {
            let step = 0.02 * y0.norm().max(0.1);
            // stay inside the scanned region: where the gap flattens out at
            // infinity the simplex would otherwise drift without bound
            let bounded = |y: &DVector<f64>| if y.norm() > 2.0 * reach { f64::INFINITY } else { -g_of_y(y) };
            let (y, v) = nelder_mead_min(&bounded, &y0, step, 1e-15, 600 * d);
            evaluations += 600 * d;
            if (-v).is_finite() {
                found.push((y, -v));
            }
        }
        found.sort_by(|p, q| q.1.total_cmp(&p.1));
    }

    let mut max_violation = found.first().map(|p| p.1).unwrap_or(f64::NEG_INFINITY);
    let mut witness = found.first().map(|p| x_of(&p.0));
    let mut cuts: Vec<DVector<f64>> = Vec::new();
    if !infinite.is_empty() {
        infinite.sort_by(|p, q| q.1.total_cmp(&p.1));
        max_violation = f64::INFINITY;
        witness = Some(x_of(&infinite[0].0));
        for (y, _) in &infinite {
            if cuts.len() >= max_cuts {
                break;
            }
            if cuts.iter().all(|c| (&e.apply(c) - y).norm() > 0.05 * (1.0 + y.norm())) {
                cuts.push(x_of(y));
            }
        }
    }
    for (y, g) in &found {
        if *g <= 0.0 || cuts.len() >= max_cuts {
            break;
        }
        if cuts.iter().all(|c| (&e.apply(c) - y).norm() > 0.02 * (1.0 + y.norm())) {
            cuts.push(x_of(y));
        }
    }
    if tail_ratio > 1.0 + TAIL_SLACK {
        max_violation = f64::INFINITY;
        // a finite point where the violation is visible
        let w = &tail_cuts[0];
        let mut t = 1.0;
        while t < 1e12 {
            let x = &a + w * t;
            let g = gap(f, profile, log_alpha, e.apply(&x).norm(), &x);
            if g > 0.0 {
                witness = Some(x);
                break;
            }
            t *= 2.0;
        }
    }
    Scan {
        max_violation,
        witness,
        cuts,
        tail_cuts,
        tail_ratio,
        evaluations,
        saw_nan,
    }
}

/// Tests f ≤ ℓ_E numerically. `budget` is the number of search directions
/// (0 for the dimension default).
pub fn is_below(f: &LogDensity, profile: &AdmissibleProfile, e: &DEllipsoid, budget: usize) -> Result<Certificate> {
    if f.dim != e.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim,
            got: e.dim(),
        });
    }
    let d = f.dim;
    let n = if budget == 0 {
        crate::report::SolverOptions::default().directions(d)
    } else {
        budget
    };
    let s = scan(f, profile, e, n, 1);
    let enough = d == 1 || n >= 8 * d;
    let status = if s.saw_nan || !s.max_violation.is_finite() && s.witness.is_none() {
        CertificateStatus::Inconclusive
    } else if s.max_violation > 1e-12 {
        CertificateStatus::Violated
    } else if enough {
        CertificateStatus::Holds
    } else {
        CertificateStatus::Inconclusive
    };
    Ok(Certificate {
        holds: status == CertificateStatus::Holds,
        witness: match status {
            CertificateStatus::Violated => s.witness.map(|w| w.iter().copied().collect()),
            _ => None,
        },
        margin: -s.max_violation,
        status,
        evaluations: s.evaluations,
    })
}
