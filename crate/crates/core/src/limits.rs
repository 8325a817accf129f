//! Limit studies along s: convergence to the s = 0 solution, the Gaussian
//! limit at s = ∞, and the two-sided integral comparison between solutions
//! at different s.

use std::fmt::Write as _;

use nalgebra::DVector;
use serde::Serialize;

use crate::density::LogDensity;
use crate::ellipsoid::{ellipsoidal_eval, DEllipsoid};
use crate::error::{Error, Result};
use crate::integrals::v_psi;
use crate::interpolation::grid_points;
use crate::lowner::solve_lowner_s;
use crate::profile::AdmissibleProfile;
use crate::psi::SParam;
use crate::quadrature::QuadratureSpec;
use crate::report::{SolveReport, SolverOptions};

/// Solutions along a grid of s values. `reports[i]` is `None` when the solve
/// at `s_values[i]` failed; the message is kept in `errors[i]`.
#[derive(Debug, Clone, Serialize)]
pub struct SCurve {
    pub dim: usize,
    pub s_values: Vec<f64>,
    pub reports: Vec<Option<SolveReport>>,
    pub errors: Vec<Option<String>>,
    pub limit_gaussian: Option<DEllipsoid>,
}

impl SCurve {
    /// One row per solved point: `s,alpha,a_1..a_d,eig_1..eig_d,integral`.
    pub fn to_csv(&self) -> String {
        let d = self.dim;
        let mut out = String::from("s,alpha");
        for i in 1..=d {
            write!(out, ",a_{i}").unwrap();
        }
        for i in 1..=d {
            write!(out, ",eig_{i}").unwrap();
        }
        out.push_str(",integral\n");
        for (s, r) in self.s_values.iter().zip(&self.reports) {
            let Some(r) = r else { continue };
            let e = &r.optimum;
            write!(out, "{s:?},{:?}", e.height).unwrap();
            for c in e.center.iter() {
                write!(out, ",{c:?}").unwrap();
            }
            for l in e.eigenvalues() {
                write!(out, ",{l:?}").unwrap();
            }
            writeln!(out, ",{:?}", r.integral).unwrap();
        }
        out
    }

    /// Integrals of the solved points, aligned with `s_values`.
    pub fn integrals(&self) -> Vec<Option<f64>> {
        self.reports.iter().map(|r| r.as_ref().map(|r| r.integral)).collect()
    }
}

/// solve_lowner_s at every s of an increasing positive grid, each solve
/// warm-started from the previous optimum.
pub fn s_curve(f: &LogDensity, s_grid: &[f64], opts: &SolverOptions) -> Result<SCurve> {
    if s_grid.is_empty() {
        return Err(Error::InvalidInput("empty s grid".into()));
    }
    if s_grid.iter().any(|s| !(*s > 0.0)) || s_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("the s grid must be positive and increasing".into()));
    }
    let mut reports = Vec::with_capacity(s_grid.len());
    let mut errors = Vec::with_capacity(s_grid.len());
    let mut warm: Option<DEllipsoid> = opts.warm_start.clone();
    for &s in s_grid {
        let o = SolverOptions {
            warm_start: warm.clone(),
            ..opts.clone()
        };
        let sp = if s.is_infinite() { SParam::Infinite } else { SParam::new(s)? };
        match solve_lowner_s(f, sp, &o) {
            Ok(r) => {
                warm = Some(r.optimum.clone());
                reports.push(Some(r));
                errors.push(None);
            }
            Err(e) => {
                reports.push(None);
                errors.push(Some(e.to_string()));
            }
        }
    }
    Ok(SCurve {
        dim: f.dim,
        s_values: s_grid.to_vec(),
        reports,
        errors,
        limit_gaussian: None,
    })
}

/// Distances between the s-solution and the 0-solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroLimit {
    /// [`DEllipsoid::relative_distance`] of the two optima.
    pub parameter_distance: f64,
    /// sup |ℓ_s − ℓ_0| on a grid covering the level set {f ≥ e^{−10}‖f‖}.
    pub sup_distance: f64,
}

/// Compares 𝐋^s f with 𝐋⁰f for a small s.
pub fn zero_limit_check(f: &LogDensity, small_s: f64, opts: &SolverOptions) -> Result<ZeroLimit> {
    if !(small_s > 0.0 && small_s <= 0.1) {
        return Err(Error::InvalidInput(format!("small_s must lie in (0, 0.1], got {small_s}")));
    }
    let zero = solve_lowner_s(f, SParam::Finite(0.0), opts)?;
    let o = SolverOptions {
        warm_start: Some(zero.optimum.clone()),
        ..opts.clone()
    };
    let small = solve_lowner_s(f, SParam::Finite(small_s), &o)?;
    let grid = level_grid(f, 10.0);
    let p0 = AdmissibleProfile::psi(SParam::Finite(0.0));
    let ps = AdmissibleProfile::psi(SParam::Finite(small_s));
    let sup_distance = grid
        .iter()
        .map(|x| (ellipsoidal_eval(&ps, &small.optimum, x) - ellipsoidal_eval(&p0, &zero.optimum, x)).abs())
        .fold(0.0, f64::max);
    Ok(ZeroLimit {
        parameter_distance: small.optimum.relative_distance(&zero.optimum),
        sup_distance,
    })
}

fn level_grid(f: &LogDensity, level: f64) -> Vec<DVector<f64>> {
    let d = f.dim;
    let (lo, hi) = f.level_box(level);
    let n = match d {
        1 => 801,
        2 => 81 * 81,
        _ => 21usize.pow(d as u32),
    };
    grid_points(d, 0.0, 1.0, n)
        .into_iter()
        .map(|u| DVector::from_iterator(d, (0..d).map(|i| lo[i] + u[i] * (hi[i] - lo[i]))))
        .collect()
}

/// The s = ∞ solution together with the Gaussian predicted from the last
/// point of an s-curve: A_L = √π/(λ det Â)^{1/d}·Â for Â = A_s/‖A_s‖ and
/// λ = ∫ℓ_s/α_s.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianLimit {
    pub optimum: SolveReport,
    pub from_curve: Option<DEllipsoid>,
    /// |π^{d/2}/det A_L − λ|/λ.
    pub self_consistency: Option<f64>,
    /// Relative parameter distance between `from_curve` and the s = ∞ optimum.
    pub curve_distance: Option<f64>,
}

/// A_L from a height-normalized curve point.
pub fn gaussian_from_curve_point(report: &SolveReport) -> Result<(DEllipsoid, f64)> {
    let e = &report.optimum;
    let d = e.dim() as f64;
    let norm = e.eigenvalues().last().copied().unwrap_or(1.0);
    let ahat = &e.matrix / norm;
    let lambda = report.integral / e.height;
    let det = ahat.determinant();
    let a_l = &ahat * (std::f64::consts::PI.sqrt() / (lambda * det).powf(1.0 / d));
    let g = DEllipsoid::new(a_l, e.height, e.center.clone())?;
    let residual = (std::f64::consts::PI.powf(0.5 * d) / g.det() - lambda).abs() / lambda;
    Ok((g, residual))
}

/// Solves at s = ∞ (infeasibility is returned as an error carrying the tail
/// witness) and, if `curve` is given, cross-checks the Gaussian predicted by
/// its last solved point.
pub fn gaussian_limit(f: &LogDensity, curve: Option<&SCurve>, opts: &SolverOptions) -> Result<GaussianLimit> {
    let optimum = solve_lowner_s(f, SParam::Infinite, opts)?;
    let last = curve.and_then(|c| c.reports.iter().rev().flatten().next());
    let (from_curve, self_consistency, curve_distance) = match last {
        Some(r) => {
            let (g, res) = gaussian_from_curve_point(r)?;
            let dist = g.relative_distance(&optimum.optimum);
            (Some(g), Some(res), Some(dist))
        }
        None => (None, None, None),
    };
    Ok(GaussianLimit {
        optimum,
        from_curve,
        self_consistency,
        curve_distance,
    })
}

/// The two-sided bound on ∫𝐋^{s₁}f / ∫𝐋^{s₂}f for s₁ < s₂:
/// [V₁/V₂, √(((d+s₂)/s₂)^{s₂}((d+s₂)/d)^d)·V₁/V₂].
pub fn comparison_band(d: usize, s1: f64, s2: f64) -> Result<(f64, f64)> {
    if !(s1 >= 0.0 && s2 > s1 && s2.is_finite()) {
        return Err(Error::InvalidInput("need 0 ≤ s1 < s2 < ∞".into()));
    }
    let spec = QuadratureSpec::default();
    let v1 = v_psi(&AdmissibleProfile::psi(SParam::new(s1)?), d, &spec)?;
    let v2 = v_psi(&AdmissibleProfile::psi(SParam::new(s2)?), d, &spec)?;
    let df = d as f64;
    let log_factor = 0.5 * (s2 * ((df + s2) / s2).ln() + df * ((df + s2) / df).ln());
    let base = v1 / v2;
    Ok((base, base * log_factor.exp()))
}

/// One adjacent pair of a curve checked against [`comparison_band`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandCheck {
    pub s1: f64,
    pub s2: f64,
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

/// Checks every adjacent pair of solved finite points, with relative slack
/// `slack` on both ends of the band.
pub fn band_checks(curve: &SCurve, slack: f64) -> Result<Vec<BandCheck>> {
    let solved: Vec<(f64, f64)> = curve
        .s_values
        .iter()
        .zip(&curve.reports)
        .filter_map(|(s, r)| r.as_ref().filter(|_| s.is_finite()).map(|r| (*s, r.integral)))
        .collect();
    solved
        .windows(2)
        .map(|w| {
            let ((s1, i1), (s2, i2)) = (w[0], w[1]);
            let (lower, upper) = comparison_band(curve.dim, s1, s2)?;
            let ratio = i1 / i2;
            Ok(BandCheck {
                s1,
                s2,
                ratio,
                lower,
                upper,
                holds: ratio >= lower * (1.0 - slack) && ratio <= upper * (1.0 + slack),
            })
        })
        .collect()
}
