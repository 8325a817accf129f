//! Adaptive Gauss–Kronrod quadrature and nested cubature on boxes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and budget of an adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-11,
            max_subdivisions: 4000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(abs_tol > 0.0 && rel_tol > 0.0) {
            return Err(Error::InvalidInput(
                "quadrature tolerances must be positive".into(),
            ));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        })
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

impl QuadEstimate {
    pub fn into_result(self) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::Quadrature {
                estimate: self.value,
                error: self.error,
            })
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    (value, error)
}

/// Adaptive G7–K15 integration of `f` over `[a, b]`.
///
/// Panels with the largest error estimate are bisected until the total error
/// falls below `max(abs_tol, rel_tol·|value|)` or the subdivision budget is spent.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> QuadEstimate {
    integrate_with_breaks(f, &[a, b], spec)
}

/// Like [`integrate`], but starts from the given panel boundaries (kinks,
/// support edges).
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> QuadEstimate {
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut err = 0.0;
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (v, e) = gk15(&f, w[0], w[1]);
        total += v;
        err += e;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }
    let mut splits = 0;
    while err > spec.target(total) && splits < spec.max_subdivisions {
        let Some(p) = heap.pop() else { break };
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            heap.push(p);
            break;
        }
        let (v1, e1) = gk15(&f, p.a, mid);
        let (v2, e2) = gk15(&f, mid, p.b);
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.error;
        heap.push(Panel {
            a: p.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: p.b,
            value: v2,
            error: e2,
        });
        splits += 1;
    }
    // re-sum to shed the drift of incremental updates
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    QuadEstimate {
        value,
        error,
        converged: error <= spec.target(value),
    }
}

/// Integral over `[a, ∞)` by successive panels of doubling width. Stops once a
/// panel contributes less than the tolerance and the integrand has decayed.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    scale: f64,
    spec: &QuadratureSpec,
) -> QuadEstimate {
    let mut lo = a;
    let mut width = scale.max(1e-300);
    let mut value = 0.0;
    let mut error = 0.0;
    let mut converged = true;
    for _ in 0..200 {
        let hi = lo + width;
        let part = integrate(&f, lo, hi, spec);
        value += part.value;
        error += part.error;
        converged &= part.converged;
        let tail_small = part.value.abs() <= spec.target(value) * 1e-3 || part.value == 0.0;
        lo = hi;
        width *= 2.0;
        if tail_small && f(lo).abs() * width <= spec.target(value) * 1e-3 {
            return QuadEstimate {
                value,
                error,
                converged,
            };
        }
    }
    QuadEstimate {
        value,
        error,
        converged: false,
    }
}

/// Nested adaptive cubature of `f` over the box `lo × hi` (any dimension,
/// intended for d ≤ 3), with panels refined around the box center.
pub fn integrate_box(
    f: &dyn Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    spec: &QuadratureSpec,
) -> QuadEstimate {
    let focus: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
    integrate_box_focused(f, lo, hi, &focus, spec)
}

/// Like [`integrate_box`], refining the initial panels around `focus`
/// (typically the mode, where peaked integrands would otherwise be missed by
/// the first rule application).
pub fn integrate_box_focused(
    f: &dyn Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    focus: &[f64],
    spec: &QuadratureSpec,
) -> QuadEstimate {
    assert_eq!(lo.len(), hi.len());
    let breaks: Vec<Vec<f64>> = (0..lo.len())
        .map(|i| panel_breaks(lo[i], hi[i], focus[i]))
        .collect();
    let mut point = vec![0.0; lo.len()];
    nested(f, &breaks, spec, 0, &mut point)
}

fn panel_breaks(lo: f64, hi: f64, focus: f64) -> Vec<f64> {
    let n = 16;
    let h = (hi - lo) / n as f64;
    let mut b: Vec<f64> = (0..=n).map(|k| lo + h * k as f64).collect();
    if focus > lo && focus < hi {
        b.push(focus);
        for k in 1..=8 {
            let w = h * 0.5f64.powi(k);
            b.push(focus - w);
            b.push(focus + w);
        }
    }
    b.retain(|x| *x >= lo && *x <= hi);
    b.sort_by(f64::total_cmp);
    b.dedup_by(|a, c| (*a - *c).abs() <= 1e-14 * (hi - lo));
    b
}

fn nested(
    f: &dyn Fn(&[f64]) -> f64,
    breaks: &[Vec<f64>],
    spec: &QuadratureSpec,
    axis: usize,
    point: &mut Vec<f64>,
) -> QuadEstimate {
    let d = breaks.len();
    if axis + 1 == d {
        let cell = std::cell::RefCell::new(point.clone());
        return integrate_with_breaks(
            |x| {
                let mut p = cell.borrow_mut();
                p[axis] = x;
                f(&p)
            },
            &breaks[axis],
            spec,
        );
    }
    // inner integrals are solved more tightly than the outer one
    let inner_spec = QuadratureSpec {
        abs_tol: spec.abs_tol * 1e-2,
        rel_tol: spec.rel_tol * 1e-1,
        max_subdivisions: spec.max_subdivisions,
    };
    let conv = std::cell::Cell::new(true);
    let base = point.clone();
    let est = integrate_with_breaks(
        |x| {
            let mut p = base.clone();
            p[axis] = x;
            let inner = nested(f, breaks, &inner_spec, axis + 1, &mut p);
            if !inner.converged {
                conv.set(false);
            }
            inner.value
        },
        &breaks[axis],
        spec,
    );
    QuadEstimate {
        converged: est.converged && conv.get(),
        ..est
    }
}

/// Nested adaptive cubature of `f` over the solid ellipsoid
/// {x : (x−c)ᵀQ(x−c) ≤ r²}. Each axis runs over the exact chord of the
/// current slice, split at its midpoint, so a discontinuity on the boundary
/// is always a panel endpoint.
pub fn integrate_ellipsoid_region(
    f: &dyn Fn(&[f64]) -> f64,
    center: &[f64],
    q: &nalgebra::DMatrix<f64>,
    radius: f64,
    spec: &QuadratureSpec,
) -> QuadEstimate {
    let mut point = center.to_vec();
    chord_nested(f, center, q, radius * radius, spec, 0, &mut point)
}

/// The chord of the slice through the fixed coordinates `point[..axis]`:
/// (midpoint, half-width), or `None` when the slice is empty.
fn chord(center: &[f64], q: &nalgebra::DMatrix<f64>, r2: f64, axis: usize, point: &[f64]) -> Option<(f64, f64)> {
    let d = center.len();
    let free = d - axis;
    let qss = q.view((axis, axis), (free, free)).into_owned();
    let inv = qss.clone().cholesky()?.inverse();
    if axis == 0 {
        return Some((center[0], (r2 * inv[(0, 0)]).sqrt()));
    }
    let yp = nalgebra::DVector::from_iterator(axis, (0..axis).map(|i| point[i] - center[i]));
    let qpp = q.view((0, 0), (axis, axis));
    let qsp = q.view((axis, 0), (free, axis));
    let shift = -(&inv * (qsp * &yp));
    let fixed = (yp.transpose() * qpp * &yp)[(0, 0)] - (shift.transpose() * &qss * &shift)[(0, 0)];
    let rest = r2 - fixed;
    if !(rest > 0.0) {
        return None;
    }
    Some((center[axis] + shift[0], (rest * inv[(0, 0)]).sqrt()))
}

fn chord_nested(
    f: &dyn Fn(&[f64]) -> f64,
    center: &[f64],
    q: &nalgebra::DMatrix<f64>,
    r2: f64,
    spec: &QuadratureSpec,
    axis: usize,
    point: &mut Vec<f64>,
) -> QuadEstimate {
    let d = center.len();
    let Some((mid, half)) = chord(center, q, r2, axis, point) else {
        return QuadEstimate {
            value: 0.0,
            error: 0.0,
            converged: true,
        };
    };
    let breaks = [mid - half, mid, mid + half];
    if axis + 1 == d {
        let cell = std::cell::RefCell::new(point.clone());
        return integrate_with_breaks(
            |x| {
                let mut p = cell.borrow_mut();
                p[axis] = x;
                f(&p)
            },
            &breaks,
            spec,
        );
    }
    let inner_spec = QuadratureSpec {
        abs_tol: spec.abs_tol * 1e-2,
        rel_tol: spec.rel_tol * 1e-1,
        max_subdivisions: spec.max_subdivisions,
    };
    let conv = std::cell::Cell::new(true);
    let base = point.clone();
    let mut est = integrate_with_breaks(
        |x| {
            let mut p = base.clone();
            p[axis] = x;
            let inner = chord_nested(f, center, q, r2, &inner_spec, axis + 1, &mut p);
            if !inner.converged {
                conv.set(false);
            }
            inner.value
        },
        &breaks,
        spec,
    );
    est.converged &= conv.get();
    est
}
