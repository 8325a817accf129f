//! Structured log-concave functions f = e^{−φ}.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::function::gamma::gamma;

use crate::barrier::{BarrierOptions, Group, Program, RadialConstraint, ScalarConstraint};
use crate::ellipsoid::{row_major, DEllipsoid, MatrixRepr};
use crate::error::{Error, Result};
use crate::integrals::{cubature_ellipsoidal, v_psi};
use crate::legendre::golden_max;
use crate::optimize::nelder_mead_min;
use crate::polytope::Polytope;
use crate::profile::AdmissibleProfile;
use crate::psi::SParam;
use crate::quadrature::{integrate_box_focused, QuadratureSpec};

#[derive(Debug, Clone, PartialEq)]
pub enum DensityKind {
    /// α·e^{−ψ(|A(x−a)|)}; `s` is kept when the profile is ψ_s.
    Ellipsoidal {
        s: Option<SParam>,
        profile: AdmissibleProfile,
        ellipsoid: DEllipsoid,
    },
    /// α·e^{−|A(x−a)|²}.
    Gaussian { ellipsoid: DEllipsoid },
    /// h_E(x) = (1/α)[1 − |A⁻¹(x−a)|²]^{s/2}.
    Height { s: SParam, ellipsoid: DEllipsoid },
    /// α·e^{−‖x − a‖_K^p}.
    GaugePower {
        polytope: Polytope,
        p: f64,
        alpha: f64,
        center: DVector<f64>,
    },
    /// Pointwise minimum of the parts.
    MinOf { parts: Vec<LogDensity> },
    /// The log-conjugate e^{−ℒφ}, evaluated numerically unless a closed form is known.
    Polar { of: Box<LogDensity> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogDensity {
    pub dim: usize,
    pub kind: DensityKind,
    cache: ModeCache,
}

/// Memoized (argmin φ, min φ); ignored by equality.
#[derive(Debug, Clone, Default)]
struct ModeCache(std::sync::OnceLock<(DVector<f64>, f64)>);

impl PartialEq for ModeCache {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

/// One part of a min_of after flattening, as a constraint on (x, z) for the
/// sup-norm program.
pub(crate) enum Piece<'a> {
    Radial(AdmissibleProfile, DEllipsoid),
    Gauge(&'a Polytope, f64, f64, &'a DVector<f64>),
    Other,
}

impl LogDensity {
    pub fn ellipsoidal(s: SParam, e: DEllipsoid) -> Self {
        Self {
            cache: ModeCache::default(),
            dim: e.dim(),
            kind: DensityKind::Ellipsoidal {
                s: Some(s),
                profile: AdmissibleProfile::psi(s),
                ellipsoid: e,
            },
        }
    }

    pub fn with_profile(profile: AdmissibleProfile, e: DEllipsoid) -> Self {
        Self {
            cache: ModeCache::default(),
            dim: e.dim(),
            kind: DensityKind::Ellipsoidal {
                s: None,
                profile,
                ellipsoid: e,
            },
        }
    }

    pub fn gaussian(e: DEllipsoid) -> Self {
        Self {
            cache: ModeCache::default(),
            dim: e.dim(),
            kind: DensityKind::Gaussian { ellipsoid: e },
        }
    }

    pub fn height(s: SParam, e: DEllipsoid) -> Self {
        Self {
            cache: ModeCache::default(),
            dim: e.dim(),
            kind: DensityKind::Height { s, ellipsoid: e },
        }
    }

    pub fn gauge_power(vertices: Vec<DVector<f64>>, p: f64, alpha: f64) -> Result<Self> {
        let polytope = Polytope::from_vertices(vertices)?;
        let d = polytope.dim();
        Self::gauge_power_at(polytope, p, alpha, DVector::zeros(d))
    }

    pub fn gauge_power_at(polytope: Polytope, p: f64, alpha: f64, center: DVector<f64>) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidInput(format!("gauge exponent must be >= 1, got {p}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidInput("gauge height must be positive".into()));
        }
        if !polytope.origin_interior() {
            return Err(Error::InvalidInput("the origin must lie in the interior of K".into()));
        }
        if center.len() != polytope.dim() {
            return Err(Error::DimensionMismatch {
                expected: polytope.dim(),
                got: center.len(),
            });
        }
        Ok(Self {
            cache: ModeCache::default(),
            dim: polytope.dim(),
            kind: DensityKind::GaugePower {
                polytope,
                p,
                alpha,
                center,
            },
        })
    }

    pub fn min_of(parts: Vec<LogDensity>) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(Error::InvalidInput("min_of needs at least one part".into()));
        };
        let dim = first.dim;
        if let Some(bad) = parts.iter().find(|p| p.dim != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.dim,
            });
        }
        let f = Self {
            cache: ModeCache::default(),
            dim,
            kind: DensityKind::MinOf { parts },
        };
        if !f.mode_value().1.is_finite() {
            return Err(Error::InvalidInput("the parts have disjoint supports".into()));
        }
        Ok(f)
    }

    /// The log-conjugate f°. Centered ellipsoidal inputs map to ellipsoidal outputs.
    pub fn polar(of: LogDensity) -> Self {
        let dim = of.dim;
        match &of.kind {
            DensityKind::Ellipsoidal {
                profile, ellipsoid, ..
            } if ellipsoid.center.norm() == 0.0 => {
                LogDensity::with_profile(AdmissibleProfile::conjugate(profile.clone()), ellipsoid.inverse_position())
            }
            DensityKind::Gaussian { ellipsoid } if ellipsoid.center.norm() == 0.0 => LogDensity::with_profile(
                AdmissibleProfile::power(0.25, 2.0).expect("valid"),
                ellipsoid.inverse_position(),
            ),
            DensityKind::Polar { of: inner } => (**inner).clone(),
            _ => Self {
                cache: ModeCache::default(),
                dim,
                kind: DensityKind::Polar { of: Box::new(of) },
            },
        }
    }

    /// φ(x) = −log f(x), `+∞` outside the support.
    pub fn phi(&self, x: &DVector<f64>) -> f64 {
        match &self.kind {
            DensityKind::Ellipsoidal {
                profile, ellipsoid, ..
            } => profile.eval(ellipsoid.apply(x).norm()) - ellipsoid.height.ln(),
            DensityKind::Gaussian { ellipsoid } => ellipsoid.apply(x).norm_squared() - ellipsoid.height.ln(),
            DensityKind::Height { s, ellipsoid } => {
                let inv = ellipsoid.inverse_position();
                AdmissibleProfile::height_cap(*s).eval(inv.apply(x).norm()) - inv.height.ln()
            }
            DensityKind::GaugePower {
                polytope,
                p,
                alpha,
                center,
            } => polytope.gauge(&(x - center)).powf(*p) - alpha.ln(),
            DensityKind::MinOf { parts } => parts.iter().map(|q| q.phi(x)).fold(f64::NEG_INFINITY, f64::max),
            DensityKind::Polar { of } => of.conjugate_phi(x),
        }
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        let p = self.phi(x);
        if p.is_infinite() {
            0.0
        } else {
            (-p).exp()
        }
    }

    /// ℒφ(y) = sup_x (⟨x, y⟩ − φ(x)).
    pub fn conjugate_phi(&self, y: &DVector<f64>) -> f64 {
        self.conjugate_argmax(y).0
    }

    /// ℒφ(y) together with a maximizer x, which is also a subgradient of ℒφ at y.
    /// The maximizer is `∞`-filled when the supremum diverges.
    pub fn conjugate_argmax(&self, y: &DVector<f64>) -> (f64, DVector<f64>) {
        let (x0, min_phi) = self.mode_value();
        let diverged = || (f64::INFINITY, DVector::from_element(self.dim, f64::INFINITY));
        if y.norm() == 0.0 {
            return (-min_phi, x0);
        }
        let g = |x: &DVector<f64>| x.dot(y) - self.phi(x);
        if self.dim == 1 {
            let dir = y[0].signum();
            let gl = |t: f64| {
                let v = g(&DVector::from_element(1, x0[0] + dir * t));
                if v.is_nan() {
                    f64::NEG_INFINITY
                } else {
                    v
                }
            };
            let mut prev = gl(0.0);
            let mut step = 1e-3 * (1.0 + x0[0].abs());
            let (mut before, mut last) = (0.0, 0.0);
            loop {
                let cur = gl(step);
                if cur < prev || !cur.is_finite() {
                    break;
                }
                if step > 1e12 {
                    return diverged();
                }
                before = last;
                last = step;
                prev = cur;
                step *= 2.0;
            }
            let _ = last;
            let (t, v) = golden_max(&gl, before, step, 1e-11);
            let at = |t: f64| DVector::from_element(1, x0[0] + dir * t);
            let g0 = gl(0.0);
            return if v >= g0 { (v, at(t)) } else { (g0, at(0.0)) };
        }
        // divergence check along the direction of y
        let u = y / y.norm();
        let far = |r: f64| g(&(&x0 + &u * r));
        if far(1e12) > far(1e11) + 1e-6 && far(1e12).is_finite() {
            return diverged();
        }
        let neg = |x: &DVector<f64>| {
            let v = g(x);
            if v.is_finite() {
                -v
            } else {
                f64::INFINITY
            }
        };
        let mut best = nelder_mead_min(&neg, &x0, 0.5, 1e-13, 4000);
        for _ in 0..3 {
            let next = nelder_mead_min(&neg, &best.0, 0.05, 1e-14, 4000);
            if next.1 >= best.1 - 1e-15 {
                break;
            }
            best = next;
        }
        (-best.1, best.0)
    }

    /// ‖f‖_∞.
    pub fn sup_norm(&self) -> f64 {
        (-self.mode_value().1).exp()
    }

    /// A maximizer of f.
    pub fn mode(&self) -> DVector<f64> {
        self.mode_value().0
    }

    /// (argmin φ, min φ).
    pub fn mode_value(&self) -> (DVector<f64>, f64) {
        self.cache.0.get_or_init(|| self.compute_mode()).clone()
    }

    fn compute_mode(&self) -> (DVector<f64>, f64) {
        let d = self.dim;
        match &self.kind {
            DensityKind::Ellipsoidal { ellipsoid, .. } | DensityKind::Gaussian { ellipsoid } => {
                (ellipsoid.center.clone(), -ellipsoid.height.ln())
            }
            DensityKind::Height { ellipsoid, .. } => (ellipsoid.center.clone(), ellipsoid.height.ln()),
            DensityKind::GaugePower { alpha, center, .. } => (center.clone(), -alpha.ln()),
            DensityKind::MinOf { .. } => self.min_of_mode(),
            DensityKind::Polar { .. } => {
                let f = |y: &DVector<f64>| self.phi(y);
                let (x, v) = nelder_mead_min(&f, &DVector::zeros(d), 0.5, 1e-13, 4000);
                (x, v)
            }
        }
    }

    pub(crate) fn pieces(&self) -> Vec<Piece<'_>> {
        match &self.kind {
            DensityKind::Ellipsoidal {
                profile, ellipsoid, ..
            } => vec![Piece::Radial(profile.clone(), ellipsoid.clone())],
            DensityKind::Gaussian { ellipsoid } => {
                vec![Piece::Radial(AdmissibleProfile::psi(SParam::Infinite), ellipsoid.clone())]
            }
            DensityKind::Height { s, ellipsoid } => {
                vec![Piece::Radial(AdmissibleProfile::height_cap(*s), ellipsoid.inverse_position())]
            }
            DensityKind::GaugePower {
                polytope,
                p,
                alpha,
                center,
            } => vec![Piece::Gauge(polytope, *p, *alpha, center)],
            DensityKind::MinOf { parts } => parts.iter().flat_map(|q| q.pieces()).collect(),
            _ => vec![Piece::Other],
        }
    }

    /// min_x max_i φ_i(x) as the program min z s.t. φ_i(x) ≤ z.
    fn min_of_mode(&self) -> (DVector<f64>, f64) {
        let d = self.dim;
        let DensityKind::MinOf { parts } = &self.kind else {
            unreachable!()
        };
        let pieces = self.pieces();
        let fallback = || {
            let f = |x: &DVector<f64>| self.phi(x);
            let starts: Vec<DVector<f64>> = parts.iter().map(|p| p.mode()).collect();
            let mut best = (starts[0].clone(), f64::INFINITY);
            for s in &starts {
                let r = nelder_mead_min(&f, s, 0.5, 1e-14, 6000);
                if r.1 < best.1 {
                    best = r;
                }
            }
            best
        };
        if pieces.iter().any(|p| matches!(p, Piece::Other)) {
            return fallback();
        }
        let n = d + 1;
        let mut prog = Program::new(n);
        prog.c[d] = 1.0;
        let mut gz = DVector::zeros(n);
        gz[d] = 1.0;
        for piece in &pieces {
            match piece {
                Piece::Radial(profile, e) => {
                    let mut jac = DMatrix::zeros(d, n);
                    jac.view_mut((0, 0), (d, d)).copy_from(&e.matrix);
                    prog.radial.push(Group {
                        profile: profile.clone(),
                        items: vec![RadialConstraint {
                            jac,
                            l0: -(&e.matrix * &e.center),
                            g: gz.clone(),
                            w0: e.height.ln(),
                        }],
                    });
                }
                Piece::Gauge(k, p, alpha, center) => {
                    let items = k
                        .facets
                        .iter()
                        .map(|f| {
                            let mut j = DVector::zeros(n);
                            for i in 0..d {
                                j[i] = f.normal[i] / f.offset;
                            }
                            let l0 = -f.normal.dot(center) / f.offset;
                            ScalarConstraint {
                                j,
                                l0,
                                g: gz.clone(),
                                w0: alpha.ln(),
                            }
                        })
                        .collect();
                    prog.scalar.push(Group {
                        profile: AdmissibleProfile::Power {
                            scale: 1.0,
                            exponent: *p,
                        },
                        items,
                    });
                }
                Piece::Other => unreachable!(),
            }
        }
        let mut best_start: Option<DVector<f64>> = None;
        let mut candidates: Vec<DVector<f64>> = parts.iter().map(|p| p.mode()).collect();
        let mean = candidates.iter().fold(DVector::zeros(d), |a, c| a + c) / candidates.len() as f64;
        candidates.push(mean);
        for x in candidates {
            let z = self.phi(&x);
            if z.is_finite() {
                let mut v = DVector::zeros(n);
                v.rows_mut(0, d).copy_from(&x);
                v[d] = z + 1.0;
                if prog.feasible(&v) {
                    best_start = Some(v);
                    break;
                }
            }
        }
        let Some(start) = best_start else {
            return fallback();
        };
        let opts = BarrierOptions {
            gap: 1e-13,
            ..Default::default()
        };
        match prog.solve(&start, &opts) {
            Ok(sol) => {
                let x = sol.v.rows(0, d).into_owned();
                let v = self.phi(&x);
                (x, v)
            }
            Err(_) => fallback(),
        }
    }

    pub fn is_even(&self) -> bool {
        match &self.kind {
            DensityKind::Ellipsoidal { ellipsoid, .. }
            | DensityKind::Gaussian { ellipsoid }
            | DensityKind::Height { ellipsoid, .. } => ellipsoid.center.norm() == 0.0,
            DensityKind::GaugePower {
                polytope, center, ..
            } => center.norm() == 0.0 && polytope.is_symmetric(),
            DensityKind::MinOf { parts } => {
                if parts.iter().all(|p| p.is_even()) {
                    return true;
                }
                // a symmetric arrangement of non-even parts: test φ(x) = φ(−x) on probes
                let probes = probe_points(self.dim, 64);
                probes.iter().all(|x| {
                    let a = self.phi(x);
                    let b = self.phi(&(-x));
                    (a.is_infinite() && b.is_infinite()) || (a - b).abs() <= 1e-12 * (1.0 + a.abs())
                })
            }
            DensityKind::Polar { of } => of.is_even(),
        }
    }

    /// Growth order of φ at infinity: 1 for linear, p for |x|^p, ∞ for bounded support.
    pub fn growth_order(&self) -> f64 {
        match &self.kind {
            DensityKind::Ellipsoidal { profile, .. } => profile.growth_order(),
            DensityKind::Gaussian { .. } => 2.0,
            DensityKind::Height { s, .. } => match s {
                SParam::Infinite => 2.0,
                SParam::Finite(_) => f64::INFINITY,
            },
            DensityKind::GaugePower { p, .. } => *p,
            DensityKind::MinOf { parts } => parts.iter().map(|p| p.growth_order()).fold(0.0, f64::max),
            DensityKind::Polar { of } => {
                let q = of.growth_order();
                if q.is_infinite() {
                    1.0
                } else if q <= 1.0 {
                    f64::INFINITY
                } else {
                    q / (q - 1.0)
                }
            }
        }
    }

    /// lim_{t→∞} φ(x₀ + t·w)/t^q: 0 when φ grows slower than order q, ∞ when faster.
    pub fn recession(&self, w: &DVector<f64>, q: f64) -> f64 {
        fn by_order(order: f64, q: f64, coefficient: impl FnOnce() -> f64) -> f64 {
            if order > q {
                f64::INFINITY
            } else if order < q {
                0.0
            } else {
                coefficient()
            }
        }
        match &self.kind {
            DensityKind::Ellipsoidal {
                profile, ellipsoid, ..
            } => by_order(profile.growth_order(), q, || {
                profile.tail_coefficient() * (&ellipsoid.matrix * w).norm().powf(q)
            }),
            DensityKind::Gaussian { ellipsoid } => by_order(2.0, q, || (&ellipsoid.matrix * w).norm_squared()),
            DensityKind::Height { s, ellipsoid } => match s {
                SParam::Infinite => by_order(2.0, q, || {
                    (&ellipsoid.inverse_position().matrix * w).norm_squared()
                }),
                SParam::Finite(_) => f64::INFINITY,
            },
            DensityKind::GaugePower { polytope, p, .. } => by_order(*p, q, || polytope.gauge(w).powf(*p)),
            DensityKind::MinOf { parts } => parts.iter().map(|p| p.recession(w, q)).fold(0.0, f64::max),
            DensityKind::Polar { of } => by_order(self.growth_order(), q, || {
                if q == 1.0 {
                    if let Some(h) = of.domain_support(w) {
                        return h;
                    }
                }
                let x0 = self.mode();
                let t = 1e3;
                let far = self.phi(&(&x0 + w * (2.0 * t)));
                let near = self.phi(&(&x0 + w * t));
                (far - near) / ((2.0 * t).powf(q) - t.powf(q))
            }),
        }
    }

    /// sup{⟨x, w⟩ : φ(x) < ∞}, the recession of the polar at order 1, where it
    /// can be computed without extrapolation.
    fn domain_support(&self, w: &DVector<f64>) -> Option<f64> {
        match &self.kind {
            DensityKind::Ellipsoidal {
                profile, ellipsoid, ..
            } if profile.domain_bound().is_finite() => Some(
                ellipsoid.center.dot(w) + profile.domain_bound() * (&ellipsoid.inverse_position().matrix * w).norm(),
            ),
            DensityKind::Height { ellipsoid, .. } => {
                Some(ellipsoid.center.dot(w) + (&ellipsoid.matrix * w).norm())
            }
            _ if self.dim == 1 && w[0] != 0.0 => {
                let x0 = self.mode()[0];
                let dir = w[0].signum();
                let at = |t: f64| self.phi(&DVector::from_element(1, x0 + dir * t)).is_finite();
                let mut hi = 1.0;
                while at(hi) {
                    hi *= 2.0;
                    if hi > 1e12 {
                        return None;
                    }
                }
                let mut lo = 0.0;
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if at(mid) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Some((x0 + dir * lo) * w[0])
            }
            _ => None,
        }
    }

    /// Directions worth testing first in tail searches: the vertices of gauge parts.
    pub fn candidate_directions(&self) -> Vec<DVector<f64>> {
        match &self.kind {
            DensityKind::GaugePower { polytope, .. } => polytope
                .vertices
                .iter()
                .filter(|v| v.norm() > 0.0)
                .map(|v| v / v.norm())
                .collect(),
            DensityKind::MinOf { parts } => parts.iter().flat_map(|p| p.candidate_directions()).collect(),
            _ => Vec::new(),
        }
    }

    pub fn bounded_support(&self) -> bool {
        self.growth_order().is_infinite()
    }

    /// A box containing {φ ≤ min φ + level}.
    pub fn level_box(&self, level: f64) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim;
        let (_, phi_min) = self.mode_value();
        let ell_box = |profile: &AdmissibleProfile, e: &DEllipsoid, budget: f64| {
            let r = profile_radius(profile, budget.max(0.0));
            let inv = e.inverse_position().matrix;
            let inv2 = &inv * &inv;
            let lo: Vec<f64> = (0..d).map(|i| e.center[i] - r * inv2[(i, i)].sqrt()).collect();
            let hi: Vec<f64> = (0..d).map(|i| e.center[i] + r * inv2[(i, i)].sqrt()).collect();
            (lo, hi)
        };
        let top = phi_min + level;
        match &self.kind {
            DensityKind::Ellipsoidal {
                profile, ellipsoid, ..
            } => ell_box(profile, ellipsoid, top + ellipsoid.height.ln()),
            DensityKind::Gaussian { ellipsoid } => ell_box(
                &AdmissibleProfile::psi(SParam::Infinite),
                ellipsoid,
                top + ellipsoid.height.ln(),
            ),
            DensityKind::Height { s, ellipsoid } => {
                let inv = ellipsoid.inverse_position();
                ell_box(&AdmissibleProfile::height_cap(*s), &inv, top + inv.height.ln())
            }
            DensityKind::GaugePower {
                polytope,
                p,
                alpha,
                center,
            } => {
                let r = (top + alpha.ln()).max(0.0).powf(1.0 / p);
                let (lo, hi) = polytope.bounding_box();
                (
                    (0..d).map(|i| center[i] + r * lo[i]).collect(),
                    (0..d).map(|i| center[i] + r * hi[i]).collect(),
                )
            }
            DensityKind::MinOf { parts } => {
                let mut lo = vec![f64::NEG_INFINITY; d];
                let mut hi = vec![f64::INFINITY; d];
                for part in parts {
                    let (pm, _) = part.mode_value();
                    let part_level = top - part.phi(&pm);
                    let (l, h) = part.level_box(part_level.max(0.0));
                    for i in 0..d {
                        lo[i] = lo[i].max(l[i]);
                        hi[i] = hi[i].min(h[i]);
                    }
                }
                (lo, hi)
            }
            DensityKind::Polar { .. } => {
                // sampled radial extents, padded
                let (x0, _) = self.mode_value();
                let mut lo = x0.iter().copied().collect::<Vec<_>>();
                let mut hi = lo.clone();
                for u in probe_points(d, if d == 1 { 2 } else { 200 }) {
                    let u = &u / u.norm();
                    let mut r = 1e-3;
                    while self.phi(&(&x0 + &u * r)) <= top && r < 1e8 {
                        r *= 1.5;
                    }
                    for i in 0..d {
                        lo[i] = lo[i].min(x0[i] + r * u[i]);
                        hi[i] = hi[i].max(x0[i] + r * u[i]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// ∫f, in closed or radial form where available and by cubature otherwise (d ≤ 3).
    pub fn integral(&self, spec: &QuadratureSpec) -> Result<f64> {
        let d = self.dim;
        match &self.kind {
            DensityKind::Ellipsoidal {
                profile, ellipsoid, ..
            } => Ok(ellipsoid.height / ellipsoid.det() * v_psi(profile, d, spec)?),
            DensityKind::Gaussian { ellipsoid } => Ok(ellipsoid.height * PI.powf(0.5 * d as f64) / ellipsoid.det()),
            DensityKind::Height { s, ellipsoid } => {
                let inv = ellipsoid.inverse_position();
                Ok(inv.height / inv.det() * crate::integrals::h_volume(*s, d))
            }
            DensityKind::GaugePower {
                polytope, p, alpha, ..
            } => Ok(alpha * polytope.volume() * gamma(1.0 + d as f64 / p)),
            DensityKind::MinOf { .. } | DensityKind::Polar { .. } => {
                if d > 3 {
                    return Err(Error::InvalidInput("cubature supports d ≤ 3".into()));
                }
                let (lo, hi) = self.level_box(45.0);
                let f = |x: &[f64]| self.eval(&DVector::from_column_slice(x));
                let focus: Vec<f64> = self.mode().iter().copied().collect();
                let est = integrate_box_focused(&f, &lo, &hi, &focus, spec);
                if est.converged || est.error <= 1e-7 * est.value.abs() {
                    Ok(est.value)
                } else {
                    Err(Error::Quadrature {
                        estimate: est.value,
                        error: est.error,
                    })
                }
            }
        }
    }

    /// ∫f by direct cubature regardless of kind (d ≤ 3).
    pub fn integral_by_cubature(&self, spec: &QuadratureSpec) -> Result<f64> {
        match &self.kind {
            DensityKind::Ellipsoidal {
                profile, ellipsoid, ..
            } => cubature_ellipsoidal(profile, ellipsoid, spec),
            _ => {
                let (lo, hi) = self.level_box(45.0);
                let f = |x: &[f64]| self.eval(&DVector::from_column_slice(x));
                let focus: Vec<f64> = self.mode().iter().copied().collect();
                integrate_box_focused(&f, &lo, &hi, &focus, spec).into_result()
            }
        }
    }

    /// x ↦ c·f(x − v).
    pub fn scaled_translated(&self, c: f64, v: &DVector<f64>) -> Result<Self> {
        if !(c > 0.0) || v.len() != self.dim {
            return Err(Error::InvalidInput("need c > 0 and a vector of dimension d".into()));
        }
        let kind = match &self.kind {
            DensityKind::Ellipsoidal { s, profile, ellipsoid } => DensityKind::Ellipsoidal {
                s: *s,
                profile: profile.clone(),
                ellipsoid: DEllipsoid::new(ellipsoid.matrix.clone(), ellipsoid.height * c, &ellipsoid.center + v)?,
            },
            DensityKind::Gaussian { ellipsoid } => DensityKind::Gaussian {
                ellipsoid: DEllipsoid::new(ellipsoid.matrix.clone(), ellipsoid.height * c, &ellipsoid.center + v)?,
            },
            DensityKind::Height { s, ellipsoid } => DensityKind::Height {
                s: *s,
                ellipsoid: DEllipsoid::new(ellipsoid.matrix.clone(), ellipsoid.height / c, &ellipsoid.center + v)?,
            },
            DensityKind::GaugePower {
                polytope,
                p,
                alpha,
                center,
            } => DensityKind::GaugePower {
                polytope: polytope.clone(),
                p: *p,
                alpha: alpha * c,
                center: center + v,
            },
            DensityKind::MinOf { parts } => DensityKind::MinOf {
                parts: parts
                    .iter()
                    .map(|q| q.scaled_translated(c, v))
                    .collect::<Result<_>>()?,
            },
            DensityKind::Polar { .. } => {
                return Err(Error::InvalidInput("translations of a polar are not representable".into()))
            }
        };
        Ok(Self {
            cache: ModeCache::default(),
            dim: self.dim,
            kind,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Radius r with ψ(r) ≥ budget (the domain bound if ψ is capped).
fn profile_radius(profile: &AdmissibleProfile, budget: f64) -> f64 {
    let tau = profile.domain_bound();
    if tau.is_finite() {
        return tau;
    }
    let (u, _, _) = profile.upper_inverse(budget.max(1e-12));
    if u.is_finite() {
        u * (1.0 + 1e-9) + 1e-12
    } else {
        let mut r = 1.0;
        while profile.eval(r) < budget {
            r *= 2.0;
        }
        r
    }
}

/// Deterministic directions (with both signs) used for probing.
pub(crate) fn probe_points(d: usize, n: usize) -> Vec<DVector<f64>> {
    match d {
        1 => vec![DVector::from_element(1, 1.0), DVector::from_element(1, -1.0)],
        2 => (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                DVector::from_vec(vec![t.cos(), t.sin()])
            })
            .collect(),
        _ => crate::optimize::sphere_points(d, n),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum DensityJson {
    Ellipsoidal {
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        s: Option<SParam>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        profile: Option<AdmissibleProfile>,
        #[serde(rename = "A")]
        a_matrix: MatrixRepr,
        alpha: f64,
        a: Vec<f64>,
    },
    Gaussian {
        dim: usize,
        #[serde(rename = "A")]
        a_matrix: MatrixRepr,
        alpha: f64,
        a: Vec<f64>,
    },
    Height {
        dim: usize,
        s: SParam,
        #[serde(rename = "A")]
        a_matrix: MatrixRepr,
        alpha: f64,
        a: Vec<f64>,
    },
    GaugePower {
        dim: usize,
        vertices: Vec<Vec<f64>>,
        p: f64,
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<Vec<f64>>,
    },
    MinOf {
        dim: usize,
        parts: Vec<DensityJson>,
    },
    Polar {
        dim: usize,
        of: Box<DensityJson>,
    },
}

fn make_ellipsoid(dim: usize, m: MatrixRepr, alpha: f64, a: Vec<f64>) -> Result<DEllipsoid> {
    if a.len() != dim {
        return Err(Error::Schema(format!("center has length {}, dim is {dim}", a.len())));
    }
    let m = m.into_matrix(Some(dim))?;
    DEllipsoid::new(m, alpha, DVector::from_vec(a)).map_err(|e| Error::Schema(e.to_string()))
}

impl TryFrom<DensityJson> for LogDensity {
    type Error = Error;
    fn try_from(j: DensityJson) -> Result<Self> {
        let f = match j {
            DensityJson::Ellipsoidal {
                dim,
                s,
                profile,
                a_matrix,
                alpha,
                a,
            } => {
                let e = make_ellipsoid(dim, a_matrix, alpha, a)?;
                match (s, profile) {
                    (Some(s), None) => LogDensity::ellipsoidal(s, e),
                    (None, Some(p)) => LogDensity::with_profile(p, e),
                    (Some(s), Some(p)) => {
                        if p != AdmissibleProfile::psi(s) {
                            return Err(Error::Schema("both s and a different profile given".into()));
                        }
                        LogDensity::ellipsoidal(s, e)
                    }
                    (None, None) => return Err(Error::Schema("ellipsoidal needs s or profile".into())),
                }
            }
            DensityJson::Gaussian {
                dim,
                a_matrix,
                alpha,
                a,
            } => LogDensity::gaussian(make_ellipsoid(dim, a_matrix, alpha, a)?),
            DensityJson::Height {
                dim,
                s,
                a_matrix,
                alpha,
                a,
            } => LogDensity::height(s, make_ellipsoid(dim, a_matrix, alpha, a)?),
            DensityJson::GaugePower {
                dim,
                vertices,
                p,
                alpha,
                a,
            } => {
                if vertices.iter().any(|v| v.len() != dim) {
                    return Err(Error::Schema("vertex length differs from dim".into()));
                }
                let poly = Polytope::from_vertices(vertices.into_iter().map(DVector::from_vec).collect())
                    .map_err(|e| Error::Schema(e.to_string()))?;
                let center = match a {
                    Some(a) if a.len() == dim => DVector::from_vec(a),
                    Some(_) => return Err(Error::Schema("center length differs from dim".into())),
                    None => DVector::zeros(dim),
                };
                LogDensity::gauge_power_at(poly, p, alpha, center).map_err(|e| Error::Schema(e.to_string()))?
            }
            DensityJson::MinOf { dim, parts } => {
                let parts: Vec<LogDensity> = parts.into_iter().map(LogDensity::try_from).collect::<Result<_>>()?;
                if parts.iter().any(|p| p.dim != dim) {
                    return Err(Error::Schema("part dimension differs from dim".into()));
                }
                LogDensity::min_of(parts).map_err(|e| Error::Schema(e.to_string()))?
            }
            DensityJson::Polar { dim, of } => {
                let of = LogDensity::try_from(*of)?;
                if of.dim != dim {
                    return Err(Error::Schema("polar dimension differs from dim".into()));
                }
                LogDensity {
                    cache: ModeCache::default(),
                    dim,
                    kind: DensityKind::Polar { of: Box::new(of) },
                }
            }
        };
        Ok(f)
    }
}

impl From<&LogDensity> for DensityJson {
    fn from(f: &LogDensity) -> Self {
        let dim = f.dim;
        let parts = |e: &DEllipsoid| {
            (
                MatrixRepr::Flat(row_major(&e.matrix)),
                e.height,
                e.center.iter().copied().collect::<Vec<_>>(),
            )
        };
        match &f.kind {
            DensityKind::Ellipsoidal { s, profile, ellipsoid } => {
                let (m, alpha, a) = parts(ellipsoid);
                DensityJson::Ellipsoidal {
                    dim,
                    s: *s,
                    profile: if s.is_some() { None } else { Some(profile.clone()) },
                    a_matrix: m,
                    alpha,
                    a,
                }
            }
            DensityKind::Gaussian { ellipsoid } => {
                let (m, alpha, a) = parts(ellipsoid);
                DensityJson::Gaussian {
                    dim,
                    a_matrix: m,
                    alpha,
                    a,
                }
            }
            DensityKind::Height { s, ellipsoid } => {
                let (m, alpha, a) = parts(ellipsoid);
                DensityJson::Height {
                    dim,
                    s: *s,
                    a_matrix: m,
                    alpha,
                    a,
                }
            }
            DensityKind::GaugePower {
                polytope,
                p,
                alpha,
                center,
            } => DensityJson::GaugePower {
                dim,
                vertices: polytope.vertices.iter().map(|v| v.iter().copied().collect()).collect(),
                p: *p,
                alpha: *alpha,
                a: if center.norm() == 0.0 {
                    None
                } else {
                    Some(center.iter().copied().collect())
                },
            },
            DensityKind::MinOf { parts } => DensityJson::MinOf {
                dim,
                parts: parts.iter().map(DensityJson::from).collect(),
            },
            DensityKind::Polar { of } => DensityJson::Polar {
                dim,
                of: Box::new(DensityJson::from(&**of)),
            },
        }
    }
}

impl Serialize for LogDensity {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        DensityJson::from(self).serialize(ser)
    }
}

impl<'de> Deserialize<'de> for LogDensity {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = DensityJson::deserialize(de)?;
        LogDensity::try_from(j).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn translate_1d(s: f64, c: f64) -> LogDensity {
        LogDensity::ellipsoidal(
            SParam::Finite(s),
            DEllipsoid::new(DMatrix::identity(1, 1), 1.0, v(&[c])).unwrap(),
        )
    }

    #[test]
    fn min_of_two_translates() {
        let f = LogDensity::min_of(vec![translate_1d(0.0, 1.0), translate_1d(0.0, -1.0)]).unwrap();
        // min{e^{−|x−1|}, e^{−|x+1|}} = e^{−1−|x|}
        for x in [-3.0, -0.4, 0.0, 0.7, 5.0] {
            assert_relative_eq!(f.eval(&v(&[x])), (-1.0 - f64::abs(x)).exp(), max_relative = 1e-14);
        }
        assert_relative_eq!(f.sup_norm(), (-1f64).exp(), max_relative = 1e-9);
        assert!(f.mode()[0].abs() < 1e-6);
        assert!(f.is_even());
        let i = f.integral(&QuadratureSpec::new(1e-12, 1e-10, 4000).unwrap()).unwrap();
        assert_relative_eq!(i, 2.0 * (-1f64).exp(), max_relative = 1e-8);
    }

    #[test]
    fn gauge_integral_closed_vs_cubature() {
        let sq = vec![v(&[1.0, 1.0]), v(&[-1.0, 1.0]), v(&[-1.0, -1.0]), v(&[1.0, -1.0])];
        let f = LogDensity::gauge_power(sq, 1.0, 1.0).unwrap();
        let spec = QuadratureSpec::new(1e-10, 1e-8, 4000).unwrap();
        let closed = f.integral(&spec).unwrap();
        assert_relative_eq!(closed, 8.0, max_relative = 1e-12);
        let cub = f.integral_by_cubature(&spec).unwrap();
        assert_relative_eq!(cub, closed, max_relative = 1e-6);
        assert_eq!(f.growth_order(), 1.0);
    }

    #[test]
    fn polar_of_exponential_is_indicator() {
        let f = LogDensity::ellipsoidal(SParam::Finite(0.0), DEllipsoid::unit(1));
        let g = LogDensity {
            cache: ModeCache::default(),
            dim: 1,
            kind: DensityKind::Polar { of: Box::new(f) },
        };
        assert!(g.phi(&v(&[0.5])).abs() < 1e-9);
        assert!(g.phi(&v(&[1.5])).is_infinite());
    }

    #[test]
    fn polar_of_gaussian_numeric_2d() {
        let e = DEllipsoid::new(DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]), 1.0, DVector::zeros(2)).unwrap();
        let g = LogDensity {
            cache: ModeCache::default(),
            dim: 2,
            kind: DensityKind::Polar {
                of: Box::new(LogDensity::gaussian(e.clone())),
            },
        };
        let closed = LogDensity::polar(LogDensity::gaussian(e));
        for y in [v(&[0.3, -0.7]), v(&[1.0, 2.0])] {
            assert_relative_eq!(g.phi(&y), closed.phi(&y), epsilon = 1e-8);
        }
    }

    #[test]
    fn json_roundtrip_all_kinds() {
        let e = DEllipsoid::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 2.0]), 1.5, v(&[0.1, 0.3])).unwrap();
        let sq = vec![v(&[1.0, 1.0]), v(&[-1.0, 1.0]), v(&[-1.0, -1.0]), v(&[1.0, -1.0])];
        let items = vec![
            LogDensity::ellipsoidal(SParam::Finite(1.0), e.clone()),
            LogDensity::ellipsoidal(SParam::Infinite, e.clone()),
            LogDensity::with_profile(AdmissibleProfile::flat(1.0).unwrap(), e.clone()),
            LogDensity::gaussian(e.clone()),
            LogDensity::height(SParam::Finite(2.0), e.clone()),
            LogDensity::gauge_power(sq, 2.0, 0.5).unwrap(),
            LogDensity::min_of(vec![
                LogDensity::ellipsoidal(SParam::Finite(0.0), e.clone()),
                LogDensity::gaussian(DEllipsoid::unit(2)),
            ])
            .unwrap(),
        ];
        for f in items {
            let j = f.to_json();
            let back = LogDensity::from_json(&j).unwrap();
            assert_eq!(back, f, "{j}");
        }
        let parsed = LogDensity::from_json(
            r#"{"kind": "ellipsoidal", "dim": 1, "s": 0, "A": [1.0], "alpha": 1.0, "a": [1.0]}"#,
        )
        .unwrap();
        assert_eq!(parsed, translate_1d(0.0, 1.0));
        assert!(LogDensity::from_json(r#"{"kind": "gaussian", "dim": 2, "A": [1.0], "alpha": 1.0, "a": [0, 0]}"#).is_err());
    }

    proptest! {
        #[test]
        fn min_of_is_log_concave(
            x in proptest::collection::vec(-4.0f64..4.0, 2),
            y in proptest::collection::vec(-4.0f64..4.0, 2),
            c in 0.1f64..2.0,
        ) {
            let e1 = DEllipsoid::new(DMatrix::identity(2, 2), 1.0, v(&[c, 0.0])).unwrap();
            let e2 = DEllipsoid::new(DMatrix::identity(2, 2) * 2.0, 2.0, v(&[-c, 0.5])).unwrap();
            let f = LogDensity::min_of(vec![
                LogDensity::ellipsoidal(SParam::Finite(1.0), e1),
                LogDensity::gaussian(e2),
            ]).unwrap();
            let (xv, yv) = (v(&x), v(&y));
            let m = 0.5 * (&xv + &yv);
            prop_assert!(f.phi(&m) <= 0.5 * (f.phi(&xv) + f.phi(&yv)) + 1e-9);
        }
    }
}
