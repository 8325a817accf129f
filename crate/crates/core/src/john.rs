//! The John problem for even f: maximize ∫h_E over the height functions
//! h_E(x) = (1/α)·e^{−χ(|A⁻¹x|)} lying below f, where χ is the height cap of
//! ψ_s (the indicator of \[0,1\] at s = 0, −(s/2)ln(1 − t²) in between, t² at
//! s = ∞).
//!
//! Writing x = A·y, the constraint h_E ≤ f reads φ(Ay) ≤ ν + χ(|y|) for all y
//! in the domain of χ, with ν = log α. Each such constraint is convex in
//! (A, ν), so the same cutting-plane scheme as the Löwner side applies to
//!
//! ```text
//! minimize ν − log det A   s.t.  φ(A y_k) ≤ ν + χ(|y_k|)
//! ```
//!
//! Structured parts of f enter the master exactly; anything else (numerical
//! polars) is linearized with Kelley cuts.

use nalgebra::{DMatrix, DVector};

use crate::barrier::{BarrierOptions, Group, LinearConstraint, Program, RadialConstraint, ScalarConstraint, SymBlock};
use crate::density::{probe_points, DensityKind, LogDensity, Piece};
use crate::ellipsoid::{ellipsoidal_eval, DEllipsoid};
use crate::error::{Error, Result};
use crate::integrals::h_volume;
use crate::legendre::{conjugate_point, golden_max, h_eval};
use crate::optimize::nelder_mead_min;
use crate::profile::AdmissibleProfile;
use crate::psi::SParam;
use crate::report::{IterationRecord, SolveReport, SolverOptions};

enum Part {
    Radial(AdmissibleProfile, DEllipsoid),
    /// Scaled facet normals n_j/c_j, the exponent, log α and the center.
    Gauge(Vec<DVector<f64>>, f64, f64, DVector<f64>),
}

struct Cut {
    y: DVector<f64>,
    chi: f64,
    x: DVector<f64>,
    phi: f64,
    grad: DVector<f64>,
}

struct Master<'a> {
    f: &'a LogDensity,
    s: SParam,
    cap: AdmissibleProfile,
    d: usize,
    block: SymBlock,
    n: usize,
    /// None when f is handled through Kelley cuts.
    parts: Option<Vec<Part>>,
    points: Vec<(DVector<f64>, f64)>,
    cuts: Vec<Cut>,
    tails: Vec<DVector<f64>>,
    support: Option<f64>,
    trace_max: f64,
}

/// A subgradient of φ at x: the conjugate maximizer for polars, central
/// differences otherwise.
fn subgradient(f: &LogDensity, x: &DVector<f64>) -> DVector<f64> {
    if let DensityKind::Polar { of } = &f.kind {
        let (v, g) = of.conjugate_argmax(x);
        if v.is_finite() {
            return g;
        }
    }
    let d = x.len();
    let phi0 = f.phi(x);
    DVector::from_fn(d, |i, _| {
        let h = 1e-6 * (1.0 + x[i].abs());
        let mut xp = x.clone();
        xp[i] += h;
        let mut xm = x.clone();
        xm[i] -= h;
        let (p, m) = (f.phi(&xp), f.phi(&xm));
        match (p.is_finite(), m.is_finite()) {
            (true, true) => (p - m) / (2.0 * h),
            (true, false) => (p - phi0) / h,
            (false, true) => (phi0 - m) / h,
            _ => 0.0,
        }
    })
}

/// sup{t > 0 : φ(t) < ∞} for a one-dimensional f, ∞ if unbounded.
fn support_edge(f: &LogDensity) -> f64 {
    let at = |t: f64| f.phi(&DVector::from_element(1, t)).is_finite();
    let mut hi = 1.0;
    while at(hi) {
        hi *= 2.0;
        if hi > 1e9 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if at(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

impl Master<'_> {
    fn nu(&self) -> usize {
        self.n - 1
    }

    fn chi(&self, y: &DVector<f64>) -> f64 {
        self.cap.eval(y.norm())
    }

    /// Sjac(y) widened to the full variable vector.
    fn times(&self, y: &DVector<f64>) -> DMatrix<f64> {
        self.block.times_vector_jacobian(y, self.n)
    }

    fn add_point(&mut self, a: &DMatrix<f64>, y: DVector<f64>) -> bool {
        let chi = self.chi(&y);
        if !chi.is_finite() {
            return false;
        }
        if self.parts.is_some() {
            if self.points.iter().any(|(p, _)| (p - &y).amax() <= 1e-12) {
                return false;
            }
            self.points.push((y, chi));
            return true;
        }
        let x = a * &y;
        let phi = self.f.phi(&x);
        if !phi.is_finite() {
            return false;
        }
        if self
            .cuts
            .iter()
            .any(|c| (&c.y - &y).amax() <= 1e-12 && (&c.x - &x).amax() <= 1e-10)
        {
            return false;
        }
        let grad = subgradient(self.f, &x);
        self.cuts.push(Cut { y, chi, x, phi, grad });
        true
    }

    fn program(&self) -> Program {
        let (d, n) = (self.d, self.n);
        let mut prog = Program::new(n);
        prog.c[self.nu()] = 1.0;
        prog.logdet = Some((self.block, 1.0));
        let mut g = DVector::zeros(n);
        g[self.nu()] = 1.0;
        let sjac: Vec<DMatrix<f64>> = self.points.iter().map(|(y, _)| self.times(y)).collect();
        for part in self.parts.iter().flatten() {
            match part {
                Part::Radial(profile, e) => {
                    let items = self
                        .points
                        .iter()
                        .zip(&sjac)
                        .map(|((_, chi), j)| RadialConstraint {
                            jac: &e.matrix * j,
                            l0: -(&e.matrix * &e.center),
                            g: g.clone(),
                            w0: chi + e.height.ln(),
                        })
                        .collect();
                    prog.radial.push(Group {
                        profile: profile.clone(),
                        items,
                    });
                }
                Part::Gauge(normals, p, log_alpha, center) => {
                    let mut items = Vec::new();
                    for ((_, chi), j) in self.points.iter().zip(&sjac) {
                        for m in normals {
                            items.push(ScalarConstraint {
                                j: j.transpose() * m,
                                l0: -m.dot(center),
                                g: g.clone(),
                                w0: chi + log_alpha,
                            });
                        }
                    }
                    prog.scalar.push(Group {
                        profile: AdmissibleProfile::Power {
                            scale: 1.0,
                            exponent: *p,
                        },
                        items,
                    });
                }
            }
        }
        for c in &self.cuts {
            // φ(x_k) + ∇φ(x_k)·(A y − x_k) ≤ ν + χ
            let mut row = self.times(&c.y).transpose() * &c.grad;
            row[self.nu()] -= 1.0;
            prog.linear.push(LinearConstraint {
                g: row,
                h: c.chi + c.grad.dot(&c.x) - c.phi,
            });
        }
        if let Some(b) = self.support {
            let mut row = DVector::zeros(n);
            row[self.block.index(0, 0)] = 1.0;
            prog.linear.push(LinearConstraint { g: row, h: b });
        }
        if !self.tails.is_empty() {
            for part in self.parts.iter().flatten() {
                match part {
                    Part::Radial(profile, e) if profile.growth_order() == 2.0 => {
                        let c = profile.tail_coefficient().sqrt();
                        prog.radial.push(Group {
                            profile: AdmissibleProfile::psi(SParam::Infinite),
                            items: self
                                .tails
                                .iter()
                                .map(|w| RadialConstraint {
                                    jac: &e.matrix * self.times(w) * c,
                                    l0: DVector::zeros(d),
                                    g: DVector::zeros(n),
                                    w0: 1.0,
                                })
                                .collect(),
                        });
                    }
                    Part::Gauge(normals, p, _, _) if *p == 2.0 => {
                        for w in &self.tails {
                            let j = self.times(w);
                            for m in normals {
                                prog.linear.push(LinearConstraint {
                                    g: j.transpose() * m,
                                    h: 1.0,
                                });
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        let mut tr = DVector::zeros(n);
        for i in 0..d {
            tr[self.block.index(i, i)] = 1.0;
        }
        prog.linear.push(LinearConstraint {
            g: tr,
            h: self.trace_max,
        });
        prog
    }

    /// Smallest ν for which A satisfies every master point (true φ, which
    /// dominates the linear cuts).
    fn nu_needed(&self, a: &DMatrix<f64>) -> f64 {
        let ys = self.points.iter().map(|(y, c)| (y, *c)).chain(self.cuts.iter().map(|c| (&c.y, c.chi)));
        ys.map(|(y, chi)| self.f.phi(&(a * y)) - chi)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn pack(&self, a: &DMatrix<f64>, nu: f64) -> DVector<f64> {
        let mut v = DVector::zeros(self.n);
        self.block.pack_into(a, &mut v);
        v[self.nu()] = nu;
        v
    }

    fn start_from(&self, a: &DMatrix<f64>, prog: &Program) -> Option<DVector<f64>> {
        let need = self.nu_needed(a);
        if !need.is_finite() {
            return None;
        }
        // the Kelley cuts use a numerical gradient, so leave a visible margin
        let v = self.pack(a, need + 1e-3 * (1.0 + need.abs()));
        prog.feasible(&v).then_some(v)
    }

    fn cold_start(&self, prog: &Program) -> Result<DVector<f64>> {
        let mut gamma = 1.0;
        for _ in 0..200 {
            let a = DMatrix::identity(self.d, self.d) * gamma;
            if let Some(v) = self.start_from(&a, prog) {
                return Ok(v);
            }
            gamma *= 0.5;
        }
        Err(Error::Numerical("could not find a strictly feasible master start".into()))
    }

    fn ellipsoid(&self, v: &DVector<f64>) -> Result<DEllipsoid> {
        DEllipsoid::new(self.block.unpack(v), v[self.nu()].exp(), DVector::zeros(self.d))
    }

    /// max over order-2 parts of the tail coefficient of φ along A·w, for |w| = 1.
    fn tail_ratio(&self, a: &DMatrix<f64>, w: &DVector<f64>) -> f64 {
        self.f.recession(&(a * w), 2.0)
    }
}

struct JohnScan {
    max_violation: f64,
    cuts: Vec<DVector<f64>>,
    tail_cuts: Vec<DVector<f64>>,
    tail_ratio: f64,
}

/// Radii searched along each direction in y-space.
fn radii(s: SParam) -> Vec<f64> {
    match s {
        SParam::Finite(v) if v == 0.0 => vec![1.0],
        SParam::Finite(_) => (0..=60)
            .map(|k| {
                let u = k as f64 / 60.0;
                1.0 - (1.0 - u) * (1.0 - u) * 0.999_999
            })
            .collect(),
        SParam::Infinite => {
            let mut r: Vec<f64> = (0..=60).map(|k| 6.0 * k as f64 / 60.0).collect();
            r.extend((1..=20).map(|k| 6.0 * (1e3f64 / 6.0).powf(k as f64 / 20.0)));
            r
        }
    }
}

fn john_scan(master: &Master<'_>, e: &DEllipsoid, dirs: &[DVector<f64>], max_cuts: usize) -> JohnScan {
    let d = master.d;
    let a = &e.matrix;
    let nu = e.height.ln();
    let viol = |y: &DVector<f64>| {
        let chi = master.chi(y);
        if !chi.is_finite() {
            return f64::NEG_INFINITY;
        }
        let p = master.f.phi(&(a * y));
        if p.is_nan() {
            return f64::NEG_INFINITY;
        }
        p - nu - chi
    };
    let rs = radii(master.s);
    let s0 = matches!(master.s, SParam::Finite(v) if v == 0.0);
    let mut found: Vec<(f64, DVector<f64>)> = vec![(viol(&DVector::zeros(d)), DVector::zeros(d))];
    for u in dirs {
        let vals: Vec<f64> = rs.iter().map(|&r| viol(&(u * r))).collect();
        if rs.len() == 1 {
            found.push((vals[0], u * rs[0]));
            continue;
        }
        let mut peaks: Vec<usize> = (0..vals.len())
            .filter(|&k| {
                let left = if k == 0 { f64::NEG_INFINITY } else { vals[k - 1] };
                let right = vals.get(k + 1).copied().unwrap_or(f64::NEG_INFINITY);
                !(left > vals[k]) && !(right > vals[k])
            })
            .collect();
        peaks.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
        for &k in peaks.iter().take(4) {
            if vals[k].is_infinite() {
                found.push((vals[k], u * rs[k]));
                continue;
            }
            let lo = rs[k.saturating_sub(1)];
            let hi = rs[(k + 1).min(rs.len() - 1)];
            let g = |t: f64| viol(&(u * t));
            let (t, v) = golden_max(&g, lo, hi, 1e-10);
            if v > vals[k] {
                found.push((v, u * t));
            } else {
                found.push((vals[k], u * rs[k]));
            }
        }
    }
    found.sort_by(|x, y| y.0.total_cmp(&x.0));
    if d > 1 {
        // polish the leaders in y, staying on the sphere at s = 0
        let refine: Vec<(f64, DVector<f64>)> = found
            .iter()
            .take(3)
            .filter(|(v, _)| v.is_finite())
            .map(|(_, y)| {
                let obj = |z: &DVector<f64>| {
                    let z = if s0 { z / z.norm().max(1e-300) } else { z.clone() };
                    let v = viol(&z);
                    if v.is_finite() {
                        -v
                    } else if v == f64::INFINITY {
                        -1e300
                    } else {
                        f64::INFINITY
                    }
                };
                let (z, v) = nelder_mead_min(&obj, y, 0.02 * (1.0 + y.norm()), 1e-14, 1500);
                let z = if s0 { &z / z.norm() } else { z };
                (-v, z)
            })
            .collect();
        found.extend(refine);
        found.sort_by(|x, y| y.0.total_cmp(&x.0));
    }
    let max_violation = found[0].0;
    let mut cuts: Vec<DVector<f64>> = Vec::new();
    for (v, y) in &found {
        if cuts.len() >= max_cuts || *v <= 0.0 {
            break;
        }
        if cuts.iter().all(|c| (c - y).norm() > 1e-3 * (1.0 + y.norm())) {
            cuts.push(y.clone());
        }
    }
    let mut tail_ratio = 0.0;
    let mut tail_cuts = Vec::new();
    if matches!(master.s, SParam::Infinite) && master.f.growth_order() == 2.0 {
        let mut ratios: Vec<(f64, &DVector<f64>)> = dirs.iter().map(|w| (master.tail_ratio(a, w), w)).collect();
        ratios.sort_by(|x, y| y.0.total_cmp(&x.0));
        tail_ratio = ratios.first().map_or(0.0, |r| r.0);
        for (r, w) in ratios.into_iter().take(max_cuts) {
            if r > 1.0 + 1e-12 {
                tail_cuts.push(w.clone());
            }
        }
    }
    JohnScan {
        max_violation,
        cuts,
        tail_cuts,
        tail_ratio,
    }
}

fn directions(f: &LogDensity, opts: &SolverOptions) -> Vec<DVector<f64>> {
    let d = f.dim;
    let n = if opts.budget > 0 {
        opts.budget
    } else {
        match d {
            1 => 2,
            2 => 720,
            _ => 1500,
        }
    };
    let mut dirs = probe_points(d, n);
    dirs.extend(f.candidate_directions());
    for i in 0..d {
        let mut e = DVector::zeros(d);
        e[i] = 1.0;
        dirs.push(-&e);
        dirs.push(e);
    }
    dirs
}

/// Solves the John s-problem for an even f; the optimum E represents
/// h_E(x) = (1/α)e^{−χ(|A⁻¹x|)} and `integral` is ∫h_E.
pub fn solve_john_s(f: &LogDensity, s: SParam, opts: &SolverOptions) -> Result<SolveReport> {
    opts.validate()?;
    if !f.is_even() {
        return Err(Error::InvalidInput("the John solver is restricted to even f".into()));
    }
    let d = f.dim;
    let q_f = f.growth_order();
    if matches!(s, SParam::Infinite) && q_f > 2.0 {
        let witness = probe_points(d, 64)
            .into_iter()
            .map(|w| (f.recession(&w, q_f), w))
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, w)| w.iter().copied().collect());
        return Err(Error::Infeasible {
            reason: format!("no Gaussian lies below f: f decays with order {q_f}"),
            witness,
        });
    }
    let pieces = f.pieces();
    let parts = if pieces.iter().any(|p| matches!(p, Piece::Other)) {
        None
    } else {
        Some(
            pieces
                .into_iter()
                .map(|p| match p {
                    Piece::Radial(profile, e) => Part::Radial(profile, e),
                    Piece::Gauge(k, p, alpha, center) => Part::Gauge(
                        k.facets.iter().map(|fc| &fc.normal / fc.offset).collect(),
                        p,
                        alpha.ln(),
                        center.clone(),
                    ),
                    Piece::Other => unreachable!(),
                })
                .collect::<Vec<_>>(),
        )
    };
    let mut support = None;
    if parts.is_none() {
        if matches!(s, SParam::Infinite) && q_f == 2.0 {
            return Err(Error::InvalidInput(
                "quadratic tails of a numerical f are not supported at s = ∞".into(),
            ));
        }
        if q_f.is_infinite() {
            if d > 1 {
                return Err(Error::InvalidInput(
                    "bounded support of a numerical f is only supported in one dimension".into(),
                ));
            }
            support = Some(support_edge(f) * (1.0 - 1e-12));
        }
    }
    let (lo, hi) = f.level_box(4.0);
    let width = (0..d).map(|i| 0.5 * (hi[i] - lo[i])).fold(0.0, f64::max);
    let block = SymBlock { offset: 0, d };
    let mut master = Master {
        f,
        s,
        cap: AdmissibleProfile::height_cap(s),
        d,
        block,
        n: block.len() + 1,
        parts,
        points: Vec::new(),
        cuts: Vec::new(),
        tails: Vec::new(),
        support,
        trace_max: opts.bounds.trace.unwrap_or(1e3 * d as f64 * width.max(1.0)),
    };
    let dirs = directions(f, opts);
    let seed_dirs: Vec<DVector<f64>> = if d == 1 { dirs.clone() } else { probe_points(d, if d == 2 { 12 } else { 26 }) };
    let seed_radii: &[f64] = match s {
        SParam::Finite(v) if v == 0.0 => &[1.0],
        SParam::Finite(_) => &[0.5, 0.8, 0.95, 0.99],
        SParam::Infinite => &[0.5, 1.0, 2.0, 4.0],
    };
    let id = DMatrix::identity(d, d);
    master.add_point(&id, DVector::zeros(d));
    for u in &seed_dirs {
        for &r in seed_radii {
            master.add_point(&id, u * r);
        }
    }
    if matches!(s, SParam::Infinite) && q_f == 2.0 {
        master.tails.extend(seed_dirs.iter().cloned());
    }
    let barrier = BarrierOptions::default();
    let max_cuts = 2 * d + 2;
    let mut previous: Option<DMatrix<f64>> = opts.warm_start.as_ref().filter(|e| e.dim() == d).map(|e| e.matrix.clone());
    let mut history = Vec::new();
    let mut last: Option<DEllipsoid> = None;
    let mut last_obj = f64::NAN;
    let mut converged = false;
    let mut iterations = 0;
    for iteration in 0..opts.max_outer_iterations {
        iterations = iteration + 1;
        let prog = master.program();
        let start = previous
            .as_ref()
            .and_then(|a| master.start_from(a, &prog))
            .map(Ok)
            .unwrap_or_else(|| master.cold_start(&prog))?;
        let sol = match prog.solve(&start, &barrier) {
            Ok(s) => s,
            Err(_) => prog.solve(&master.cold_start(&prog)?, &barrier)?,
        };
        let e = master.ellipsoid(&sol.v)?;
        let obj = e.objective();
        let sc = john_scan(&master, &e, &dirs, max_cuts);
        history.push(IterationRecord {
            iteration,
            objective: obj,
            max_violation: sc.max_violation,
            points: master.points.len() + master.cuts.len() + master.tails.len(),
            newton_steps: sol.newton_steps,
        });
        let stable = (obj - last_obj).abs() <= opts.objective_tol;
        last_obj = obj;
        let mut added = false;
        for w in sc.tail_cuts {
            if master.tails.iter().all(|t| (t - &w).amax() > 1e-12) {
                master.tails.push(w);
                added = true;
            }
        }
        for y in sc.cuts {
            added |= master.add_point(&e.matrix, y);
        }
        previous = Some(e.matrix.clone());
        last = Some(e);
        if sc.tail_ratio <= 1.0 + 1e-12 && sc.max_violation <= opts.feasibility_tol && (stable || !added) {
            converged = true;
            break;
        }
        if !added {
            break;
        }
    }
    let mut e = last.ok_or_else(|| Error::Numerical("no master iterate".into()))?;
    let start_obj = e.objective();
    let mut left = f64::INFINITY;
    for _ in 0..4 {
        let sc = john_scan(&master, &e, &dirs, 1);
        left = sc.max_violation;
        if sc.tail_ratio > 1.0 + 1e-12 {
            let theta = sc.tail_ratio.powf(-0.5) * (1.0 - 1e-12);
            e = DEllipsoid::new(&e.matrix * theta, e.height, e.center.clone())?;
            continue;
        }
        if left > 0.0 && left.is_finite() {
            e = DEllipsoid::new(e.matrix.clone(), e.height * left.exp() * (1.0 + 1e-15), e.center.clone())?;
            continue;
        }
        break;
    }
    let converged = converged && left <= opts.feasibility_tol;
    let hv = h_volume(s, d);
    let objective = e.objective();
    let active_points = master
        .points
        .iter()
        .map(|(y, c)| (y, *c))
        .chain(master.cuts.iter().map(|c| (&c.y, c.chi)))
        .filter(|(y, chi)| {
            let slack = e.height.ln() + chi - f.phi(&(&e.matrix * *y));
            slack <= 1e-6 * (1.0 + chi.abs())
        })
        .map(|(y, _)| (&e.matrix * y).iter().copied().collect())
        .collect();
    Ok(SolveReport {
        integral: (-objective).exp() * hv,
        objective,
        v_psi: hv,
        max_violation: left,
        certification_shift: objective - start_obj,
        iterations,
        converged,
        active_points,
        profile: master.cap.clone(),
        history,
        optimum: e,
    })
}

/// Sup-norm residuals of the two polarity identities for an even f:
/// (𝐉^s f)° against 𝐋^s f°, and (𝐋^s f)° against 𝐉^s f°.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DualityResiduals {
    pub john_side: f64,
    pub lowner_side: f64,
}

/// Solves all four problems and compares on the grid. Polars of the solved
/// functions are taken numerically from their radial profiles.
pub fn even_duality_check(
    f: &LogDensity,
    s: SParam,
    grid: &[DVector<f64>],
    opts: &SolverOptions,
) -> Result<DualityResiduals> {
    if !f.is_even() {
        return Err(Error::InvalidInput("duality is checked on even f only".into()));
    }
    let fp = LogDensity::polar(f.clone());
    let john = solve_john_s(f, s, opts)?;
    let lowner_polar = crate::lowner::solve_lowner_s(&fp, s, opts)?;
    let lowner = crate::lowner::solve_lowner_s(f, s, opts)?;
    let john_polar = solve_john_s(&fp, s, opts)?;
    let cap = AdmissibleProfile::height_cap(s);
    let psi = AdmissibleProfile::psi(s);
    let mut john_side: f64 = 0.0;
    let mut lowner_side: f64 = 0.0;
    // at s = 0 both sides are scaled indicators; a grid point on an edge
    // compares two jumps and is skipped
    let on_edge = |e: &DEllipsoid, y: &DVector<f64>, inverse: bool| {
        if !s.is_zero() {
            return false;
        }
        let r = if inverse { e.inverse_apply(y).norm() } else { e.apply(y).norm() };
        (r - 1.0).abs() < 1e-6
    };
    for y in grid {
        if y.len() != f.dim {
            return Err(Error::DimensionMismatch {
                expected: f.dim,
                got: y.len(),
            });
        }
        // (h_E)°(y) = α·e^{−χ*(|Ay|)}
        let ej = &john.optimum;
        let polar_j = ej.height * (-conjugate_point(&cap, (&ej.matrix * y).norm()).value).exp();
        john_side = john_side.max((polar_j - ellipsoidal_eval(&psi, &lowner_polar.optimum, y)).abs());
        // (ℓ_E)°(y) = (1/α)·e^{−⟨a,y⟩ − ψ*(|A⁻¹y|)}
        let el = &lowner.optimum;
        let r = (&el.inverse_position().matrix * y).norm();
        let polar_l = (-el.center.dot(y) - conjugate_point(&psi, r).value).exp() / el.height;
        let (ec, jp) = (el.inverse_position(), &john_polar.optimum);
        if !on_edge(&ec, &(y + &el.center), false) && !on_edge(jp, y, true) {
            lowner_side = lowner_side.max((polar_l - h_eval(s, jp, y)).abs());
        }
    }
    Ok(DualityResiduals {
        john_side,
        lowner_side,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_at_zero_is_scaled_indicator() {
        let f = LogDensity::ellipsoidal(SParam::Finite(0.0), DEllipsoid::unit(1));
        let r = solve_john_s(&f, SParam::Finite(0.0), &SolverOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.optimum.matrix[(0, 0)] - 1.0).abs() < 1e-6, "{:?}", r.optimum);
        assert!((r.optimum.height - 1f64.exp()).abs() < 1e-5);
        assert!((r.integral - 2.0 / 1f64.exp()).abs() < 1e-6);
    }

    #[test]
    fn gaussian_recovers_itself_at_infinity() {
        let e = DEllipsoid::new(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.5])), 2.0, DVector::zeros(2)).unwrap();
        let f = LogDensity::gaussian(e.clone());
        let r = solve_john_s(&f, SParam::Infinite, &SolverOptions::default()).unwrap();
        // h_E = (1/α)e^{−|A⁻¹x|²} equals f for A = A_f⁻¹, α = 1/α_f
        let want = e.inverse_position();
        assert!(r.optimum.relative_distance(&want) < 1e-4, "{:?}", r.optimum);
    }
}
