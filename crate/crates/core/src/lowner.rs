//! The Löwner problem: minimize ∫ℓ over the affine positions ℓ = αe^{−ψ(|A(x−a)|)}
//! of a profile subject to f ≤ ℓ.
//!
//! Cutting planes on a finite master problem in (A, b = Aa, μ = log α):
//!
//! ```text
//! minimize μ − log det A   s.t.  ψ(|A x_k − b|) ≤ μ + φ(x_k)   for the current points x_k
//!                                |A w_j| ≤ (φ_q(w_j)/c_ψ)^{1/q} for the current tail directions w_j
//! ```
//!
//! The master is convex and solved by [`crate::barrier::Program`]. The oracle in
//! [`crate::oracle`] supplies new points and tail directions until the sup of
//! log f − log ℓ falls under the tolerance; the final iterate is then shifted
//! up (and, if a tail is still marginally off, shrunk) so that f ≤ ℓ holds on
//! everything the oracle inspected.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::barrier::{BarrierOptions, Group, LinearConstraint, Program, RadialConstraint, SymBlock};
use crate::density::{probe_points, LogDensity};
use crate::ellipsoid::DEllipsoid;
use crate::error::{Error, Result};
use crate::integrals::v_psi;
use crate::optimize::halton;
use crate::oracle::{scan, tail_order, TAIL_SLACK};
use crate::profile::AdmissibleProfile;
use crate::psi::SParam;
use crate::quadrature::QuadratureSpec;
use crate::report::{InitialPoints, IterationRecord, SolveReport, SolverOptions};

/// Size of the tie-breaking tilt on b used for profiles with a flat bottom.
const TILT: f64 = 1e-3;

struct Layout {
    d: usize,
    block: SymBlock,
    n: usize,
}

impl Layout {
    fn new(d: usize) -> Self {
        let block = SymBlock { offset: 0, d };
        let n = block.len() + d + 1;
        Self { d, block, n }
    }
    fn b(&self, i: usize) -> usize {
        self.block.len() + i
    }
    fn mu(&self) -> usize {
        self.n - 1
    }
    fn pack(&self, a: &DMatrix<f64>, b: &DVector<f64>, mu: f64) -> DVector<f64> {
        let mut v = DVector::zeros(self.n);
        self.block.pack_into(a, &mut v);
        for i in 0..self.d {
            v[self.b(i)] = b[i];
        }
        v[self.mu()] = mu;
        v
    }
    fn unpack(&self, v: &DVector<f64>) -> (DMatrix<f64>, DVector<f64>, f64) {
        let a = self.block.unpack(v);
        let b = DVector::from_iterator(self.d, (0..self.d).map(|i| v[self.b(i)]));
        (a, b, v[self.mu()])
    }
}

/// Rejects pairs whose tails cannot be ordered: ψ growing faster than φ.
pub fn check_tails(f: &LogDensity, profile: &AdmissibleProfile) -> Result<()> {
    let q_psi = profile.growth_order();
    let q_f = f.growth_order();
    if q_psi > q_f {
        // the slowest-growing probe direction serves as the witness ray
        let witness = probe_points(f.dim, 64)
            .into_iter()
            .map(|w| (f.recession(&w, q_f), w))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, w)| w.iter().copied().collect());
        return Err(Error::Infeasible {
            reason: format!(
                "no function of the class lies above f: the profile grows with order {q_psi}, \
                 f decays with order {q_f}"
            ),
            witness,
        });
    }
    Ok(())
}

/// Finds the radius r with φ(x0 + r·u) = φ(x0) + level, or the support edge.
fn level_radius(f: &LogDensity, x0: &DVector<f64>, u: &DVector<f64>, level: f64) -> f64 {
    let phi0 = f.phi(x0);
    let over = |r: f64| {
        let p = f.phi(&(x0 + u * r));
        p.is_infinite() || p - phi0 >= level
    };
    let mut hi = 1e-3;
    while !over(hi) && hi < 1e9 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if over(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

fn initial_points(f: &LogDensity, strategy: &InitialPoints, seed: u64) -> Vec<DVector<f64>> {
    let d = f.dim;
    let x0 = f.mode();
    let mut pts = vec![x0.clone()];
    match strategy {
        InitialPoints::LevelsetExtremes => {
            let mut dirs = probe_points(d, if d == 2 { 12 } else { 26 });
            for i in 0..d {
                let mut e = DVector::zeros(d);
                e[i] = 1.0;
                dirs.push(-&e);
                dirs.push(e);
            }
            for u in &dirs {
                for level in [0.5, 2.0, 6.0, 15.0] {
                    let r = level_radius(f, &x0, u, level);
                    pts.push(&x0 + u * r);
                }
            }
        }
        InitialPoints::SobolBox { count } => {
            let (lo, hi) = f.level_box(10.0);
            let mut k = 1 + seed as usize;
            while pts.len() < count + 1 && k < 100 * (count + 1) + seed as usize {
                let h = halton(k, d);
                let x = DVector::from_iterator(d, (0..d).map(|i| lo[i] + h[i] * (hi[i] - lo[i])));
                if f.phi(&x).is_finite() {
                    pts.push(x);
                }
                k += 1;
            }
        }
        InitialPoints::User { points } => {
            pts.extend(
                points
                    .iter()
                    .filter(|p| p.len() == d)
                    .map(|p| DVector::from_column_slice(p))
                    .filter(|x| f.phi(x).is_finite()),
            );
        }
    }
    pts
}

struct Master<'a> {
    f: &'a LogDensity,
    profile: &'a AdmissibleProfile,
    layout: Layout,
    points: Vec<DVector<f64>>,
    phis: Vec<f64>,
    tails: Vec<(DVector<f64>, f64)>,
    mu_max: f64,
    trace_max: f64,
    tilt: Option<DVector<f64>>,
}

impl Master<'_> {
    fn add_point(&mut self, x: DVector<f64>) -> bool {
        let phi = self.f.phi(&x);
        if !phi.is_finite() {
            return false;
        }
        if self
            .points
            .iter()
            .any(|p| (p - &x).amax() <= 1e-12 * (1.0 + x.amax()))
        {
            return false;
        }
        self.points.push(x);
        self.phis.push(phi);
        true
    }

    fn add_tail(&mut self, w: DVector<f64>, q: f64) -> Result<bool> {
        if self.tails.iter().any(|(u, _)| (u - &w).amax() <= 1e-12) {
            return Ok(false);
        }
        let r = (self.f.recession(&w, q) / self.profile.tail_coefficient()).powf(1.0 / q);
        if !(r > 0.0) {
            return Err(Error::Infeasible {
                reason: "f does not decay along a direction where the class must".into(),
                witness: Some(w.iter().copied().collect()),
            });
        }
        self.tails.push((w, r));
        Ok(true)
    }

    fn program(&self) -> Program {
        let lay = &self.layout;
        let (d, n) = (lay.d, lay.n);
        let mut prog = Program::new(n);
        prog.c[lay.mu()] = 1.0;
        if let Some(t) = &self.tilt {
            for i in 0..d {
                prog.c[lay.b(i)] = t[i];
            }
        }
        prog.logdet = Some((lay.block, 1.0));
        let mut g = DVector::zeros(n);
        g[lay.mu()] = 1.0;
        let items = self
            .points
            .iter()
            .zip(&self.phis)
            .map(|(x, &phi)| {
                let mut jac = lay.block.times_vector_jacobian(x, n);
                for i in 0..d {
                    jac[(i, lay.b(i))] = -1.0;
                }
                RadialConstraint {
                    jac,
                    l0: DVector::zeros(d),
                    g: g.clone(),
                    w0: phi,
                }
            })
            .collect();
        prog.radial.push(Group {
            profile: self.profile.clone(),
            items,
        });
        if !self.tails.is_empty() {
            prog.radial.push(Group {
                profile: AdmissibleProfile::psi(SParam::Finite(0.0)),
                items: self
                    .tails
                    .iter()
                    .map(|(w, r)| RadialConstraint {
                        jac: lay.block.times_vector_jacobian(w, n),
                        l0: DVector::zeros(d),
                        g: DVector::zeros(n),
                        w0: *r,
                    })
                    .collect(),
            });
        }
        prog.linear.push(LinearConstraint {
            g: g.clone(),
            h: self.mu_max,
        });
        let mut tr = DVector::zeros(n);
        for i in 0..d {
            tr[lay.block.index(i, i)] = 1.0;
        }
        prog.linear.push(LinearConstraint {
            g: tr,
            h: self.trace_max,
        });
        prog
    }

    /// Smallest μ satisfying all point constraints for the given (A, b).
    fn mu_needed(&self, a: &DMatrix<f64>, b: &DVector<f64>) -> f64 {
        self.points
            .iter()
            .zip(&self.phis)
            .map(|(x, &phi)| self.profile.eval((a * x - b).norm()) - phi)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest factor θ ≤ 1 such that θA satisfies the tail constraints with slack.
    fn tail_factor(&self, a: &DMatrix<f64>) -> f64 {
        self.tails
            .iter()
            .map(|(w, r)| (1.0 - 1e-6) * r / (a * w).norm())
            .fold(1.0, f64::min)
    }

    fn start_from(&self, a: &DMatrix<f64>, b: &DVector<f64>, prog: &Program) -> Option<DVector<f64>> {
        let theta = self.tail_factor(a);
        let (a, b) = (a * theta, b * theta);
        let need = self.mu_needed(&a, &b);
        if !need.is_finite() {
            return None;
        }
        let mu = need + 1e-3 * (1.0 + need.abs());
        if mu >= self.mu_max {
            return None;
        }
        let v = self.layout.pack(&a, &b, mu);
        prog.feasible(&v).then_some(v)
    }

    fn cold_start(&self, prog: &Program, a0: &DMatrix<f64>, c0: &DVector<f64>) -> Result<DVector<f64>> {
        let mut gamma = 1.0;
        for _ in 0..400 {
            let a = a0 * gamma;
            let b = &a * c0;
            if let Some(v) = self.start_from(&a, &b, prog) {
                return Ok(v);
            }
            gamma *= 0.5;
        }
        Err(Error::Numerical("could not find a strictly feasible master start".into()))
    }

    fn ellipsoid(&self, v: &DVector<f64>) -> Result<DEllipsoid> {
        let (a, b, mu) = self.layout.unpack(v);
        let center = a
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Numerical("master matrix lost definiteness".into()))?
            .solve(&b);
        DEllipsoid::new(a, mu.exp(), center)
    }
}

fn seeded_start(d: usize, seed: u64, scale: f64) -> (DMatrix<f64>, DVector<f64>) {
    if seed == 0 {
        return (DMatrix::identity(d, d), DVector::zeros(d));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = DMatrix::from_fn(d, d, |_, _| rng.random_range(-0.3..0.3));
    s = (&s + s.transpose()) * 0.5;
    let a = DMatrix::identity(d, d) + s;
    let a = if a.clone().symmetric_eigen().eigenvalues.min() > 0.2 {
        a
    } else {
        DMatrix::identity(d, d)
    };
    let c = DVector::from_fn(d, |_, _| rng.random_range(-0.1..0.1) * scale);
    (a, c)
}

/// The tilt used to pick one member of a non-unique optimal face. Seeds 2k and
/// 2k+1 share a direction with opposite signs.
fn tie_break(d: usize, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed / 2);
    let mut u = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
    if u.norm() < 1e-3 {
        u = DVector::from_element(d, 1.0);
    }
    let sign = if seed % 2 == 0 { 1.0 } else { -1.0 };
    let n = u.norm();
    u * (sign * TILT / n)
}

/// Solves the Löwner problem for f and the profile ψ.
pub fn solve_lowner(f: &LogDensity, profile: &AdmissibleProfile, opts: &SolverOptions) -> Result<SolveReport> {
    opts.validate()?;
    profile.check_admissible()?;
    check_tails(f, profile)?;
    let d = f.dim;
    let spec = QuadratureSpec::default();
    let vpsi = v_psi(profile, d, &spec)?;
    let log_sup = -f.mode_value().1;
    let (lo, hi) = f.level_box(1.0);
    let width = (0..d).map(|i| 0.5 * (hi[i] - lo[i])).fold(f64::INFINITY, f64::min);
    let trace_max = opts
        .bounds
        .trace
        .unwrap_or(1e4 * d as f64 / width.max(1e-300) * profile.domain_bound().min(1e6).max(1.0));
    let mu_max = log_sup + opts.bounds.log_height_excess.unwrap_or(d as f64 + 1.0);
    let tilt = (!profile.strictly_increasing() && opts.seed != 0).then(|| tie_break(d, opts.seed));
    let mut master = Master {
        f,
        profile,
        layout: Layout::new(d),
        points: Vec::new(),
        phis: Vec::new(),
        tails: Vec::new(),
        mu_max,
        trace_max,
        tilt,
    };
    for x in initial_points(f, &opts.initial_points, opts.seed) {
        master.add_point(x);
    }
    let n_dirs = opts.directions(d);
    let max_cuts = 2 * d + 2;
    let q_tail = tail_order(f, profile);
    let (a0, c_off) = seeded_start(d, opts.seed, width.min(1e6));
    let c0 = f.mode() + c_off;
    let barrier = BarrierOptions::default();

    let mut previous: Option<DVector<f64>> = opts
        .warm_start
        .as_ref()
        .filter(|e| e.dim() == d)
        .map(|e| master.layout.pack(&e.matrix, &(&e.matrix * &e.center), e.height.ln()));
    let mut history: Vec<IterationRecord> = Vec::new();
    let mut converged = false;
    let mut last: Option<DEllipsoid> = None;
    let mut last_obj = f64::NAN;
    let mut iterations = 0;
    for iteration in 0..opts.max_outer_iterations {
        iterations = iteration + 1;
        let prog = master.program();
        let start = previous
            .as_ref()
            .and_then(|v| {
                let (a, b, _) = master.layout.unpack(v);
                master.start_from(&a, &b, &prog)
            })
            .map(Ok)
            .unwrap_or_else(|| master.cold_start(&prog, &a0, &c0))?;
        let sol = match prog.solve(&start, &barrier) {
            Ok(s) => s,
            Err(_) => {
                let cold = master.cold_start(&prog, &a0, &c0)?;
                prog.solve(&cold, &barrier)?
            }
        };
        let e = master.ellipsoid(&sol.v)?;
        let obj = e.objective();
        let sc = scan(f, profile, &e, n_dirs, max_cuts);
        history.push(IterationRecord {
            iteration,
            objective: obj,
            max_violation: sc.max_violation,
            points: master.points.len() + master.tails.len(),
            newton_steps: sol.newton_steps,
        });
        let tails_ok = sc.tail_ratio <= 1.0 + TAIL_SLACK;
        let stable = (obj - last_obj).abs() <= opts.objective_tol;
        last_obj = obj;
        previous = Some(sol.v.clone());
        last = Some(e);
        let mut added = false;
        if let Some(q) = q_tail {
            for w in sc.tail_cuts {
                added |= master.add_tail(w, q)?;
            }
        }
        for x in sc.cuts {
            added |= master.add_point(x);
        }
        if tails_ok && sc.max_violation <= opts.feasibility_tol && (stable || !added) {
            converged = true;
            break;
        }
        if !added {
            break;
        }
    }
    let e = last.ok_or_else(|| Error::Numerical("no master iterate".into()))?;
    let (e, shift, final_scan) = certify(f, profile, e, n_dirs)?;
    let converged = converged && final_scan <= opts.feasibility_tol;
    let active_points = active(&master, &e);
    let objective = e.objective();
    Ok(SolveReport {
        integral: objective.exp() * vpsi,
        objective,
        v_psi: vpsi,
        max_violation: final_scan,
        certification_shift: shift,
        iterations,
        converged,
        active_points,
        profile: profile.clone(),
        history,
        optimum: e,
    })
}

/// Shrinks A (keeping the center) until the tails are ordered and raises α by
/// the remaining violation. Returns the certified ellipsoid, the total log
/// shift of the objective and the violation left after the last pass.
fn certify(f: &LogDensity, profile: &AdmissibleProfile, mut e: DEllipsoid, n_dirs: usize) -> Result<(DEllipsoid, f64, f64)> {
    let q = profile.growth_order();
    let start = e.objective();
    let mut left = f64::INFINITY;
    for _ in 0..4 {
        let sc = scan(f, profile, &e, n_dirs, 1);
        left = sc.max_violation;
        if sc.tail_ratio > 1.0 + TAIL_SLACK {
            let theta = sc.tail_ratio.powf(-1.0 / q) * (1.0 - 1e-12);
            e = DEllipsoid::new(&e.matrix * theta, e.height, e.center.clone())?;
            continue;
        }
        if left > 0.0 && left.is_finite() {
            e = DEllipsoid::new(e.matrix.clone(), e.height * left.exp() * (1.0 + 1e-15), e.center.clone())?;
            continue;
        }
        break;
    }
    Ok((e.clone(), e.objective() - start, left))
}

fn active(master: &Master<'_>, e: &DEllipsoid) -> Vec<Vec<f64>> {
    let log_alpha = e.height.ln();
    master
        .points
        .iter()
        .zip(&master.phis)
        .filter(|(x, &phi)| {
            let slack = log_alpha + phi - master.profile.eval(e.apply(x).norm());
            slack <= 1e-6 * (1.0 + phi.abs())
        })
        .map(|(x, _)| x.iter().copied().collect())
        .collect()
}

/// solve_lowner with the profile ψ_s.
pub fn solve_lowner_s(f: &LogDensity, s: SParam, opts: &SolverOptions) -> Result<SolveReport> {
    solve_lowner(f, &AdmissibleProfile::psi(s), opts)
}

/// ‖f‖ ≤ α ≤ e^d‖f‖ for a converged report, with relative slack 1e-9.
pub fn height_bound_check(report: &SolveReport, f: &LogDensity) -> bool {
    let sup = f.sup_norm();
    let alpha = report.optimum.height;
    let d = f.dim as f64;
    report.converged && alpha >= sup * (1.0 - 1e-9) && alpha <= d.exp() * sup * (1.0 + 1e-9)
}

/// The non-uniqueness example: the flat profile max(0, t − τ) and f the
/// minimum of its two translates by ±τ·e₁. Two seeds tilt the tie-break in
/// opposite directions and land on different centers with the same objective.
pub fn chimera_demo(tau: f64, d: usize) -> Result<(SolveReport, SolveReport)> {
    let profile = AdmissibleProfile::flat(tau)?;
    if d == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    let mut c = DVector::zeros(d);
    c[0] = tau;
    let part = |v: DVector<f64>| -> Result<LogDensity> {
        Ok(LogDensity::with_profile(
            profile.clone(),
            DEllipsoid::new(DMatrix::identity(d, d), 1.0, v)?,
        ))
    };
    let f = LogDensity::min_of(vec![part(c.clone())?, part(-c)?])?;
    let run = |seed: u64| {
        let opts = SolverOptions {
            seed,
            ..SolverOptions::default()
        };
        solve_lowner(&f, &profile, &opts)
    };
    Ok((run(2)?, run(3)?))
}
