//! A small log-barrier interior point method for the convex programs that
//! appear here: a linear objective plus an optional −log det of a packed
//! symmetric block, subject to profile-composed constraints.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::profile::{AdmissibleProfile, ConstraintForm};

/// ψ(|J v + l0|) ≤ gᵀv + w0.
#[derive(Debug, Clone)]
pub struct RadialConstraint {
    pub jac: DMatrix<f64>,
    pub l0: DVector<f64>,
    pub g: DVector<f64>,
    pub w0: f64,
}

/// jᵀv + l0 ≤ u(gᵀv + w0), with u the upper inverse of the profile.
#[derive(Debug, Clone)]
pub struct ScalarConstraint {
    pub j: DVector<f64>,
    pub l0: f64,
    pub g: DVector<f64>,
    pub w0: f64,
}

/// gᵀv ≤ h.
#[derive(Debug, Clone)]
pub struct LinearConstraint {
    pub g: DVector<f64>,
    pub h: f64,
}

#[derive(Debug, Clone)]
pub struct Group<C> {
    pub profile: AdmissibleProfile,
    pub items: Vec<C>,
}

/// Index range of a packed symmetric d×d block inside the variable vector.
#[derive(Debug, Clone, Copy)]
pub struct SymBlock {
    pub offset: usize,
    pub d: usize,
}

impl SymBlock {
    pub fn len(&self) -> usize {
        self.d * (self.d + 1) / 2
    }

    pub fn is_empty(&self) -> bool {
        self.d == 0
    }

    /// Position of entry (i, j) in the packed vector.
    pub fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        // row-major upper triangle
        self.offset + i * self.d - i * (i + 1) / 2 + j
    }

    pub fn unpack(&self, v: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(self.d, self.d, |i, j| v[self.index(i, j)])
    }

    pub fn pack_into(&self, m: &DMatrix<f64>, v: &mut DVector<f64>) {
        for i in 0..self.d {
            for j in i..self.d {
                v[self.index(i, j)] = 0.5 * (m[(i, j)] + m[(j, i)]);
            }
        }
    }

    /// The Jacobian of v ↦ S(v)·x, a d × n matrix.
    pub fn times_vector_jacobian(&self, x: &DVector<f64>, n: usize) -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(self.d, n);
        for i in 0..self.d {
            for j in 0..self.d {
                jac[(i, self.index(i, j))] += x[j];
            }
        }
        jac
    }
}

/// minimize cᵀv − κ·log det S(v) subject to all constraint groups.
#[derive(Debug, Clone)]
pub struct Program {
    pub n: usize,
    pub c: DVector<f64>,
    pub logdet: Option<(SymBlock, f64)>,
    pub radial: Vec<Group<RadialConstraint>>,
    pub scalar: Vec<Group<ScalarConstraint>>,
    pub linear: Vec<LinearConstraint>,
}

#[derive(Debug, Clone, Copy)]
pub struct BarrierOptions {
    pub gap: f64,
    pub t0: f64,
    pub growth: f64,
    pub max_newton: usize,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        Self {
            gap: 1e-10,
            t0: 1.0,
            growth: 10.0,
            max_newton: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BarrierSolution {
    pub v: DVector<f64>,
    pub objective: f64,
    pub newton_steps: usize,
}

struct Accum {
    value: f64,
    grad: DVector<f64>,
    hess: DMatrix<f64>,
}

impl Accum {
    fn new(n: usize) -> Self {
        Self {
            value: 0.0,
            grad: DVector::zeros(n),
            hess: DMatrix::zeros(n, n),
        }
    }

    /// Adds −log c given c, ∇c and ∇²c.
    fn neg_log(&mut self, c: f64, dc: &DVector<f64>, d2c: Option<&DMatrix<f64>>) {
        self.value -= c.ln();
        self.grad -= dc / c;
        self.hess.ger(1.0 / (c * c), dc, dc, 1.0);
        if let Some(h) = d2c {
            self.hess -= h / c;
        }
    }
}

fn radial_terms(
    profile: &AdmissibleProfile,
    k: &RadialConstraint,
    v: &DVector<f64>,
    acc: &mut Accum,
    with_derivatives: bool,
) -> bool {
    let l = &k.jac * v + &k.l0;
    let w = k.g.dot(v) + k.w0;
    let q = l.norm_squared();
    match profile.constraint_form() {
        ConstraintForm::Quadratic => {
            let (psi, d1, d2) = profile.square_form(q);
            let c = w - psi;
            if !(c > 0.0) || !psi.is_finite() {
                return false;
            }
            if !with_derivatives {
                acc.value -= c.ln();
                return true;
            }
            let dq = 2.0 * k.jac.transpose() * &l;
            let dc = &k.g - &dq * d1;
            let mut d2c = k.jac.transpose() * &k.jac * (-2.0 * d1);
            d2c.ger(-d2, &dq, &dq, 1.0);
            acc.neg_log(c, &dc, Some(&d2c));
            true
        }
        ConstraintForm::Inverse => {
            if !(w > 0.0) {
                return false;
            }
            let (u, u1, u2) = profile.upper_inverse(w);
            if !(u > 0.0) {
                return false;
            }
            let c = u - q / u;
            if !(c > 0.0) {
                return false;
            }
            let needs_w_barrier = profile.upper_inverse(0.0).0 > 0.0;
            if !with_derivatives {
                acc.value -= c.ln();
                if needs_w_barrier {
                    acc.value -= w.ln();
                }
                return true;
            }
            let dq = 2.0 * k.jac.transpose() * &l;
            let dc = &k.g * (u1 * (1.0 + q / (u * u))) - &dq / u;
            let mut d2c = k.jac.transpose() * &k.jac * (-2.0 / u);
            let coef = u2 * (1.0 + q / (u * u)) - 2.0 * u1 * u1 * q / (u * u * u);
            d2c.ger(coef, &k.g, &k.g, 1.0);
            d2c.ger(u1 / (u * u), &k.g, &dq, 1.0);
            d2c.ger(u1 / (u * u), &dq, &k.g, 1.0);
            acc.neg_log(c, &dc, Some(&d2c));
            if needs_w_barrier {
                acc.neg_log(w, &k.g, None);
            }
            true
        }
    }
}

fn scalar_terms(
    profile: &AdmissibleProfile,
    k: &ScalarConstraint,
    v: &DVector<f64>,
    acc: &mut Accum,
    with_derivatives: bool,
) -> bool {
    let w = k.g.dot(v) + k.w0;
    if !(w > 0.0) {
        return false;
    }
    let (u, u1, u2) = profile.upper_inverse(w);
    let l = k.j.dot(v) + k.l0;
    let c = u - l;
    if !(c > 0.0) {
        return false;
    }
    if !with_derivatives {
        acc.value -= c.ln() + w.ln();
        return true;
    }
    let dc = &k.g * u1 - &k.j;
    let mut d2c = DMatrix::zeros(v.len(), v.len());
    d2c.ger(u2, &k.g, &k.g, 1.0);
    acc.neg_log(c, &dc, Some(&d2c));
    acc.neg_log(w, &k.g, None);
    true
}

fn logdet_terms(block: SymBlock, kappa: f64, v: &DVector<f64>, acc: &mut Accum, with_derivatives: bool) -> bool {
    let s = block.unpack(v);
    let Some(ch) = s.clone().cholesky() else {
        return false;
    };
    let logdet = 2.0 * ch.l().diagonal().iter().map(|x| x.ln()).sum::<f64>();
    if !logdet.is_finite() {
        return false;
    }
    acc.value -= kappa * logdet;
    if !with_derivatives {
        return true;
    }
    let w = ch.inverse();
    let d = block.d;
    let idx: Vec<(usize, usize)> = (0..d).flat_map(|i| (i..d).map(move |j| (i, j))).collect();
    for &(i, j) in &idx {
        let a = block.index(i, j);
        let factor = if i == j { 1.0 } else { 2.0 };
        acc.grad[a] -= kappa * factor * w[(i, j)];
    }
    // tr(W E_a W E_b) for the symmetric basis E_ij = e_i e_jᵀ + e_j e_iᵀ (E_ii = e_i e_iᵀ)
    for &(i, j) in &idx {
        for &(k, l) in &idx {
            let a = block.index(i, j);
            let b = block.index(k, l);
            let mut t = w[(j, k)] * w[(l, i)];
            if i != j {
                t += w[(i, k)] * w[(l, j)];
            }
            if k != l {
                t += w[(j, l)] * w[(k, i)];
                if i != j {
                    t += w[(i, l)] * w[(k, j)];
                }
            }
            acc.hess[(a, b)] += kappa * t;
        }
    }
    true
}

impl Program {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            c: DVector::zeros(n),
            logdet: None,
            radial: Vec::new(),
            scalar: Vec::new(),
            linear: Vec::new(),
        }
    }

    pub fn constraint_count(&self) -> usize {
        let r: usize = self.radial.iter().map(|g| g.items.len()).sum();
        let s: usize = self.scalar.iter().map(|g| 2 * g.items.len()).sum();
        r + s + self.linear.len()
    }

    pub fn objective(&self, v: &DVector<f64>) -> f64 {
        let mut val = self.c.dot(v);
        if let Some((block, kappa)) = self.logdet {
            let s = block.unpack(v);
            match s.cholesky() {
                Some(ch) => {
                    val -= kappa * 2.0 * ch.l().diagonal().iter().map(|x| x.ln()).sum::<f64>()
                }
                None => return f64::INFINITY,
            }
        }
        val
    }

    /// Barrier value (plus derivatives) of all constraints; `None` if v is not strictly feasible.
    fn barrier(&self, v: &DVector<f64>, with_derivatives: bool) -> Option<Accum> {
        let mut acc = Accum::new(self.n);
        for g in &self.radial {
            for k in &g.items {
                if !radial_terms(&g.profile, k, v, &mut acc, with_derivatives) {
                    return None;
                }
            }
        }
        for g in &self.scalar {
            for k in &g.items {
                if !scalar_terms(&g.profile, k, v, &mut acc, with_derivatives) {
                    return None;
                }
            }
        }
        for k in &self.linear {
            let c = k.h - k.g.dot(v);
            if !(c > 0.0) {
                return None;
            }
            if with_derivatives {
                acc.neg_log(c, &(-&k.g), None);
            } else {
                acc.value -= c.ln();
            }
        }
        Some(acc)
    }

    fn centering(&self, t: f64, v: &DVector<f64>, with_derivatives: bool) -> Option<Accum> {
        let mut acc = self.barrier(v, with_derivatives)?;
        acc.value += t * self.c.dot(v);
        if with_derivatives {
            acc.grad += &self.c * t;
        }
        if let Some((block, kappa)) = self.logdet {
            let mut inner = Accum::new(self.n);
            if !logdet_terms(block, kappa, v, &mut inner, with_derivatives) {
                return None;
            }
            acc.value += t * inner.value;
            if with_derivatives {
                acc.grad += inner.grad * t;
                acc.hess += inner.hess * t;
            }
        }
        if !acc.value.is_finite() {
            return None;
        }
        Some(acc)
    }

    /// Whether v is strictly feasible.
    pub fn feasible(&self, v: &DVector<f64>) -> bool {
        self.centering(1.0, v, false).is_some()
    }

    /// Path-following from a strictly feasible start.
    pub fn solve(&self, start: &DVector<f64>, opts: &BarrierOptions) -> Result<BarrierSolution> {
        if !self.feasible(start) {
            return Err(Error::Numerical("barrier start is not strictly feasible".into()));
        }
        let m = self.constraint_count().max(1) as f64;
        let mut v = start.clone();
        let mut t = opts.t0;
        let mut steps = 0;
        loop {
            steps += self.center(t, &mut v, opts.max_newton)?;
            if m / t < opts.gap {
                break;
            }
            t *= opts.growth;
        }
        Ok(BarrierSolution {
            objective: self.objective(&v),
            v,
            newton_steps: steps,
        })
    }

    fn center(&self, t: f64, v: &mut DVector<f64>, max_newton: usize) -> Result<usize> {
        for it in 0..max_newton {
            let acc = self
                .centering(t, v, true)
                .ok_or_else(|| Error::Numerical("iterate left the feasible region".into()))?;
            let dir = newton_direction(&acc.hess, &acc.grad)?;
            let decrement = -acc.grad.dot(&dir);
            if decrement.is_nan() {
                return Err(Error::Numerical("NaN Newton decrement".into()));
            }
            if decrement <= 2e-14 * (1.0 + acc.value.abs()).min(1e3) || decrement < 1e-18 {
                return Ok(it);
            }
            let mut step = 1.0;
            let mut moved = false;
            for _ in 0..80 {
                let trial = &*v + &dir * step;
                if let Some(next) = self.centering(t, &trial, false) {
                    if next.value <= acc.value - 0.25 * step * decrement {
                        *v = trial;
                        moved = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !moved {
                // no further decrease representable in floating point
                return Ok(it);
            }
        }
        Ok(max_newton)
    }
}

fn newton_direction(h: &DMatrix<f64>, g: &DVector<f64>) -> Result<DVector<f64>> {
    let n = h.nrows();
    let scale = h.diagonal().iter().map(|x| x.abs()).fold(0.0, f64::max).max(1e-300);
    let mut shift = 0.0;
    for _ in 0..40 {
        let mut m = h.clone();
        for i in 0..n {
            m[(i, i)] += shift;
        }
        if let Some(ch) = m.cholesky() {
            let d = ch.solve(&(-g));
            if d.iter().all(|x| x.is_finite()) {
                return Ok(d);
            }
        }
        shift = if shift == 0.0 { 1e-14 * scale } else { shift * 10.0 };
    }
    Err(Error::Numerical("Newton system could not be factored".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psi::SParam;

    #[test]
    fn logdet_derivatives_match_finite_differences() {
        let block = SymBlock { offset: 0, d: 2 };
        let mut v = DVector::zeros(3);
        block.pack_into(&DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.5]), &mut v);
        let mut acc = Accum::new(3);
        assert!(logdet_terms(block, 1.0, &v, &mut acc, true));
        let h = 1e-6;
        for a in 0..3 {
            let mut vp = v.clone();
            vp[a] += h;
            let mut vm = v.clone();
            vm[a] -= h;
            let mut ap = Accum::new(3);
            let mut am = Accum::new(3);
            logdet_terms(block, 1.0, &vp, &mut ap, true);
            logdet_terms(block, 1.0, &vm, &mut am, true);
            assert!(((ap.value - am.value) / (2.0 * h) - acc.grad[a]).abs() < 1e-7);
            for b in 0..3 {
                let fd = (ap.grad[b] - am.grad[b]) / (2.0 * h);
                assert!((fd - acc.hess[(a, b)]).abs() < 1e-6, "{a} {b}");
            }
        }
    }

    #[test]
    fn barrier_derivatives_match_finite_differences() {
        let n = 3;
        let k = RadialConstraint {
            jac: DMatrix::from_row_slice(2, 3, &[1.0, 0.2, 0.0, -0.3, 1.0, 0.5]),
            l0: DVector::from_vec(vec![0.1, -0.2]),
            g: DVector::from_vec(vec![0.0, 0.0, 1.0]),
            w0: 2.0,
        };
        let v = DVector::from_vec(vec![0.3, 0.2, 0.4]);
        for p in [
            AdmissibleProfile::psi(SParam::Finite(0.0)),
            AdmissibleProfile::psi(SParam::Finite(1.3)),
            AdmissibleProfile::flat(0.5).unwrap(),
            AdmissibleProfile::height_cap(SParam::Finite(2.0)),
        ] {
            let mut acc = Accum::new(n);
            assert!(radial_terms(&p, &k, &v, &mut acc, true), "{p:?}");
            let h = 1e-6;
            for a in 0..n {
                let mut vp = v.clone();
                vp[a] += h;
                let mut vm = v.clone();
                vm[a] -= h;
                let mut ap = Accum::new(n);
                let mut am = Accum::new(n);
                radial_terms(&p, &k, &vp, &mut ap, true);
                radial_terms(&p, &k, &vm, &mut am, true);
                let fd = (ap.value - am.value) / (2.0 * h);
                assert!((fd - acc.grad[a]).abs() < 1e-6 * (1.0 + fd.abs()), "{p:?}");
                for b in 0..n {
                    let fd2 = (ap.grad[b] - am.grad[b]) / (2.0 * h);
                    assert!((fd2 - acc.hess[(a, b)]).abs() < 1e-5 * (1.0 + fd2.abs()), "{p:?} {a} {b}");
                }
            }
        }
    }

    #[test]
    fn solves_a_small_program() {
        // minimize −log det S subject to |S x| ≤ 1 for x = e1, e2: the optimum is S = Id
        let block = SymBlock { offset: 0, d: 2 };
        let mut prog = Program::new(3);
        prog.logdet = Some((block, 1.0));
        let mut items = Vec::new();
        for x in [[1.0, 0.0], [0.0, 1.0]] {
            let xv = DVector::from_vec(x.to_vec());
            items.push(RadialConstraint {
                jac: block.times_vector_jacobian(&xv, 3),
                l0: DVector::zeros(2),
                g: DVector::zeros(3),
                w0: 1.0,
            });
        }
        prog.radial.push(Group {
            profile: AdmissibleProfile::psi(SParam::Finite(0.0)),
            items,
        });
        let mut start = DVector::zeros(3);
        block.pack_into(&(DMatrix::identity(2, 2) * 0.5), &mut start);
        let sol = prog.solve(&start, &BarrierOptions::default()).unwrap();
        let s = block.unpack(&sol.v);
        assert!((s - DMatrix::<f64>::identity(2, 2)).amax() < 1e-6);
    }
}
