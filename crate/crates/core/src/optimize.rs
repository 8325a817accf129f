//! Derivative-free local search and deterministic point sets.

use nalgebra::DVector;

/// Nelder–Mead minimization from `x0` with initial simplex size `step`.
/// Returns the best point and value; `+∞` values are treated as infeasible.
pub fn nelder_mead_min<F: Fn(&DVector<f64>) -> f64>(
    f: &F,
    x0: &DVector<f64>,
    step: f64,
    tol: f64,
    max_evals: usize,
) -> (DVector<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<(DVector<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.clone(), f(x0)));
    for i in 0..n {
        let mut x = x0.clone();
        x[i] += step;
        let fx = f(&x);
        simplex.push((x, fx));
    }
    let mut evals = n + 1;
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let size = simplex
            .iter()
            .skip(1)
            .map(|(x, _)| (x - &simplex[0].0).amax())
            .fold(0.0, f64::max);
        if (worst - best).abs() <= tol * (1.0 + best.abs()) && size <= tol.sqrt() * (1.0 + simplex[0].0.amax()) {
            break;
        }
        if size < 1e-15 * (1.0 + simplex[0].0.amax()) {
            break;
        }
        let centroid = simplex[..n].iter().fold(DVector::zeros(n), |acc, (x, _)| acc + x) / n as f64;
        let xw = simplex[n].0.clone();
        let xr = &centroid + (&centroid - &xw);
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = &centroid + (&centroid - &xw) * 2.0;
            let fe = f(&xe);
            evals += 1;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < simplex[n].1 {
            let xc = &centroid + (&xr - &centroid) * 0.5;
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = &centroid + (&xw - &centroid) * 0.5;
            let fc = f(&xc);
            (xc, fc)
        };
        evals += 1;
        if fc < simplex[n].1.min(fr) {
            simplex[n] = (xc, fc);
            continue;
        }
        let x_best = simplex[0].0.clone();
        for item in simplex.iter_mut().skip(1) {
            let x = &x_best + (&item.0 - &x_best) * 0.5;
            let fx = f(&x);
            *item = (x, fx);
        }
        evals += n;
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

/// Golden-section minimization on [a, b].
pub fn golden_min<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (t, v) = crate::legendre::golden_max(&|t| -f(t), a, b, tol);
    (t, -v)
}

/// Quasi-uniform unit vectors: a Fibonacci lattice in d = 3, Halton-driven
/// Gaussian directions otherwise.
pub fn sphere_points(d: usize, n: usize) -> Vec<DVector<f64>> {
    if d == 3 {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        return (0..n)
            .map(|k| {
                let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
                let r = (1.0 - z * z).sqrt();
                let t = golden * k as f64;
                DVector::from_vec(vec![r * t.cos(), r * t.sin(), z])
            })
            .collect();
    }
    let normal = statrs::distribution::Normal::standard();
    use statrs::distribution::ContinuousCDF;
    (0..n)
        .map(|k| {
            let h = halton(k + 1, d);
            let v = DVector::from_iterator(d, h.into_iter().map(|u| normal.inverse_cdf(u)));
            let nv = v.norm();
            v / nv
        })
        .collect()
}

const PRIMES: [usize; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// The `index`-th point of the Halton sequence in [0,1)^d (d ≤ 12).
pub fn halton(index: usize, d: usize) -> Vec<f64> {
    (0..d)
        .map(|j| {
            let base = PRIMES[j % PRIMES.len()];
            let mut f = 1.0;
            let mut r = 0.0;
            let mut i = index;
            while i > 0 {
                f /= base as f64;
                r += f * (i % base) as f64;
                i /= base;
            }
            r
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &DVector<f64>| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let (x, v) = nelder_mead_min(&f, &DVector::from_vec(vec![-1.2, 1.0]), 0.5, 1e-16, 20000);
        assert!(v < 1e-10, "{v}");
        assert!((x[0] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn halton_prefix() {
        assert_eq!(halton(1, 2), vec![0.5, 1.0 / 3.0]);
        assert_eq!(halton(2, 1), vec![0.25]);
    }

    #[test]
    fn sphere_points_are_unit() {
        for d in [3, 4] {
            for p in sphere_points(d, 50) {
                assert!((p.norm() - 1.0).abs() < 1e-12);
            }
        }
    }
}
