//! Origin-centered minimum-volume enclosing ellipsoids, John decompositions,
//! and the Gaussian Löwner function of a squared polytope gauge.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::ellipsoid::DEllipsoid;
use crate::error::{Error, Result};
use crate::polytope::Polytope;

/// The centered MVEE {x : xᵀMx ≤ 1} together with its optimal design.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredMvee {
    pub matrix: DMatrix<f64>,
    /// Design weights on the input points (sum 1).
    pub weights: Vec<f64>,
    /// max_i xᵢᵀW⁻¹xᵢ / d − 1 at termination.
    pub gap: f64,
    pub iterations: usize,
}

fn check_points(points: &[DVector<f64>]) -> Result<usize> {
    let Some(first) = points.first() else {
        return Err(Error::InvalidInput("no points".into()));
    };
    let d = first.len();
    if d == 0 || points.iter().any(|p| p.len() != d) {
        return Err(Error::InvalidInput("points must share a positive dimension".into()));
    }
    if points.iter().any(|p| p.iter().any(|x| !x.is_finite())) {
        return Err(Error::InvalidInput("non-finite point".into()));
    }
    let mut scatter = DMatrix::zeros(d, d);
    for p in points {
        scatter += p * p.transpose();
    }
    let eig = SymmetricEigen::new(scatter).eigenvalues;
    let top = eig.amax();
    if !(eig.min() > 1e-12 * top) {
        return Err(Error::Degenerate("points do not span the space".into()));
    }
    Ok(d)
}

fn leverages(points: &[DVector<f64>], w: &[f64], d: usize) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let mut m = DMatrix::zeros(d, d);
    for (p, &wi) in points.iter().zip(w) {
        if wi > 0.0 {
            m += p * p.transpose() * wi;
        }
    }
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::Numerical("design matrix lost definiteness".into()))?;
    let k = points.iter().map(|p| p.dot(&chol.solve(p))).collect();
    Ok((chol.inverse(), k))
}

/// Khachiyan's design ascent with Todd–Yildirim away steps. The ellipsoid is
/// scaled at the end so that every point is enclosed exactly.
pub fn mvee_with_design(points: &[DVector<f64>], tol: f64) -> Result<CenteredMvee> {
    let d = check_points(points)?;
    let n = points.len();
    let df = d as f64;
    let mut w = vec![1.0 / n as f64; n];
    let max_iter = 200_000;
    let mut it = 0;
    loop {
        let (winv, k) = leverages(points, &w, d)?;
        let (j, kmax) = k
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let (l, kmin) = k
            .iter()
            .enumerate()
            .filter(|(i, _)| w[*i] > 0.0)
            .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
        let gap = kmax / df - 1.0;
        let away_gap = 1.0 - kmin / df;
        if (gap <= tol && away_gap <= tol) || it >= max_iter {
            if it >= max_iter && gap > tol {
                return Err(Error::Numerical(format!("MVEE did not converge (gap {gap:e})")));
            }
            // exact enclosure
            let matrix = winv / kmax;
            return Ok(CenteredMvee {
                matrix: 0.5 * (&matrix + matrix.transpose()),
                weights: w,
                gap,
                iterations: it,
            });
        }
        it += 1;
        if gap >= away_gap {
            let lambda = (kmax - df) / (df * (kmax - 1.0));
            for wi in w.iter_mut() {
                *wi *= 1.0 - lambda;
            }
            w[j] += lambda;
        } else {
            let cap = w[l] / (1.0 - w[l]);
            let lambda = if kmin > 1.0 {
                ((df - kmin) / (df * (kmin - 1.0))).min(cap)
            } else {
                cap
            };
            for wi in w.iter_mut() {
                *wi *= 1.0 + lambda;
            }
            w[l] -= lambda;
            if w[l] < 1e-300 {
                w[l] = 0.0;
            }
        }
    }
}

/// M with {x : xᵀMx ≤ 1} the smallest origin-centered ellipsoid containing
/// `points` (equivalently their symmetrization).
pub fn mvee_centered(points: &[DVector<f64>], tol: f64) -> Result<DMatrix<f64>> {
    // the weights only certify to about the square of the gap; keep it tight
    Ok(mvee_with_design(points, tol.min(1e-11))?.matrix)
}

/// Contact vectors and weights with Σcᵢuᵢuᵢᵀ = Id and Σcᵢ = d.
#[derive(Debug, Clone, PartialEq)]
pub struct JohnDecomposition {
    pub vectors: Vec<DVector<f64>>,
    pub weights: Vec<f64>,
    /// ‖Σcᵢuᵢuᵢᵀ − Id‖_F.
    pub frobenius_residual: f64,
    /// |Σcᵢ − d|.
    pub trace_residual: f64,
}

impl JohnDecomposition {
    pub fn holds(&self, tol: f64) -> bool {
        self.frobenius_residual <= tol && self.trace_residual <= tol
    }
}

/// Decomposes the identity over the contact points of the MVEE `matrix`.
/// Contacts are points with xᵀMx ≥ 1 − `tol`; the weights come from the
/// optimal design, recomputed here, and `matrix` must agree with it.
pub fn john_decomposition(points: &[DVector<f64>], matrix: &DMatrix<f64>, tol: f64) -> Result<JohnDecomposition> {
    let design = mvee_with_design(points, 1e-11)?;
    let d = design.matrix.nrows();
    if matrix.nrows() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: matrix.nrows(),
        });
    }
    let drift = (matrix - &design.matrix).norm() / design.matrix.norm();
    if drift > 1e-6 {
        return Err(Error::InvalidInput(format!(
            "matrix is not the MVEE of these points (relative drift {drift:e})"
        )));
    }
    let eig = SymmetricEigen::new(matrix.clone());
    let root = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()))
        * eig.eigenvectors.transpose();
    let mut vectors = Vec::new();
    let mut weights = Vec::new();
    for (p, &w) in points.iter().zip(&design.weights) {
        let y = &root * p;
        let r2 = y.norm_squared();
        if r2 < 1.0 - tol || w == 0.0 {
            continue;
        }
        vectors.push(&y / r2.sqrt());
        weights.push(d as f64 * w * r2);
    }
    if vectors.is_empty() {
        return Err(Error::Numerical("no contact points".into()));
    }
    let mut sum = DMatrix::zeros(d, d);
    for (u, c) in vectors.iter().zip(&weights) {
        sum += u * u.transpose() * *c;
    }
    let frobenius_residual = (sum - DMatrix::identity(d, d)).norm();
    let trace_residual = (weights.iter().sum::<f64>() - d as f64).abs();
    Ok(JohnDecomposition {
        vectors,
        weights,
        frobenius_residual,
        trace_residual,
    })
}

/// The s = ∞ Löwner function of e^{−‖x‖²_K}: (M^{1/2} ⊕ 1, 0) where
/// {xᵀMx ≤ 1} is the centered MVEE of K's vertices.
pub fn lowner_infty_of_gauge(vertices: &[DVector<f64>]) -> Result<DEllipsoid> {
    let d = check_points(vertices)?;
    let k = Polytope::from_vertices(vertices.to_vec())?;
    if !k.origin_interior() {
        return Err(Error::InvalidInput("origin is not interior to K".into()));
    }
    let m = mvee_centered(vertices, 1e-11)?;
    let eig = SymmetricEigen::new(m);
    let root = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.sqrt()))
        * eig.eigenvectors.transpose();
    DEllipsoid::new(0.5 * (&root + root.transpose()), 1.0, DVector::zeros(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn square() -> Vec<DVector<f64>> {
        vec![v(&[1.0, 1.0]), v(&[1.0, -1.0]), v(&[-1.0, 1.0]), v(&[-1.0, -1.0])]
    }

    #[test]
    fn cross_gives_identity() {
        let pts = vec![v(&[1.0, 0.0]), v(&[-1.0, 0.0]), v(&[0.0, 1.0]), v(&[0.0, -1.0])];
        let m = mvee_centered(&pts, 1e-9).unwrap();
        assert!((m - DMatrix::identity(2, 2)).amax() < 1e-12);
        let j = john_decomposition(&pts, &mvee_centered(&pts, 1e-9).unwrap(), 1e-7).unwrap();
        assert!(j.holds(1e-12));
        assert!(j.weights.iter().all(|c| (c - 0.5).abs() < 1e-12));
    }

    #[test]
    fn square_gives_half_identity() {
        let m = mvee_centered(&square(), 1e-9).unwrap();
        assert!((m - DMatrix::identity(2, 2) * 0.5).amax() < 1e-12);
    }

    #[test]
    fn stretched_cross() {
        let pts = vec![v(&[2.0, 0.0]), v(&[-2.0, 0.0]), v(&[0.0, 1.0]), v(&[0.0, -1.0])];
        let e = lowner_infty_of_gauge(&pts).unwrap();
        assert!((e.matrix[(0, 0)] - 0.5).abs() < 1e-10);
        assert!((e.matrix[(1, 1)] - 1.0).abs() < 1e-10);
        assert!(e.matrix[(0, 1)].abs() < 1e-10);
    }

    #[test]
    fn rank_deficient_points() {
        let pts = vec![v(&[2.0, 0.0]), v(&[-2.0, 0.0])];
        assert!(matches!(mvee_centered(&pts, 1e-9), Err(Error::Degenerate(_))));
    }

    #[test]
    fn interior_point_does_not_move_the_ellipsoid() {
        let mut pts = square();
        let m0 = mvee_centered(&pts, 1e-9).unwrap();
        pts.push(v(&[0.3, -0.2]));
        let m1 = mvee_centered(&pts, 1e-9).unwrap();
        assert!((m0 - m1).amax() < 1e-9);
    }
}
