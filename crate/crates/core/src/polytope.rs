//! Vertex-described polytopes in low dimension: facets, gauge and volume.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A facet {x : ⟨normal, x⟩ = offset}, with the polytope on the side ≤ offset.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub normal: DVector<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    pub vertices: Vec<DVector<f64>>,
    pub facets: Vec<Facet>,
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Unit normal of the hyperplane through d points in ℝ^d, if they are affinely independent.
fn hyperplane(points: &[&DVector<f64>]) -> Option<(DVector<f64>, f64)> {
    let d = points[0].len();
    if d == 1 {
        return Some((DVector::from_element(1, 1.0), points[0][0]));
    }
    // null vector of the (d−1)×d matrix of differences
    let rows: Vec<f64> = points[1..]
        .iter()
        .flat_map(|p| (*p - points[0]).iter().copied().collect::<Vec<_>>())
        .collect();
    let m = DMatrix::from_row_slice(d - 1, d, &rows);
    let mut n = DVector::zeros(d);
    for i in 0..d {
        let minor = m.clone().remove_column(i);
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        n[i] = sign * minor.determinant();
    }
    let norm = n.norm();
    let scale = m.abs().max().max(1e-300);
    if norm <= 1e-12 * scale.powi(d as i32 - 1) {
        return None;
    }
    n /= norm;
    let c = n.dot(points[0]);
    Some((n, c))
}

impl Polytope {
    /// Convex hull facets of the given vertex set, by enumeration of d-subsets.
    pub fn from_vertices(vertices: Vec<DVector<f64>>) -> Result<Self> {
        let Some(first) = vertices.first() else {
            return Err(Error::InvalidInput("polytope needs vertices".into()));
        };
        let d = first.len();
        if d == 0 || vertices.iter().any(|v| v.len() != d) {
            return Err(Error::InvalidInput("vertices must share a positive dimension".into()));
        }
        if vertices.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidInput("non-finite vertex".into()));
        }
        let scale = vertices.iter().map(|v| v.amax()).fold(0.0, f64::max).max(1e-300);
        let tol = 1e-10 * scale;
        let mut facets: Vec<Facet> = Vec::new();
        for idx in subsets(vertices.len(), d) {
            let pts: Vec<&DVector<f64>> = idx.iter().map(|&i| &vertices[i]).collect();
            let Some((n, c)) = hyperplane(&pts) else { continue };
            let side: Vec<f64> = vertices.iter().map(|v| n.dot(v) - c).collect();
            let (n, c) = if side.iter().all(|&s| s <= tol) {
                (n, c)
            } else if side.iter().all(|&s| s >= -tol) {
                (-n, -c)
            } else {
                continue;
            };
            let dup = facets
                .iter()
                .any(|f| (&f.normal - &n).amax() < 1e-9 && (f.offset - c).abs() < tol);
            if !dup {
                facets.push(Facet { normal: n, offset: c });
            }
        }
        if facets.len() < d + 1 {
            return Err(Error::Degenerate("vertices do not span a full-dimensional polytope".into()));
        }
        Ok(Self { vertices, facets })
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn origin_interior(&self) -> bool {
        let scale = self.vertices.iter().map(|v| v.amax()).fold(0.0, f64::max);
        self.facets.iter().all(|f| f.offset > 1e-12 * scale)
    }

    /// ‖x‖_K = max_j ⟨n_j, x⟩ / c_j; requires the origin in the interior.
    pub fn gauge(&self, x: &DVector<f64>) -> f64 {
        self.facets
            .iter()
            .map(|f| f.normal.dot(x) / f.offset)
            .fold(0.0, f64::max)
    }

    /// Scaled facet normals n_j / c_j (the vertices of the polar body).
    pub fn polar_vertices(&self) -> Vec<DVector<f64>> {
        self.facets.iter().map(|f| &f.normal / f.offset).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        let scale = self.vertices.iter().map(|v| v.amax()).fold(0.0, f64::max);
        self.vertices
            .iter()
            .all(|v| self.vertices.iter().any(|w| (v + w).amax() <= 1e-10 * scale))
    }

    /// Volume as the sum of cones from an interior point over the facets.
    pub fn volume(&self) -> f64 {
        let d = self.dim();
        let n = self.vertices.len() as f64;
        let centroid = self.vertices.iter().fold(DVector::zeros(d), |acc, v| acc + v) / n;
        let scale = self.vertices.iter().map(|v| v.amax()).fold(0.0, f64::max);
        let mut vol = 0.0;
        for f in &self.facets {
            let height = f.offset - f.normal.dot(&centroid);
            let on: Vec<&DVector<f64>> = self
                .vertices
                .iter()
                .filter(|v| (f.normal.dot(v) - f.offset).abs() <= 1e-9 * scale.max(1.0))
                .collect();
            let area = facet_area(&f.normal, &on);
            vol += height * area / d as f64;
        }
        vol
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for v in &self.vertices {
            for i in 0..d {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        (lo, hi)
    }
}

fn facet_area(normal: &DVector<f64>, pts: &[&DVector<f64>]) -> f64 {
    match normal.len() {
        1 => 1.0,
        2 => {
            let mut best: f64 = 0.0;
            for a in pts {
                for b in pts {
                    best = best.max((*a - *b).norm());
                }
            }
            best
        }
        3 => {
            // order the facet vertices by angle in the facet plane, then shoelace
            let c = pts.iter().fold(DVector::zeros(3), |acc, p| acc + *p) / pts.len() as f64;
            let helper = if normal[0].abs() < 0.9 {
                DVector::from_vec(vec![1.0, 0.0, 0.0])
            } else {
                DVector::from_vec(vec![0.0, 1.0, 0.0])
            };
            let e1 = {
                let v = &helper - normal * normal.dot(&helper);
                &v / v.norm()
            };
            let e2 = DVector::from_vec(vec![
                normal[1] * e1[2] - normal[2] * e1[1],
                normal[2] * e1[0] - normal[0] * e1[2],
                normal[0] * e1[1] - normal[1] * e1[0],
            ]);
            let mut planar: Vec<(f64, f64)> = pts
                .iter()
                .map(|p| {
                    let q = *p - &c;
                    (q.dot(&e1), q.dot(&e2))
                })
                .collect();
            planar.sort_by(|a, b| a.1.atan2(a.0).total_cmp(&b.1.atan2(b.0)));
            let n = planar.len();
            let mut area = 0.0;
            for i in 0..n {
                let (x1, y1) = planar[i];
                let (x2, y2) = planar[(i + 1) % n];
                area += x1 * y2 - x2 * y1;
            }
            0.5 * area.abs()
        }
        _ => f64::NAN,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn square() {
        let k = Polytope::from_vertices(vec![
            v(&[1.0, 1.0]),
            v(&[-1.0, 1.0]),
            v(&[-1.0, -1.0]),
            v(&[1.0, -1.0]),
        ])
        .unwrap();
        assert_eq!(k.facets.len(), 4);
        assert!(k.origin_interior());
        assert!(k.is_symmetric());
        assert!((k.volume() - 4.0).abs() < 1e-12);
        assert!((k.gauge(&v(&[0.5, -2.0])) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn cube_and_octahedron() {
        let mut cube = Vec::new();
        for a in [-1.0, 1.0] {
            for b in [-1.0, 1.0] {
                for c in [-1.0, 1.0] {
                    cube.push(v(&[a, b, c]));
                }
            }
        }
        let k = Polytope::from_vertices(cube).unwrap();
        assert_eq!(k.facets.len(), 6);
        assert!((k.volume() - 8.0).abs() < 1e-10);
        let mut oct = Vec::new();
        for i in 0..3 {
            for s in [-1.0, 1.0] {
                let mut e = vec![0.0; 3];
                e[i] = s;
                oct.push(v(&e));
            }
        }
        let o = Polytope::from_vertices(oct).unwrap();
        assert_eq!(o.facets.len(), 8);
        assert!((o.volume() - 4.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn interval_and_interior_points() {
        let k = Polytope::from_vertices(vec![v(&[-1.0]), v(&[0.2]), v(&[2.0])]).unwrap();
        assert_eq!(k.facets.len(), 2);
        assert!((k.volume() - 3.0).abs() < 1e-12);
        let off = Polytope::from_vertices(vec![v(&[1.0, 0.0]), v(&[2.0, 0.0]), v(&[1.0, 1.0])]).unwrap();
        assert!(!off.origin_interior());
    }

    #[test]
    fn degenerate_rejected() {
        assert!(Polytope::from_vertices(vec![v(&[2.0, 0.0]), v(&[-2.0, 0.0])]).is_err());
    }
}
