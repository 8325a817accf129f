//! d-ellipsoids (A ⊕ α, a) and the ψ-ellipsoidal functions they represent.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::profile::AdmissibleProfile;

/// The parameter triple (A ⊕ α, a): a positive-definite matrix, a height and
/// a center. Represents ℓ_E(x) = α·e^{−ψ(|A(x − a)|)}.
#[derive(Debug, Clone, PartialEq)]
pub struct DEllipsoid {
    pub matrix: DMatrix<f64>,
    pub height: f64,
    pub center: DVector<f64>,
}

impl DEllipsoid {
    pub fn new(matrix: DMatrix<f64>, height: f64, center: DVector<f64>) -> Result<Self> {
        let d = matrix.nrows();
        if d == 0 || matrix.ncols() != d {
            return Err(Error::InvalidInput("matrix must be square and nonempty".into()));
        }
        if center.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: center.len(),
            });
        }
        if !(height > 0.0 && height.is_finite()) {
            return Err(Error::InvalidInput(format!("height must be positive, got {height}")));
        }
        if matrix.iter().chain(center.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite entries".into()));
        }
        let scale = matrix.abs().max().max(f64::MIN_POSITIVE);
        let asym = (&matrix - matrix.transpose()).abs().max();
        if asym > 1e-12 * scale {
            return Err(Error::InvalidInput(format!(
                "matrix is not symmetric (residual {asym:e})"
            )));
        }
        let sym = 0.5 * (&matrix + matrix.transpose());
        if sym.clone().cholesky().is_none() {
            return Err(Error::InvalidInput("matrix is not positive definite".into()));
        }
        Ok(Self {
            matrix: sym,
            height,
            center,
        })
    }

    /// (Id ⊕ 1, 0).
    pub fn unit(d: usize) -> Self {
        Self {
            matrix: DMatrix::identity(d, d),
            height: 1.0,
            center: DVector::zeros(d),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn det(&self) -> f64 {
        self.matrix.determinant()
    }

    pub fn log_det(&self) -> f64 {
        match self.matrix.clone().cholesky() {
            Some(c) => 2.0 * c.l().diagonal().iter().map(|v| v.ln()).sum::<f64>(),
            None => f64::NEG_INFINITY,
        }
    }

    /// log α − log det A, so that ∫ℓ_E = e^{objective}·V_Ψ.
    pub fn objective(&self) -> f64 {
        self.height.ln() - self.log_det()
    }

    /// Eigenvalues of A in increasing order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// A(x − a).
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * (x - &self.center)
    }

    /// A⁻¹(x − a).
    pub fn inverse_apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let c = self
            .matrix
            .clone()
            .cholesky()
            .expect("validated positive definite");
        c.solve(&(x - &self.center))
    }

    /// (A⁻¹ ⊕ 1/α, a).
    pub fn inverse_position(&self) -> Self {
        let inv = self
            .matrix
            .clone()
            .cholesky()
            .expect("validated positive definite")
            .inverse();
        Self {
            matrix: 0.5 * (&inv + inv.transpose()),
            height: 1.0 / self.height,
            center: self.center.clone(),
        }
    }

    pub fn translated(&self, v: &DVector<f64>) -> Self {
        Self {
            center: &self.center + v,
            ..self.clone()
        }
    }

    /// Max relative deviation between the parameters of two ellipsoids
    /// (matrix in the spectral norm, height, center in the Euclidean norm).
    pub fn relative_distance(&self, other: &Self) -> f64 {
        let dm = (&self.matrix - &other.matrix).norm() / other.matrix.norm();
        let dh = (self.height - other.height).abs() / other.height;
        let dc = (&self.center - &other.center).norm() / (1.0 + other.center.norm());
        dm.max(dh).max(dc)
    }
}

/// ℓ_E(x) = α·e^{−ψ(|A(x−a)|)}; zero outside the effective domain.
pub fn ellipsoidal_eval(profile: &AdmissibleProfile, e: &DEllipsoid, x: &DVector<f64>) -> f64 {
    let r = e.apply(x).norm();
    let p = profile.eval(r);
    if p.is_infinite() {
        0.0
    } else {
        e.height * (-p).exp()
    }
}

/// −log ℓ_E(x), `+∞` outside the support.
pub fn ellipsoidal_neg_log(profile: &AdmissibleProfile, e: &DEllipsoid, x: &DVector<f64>) -> f64 {
    profile.eval(e.apply(x).norm()) - e.height.ln()
}

/// ∫ℓ_E = α/det A · V_Ψ.
pub fn ellipsoidal_integral(e: &DEllipsoid, v_psi: f64) -> f64 {
    e.height / e.det() * v_psi
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
pub(crate) enum MatrixRepr {
    Flat(Vec<f64>),
    Nested(Vec<Vec<f64>>),
}

impl MatrixRepr {
    pub(crate) fn into_matrix(self, d: Option<usize>) -> Result<DMatrix<f64>> {
        match self {
            MatrixRepr::Flat(v) => {
                let n = d.unwrap_or_else(|| (v.len() as f64).sqrt().round() as usize);
                if n == 0 || n * n != v.len() {
                    return Err(Error::Schema(format!(
                        "flat matrix of length {} is not {n}×{n}",
                        v.len()
                    )));
                }
                Ok(DMatrix::from_row_slice(n, n, &v))
            }
            MatrixRepr::Nested(rows) => {
                let n = rows.len();
                if n == 0 || rows.iter().any(|r| r.len() != n) || d.is_some_and(|d| d != n) {
                    return Err(Error::Schema("nested matrix must be square of size dim".into()));
                }
                let flat: Vec<f64> = rows.into_iter().flatten().collect();
                Ok(DMatrix::from_row_slice(n, n, &flat))
            }
        }
    }
}

pub(crate) fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct EllipsoidJson {
    #[serde(rename = "A")]
    a_matrix: MatrixRepr,
    alpha: f64,
    a: Vec<f64>,
}

impl Serialize for DEllipsoid {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        EllipsoidJson {
            a_matrix: MatrixRepr::Flat(row_major(&self.matrix)),
            alpha: self.height,
            a: self.center.iter().copied().collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for DEllipsoid {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = EllipsoidJson::deserialize(de)?;
        let d = j.a.len();
        let m = j.a_matrix.into_matrix(Some(d)).map_err(D::Error::custom)?;
        DEllipsoid::new(m, j.alpha, DVector::from_vec(j.a)).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psi::SParam;
    use proptest::prelude::*;

    fn psi0() -> AdmissibleProfile {
        AdmissibleProfile::psi(SParam::Finite(0.0))
    }

    #[test]
    fn eval_examples() {
        let e = DEllipsoid::unit(2);
        assert_eq!(ellipsoidal_eval(&psi0(), &e, &DVector::zeros(2)), 1.0);
        let e1 = DEllipsoid::new(DMatrix::from_element(1, 1, 2.0), 3.0, DVector::zeros(1)).unwrap();
        let v = ellipsoidal_eval(&psi0(), &e1, &DVector::from_element(1, 1.0));
        assert!((v - 3.0 * (-2f64).exp()).abs() < 1e-15);
        let ind = AdmissibleProfile::indicator(1.0).unwrap();
        assert_eq!(
            ellipsoidal_eval(&ind, &e, &DVector::from_vec(vec![2.0, 0.0])),
            0.0
        );
    }

    #[test]
    fn integral_examples() {
        let e1 = DEllipsoid::new(DMatrix::from_element(1, 1, 2.0), 3.0, DVector::zeros(1)).unwrap();
        assert!((ellipsoidal_integral(&e1, 2.0) - 3.0).abs() < 1e-15);
        let u = DEllipsoid::unit(2).translated(&DVector::from_vec(vec![4.0, -1.0]));
        assert_eq!(ellipsoidal_integral(&u, 7.5), 7.5);
    }

    #[test]
    fn rejects_invalid() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(DEllipsoid::new(bad, 1.0, DVector::zeros(2)).is_err());
        let neg = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(DEllipsoid::new(neg, 1.0, DVector::zeros(2)).is_err());
        assert!(DEllipsoid::new(DMatrix::identity(2, 2), 0.0, DVector::zeros(2)).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let e = DEllipsoid::new(
            DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]),
            1.5,
            DVector::from_vec(vec![0.1, -0.2]),
        )
        .unwrap();
        let j = serde_json::to_string(&e).unwrap();
        let back: DEllipsoid = serde_json::from_str(&j).unwrap();
        assert_eq!(back, e);
        let nested: DEllipsoid =
            serde_json::from_str(r#"{"A": [[2.0, 0.3], [0.3, 1.0]], "alpha": 1.5, "a": [0.1, -0.2]}"#)
                .unwrap();
        assert_eq!(nested, e);
    }

    fn spd(d: usize, seed: &[f64]) -> DMatrix<f64> {
        let b = DMatrix::from_fn(d, d, |i, j| seed[(i * d + j) % seed.len()]);
        &b * b.transpose() + DMatrix::identity(d, d) * 0.5
    }

    proptest! {
        #[test]
        fn evaluation_identity(
            seed in proptest::collection::vec(-1.0f64..1.0, 9),
            c in proptest::collection::vec(-2.0f64..2.0, 3),
            x in proptest::collection::vec(-3.0f64..3.0, 3),
            alpha in 0.1f64..10.0,
            s in 0.0f64..5.0,
        ) {
            let d = 3;
            let e = DEllipsoid::new(spd(d, &seed), alpha, DVector::from_vec(c)).unwrap();
            let p = AdmissibleProfile::psi(SParam::Finite(s));
            let xv = DVector::from_vec(x);
            let lhs = ellipsoidal_eval(&p, &e, &xv);
            let rhs = alpha * ellipsoidal_eval(&p, &DEllipsoid::unit(d), &e.apply(&xv));
            prop_assert!((lhs - rhs).abs() <= 1e-14 * alpha);
        }

        #[test]
        fn ell_is_log_concave(
            seed in proptest::collection::vec(-1.0f64..1.0, 4),
            x in proptest::collection::vec(-3.0f64..3.0, 2),
            y in proptest::collection::vec(-3.0f64..3.0, 2),
            s in 0.0f64..5.0,
        ) {
            let e = DEllipsoid::new(spd(2, &seed), 1.0, DVector::zeros(2)).unwrap();
            let p = AdmissibleProfile::psi(SParam::Finite(s));
            let xv = DVector::from_vec(x);
            let yv = DVector::from_vec(y);
            let m = 0.5 * (&xv + &yv);
            let f = |v: &DVector<f64>| ellipsoidal_neg_log(&p, &e, v);
            prop_assert!(f(&m) <= 0.5 * (f(&xv) + f(&yv)) + 1e-10);
        }
    }
}
