// The polar of a height function is the matching ψ-ellipsoidal function, and
// the product of their integrals does not depend on the ellipsoid. At
// s = ∞ the pointwise identity breaks: t² conjugates to t²/4, not t².

use lownerlab::interpolation::grid_points;
use lownerlab::legendre::{duality_check, mahler_identity_check};
use lownerlab::{DEllipsoid, QuadratureSpec, Result, SParam};
use nalgebra::{DMatrix, DVector};

/// (max pointwise residual over finite s, max Mahler residual over all s).
pub fn run_example() -> Result<(f64, f64)> {
    let e = DEllipsoid::new(
        DMatrix::from_row_slice(2, 2, &[1.3, 0.2, 0.2, 0.7]),
        1.8,
        DVector::zeros(2),
    )?;
    let grid = grid_points(2, -3.0, 3.0, 41 * 41);
    let spec = QuadratureSpec::default();
    let (mut pointwise, mut mahler): (f64, f64) = (0.0, 0.0);
    for s in [SParam::Finite(0.0), SParam::Finite(1.0), SParam::Finite(2.0), SParam::Infinite] {
        let r = duality_check(s, &e, &grid)?;
        let m = mahler_identity_check(s, &e, &spec)?;
        println!("s = {s}: sup |(h_E)° − ℓ_E| = {r:.2e}, Mahler residual = {m:.2e}");
        if !matches!(s, SParam::Infinite) {
            pointwise = pointwise.max(r);
        }
        mahler = mahler.max(m);
    }
    Ok((pointwise, mahler))
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
