// Interpolating two d-ellipsoids, and the two sausage constructions that
// produce a single ψ-ellipsoidal function above two translates with a
// strictly smaller integral.

use lownerlab::interpolation::{domination_gap, grid_points};
use lownerlab::{interpolate, sausage_bounded, sausage_increasing, AdmissibleProfile, DEllipsoid, Result, SParam};
use nalgebra::{DMatrix, DVector};

/// Integral factors of the increasing-profile and bounded-domain sausages.
pub fn run_example() -> Result<(f64, f64)> {
    let e1 = DEllipsoid::new(DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0])), 1.0, DVector::from_vec(vec![1.0, 0.0]))?;
    let e2 = DEllipsoid::new(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 3.0])), 2.0, DVector::from_vec(vec![-1.0, 0.5]))?;
    let mid = interpolate(&e1, &e2, 0.5)?;
    println!("interpolated: det A = {:.6}, alpha = {:.6}", mid.det(), mid.height);

    let m = DMatrix::identity(2, 2);
    let (a1, a2) = (DVector::from_vec(vec![0.4, 0.0]), DVector::from_vec(vec![-0.4, 0.0]));
    let psi = AdmissibleProfile::psi(SParam::Finite(1.0));
    let inc = sausage_increasing(&psi, &m, 1.0, &a1, &a2, 4000)?;
    let ind = AdmissibleProfile::indicator(1.0)?;
    let bnd = sausage_bounded(&ind, &m, 1.0, &a1, &a2)?;

    let grid = grid_points(2, -6.0, 6.0, 100 * 100);
    for (name, profile, s) in [("increasing", &psi, &inc), ("bounded", &ind, &bnd)] {
        let t1 = DEllipsoid::new(m.clone(), 1.0, a1.clone())?;
        let t2 = DEllipsoid::new(m.clone(), 1.0, a2.clone())?;
        let gap = domination_gap(profile, &t1, &t2, &s.ellipsoid, &grid);
        println!("{name}: integral factor {:.6}, domination gap {gap:.2e}", s.integral_factor);
    }
    Ok((inc.integral_factor, bnd.integral_factor))
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
