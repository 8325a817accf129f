// Löwner s-curves: the comparison band between neighbouring s, the approach
// to the s = 0 solution, and the Gaussian limit.

use lownerlab::{band_checks, gaussian_limit, s_curve, zero_limit_check, DEllipsoid, Error, LogDensity, Result, SParam, SolverOptions};
use nalgebra::{DMatrix, DVector};

/// (band violations, zero-limit distance at s = 1e-3, last curve integral / ∫G).
pub fn run_example() -> Result<(usize, f64, f64)> {
    let opts = SolverOptions::default();
    let g = LogDensity::gaussian(DEllipsoid::new(DMatrix::from_element(1, 1, 1.3), 1.0, DVector::zeros(1))?);
    let curve = s_curve(&g, &[1.0, 10.0, 100.0, 1000.0], &opts)?;
    print!("{}", curve.to_csv());
    let bands = band_checks(&curve, 1e-6)?;
    let violations = bands.iter().filter(|b| !b.holds).count();
    let mass = std::f64::consts::PI.sqrt() / 1.3;
    let last = curve.integrals().last().copied().flatten().unwrap_or(f64::NAN) / mass;
    println!("band violations: {violations}; last integral / ∫G = {last:.6}");

    let limit = gaussian_limit(&g, Some(&curve), &opts)?;
    println!("s = ∞ optimum {:?}, self-consistency {:?}", limit.optimum.optimum.matrix.as_slice(), limit.self_consistency);

    let shifted = LogDensity::ellipsoidal(
        SParam::Finite(0.0),
        DEllipsoid::new(DMatrix::from_element(1, 1, 1.5), 2.0, DVector::from_element(1, 0.3))?,
    );
    let z = zero_limit_check(&shifted, 1e-3, &opts)?;
    println!("zero limit at s = 1e-3: parameters {:.2e}, sup {:.2e}", z.parameter_distance, z.sup_distance);

    let exp = LogDensity::ellipsoidal(SParam::Finite(0.0), DEllipsoid::unit(1));
    match gaussian_limit(&exp, None, &opts) {
        Err(Error::Infeasible { reason, witness }) => println!("e^(−|x|) at s = ∞: {reason}, witness {witness:?}"),
        other => println!("unexpected: {other:?}"),
    }
    Ok((violations, z.parameter_distance, last))
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
