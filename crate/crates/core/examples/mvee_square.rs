// The centered MVEE of the square and the Gaussian Löwner function of the
// squared square gauge, computed through the MVEE and by the generic solver.

use lownerlab::{john_decomposition, lowner_infty_of_gauge, mvee_centered, solve_lowner_s, LogDensity, Result, SParam, SolverOptions};
use nalgebra::{DMatrix, DVector};

/// (|M − Id/2|, |A_mvee − Id/√2|, |A_solver − Id/√2|, solver integral).
pub fn run_example() -> Result<(f64, f64, f64, f64)> {
    let square: Vec<DVector<f64>> = [[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]]
        .iter()
        .map(|p| DVector::from_column_slice(p))
        .collect();
    let m = mvee_centered(&square, 1e-9)?;
    let m_err = (&m - DMatrix::identity(2, 2) * 0.5).amax();
    let j = john_decomposition(&square, &m, 1e-7)?;
    println!("M = {m}John weights {:?}, residuals {:.1e} {:.1e}", j.weights, j.frobenius_residual, j.trace_residual);

    let target = DMatrix::identity(2, 2) * std::f64::consts::FRAC_1_SQRT_2;
    let via_mvee = lowner_infty_of_gauge(&square)?;
    let f = LogDensity::gauge_power(square, 2.0, 1.0)?;
    let solved = solve_lowner_s(&f, SParam::Infinite, &SolverOptions::default())?;
    let e1 = (&via_mvee.matrix - &target).amax();
    let e2 = (&solved.optimum.matrix - &target).amax();
    println!("A via MVEE off by {e1:.2e}; A via solver off by {e2:.2e}, alpha = {:.8}", solved.optimum.height);
    println!("integral {:.8} (2π = {:.8})", solved.integral, 2.0 * std::f64::consts::PI);
    Ok((m_err, e1, e2, solved.integral))
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
