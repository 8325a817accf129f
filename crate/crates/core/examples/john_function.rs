// The John s-function: the largest-integral height function below f.

use lownerlab::{solve_john_s, DEllipsoid, LogDensity, Result, SParam, SolverOptions};
use nalgebra::{DMatrix, DVector};

/// Integrals of 𝐉^s f for f = e^{−|x|²} in the plane at s = 0, 1, ∞.
pub fn run_example() -> Result<Vec<f64>> {
    let f = LogDensity::gaussian(DEllipsoid::new(DMatrix::identity(2, 2), 1.0, DVector::zeros(2))?);
    let mut out = Vec::new();
    for s in [SParam::Finite(0.0), SParam::Finite(1.0), SParam::Infinite] {
        let r = solve_john_s(&f, s, &SolverOptions::default())?;
        println!(
            "s = {s}: eig A = {:?}, alpha = {:.6}, integral = {:.6}",
            r.optimum.eigenvalues(),
            r.optimum.height,
            r.integral
        );
        out.push(r.integral);
    }
    Ok(out)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
