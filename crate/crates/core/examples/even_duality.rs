// For even f, the John function of f and the Löwner function of f° are
// polar to each other (and symmetrically with the roles swapped).

use lownerlab::interpolation::grid_points;
use lownerlab::{even_duality_check, DEllipsoid, LogDensity, Result, SParam, SolverOptions};
use nalgebra::{DMatrix, DVector};

/// Largest residual over s ∈ {0, 1, ∞} for a Gaussian and a height function.
pub fn run_example() -> Result<f64> {
    let e = DEllipsoid::new(DMatrix::from_element(1, 1, 0.7), 1.0, DVector::zeros(1))?;
    let cases = [
        ("gaussian", LogDensity::gaussian(e.clone())),
        ("height_1", LogDensity::height(SParam::Finite(1.0), e)),
    ];
    let grid = grid_points(1, -4.0, 4.0, 81);
    let opts = SolverOptions::default();
    let mut worst: f64 = 0.0;
    for (name, f) in &cases {
        for s in [SParam::Finite(0.0), SParam::Finite(1.0), SParam::Infinite] {
            match even_duality_check(f, s, &grid, &opts) {
                Ok(r) => {
                    println!("{name}, s = {s}: john side {:.2e}, lowner side {:.2e}", r.john_side, r.lowner_side);
                    worst = worst.max(r.john_side).max(r.lowner_side);
                }
                Err(err) => println!("{name}, s = {s}: {err}"),
            }
        }
    }
    Ok(worst)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
