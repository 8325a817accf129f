// The Löwner 0-function of min{e^{−|x−1|}, e^{−|x+1|}} on the line, checked
// against an independent grid search over (a, α) with A fixed by tails.

use lownerlab::{solve_lowner_s, DEllipsoid, LogDensity, Result, SParam, SolverOptions};
use nalgebra::{DMatrix, DVector};

fn part(c: f64) -> Result<LogDensity> {
    Ok(LogDensity::ellipsoidal(
        SParam::Finite(0.0),
        DEllipsoid::new(DMatrix::identity(1, 1), 1.0, DVector::from_element(1, c))?,
    ))
}

/// (solver integral, grid-oracle integral).
pub fn run_example() -> Result<(f64, f64)> {
    let f = LogDensity::min_of(vec![part(1.0)?, part(-1.0)?])?;
    let report = solve_lowner_s(&f, SParam::Finite(0.0), &SolverOptions::default())?;
    let e = &report.optimum;
    println!(
        "A = {:.8}, alpha = {:.8}, a = {:.2e}, integral = {:.8}",
        e.matrix[(0, 0)], e.height, e.center[0], report.integral
    );

    // brute force: for slope A ≤ 1 (tails) and center a the least height is
    // sup_x f(x)·e^{A|x−a|}; minimize height·2/A over a grid
    let xs: Vec<f64> = (-4000..=4000).map(|i| i as f64 * 1e-3).collect();
    let mut best = f64::INFINITY;
    for ia in -50..=50 {
        let a = ia as f64 * 0.02;
        for ik in 1..=100 {
            let k = ik as f64 * 0.01;
            let h = xs
                .iter()
                .map(|&x| f.eval(&DVector::from_element(1, x)) * (k * (x - a).abs()).exp())
                .fold(0.0, f64::max);
            best = best.min(2.0 * h / k);
        }
    }
    println!("grid oracle integral = {best:.8}");
    Ok((report.integral, best))
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
