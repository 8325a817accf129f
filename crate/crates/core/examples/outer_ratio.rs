// Outer integral ratios (∫𝐋^s f / ∫f)^{1/d} over a small corpus, with the
// dimensional bound alongside.

use lownerlab::{ratio_bound, ratio_corpus_report, DEllipsoid, LogDensity, RatioReport, Result, SParam, SolverOptions};
use nalgebra::{DMatrix, DVector};

pub fn run_example() -> Result<RatioReport> {
    let square: Vec<DVector<f64>> = [[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]]
        .iter()
        .map(|p| DVector::from_column_slice(p))
        .collect();
    let tri: Vec<DVector<f64>> = [[1.0, 0.0], [-0.5, 0.9], [-0.5, -0.9]]
        .iter()
        .map(|p| DVector::from_column_slice(p))
        .collect();
    let corpus = vec![
        LogDensity::gaussian(DEllipsoid::unit(1)),
        LogDensity::gauge_power(vec![DVector::from_element(1, 1.0), DVector::from_element(1, -2.0)], 1.0, 1.0)?,
        LogDensity::gauge_power(square, 1.0, 1.0)?,
        LogDensity::gauge_power(tri, 1.0, 1.0)?,
        LogDensity::gaussian(DEllipsoid::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]), 1.0, DVector::zeros(2))?),
    ];
    let report = ratio_corpus_report(&corpus, &[SParam::Finite(0.0), SParam::Finite(1.0)], &SolverOptions::default());
    print!("{}", report.to_csv());
    println!("bounds: d=1 {:.5}, d=2 {:.5}; violations {}", ratio_bound(1), ratio_bound(2), report.violations);
    Ok(report)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
