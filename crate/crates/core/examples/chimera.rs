// A flat-bottom profile for which the Löwner-type solution is not unique:
// two solver runs reach the same objective at centers τ apart.

use lownerlab::{chimera_demo, Result};

/// (objective gap, center separation) for τ = 1 in the plane.
pub fn run_example() -> Result<(f64, f64)> {
    let tau = 1.0;
    let (r1, r2) = chimera_demo(tau, 2)?;
    let gap = (r1.objective - r2.objective).abs();
    let sep = (&r1.optimum.center - &r2.optimum.center).norm();
    println!("objectives {:.12} and {:.12}", r1.objective, r2.objective);
    println!("centers {:?} and {:?}", r1.optimum.center.as_slice(), r2.optimum.center.as_slice());
    println!("objective gap {gap:.2e}, center separation {sep:.4} (tau = {tau})");
    Ok((gap, sep))
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
