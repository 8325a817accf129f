// The ψ_s family: values at t = 1, and the monotonicity of s ↦ ψ_s(√s·t).

use lownerlab::{psi_s_eval, scaled_monotonicity_check, Result, SParam};

/// Returns ψ_s(1) for s = 0, 1, 10, 100, ∞.
pub fn run_example() -> Result<Vec<(SParam, f64)>> {
    let grid = [
        SParam::Finite(0.0),
        SParam::Finite(1.0),
        SParam::Finite(10.0),
        SParam::Finite(100.0),
        SParam::Infinite,
    ];
    let mut rows = Vec::new();
    for s in grid {
        let v = psi_s_eval(s, 1.0)?;
        println!("psi_{s}(1) = {v:.10}");
        rows.push((s, v));
    }
    let ok = scaled_monotonicity_check(2.0, &[1.0, 2.0, 4.0, 8.0, 16.0, 1e3]);
    println!("psi_s(2·sqrt(s)) nondecreasing in s: {ok}");
    Ok(rows)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
