// V_Ψ(ψ_s, d) by radial quadrature next to its closed forms.

use lownerlab::integrals::{unit_ball_volume, v_psi, v_psi_s_closed};
use lownerlab::{profile_of, QuadratureSpec, Result, SParam};

/// Largest relative gap between quadrature and closed form over the table.
pub fn run_example() -> Result<f64> {
    let spec = QuadratureSpec::default();
    let mut worst: f64 = 0.0;
    println!("{:>6} {:>2} {:>22} {:>22}", "s", "d", "quadrature", "closed form");
    for d in 1..=3 {
        for s in [0.0, 0.5, 1.0, 2.0, 8.0, f64::INFINITY] {
            let sp = SParam::new(s)?;
            let q = v_psi(&profile_of(sp), d, &spec)?;
            let closed = if s == 0.0 {
                (1..=d).product::<usize>() as f64 * unit_ball_volume(d)
            } else if s.is_infinite() {
                std::f64::consts::PI.powf(0.5 * d as f64)
            } else {
                v_psi_s_closed(s, d)?
            };
            worst = worst.max((q / closed - 1.0).abs());
            println!("{s:>6} {d:>2} {q:>22.15} {closed:>22.15}");
        }
    }
    println!("max relative gap {worst:.2e}");
    Ok(worst)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
