//! Löwner and John s-functions of log-concave functions.
//!
//! The examples directory is the best entry point; each file covers one
//! capability and is also compiled into the test suite.
//!
//! ```text
//! examples/
//! ├── psi_profiles.rs           # the ψ_s family and its scaling monotonicity
//! ├── vpsi_table.rs             # V_Ψ(ψ_s, d): quadrature vs closed forms
//! ├── polar_duality.rs          # height functions and their polars
//! ├── interpolation_sausage.rs  # interpolation and the two sausages
//! ├── lowner_min_of_two.rs      # a Löwner 0-function against a grid oracle
//! ├── chimera.rs                # non-uniqueness for a flat-bottom profile
//! ├── john_function.rs          # the John s-function
//! ├── even_duality.rs           # John/Löwner polarity for even f
//! ├── mvee_square.rs            # MVEE, John decomposition, gauge Gaussians
//! ├── s_curve_limits.rs         # s-curves, s → 0 and s → ∞
//! └── outer_ratio.rs            # outer integral ratios and their bounds
//! ```
//!
//! ```bash
//! cargo run --release --example lowner_min_of_two
//! ```

pub mod barrier;
pub mod cli;
pub mod density;
pub mod ellipsoid;
pub mod error;
pub mod integrals;
pub mod interpolation;
pub mod john;
pub mod legendre;
pub mod limits;
pub mod lowner;
pub mod mvee;
pub mod optimize;
pub mod oracle;
pub mod polytope;
pub mod profile;
pub mod psi;
pub mod quadrature;
pub mod ratio;
pub mod report;

pub use ellipsoid::{ellipsoidal_eval, ellipsoidal_integral, DEllipsoid};
pub use density::{DensityKind, LogDensity};
pub use error::{Error, Result};
pub use profile::AdmissibleProfile;
pub use psi::{profile_of, psi_s_eval, scaled_monotonicity_check, PsiS, SParam};
pub use quadrature::QuadratureSpec;
pub use lowner::{chimera_demo, height_bound_check, solve_lowner, solve_lowner_s};
pub use oracle::{is_below, Certificate, CertificateStatus};
pub use report::{InitialPoints, SolveReport, SolverOptions};
pub use integrals::{h_volume, v_psi, v_psi_s_closed};
pub use interpolation::{interpolate, sausage_bounded, sausage_increasing, Sausage};
pub use john::{even_duality_check, solve_john_s, DualityResiduals};
pub use limits::{band_checks, comparison_band, gaussian_limit, s_curve, zero_limit_check, GaussianLimit, SCurve};
pub use mvee::{john_decomposition, lowner_infty_of_gauge, mvee_centered, JohnDecomposition};
pub use polytope::Polytope;
pub use ratio::{outer_integral_ratio, ratio_bound, ratio_corpus_report, RatioReport};
