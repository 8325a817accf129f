//! The `lownerlab` command line.

use std::fmt::Write as _;
use std::io::Read as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use serde_json::json;

use crate::density::LogDensity;
use crate::ellipsoid::{ellipsoidal_eval, DEllipsoid};
use crate::error::{Error, Result};
use crate::integrals::{unit_ball_volume, v_psi, v_psi_s_closed};
use crate::interpolation::{domination_gap, grid_points, sausage_increasing};
use crate::john::{even_duality_check, solve_john_s};
use crate::legendre::h_eval;
use crate::limits::{band_checks, gaussian_limit, s_curve, zero_limit_check};
use crate::lowner::solve_lowner_s;
use crate::mvee::{john_decomposition, mvee_with_design};
use crate::profile::AdmissibleProfile;
use crate::psi::SParam;
use crate::quadrature::QuadratureSpec;
use crate::ratio::{ratio_bound, ratio_corpus_report};
use crate::report::SolverOptions;

#[derive(Debug, Parser)]
#[command(name = "lownerlab", version, about = "Löwner and John s-functions of log-concave functions")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Seed for randomized starts
    #[arg(long, global = true, env = "LOWNERLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Feasibility tolerance on sup(log f − log ℓ)
    #[arg(long, global = true, env = "LOWNERLAB_TOL_FEAS", default_value_t = 1e-8)]
    pub tol_feas: f64,
    #[arg(long, global = true, env = "LOWNERLAB_TOL_OBJ", default_value_t = 1e-9)]
    pub tol_obj: f64,
    /// Search directions for the violation oracle (0 picks by dimension)
    #[arg(long, global = true, env = "LOWNERLAB_BUDGET", default_value_t = 0)]
    pub budget: usize,
    /// Worker threads for corpus commands
    #[arg(long, global = true, env = "LOWNERLAB_JOBS", default_value_t = 1)]
    pub jobs: usize,
    /// Write the main output here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Target {
    /// the input function
    F,
    /// its Löwner s-function
    Lowner,
    /// its John s-function
    John,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate f, 𝐋^s f or 𝐉^s f on a grid (CSV)
    Eval {
        #[arg(long)]
        f: PathBuf,
        #[arg(long, default_value = "0")]
        s: SParam,
        #[arg(long, value_enum, default_value = "f")]
        what: Target,
        #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
        hi: f64,
        /// Points per axis
        #[arg(long, default_value_t = 61)]
        n: usize,
    },
    /// V_Ψ(ψ_s, d) by quadrature and in closed form (CSV)
    Vpsi {
        /// Comma-separated s values; `inf` for the Gaussian end
        #[arg(long, value_delimiter = ',', default_value = "0")]
        s: Vec<SParam>,
        /// Dimensions, as `1..4` or `1,2,3`
        #[arg(long, default_value = "1..4")]
        d: String,
    },
    /// Solve for the Löwner s-function (SolveReport JSON)
    Lowner {
        #[arg(long)]
        f: PathBuf,
        #[arg(long, default_value = "0")]
        s: SParam,
    },
    /// Solve for the John s-function (SolveReport JSON)
    John {
        #[arg(long)]
        f: PathBuf,
        #[arg(long, default_value = "0")]
        s: SParam,
    },
    /// Polarity residuals between Löwner and John solutions of an even f
    Duality {
        #[arg(long)]
        f: PathBuf,
        #[arg(long, default_value = "0")]
        s: SParam,
        #[arg(long, default_value_t = 4.0)]
        radius: f64,
        #[arg(long, default_value_t = 41)]
        n: usize,
    },
    /// Centered MVEE of a point set and its John decomposition
    Mvee {
        /// JSON array of points
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Löwner s-curve (CSV) with band, zero-limit and Gaussian-limit summaries
    Limits {
        #[arg(long)]
        f: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,10,100,1000")]
        s: Vec<SParam>,
        /// Also compare against s = 0 at this small s
        #[arg(long)]
        zero: Option<f64>,
        /// Also solve at s = ∞
        #[arg(long)]
        gaussian: bool,
        /// Where to write the JSON summary (default stderr)
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Outer integral ratios over a corpus
    Ratio {
        /// JSON array of LogDensity
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        s: Vec<SParam>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Run the built-in property checks
    Selftest,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Exit status for a library error: 1 infeasible, 2 bad input, 3 numerical.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Infeasible { .. } => 1,
        Error::InvalidInput(_) | Error::DimensionMismatch { .. } | Error::Schema(_) => 2,
        _ => 3,
    }
}

/// Parses the arguments, runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            let code = exit_code(&e);
            let diag = match &e {
                Error::Infeasible { reason, witness } => {
                    json!({"status": "infeasible", "reason": reason, "witness": witness})
                }
                other => json!({"status": "error", "message": other.to_string()}),
            };
            if code == 1 {
                println!("{diag}");
            } else {
                eprintln!("{diag}");
            }
            code
        }
    }
}

fn options(g: &Global) -> SolverOptions {
    SolverOptions {
        feasibility_tol: g.tol_feas,
        objective_tol: g.tol_obj,
        seed: g.seed,
        budget: g.budget,
        ..SolverOptions::default()
    }
}

fn read_text(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Error::InvalidInput(format!("stdin: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn read_density(path: &Path) -> Result<LogDensity> {
    LogDensity::from_json(&read_text(path)?)
}

fn emit(g: &Global, text: &str) -> Result<()> {
    match &g.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::InvalidInput(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write as _;
            let mut out = std::io::stdout().lock();
            let nl = if text.ends_with('\n') { "" } else { "\n" };
            // a closed pipe (e.g. `| head`) is not an error
            match write!(out, "{text}{nl}").and_then(|_| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Numerical(format!("stdout: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

fn parse_dims(spec: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidInput(format!("cannot parse dimensions `{spec}`"));
    let dims: Vec<usize> = if let Some((a, b)) = spec.split_once("..") {
        let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        (a..=b).collect()
    } else {
        spec.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
    };
    if dims.is_empty() || dims.contains(&0) {
        return Err(bad());
    }
    Ok(dims)
}

fn axis_grid(d: usize, lo: f64, hi: f64, n: usize) -> Result<Vec<DVector<f64>>> {
    if !(hi > lo) || n < 2 {
        return Err(Error::InvalidInput("grid needs lo < hi and n ≥ 2".into()));
    }
    Ok(grid_points(d, lo, hi, n.pow(d as u32)))
}

fn execute(cli: &Cli) -> Result<i32> {
    let g = &cli.global;
    let opts = options(g);
    match &cli.command {
        Command::Eval { f, s, what, lo, hi, n } => {
            let f = read_density(f)?;
            let d = f.dim;
            let eval: Box<dyn Fn(&DVector<f64>) -> f64> = match what {
                Target::F => Box::new(|x| f.eval(x)),
                Target::Lowner => {
                    let r = solve_lowner_s(&f, *s, &opts)?;
                    let p = AdmissibleProfile::psi(*s);
                    Box::new(move |x| ellipsoidal_eval(&p, &r.optimum, x))
                }
                Target::John => {
                    let r = solve_john_s(&f, *s, &opts)?;
                    let s = *s;
                    Box::new(move |x| h_eval(s, &r.optimum, x))
                }
            };
            let mut out = String::new();
            for i in 1..=d {
                write!(out, "x_{i},").unwrap();
            }
            out.push_str("value\n");
            for x in axis_grid(d, *lo, *hi, *n)? {
                for v in x.iter() {
                    write!(out, "{v},").unwrap();
                }
                writeln!(out, "{}", eval(&x)).unwrap();
            }
            emit(g, &out)?;
        }
        Command::Vpsi { s, d } => {
            let spec = QuadratureSpec::new(1e-14, 1e-11, 4000)?;
            let mut out = String::from("s,d,quadrature,closed_form\n");
            for &dim in &parse_dims(d)? {
                for &sv in s {
                    let quad = v_psi(&AdmissibleProfile::psi(sv), dim, &spec)?;
                    let closed = match sv {
                        SParam::Infinite => std::f64::consts::PI.powf(0.5 * dim as f64),
                        SParam::Finite(x) if x == 0.0 => {
                            (1..=dim).map(|k| k as f64).product::<f64>() * unit_ball_volume(dim)
                        }
                        SParam::Finite(x) => v_psi_s_closed(x, dim)?,
                    };
                    writeln!(out, "{sv},{dim},{quad},{closed}").unwrap();
                }
            }
            emit(g, &out)?;
        }
        Command::Lowner { f, s } => {
            let r = solve_lowner_s(&read_density(f)?, *s, &opts)?;
            emit(g, &r.to_json())?;
        }
        Command::John { f, s } => {
            let r = solve_john_s(&read_density(f)?, *s, &opts)?;
            emit(g, &r.to_json())?;
        }
        Command::Duality { f, s, radius, n } => {
            let f = read_density(f)?;
            let grid = axis_grid(f.dim, -radius, *radius, *n)?;
            let r = even_duality_check(&f, *s, &grid, &opts)?;
            emit(g, &serde_json::to_string_pretty(&r).expect("serializes"))?;
        }
        Command::Mvee { points, tol } => {
            let raw: Vec<Vec<f64>> = serde_json::from_str(&read_text(points)?)?;
            let pts: Vec<DVector<f64>> = raw.into_iter().map(DVector::from_vec).collect();
            let m = mvee_with_design(&pts, tol.min(1e-11))?;
            let j = john_decomposition(&pts, &m.matrix, 1e-7)?;
            let rows = |a: &DMatrix<f64>| -> Vec<Vec<f64>> {
                (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect()
            };
            let out = json!({
                "M": rows(&m.matrix),
                "gap": m.gap,
                "iterations": m.iterations,
                "contacts": j.vectors.iter().map(|v| v.as_slice().to_vec()).collect::<Vec<_>>(),
                "weights": j.weights,
                "frobenius_residual": j.frobenius_residual,
                "trace_residual": j.trace_residual,
            });
            emit(g, &serde_json::to_string_pretty(&out).expect("serializes"))?;
        }
        Command::Limits {
            f,
            s,
            zero,
            gaussian,
            summary,
        } => {
            let f = read_density(f)?;
            let grid: Vec<f64> = s.iter().map(SParam::as_f64).collect();
            let mut curve = s_curve(&f, &grid, &opts)?;
            let bands = band_checks(&curve, 1e-6)?;
            let mut doc = json!({
                "errors": curve.errors,
                "band_checks": bands,
                "band_violations": bands.iter().filter(|b| !b.holds).count(),
            });
            if let Some(z) = zero {
                doc["zero_limit"] = serde_json::to_value(zero_limit_check(&f, *z, &opts)?).expect("serializes");
            }
            if *gaussian {
                match gaussian_limit(&f, Some(&curve), &opts) {
                    Ok(gl) => {
                        curve.limit_gaussian = Some(gl.optimum.optimum.clone());
                        doc["gaussian_limit"] = serde_json::to_value(&gl).expect("serializes");
                    }
                    Err(Error::Infeasible { reason, witness }) => {
                        doc["gaussian_limit"] = json!({"status": "infeasible", "reason": reason, "witness": witness});
                    }
                    Err(e) => return Err(e),
                }
            }
            emit(g, &curve.to_csv())?;
            let text = serde_json::to_string_pretty(&doc).expect("serializes");
            match summary {
                Some(p) => std::fs::write(p, text).map_err(|e| Error::InvalidInput(format!("{}: {e}", p.display())))?,
                None => eprintln!("{text}"),
            }
        }
        Command::Ratio { corpus, s, format } => {
            let items: Vec<LogDensity> = serde_json::from_str(&read_text(corpus)?)?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(g.jobs.max(1))
                .build()
                .map_err(|e| Error::Numerical(e.to_string()))?;
            let report = pool.install(|| ratio_corpus_report(&items, s, &opts));
            let text = match format {
                Format::Csv => report.to_csv(),
                Format::Json => report.to_json(),
            };
            emit(g, &text)?;
            if report.violations > 0 {
                return Ok(3);
            }
        }
        Command::Selftest => {
            let results = selftest(&opts);
            let mut out = String::new();
            for (name, ok, detail) in &results {
                writeln!(out, "{} {name}: {detail}", if *ok { "PASS" } else { "FAIL" }).unwrap();
            }
            emit(g, &out)?;
            return Ok(if results.iter().all(|r| r.1) { 0 } else { 3 });
        }
    }
    Ok(0)
}

type Check = (&'static str, bool, String);

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match f() {
        Ok((ok, detail)) => (name, ok, detail),
        Err(e) => (name, false, e.to_string()),
    }
}

/// A fast subset of the property suite, one line per check.
pub fn selftest(opts: &SolverOptions) -> Vec<Check> {
    let spec = QuadratureSpec::default();
    let e = std::f64::consts::E;
    vec![
        check("vpsi at s = 0", || {
            let mut worst: f64 = 0.0;
            for d in 1..=4 {
                let exact = (1..=d).map(|k| k as f64).product::<f64>() * unit_ball_volume(d);
                let q = v_psi(&AdmissibleProfile::psi(SParam::Finite(0.0)), d, &spec)?;
                worst = worst.max((q / exact - 1.0).abs());
            }
            Ok((worst <= 1e-6, format!("max rel err {worst:.2e}")))
        }),
        check("vpsi closed form", || {
            let mut worst: f64 = 0.0;
            for d in 1..=3 {
                for s in [0.5, 1.0, 2.0, 8.0] {
                    let q = v_psi(&AdmissibleProfile::psi(SParam::Finite(s)), d, &spec)?;
                    worst = worst.max((v_psi_s_closed(s, d)? / q - 1.0).abs());
                }
            }
            Ok((worst <= 1e-5, format!("max rel err {worst:.2e}")))
        }),
        check("ratio bound d = 1", || {
            let err = (ratio_bound(1) - 2.0 * e).abs();
            Ok((err < 1e-12, format!("{}", ratio_bound(1))))
        }),
        check("mvee of the square", || {
            let pts: Vec<DVector<f64>> = [[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]]
                .iter()
                .map(|p| DVector::from_column_slice(p))
                .collect();
            let m = mvee_with_design(&pts, 1e-11)?;
            let err = (&m.matrix - DMatrix::identity(2, 2) * 0.5).amax();
            let j = john_decomposition(&pts, &m.matrix, 1e-7)?;
            Ok((err <= 1e-8 && j.holds(1e-6), format!("|M − Id/2| = {err:.2e}")))
        }),
        check("in-class recovery", || {
            let truth = DEllipsoid::new(DMatrix::from_element(1, 1, 1.7), 0.6, DVector::from_element(1, 0.4))?;
            let f = LogDensity::ellipsoidal(SParam::Finite(1.0), truth.clone());
            let r = solve_lowner_s(&f, SParam::Finite(1.0), opts)?;
            let dist = r.optimum.relative_distance(&truth);
            Ok((dist <= 1e-4, format!("distance {dist:.2e}")))
        }),
        check("min-of-two integral", || {
            let part = |c: f64| LogDensity::ellipsoidal(SParam::Finite(0.0), DEllipsoid {
                matrix: DMatrix::identity(1, 1),
                height: 1.0,
                center: DVector::from_element(1, c),
            });
            let f = LogDensity::min_of(vec![part(1.0), part(-1.0)])?;
            let r = solve_lowner_s(&f, SParam::Finite(0.0), opts)?;
            let err = (r.integral - 2.0 / e).abs();
            Ok((err <= 1e-3, format!("integral {:.6}", r.integral)))
        }),
        check("gaussian duality", || {
            let f = LogDensity::gaussian(DEllipsoid::new(DMatrix::from_element(1, 1, 0.8), 1.0, DVector::zeros(1))?);
            let grid = grid_points(1, -4.0, 4.0, 41);
            let r = even_duality_check(&f, SParam::Infinite, &grid, opts)?;
            let worst = r.john_side.max(r.lowner_side);
            Ok((worst <= 1e-5, format!("residual {worst:.2e}")))
        }),
        check("sausage domination", || {
            let p = AdmissibleProfile::psi(SParam::Finite(1.0));
            let m = DMatrix::identity(1, 1);
            let (a1, a2) = (DVector::from_element(1, 0.5), DVector::from_element(1, -0.5));
            let out = sausage_increasing(&p, &m, 1.0, &a1, &a2, 0)?;
            let e1 = DEllipsoid::new(m.clone(), 1.0, a1)?;
            let e2 = DEllipsoid::new(m, 1.0, a2)?;
            let gap = domination_gap(&p, &e1, &e2, &out.ellipsoid, &grid_points(1, -20.0, 20.0, 10_000));
            Ok((gap <= 1e-12 && out.integral_factor < 1.0, format!("gap {gap:.2e}, factor {:.4}", out.integral_factor)))
        }),
    ]
}
