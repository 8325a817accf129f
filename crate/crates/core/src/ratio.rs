//! Outer s-integral ratios and their dimensional bounds.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::density::LogDensity;
use crate::error::{Error, Result};
use crate::integrals::v_psi;
use crate::lowner::solve_lowner_s;
use crate::profile::AdmissibleProfile;
use crate::psi::SParam;
use crate::quadrature::QuadratureSpec;
use crate::report::SolverOptions;

/// (∫𝐋^s f / ∫f)^{1/d}.
pub fn outer_integral_ratio(f: &LogDensity, s: SParam, opts: &SolverOptions) -> Result<f64> {
    let report = solve_lowner_s(f, s, opts)?;
    let spec = QuadratureSpec::new(1e-13, 1e-10, 4000)?;
    let mass = f.integral(&spec)?;
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::Numerical(format!("∫f = {mass}")));
    }
    Ok((report.integral / mass).powf(1.0 / f.dim as f64))
}

/// e√π(d!/Γ(1+d/2))^{1/d}, the bound on the s = 0 ratio.
pub fn ratio_bound(d: usize) -> f64 {
    assert!(d >= 1, "dimension must be positive");
    let df = d as f64;
    let log_quot = ln_gamma(df + 1.0) - ln_gamma(1.0 + 0.5 * df);
    std::f64::consts::E * std::f64::consts::PI.sqrt() * (log_quot / df).exp()
}

/// A bound on the s-ratio obtained by comparing the s-solution with the
/// 0-solution: ovr_s ≤ ratio_bound(d)·(V_s/V_0)^{1/d}.
pub fn ratio_bound_s(s: SParam, d: usize) -> Result<f64> {
    if s.is_zero() {
        return Ok(ratio_bound(d));
    }
    if matches!(s, SParam::Infinite) {
        return Err(Error::InvalidInput("no comparison bound at s = ∞".into()));
    }
    let spec = QuadratureSpec::default();
    let v0 = v_psi(&AdmissibleProfile::psi(SParam::Finite(0.0)), d, &spec)?;
    let vs = v_psi(&AdmissibleProfile::psi(s), d, &spec)?;
    Ok(ratio_bound(d) * (vs / v0).powf(1.0 / d as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioRow {
    pub index: usize,
    pub dim: usize,
    pub s: f64,
    pub ratio: Option<f64>,
    pub bound: Option<f64>,
    pub error: Option<String>,
}

impl RatioRow {
    /// `None` when either the ratio or the bound is missing.
    pub fn within_bound(&self) -> Option<bool> {
        Some(self.ratio? <= self.bound?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub rows: Vec<RatioRow>,
    /// Largest observed ratio per (d, s).
    pub max_ratio: Vec<(usize, f64, f64)>,
    /// Rows that exceed their bound.
    pub violations: usize,
    /// Rows whose computation failed.
    pub failures: usize,
}

impl RatioReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,d,s,ratio,bound,error\n");
        for r in &self.rows {
            let num = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
            let err = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
            writeln!(out, "{},{},{},{},{},{}", r.index, r.dim, r.s, num(r.ratio), num(r.bound), err).unwrap();
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// ovr_s for every (instance, s) pair. Items run in parallel on the current
/// rayon pool; each item is deterministic, so the table does not depend on
/// the number of threads.
pub fn ratio_corpus_report(corpus: &[LogDensity], s_list: &[SParam], opts: &SolverOptions) -> RatioReport {
    let jobs: Vec<(usize, SParam)> = (0..corpus.len())
        .flat_map(|i| s_list.iter().map(move |&s| (i, s)))
        .collect();
    let rows: Vec<RatioRow> = jobs
        .par_iter()
        .map(|&(i, s)| {
            let f = &corpus[i];
            let bound = ratio_bound_s(s, f.dim).ok();
            let (ratio, error) = match outer_integral_ratio(f, s, opts) {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            RatioRow {
                index: i,
                dim: f.dim,
                s: s.as_f64(),
                ratio,
                bound,
                error,
            }
        })
        .collect();
    let mut max: BTreeMap<(usize, u64), f64> = BTreeMap::new();
    for r in &rows {
        if let Some(v) = r.ratio {
            let e = max.entry((r.dim, r.s.to_bits())).or_insert(f64::NEG_INFINITY);
            *e = e.max(v);
        }
    }
    let mut max_ratio: Vec<(usize, f64, f64)> =
        max.into_iter().map(|((d, s), v)| (d, f64::from_bits(s), v)).collect();
    max_ratio.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    RatioReport {
        violations: rows.iter().filter(|r| r.within_bound() == Some(false)).count(),
        failures: rows.iter().filter(|r| r.ratio.is_none()).count(),
        rows,
        max_ratio,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_values() {
        assert!((ratio_bound(1) - 2.0 * std::f64::consts::E).abs() < 1e-12);
        assert!((ratio_bound(2) - std::f64::consts::E * (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn bound_grows_like_root_d() {
        for d in 1..=20 {
            let r = ratio_bound(d) / (d as f64).sqrt();
            assert!((1.0..=10.0).contains(&r), "d = {d}: {r}");
        }
    }

    #[test]
    fn s_bound_reduces_to_zero_bound() {
        assert_eq!(ratio_bound_s(SParam::Finite(0.0), 3).unwrap(), ratio_bound(3));
        assert!(ratio_bound_s(SParam::Finite(1.0), 2).unwrap() > 0.0);
    }
}
