//! Solver options and the solve report.

use serde::{Deserialize, Serialize};

use crate::ellipsoid::DEllipsoid;
use crate::error::{Error, Result};
use crate::profile::AdmissibleProfile;

/// How the first batch of constraint points is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum InitialPoints {
    /// The mode plus extremes of a few level sets along fixed directions.
    #[default]
    LevelsetExtremes,
    /// A low-discrepancy (Halton) sample of a level-set box.
    SobolBox { count: usize },
    /// Caller-supplied points.
    User { points: Vec<Vec<f64>> },
}

/// Safety bounds on the master problem. `None` means derived from f.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ParameterBox {
    /// Upper bound on log α − log ‖f‖.
    pub log_height_excess: Option<f64>,
    /// Upper bound on the trace of A.
    pub trace: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Tolerance on sup (log f − log ℓ).
    pub feasibility_tol: f64,
    pub objective_tol: f64,
    pub max_outer_iterations: usize,
    pub initial_points: InitialPoints,
    #[serde(rename = "box")]
    pub bounds: ParameterBox,
    pub seed: u64,
    /// Number of search directions for the violation oracle (0 picks by dimension).
    pub budget: usize,
    /// An optional starting ellipsoid, e.g. from a neighbouring problem.
    #[serde(skip)]
    pub warm_start: Option<DEllipsoid>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-8,
            objective_tol: 1e-9,
            max_outer_iterations: 200,
            initial_points: InitialPoints::default(),
            bounds: ParameterBox::default(),
            seed: 0,
            budget: 0,
            warm_start: None,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.feasibility_tol > 0.0 && self.objective_tol > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        if self.max_outer_iterations == 0 {
            return Err(Error::InvalidInput("max_outer_iterations must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn directions(&self, d: usize) -> usize {
        if self.budget > 0 {
            return self.budget;
        }
        match d {
            1 => 2,
            2 => 720,
            _ => 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: f64,
    pub max_violation: f64,
    pub points: usize,
    pub newton_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub optimum: DEllipsoid,
    /// log α − log det A.
    pub objective: f64,
    pub integral: f64,
    pub v_psi: f64,
    /// sup over the searched points of log f − log ℓ, after certification.
    pub max_violation: f64,
    /// How much log α was raised after the last master solve.
    pub certification_shift: f64,
    pub iterations: usize,
    pub converged: bool,
    pub active_points: Vec<Vec<f64>>,
    pub profile: AdmissibleProfile,
    pub history: Vec<IterationRecord>,
}

impl SolveReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
