//! The problem file read by the command-line tool.
//!
//! ```json
//! {"timescale":{"components":[{"type":"interval","lo":0,"hi":1}]},
//!  "f":"1", "kernel":"5",
//!  "grid":{"h_max":0.001}, "solver":{"tol":1e-10,"max_iter":100}}
//! ```
//!
//! `omega` and `psi` are optional; each is either an expression in `t` or the
//! path of a `t,value` CSV file (relative paths resolve against the problem
//! file's directory).

use std::fs::File;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::GridFunction;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::io::read_grid_function;
use crate::timescale::{Grid, TimeScale};
use crate::volterra::{default_max_iter, PicardOptions, VolterraProblem, DEFAULT_TOL};

pub const DEFAULT_H_MAX: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub h_max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            h_max: DEFAULT_H_MAX,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub timescale: TimeScale,
    pub f: String,
    pub kernel: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<String>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub solver: SolverSpec,
}

/// A source for a sampled function: an expression or a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSource {
    Expr(Expr),
    Csv(PathBuf),
}

impl FunctionSource {
    /// Treats `text` as a CSV path when it ends in `.csv` or names an existing
    /// file, otherwise parses it as an expression.
    pub fn parse(text: &str, base_dir: &Path) -> Result<FunctionSource> {
        let trimmed = text.trim();
        let candidate = base_dir.join(trimmed);
        if trimmed.to_ascii_lowercase().ends_with(".csv") || candidate.is_file() {
            return Ok(FunctionSource::Csv(candidate));
        }
        let expr = Expr::parse(trimmed)?;
        if expr.uses_s() {
            return Err(Error::Invalid(format!("`{trimmed}` must depend on t only")));
        }
        Ok(FunctionSource::Expr(expr))
    }

    pub fn sample(&self, grid: Arc<Grid>) -> Result<GridFunction> {
        match self {
            FunctionSource::Expr(e) => GridFunction::from_expr(grid, e),
            FunctionSource::Csv(path) => {
                let file = File::open(path).map_err(|e| {
                    Error::Invalid(format!("cannot open {}: {e}", path.display()))
                })?;
                read_grid_function(file, grid)
            }
        }
    }
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<ProblemSpec> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<ProblemSpec> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn build(&self) -> Result<VolterraProblem> {
        if let Some(tol) = self.solver.tol {
            if tol.is_nan() || tol <= 0.0 {
                return Err(Error::Invalid(format!("solver.tol must be positive, got {tol}")));
            }
        }
        if self.solver.max_iter == Some(0) {
            return Err(Error::Invalid("solver.max_iter must be positive".into()));
        }
        VolterraProblem::from_strs(
            self.timescale.clone(),
            self.grid.h_max,
            &self.f,
            &self.kernel,
        )
    }

    pub fn picard_options(&self, p: &VolterraProblem) -> PicardOptions {
        PicardOptions {
            tol: self.solver.tol.unwrap_or(DEFAULT_TOL),
            max_iter: self.solver.max_iter.unwrap_or_else(|| default_max_iter(p)),
        }
    }
}
