//! Volterra integral equations on time scales.
//!
//! A time scale is a closed subset of the reals; here it is a finite ordered
//! union of closed intervals and isolated points, so the same code handles
//! continuous, discrete and mixed domains. The crate solves
//!
//! ```text
//! x(t) = f(t) + integral_a^t k(t, s) x(s) Delta s
//! ```
//!
//! by successive approximation or by forward marching, and certifies
//! approximate solutions against Hyers-Ulam and Hyers-Ulam-Rassias bounds.
//!
//! ```
//! use tsvolterra::{march_solve, TimeScale, VolterraProblem};
//!
//! let ts = TimeScale::integers(0, 5).unwrap();
//! let p = VolterraProblem::from_strs(ts, 1.0, "1", "5").unwrap();
//! let x = march_solve(&p).unwrap().phi;
//! assert_eq!(x.values(), &[1.0, 6.0, 36.0, 216.0, 1296.0, 7776.0]);
//! ```

pub mod calculus;
pub mod error;
pub mod expr;
pub mod io;
pub mod problem;
pub mod stability;
pub mod timescale;
pub mod volterra;

pub use calculus::{
    bernoulli_gap, cumulative_integral, delta_integral, exp_identity_residual, ts_exp,
    GridFunction,
};
pub use error::{Error, Result};
pub use expr::{Expr, ExprError};
pub use problem::{FunctionSource, ProblemSpec};
pub use stability::{
    certify_hyers_ulam, certify_rassias, check_rassias_condition, defect, instability_probe,
    pair_difference_check, rassias_horizon_sweep, GrowthRecord, Mode, PairCheck,
    StabilityCertificate, Verdict,
};
pub use timescale::{Component, Grid, Link, PointClass, TimeScale, TimeScaleError, TOL_MEMBER};
pub use volterra::{
    march_solve, picard_solve, step_extend, IterationReport, Method, PicardOptions, Solution,
    VolterraProblem,
};
