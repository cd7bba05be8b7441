//! Linear Volterra integral equations of the second kind on a time scale,
//!
//! ```text
//! x(t) = f(t) + integral_a^t k(t, s) x(s) Delta s,   t in [a, b]_T
//! ```
//!
//! solved either by successive approximation or by forward marching.

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::GridFunction;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::timescale::{Grid, Link, TimeScale};

/// Below this magnitude `1 - (h/2) k(t, t)` is treated as singular.
const SINGULAR_DIAGONAL: f64 = 1e-12;

/// Default stopping tolerance for successive approximation.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Kernel values `k(t_i, t_j)` for `j <= i`, stored row by row.
#[derive(Debug, Clone)]
struct KernelTable {
    values: Vec<f64>,
}

impl KernelTable {
    fn build(grid: &Grid, k: &Expr) -> Result<Self> {
        let p = grid.points();
        let rows = (0..p.len())
            .into_par_iter()
            .map(|i| {
                (0..=i)
                    .map(|j| k.eval(p[i], Some(p[j])).map_err(Error::from))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(KernelTable {
            values: rows.concat(),
        })
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        let start = i * (i + 1) / 2;
        &self.values[start..start + i + 1]
    }

    fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Quadrature weights of `integral_a^{t_i} g Delta s = sum_j w_ij g_j`:
/// `w_ij = full[j]` for `j < i` and `w_ii = diagonal[i]`.
#[derive(Debug, Clone)]
struct Weights {
    full: Vec<f64>,
    diagonal: Vec<f64>,
}

impl Weights {
    fn new(grid: &Grid) -> Self {
        let n = grid.len();
        let full = (0..n)
            .map(|j| grid.left_weight(j) + grid.right_weight(j))
            .collect();
        let diagonal = (0..n).map(|j| grid.right_weight(j)).collect();
        Weights { full, diagonal }
    }
}

/// An instance of the equation sampled on a grid. The kernel bound `M` is the
/// largest `|k(t_i, t_j)|` over grid pairs `t_j <= t_i`.
#[derive(Debug)]
pub struct VolterraProblem {
    ts: TimeScale,
    grid: Arc<Grid>,
    h_max: f64,
    f: Expr,
    k: Expr,
    f_values: Vec<f64>,
    kernel: KernelTable,
    weights: Weights,
    m: f64,
    allowance: OnceLock<f64>,
}

impl VolterraProblem {
    pub fn new(ts: TimeScale, h_max: f64, f: Expr, k: Expr) -> Result<Self> {
        if f.uses_s() {
            return Err(Error::Invalid("f(t) must not reference s".into()));
        }
        let grid = Arc::new(ts.build_grid(h_max)?);
        let f_values = grid
            .points()
            .iter()
            .map(|&t| f.eval(t, None))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let kernel = KernelTable::build(&grid, &k)?;
        let m = kernel.max_abs();
        let weights = Weights::new(&grid);
        Ok(VolterraProblem {
            ts,
            grid,
            h_max,
            f,
            k,
            f_values,
            kernel,
            weights,
            m,
            allowance: OnceLock::new(),
        })
    }

    /// Parses `f` and `k` from text.
    pub fn from_strs(ts: TimeScale, h_max: f64, f: &str, k: &str) -> Result<Self> {
        Self::new(ts, h_max, Expr::parse(f)?, Expr::parse(k)?)
    }

    pub fn time_scale(&self) -> &TimeScale {
        &self.ts
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn f(&self) -> &Expr {
        &self.f
    }

    pub fn kernel(&self) -> &Expr {
        &self.k
    }

    pub fn f_values(&self) -> &[f64] {
        &self.f_values
    }

    pub fn a(&self) -> f64 {
        self.grid.start()
    }

    pub fn b(&self) -> f64 {
        self.grid.end()
    }

    /// Kernel bound `M`.
    pub fn m(&self) -> f64 {
        self.m
    }

    /// Same equation restricted to `[a, horizon]`.
    pub fn truncated(&self, horizon: f64) -> Result<VolterraProblem> {
        let ts = self.ts.truncate(horizon)?;
        VolterraProblem::new(ts, self.h_max, self.f.clone(), self.k.clone())
    }

    /// `out_i = integral_a^{t_i} k(t_i, s) x(s) Delta s` on the grid.
    pub fn apply_integral(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.grid.len());
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            let row = self.kernel.row(i);
            let mut acc = 0.0;
            for j in 0..i {
                acc += self.weights.full[j] * row[j] * x[j];
            }
            *o = acc + self.weights.diagonal[i] * row[i] * x[i];
        });
    }

    /// `f + integral k x`, one application of the successive-approximation map.
    pub fn apply_map(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.apply_integral(x, &mut out);
        for (o, fv) in out.iter_mut().zip(&self.f_values) {
            *o += fv;
        }
        out
    }

    /// Pointwise `|x - f - integral k x|`.
    pub fn residuals(&self, x: &[f64]) -> Vec<f64> {
        let mapped = self.apply_map(x);
        x.iter().zip(&mapped).map(|(a, b)| (a - b).abs()).collect()
    }

    pub fn check_grid(&self, g: &GridFunction) -> Result<()> {
        if Arc::ptr_eq(g.grid(), &self.grid) || **g.grid() == *self.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "function has {} points, problem grid has {}",
                g.grid().len(),
                self.grid.len()
            )))
        }
    }

    /// Discretization budget shared by all grid-level checks: ten times the
    /// largest change of the marching solution when every continuous panel is
    /// bisected. Zero on purely discrete scales, where the quadrature is exact.
    pub fn quadrature_allowance(&self) -> Result<f64> {
        if let Some(v) = self.allowance.get() {
            return Ok(*v);
        }
        let value = if self.ts.has_intervals() {
            let coarse = march_values(&self.grid, &self.f_values, |i, j| {
                Ok(self.kernel.row(i)[j])
            })?;
            let (fine_grid, coarse_index) = bisect(&self.grid);
            let fp = fine_grid.points();
            let f_fine = fp
                .iter()
                .map(|&t| self.f.eval(t, None))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let fine = march_values(&fine_grid, &f_fine, |i, j| {
                Ok(self.k.eval(fp[i], Some(fp[j]))?)
            })?;
            10.0 * coarse
                .iter()
                .zip(&coarse_index)
                .fold(0.0, |m: f64, (x, &i)| m.max((x - fine[i]).abs()))
        } else {
            0.0
        };
        let _ = self.allowance.set(value);
        Ok(value)
    }
}

/// Inserts the midpoint of every continuous panel. Returns the refined grid and
/// the position of each original point in it.
fn bisect(grid: &Grid) -> (Grid, Vec<usize>) {
    let p = grid.points();
    let mut index = Vec::with_capacity(p.len());
    let mut points = Vec::with_capacity(2 * p.len());
    let mut links = Vec::with_capacity(2 * p.len());
    for (j, &t) in p.iter().enumerate() {
        index.push(points.len());
        points.push(t);
        match grid.links().get(j) {
            Some(Link::Continuous) => {
                points.push(0.5 * (t + p[j + 1]));
                links.push(Link::Continuous);
                links.push(Link::Continuous);
            }
            Some(Link::Jump) => links.push(Link::Jump),
            None => {}
        }
    }
    (Grid::from_parts(points, links), index)
}

/// Forward marching for `x_i = f_i + sum_{j<i} w_ij k_ij x_j + w_ii k_ii x_i`.
fn march_values(
    grid: &Grid,
    f: &[f64],
    kernel: impl Fn(usize, usize) -> Result<f64>,
) -> Result<Vec<f64>> {
    let weights = Weights::new(grid);
    let p = grid.points();
    let mut x = Vec::with_capacity(p.len());
    x.push(f[0]);
    for i in 1..p.len() {
        let mut acc = 0.0;
        for (j, &xj) in x.iter().enumerate() {
            let w = weights.full[j];
            if w != 0.0 {
                acc += w * kernel(i, j)? * xj;
            }
        }
        let wd = weights.diagonal[i];
        let denom = if wd != 0.0 {
            1.0 - wd * kernel(i, i)?
        } else {
            1.0
        };
        if denom.abs() < SINGULAR_DIAGONAL {
            return Err(Error::SingularDiagonal {
                t: p[i],
                value: denom,
            });
        }
        let xi = (f[i] + acc) / denom;
        if !xi.is_finite() {
            return Err(Error::NonFinite { t: p[i], value: xi });
        }
        x.push(xi);
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Picard,
    Marching,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub phi: GridFunction,
    /// Defect of `phi` measured with the problem's quadrature.
    pub residual: f64,
    pub method: Method,
}

/// Per-iteration record of successive approximation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationReport {
    pub iterations: usize,
    /// Defect of the starting iterate, equal to the first sup gap.
    pub epsilon: f64,
    /// `sup_t |psi_i(t) - psi_{i-1}(t)|` for `i = 1, 2, ...`.
    pub sup_gaps: Vec<f64>,
    /// `epsilon M^{i-1} (b-a)^{i-1} / (i-1)!` for the same `i`.
    pub bound_gaps: Vec<f64>,
    pub converged: bool,
    pub final_gap: f64,
}

impl IterationReport {
    /// Largest `sup_gaps[i] - bound_gaps[i]`.
    pub fn max_bound_excess(&self) -> f64 {
        self.sup_gaps
            .iter()
            .zip(&self.bound_gaps)
            .map(|(g, b)| g - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl PicardOptions {
    /// `tol = 1e-10`, `max_iter = ceil(M (b - a)) + 60`.
    pub fn for_problem(p: &VolterraProblem) -> Self {
        PicardOptions {
            tol: DEFAULT_TOL,
            max_iter: default_max_iter(p),
        }
    }
}

pub fn default_max_iter(p: &VolterraProblem) -> usize {
    (p.m() * (p.b() - p.a())).ceil() as usize + 60
}

/// Successive approximation `psi_n = f + integral k psi_{n-1}` from `psi0`.
pub fn picard_solve(
    p: &VolterraProblem,
    psi0: &GridFunction,
    opts: PicardOptions,
) -> Result<(Solution, IterationReport)> {
    picard_solve_observed(p, psi0, opts, |_, _, _| {})
}

/// As [`picard_solve`], calling `observer(n, psi_{n-1}, psi_n)` after every sweep.
pub fn picard_solve_observed(
    p: &VolterraProblem,
    psi0: &GridFunction,
    opts: PicardOptions,
    mut observer: impl FnMut(usize, &[f64], &[f64]),
) -> Result<(Solution, IterationReport)> {
    p.check_grid(psi0)?;
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::Invalid(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if opts.max_iter == 0 {
        return Err(Error::Invalid("max_iter must be positive".into()));
    }
    let growth = p.m() * (p.b() - p.a());
    let mut prev = psi0.values().to_vec();
    let mut sup_gaps = Vec::new();
    let mut bound_gaps = Vec::new();
    let mut epsilon = 0.0;
    let mut bound = 0.0;
    let mut converged = false;
    let mut final_gap = f64::INFINITY;

    for n in 1..=opts.max_iter {
        let next = p.apply_map(&prev);
        let gap = prev
            .iter()
            .zip(&next)
            .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()));
        if !gap.is_finite() {
            return Err(Error::NonFinite {
                t: p.b(),
                value: gap,
            });
        }
        if n == 1 {
            epsilon = gap;
            bound = epsilon;
        } else {
            bound *= growth / (n - 1) as f64;
        }
        sup_gaps.push(gap);
        bound_gaps.push(bound);
        observer(n, &prev, &next);
        prev = next;
        final_gap = gap;
        if gap <= opts.tol {
            converged = true;
            break;
        }
        if p.m() == 0.0 {
            // psi_1 = f is already the fixed point
            final_gap = 0.0;
            converged = true;
            break;
        }
    }

    let report = IterationReport {
        iterations: sup_gaps.len(),
        epsilon,
        sup_gaps,
        bound_gaps,
        converged,
        final_gap,
    };
    if !converged {
        return Err(Error::NoConvergence {
            iterations: report.iterations,
            final_gap,
            report: Box::new(report),
        });
    }
    let residual = sup(&p.residuals(&prev));
    let phi = GridFunction::new(p.grid().clone(), prev)?;
    Ok((
        Solution {
            phi,
            residual,
            method: Method::Picard,
        },
        report,
    ))
}

/// Direct forward marching. Scattered gaps are exact; continuous panels use
/// the trapezoid rule with the implicit diagonal term solved in closed form.
pub fn march_solve(p: &VolterraProblem) -> Result<Solution> {
    let x = march_values(&p.grid, &p.f_values, |i, j| Ok(p.kernel.row(i)[j]))?;
    let residual = sup(&p.residuals(&x));
    Ok(Solution {
        phi: GridFunction::new(p.grid.clone(), x)?,
        residual,
        method: Method::Marching,
    })
}

/// Value at `sigma(r)` of the solution extended one scattered step past `r`:
/// `f(sigma(r)) + mu(r) k(sigma(r), r) phi_r`.
pub fn step_extend(p: &VolterraProblem, phi_r: f64, r: f64) -> Result<f64> {
    let mu = p.ts.mu(r)?;
    if mu <= 0.0 {
        return Err(Error::NotRightScattered(r));
    }
    let next = p.ts.sigma(r)?;
    Ok(p.f.eval(next, None)? + mu * p.k.eval(next, Some(r))? * phi_r)
}

fn sup(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}
