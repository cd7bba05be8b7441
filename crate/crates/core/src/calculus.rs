//! Delta integration on a sampled time scale and the constant-coefficient
//! time-scale exponential.
//!
//! Continuous components are integrated with the composite trapezoid rule;
//! a scattered gap `t_j -> sigma(t_j)` contributes exactly `mu(t_j) g(t_j)`,
//! so on purely discrete scales every integral is a finite sum with no
//! quadrature error.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::timescale::{Grid, Link, TimeScale};

/// Real values sampled at every point of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} grid points",
                values.len(),
                grid.len()
            )));
        }
        if let Some((t, &value)) = grid
            .points()
            .iter()
            .zip(&values)
            .find(|(_, v)| !v.is_finite())
        {
            return Err(Error::NonFinite { t: *t, value });
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.points().iter().map(|&t| f(t)).collect();
        Self::new(grid, values)
    }

    /// Samples an expression in `t`; `s` must not appear.
    pub fn from_expr(grid: Arc<Grid>, expr: &Expr) -> Result<Self> {
        let values = grid
            .points()
            .iter()
            .map(|&t| expr.eval(t, None))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(grid, values)
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Result<Self> {
        let values = vec![c; grid.len()];
        Self::new(grid, values)
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let values = vec![0.0; grid.len()];
        GridFunction { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn points(&self) -> &[f64] {
        self.grid.points()
    }

    /// `(t, value)` pairs in grid order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.points().iter().copied().zip(self.values.iter().copied())
    }

    /// Value at a grid point.
    pub fn at(&self, t: f64) -> Result<f64> {
        self.grid
            .index_of(t)
            .map(|i| self.values[i])
            .ok_or(Error::PointNotOnGrid(t))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid
    }

    /// Pointwise combination with another function on the same grid.
    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch("operands live on different grids".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::new(self.grid.clone(), values)
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = self.iter().map(|(t, v)| f(t, v)).collect();
        Self::new(self.grid.clone(), values)
    }
}

/// Serializes as a list of `[t, value]` pairs.
impl Serialize for GridFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.values().len()))?;
        for pair in self.iter() {
            seq.serialize_element(&pair)?;
        }
        seq.end()
    }
}

/// Contribution of link `j` to a delta integral of the sampled values `g`.
#[inline]
fn link_integral(grid: &Grid, g: &[f64], j: usize) -> f64 {
    let p = grid.points();
    let width = p[j + 1] - p[j];
    match grid.links()[j] {
        Link::Continuous => 0.5 * width * (g[j] + g[j + 1]),
        Link::Jump => width * g[j],
    }
}

/// Delta integral of sampled values between grid indices `from <= to`.
pub fn integrate_indices(grid: &Grid, g: &[f64], from: usize, to: usize) -> f64 {
    (from..to).map(|j| link_integral(grid, g, j)).sum()
}

/// `integral from a to t_i of g Delta s` for every grid point `t_i`.
pub fn cumulative_integral(g: &GridFunction) -> Vec<f64> {
    let grid = g.grid();
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    out.push(acc);
    for j in 0..grid.len() - 1 {
        acc += link_integral(grid, g.values(), j);
        out.push(acc);
    }
    out
}

pub fn delta_integral(g: &GridFunction, from: f64, to: f64) -> Result<f64> {
    let grid = g.grid();
    let i0 = grid.index_of(from).ok_or(Error::PointNotOnGrid(from))?;
    let i1 = grid.index_of(to).ok_or(Error::PointNotOnGrid(to))?;
    if i1 < i0 {
        return Err(Error::InvalidRange(format!(
            "lower limit {from} exceeds upper limit {to}"
        )));
    }
    Ok(integrate_indices(grid, g.values(), i0, i1))
}

/// `e_p(t, t0)` on `ts`; see [`TimeScale::exp`].
pub fn ts_exp(ts: &TimeScale, p: f64, t: f64, t0: f64) -> Result<f64> {
    Ok(ts.exp(p, t, t0)?)
}

/// Distance between `integral_a^t M / e_M(sigma(s), a) Delta s`, evaluated by
/// the grid quadrature, and the closed form `1 - 1 / e_M(t, a)`.
pub fn exp_identity_residual(ts: &TimeScale, grid: &Grid, m: f64, t: f64, a: f64) -> Result<f64> {
    let ia = grid.index_of(a).ok_or(Error::PointNotOnGrid(a))?;
    let it = grid.index_of(t).ok_or(Error::PointNotOnGrid(t))?;
    if it < ia {
        return Err(Error::InvalidRange(format!("t = {t} precedes a = {a}")));
    }
    let (a, t) = (grid.points()[ia], grid.points()[it]);
    let p = grid.points();
    let integrand = |s: f64| -> Result<f64> { Ok(m / ts.exp(m, s, a)?) };
    let mut integral = 0.0;
    for j in ia..it {
        let width = p[j + 1] - p[j];
        integral += match grid.links()[j] {
            // both panel ends are right-dense from inside the panel
            Link::Continuous => 0.5 * width * (integrand(p[j])? + integrand(p[j + 1])?),
            Link::Jump => width * integrand(p[j + 1])?,
        };
    }
    let closed = 1.0 - 1.0 / ts.exp(m, t, a)?;
    Ok((integral - closed).abs())
}

/// `e_p(t, a) - (1 + p (t - a))` with `a` the start of `ts`; nonnegative for `p > 0`.
pub fn bernoulli_gap(ts: &TimeScale, p: f64, t: f64) -> Result<f64> {
    let a = ts.start();
    Ok(ts.exp(p, t, a)? - (1.0 + p * (t - a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timescale::Component;

    fn grid(ts: &TimeScale, h: f64) -> Arc<Grid> {
        Arc::new(ts.build_grid(h).unwrap())
    }

    /// Lebesgue length of the interval parts plus the sum of all gaps.
    fn measure_oracle(ts: &TimeScale) -> f64 {
        let c = ts.components();
        let lengths: f64 = c
            .iter()
            .map(|c| match *c {
                Component::Interval { lo, hi } => hi - lo,
                Component::Point { .. } => 0.0,
            })
            .sum();
        let gaps: f64 = c.windows(2).map(|w| w[1].inf() - w[0].sup()).sum();
        lengths + gaps
    }

    #[test]
    fn integral_of_one_is_delta_measure() {
        let ts = TimeScale::new(vec![
            Component::Interval { lo: 0.0, hi: 1.0 },
            Component::Point { t: 2.0 },
        ])
        .unwrap();
        let g = GridFunction::constant(grid(&ts, 0.1), 1.0).unwrap();
        let v = delta_integral(&g, 0.0, 2.0).unwrap();
        assert!((v - measure_oracle(&ts)).abs() < 1e-14);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn integral_on_integers() {
        let ts = TimeScale::integers(0, 5).unwrap();
        let g = GridFunction::from_fn(grid(&ts, 1.0), |s| s).unwrap();
        // n(n-1)/2 with n = 5
        assert_eq!(delta_integral(&g, 0.0, 5.0).unwrap(), 10.0);
        assert_eq!(delta_integral(&g, 3.0, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn integral_errors() {
        let ts = TimeScale::integers(0, 5).unwrap();
        let g = GridFunction::constant(grid(&ts, 1.0), 1.0).unwrap();
        assert!(matches!(
            delta_integral(&g, 0.5, 2.0),
            Err(Error::PointNotOnGrid(_))
        ));
        assert!(matches!(
            delta_integral(&g, 3.0, 2.0),
            Err(Error::InvalidRange(_))
        ));
    }

    #[test]
    fn grid_function_validation() {
        let ts = TimeScale::integers(0, 2).unwrap();
        let g = grid(&ts, 1.0);
        assert!(matches!(
            GridFunction::new(g.clone(), vec![1.0]),
            Err(Error::GridMismatch(_))
        ));
        assert!(matches!(
            GridFunction::new(g, vec![1.0, f64::NAN, 0.0]),
            Err(Error::NonFinite { t, .. }) if t == 1.0
        ));
    }

    #[test]
    fn cumulative_matches_direct() {
        let ts = TimeScale::new(vec![
            Component::Interval { lo: 0.0, hi: 1.0 },
            Component::Point { t: 1.5 },
            Component::Interval { lo: 2.0, hi: 3.0 },
        ])
        .unwrap();
        let g = GridFunction::from_fn(grid(&ts, 0.25), |s| s * s).unwrap();
        let cum = cumulative_integral(&g);
        for (i, &t) in g.points().iter().enumerate() {
            let direct = delta_integral(&g, 0.0, t).unwrap();
            assert!((cum[i] - direct).abs() < 1e-13);
        }
    }

    #[test]
    fn exponential_examples() {
        let z = TimeScale::integers(0, 10).unwrap();
        // direct product oracle over {0, 1, 2}
        let oracle: f64 = [0.0, 1.0, 2.0].iter().map(|_| 1.0 + 1.0 * 5.0).product();
        assert_eq!(ts_exp(&z, 5.0, 3.0, 0.0).unwrap(), oracle);
        assert_eq!(ts_exp(&z, 5.0, 7.0, 7.0).unwrap(), 1.0);
        let m = TimeScale::new(vec![
            Component::Interval { lo: 0.0, hi: 1.0 },
            Component::Point { t: 2.0 },
            Component::Point { t: 3.0 },
        ])
        .unwrap();
        let v = ts_exp(&m, 5.0, 3.0, 0.0).unwrap();
        assert!((v / (36.0 * 5f64.exp()) - 1.0).abs() < 1e-14);
        assert!((v / 5342.876 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn exp_identity_examples() {
        let z = TimeScale::integers(0, 5).unwrap();
        let gz = z.build_grid(1.0).unwrap();
        assert_eq!(exp_identity_residual(&z, &gz, 5.0, 0.0, 0.0).unwrap(), 0.0);
        assert!(exp_identity_residual(&z, &gz, 5.0, 5.0, 0.0).unwrap() < 1e-12);

        let r = TimeScale::interval(0.0, 1.0).unwrap();
        let gr = r.build_grid(1e-3).unwrap();
        assert!(exp_identity_residual(&r, &gr, 5.0, 1.0, 0.0).unwrap() <= 1e-5);

        // the scattered gap uses sigma(s); a mixed scale keeps second order
        let m = TimeScale::new(vec![
            Component::Interval { lo: 0.0, hi: 1.0 },
            Component::Point { t: 2.0 },
            Component::Point { t: 3.0 },
        ])
        .unwrap();
        let gm = m.build_grid(1e-3).unwrap();
        assert!(exp_identity_residual(&m, &gm, 5.0, 3.0, 0.0).unwrap() <= 1e-5);
    }

    #[test]
    fn bernoulli_examples() {
        let z = TimeScale::integers(0, 10).unwrap();
        assert_eq!(bernoulli_gap(&z, 5.0, 0.0).unwrap(), 0.0);
        assert_eq!(bernoulli_gap(&z, 5.0, 2.0).unwrap(), 25.0);
        let r = TimeScale::interval(0.0, 1.0).unwrap();
        let v = bernoulli_gap(&r, 5.0, 1.0).unwrap();
        assert!((v - (5f64.exp() - 6.0)).abs() < 1e-12);
    }
}
