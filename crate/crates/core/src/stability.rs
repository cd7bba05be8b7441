//! Defects of approximate solutions and certificates of Ulam-type stability.
//!
//! A function `psi` with defect `eps` (the largest pointwise residual of the
//! equation) is certified when the exact solution reached from `psi` by
//! successive approximation stays within `C * eps` of it (Hyers-Ulam), or
//! within `C * omega(t)` for a prescribed weight `omega` (Hyers-Ulam-Rassias).
//! All suprema are grid maxima and every verdict tolerates the problem's
//! quadrature allowance.

use serde::Serialize;

use crate::calculus::{cumulative_integral, GridFunction};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::volterra::{
    march_solve, picard_solve, picard_solve_observed, IterationReport, PicardOptions,
    VolterraProblem,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    HyersUlam,
    Rassias,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Certified,
    Violated,
}

impl Verdict {
    fn from_margin(min_margin: f64, slack: f64) -> Self {
        if min_margin >= -slack {
            Verdict::Certified
        } else {
            Verdict::Violated
        }
    }
}

/// Pointwise check of `|psi_n - psi_{n-1}| <= M P^{n-1} omega(t)` along the
/// iteration. The first step is bounded by the hypothesis `omega(t)` itself.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterateEstimate {
    /// `max_t (gap_n(t) - bound_n(t))` per iteration.
    pub excess: Vec<f64>,
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct StabilityCertificate {
    pub mode: Mode,
    /// Defect of `psi`.
    pub epsilon: f64,
    pub omega: Option<GridFunction>,
    /// Growth constant of `omega`; Rassias mode only.
    pub p: Option<f64>,
    /// Stability constant.
    pub c: f64,
    /// Kernel bound.
    pub m: f64,
    /// `|phi(t) - psi(t)|`.
    pub deviations: GridFunction,
    /// `C * eps` or `C * omega(t)`.
    pub bounds: GridFunction,
    /// `bounds - deviations`.
    pub margins: GridFunction,
    pub slack: f64,
    pub verdict: Verdict,
    pub worst_point: f64,
    pub min_margin: f64,
    pub report: IterationReport,
    pub iterate_estimate: Option<IterateEstimate>,
    /// First iteration whose sup gap fell below `min omega`; Rassias mode only.
    pub omega_index: Option<usize>,
}

/// Serialized form of a certificate.
#[derive(Debug, Serialize)]
pub struct CertificateSummary<'a> {
    pub mode: Mode,
    pub epsilon: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub verdict: Verdict,
    pub worst_point: f64,
    pub min_margin: f64,
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "P", skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub slack: f64,
    pub max_deviation: f64,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterate_estimate: Option<&'a IterateEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_index: Option<usize>,
}

impl StabilityCertificate {
    pub fn summary(&self) -> CertificateSummary<'_> {
        CertificateSummary {
            mode: self.mode,
            epsilon: self.epsilon,
            c: self.c,
            verdict: self.verdict,
            worst_point: self.worst_point,
            min_margin: self.min_margin,
            m: self.m,
            p: self.p,
            slack: self.slack,
            max_deviation: self.deviations.sup_norm(),
            iterations: self.report.iterations,
            iterate_estimate: self.iterate_estimate.as_ref(),
            omega_index: self.omega_index,
        }
    }

    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }
}

/// Pointwise residual `|psi - f - integral k psi|` and its grid maximum.
pub fn defect(p: &VolterraProblem, psi: &GridFunction) -> Result<(f64, GridFunction)> {
    p.check_grid(psi)?;
    let r = p.residuals(psi.values());
    let eps = r.iter().fold(0.0, |m: f64, v| m.max(*v));
    Ok((eps, GridFunction::new(p.grid().clone(), r)?))
}

/// `C = 1 + e^{M (b - a)}` with the real exponential.
pub fn hyers_ulam_constant(m: f64, a: f64, b: f64) -> f64 {
    1.0 + (m * (b - a)).exp()
}

/// `C = 1 + M / (1 - P)`.
pub fn rassias_constant(m: f64, p: f64) -> f64 {
    1.0 + m / (1.0 - p)
}

struct Comparison {
    deviations: GridFunction,
    margins: GridFunction,
    min_margin: f64,
    worst_point: f64,
}

fn compare(phi: &GridFunction, psi: &GridFunction, bounds: &GridFunction) -> Result<Comparison> {
    let deviations = phi.zip_with(psi, |a, b| (a - b).abs())?;
    let margins = bounds.zip_with(&deviations, |b, d| b - d)?;
    let (worst_point, min_margin) = margins
        .iter()
        .fold((f64::NAN, f64::INFINITY), |(wt, wm), (t, m)| {
            if m < wm {
                (t, m)
            } else {
                (wt, wm)
            }
        });
    Ok(Comparison {
        deviations,
        margins,
        min_margin,
        worst_point,
    })
}

/// Solves from `psi` and checks `|phi - psi| <= (1 + e^{M(b-a)}) eps` on the grid.
pub fn certify_hyers_ulam(
    p: &VolterraProblem,
    psi: &GridFunction,
    tol: f64,
) -> Result<StabilityCertificate> {
    let (epsilon, _) = defect(p, psi)?;
    let opts = PicardOptions {
        tol,
        ..PicardOptions::for_problem(p)
    };
    let (solution, report) = picard_solve(p, psi, opts)?;
    let c = hyers_ulam_constant(p.m(), p.a(), p.b());
    let bounds = GridFunction::constant(p.grid().clone(), c * epsilon)?;
    let cmp = compare(&solution.phi, psi, &bounds)?;
    let slack = p.quadrature_allowance()?;
    Ok(StabilityCertificate {
        mode: Mode::HyersUlam,
        epsilon,
        omega: None,
        p: None,
        c,
        m: p.m(),
        deviations: cmp.deviations,
        bounds,
        margins: cmp.margins,
        slack,
        verdict: Verdict::from_margin(cmp.min_margin, slack),
        worst_point: cmp.worst_point,
        min_margin: cmp.min_margin,
        report,
        iterate_estimate: None,
        omega_index: None,
    })
}

/// `P* = max_t (integral_a^t omega Delta s) / omega(t)`. The growth condition
/// holds on the grid iff the result is below 1.
pub fn check_rassias_condition(p: &VolterraProblem, omega: &GridFunction) -> Result<f64> {
    p.check_grid(omega)?;
    if let Some((t, value)) = omega.iter().find(|&(_, w)| w <= 0.0) {
        return Err(Error::NonPositiveOmega { t, value });
    }
    let cum = cumulative_integral(omega);
    Ok(cum
        .iter()
        .zip(omega.values())
        .fold(0.0, |m: f64, (i, w)| m.max(i / w)))
}

/// Solves from `psi` and checks `|phi - psi| <= (1 + M/(1-P)) omega(t)`
/// pointwise, recording the per-iteration estimate along the way.
pub fn certify_rassias(
    p: &VolterraProblem,
    psi: &GridFunction,
    omega: &GridFunction,
    tol: f64,
) -> Result<StabilityCertificate> {
    p.check_grid(psi)?;
    let growth = check_rassias_condition(p, omega)?;
    if growth >= 1.0 {
        return Err(Error::ConditionFailed { p: growth });
    }
    let (epsilon, residuals) = defect(p, psi)?;
    if let Some(((t, r), w)) = residuals
        .iter()
        .zip(omega.values())
        .find(|&((_, r), &w)| r > w)
    {
        return Err(Error::HypothesisViolated {
            t,
            residual: r,
            omega: *w,
        });
    }

    let m = p.m();
    let w = omega.values();
    let min_omega = w.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let mut excess = Vec::new();
    let mut omega_index = None;
    let observer = |n: usize, prev: &[f64], next: &[f64]| {
        let scale = if n == 1 {
            1.0
        } else {
            m * growth.powi(n as i32 - 1)
        };
        let mut worst = f64::NEG_INFINITY;
        let mut gap_sup: f64 = 0.0;
        for ((a, b), wt) in prev.iter().zip(next).zip(w) {
            let gap = (a - b).abs();
            gap_sup = gap_sup.max(gap);
            worst = worst.max(gap - scale * wt);
        }
        excess.push(worst);
        if omega_index.is_none() && gap_sup <= min_omega {
            omega_index = Some(n);
        }
    };
    let opts = PicardOptions {
        tol,
        ..PicardOptions::for_problem(p)
    };
    let (solution, report) = picard_solve_observed(p, psi, opts, observer)?;

    let slack = p.quadrature_allowance()?;
    let c = rassias_constant(m, growth);
    let bounds = omega.map(|_, w| c * w)?;
    let cmp = compare(&solution.phi, psi, &bounds)?;
    let holds = excess.iter().all(|&e| e <= slack);
    Ok(StabilityCertificate {
        mode: Mode::Rassias,
        epsilon,
        omega: Some(omega.clone()),
        p: Some(growth),
        c,
        m,
        deviations: cmp.deviations,
        bounds,
        margins: cmp.margins,
        slack,
        verdict: Verdict::from_margin(cmp.min_margin, slack),
        worst_point: cmp.worst_point,
        min_margin: cmp.min_margin,
        report,
        iterate_estimate: Some(IterateEstimate { excess, holds }),
        omega_index,
    })
}

/// Re-certifies on `[a, T]` for each horizon `T`, sampling `psi` and `omega`
/// afresh on every truncated grid.
pub fn rassias_horizon_sweep(
    p: &VolterraProblem,
    psi: &Expr,
    omega: &Expr,
    horizons: &[f64],
    tol: f64,
) -> Result<Vec<StabilityCertificate>> {
    check_horizons(p, horizons)?;
    horizons
        .iter()
        .map(|&h| {
            let sub = p.truncated(h)?;
            let psi = GridFunction::from_expr(sub.grid().clone(), psi)?;
            let omega = GridFunction::from_expr(sub.grid().clone(), omega)?;
            certify_rassias(&sub, &psi, &omega, tol)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCheck {
    pub epsilon1: f64,
    pub epsilon2: f64,
    /// `(eps1 + eps2) e_M(t, a)`.
    pub bound: GridFunction,
    /// `bound - |psi1 - psi2|`.
    pub slack: GridFunction,
    pub allowance: f64,
    pub verdict: Verdict,
}

/// Checks `|psi1 - psi2| <= (eps1 + eps2) e_M(t, a)` for two approximate solutions.
pub fn pair_difference_check(
    p: &VolterraProblem,
    psi1: &GridFunction,
    psi2: &GridFunction,
) -> Result<PairCheck> {
    let (epsilon1, _) = defect(p, psi1)?;
    let (epsilon2, _) = defect(p, psi2)?;
    let ts = p.time_scale();
    let a = p.a();
    let total = epsilon1 + epsilon2;
    let bound = GridFunction::new(
        p.grid().clone(),
        p.grid()
            .points()
            .iter()
            .map(|&t| Ok(total * ts.exp(p.m(), t, a)?))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let diff = psi1.zip_with(psi2, |x, y| (x - y).abs())?;
    let slack = bound.zip_with(&diff, |b, d| b - d)?;
    let allowance = p.quadrature_allowance()?;
    let min = slack.values().iter().fold(f64::INFINITY, |m, &v| m.min(v));
    Ok(PairCheck {
        epsilon1,
        epsilon2,
        bound,
        slack,
        allowance,
        verdict: Verdict::from_margin(min, allowance),
    })
}

/// Growth of the distance between the zero function and the exact solution
/// on lengthening horizons, against the lower bound `1 + M (T - a)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthRecord {
    pub horizons: Vec<f64>,
    pub sup_deviation: Vec<f64>,
    pub lower_bound: Vec<f64>,
    /// Defect of the zero function on each horizon.
    pub defects: Vec<f64>,
    /// `sup_deviation / defect`: the least constant any Hyers-Ulam bound could use.
    pub ratios: Vec<f64>,
}

impl GrowthRecord {
    /// Every deviation reaches its lower bound.
    pub fn bounds_hold(&self) -> bool {
        self.sup_deviation
            .iter()
            .zip(&self.lower_bound)
            .all(|(d, l)| *d >= l - 1e-9)
    }

    pub fn strictly_increasing(&self) -> bool {
        self.sup_deviation.windows(2).all(|w| w[1] > w[0])
    }
}

fn check_horizons(p: &VolterraProblem, horizons: &[f64]) -> Result<()> {
    if horizons.is_empty() {
        return Err(Error::Invalid("at least one horizon is required".into()));
    }
    if horizons.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("horizons must be strictly increasing".into()));
    }
    let (a, b) = (p.a(), p.b());
    if let Some(h) = horizons.iter().find(|&&h| !(h >= a && h <= b)) {
        return Err(Error::Invalid(format!(
            "horizon {h} lies outside [{a}, {b}]"
        )));
    }
    Ok(())
}

/// Solves on `[a, T]` for every horizon and records `sup |phi - 0|`.
pub fn instability_probe(p: &VolterraProblem, horizons: &[f64]) -> Result<GrowthRecord> {
    check_horizons(p, horizons)?;
    let mut record = GrowthRecord {
        horizons: horizons.to_vec(),
        sup_deviation: Vec::new(),
        lower_bound: Vec::new(),
        defects: Vec::new(),
        ratios: Vec::new(),
    };
    for &h in horizons {
        let sub = p.truncated(h)?;
        let zero = GridFunction::zeros(sub.grid().clone());
        let (eps, _) = defect(&sub, &zero)?;
        let phi = march_solve(&sub)?.phi;
        let dev = phi.sup_norm();
        record.sup_deviation.push(dev);
        record.lower_bound.push(1.0 + sub.m() * (h - sub.a()));
        record.defects.push(eps);
        record.ratios.push(dev / eps);
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timescale::TimeScale;

    fn problem(ts: TimeScale, h: f64, f: &str, k: &str) -> VolterraProblem {
        VolterraProblem::from_strs(ts, h, f, k).unwrap()
    }

    #[test]
    fn defect_examples() {
        let p = problem(TimeScale::integers(0, 5).unwrap(), 1.0, "1", "5");
        let exact = march_solve(&p).unwrap().phi;
        assert!(defect(&p, &exact).unwrap().0 <= 1e-10);
        let zero = GridFunction::zeros(p.grid().clone());
        let (eps, r) = defect(&p, &zero).unwrap();
        assert_eq!(eps, 1.0);
        assert!(r.values().iter().all(|&v| v == 1.0));

        let q = problem(TimeScale::interval(0.0, 1.0).unwrap(), 0.1, "1 + t", "0");
        let shifted = GridFunction::from_fn(q.grid().clone(), |t| 1.0 + t - 0.25).unwrap();
        assert!((defect(&q, &shifted).unwrap().0 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn defect_rejects_foreign_grid() {
        let p = problem(TimeScale::integers(0, 5).unwrap(), 1.0, "1", "5");
        let other = std::sync::Arc::new(TimeScale::integers(1, 6).unwrap().build_grid(1.0).unwrap());
        assert!(matches!(
            defect(&p, &GridFunction::zeros(other)),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn defect_scales_linearly_for_zero_kernel() {
        let p = problem(TimeScale::interval(0.0, 2.0).unwrap(), 0.05, "cos(t)", "0");
        let base = |lambda: f64| {
            let psi = GridFunction::from_fn(p.grid().clone(), |t| t.cos() + lambda * (t * t - 0.3))
                .unwrap();
            defect(&p, &psi).unwrap().1
        };
        let one = base(1.0);
        for lambda in [0.5, 2.0, 7.25] {
            let scaled = base(lambda);
            for (a, b) in one.values().iter().zip(scaled.values()) {
                assert!((lambda * a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn constants() {
        let c = hyers_ulam_constant(5.0, 0.0, 1.0);
        assert!((c - 149.413_159_102_576_6).abs() < 1e-9);
        assert!((rassias_constant(0.3, 0.5) - 1.6).abs() < 1e-15);
    }

    #[test]
    fn exact_solution_is_certified() {
        let p = problem(TimeScale::interval(0.0, 1.0).unwrap(), 0.01, "1", "5");
        let phi = march_solve(&p).unwrap().phi;
        let cert = certify_hyers_ulam(&p, &phi, 1e-10).unwrap();
        assert!(cert.epsilon < 1e-10);
        assert!(cert.deviations.sup_norm() < 1e-9);
        assert!(cert.is_certified());
    }

    #[test]
    fn hyers_ulam_with_bump() {
        let p = problem(TimeScale::interval(0.0, 1.0).unwrap(), 0.01, "1", "5");
        let phi = march_solve(&p).unwrap().phi;
        let psi = phi.map(|t, v| v + 0.001 * (3.0 * t).cos()).unwrap();
        let cert = certify_hyers_ulam(&p, &psi, 1e-10).unwrap();
        assert!(cert.is_certified());
        assert!(cert.min_margin > 0.0);
        assert!(cert.epsilon > 0.0);
    }

    #[test]
    fn rassias_condition_examples() {
        let p = problem(TimeScale::interval(0.0, 1.0).unwrap(), 1e-3, "1", "0.3");
        let omega = GridFunction::from_fn(p.grid().clone(), |t| (2.0 * t).exp()).unwrap();
        let growth = check_rassias_condition(&p, &omega).unwrap();
        assert!((growth - (1.0 - (-2f64).exp()) / 2.0).abs() < 1e-4);

        let ones = GridFunction::constant(p.grid().clone(), 1.0).unwrap();
        assert!((check_rassias_condition(&p, &ones).unwrap() - 1.0).abs() < 1e-12);

        let zero_at_start = GridFunction::from_fn(p.grid().clone(), |t| t).unwrap();
        assert!(matches!(
            check_rassias_condition(&p, &zero_at_start),
            Err(Error::NonPositiveOmega { .. })
        ));
    }

    #[test]
    fn rassias_errors() {
        let p = problem(TimeScale::interval(0.0, 1.0).unwrap(), 0.01, "1", "0.3");
        let phi = march_solve(&p).unwrap().phi;
        let ones = GridFunction::constant(p.grid().clone(), 1.0).unwrap();
        assert!(matches!(
            certify_rassias(&p, &phi, &ones, 1e-10),
            Err(Error::ConditionFailed { .. })
        ));
        let omega = GridFunction::from_fn(p.grid().clone(), |t| (2.0 * t).exp()).unwrap();
        let far = phi.map(|_, v| v + 10.0).unwrap();
        assert!(matches!(
            certify_rassias(&p, &far, &omega, 1e-10),
            Err(Error::HypothesisViolated { .. })
        ));
    }

    #[test]
    fn rassias_exact_solution() {
        let p = problem(TimeScale::interval(0.0, 1.0).unwrap(), 0.01, "1", "0.3");
        let phi = march_solve(&p).unwrap().phi;
        let omega = GridFunction::from_fn(p.grid().clone(), |t| (2.0 * t).exp()).unwrap();
        let cert = certify_rassias(&p, &phi, &omega, 1e-10).unwrap();
        assert!(cert.is_certified());
        assert!(cert.iterate_estimate.unwrap().holds);
        assert_eq!(cert.omega_index, Some(1));
    }

    #[test]
    fn pair_check_identical_functions() {
        let p = problem(TimeScale::interval(0.0, 1.0).unwrap(), 0.05, "1", "2");
        let psi = GridFunction::from_fn(p.grid().clone(), |t| 1.0 + t).unwrap();
        let check = pair_difference_check(&p, &psi, &psi).unwrap();
        assert_eq!(check.verdict, Verdict::Certified);
        assert!(check.slack.values().iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn pair_check_with_exact_partner() {
        let p = problem(TimeScale::interval(0.0, 1.0).unwrap(), 0.01, "1", "2");
        let exact = march_solve(&p).unwrap().phi;
        let psi = exact.map(|t, v| v + 0.01 * t.sin()).unwrap();
        let check = pair_difference_check(&p, &exact, &psi).unwrap();
        assert!(check.epsilon1 < 1e-10);
        assert_eq!(check.verdict, Verdict::Certified);
    }

    #[test]
    fn instability_on_integers() {
        let p = problem(TimeScale::integers(0, 4).unwrap(), 1.0, "1", "5");
        let g = instability_probe(&p, &[1.0, 2.0, 4.0]).unwrap();
        assert_eq!(g.sup_deviation, vec![6.0, 36.0, 1296.0]);
        assert_eq!(g.lower_bound, vec![6.0, 11.0, 21.0]);
        assert_eq!(g.defects, vec![1.0, 1.0, 1.0]);
        assert!(g.bounds_hold() && g.strictly_increasing());

        let zero = instability_probe(&p, &[0.0]).unwrap();
        assert_eq!(zero.sup_deviation, vec![1.0]);
        assert_eq!(zero.lower_bound, vec![1.0]);
    }

    #[test]
    fn instability_rejects_bad_horizons() {
        let p = problem(TimeScale::integers(0, 4).unwrap(), 1.0, "1", "5");
        assert!(instability_probe(&p, &[2.0, 1.0]).is_err());
        assert!(instability_probe(&p, &[5.0]).is_err());
        assert!(instability_probe(&p, &[]).is_err());
    }
}
