//! Bounded time scales built from finitely many closed intervals and isolated
//! points, together with the forward jump, graininess and the sampling grid
//! used by every numerical routine in the crate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance used when matching a real number against the points of
/// a time scale or a grid.
pub const TOL_MEMBER: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TimeScaleError {
    #[error("time scale has no components")]
    Empty,
    #[error("component {index} is invalid: {reason}")]
    InvalidComponent { index: usize, reason: String },
    #[error("components {index} and {next} overlap or are out of order")]
    Unordered { index: usize, next: usize },
    #[error("point {0} is not in the time scale")]
    PointNotInTimeScale(f64),
    #[error("grid step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("horizon {horizon} lies before the start {start} of the time scale")]
    HorizonBeforeStart { horizon: f64, start: f64 },
    #[error("not regressive: 1 + mu*p = {factor} at t = {t}")]
    NonRegressive { t: f64, factor: f64 },
}

/// One connected piece of a time scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Component {
    Interval { lo: f64, hi: f64 },
    Point { t: f64 },
}

impl Component {
    pub fn inf(&self) -> f64 {
        match *self {
            Component::Interval { lo, .. } => lo,
            Component::Point { t } => t,
        }
    }

    pub fn sup(&self) -> f64 {
        match *self {
            Component::Interval { hi, .. } => hi,
            Component::Point { t } => t,
        }
    }

    fn validate(&self, index: usize) -> Result<(), TimeScaleError> {
        let invalid = |reason: &str| TimeScaleError::InvalidComponent {
            index,
            reason: reason.to_string(),
        };
        match *self {
            Component::Interval { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() {
                    return Err(invalid("interval endpoints must be finite"));
                }
                if lo >= hi {
                    return Err(invalid("interval requires lo < hi; use a point instead"));
                }
            }
            Component::Point { t } => {
                if !t.is_finite() {
                    return Err(invalid("point must be finite"));
                }
            }
        }
        Ok(())
    }
}

/// Right-hand behaviour of a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RightClass {
    Scattered,
    Dense,
    Max,
}

/// Left-hand behaviour of a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LeftClass {
    Scattered,
    Dense,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PointClass {
    pub right: RightClass,
    pub left: LeftClass,
}

/// Where a queried value sits inside a component.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Location {
    /// At the right end of component `idx` (an isolated point or an interval's `hi`).
    RightEnd(usize),
    /// At the left end of interval `idx`.
    LeftEnd(usize),
    /// Strictly inside interval `idx`.
    Interior(usize),
}

/// A nonempty closed subset of the reals made of finitely many ordered,
/// pairwise disjoint components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTimeScale", into = "RawTimeScale")]
pub struct TimeScale {
    components: Vec<Component>,
}

#[derive(Serialize, Deserialize)]
struct RawTimeScale {
    components: Vec<Component>,
}

impl TryFrom<RawTimeScale> for TimeScale {
    type Error = TimeScaleError;

    fn try_from(raw: RawTimeScale) -> Result<Self, Self::Error> {
        TimeScale::new(raw.components)
    }
}

impl From<TimeScale> for RawTimeScale {
    fn from(ts: TimeScale) -> Self {
        RawTimeScale {
            components: ts.components,
        }
    }
}

impl TimeScale {
    pub fn new(components: Vec<Component>) -> Result<Self, TimeScaleError> {
        if components.is_empty() {
            return Err(TimeScaleError::Empty);
        }
        for (index, c) in components.iter().enumerate() {
            c.validate(index)?;
        }
        for (index, pair) in components.windows(2).enumerate() {
            if pair[0].sup() >= pair[1].inf() {
                return Err(TimeScaleError::Unordered {
                    index,
                    next: index + 1,
                });
            }
        }
        Ok(TimeScale { components })
    }

    /// The closed interval `[lo, hi]`.
    pub fn interval(lo: f64, hi: f64) -> Result<Self, TimeScaleError> {
        Self::new(vec![Component::Interval { lo, hi }])
    }

    /// Isolated points; they are sorted before validation.
    pub fn points(points: impl IntoIterator<Item = f64>) -> Result<Self, TimeScaleError> {
        let mut pts: Vec<f64> = points.into_iter().collect();
        pts.sort_by(f64::total_cmp);
        Self::new(pts.into_iter().map(|t| Component::Point { t }).collect())
    }

    /// `{lo, lo+1, ..., hi}` for integers `lo <= hi`.
    pub fn integers(lo: i64, hi: i64) -> Result<Self, TimeScaleError> {
        Self::points((lo..=hi).map(|n| n as f64))
    }

    /// `{0, h, 2h, ..., n h}`.
    pub fn uniform(h: f64, n: usize) -> Result<Self, TimeScaleError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(TimeScaleError::InvalidStep(h));
        }
        Self::points((0..=n).map(|i| i as f64 * h))
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Smallest point `a`.
    pub fn start(&self) -> f64 {
        self.components[0].inf()
    }

    /// Largest point `b`.
    pub fn end(&self) -> f64 {
        self.components[self.components.len() - 1].sup()
    }

    pub fn has_intervals(&self) -> bool {
        self.components
            .iter()
            .any(|c| matches!(c, Component::Interval { .. }))
    }

    pub fn contains(&self, t: f64) -> bool {
        self.locate(t).is_some()
    }

    fn locate(&self, t: f64) -> Option<Location> {
        if !t.is_finite() {
            return None;
        }
        // first component whose sup is not left of t
        let idx = self
            .components
            .partition_point(|c| c.sup() < t - TOL_MEMBER);
        let c = self.components.get(idx)?;
        match *c {
            Component::Point { t: p } => ((t - p).abs() <= TOL_MEMBER).then_some(Location::RightEnd(idx)),
            Component::Interval { lo, hi } => {
                if (t - hi).abs() <= TOL_MEMBER {
                    Some(Location::RightEnd(idx))
                } else if (t - lo).abs() <= TOL_MEMBER {
                    Some(Location::LeftEnd(idx))
                } else if t > lo && t < hi {
                    Some(Location::Interior(idx))
                } else {
                    None
                }
            }
        }
    }

    /// Forward jump operator.
    pub fn sigma(&self, t: f64) -> Result<f64, TimeScaleError> {
        match self
            .locate(t)
            .ok_or(TimeScaleError::PointNotInTimeScale(t))?
        {
            Location::RightEnd(idx) => Ok(self
                .components
                .get(idx + 1)
                .map_or(t, |next| next.inf())),
            Location::LeftEnd(_) | Location::Interior(_) => Ok(t),
        }
    }

    /// Backward jump operator.
    pub fn rho(&self, t: f64) -> Result<f64, TimeScaleError> {
        let loc = self
            .locate(t)
            .ok_or(TimeScaleError::PointNotInTimeScale(t))?;
        let left_end_of = |idx: usize| {
            if idx == 0 {
                t
            } else {
                self.components[idx - 1].sup()
            }
        };
        Ok(match loc {
            Location::LeftEnd(idx) => left_end_of(idx),
            Location::RightEnd(idx) => match self.components[idx] {
                Component::Point { .. } => left_end_of(idx),
                Component::Interval { .. } => t,
            },
            Location::Interior(_) => t,
        })
    }

    /// Graininess `sigma(t) - t`.
    pub fn mu(&self, t: f64) -> Result<f64, TimeScaleError> {
        Ok(self.sigma(t)? - t)
    }

    pub fn classify(&self, t: f64) -> Result<PointClass, TimeScaleError> {
        let sigma = self.sigma(t)?;
        let rho = self.rho(t)?;
        let right = if (t - self.end()).abs() <= TOL_MEMBER {
            RightClass::Max
        } else if sigma > t {
            RightClass::Scattered
        } else {
            RightClass::Dense
        };
        let left = if (t - self.start()).abs() <= TOL_MEMBER {
            LeftClass::Min
        } else if rho < t {
            LeftClass::Scattered
        } else {
            LeftClass::Dense
        };
        Ok(PointClass { right, left })
    }

    /// Intersection with `[start, horizon]`. A horizon that cuts an interval
    /// keeps the partial interval; one that lands on its left end keeps a point.
    pub fn truncate(&self, horizon: f64) -> Result<TimeScale, TimeScaleError> {
        let start = self.start();
        if !horizon.is_finite() || horizon < start - TOL_MEMBER {
            return Err(TimeScaleError::HorizonBeforeStart { horizon, start });
        }
        let mut components = Vec::new();
        for c in &self.components {
            if c.inf() > horizon + TOL_MEMBER {
                break;
            }
            match *c {
                Component::Interval { lo, hi } if hi > horizon + TOL_MEMBER => {
                    if horizon - lo > TOL_MEMBER {
                        components.push(Component::Interval { lo, hi: horizon });
                    } else {
                        components.push(Component::Point { t: lo });
                    }
                }
                other => components.push(other),
            }
        }
        TimeScale::new(components)
    }

    /// Time-scale exponential `e_p(t, t0)` for a constant coefficient `p`:
    /// the product of `1 + mu(tau) p` over right-scattered `tau` in `[t0, t)`
    /// times `exp(p * continuous length of [t0, t])`.
    ///
    /// For `t < t0` the reciprocal `1 / e_p(t0, t)` is returned.
    pub fn exp(&self, p: f64, t: f64, t0: f64) -> Result<f64, TimeScaleError> {
        if !self.contains(t) {
            return Err(TimeScaleError::PointNotInTimeScale(t));
        }
        if !self.contains(t0) {
            return Err(TimeScaleError::PointNotInTimeScale(t0));
        }
        if t < t0 - TOL_MEMBER {
            return Ok(1.0 / self.exp(p, t0, t)?);
        }
        let mut product = 1.0;
        let mut length = 0.0;
        let last = self.components.len() - 1;
        for (idx, c) in self.components.iter().enumerate() {
            if c.inf() > t + TOL_MEMBER {
                break;
            }
            if let Component::Interval { lo, hi } = *c {
                let overlap = hi.min(t) - lo.max(t0);
                if overlap > 0.0 {
                    length += overlap;
                }
            }
            let tau = c.sup();
            if idx < last && tau >= t0 - TOL_MEMBER && tau < t - TOL_MEMBER {
                let mu = self.components[idx + 1].inf() - tau;
                let factor = 1.0 + mu * p;
                if factor <= 0.0 {
                    return Err(TimeScaleError::NonRegressive { t: tau, factor });
                }
                product *= factor;
            }
        }
        Ok(product * (p * length).exp())
    }

    pub fn build_grid(&self, h_max: f64) -> Result<Grid, TimeScaleError> {
        Grid::new(self, h_max)
    }
}

/// How two adjacent grid points are connected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    /// Both points lie in the same interval component.
    Continuous,
    /// The later point is the forward jump of the earlier one.
    Jump,
}

/// Sample points of a time scale. Contains every isolated point and interval
/// endpoint exactly; interval interiors are subdivided uniformly.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
    links: Vec<Link>,
}

impl Grid {
    fn new(ts: &TimeScale, h_max: f64) -> Result<Grid, TimeScaleError> {
        if !(h_max > 0.0 && h_max.is_finite()) {
            return Err(TimeScaleError::InvalidStep(h_max));
        }
        let mut points = Vec::new();
        let mut links = Vec::new();
        for c in ts.components() {
            if !points.is_empty() {
                links.push(Link::Jump);
            }
            match *c {
                Component::Point { t } => points.push(t),
                Component::Interval { lo, hi } => {
                    let n = ((hi - lo) / h_max).ceil().max(1.0) as usize;
                    let step = (hi - lo) / n as f64;
                    points.push(lo);
                    for i in 1..n {
                        points.push(lo + i as f64 * step);
                        links.push(Link::Continuous);
                    }
                    points.push(hi);
                    links.push(Link::Continuous);
                }
            }
        }
        Ok(Grid { points, links })
    }

    pub(crate) fn from_parts(points: Vec<f64>, links: Vec<Link>) -> Grid {
        debug_assert_eq!(points.len(), links.len() + 1);
        Grid { points, links }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// `links()[j]` joins `points()[j]` and `points()[j + 1]`.
    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.points[0]
    }

    pub fn end(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Index of the grid point within [`TOL_MEMBER`] of `t`.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let idx = self.points.partition_point(|&p| p < t - TOL_MEMBER);
        self.points
            .get(idx)
            .filter(|&&p| (p - t).abs() <= TOL_MEMBER)
            .map(|_| idx)
    }

    /// Forward jump of the `i`-th grid point.
    pub fn sigma_at(&self, i: usize) -> f64 {
        match self.links.get(i) {
            Some(Link::Jump) => self.points[i + 1],
            _ => self.points[i],
        }
    }

    pub fn mu_at(&self, i: usize) -> f64 {
        match self.links.get(i) {
            Some(Link::Jump) => self.points[i + 1] - self.points[i],
            _ => 0.0,
        }
    }

    /// Weight that point `j` receives from the link to its right: `h/2` for a
    /// trapezoid panel, `mu` across a scattered gap, 0 at the last point.
    pub fn left_weight(&self, j: usize) -> f64 {
        match self.links.get(j) {
            Some(Link::Continuous) => 0.5 * (self.points[j + 1] - self.points[j]),
            Some(Link::Jump) => self.points[j + 1] - self.points[j],
            None => 0.0,
        }
    }

    /// Weight that point `j` receives from the link to its left: `h/2` for a
    /// trapezoid panel, otherwise 0.
    pub fn right_weight(&self, j: usize) -> f64 {
        match j.checked_sub(1).map(|l| self.links[l]) {
            Some(Link::Continuous) => 0.5 * (self.points[j] - self.points[j - 1]),
            _ => 0.0,
        }
    }
}
