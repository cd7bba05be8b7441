//! Random time scales and kernels shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use tsvolterra::{Component, TimeScale, VolterraProblem};

/// Components sit on a lattice of step 1/32 so grids with `h = 2^-k`, `k >= 5`,
/// nest under bisection.
pub const UNIT: f64 = 1.0 / 32.0;

/// Up to 5 intervals and up to 10 points in random order, spanning at most ~2.
pub fn random_scale(rng: &mut impl Rng, need_interval: bool) -> TimeScale {
    let mut n_int = rng.random_range(0..=5usize);
    let n_pt = rng.random_range(0..=10usize);
    if need_interval && n_int == 0 {
        n_int = 1;
    }
    if n_int + n_pt == 0 {
        n_int = 1;
    }
    let mut kinds: Vec<bool> = (0..n_int).map(|_| true).chain((0..n_pt).map(|_| false)).collect();
    for i in (1..kinds.len()).rev() {
        kinds.swap(i, rng.random_range(0..=i));
    }
    let mut pos = rng.random_range(-8..=8i32);
    let mut comps = Vec::new();
    for (i, is_interval) in kinds.into_iter().enumerate() {
        if i > 0 {
            pos += rng.random_range(1..=3);
        }
        if is_interval {
            let len = rng.random_range(1..=4);
            comps.push(Component::Interval {
                lo: pos as f64 * UNIT,
                hi: (pos + len) as f64 * UNIT,
            });
            pos += len;
        } else {
            comps.push(Component::Point { t: pos as f64 * UNIT });
        }
    }
    TimeScale::new(comps).expect("lattice components are ordered")
}

pub fn random_kernel(rng: &mut impl Rng) -> String {
    let c: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
    match rng.random_range(0..4) {
        0 => format!("{:?} + {:?}*t + {:?}*s", c[0], c[1], c[2]),
        1 => format!("{:?}*exp({:?}*(t - s))", c[0], c[1]),
        2 => format!("{:?}*exp({:?}*s)*(1 + {:?}*t*t)", c[0], c[1], c[2]),
        _ => format!("{:?} + {:?}*t*s - {:?}*s^2", c[0], c[1], c[2]),
    }
}

pub fn random_forcing(rng: &mut impl Rng) -> String {
    let c: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
    match rng.random_range(0..3) {
        0 => format!("1 + {:?}*sin(t)", c[0]),
        1 => format!("{:?} + {:?}*t", c[0], c[1]),
        _ => format!("exp({:?}*t)", c[0]),
    }
}

/// Builds a problem on `ts` whose kernel is rescaled so that `0 < M <= 3`.
pub fn random_problem(rng: &mut impl Rng, ts: TimeScale, h_max: f64) -> VolterraProblem {
    let f = random_forcing(rng);
    loop {
        let k = random_kernel(rng);
        let raw = VolterraProblem::from_strs(ts.clone(), h_max, &f, &k).expect("valid problem");
        if raw.m() < 1e-3 {
            continue;
        }
        let scale = 3.0 * rng.random_range(0.2..1.0) / raw.m();
        return VolterraProblem::from_strs(ts, h_max, &f, &format!("{scale:?}*({k})"))
            .expect("valid problem");
    }
}
