//! Shooting from the left endpoint over the two-parameter family of regular
//! starts `(x₀, y₀)`, grid scans and Newton refinement.
//!
//! A shot integrates from the series start until `φ` falls to a small
//! landing level, then fits the regular right-endpoint expansion (with
//! unknown `x(T)`, `y(T)`, slope `φ̇(T) = −c` and distance `τ` to the zero)
//! to the landed values of `x, y, φ, φ̇`. The two mismatch components are
//!
//! * `k − c`, i.e. `φ̇(T) + k`;
//! * `τ (ẏ − Ẏ)`, the amplitude of the singular `1/φ` mode in `ẏ` that the
//!   regular expansion cannot absorb. It vanishes exactly when the right
//!   endpoint satisfies `ẏ(T) = y(T)e^{y(T)−x(T)}/k`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::classify_case;
use crate::ode::{self, EndpointSeries, IntegrateOptions, Side, StopReason};
use crate::{Error, Params, ProfileState, Result, Trajectory};

/// Left-endpoint start for the free data `(x₀, y₀)`.
pub fn admissible_start(params: &Params, x0: f64, y0: f64) -> ProfileState {
    ode::taylor_start(params, Side::Left, x0, y0)
}

/// `10 log((m+k)/(m−k))`.
pub fn default_t_max(params: &Params) -> f64 {
    10.0 * ((params.mf() + params.kf()) / (params.mf() - params.kf())).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminatedBy {
    PhiZero,
    Overflow,
    TMax,
    StepFailure,
}

impl TerminatedBy {
    pub fn as_str(&self) -> &'static str {
        match self {
            TerminatedBy::PhiZero => "phi_zero",
            TerminatedBy::Overflow => "overflow",
            TerminatedBy::TMax => "t_max",
            TerminatedBy::StepFailure => "step_failure",
        }
    }
}

impl fmt::Display for TerminatedBy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of one shot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShotResult {
    pub x0: f64,
    pub y0: f64,
    /// `φ` returned to zero and the right-endpoint fit succeeded.
    pub hit: bool,
    pub t_hit: Option<f64>,
    /// `φ̇(T) + k`.
    pub mismatch1: Option<f64>,
    /// Singular-mode amplitude at the right endpoint.
    pub mismatch2: Option<f64>,
    /// `max |E(t) − E(t₀)|` along the integrated part.
    pub drift: Option<f64>,
    /// Deviation of `σ` from the best `q₀ + q₁e^t` fit.
    pub nontriviality: Option<f64>,
    pub terminated_by: TerminatedBy,
}

impl ShotResult {
    /// Euclidean norm of the two mismatch components; infinite on a miss.
    pub fn mismatch_norm(&self) -> f64 {
        match (self.hit, self.mismatch1, self.mismatch2) {
            (true, Some(a), Some(b)) => a.hypot(b),
            _ => f64::INFINITY,
        }
    }
}

/// A shot together with its integrated trajectory.
#[derive(Debug, Clone)]
pub struct Shot {
    pub result: ShotResult,
    pub trajectory: Option<Trajectory>,
}

struct RightFit {
    c: f64,
    tau: f64,
    yd_gap: f64,
}

// Fits the regular right-endpoint expansion to the landed state by
// fixed-point iteration on (x_T, y_T, c, τ).
fn fit_right_endpoint(params: &Params, s: &ProfileState) -> Option<RightFit> {
    let m = params.mf();
    let (mut xt, mut yt, mut c) = (s.x, s.y, -s.phid);
    if !(c > 0.0) {
        return None;
    }
    let mut tau = s.phi / c;
    for _ in 0..100 {
        let f = EndpointSeries::new(m, xt, yt, -c, params.series_order).fields_at(-tau);
        let (dx, dy, dphi, dphid) = (s.x - f[0], s.y - f[2], s.phi - f[4], s.phid - f[5]);
        xt += dx;
        yt += dy;
        c -= dphid;
        if !(c > 0.0) {
            return None;
        }
        tau += dphi / c;
        let scale = 1.0 + s.x.abs().max(s.y.abs()).max(c);
        if dx.abs().max(dy.abs()).max(dphid.abs()) <= 4.0 * f64::EPSILON * scale
            && dphi.abs() <= 4.0 * f64::EPSILON * s.phi
        {
            let f = EndpointSeries::new(m, xt, yt, -c, params.series_order).fields_at(-tau);
            return Some(RightFit {
                c,
                tau,
                yd_gap: s.yd - f[3],
            });
        }
        if !(tau.is_finite() && xt.is_finite() && yt.is_finite()) {
            return None;
        }
    }
    None
}

/// Shoots from `(x0, y0)` until `φ` returns to zero or `t_max` is reached.
pub fn shoot(params: &Params, x0: f64, y0: f64, t_max: f64) -> ShotResult {
    shoot_full(params, x0, y0, t_max).result
}

/// As [`shoot`], also returning the integrated trajectory.
pub fn shoot_full(params: &Params, x0: f64, y0: f64, t_max: f64) -> Shot {
    let mut result = ShotResult {
        x0,
        y0,
        hit: false,
        t_hit: None,
        mismatch1: None,
        mismatch2: None,
        drift: None,
        nontriviality: None,
        terminated_by: TerminatedBy::StepFailure,
    };
    if params.validate().is_err() || !(t_max > params.start_offset) || !x0.is_finite() || !y0.is_finite() {
        return Shot {
            result,
            trajectory: None,
        };
    }
    let start = admissible_start(params, x0, y0);
    if !start.is_finite() || start.phi <= 0.0 {
        return Shot {
            result,
            trajectory: None,
        };
    }
    let opts = IntegrateOptions {
        phi_stop: 0.5 * params.kf() * params.start_offset,
        ..IntegrateOptions::from_params(params)
    };
    let run = match ode::integrate_with(params, &start, t_max, &opts) {
        Ok(run) => run,
        Err(e) => {
            log::debug!("shot ({x0}, {y0}) failed: {e}");
            return Shot {
                result,
                trajectory: None,
            };
        }
    };
    let traj = run.trajectory;
    result.drift = Some(ode::max_drift(params, &traj));
    if traj.len() >= 2 {
        result.nontriviality = Some(classify_case(params, &traj, 1e-6).sup_dev);
    }
    result.terminated_by = match run.stop {
        StopReason::Reached => TerminatedBy::TMax,
        StopReason::Overflow => TerminatedBy::Overflow,
        StopReason::PhiFloor => TerminatedBy::PhiZero,
    };
    if run.stop == StopReason::PhiFloor {
        let land = traj.samples()[traj.len() - 1];
        if let Some(fit) = fit_right_endpoint(params, &land) {
            result.hit = true;
            result.t_hit = Some(land.t + fit.tau);
            result.mismatch1 = Some(params.kf() - fit.c);
            result.mismatch2 = Some(fit.tau * fit.yd_gap);
        }
    }
    Shot {
        result,
        trajectory: Some(traj),
    }
}

/// One scan axis: `n` equally spaced values from `lo` to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridAxis {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || n < 2 || hi < lo {
            return Err(Error::InvalidParams(format!(
                "grid axis needs finite lo <= hi and n >= 2, got {lo}:{hi}:{n}"
            )));
        }
        Ok(Self { lo, hi, n })
    }

    /// Axis centred on `c` with half-width `h`.
    pub fn around(c: f64, h: f64, n: usize) -> Result<Self> {
        Self::new(c - h, c + h, n)
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.value(i)).collect()
    }
}

impl FromStr for GridAxis {
    type Err = Error;

    /// Parses `lo:hi:n`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("expected lo:hi:n, got {s:?}")));
        }
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad number {p:?}: {e}")))
        };
        let n = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|e| Error::Parse(format!("bad count {:?}: {e}", parts[2])))?;
        Self::new(num(parts[0])?, num(parts[1])?, n).map_err(|e| Error::Parse(e.to_string()))
    }
}

impl fmt::Display for GridAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.n)
    }
}

/// Results of a scan in row-major order: row index over `y0`, column
/// index over `x0`.
#[derive(Debug, Clone, Serialize)]
pub struct ScanGrid {
    pub x_axis: GridAxis,
    pub y_axis: GridAxis,
    pub t_max: f64,
    pub results: Vec<ShotResult>,
}

impl ScanGrid {
    pub fn at(&self, row: usize, col: usize) -> &ShotResult {
        &self.results[row * self.x_axis.n + col]
    }

    /// Index of the hit with the smallest mismatch norm.
    pub fn best(&self) -> Option<usize> {
        self.results
            .iter()
            .enumerate()
            .filter(|(_, r)| r.hit)
            .min_by(|a, b| a.1.mismatch_norm().total_cmp(&b.1.mismatch_norm()))
            .map(|(i, _)| i)
    }
}

/// Shoots from every grid node. With `parallel` the nodes are distributed
/// over the rayon pool; the result order is the same either way.
pub fn scan(params: &Params, x_axis: GridAxis, y_axis: GridAxis, t_max: f64, parallel: bool) -> ScanGrid {
    let nodes: Vec<(f64, f64)> = (0..y_axis.n)
        .flat_map(|r| (0..x_axis.n).map(move |c| (x_axis.value(c), y_axis.value(r))))
        .collect();
    let results = if parallel {
        nodes.par_iter().map(|&(x, y)| shoot(params, x, y, t_max)).collect()
    } else {
        nodes.iter().map(|&(x, y)| shoot(params, x, y, t_max)).collect()
    };
    ScanGrid {
        x_axis,
        y_axis,
        t_max,
        results,
    }
}

/// A converged refinement.
#[derive(Debug, Clone, Serialize)]
pub struct Refined {
    pub x0: f64,
    pub y0: f64,
    pub iterations: usize,
    pub mismatch_norm: f64,
    pub shot: ShotResult,
    /// Nontriviality above `1e-3` at a converged root: a solution outside the
    /// three known cases.
    pub candidate: bool,
}

fn mismatch(params: &Params, x: f64, y: f64, t_max: f64) -> Option<([f64; 2], ShotResult)> {
    let r = shoot(params, x, y, t_max);
    match (r.hit, r.mismatch1, r.mismatch2) {
        (true, Some(a), Some(b)) => Some(([a, b], r)),
        _ => None,
    }
}

/// Damped Newton iteration on the mismatch map, Jacobian by forward
/// differences with step `1e-6`. Converged once the mismatch norm drops
/// below `1e-10`.
pub fn refine(params: &Params, seed: (f64, f64), max_iter: usize, t_max: f64) -> Result<Refined> {
    const FD_STEP: f64 = 1e-6;
    const TARGET: f64 = 1e-10;
    let (mut x, mut y) = seed;
    let fail = |iterations, mismatch, reason: &str| Error::NoConvergence {
        iterations,
        mismatch,
        reason: reason.to_string(),
    };
    let (mut f, mut shot) =
        mismatch(params, x, y, t_max).ok_or_else(|| fail(0, f64::INFINITY, "seed shot does not hit"))?;
    let mut norm = f[0].hypot(f[1]);
    for it in 0..=max_iter {
        if norm < TARGET {
            let candidate = shot.nontriviality.is_some_and(|n| n > 1e-3);
            if candidate {
                log::info!("candidate solution at x0 = {x:e}, y0 = {y:e}");
            }
            return Ok(Refined {
                x0: x,
                y0: y,
                iterations: it,
                mismatch_norm: norm,
                shot,
                candidate,
            });
        }
        if it == max_iter {
            break;
        }
        let (fx, _) = mismatch(params, x + FD_STEP, y, t_max)
            .ok_or_else(|| fail(it, norm, "Jacobian shot in x0 does not hit"))?;
        let (fy, _) = mismatch(params, x, y + FD_STEP, t_max)
            .ok_or_else(|| fail(it, norm, "Jacobian shot in y0 does not hit"))?;
        let j = [
            [(fx[0] - f[0]) / FD_STEP, (fy[0] - f[0]) / FD_STEP],
            [(fx[1] - f[1]) / FD_STEP, (fy[1] - f[1]) / FD_STEP],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(fail(it, norm, "singular Jacobian"));
        }
        let dx = -(j[1][1] * f[0] - j[0][1] * f[1]) / det;
        let dy = -(j[0][0] * f[1] - j[1][0] * f[0]) / det;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let (xn, yn) = (x + lambda * dx, y + lambda * dy);
            if let Some((fnew, s)) = mismatch(params, xn, yn, t_max) {
                let nn = fnew[0].hypot(fnew[1]);
                if nn < norm {
                    (x, y, f, shot, norm) = (xn, yn, fnew, s, nn);
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(fail(it + 1, norm, "line search found no decrease"));
        }
        log::debug!("refine {it}: ({x}, {y}) |F| = {norm:e}");
    }
    Err(fail(max_iter, norm, "iteration limit reached"))
}
