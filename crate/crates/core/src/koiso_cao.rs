//! Solutions with constant conformal factor and the Koiso–Cao
//! Kähler–Ricci solitons.
//!
//! Here `ẏ − ẋ = 1`, so `y = y₀ + ẏ₀(e^t − 1)`, `x = x₀ − t + ẏ₀(e^t − 1)`,
//! and `φ` solves the linear equation `(Gφ)˙ = F` with
//! `G = exp(mt − a e^t)`, `F = (m − (m−k)e^t) G`, where `a = (m−1)ẏ₀`.
//! The profile closes up at `T = log((m+k)/(m−k))` exactly when
//! `J(a) = ∫₀^T F dt` vanishes.

use serde::{Deserialize, Serialize};

use crate::numeric::{quad, roots};
use crate::ode::dopri::{Dopri5, StepControl};
use crate::{Branch, Error, Params, ProfileState, Result, Trajectory};

const A_SWITCH: f64 = 0.5;

/// `H_m = ∫₀^Q κ^m e^{−aκ} dκ`.
///
/// Uses the closed form at `a = 0`, adaptive quadrature for `a < 0.5`
/// (where the recursion loses accuracy) and otherwise the upward recursion
/// `a H_j = j H_{j−1} − Q^j e^{−aQ}` from `H_0 = (1 − e^{−aQ})/a`.
pub fn h_moment(m: u32, a: f64, q: f64) -> f64 {
    if a == 0.0 {
        return q.powi(m as i32 + 1) / f64::from(m + 1);
    }
    if a < A_SWITCH {
        return quad::integrate(|s| s.powi(m as i32) * (-a * s).exp(), 0.0, q, 0.0, 1e-14);
    }
    let e = (-a * q).exp();
    let mut h = -(-a * q).exp_m1() / a;
    let mut qj = 1.0;
    for j in 1..=m {
        qj *= q;
        h = (f64::from(j) * h - qj * e) / a;
    }
    h
}

/// `Q = (m+k)/(m−k) = e^T`.
pub fn q_value(params: &Params) -> f64 {
    (params.mf() + params.kf()) / (params.mf() - params.kf())
}

/// Length `T = log((m+k)/(m−k))` of the profile interval.
pub fn cao_length(params: &Params) -> f64 {
    q_value(params).ln()
}

/// `S(a) = H_{m−1} + (k−m) H_m` with upper limit `Q`.
pub fn s_of_a(params: &Params, a: f64) -> f64 {
    let q = q_value(params);
    h_moment(params.m - 1, a, q) + (params.kf() - params.mf()) * h_moment(params.m, a, q)
}

fn f_of_t(params: &Params, a: f64, t: f64) -> f64 {
    let (m, k) = (params.mf(), params.kf());
    (m - (m - k) * t.exp()) * g_of_t(params, a, t)
}

fn g_of_t(params: &Params, a: f64, t: f64) -> f64 {
    (params.mf() * t - a * t.exp()).exp()
}

/// `J(a) = ∫₀^T F dt`; `φ(T) = J(a)/G(T)`.
pub fn quadrature_objective(params: &Params, a: f64) -> f64 {
    quad::integrate(|t| f_of_t(params, a, t), 0.0, cao_length(params), 1e-16, 1e-15)
}

/// Which function is driven to zero to pick `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// `J(a)`: literally `φ(T) = 0`.
    #[serde(rename = "quadrature_J")]
    QuadratureJ,
    /// `S(a)` built from the moments `H_{m−1}`, `H_m`.
    #[serde(rename = "paper_S")]
    MomentS,
}

impl Objective {
    pub fn as_str(&self) -> &'static str {
        match self {
            Objective::QuadratureJ => "quadrature_J",
            Objective::MomentS => "paper_S",
        }
    }

    pub fn eval(&self, params: &Params, a: f64) -> f64 {
        match self {
            Objective::QuadratureJ => quadrature_objective(params, a),
            Objective::MomentS => s_of_a(params, a),
        }
    }
}

/// Root of `objective` on `(δ, m(m−k))`, by bisection.
pub fn solve_cao_parameter(params: &Params, objective: Objective) -> Result<f64> {
    params.validate()?;
    let hi = params.mf() * (params.mf() - params.kf());
    let what = match objective {
        Objective::QuadratureJ => "J(a)",
        Objective::MomentS => "S(a)",
    };
    roots::bisect(what, |a| objective.eval(params, a), 1e-12, hi, 200)
}

/// Initial data at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaoData {
    pub a: f64,
    pub x0: f64,
    pub y0: f64,
    pub xd0: f64,
    pub yd0: f64,
    pub phi0: f64,
    pub phid0: f64,
}

impl CaoData {
    pub fn state(&self) -> ProfileState {
        ProfileState::from_fields(0.0, [self.x0, self.xd0, self.y0, self.yd0, self.phi0, self.phid0])
    }

    /// Residuals of `ẏ₀ − ẋ₀ = 1`, `(1 − m e^{x₀−y₀})ẏ₀ = y₀` and
    /// `φ̇₀ = [(m−1)ẏ₀ − m]φ₀ + m − e^{y₀−x₀}`.
    pub fn condition_residuals(&self, params: &Params) -> [f64; 3] {
        let m = params.mf();
        [
            self.yd0 - self.xd0 - 1.0,
            (1.0 - m * (self.x0 - self.y0).exp()) * self.yd0 - self.y0,
            self.phid0 - ((m - 1.0) * self.yd0 - m) * self.phi0 - m + (self.y0 - self.x0).exp(),
        ]
    }
}

/// `ẏ₀ = a/(m−1)`, `y₀ = −kẏ₀/(m−k)`, `x₀ = y₀ − log(m−k)`, `ẋ₀ = ẏ₀ − 1`,
/// `φ₀ = 0`, `φ̇₀ = k`.
pub fn initial_data(params: &Params, a: f64) -> CaoData {
    let (m, k) = (params.mf(), params.kf());
    let yd0 = a / (m - 1.0);
    let y0 = -k * yd0 / (m - k);
    CaoData {
        a,
        x0: y0 - (m - k).ln(),
        y0,
        xd0: yd0 - 1.0,
        yd0,
        phi0: 0.0,
        phid0: k,
    }
}

/// Closed-form `x, y` and quadrature `φ` on `grid` (starting at `0`), for any
/// `a`; no boundary checks.
pub fn cao_samples(params: &Params, a: f64, grid: &[f64]) -> Vec<ProfileState> {
    let d = initial_data(params, a);
    let (m, k) = (params.mf(), params.kf());
    let integral = quad::cumulative(|t| f_of_t(params, a, t), grid);
    grid.iter()
        .zip(integral)
        .map(|(&t, gphi)| {
            let et = t.exp();
            let grow = d.yd0 * (et - 1.0);
            let phi = gphi / g_of_t(params, a, t);
            let phid = (a * et - m) * phi + m - (m - k) * et;
            ProfileState::from_fields(
                t,
                [d.x0 - t + grow, d.yd0 * et - 1.0, d.y0 + grow, d.yd0 * et, phi, phid],
            )
        })
        .collect()
}

/// `φ(T)` from integrating `φ̇ = (a e^t − m)φ + m − (m−k)e^t` numerically.
pub fn phi_end_by_ode(params: &Params, a: f64, rel_tol: f64) -> Result<f64> {
    let (m, k) = (params.mf(), params.kf());
    let t_end = cao_length(params);
    let f = move |t: f64, y: &[f64; 1]| {
        let et = t.exp();
        [(a * et - m) * y[0] + m - (m - k) * et]
    };
    let mut ctl = StepControl::new(rel_tol, rel_tol * 1e-3);
    ctl.h_max = t_end / 16.0;
    let mut solver = Dopri5::new(f, 0.0, [0.0], ctl);
    while solver.t() != t_end {
        solver.step(t_end).map_err(|e| Error::StepFailure {
            t: e.t,
            reason: e.reason,
        })?;
    }
    Ok(solver.y()[0])
}

/// `φ(T)` from the quadrature route: `J(a)/G(T)`.
pub fn phi_end_by_quadrature(params: &Params, a: f64) -> f64 {
    quadrature_objective(params, a) / g_of_t(params, a, cao_length(params))
}

#[derive(Debug, Clone)]
pub struct CaoSolution {
    pub params: Params,
    pub a: f64,
    pub t_end: f64,
    pub objective: Objective,
    pub j_residual: f64,
    pub s_residual: f64,
    pub trajectory: Trajectory,
}

/// Samples the profile for parameter `a` on `n_samples ≥ 2` equally spaced
/// points of `[0, T]`, with no boundary checks.
pub fn cao_trajectory(params: &Params, a: f64, n_samples: usize) -> Result<Trajectory> {
    params.validate()?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "Koiso-Cao parameter must be positive, got {a}"
        )));
    }
    let n = n_samples.max(2);
    let t_end = cao_length(params);
    let grid: Vec<f64> = (0..n)
        .map(|i| {
            if i == n - 1 {
                t_end
            } else {
                t_end * i as f64 / (n - 1) as f64
            }
        })
        .collect();
    Trajectory::new(*params, cao_samples(params, a, &grid), Branch::KoisoCao, Some(a))
}

/// [`cao_trajectory`] followed by [`Trajectory::check_endpoints`].
pub fn build_cao_profile(params: &Params, a: f64, n_samples: usize, objective: Objective) -> Result<CaoSolution> {
    let trajectory = cao_trajectory(params, a, n_samples)?;
    trajectory.check_endpoints()?;
    Ok(CaoSolution {
        params: *params,
        a,
        t_end: trajectory.t_end(),
        objective,
        j_residual: quadrature_objective(params, a),
        s_residual: s_of_a(params, a),
        trajectory,
    })
}
