//! The profile system, its first integral, singular-endpoint launch and
//! numerical integration.
//!
//! The unknowns `x, y, φ` of `t` satisfy
//!
//! ```text
//! 2ẍ  = ẏ² − ẋ² + 1
//! φÿ  = (m−1)φẋẏ − φ̇ẏ − y e^{y−x}
//! φ̈  = (m−1)ẋφ̇ + mφ − m
//! ```
//!
//! together with the first-order constraint
//! `2ẋφ̇ − (2m−1)φẋ² + φẏ² + 2(y−1)e^{y−x} − φ + 2m = 0`, whose left side
//! times `e^x` is conserved along every solution of the system.

pub mod dopri;
mod residual;
mod series;

pub use residual::{residual_report, ResidualReport, ResidualSups};
pub use series::EndpointSeries;

use crate::numeric::roots;
use crate::{Branch, Derivative, Error, Params, ProfileState, Result, Trajectory};
use dopri::{Dopri5, Step, StepControl};

/// Right-hand side on the field array `(x, ẋ, y, ẏ, φ, φ̇)`. Divides by `φ`
/// without checking.
pub(crate) fn field_rhs(m: f64, f: &[f64; 6]) -> [f64; 6] {
    let [x, xd, y, yd, phi, phid] = *f;
    let xdd = 0.5 * (yd * yd - xd * xd + 1.0);
    let ydd = ((m - 1.0) * phi * xd * yd - phid * yd - y * (y - x).exp()) / phi;
    let phidd = (m - 1.0) * xd * phid + m * phi - m;
    [xd, xdd, yd, ydd, phid, phidd]
}

/// Derivatives of the unknowns at `s`.
///
/// Fails with [`Error::SingularPhi`] when `|φ| < phi_floor`; near an
/// endpoint use [`taylor_start`] instead.
pub fn rhs(params: &Params, s: &ProfileState) -> Result<Derivative> {
    if s.phi.abs() < params.phi_floor || !s.phi.is_finite() {
        return Err(Error::SingularPhi { t: s.t, phi: s.phi });
    }
    let d = field_rhs(params.mf(), &s.fields());
    Ok(Derivative {
        xd: d[0],
        xdd: d[1],
        yd: d[2],
        ydd: d[3],
        phid: d[4],
        phidd: d[5],
    })
}

/// Left side of the first-order constraint (without the `e^x` factor).
pub fn constraint(m: f64, s: &ProfileState) -> f64 {
    2.0 * s.xd * s.phid - (2.0 * m - 1.0) * s.phi * s.xd * s.xd
        + s.phi * s.yd * s.yd
        + 2.0 * (s.y - 1.0) * (s.y - s.x).exp()
        - s.phi
        + 2.0 * m
}

/// The conserved quantity `e^x` times the constraint's left side. It is
/// zero exactly on solutions that satisfy the constraint.
pub fn first_integral(params: &Params, s: &ProfileState) -> f64 {
    s.x.exp() * constraint(params.mf(), s)
}

/// The `y` equation with the `φ` denominator cleared:
/// `φÿ − (m−1)φẋẏ + φ̇ẏ + y e^{y−x}`.
pub fn ydd_cleared(m: f64, s: &ProfileState, ydd: f64) -> f64 {
    s.phi * ydd - (m - 1.0) * s.phi * s.xd * s.yd + s.phid * s.yd + s.y * (s.y - s.x).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// State of the regular solution launched from an endpoint with
/// `φ = 0`, `x = x0`, `y = y0`.
///
/// On the left the slope is `φ̇ = k` and the state is returned at
/// `t = start_offset`. On the right the slope is `φ̇ = −k` and the state is
/// returned at `t = −start_offset`, i.e. relative to the right endpoint;
/// shift by `T` to place it on `[0, T]`.
///
/// The expansion is carried to `params.series_order`; its first two orders
/// are the forced values `ẏ₀ = −y₀e^{y₀−x₀}/φ̇₀`,
/// `ẋ₀ = −[(y₀−1)e^{y₀−x₀}+m]/φ̇₀`, `φ̈₀ = (m−1)ẋ₀φ̇₀ − m`, `ẍ₀` from the
/// `x` equation and `ÿ₀` from the differentiated `y` equation.
pub fn taylor_start(params: &Params, side: Side, x0: f64, y0: f64) -> ProfileState {
    let (slope, t) = match side {
        Side::Left => (params.kf(), params.start_offset),
        Side::Right => (-params.kf(), -params.start_offset),
    };
    let series = EndpointSeries::new(params.mf(), x0, y0, slope, params.series_order);
    ProfileState::from_fields(t, series.fields_at(t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Reached the requested end time.
    Reached,
    /// `φ` fell through the stop level.
    PhiFloor,
    /// A field exceeded the overflow guard or became non-finite.
    Overflow,
}

#[derive(Debug, Clone, Copy)]
pub struct IntegrateOptions {
    /// Integration stops when `φ` crosses this level from above.
    pub phi_stop: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl IntegrateOptions {
    pub fn from_params(params: &Params) -> Self {
        Self {
            phi_stop: params.phi_floor,
            h_max: f64::INFINITY,
            max_steps: 200_000,
        }
    }
}

/// Result of [`integrate`]: accepted step points, the derivative at each of
/// them (for Hermite dense output) and why integration stopped.
#[derive(Debug, Clone)]
pub struct Integration {
    pub trajectory: Trajectory,
    pub derivatives: Vec<[f64; 6]>,
    pub stop: StopReason,
    pub rejected: usize,
}

impl Integration {
    /// Cubic Hermite interpolation between stored step points.
    pub fn dense(&self, t: f64) -> Option<ProfileState> {
        let s = self.trajectory.samples();
        if t < s[0].t || t > s[s.len() - 1].t {
            return None;
        }
        let i = s.partition_point(|p| p.t <= t).clamp(1, s.len().max(2) - 1);
        if s.len() == 1 {
            return Some(s[0]);
        }
        let (a, b) = (&s[i - 1], &s[i]);
        let f = dopri::hermite(
            a.t,
            &a.fields(),
            &self.derivatives[i - 1],
            b.t,
            &b.fields(),
            &self.derivatives[i],
            t,
        );
        Some(ProfileState::from_fields(t, f))
    }

    /// Resamples on `n ≥ 2` equally spaced points of the covered interval.
    pub fn resample(&self, n: usize) -> Result<Trajectory> {
        let (t0, t1) = (self.trajectory.t_start(), self.trajectory.t_end());
        let n = n.max(2);
        let samples = (0..n)
            .map(|i| {
                let t = if i == n - 1 {
                    t1
                } else {
                    t0 + (t1 - t0) * i as f64 / (n - 1) as f64
                };
                self.dense(t).expect("inside the covered interval")
            })
            .collect();
        let tr = &self.trajectory;
        Trajectory::new(*tr.params(), samples, tr.branch(), tr.a())
    }
}

/// Integrates from `start` towards `t_target` (either direction) with the
/// default stop rules: `φ` crossing `phi_floor` from above, overflow, or
/// arrival.
pub fn integrate(params: &Params, start: &ProfileState, t_target: f64) -> Result<Integration> {
    integrate_with(params, start, t_target, &IntegrateOptions::from_params(params))
}

pub fn integrate_with(
    params: &Params,
    start: &ProfileState,
    t_target: f64,
    opts: &IntegrateOptions,
) -> Result<Integration> {
    params.validate()?;
    if !start.is_finite() {
        return Err(Error::InvalidParams("start state is not finite".into()));
    }
    let m = params.mf();
    let mut ctl = StepControl::new(params.rel_tol, params.abs_tol);
    ctl.h_max = opts.h_max;
    ctl.max_steps = opts.max_steps;
    let f = move |_t: f64, y: &[f64; 6]| field_rhs(m, y);

    let mut samples = vec![*start];
    let mut derivs = vec![field_rhs(m, &start.fields())];
    let mut stepper = Dopri5::new(f, start.t, start.fields(), ctl);
    let guard = params.overflow_guard;
    let mut stop = StopReason::Reached;

    while stepper.t() != t_target {
        let step = stepper.step(t_target).map_err(|e| Error::StepFailure {
            t: e.t,
            reason: e.reason,
        })?;
        if step.y1.iter().any(|v| !v.is_finite() || v.abs() > guard) {
            stop = StopReason::Overflow;
            break;
        }
        let (phi0, phi1) = (step.y0[4], step.y1[4]);
        if phi0 > opts.phi_stop && phi1 <= opts.phi_stop {
            let (t_hit, fields) = land(params, &step, opts.phi_stop, &ctl)?;
            samples.push(ProfileState::from_fields(t_hit, fields));
            derivs.push(field_rhs(m, &fields));
            stop = StopReason::PhiFloor;
            break;
        }
        samples.push(ProfileState::from_fields(step.t1, step.y1));
        derivs.push(step.f1);
    }

    if samples.len() > 1 && samples[1].t < samples[0].t {
        samples.reverse();
        derivs.reverse();
    }
    let rejected = stepper.rejected;
    let trajectory = Trajectory::new(*params, samples, Branch::Shot, None)?;
    Ok(Integration {
        trajectory,
        derivatives: derivs,
        stop,
        rejected,
    })
}

// Locates the level crossing inside an accepted step by bisection on the
// Hermite interpolant, then re-integrates from the step start to that time
// so the returned state carries full integrator accuracy.
fn land(params: &Params, step: &Step<6>, level: f64, ctl: &StepControl) -> Result<(f64, [f64; 6])> {
    let g = |t: f64| step.hermite(t)[4] - level;
    let (lo, hi) = if step.t0 < step.t1 {
        (step.t0, step.t1)
    } else {
        (step.t1, step.t0)
    };
    let t_hit = roots::bisect("phi - level", g, lo, hi, 200).unwrap_or(step.t1);
    if t_hit == step.t1 || t_hit == step.t0 {
        let y = if t_hit == step.t1 { step.y1 } else { step.y0 };
        return Ok((t_hit, y));
    }
    let m = params.mf();
    let mut inner = Dopri5::new(move |_t, y: &[f64; 6]| field_rhs(m, y), step.t0, step.y0, *ctl);
    while inner.t() != t_hit {
        inner.step(t_hit).map_err(|e| Error::StepFailure {
            t: e.t,
            reason: e.reason,
        })?;
    }
    Ok((t_hit, *inner.y()))
}

/// `max_t |E(t) − E(t₀)|` of the first integral along a trajectory.
pub fn max_drift(params: &Params, traj: &Trajectory) -> f64 {
    let s = traj.samples();
    let e0 = first_integral(params, &s[0]);
    s.iter()
        .map(|p| (first_integral(params, p) - e0).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p2() -> Params {
        Params::new(2, 1).unwrap()
    }

    #[test]
    fn rhs_zero_derivative_state() {
        let s = ProfileState::from_fields(0.0, [0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let d = rhs(&p2(), &s).unwrap();
        assert_eq!(d.xdd, 0.5);
        assert_eq!(d.ydd, 0.0);
        assert_eq!(d.phidd, 0.0);
    }

    #[test]
    fn rhs_y_equation_by_hand() {
        // [(m−1)φẋẏ − φ̇ẏ − y e^{y−x}]/φ with m = 2, x = 0, ẋ = 1, y = 0.1,
        // ẏ = 0.2, φ = 0.5, φ̇ = 0.3:
        // (0.1 − 0.06 − 0.1·e^{0.1}) / 0.5 = 0.08 − 0.2·1.1051709180756477
        let expected = -0.141_034_183_615_129_54;
        let s = ProfileState::from_fields(0.0, [0.0, 1.0, 0.1, 0.2, 0.5, 0.3]);
        let d = rhs(&p2(), &s).unwrap();
        assert!((d.ydd - expected).abs() < 1e-15, "{}", d.ydd);
    }

    #[test]
    fn rhs_y_zero_gives_flat_y() {
        for xd in [-2.0, 0.0, 0.7] {
            let s = ProfileState::from_fields(0.0, [0.3, xd, 0.0, 0.0, 0.4, -0.2]);
            assert_eq!(rhs(&p2(), &s).unwrap().ydd, 0.0);
        }
    }

    #[test]
    fn rhs_refuses_singular_phi() {
        let s = ProfileState::from_fields(0.0, [0.0, 0.0, 0.0, 0.0, 1e-13, 1.0]);
        assert!(matches!(rhs(&p2(), &s), Err(Error::SingularPhi { .. })));
    }

    #[test]
    fn first_integral_examples() {
        let p = p2();
        let s = ProfileState::from_fields(0.0, [0.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        assert!((first_integral(&p, &s) - 3.0).abs() < 1e-15);
        for a in [-0.4, -0.28, -0.1] {
            let x0 = -(a + 2.0f64).ln();
            let s = ProfileState::from_fields(0.0, [x0, a, 0.0, 0.0, 0.0, 1.0]);
            assert!(first_integral(&p, &s).abs() < 1e-14);
        }
    }

    #[test]
    fn taylor_start_constraints() {
        let p = p2();
        for (x0, y0) in [(-(3f64.ln()), 0.0), (-0.25, -0.25), (0.4, 0.3), (-1.0, 0.8)] {
            let s = taylor_start(&p, Side::Left, x0, y0);
            assert!(first_integral(&p, &s).abs() <= 1e-10 * x0.exp(), "{x0} {y0}");
            let d = rhs(&p, &s).unwrap();
            assert!(ydd_cleared(p.mf(), &s, d.ydd).abs() < 1e-10);
            let r = taylor_start(&p, Side::Right, x0, y0);
            assert!(r.t < 0.0 && r.phi > 0.0 && r.phid < 0.0);
            assert!(first_integral(&p, &r).abs() <= 1e-10 * x0.exp());
        }
    }

    #[test]
    fn taylor_start_y0_zero() {
        let p = p2();
        let x0 = -(3f64.ln());
        let s = taylor_start(&p, Side::Left, x0, 0.0);
        assert_eq!(s.y, 0.0);
        assert_eq!(s.yd, 0.0);
        // ẋ₀ = (e^{−x₀} − m)/k = 1, so ẋ(ε) ≈ 1 + ẍ₀ε with ẍ₀ = 0
        assert!((s.xd - 1.0).abs() < 1e-12);
    }

    #[test]
    fn integrates_reduced_exact_solution() {
        // y ≡ 0, φ ≡ 1 gives ẍ = (1 − ẋ²)/2 with ẋ(0) = 0: x = 2 log cosh(t/2).
        let p = p2().with_tolerances(1e-12, 1e-14).unwrap();
        let s = ProfileState::from_fields(0.0, [0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let run = integrate(&p, &s, 1.0).unwrap();
        assert_eq!(run.stop, StopReason::Reached);
        let end = run.trajectory.samples().last().unwrap();
        assert_eq!(end.t, 1.0);
        assert!((end.x - 2.0 * (0.5f64).cosh().ln()).abs() < 1e-9);
        assert_eq!(end.phi, 1.0);
        assert!((end.xd - (0.5f64).tanh()).abs() < 1e-9);
    }

    #[test]
    fn backward_integration_is_sorted() {
        let p = p2();
        let s = ProfileState::from_fields(1.0, [0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let run = integrate(&p, &s, 0.0).unwrap();
        assert_eq!(run.trajectory.t_start(), 0.0);
        assert_eq!(run.trajectory.t_end(), 1.0);
    }

    #[test]
    fn stops_at_phi_floor() {
        // φ̈ = (m−1)ẋφ̇ + mφ − m drives φ from 0.5 down through zero.
        let p = p2();
        let s = ProfileState::from_fields(0.0, [0.0, 0.0, 0.0, 0.0, 0.5, -1.0]);
        let run = integrate(&p, &s, 5.0).unwrap();
        assert_eq!(run.stop, StopReason::PhiFloor);
        let last = run.trajectory.samples().last().unwrap();
        assert!(last.phi.abs() < 1e-9);
    }
}
