//! Geometric quantities along a profile, the gradient-soliton residuals,
//! case classification, the `t ↦ T − t` inversion and the radial variable.

use serde::Serialize;

use crate::numeric::fd;
use crate::ode::dopri::{self, Dopri5, StepControl};
use crate::{Branch, Error, Params, ProfileState, Result, Trajectory};

/// Pointwise geometric data; `κ = e^t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometricSample {
    pub t: f64,
    /// `(m−1)(ẋ+1)e^{−t}`
    pub alpha: f64,
    /// `(m−1)(2ẍ − ẏ² + ẋ² − 1)/2`
    pub beta: f64,
    /// Conformal factor `e^{(x−y+t)/2}`.
    pub sigma: f64,
    /// Soliton function `(m−1)y`.
    pub f: f64,
    /// Scalar curvature `s`, from `e^t s/2 = m(m−1) − m(m−1)φ − (2m−1)φ̇ − φ̈`.
    pub scal: f64,
    /// `Δκ = 2(φ̇ + mφ)`
    pub lap_kappa: f64,
    /// `|∇κ|² = 2e^t φ`
    pub grad_kappa_sq: f64,
}

pub fn sigma(s: &ProfileState) -> f64 {
    ((s.x - s.y + s.t) / 2.0).exp()
}

fn phidd_from_system(m: f64, s: &ProfileState) -> f64 {
    (m - 1.0) * s.xd * s.phid + m * s.phi - m
}

// e^t s / 2 given φ̈.
fn half_scal_weighted(m: f64, s: &ProfileState, phidd: f64) -> f64 {
    m * (m - 1.0) - m * (m - 1.0) * s.phi - (2.0 * m - 1.0) * s.phid - phidd
}

fn column(traj: &Trajectory, f: impl Fn(&ProfileState) -> f64) -> Vec<f64> {
    traj.samples().iter().map(f).collect()
}

/// Geometric samples. `φ̈` comes from the `φ` equation; `ẍ` in `β` is
/// differentiated numerically from the stored `ẋ`, so `β` measures how well
/// the trajectory satisfies the `x` equation.
pub fn geometric_samples(params: &Params, traj: &Trajectory) -> Vec<GeometricSample> {
    let m = params.mf();
    let xdd = fd::derivative(&traj.times(), &column(traj, |s| s.xd));
    traj.samples()
        .iter()
        .zip(xdd)
        .map(|(s, xdd)| {
            let phidd = phidd_from_system(m, s);
            GeometricSample {
                t: s.t,
                alpha: (m - 1.0) * (s.xd + 1.0) * (-s.t).exp(),
                beta: (m - 1.0) * (2.0 * xdd - s.yd * s.yd + s.xd * s.xd - 1.0) / 2.0,
                sigma: sigma(s),
                f: (m - 1.0) * s.y,
                scal: 2.0 * (-s.t).exp() * half_scal_weighted(m, s, phidd),
                lap_kappa: 2.0 * (s.phid + m * s.phi),
                grad_kappa_sq: 2.0 * s.t.exp() * s.phi,
            }
        })
        .collect()
}

/// Gradient-soliton residuals at one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolitonResidualSample {
    pub t: f64,
    /// Trace-free part coefficient `β`.
    pub r_nfz: f64,
    /// `ẏ[Δκ − 2(φ̇+mφ)] + 2[φÿ − (m−1)φẋẏ + φ̇ẏ + y e^{y−x}]`.
    pub r_med: f64,
    /// Sum of [`Self::eyd_lines`].
    pub r_eyd: f64,
    /// The five contributions to `r_eyd`: `m` times the constraint, the
    /// scalar-curvature relation, the `Δκ` relation, the `φ` equation and
    /// the `x` equation.
    #[serde(skip)]
    pub eyd_lines: [f64; 5],
}

/// Soliton residuals along `traj`. Second derivatives `ẍ, ÿ, φ̈` are
/// differentiated numerically from the stored first derivatives; `s` and
/// `Δκ` come from [`geometric_samples`].
pub fn soliton_residuals(params: &Params, traj: &Trajectory) -> Vec<SolitonResidualSample> {
    let m = params.mf();
    let t = traj.times();
    let xdd = fd::derivative(&t, &column(traj, |s| s.xd));
    let ydd = fd::derivative(&t, &column(traj, |s| s.yd));
    let phidd = fd::derivative(&t, &column(traj, |s| s.phid));
    let geo = geometric_samples(params, traj);
    traj.samples()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let g = &geo[i];
            let e = (s.y - s.x).exp();
            let lap_gap = g.lap_kappa - 2.0 * (s.phid + m * s.phi);
            let cleared = s.phi * ydd[i] - (m - 1.0) * s.phi * s.xd * s.yd + s.phid * s.yd + s.y * e;
            let r_med = s.yd * lap_gap + 2.0 * cleared;
            let constraint = 2.0 * s.xd * s.phid - (2.0 * m - 1.0) * s.phi * s.xd * s.xd
                + s.phi * s.yd * s.yd
                + 2.0 * (s.y - 1.0) * e
                - s.phi
                + 2.0 * m;
            let lines = [
                m * constraint,
                -2.0 * (half_scal_weighted(m, s, phidd[i]) - s.t.exp() * g.scal / 2.0),
                (2.0 * m - 1.0) * (s.xd + 1.0) * lap_gap,
                -2.0 * (phidd[i] - (m - 1.0) * s.xd * s.phid - m * s.phi + m),
                (2.0 * m - 1.0) * (2.0 * xdd[i] - s.yd * s.yd + s.xd * s.xd - 1.0) * s.phi,
            ];
            SolitonResidualSample {
                t: s.t,
                r_nfz: g.beta,
                r_med,
                r_eyd: lines.iter().sum(),
                eyd_lines: lines,
            }
        })
        .collect()
}

/// Sup-norms `(r_nfz, r_med, r_eyd)`.
pub fn soliton_sups(samples: &[SolitonResidualSample]) -> (f64, f64, f64) {
    samples.iter().fold((0.0, 0.0, 0.0), |(a, b, c), s| {
        (a.max(s.r_nfz.abs()), b.max(s.r_med.abs()), c.max(s.r_eyd.abs()))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    /// `y ≡ 0`.
    CaseI,
    /// `σ` constant.
    CaseIi,
    /// `σ` proportional to `e^t`.
    CaseIii,
    /// `σ` is not of the form `q₀ + q₁e^t`.
    Nontrivial,
    /// `σ = q₀ + q₁e^t` with both coefficients nonzero but `y ≢ 0`.
    Indeterminate,
}

impl Case {
    pub fn as_str(&self) -> &'static str {
        match self {
            Case::CaseI => "case_i",
            Case::CaseIi => "case_ii",
            Case::CaseIii => "case_iii",
            Case::Nontrivial => "nontrivial",
            Case::Indeterminate => "indeterminate",
        }
    }
}

/// Classification result with the fit `σ ≈ q₀ + q₁e^t` and diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaseTag {
    pub tag: Case,
    pub q0: f64,
    pub q1: f64,
    /// `max |σ − q₀ − q₁e^t|`
    pub sup_dev: f64,
    /// `max |σ|`, the scale the tolerance is applied to.
    pub sigma_scale: f64,
    /// `max |ẏφ̇ − (mẋ − ẏ)ẏφ + y e^{y−x}|`
    pub eta_i: f64,
    /// `max |ÿ − (ẏ − ẋ)ẏ|` with `ÿ` differentiated numerically.
    pub eta_ii: f64,
    /// `max |σ̈ − σ̇|` with `σ̈` differentiated numerically.
    pub sigma_dd_minus_d: f64,
}

/// Classifies `traj` by the shape of its conformal factor.
///
/// `y ≡ 0` (to `tol`) gives [`Case::CaseI`]. Otherwise `σ` is fitted by least
/// squares in the basis `{1, e^t}`; a fit deviation above `tol·max σ` gives
/// [`Case::Nontrivial`], a negligible `q₁e^{t_end}` gives [`Case::CaseIi`]
/// and a negligible `q₀` gives [`Case::CaseIii`].
pub fn classify_case(params: &Params, traj: &Trajectory, tol: f64) -> CaseTag {
    let m = params.mf();
    let s = traj.samples();
    let t = traj.times();
    let sig = column(traj, sigma);

    // normal equations for σ ≈ q₀ + q₁ e^t
    let (mut n, mut se, mut see, mut sy, mut sey) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (ti, yi) in t.iter().zip(&sig) {
        let e = ti.exp();
        n += 1.0;
        se += e;
        see += e * e;
        sy += yi;
        sey += e * yi;
    }
    let det = n * see - se * se;
    let (q0, q1) = if det.abs() > 1e-300 * see.max(1.0) && s.len() > 1 {
        ((see * sy - se * sey) / det, (n * sey - se * sy) / det)
    } else {
        (sy / n, 0.0)
    };
    let sup_dev = t
        .iter()
        .zip(&sig)
        .map(|(ti, yi)| (yi - q0 - q1 * ti.exp()).abs())
        .fold(0.0, f64::max);
    let scale = sig.iter().fold(0.0f64, |a, v| a.max(v.abs()));

    let ydd = fd::derivative(&t, &column(traj, |p| p.yd));
    let sigd: Vec<f64> = s.iter().map(|p| sigma(p) * (p.xd - p.yd + 1.0) / 2.0).collect();
    let sigdd = fd::derivative(&t, &sigd);
    let mut eta_i = 0.0f64;
    let mut eta_ii = 0.0f64;
    let mut sdd = 0.0f64;
    for (i, p) in s.iter().enumerate() {
        let e = (p.y - p.x).exp();
        eta_i = eta_i.max((p.yd * p.phid - (m * p.xd - p.yd) * p.yd * p.phi + p.y * e).abs());
        eta_ii = eta_ii.max((ydd[i] - (p.yd - p.xd) * p.yd).abs());
        sdd = sdd.max((sigdd[i] - sigd[i]).abs());
    }

    let max_y = s.iter().fold(0.0f64, |a, p| a.max(p.y.abs()));
    let t_end = traj.t_end();
    let tag = if max_y <= tol {
        Case::CaseI
    } else if sup_dev > tol * scale {
        Case::Nontrivial
    } else if (q1 * t_end.exp()).abs() <= tol * scale {
        Case::CaseIi
    } else if q0.abs() <= tol * scale {
        Case::CaseIii
    } else {
        Case::Indeterminate
    };
    CaseTag {
        tag,
        q0,
        q1,
        sup_dev,
        sigma_scale: scale,
        eta_i,
        eta_ii,
        sigma_dd_minus_d: sdd,
    }
}

/// Substitutes `t_start + t_end − t` for `t`: values are kept, first
/// derivatives change sign and the samples are re-sorted. Maps solutions of
/// the system on `[0, T]` to solutions.
pub fn invert_profile(traj: &Trajectory) -> Result<Trajectory> {
    let (t0, t1) = (traj.t_start(), traj.t_end());
    let shift = t0 + t1;
    let mut samples: Vec<ProfileState> = traj
        .samples()
        .iter()
        .rev()
        .map(|s| ProfileState {
            t: shift - s.t,
            x: s.x,
            xd: -s.xd,
            y: s.y,
            yd: -s.yd,
            phi: s.phi,
            phid: -s.phid,
        })
        .collect();
    // keep the interval exact so that inverting twice restores it
    let n = samples.len();
    samples[0].t = t0;
    samples[n - 1].t = t1;
    let branch = match traj.branch() {
        Branch::Inverted => Branch::External,
        _ => Branch::Inverted,
    };
    Trajectory::new(*traj.params(), samples, branch, traj.a())
}

/// Residual of `σ̂(T − t) = e^{−t+T/2} σ(t)` at each sample of `traj`, with
/// `inverted = invert_profile(traj)` and `T = t_start + t_end`.
pub fn inversion_sigma_residuals(traj: &Trajectory, inverted: &Trajectory) -> Vec<f64> {
    let total = traj.t_start() + traj.t_end();
    let n = traj.len();
    traj.samples()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let hat = &inverted.samples()[n - 1 - i];
            sigma(hat) - (-s.t + total / 2.0).exp() * sigma(s)
        })
        .collect()
}

/// One node of the radial reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialSample {
    pub r: f64,
    pub t: f64,
    /// Distance from `t` to the nearer end of the interval, carried with
    /// full relative precision even where `t` itself rounds to the end.
    pub gap: f64,
    pub phi: f64,
}

/// `t(r)` solving `dt/dr = 2φ(t)/(kr)` with `t(1) = (t_start + t_end)/2`.
pub fn radial_profile(params: &Params, traj: &Trajectory, r_grid: &[f64]) -> Result<Vec<RadialSample>> {
    radial_profile_anchored(params, traj, r_grid, 1.0)
}

// φ as a function of the distance from one end of the trajectory, with
// `dφ/d(distance)`. An end value of `|φ| <= 1e-10` is taken as exactly zero.
struct EndChart {
    d: Vec<f64>,
    phi: Vec<f64>,
    dphi: Vec<f64>,
}

impl EndChart {
    fn new(traj: &Trajectory, from_right: bool) -> Self {
        let s = traj.samples();
        let ordered: Vec<&ProfileState> = if from_right {
            s.iter().rev().collect()
        } else {
            s.iter().collect()
        };
        let (end, sign) = if from_right {
            (traj.t_end(), -1.0)
        } else {
            (traj.t_start(), 1.0)
        };
        let d = ordered.iter().map(|p| sign * (p.t - end)).collect();
        let mut phi: Vec<f64> = ordered.iter().map(|p| p.phi).collect();
        let dphi = ordered.iter().map(|p| sign * p.phid).collect();
        if phi[0].abs() <= 1e-10 {
            phi[0] = 0.0;
        }
        Self { d, phi, dphi }
    }

    fn eval(&self, d: f64) -> f64 {
        let i = self.d.partition_point(|&v| v <= d).clamp(1, self.d.len() - 1);
        dopri::hermite(
            self.d[i - 1],
            &[self.phi[i - 1]],
            &[self.dphi[i - 1]],
            self.d[i],
            &[self.phi[i]],
            &[self.dphi[i]],
            d,
        )[0]
    }
}

/// As [`radial_profile`] with the midpoint of the interval attained at
/// `r = r_anchor`.
///
/// Each half is integrated in its distance to the nearer end, so `gap`
/// keeps relative accuracy as `r → 0` and `r → ∞`.
pub fn radial_profile_anchored(
    params: &Params,
    traj: &Trajectory,
    r_grid: &[f64],
    r_anchor: f64,
) -> Result<Vec<RadialSample>> {
    if !(r_anchor > 0.0 && r_anchor.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "anchor radius must be positive, got {r_anchor}"
        )));
    }
    if r_grid.iter().any(|r| !(*r > 0.0 && r.is_finite())) || r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams(
            "radial grid must be positive and strictly increasing".into(),
        ));
    }
    if traj.len() < 2 {
        return Err(Error::InvalidParams("radial profile needs at least two samples".into()));
    }
    let k = params.kf();
    let s0 = r_anchor.ln();
    let half = 0.5 * (traj.t_end() - traj.t_start());
    let t_mid = traj.t_start() + half;
    let mut ctl = StepControl::new(1e-12, f64::MIN_POSITIVE);
    ctl.max_steps = 1_000_000;

    let mut out = vec![
        RadialSample {
            r: 0.0,
            t: 0.0,
            gap: 0.0,
            phi: 0.0
        };
        r_grid.len()
    ];
    let split = r_grid.partition_point(|&r| r.ln() < s0);
    // in s = log r the distance d to the chart's end obeys dd/ds = ±2φ/k
    let mut march = |from_right: bool, indices: &mut dyn Iterator<Item = usize>| -> Result<()> {
        let chart = EndChart::new(traj, from_right);
        let sign = if from_right { -1.0 } else { 1.0 };
        let rhs = |_s: f64, d: &[f64; 1]| [sign * 2.0 * chart.eval(d[0]) / k];
        let mut solver = Dopri5::new(rhs, s0, [half], ctl);
        for i in indices {
            let target = r_grid[i].ln();
            while solver.t() != target {
                solver.step(target).map_err(|e| Error::StepFailure {
                    t: e.t,
                    reason: e.reason,
                })?;
            }
            let d = solver.y()[0];
            let t = if d == half {
                t_mid
            } else if from_right {
                traj.t_end() - d
            } else {
                traj.t_start() + d
            };
            out[i] = RadialSample {
                r: r_grid[i],
                t,
                gap: d,
                phi: chart.eval(d),
            };
        }
        Ok(())
    };
    march(true, &mut (split..r_grid.len()))?;
    march(false, &mut (0..split).rev())?;
    Ok(out)
}
