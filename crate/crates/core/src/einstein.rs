//! Solutions with `y ≡ 0`: the closed-form Einstein family and the
//! Page / Bérard Bergery metrics.
//!
//! With `y ≡ 0` the `x` equation decouples, `ẋ = ξ(t) = tanh(t/2 + artanh ẋ₀)`,
//! and `x = x₀ + 2 log Θ` with `Θ = cosh(t/2) + ẋ₀ sinh(t/2)`. The constraint
//! becomes a linear first-order equation for `φ` that is solved in closed
//! form in the variable `ξ`.

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul};

use crate::numeric::roots;
use crate::{Branch, Error, Params, ProfileState, Result, Trajectory};

fn binom(n: i64, j: i64) -> f64 {
    if j < 0 || j > n {
        return 0.0;
    }
    (0..j).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn binom_exact(n: i64, j: i64) -> i128 {
    if j < 0 || j > n {
        return 0;
    }
    (0..j).fold(1i128, |acc, i| acc * (n - i) as i128 / (i + 1) as i128)
}

// Coefficients of ξ^{2j}, j = 0..=m, in
// Σ (−1)^j ξ^{2j}/(2j−1) [C(m−1,j) u + C(m−1,j−1) v].
fn even_coefficients(m: u32, u: f64, v: f64) -> Vec<f64> {
    let m = i64::from(m);
    (0..=m)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign / (2 * j - 1) as f64 * (binom(m - 1, j) * u + binom(m - 1, j - 1) * v)
        })
        .collect()
}

// Value and ξ-derivative of Σ c_j ξ^{2j}.
fn eval_even(c: &[f64], xi: f64) -> (f64, f64) {
    let z = xi * xi;
    let mut v = 0.0;
    let mut d = 0.0;
    for (j, cj) in c.iter().enumerate().rev() {
        v = v * z + cj;
        if j > 0 {
            d = d * z + 2.0 * j as f64 * cj;
        }
    }
    (v, d * xi)
}

/// `(Θ, Θ̇)` with `2Θ = (1+a)e^{t/2} + (1−a)e^{−t/2}`.
pub fn theta(a: f64, t: f64) -> (f64, f64) {
    let (ep, em) = ((t / 2.0).exp(), (-t / 2.0).exp());
    (
        ((1.0 + a) * ep + (1.0 - a) * em) / 2.0,
        ((1.0 + a) * ep - (1.0 - a) * em) / 4.0,
    )
}

/// `ξ = 2Θ̇/Θ = tanh(t/2 + artanh a)`.
pub fn xi_of_t(a: f64, t: f64) -> f64 {
    (t / 2.0 + a.atanh()).tanh()
}

/// Inverse of [`xi_of_t`].
pub fn t_of_xi(a: f64, xi: f64) -> f64 {
    2.0 * (xi.atanh() - a.atanh())
}

/// Length `T = 2 log((1−a)/(1+a))` of the Page interval.
pub fn page_length(a: f64) -> f64 {
    2.0 * ((1.0 - a) / (1.0 + a)).ln()
}

fn s_coefficients(params: &Params, a: f64) -> Vec<f64> {
    let (m, k) = (params.mf(), params.kf());
    even_coefficients(params.m, (m * a + k) * a, k * a + m)
}

/// The polynomial
/// `S(a,ξ) = Σ_{j=0}^{m} (−1)^j ξ^{2j}/(2j−1) [C(m−1,j)(ma+k)a + C(m−1,j−1)(ka+m)]`.
pub fn s_poly(params: &Params, a: f64, xi: f64) -> f64 {
    eval_even(&s_coefficients(params, a), xi).0
}

/// `∂S/∂ξ`.
pub fn s_poly_dxi(params: &Params, a: f64, xi: f64) -> f64 {
    eval_even(&s_coefficients(params, a), xi).1
}

/// Exact coefficients of `P(a) = S(a,a)/a` in increasing powers of `a`.
///
/// Fails for `m > 100`, where the binomials would overflow.
pub fn p_poly_exact(params: &Params) -> Result<Vec<Ratio<i128>>> {
    if params.m > 100 {
        return Err(Error::InvalidParams(format!(
            "exact P coefficients are limited to m <= 100, got {}",
            params.m
        )));
    }
    let (m, k) = (i64::from(params.m), i128::from(params.k));
    let mi = i128::from(params.m);
    // S(a,a)/a = Σ_j (−1)^j/(2j−1) [C(m−1,j)(m a^{2j+1} + k a^{2j})
    //                               + C(m−1,j−1)(k a^{2j} + m a^{2j−1})]
    let mut c = vec![Ratio::from_integer(0i128); 2 * m as usize + 2];
    for j in 0..=m {
        let w = Ratio::new(if j % 2 == 0 { 1 } else { -1 }, 2 * j as i128 - 1);
        let (b0, b1) = (binom_exact(m - 1, j), binom_exact(m - 1, j - 1));
        let j = j as usize;
        c[2 * j + 1] += w * (b0 * mi);
        c[2 * j] += w * (b0 * k + b1 * k);
        if j > 0 {
            c[2 * j - 1] += w * (b1 * mi);
        }
    }
    while c.len() > 1 && c[c.len() - 1] == Ratio::from_integer(0) {
        c.pop();
    }
    Ok(c)
}

/// Evaluates a rational-coefficient polynomial exactly; `None` on `i128`
/// overflow.
pub fn eval_exact(c: &[Ratio<i128>], a: Ratio<i128>) -> Option<Ratio<i128>> {
    c.iter()
        .rev()
        .try_fold(Ratio::from_integer(0), |acc, ci| acc.checked_mul(&a)?.checked_add(ci))
}

fn p_coefficients(params: &Params) -> Vec<f64> {
    let (m, k) = (i64::from(params.m), params.kf());
    let mf = params.mf();
    let mut c = vec![0.0; 2 * m as usize + 2];
    for j in 0..=m {
        let w = if j % 2 == 0 { 1.0 } else { -1.0 } / (2 * j - 1) as f64;
        let (b0, b1) = (binom(m - 1, j), binom(m - 1, j - 1));
        let j = j as usize;
        c[2 * j + 1] += w * b0 * mf;
        c[2 * j] += w * (b0 + b1) * k;
        if j > 0 {
            c[2 * j - 1] += w * b1 * mf;
        }
    }
    c
}

/// `P(a) = S(a,a)/a`, evaluated from its expanded coefficients so that
/// `P(0) = −k` needs no limit.
pub fn p_poly(params: &Params, a: f64) -> f64 {
    p_coefficients(params).iter().rev().fold(0.0, |acc, c| acc * a + c)
}

/// The root of `P` in `(−k/m, 0)`, by bisection.
pub fn solve_page_parameter(params: &Params) -> Result<f64> {
    params.validate()?;
    const DELTA: f64 = 1e-12;
    let lo = -params.kf() / params.mf() + DELTA;
    let hi = -DELTA;
    let a = roots::bisect("P(a)", |a| p_poly(params, a), lo, hi, 200)?;
    let scale: f64 = p_coefficients(params).iter().map(|c| c.abs()).sum();
    let r = p_poly(params, a);
    if r.abs() > 1e-13 * scale {
        return Err(Error::InvalidRoot(format!("|P(a)| = {:e} at a = {a}", r.abs())));
    }
    Ok(a)
}

/// `φ = 2S(a,ξ) / [(1−a²)(1−ξ²)^m]`.
pub fn phi_from_xi(params: &Params, a: f64, xi: f64) -> f64 {
    let m = params.m as i32;
    2.0 * s_poly(params, a, xi) / ((1.0 - a * a) * (1.0 - xi * xi).powi(m))
}

/// `dφ/dt` along the Page profile, using `2ξ̇ = 1 − ξ²`.
pub fn phid_from_xi(params: &Params, a: f64, xi: f64) -> f64 {
    let m = params.m as i32;
    let (s, ds) = eval_even(&s_coefficients(params, a), xi);
    let w = 1.0 - xi * xi;
    (ds * w + 2.0 * params.mf() * xi * s) / ((1.0 - a * a) * w.powi(m))
}

/// Initial data of a `y ≡ 0` solution at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EinsteinData {
    pub x0: f64,
    pub xd0: f64,
    pub phi0: f64,
    pub phid0: f64,
}

impl EinsteinData {
    /// Checks the constraint `2ẋ₀φ̇₀ = [(2m−1)ẋ₀² + 1]φ₀ + 2e^{−x₀} − 2m`
    /// (to `1e-10`, relative to the largest term) and `|ẋ₀| < 1`.
    pub fn new(params: &Params, x0: f64, xd0: f64, phi0: f64, phid0: f64) -> Result<Self> {
        let d = Self { x0, xd0, phi0, phid0 };
        if !(xd0.abs() < 1.0) || ![x0, phi0, phid0].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "Einstein data needs finite values and |xd0| < 1, got xd0 = {xd0}"
            )));
        }
        let scale = 1.0 + (2.0 * f64::exp(-x0)).max(2.0 * params.mf()).max(phi0.abs());
        let r = d.constraint_residual(params);
        if r.abs() > 1e-10 * scale {
            return Err(Error::InvalidParams(format!(
                "Einstein data violates the constraint by {r:e}"
            )));
        }
        Ok(d)
    }

    /// Page data for parameter `a`: `x₀ = −log(ka+m)`, `ẋ₀ = a`, `φ₀ = 0`,
    /// `φ̇₀ = k`.
    pub fn page(params: &Params, a: f64) -> Self {
        Self {
            x0: -(params.kf() * a + params.mf()).ln(),
            xd0: a,
            phi0: 0.0,
            phid0: params.kf(),
        }
    }

    pub fn constraint_residual(&self, params: &Params) -> f64 {
        let m = params.mf();
        2.0 * self.xd0 * self.phid0 - ((2.0 * m - 1.0) * self.xd0 * self.xd0 + 1.0) * self.phi0 - 2.0 * (-self.x0).exp()
            + 2.0 * m
    }
}

/// Closed-form solution of the linear `φ` equation for given Einstein data.
#[derive(Debug, Clone)]
pub struct LinearPhi {
    m: u32,
    data: EinsteinData,
    a_coef: f64,
    b_coef: f64,
    c_tilde: f64,
    coeffs: Vec<f64>,
}

impl LinearPhi {
    pub fn new(params: &Params, data: EinsteinData) -> Result<Self> {
        if !(data.xd0.abs() < 1.0) {
            return Err(Error::InvalidParams(format!("need |xd0| < 1, got {}", data.xd0)));
        }
        let m = params.mf();
        let a_coef = 1.0 - data.xd0 * data.xd0;
        let b_coef = (-data.x0).exp();
        let coeffs = even_coefficients(params.m, b_coef - m * a_coef, b_coef);
        let xi0 = data.xd0;
        let c_tilde = if xi0 == 0.0 {
            a_coef * data.phid0
        } else {
            let (s0, _) = eval_even(&coeffs, xi0);
            (data.phi0 * a_coef * a_coef.powi(params.m as i32) / 2.0 - s0) / xi0
        };
        Ok(Self {
            m: params.m,
            data,
            a_coef,
            b_coef,
            c_tilde,
            coeffs,
        })
    }

    pub fn xi(&self, t: f64) -> f64 {
        xi_of_t(self.data.xd0, t)
    }

    /// `(x, ẋ)` at `t`.
    pub fn x_at(&self, t: f64) -> (f64, f64) {
        let th = (t / 2.0).cosh() + self.data.xd0 * (t / 2.0).sinh();
        (self.data.x0 + 2.0 * th.ln(), self.xi(t))
    }

    /// `(φ, φ̇)` at `t`.
    pub fn phi_at(&self, t: f64) -> (f64, f64) {
        self.phi_at_xi(self.xi(t))
    }

    fn phi_at_xi(&self, xi: f64) -> (f64, f64) {
        let (s, ds) = eval_even(&self.coeffs, xi);
        let w = 1.0 - xi * xi;
        let num = s + self.c_tilde * xi;
        let den = self.a_coef * w.powi(self.m as i32);
        let phi = 2.0 * num / den;
        let dphi_dxi = 2.0 * (ds + self.c_tilde) / den + phi * 2.0 * f64::from(self.m) * xi / w;
        (phi, dphi_dxi * w / 2.0)
    }

    /// Integrating factor `G` and right side `F = (Gφ)˙` at `t`, with
    /// `G = 4(1−ξ²)^m / (A^m ξ)`, `A = 1 − ẋ₀²`. `None` where `ξ = 0`.
    pub fn factors(&self, t: f64) -> Option<(f64, f64)> {
        let xi = self.xi(t);
        if xi == 0.0 {
            return None;
        }
        let w = 1.0 - xi * xi;
        let m = self.m as i32;
        let g = 4.0 * w.powi(m) / (self.a_coef.powi(m) * xi);
        let e_minus_x = self.b_coef * w / self.a_coef;
        Some((g, g * (e_minus_x - f64::from(self.m)) / xi))
    }

    pub fn state_at(&self, t: f64) -> ProfileState {
        let (x, xd) = self.x_at(t);
        let (phi, phid) = self.phi_at(t);
        ProfileState::from_fields(t, [x, xd, 0.0, 0.0, phi, phid])
    }
}

/// `φ` on `grid` for the Einstein data `data`.
pub fn solve_phi_linear(params: &Params, data: EinsteinData, grid: &[f64]) -> Result<Vec<f64>> {
    let lin = LinearPhi::new(params, data)?;
    Ok(grid.iter().map(|&t| lin.phi_at(t).0).collect())
}

/// Full `y ≡ 0` trajectory for `data` on `grid`.
pub fn einstein_trajectory(params: &Params, data: EinsteinData, grid: &[f64]) -> Result<Trajectory> {
    let lin = LinearPhi::new(params, data)?;
    let samples = grid.iter().map(|&t| lin.state_at(t)).collect();
    Trajectory::new(*params, samples, Branch::Einstein, Some(data.xd0))
}

/// A Page / Bérard Bergery profile on `[0, T]`.
#[derive(Debug, Clone)]
pub struct PageSolution {
    pub params: Params,
    pub a: f64,
    pub t_end: f64,
    pub p_residual: f64,
    pub trajectory: Trajectory,
}

/// Closed-form Page state at `t` for parameter `a`.
pub fn page_state(params: &Params, a: f64, t: f64) -> ProfileState {
    page_state_xi(params, a, t, xi_of_t(a, t))
}

fn page_state_xi(params: &Params, a: f64, t: f64, xi: f64) -> ProfileState {
    let x0 = -(params.kf() * a + params.mf()).ln();
    let (th, _) = theta(a, t);
    ProfileState::from_fields(
        t,
        [
            x0 + 2.0 * th.ln(),
            xi,
            0.0,
            0.0,
            phi_from_xi(params, a, xi),
            phid_from_xi(params, a, xi),
        ],
    )
}

/// Samples the Page profile on `n_samples ≥ 2` equally spaced points of
/// `[0, T]`, with no boundary checks.
pub fn page_trajectory(params: &Params, a: f64, n_samples: usize) -> Result<Trajectory> {
    params.validate()?;
    let (m, k) = (params.mf(), params.kf());
    if !(a > -k / m && a < 0.0) {
        return Err(Error::InvalidParams(format!(
            "Page parameter must lie in (-k/m, 0), got {a}"
        )));
    }
    let n = n_samples.max(2);
    let t_end = page_length(a);
    let samples: Vec<ProfileState> = (0..n)
        .map(|i| {
            if i == 0 {
                page_state_xi(params, a, 0.0, a)
            } else if i == n - 1 {
                page_state_xi(params, a, t_end, -a)
            } else {
                page_state(params, a, t_end * i as f64 / (n - 1) as f64)
            }
        })
        .collect();
    Trajectory::new(*params, samples, Branch::Einstein, Some(a))
}

/// [`page_trajectory`] followed by [`Trajectory::check_endpoints`].
pub fn build_page_profile(params: &Params, a: f64, n_samples: usize) -> Result<PageSolution> {
    let trajectory = page_trajectory(params, a, n_samples)?;
    trajectory.check_endpoints()?;
    Ok(PageSolution {
        params: *params,
        a,
        t_end: trajectory.t_end(),
        p_residual: p_poly(params, a),
        trajectory,
    })
}
