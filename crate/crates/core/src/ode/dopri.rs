//! Dormand–Prince 5(4) embedded Runge–Kutta pair with PI step-size control
//! and cubic Hermite dense output, over fixed-size state arrays.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on `|h|`; `f64::INFINITY` for none.
    pub h_max: f64,
    pub h_init: Option<f64>,
    pub max_steps: usize,
}

impl StepControl {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            h_max: f64::INFINITY,
            h_init: None,
            max_steps: 200_000,
        }
    }
}

/// One accepted step with the data needed for Hermite interpolation.
#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub y0: [f64; N],
    pub f0: [f64; N],
    pub t1: f64,
    pub y1: [f64; N],
    pub f1: [f64; N],
}

impl<const N: usize> Step<N> {
    /// Cubic Hermite interpolant on `(value, derivative)` at both ends.
    pub fn hermite(&self, t: f64) -> [f64; N] {
        hermite(self.t0, &self.y0, &self.f0, self.t1, &self.y1, &self.f1, t)
    }
}

pub fn hermite<const N: usize>(
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    t1: f64,
    y1: &[f64; N],
    f1: &[f64; N],
    t: f64,
) -> [f64; N] {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    std::array::from_fn(|i| h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i])
}

#[derive(Debug, Clone)]
pub struct StepError {
    pub t: f64,
    pub reason: String,
}

/// Stepper state. Integrates in the direction of the first `step` target.
pub struct Dopri5<const N: usize, F> {
    f: F,
    ctl: StepControl,
    t: f64,
    y: [f64; N],
    fy: [f64; N],
    h: f64,
    facold: f64,
    pub accepted: usize,
    pub rejected: usize,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        y[i] + h * acc
    })
}

impl<const N: usize, F> Dopri5<N, F>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    pub fn new(f: F, t0: f64, y0: [f64; N], ctl: StepControl) -> Self {
        let fy = f(t0, &y0);
        Self {
            f,
            ctl,
            t: t0,
            y: y0,
            fy,
            h: 0.0,
            facold: 1e-4,
            accepted: 0,
            rejected: 0,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64; N] {
        &self.y
    }

    fn weight(&self, a: f64, b: f64) -> f64 {
        self.ctl.abs_tol + self.ctl.rel_tol * a.abs().max(b.abs())
    }

    // Hairer–Wanner starting step heuristic.
    fn initial_step(&self, dir: f64, span: f64) -> f64 {
        if let Some(h) = self.ctl.h_init {
            return h.abs().min(span) * dir;
        }
        let mut d0: f64 = 0.0;
        let mut d1: f64 = 0.0;
        for i in 0..N {
            let sk = self.weight(self.y[i], self.y[i]);
            d0 += (self.y[i] / sk).powi(2);
            d1 += (self.fy[i] / sk).powi(2);
        }
        let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
        let mut h0 = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(self.ctl.h_max).min(span);
        let y1 = axpy(&self.y, h0 * dir, &[(1.0, &self.fy)]);
        let f1 = (self.f)(self.t + h0 * dir, &y1);
        let mut d2: f64 = 0.0;
        for ((f1, fy), y) in f1.iter().zip(&self.fy).zip(&self.y) {
            let sk = self.weight(*y, *y);
            d2 += ((f1 - fy) / sk).powi(2);
        }
        let d2 = (d2 / N as f64).sqrt() / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        let h = (100.0 * h0).min(h1).min(self.ctl.h_max).min(span);
        if h.is_finite() && h > 0.0 {
            h * dir
        } else {
            1e-6f64.min(span) * dir
        }
    }

    /// Takes one accepted step towards `t_limit` without passing it.
    pub fn step(&mut self, t_limit: f64) -> Result<Step<N>, StepError> {
        let span = t_limit - self.t;
        if span == 0.0 {
            return Err(StepError {
                t: self.t,
                reason: "already at the target".into(),
            });
        }
        let dir = span.signum();
        if self.h == 0.0 || self.h.signum() != dir {
            self.h = self.initial_step(dir, span.abs());
        }
        let expo1 = 0.2 - BETA * 0.75;
        let mut last_rejected = false;
        loop {
            if self.accepted + self.rejected >= self.ctl.max_steps {
                return Err(StepError {
                    t: self.t,
                    reason: format!("step budget of {} exhausted", self.ctl.max_steps),
                });
            }
            let remaining = t_limit - self.t;
            let mut h = self.h.abs().min(self.ctl.h_max) * dir;
            let last = (1.01 * h).abs() >= remaining.abs();
            if last {
                h = remaining;
            }
            let h_min = 16.0 * f64::EPSILON * self.t.abs().max(1.0);
            if h.abs() < h_min {
                return Err(StepError {
                    t: self.t,
                    reason: format!("step size {h:e} below minimum"),
                });
            }

            let (t, y, k1) = (self.t, self.y, self.fy);
            let f = &self.f;
            let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
            let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(
                t + C5 * h,
                &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                t + h,
                &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let t_new = if last { t_limit } else { t + h };
            let k7 = f(t_new, &y_new);

            let mut err = 0.0;
            for i in 0..N {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sk = self.weight(y[i], y_new[i]);
                err += (e / sk).powi(2);
            }
            let mut err = (err / N as f64).sqrt();
            if !err.is_finite() || y_new.iter().chain(k7.iter()).any(|v| !v.is_finite()) {
                err = f64::INFINITY;
            }

            if err <= 1.0 {
                let fac11 = err.powf(expo1);
                let mut fac = fac11 / self.facold.powf(BETA);
                fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                let mut h_new = h / fac;
                if last_rejected {
                    h_new = if dir > 0.0 { h_new.min(h) } else { h_new.max(h) };
                }
                self.facold = err.max(1e-4);
                if !last {
                    self.h = h_new;
                }
                self.accepted += 1;
                let step = Step {
                    t0: t,
                    y0: y,
                    f0: k1,
                    t1: t_new,
                    y1: y_new,
                    f1: k7,
                };
                self.t = t_new;
                self.y = y_new;
                self.fy = k7;
                return Ok(step);
            }
            self.rejected += 1;
            last_rejected = true;
            let shrink = if err.is_finite() {
                (err.powf(expo1) / SAFETY).min(1.0 / FAC_MIN)
            } else {
                10.0
            };
            self.h = h / shrink;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run<const N: usize>(
        f: impl Fn(f64, &[f64; N]) -> [f64; N],
        y0: [f64; N],
        t0: f64,
        t1: f64,
        tol: f64,
    ) -> [f64; N] {
        let mut s = Dopri5::new(f, t0, y0, StepControl::new(tol, tol));
        while s.t() != t1 {
            s.step(t1).unwrap();
        }
        *s.y()
    }

    #[test]
    fn exponential_decay() {
        let y = run(|_, y: &[f64; 1]| [-y[0]], [1.0], 0.0, 3.0, 1e-12);
        assert!((y[0] - (-3f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn harmonic_oscillator_backwards() {
        let y = run(|_, y: &[f64; 2]| [y[1], -y[0]], [0.0, 1.0], 0.0, -2.0, 1e-12);
        assert!((y[0] - (-2f64).sin()).abs() < 1e-10);
        assert!((y[1] - (-2f64).cos()).abs() < 1e-10);
    }

    #[test]
    fn hermite_is_exact_for_cubics() {
        let p = |t: f64| t * t * t - t;
        let dp = |t: f64| 3.0 * t * t - 1.0;
        let v = hermite(0.5, &[p(0.5)], &[dp(0.5)], 1.5, &[p(1.5)], &[dp(1.5)], 0.9);
        assert!((v[0] - p(0.9)).abs() < 1e-14);
    }

    #[test]
    fn step_failure_on_blowup() {
        // y' = y^2 from y(0) = 1 blows up at t = 1.
        let mut s = Dopri5::new(
            |_, y: &[f64; 1]| [y[0] * y[0]],
            0.0,
            [1.0],
            StepControl::new(1e-10, 1e-10),
        );
        let mut failed = false;
        for _ in 0..100_000 {
            match s.step(2.0) {
                Ok(st) if st.t1 == 2.0 => break,
                Ok(_) => {}
                Err(_) => {
                    failed = true;
                    break;
                }
            }
        }
        assert!(failed);
        assert!(s.t() < 1.0);
    }
}
