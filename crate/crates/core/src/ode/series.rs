//! Power-series expansion of the regular solution at an endpoint where
//! `φ` vanishes.
//!
//! At such a point the `y` equation is singular. Requiring the solution to
//! be smooth forces `ẏ(0) = −y₀e^{y₀−x₀}/φ̇(0)` (from the `y` equation with
//! `φ = 0`) and `ẋ(0) = −[(y₀−1)e^{y₀−x₀} + m]/φ̇(0)` (from the first-order
//! constraint with `φ = 0`). Higher coefficients follow order by order; the
//! coefficient of `y_{n+1}` in the order-`n` balance of the `y` equation is
//! `φ̇(0)(n+1)²`, which never vanishes.

/// Taylor coefficients of `x`, `y`, `φ` about a regular endpoint.
#[derive(Debug, Clone)]
pub struct EndpointSeries {
    x: Vec<f64>,
    y: Vec<f64>,
    phi: Vec<f64>,
}

// Coefficient of t^n in the product of two series.
fn product(a: &[f64], b: &[f64], n: usize) -> f64 {
    (0..=n)
        .filter(|&i| i < a.len() && n - i < b.len())
        .map(|i| a[i] * b[n - i])
        .sum()
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(i, v)| i as f64 * v).collect()
}

impl EndpointSeries {
    /// Expansion with `x(0) = x0`, `y(0) = y0`, `φ(0) = 0`, `φ̇(0) = slope`.
    /// Coefficients are computed through power `order + 1`.
    pub fn new(m: f64, x0: f64, y0: f64, slope: f64, order: usize) -> Self {
        assert!(slope != 0.0, "endpoint slope must be nonzero");
        let len = order + 3;
        let mut x = vec![0.0; len];
        let mut y = vec![0.0; len];
        let mut phi = vec![0.0; len];
        let mut ex = vec![0.0; len]; // e^{y-x}
        x[0] = x0;
        y[0] = y0;
        phi[1] = slope;
        let e0 = (y0 - x0).exp();
        x[1] = -((y0 - 1.0) * e0 + m) / slope;
        ex[0] = e0;

        for n in 0..=order {
            // exp series coefficient n: n E_n = Σ_{j=1}^n j W_j E_{n-j}
            if n > 0 {
                let mut acc = 0.0;
                for j in 1..=n {
                    acc += j as f64 * (y[j] - x[j]) * ex[n - j];
                }
                ex[n] = acc / n as f64;
            }

            // y_{n+1} from the order-n balance of φÿ − (m−1)φẋẏ + φ̇ẏ + y e^{y−x} = 0
            y[n + 1] = 0.0;
            let yd = derivative(&y);
            let ydd = derivative(&yd);
            let xd = derivative(&x);
            let phid = derivative(&phi);
            let xd_yd: Vec<f64> = (0..=n).map(|j| product(&xd, &yd, j)).collect();
            let residual = product(&phi, &ydd, n) - (m - 1.0) * product(&phi, &xd_yd, n)
                + product(&phid, &yd, n)
                + product(&y, &ex, n);
            y[n + 1] = -residual / (slope * ((n + 1) * (n + 1)) as f64);

            let yd = derivative(&y);
            let nn = ((n + 2) * (n + 1)) as f64;
            // 2ẍ = ẏ² − ẋ² + 1
            let one = if n == 0 { 1.0 } else { 0.0 };
            x[n + 2] = (product(&yd, &yd, n) - product(&xd, &xd, n) + one) / (2.0 * nn);
            // φ̈ = (m−1)ẋφ̇ + mφ − m
            phi[n + 2] = ((m - 1.0) * product(&xd, &phid, n) + m * phi[n] - m * one) / nn;
        }
        Self { x, y, phi }
    }

    fn eval(c: &[f64], t: f64) -> (f64, f64) {
        let mut v = 0.0;
        let mut d = 0.0;
        for (i, ci) in c.iter().enumerate().rev() {
            v = v * t + ci;
            if i > 0 {
                d = d * t + i as f64 * ci;
            }
        }
        (v, d)
    }

    /// `(x, ẋ, y, ẏ, φ, φ̇)` at local time `t` (the endpoint is `t = 0`).
    pub fn fields_at(&self, t: f64) -> [f64; 6] {
        let (x, xd) = Self::eval(&self.x, t);
        let (y, yd) = Self::eval(&self.y, t);
        let (phi, phid) = Self::eval(&self.phi, t);
        [x, xd, y, yd, phi, phid]
    }

    pub fn x_coefficients(&self) -> &[f64] {
        &self.x
    }

    pub fn y_coefficients(&self) -> &[f64] {
        &self.y
    }

    pub fn phi_coefficients(&self) -> &[f64] {
        &self.phi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_coefficients_match_forced_constraints() {
        let (m, k) = (3.0, 1.0);
        let (x0, y0) = (0.2, -0.3);
        let s = EndpointSeries::new(m, x0, y0, k, 6);
        let e = (y0 - x0).exp();
        let yd0 = -y0 * e / k;
        let xd0 = -((y0 - 1.0) * e + m) / k;
        let phidd0 = (m - 1.0) * xd0 * k - m;
        let xdd0 = (yd0 * yd0 - xd0 * xd0 + 1.0) / 2.0;
        let ydd0 = ((m - 1.0) * k * xd0 * yd0 - phidd0 * yd0 - (yd0 + y0 * (yd0 - xd0)) * e) / (2.0 * k);
        assert!((s.y_coefficients()[1] - yd0).abs() < 1e-15);
        assert!((s.x_coefficients()[1] - xd0).abs() < 1e-15);
        assert!((2.0 * s.phi_coefficients()[2] - phidd0).abs() < 1e-14);
        assert!((2.0 * s.x_coefficients()[2] - xdd0).abs() < 1e-14);
        assert!((2.0 * s.y_coefficients()[2] - ydd0).abs() < 1e-14);
    }

    #[test]
    fn zero_y_stays_zero() {
        let s = EndpointSeries::new(2.0, -1.0, 0.0, 1.0, 10);
        assert!(s.y_coefficients().iter().all(|&c| c == 0.0));
    }
}
