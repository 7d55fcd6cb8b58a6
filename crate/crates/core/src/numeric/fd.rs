//! Finite-difference derivative estimates on arbitrary sorted grids.

const STENCIL: usize = 7;

/// First-derivative weights at `x0` for the nodes `xs` (Fornberg's
/// recursion, derivative orders 0 and 1 only).
pub fn first_derivative_weights(x0: f64, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    // c[j][d] for d in {0, 1}
    let mut c = vec![[0.0f64; 2]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for d in (1..=mn).rev() {
                    c[i][d] = c1 * (d as f64 * c[i - 1][d - 1] - c5 * c[i - 1][d]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for d in (1..=mn).rev() {
                c[j][d] = (c4 * c[j][d] - d as f64 * c[j][d - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

/// Derivative of sampled values using seven-point stencils: centred in the
/// interior, shifted towards the inside near the ends. Shorter inputs fall
/// back to the widest stencil available.
pub fn derivative(ts: &[f64], values: &[f64]) -> Vec<f64> {
    assert_eq!(ts.len(), values.len());
    let n = ts.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let width = STENCIL.min(n);
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(width / 2).min(n - width);
            let nodes = &ts[start..start + width];
            let w = first_derivative_weights(ts[i], nodes);
            w.iter().zip(&values[start..start + width]).map(|(w, v)| w * v).sum()
        })
        .collect()
}
