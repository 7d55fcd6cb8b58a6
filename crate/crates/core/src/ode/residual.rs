use serde::Serialize;

use super::{constraint, first_integral, ydd_cleared};
use crate::numeric::fd;
use crate::{Params, Trajectory};

/// Sup-norms of the per-sample residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualSups {
    pub eq_xdd1: f64,
    pub eq_xdd2: f64,
    pub eq_xdd3: f64,
    pub eq_int: f64,
    pub drift: f64,
}

impl ResidualSups {
    /// Largest of the four equation residuals (drift excluded).
    pub fn max_equation(&self) -> f64 {
        self.eq_xdd1.max(self.eq_xdd2).max(self.eq_xdd3).max(self.eq_int)
    }
}

/// Residuals of the system and the constraint at every sample.
///
/// Second derivatives are estimated from the stored first derivatives by
/// seven-point finite differences on the sample grid, so the report checks
/// the stored derivative columns for consistency with the stored values as
/// well as the equations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub t: Vec<f64>,
    /// `2ẍ − ẏ² + ẋ² − 1`
    pub eq_xdd1: Vec<f64>,
    /// `φÿ − (m−1)φẋẏ + φ̇ẏ + y e^{y−x}`
    pub eq_xdd2: Vec<f64>,
    /// `φ̈ − (m−1)ẋφ̇ − mφ + m`
    pub eq_xdd3: Vec<f64>,
    /// Left side of the first-order constraint.
    pub eq_int: Vec<f64>,
    /// `E(t) − E(t₀)` for the first integral `E`.
    pub drift: Vec<f64>,
    pub sup: ResidualSups,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, r| acc.max(r.abs()))
}

/// Builds the report. Returns `None` when the trajectory has fewer than five
/// samples.
pub fn residual_report(params: &Params, traj: &Trajectory) -> Option<ResidualReport> {
    let s = traj.samples();
    if s.len() < 5 {
        return None;
    }
    let m = params.mf();
    let t = traj.times();
    let col = |f: fn(&crate::ProfileState) -> f64| s.iter().map(f).collect::<Vec<_>>();
    let xdd = fd::derivative(&t, &col(|p| p.xd));
    let ydd = fd::derivative(&t, &col(|p| p.yd));
    let phidd = fd::derivative(&t, &col(|p| p.phid));

    let mut eq_xdd1 = Vec::with_capacity(s.len());
    let mut eq_xdd2 = Vec::with_capacity(s.len());
    let mut eq_xdd3 = Vec::with_capacity(s.len());
    let mut eq_int = Vec::with_capacity(s.len());
    let mut drift = Vec::with_capacity(s.len());
    let e0 = first_integral(params, &s[0]);
    for (i, p) in s.iter().enumerate() {
        eq_xdd1.push(2.0 * xdd[i] - p.yd * p.yd + p.xd * p.xd - 1.0);
        eq_xdd2.push(ydd_cleared(m, p, ydd[i]));
        eq_xdd3.push(phidd[i] - (m - 1.0) * p.xd * p.phid - m * p.phi + m);
        eq_int.push(constraint(m, p));
        drift.push(first_integral(params, p) - e0);
    }
    let sup = ResidualSups {
        eq_xdd1: sup(&eq_xdd1),
        eq_xdd2: sup(&eq_xdd2),
        eq_xdd3: sup(&eq_xdd3),
        eq_int: sup(&eq_int),
        drift: sup(&drift),
    };
    Some(ResidualReport {
        t,
        eq_xdd1,
        eq_xdd2,
        eq_xdd3,
        eq_int,
        drift,
        sup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Branch, ProfileState};

    // x = 2 log cosh(t/2), y = 0, φ = 1 solves the system (not the constraint).
    fn reduced(n: usize) -> Trajectory {
        let p = Params::new(2, 1).unwrap();
        let samples = (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                let x = 2.0 * (t / 2.0).cosh().ln();
                ProfileState::from_fields(t, [x, (t / 2.0).tanh(), 0.0, 0.0, 1.0, 0.0])
            })
            .collect();
        Trajectory::new(p, samples, Branch::External, None).unwrap()
    }

    #[test]
    fn exact_solution_has_small_equation_residuals() {
        let tr = reduced(201);
        let r = residual_report(tr.params(), &tr).unwrap();
        assert!(r.sup.eq_xdd1 < 1e-9, "{}", r.sup.eq_xdd1);
        assert_eq!(r.sup.eq_xdd2, 0.0);
        assert!(r.sup.eq_xdd3 < 1e-15);
        assert!(r.sup.drift > 0.0); // the constraint is not satisfied here
    }

    #[test]
    fn too_short_is_none() {
        let tr = reduced(4);
        assert!(residual_report(tr.params(), &tr).is_none());
    }

    #[test]
    fn sups_are_maxima() {
        let tr = reduced(50);
        let r = residual_report(tr.params(), &tr).unwrap();
        assert_eq!(r.sup.eq_int, sup(&r.eq_int));
        assert!(r.eq_int.iter().any(|v| v.abs() == r.sup.eq_int));
    }
}
