use soliton_profile::einstein::*;
use soliton_profile::ode::{self, residual_report, Side};
use soliton_profile::Params;

fn p(m: u32, k: u32) -> Params {
    Params::new(m, k).unwrap()
}

#[test]
fn page_residuals_on_1001_samples() {
    for (m, k) in [(2, 1), (3, 1), (3, 2), (5, 2)] {
        let pr = p(m, k);
        let a = solve_page_parameter(&pr).unwrap();
        let sol = build_page_profile(&pr, a, 1001).unwrap();
        let r = residual_report(&pr, &sol.trajectory).unwrap();
        assert!(r.sup.max_equation() < 1e-8, "({m},{k}): {:?}", r.sup);
        assert!(r.sup.drift < 1e-12, "({m},{k}): {:?}", r.sup);
    }
}

#[test]
fn integrated_page_matches_closed_form() {
    for (m, k) in [(2, 1), (3, 1), (4, 3)] {
        let pr = p(m, k);
        let a = solve_page_parameter(&pr).unwrap();
        let t_end = page_length(a);
        let x0 = -(pr.kf() * a + pr.mf()).ln();
        let start = ode::taylor_start(&pr, Side::Left, x0, 0.0);
        let run = ode::integrate(&pr, &start, t_end - pr.start_offset).unwrap();
        let mut worst: f64 = 0.0;
        for s in run.trajectory.samples() {
            let e = page_state(&pr, a, s.t);
            for (u, v) in s.fields().iter().zip(e.fields()) {
                worst = worst.max((u - v).abs());
            }
        }
        assert!(worst < 1e-6, "({m},{k}): {worst}");
        let drift = ode::max_drift(&pr, &run.trajectory);
        assert!(drift < 1e-8, "({m},{k}): drift {drift}");
    }
}

#[test]
fn phi_perturbation_is_detected() {
    let pr = p(2, 1);
    let a = solve_page_parameter(&pr).unwrap();
    let sol = build_page_profile(&pr, a, 1001).unwrap();
    let bumped = sol
        .trajectory
        .map_samples(|s| {
            let mut s = *s;
            s.phi += 0.01;
            s
        })
        .unwrap();
    let r = residual_report(&pr, &bumped).unwrap();
    assert!(r.sup.eq_int > 1e-3);
}
