use soliton_profile::einstein::{page_length, solve_page_parameter};
use soliton_profile::explorer::*;
use soliton_profile::koiso_cao::{cao_length, initial_data, solve_cao_parameter, Objective};
use soliton_profile::{Error, Params};

fn p(m: u32, k: u32) -> Params {
    Params::new(m, k).unwrap()
}

fn page_point(pr: &Params) -> (f64, f64, f64) {
    let a = solve_page_parameter(pr).unwrap();
    (-(pr.kf() * a + pr.mf()).ln(), 0.0, page_length(a))
}

fn cao_point(pr: &Params) -> (f64, f64, f64) {
    let a = solve_cao_parameter(pr, Objective::QuadratureJ).unwrap();
    let d = initial_data(pr, a);
    (d.x0, d.y0, cao_length(pr))
}

#[test]
fn known_points_hit_with_small_mismatch() {
    for (m, k) in [(2, 1), (3, 1), (3, 2)] {
        let pr = p(m, k);
        for (x0, y0, t_end) in [page_point(&pr), cao_point(&pr)] {
            let r = shoot(&pr, x0, y0, default_t_max(&pr));
            assert!(r.hit, "({m},{k}) {r:?}");
            assert_eq!(r.terminated_by, TerminatedBy::PhiZero);
            assert!(r.mismatch_norm() < 1e-8, "({m},{k}) {r:?}");
            assert!((r.t_hit.unwrap() - t_end).abs() < 1e-8);
            assert!(r.drift.unwrap() < 1e-8);
            assert!(r.nontriviality.unwrap() < 1e-6);
        }
    }
}

#[test]
fn perturbed_start_is_rejected() {
    let pr = p(2, 1);
    let (x0, y0, _) = cao_point(&pr);
    let r = shoot(&pr, x0 + 1.0, y0, default_t_max(&pr));
    assert!(!r.hit || r.mismatch_norm() > 1e-2, "{r:?}");
}

#[test]
fn scan_is_deterministic_and_parallel_safe() {
    let pr = p(2, 1);
    let (x0, y0, _) = cao_point(&pr);
    let xa = GridAxis::around(x0, 0.05, 5).unwrap();
    let ya = GridAxis::around(y0, 0.05, 5).unwrap();
    let t_max = default_t_max(&pr);
    let a = scan(&pr, xa, ya, t_max, false);
    let b = scan(&pr, xa, ya, t_max, true);
    assert_eq!(a.results.len(), 25);
    for (u, v) in a.results.iter().zip(&b.results) {
        assert_eq!(format!("{u:?}"), format!("{v:?}"));
    }
    assert_eq!(a.best(), Some(12));
}

#[test]
fn page_row_contains_the_page_point() {
    let pr = p(3, 1);
    let (x0, _, _) = page_point(&pr);
    let xa = GridAxis::around(x0, 0.02, 3).unwrap();
    let ya = GridAxis::new(-0.1, 0.1, 3).unwrap();
    let g = scan(&pr, xa, ya, default_t_max(&pr), true);
    let centre = g.at(1, 1);
    assert_eq!(centre.y0, 0.0);
    assert!(centre.hit && centre.mismatch_norm() < 1e-8);
    assert_eq!(g.best(), Some(4));
}

#[test]
fn refine_recovers_both_points() {
    for (m, k) in [(2, 1), (4, 1)] {
        let pr = p(m, k);
        for (x0, y0, _) in [cao_point(&pr), page_point(&pr)] {
            let seed = (x0 * 1.01, if y0 == 0.0 { 0.0 } else { y0 * 1.01 });
            let r = refine(&pr, seed, 25, default_t_max(&pr)).unwrap();
            assert!((r.x0 - x0).abs() < 1e-8 && (r.y0 - y0).abs() < 1e-8, "({m},{k}) {r:?}");
            assert!(!r.candidate);
        }
    }
}

#[test]
fn refine_from_far_seed_fails_cleanly() {
    let pr = p(2, 1);
    match refine(&pr, (5.0, 5.0), 10, default_t_max(&pr)) {
        Err(Error::NoConvergence { .. }) => {}
        Ok(r) => assert!(r.mismatch_norm < 1e-10),
        Err(e) => panic!("unexpected error {e}"),
    }
}

#[test]
fn trajectories_are_returned_on_hit() {
    let pr = p(2, 1);
    let (x0, y0, t_end) = cao_point(&pr);
    let shot = shoot_full(&pr, x0, y0, default_t_max(&pr));
    let tr = shot.trajectory.unwrap();
    assert!(tr.t_end() < t_end && tr.t_end() > t_end - 1e-3);
    assert_eq!(tr.t_start(), pr.start_offset);
}
