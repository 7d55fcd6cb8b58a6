use soliton_profile::geometry::sigma;
use soliton_profile::koiso_cao::*;
use soliton_profile::numeric::fd;
use soliton_profile::ode::{self, first_integral, residual_report, Side};
use soliton_profile::Params;

fn p(m: u32, k: u32) -> Params {
    Params::new(m, k).unwrap()
}

fn solution(m: u32, k: u32, n: usize) -> CaoSolution {
    let pr = p(m, k);
    let a = solve_cao_parameter(&pr, Objective::QuadratureJ).unwrap();
    build_cao_profile(&pr, a, n, Objective::QuadratureJ).unwrap()
}

#[test]
fn structural_identities() {
    for (m, k) in [(2, 1), (3, 1), (3, 2), (4, 1), (4, 3)] {
        let sol = solution(m, k, 801);
        let tr = &sol.trajectory;
        let s0 = sigma(&tr.samples()[0]);
        let ts = tr.times();
        let yd: Vec<f64> = tr.samples().iter().map(|s| s.yd).collect();
        let ydd = fd::derivative(&ts, &yd);
        for (s, ydd) in tr.samples().iter().zip(ydd) {
            assert!((sigma(s) / s0 - 1.0).abs() < 1e-9, "({m},{k}) sigma");
            assert!((s.yd - s.xd - 1.0).abs() < 1e-12, "({m},{k}) yd - xd");
            // ẏ − ẋ = 1 turns the y equation into ÿ = ẏ
            assert!((ydd - s.yd).abs() < 1e-6 * (1.0 + s.yd.abs()), "({m},{k}) ydd");
            assert!(first_integral(tr.params(), s).abs() < 1e-8, "({m},{k}) E");
        }
    }
}

#[test]
fn residual_suite_and_length() {
    for (m, k) in [(2, 1), (3, 1), (3, 2), (4, 1), (4, 3), (5, 2)] {
        let sol = solution(m, k, 1001);
        let r = residual_report(&sol.params, &sol.trajectory).unwrap();
        assert!(r.sup.max_equation() < 1e-8, "({m},{k}) {:?}", r.sup);
        let exact = ((m + k) as f64 / (m - k) as f64).ln();
        assert_eq!(sol.t_end, exact);
    }
}

#[test]
fn s_objective_brackets_for_small_m() {
    for m in 2..=5u32 {
        for k in 1..m {
            let pr = p(m, k);
            let hi = (m * (m - k)) as f64;
            assert!(s_of_a(&pr, 0.0) < 0.0, "({m},{k})");
            assert!(s_of_a(&pr, hi) > 0.0, "({m},{k})");
        }
    }
}

#[test]
fn j_roots_match_reference_values() {
    for (m, k, want) in [(2, 1, 0.52762), (3, 1, 1.3640), (3, 2, 0.7353), (4, 1, 2.2786)] {
        let a = solve_cao_parameter(&p(m, k), Objective::QuadratureJ).unwrap();
        assert!((a - want).abs() < 1e-4, "({m},{k}) {a}");
    }
}

#[test]
fn phi_end_routes_agree() {
    let pr = p(3, 1);
    for a in [0.5, 1.0, 1.3640, 2.0] {
        let q = phi_end_by_quadrature(&pr, a);
        let o = phi_end_by_ode(&pr, a, 1e-12).unwrap();
        assert!((q - o).abs() < 1e-7 * (1.0 + q.abs()), "a = {a}: {q} vs {o}");
    }
}

#[test]
fn wrong_parameter_is_rejected() {
    let pr = p(2, 1);
    let err = build_cao_profile(&pr, 0.4, 101, Objective::QuadratureJ).unwrap_err();
    assert!(matches!(err, soliton_profile::Error::InvalidRoot(_)));
    assert!(build_cao_profile(&pr, -1.0, 101, Objective::QuadratureJ).is_err());
}

#[test]
fn initial_data_satisfies_launch_conditions() {
    for (m, k) in [(2, 1), (4, 3), (5, 1)] {
        let pr = p(m, k);
        let a = solve_cao_parameter(&pr, Objective::QuadratureJ).unwrap();
        let d = initial_data(&pr, a);
        for r in d.condition_residuals(&pr) {
            assert!(r.abs() < 1e-13, "({m},{k}) {r}");
        }
        assert!(ode::constraint(pr.mf(), &d.state()).abs() < 1e-12);
    }
}

#[test]
fn integration_matches_closed_form() {
    let pr = p(2, 1);
    let sol = solution(2, 1, 11);
    let d = initial_data(&pr, sol.a);
    let start = ode::taylor_start(&pr, Side::Left, d.x0, d.y0);
    let run = ode::integrate(&pr, &start, sol.t_end - pr.start_offset).unwrap();
    let mut grid = vec![0.0];
    grid.extend(run.trajectory.times());
    let exact = cao_samples(&pr, sol.a, &grid);
    let worst = run
        .trajectory
        .samples()
        .iter()
        .zip(&exact[1..])
        .flat_map(|(u, v)| u.fields().into_iter().zip(v.fields()).map(|(a, b)| (a - b).abs()))
        .fold(0.0f64, f64::max);
    assert!(worst < 1e-6, "{worst}");
}
