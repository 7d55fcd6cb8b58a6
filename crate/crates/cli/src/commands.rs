use std::io::Write;

use serde_json::{json, Map, Value};
use soliton_profile::einstein::{p_poly, page_trajectory, solve_page_parameter};
use soliton_profile::explorer::{default_t_max, refine as refine_start, scan as scan_grid, shoot_full};
use soliton_profile::geometry::{
    classify_case, geometric_samples, invert_profile, radial_profile_anchored, soliton_residuals, soliton_sups,
};
use soliton_profile::io::{
    write_geometry_csv, write_radial_csv, write_residuals_csv, write_scan_csv, write_soliton_csv, write_trajectory_csv,
    write_trajectory_json, Metadata,
};
use soliton_profile::koiso_cao::{cao_trajectory, quadrature_objective, s_of_a, solve_cao_parameter, Objective};
use soliton_profile::ode::residual_report;
use soliton_profile::{Params, Trajectory};

use crate::output::{load, print_json, run_info, to_stdout, with_all, OutDir};
use crate::{
    CaoArgs, ClassifyArgs, CliError, Format, InvertArgs, ObjectiveArg, OutputArgs, PageArgs, RadialArgs, RefineArgs,
    ScanArgs, ShootArgs, VerifyArgs,
};

/// Residual sup-norms a built profile must stay under.
const BUILD_TOL: f64 = 1e-7;

fn check_samples(n: usize) -> Result<(), CliError> {
    if n < 5 {
        return Err(CliError::Usage(format!("--samples must be at least 5, got {n}")));
    }
    Ok(())
}

/// Boundary and residual checks on a built profile, written out whether or
/// not they pass.
fn finish_build(traj: &Trajectory, mut info: Map<String, Value>, output: &OutputArgs) -> Result<(), CliError> {
    let boundary = traj.check_endpoints();
    let report = residual_report(traj.params(), traj).expect("at least five samples");
    let sup = report.sup;
    let worst = sup.max_equation().max(sup.drift);
    let verified = boundary.is_ok() && worst < BUILD_TOL;
    info.insert("samples".into(), json!(traj.len()));
    info.insert("residual_tol".into(), json!(BUILD_TOL));
    info.insert("residual_sup".into(), serde_json::to_value(sup).unwrap_or(Value::Null));
    info.insert(
        "boundary".into(),
        match &boundary {
            Ok(()) => json!("ok"),
            Err(e) => json!(e.to_string()),
        },
    );
    info.insert("verified".into(), json!(verified));
    let meta = with_all(Metadata::of(traj), info);

    if let Some(dir) = &output.out {
        let out = OutDir::create(dir)?;
        out.write_trajectory(traj, &meta, output.format)?;
        out.write("residuals.csv", |w| write_residuals_csv(w, &report))?;
        out.write_json("metadata.json", &meta)?;
        log::info!("wrote outputs to {}", dir.display());
    }
    print_json(&meta)?;

    if let Err(e) = boundary {
        return Err(CliError::Failed(e.to_string()));
    }
    if !verified {
        return Err(CliError::Failed(format!(
            "residual sup-norm {worst:e} is not below {BUILD_TOL:e}"
        )));
    }
    Ok(())
}

pub fn page(args: PageArgs) -> Result<(), CliError> {
    let params = args.model.params()?;
    check_samples(args.samples)?;
    let a = solve_page_parameter(&params)?;
    log::info!("Page parameter a = {a:.16e} for (m, k) = ({}, {})", params.m, params.k);
    let traj = page_trajectory(&params, a, args.samples)?;
    let mut info = run_info("page", &params);
    info.insert("T".into(), json!(traj.t_end()));
    info.insert("p_residual".into(), json!(p_poly(&params, a)));
    finish_build(&traj, info, &args.output)
}

pub fn cao(args: CaoArgs) -> Result<(), CliError> {
    let params = args.model.params()?;
    check_samples(args.samples)?;
    let objective = match args.objective {
        ObjectiveArg::QuadratureJ => Objective::QuadratureJ,
        ObjectiveArg::MomentS => Objective::MomentS,
    };
    let a = solve_cao_parameter(&params, objective)?;
    log::info!("Koiso-Cao parameter a = {a:.16e} from {}", objective.as_str());
    let traj = cao_trajectory(&params, a, args.samples)?;
    let mut info = run_info("cao", &params);
    info.insert("objective".into(), json!(objective));
    info.insert("T".into(), json!(traj.t_end()));
    info.insert("j_residual".into(), json!(quadrature_objective(&params, a)));
    info.insert("s_residual".into(), json!(s_of_a(&params, a)));
    info.insert("phi_T".into(), json!(traj.samples()[traj.len() - 1].phi));
    finish_build(&traj, info, &args.output)
}

pub fn verify(args: VerifyArgs) -> Result<(), CliError> {
    let traj = load(&args.input)?;
    let params = *traj.params();
    let report = residual_report(&params, &traj).ok_or_else(|| {
        soliton_profile::Error::Parse(format!("{} samples; verification needs at least 5", traj.len()))
    })?;
    let worst = report.sup.max_equation();
    let pass = worst < args.tol;
    let mut info = run_info("verify", &params);
    info.insert("input".into(), json!(args.input.file));
    info.insert("samples".into(), json!(traj.len()));
    info.insert("tol".into(), json!(args.tol));
    info.insert(
        "residual_sup".into(),
        serde_json::to_value(report.sup).unwrap_or(Value::Null),
    );
    info.insert("pass".into(), json!(pass));
    // the soliton identities are reported alongside but do not gate the exit code
    let soliton = soliton_residuals(&params, &traj);
    let (r_nfz, r_med, r_eyd) = soliton_sups(&soliton);
    info.insert(
        "soliton_sup".into(),
        json!({"r_nfz": r_nfz, "r_med": r_med, "r_eyd": r_eyd}),
    );
    if let Some(dir) = &args.out {
        let out = OutDir::create(dir)?;
        out.write("residuals.csv", |w| write_residuals_csv(w, &report))?;
        out.write("geometry.csv", |w| {
            write_geometry_csv(w, &geometric_samples(&params, &traj))
        })?;
        out.write("soliton.csv", |w| write_soliton_csv(w, &soliton))?;
        out.write_json("metadata.json", &info)?;
    }
    print_json(&info)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "equation residual sup-norm {worst:e} is not below {:e}",
            args.tol
        )))
    }
}

pub fn classify(args: ClassifyArgs) -> Result<(), CliError> {
    let traj = load(&args.input)?;
    let tag = classify_case(traj.params(), &traj, args.tol);
    log::info!("{} is {}", args.input.file.display(), tag.tag.as_str());
    print_json(&tag)
}

pub fn invert(args: InvertArgs) -> Result<(), CliError> {
    let traj = load(&args.input)?;
    let inv = invert_profile(&traj)?;
    let mut info = run_info("invert", traj.params());
    info.insert("input".into(), json!(args.input.file));
    let meta = with_all(Metadata::of(&inv), info);
    match &args.output.out {
        Some(dir) => {
            let out = OutDir::create(dir)?;
            out.write_trajectory(&inv, &meta, args.output.format)?;
            out.write_json("metadata.json", &meta)
        }
        None => to_stdout(|w| match args.output.format {
            Format::Csv => write_trajectory_csv(w, &inv),
            Format::Json => write_trajectory_json(&mut *w, &inv, &meta).and_then(|()| Ok(writeln!(w)?)),
        }),
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || n < 2 {
        return Err(CliError::Usage(format!(
            "radial grid needs 0 < r-min < r-max and at least 2 points, got {lo}, {hi}, {n}"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect())
}

pub fn radial(args: RadialArgs) -> Result<(), CliError> {
    let traj = load(&args.input)?;
    let grid = log_grid(args.r_min, args.r_max, args.points)?;
    let rows = radial_profile_anchored(traj.params(), &traj, &grid, args.anchor).map_err(|e| match e {
        soliton_profile::Error::InvalidParams(msg) => CliError::Usage(msg),
        other => other.into(),
    })?;
    match &args.out {
        Some(dir) => {
            let mut info = run_info("radial", traj.params());
            info.insert("input".into(), json!(args.input.file));
            info.insert("r_min".into(), json!(args.r_min));
            info.insert("r_max".into(), json!(args.r_max));
            info.insert("points".into(), json!(args.points));
            info.insert("anchor".into(), json!(args.anchor));
            let out = OutDir::create(dir)?;
            out.write("radial.csv", |w| write_radial_csv(w, &rows))?;
            out.write_json("metadata.json", &info)
        }
        None => to_stdout(|w| write_radial_csv(w, &rows)),
    }
}

fn t_max(params: &Params, given: Option<f64>) -> Result<f64, CliError> {
    match given {
        None => Ok(default_t_max(params)),
        Some(t) if t > params.start_offset && t.is_finite() => Ok(t),
        Some(t) => Err(CliError::Usage(format!(
            "--t-max must exceed the start offset, got {t}"
        ))),
    }
}

pub fn shoot(args: ShootArgs) -> Result<(), CliError> {
    let params = args.model.params()?;
    let t_max = t_max(&params, args.t_max)?;
    let shot = shoot_full(&params, args.x0, args.y0, t_max);
    let r = shot.result;
    log::info!("shot from ({}, {}): {} (hit = {})", r.x0, r.y0, r.terminated_by, r.hit);
    let mut info = run_info("shoot", &params);
    info.insert("t_max".into(), json!(t_max));
    info.insert("result".into(), serde_json::to_value(r).unwrap_or(Value::Null));
    info.insert("mismatch_norm".into(), json!(r.hit.then(|| r.mismatch_norm())));
    if let Some(dir) = &args.output.out {
        let out = OutDir::create(dir)?;
        if let Some(traj) = &shot.trajectory {
            let meta = with_all(Metadata::of(traj), info.clone());
            out.write_trajectory(traj, &meta, args.output.format)?;
        }
        out.write_json("shot.json", &info)?;
    }
    print_json(&info)
}

pub fn scan(args: ScanArgs) -> Result<(), CliError> {
    let params = args.model.params()?;
    let t_max = t_max(&params, args.t_max)?;
    let grid = scan_grid(&params, args.x0, args.y0, t_max, !args.serial);
    let hits = grid.results.iter().filter(|r| r.hit).count();
    let best = grid.best();
    log::info!("{hits} of {} nodes hit", grid.results.len());
    if let Some(i) = best {
        let r = &grid.results[i];
        log::info!("best node {i}: ({}, {}) mismatch {:e}", r.x0, r.y0, r.mismatch_norm());
    }
    match &args.out {
        Some(dir) => {
            let mut info = run_info("scan", &params);
            info.insert("x0".into(), json!(args.x0.to_string()));
            info.insert("y0".into(), json!(args.y0.to_string()));
            info.insert("t_max".into(), json!(t_max));
            info.insert("parallel".into(), json!(!args.serial));
            info.insert("hits".into(), json!(hits));
            info.insert("best".into(), json!(best));
            let out = OutDir::create(dir)?;
            out.write("scan.csv", |w| write_scan_csv(w, &grid))?;
            out.write_json("metadata.json", &info)
        }
        None => to_stdout(|w| write_scan_csv(w, &grid)),
    }
}

pub fn refine(args: RefineArgs) -> Result<(), CliError> {
    let params = args.model.params()?;
    let t_max = t_max(&params, args.t_max)?;
    let r = refine_start(&params, (args.x0, args.y0), args.max_iter, t_max)?;
    log::info!(
        "converged to ({:.16e}, {:.16e}) in {} iterations",
        r.x0,
        r.y0,
        r.iterations
    );
    let mut info = run_info("refine", &params);
    info.insert("seed".into(), json!([args.x0, args.y0]));
    info.insert("t_max".into(), json!(t_max));
    info.insert("refined".into(), serde_json::to_value(&r).unwrap_or(Value::Null));
    print_json(&info)
}
