//! CSV and JSON serialization of trajectories and reports.
//!
//! Trajectory CSV has the header `t,x,xd,y,yd,phi,phid` and writes every
//! value with 17 significant digits, so a write/read cycle is bit-exact.
//! The JSON form is `{"metadata": {...}, "samples": [...]}`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::explorer::ScanGrid;
use crate::geometry::{GeometricSample, RadialSample, SolitonResidualSample};
use crate::ode::ResidualReport;
use crate::{Branch, Error, Params, ProfileState, Result, Trajectory};

pub const TRAJECTORY_HEADER: [&str; 7] = ["t", "x", "xd", "y", "yd", "phi", "phid"];
pub const GEOMETRY_HEADER: [&str; 8] = ["t", "alpha", "beta", "sigma", "f", "scal", "lap_kappa", "grad_kappa_sq"];
pub const SOLITON_HEADER: [&str; 4] = ["t", "r_nfz", "r_med", "r_eyd"];
pub const RESIDUAL_HEADER: [&str; 6] = ["t", "eq_xdd1", "eq_xdd2", "eq_xdd3", "eq_int", "drift"];
pub const RADIAL_HEADER: [&str; 4] = ["r", "t", "gap", "phi"];
pub const SCAN_HEADER: [&str; 9] = [
    "x0",
    "y0",
    "hit",
    "T_hit",
    "mismatch1",
    "mismatch2",
    "drift",
    "nontriviality",
    "terminated_by",
];

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    if e.is_io_error() {
        if let csv::ErrorKind::Io(io) = e.into_kind() {
            return Error::Io(io);
        }
        unreachable!("is_io_error implies an Io kind");
    }
    Error::Parse(e.to_string())
}

fn write_rows<W: Write>(w: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header).map_err(csv_err)?;
    for row in rows {
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_trajectory_csv<W: Write>(w: W, traj: &Trajectory) -> Result<()> {
    write_rows(
        w,
        &TRAJECTORY_HEADER,
        traj.samples().iter().map(|s| {
            [s.t, s.x, s.xd, s.y, s.yd, s.phi, s.phid]
                .iter()
                .map(|v| num(*v))
                .collect()
        }),
    )
}

/// Reads a trajectory CSV. The file carries no parameters, so they are
/// supplied by the caller; the branch is recorded as `external`.
///
/// The last record must end in a newline: a file cut off inside a number
/// would otherwise still parse.
pub fn read_trajectory_csv<R: Read>(mut r: R, params: Params) -> Result<Trajectory> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    if !buf.is_empty() && !buf.ends_with(b"\n") {
        return Err(Error::Parse(
            "last record is not terminated by a newline; file truncated?".into(),
        ));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(&buf[..]);
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.iter().ne(TRAJECTORY_HEADER.iter().copied()) {
        return Err(Error::Parse(format!(
            "expected header {}, got {}",
            TRAJECTORY_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut samples = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != 7 {
            return Err(Error::Parse(format!(
                "row {}: expected 7 fields, got {}",
                i + 1,
                rec.len()
            )));
        }
        let mut v = [0.0; 7];
        for (j, field) in rec.iter().enumerate() {
            v[j] = field.parse().map_err(|e| {
                Error::Parse(format!(
                    "row {}, column {}: {field:?}: {e}",
                    i + 1,
                    TRAJECTORY_HEADER[j]
                ))
            })?;
        }
        samples.push(ProfileState::from_fields(v[0], [v[1], v[2], v[3], v[4], v[5], v[6]]));
    }
    Trajectory::new(params, samples, Branch::External, None)
}

/// Trajectory metadata. Fields beyond the fixed ones are kept in `extra`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub m: u32,
    pub k: u32,
    pub branch: Branch,
    #[serde(default)]
    pub a: Option<f64>,
    pub t_start: f64,
    pub t_end: f64,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl Metadata {
    pub fn of(traj: &Trajectory) -> Self {
        let p = traj.params();
        Self {
            m: p.m,
            k: p.k,
            branch: traj.branch(),
            a: traj.a(),
            t_start: traj.t_start(),
            t_end: traj.t_end(),
            extra: Map::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.extra
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }
}

#[derive(Serialize, Deserialize)]
struct TrajectoryDoc {
    metadata: Metadata,
    samples: Vec<ProfileState>,
}

pub fn write_trajectory_json<W: Write>(w: W, traj: &Trajectory, metadata: &Metadata) -> Result<()> {
    #[derive(Serialize)]
    struct Doc<'a> {
        metadata: &'a Metadata,
        samples: &'a [ProfileState],
    }
    let doc = Doc {
        metadata,
        samples: traj.samples(),
    };
    serde_json::to_writer_pretty(w, &doc).map_err(|e| Error::Parse(e.to_string()))
}

/// Reads a trajectory JSON document. `m`, `k` come from the metadata (with
/// default tolerances); `t_start`/`t_end` must agree with the samples.
pub fn read_trajectory_json<R: Read>(r: R) -> Result<(Trajectory, Metadata)> {
    let doc: TrajectoryDoc = serde_json::from_reader(r).map_err(|e| {
        if e.is_io() {
            Error::Io(e.into())
        } else {
            Error::Parse(e.to_string())
        }
    })?;
    let params = Params::new(doc.metadata.m, doc.metadata.k).map_err(|e| Error::Parse(e.to_string()))?;
    let traj = Trajectory::new(params, doc.samples, doc.metadata.branch, doc.metadata.a)?;
    if traj.t_start() != doc.metadata.t_start || traj.t_end() != doc.metadata.t_end {
        return Err(Error::Parse(format!(
            "metadata interval [{}, {}] disagrees with samples [{}, {}]",
            doc.metadata.t_start,
            doc.metadata.t_end,
            traj.t_start(),
            traj.t_end()
        )));
    }
    Ok((traj, doc.metadata))
}

pub fn write_residuals_csv<W: Write>(w: W, report: &ResidualReport) -> Result<()> {
    write_rows(
        w,
        &RESIDUAL_HEADER,
        (0..report.t.len()).map(|i| {
            [
                report.t[i],
                report.eq_xdd1[i],
                report.eq_xdd2[i],
                report.eq_xdd3[i],
                report.eq_int[i],
                report.drift[i],
            ]
            .iter()
            .map(|v| num(*v))
            .collect()
        }),
    )
}

pub fn write_geometry_csv<W: Write>(w: W, samples: &[GeometricSample]) -> Result<()> {
    write_rows(
        w,
        &GEOMETRY_HEADER,
        samples.iter().map(|g| {
            [g.t, g.alpha, g.beta, g.sigma, g.f, g.scal, g.lap_kappa, g.grad_kappa_sq]
                .iter()
                .map(|v| num(*v))
                .collect()
        }),
    )
}

pub fn write_soliton_csv<W: Write>(w: W, samples: &[SolitonResidualSample]) -> Result<()> {
    write_rows(
        w,
        &SOLITON_HEADER,
        samples
            .iter()
            .map(|s| [s.t, s.r_nfz, s.r_med, s.r_eyd].iter().map(|v| num(*v)).collect()),
    )
}

pub fn write_scan_csv<W: Write>(w: W, grid: &ScanGrid) -> Result<()> {
    write_rows(
        w,
        &SCAN_HEADER,
        grid.results.iter().map(|r| {
            vec![
                num(r.x0),
                num(r.y0),
                r.hit.to_string(),
                opt(r.t_hit),
                opt(r.mismatch1),
                opt(r.mismatch2),
                opt(r.drift),
                opt(r.nontriviality),
                r.terminated_by.to_string(),
            ]
        }),
    )
}

pub fn write_radial_csv<W: Write>(w: W, rows: &[RadialSample]) -> Result<()> {
    write_rows(
        w,
        &RADIAL_HEADER,
        rows.iter()
            .map(|s| [s.r, s.t, s.gap, s.phi].iter().map(|v| num(*v)).collect()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_traj() -> Trajectory {
        let p = Params::new(3, 1).unwrap();
        let samples = (0..5)
            .map(|i| {
                let t = 0.1 * i as f64 + 1.0 / 3.0;
                ProfileState::from_fields(t, [t.sin(), -t, 1e-300 * t, 1e300, 0.1f64.powi(i), -0.0])
            })
            .collect();
        Trajectory::new(p, samples, Branch::Shot, Some(-0.1)).unwrap()
    }

    #[test]
    fn csv_round_trip_bit_exact() {
        let tr = sample_traj();
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &tr).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,x,xd,y,yd,phi,phid\n"));
        let back = read_trajectory_csv(&buf[..], *tr.params()).unwrap();
        for (a, b) in tr.samples().iter().zip(back.samples()) {
            assert_eq!(a.t.to_bits(), b.t.to_bits());
            for (u, v) in a.fields().iter().zip(b.fields()) {
                assert_eq!(u.to_bits(), v.to_bits());
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let tr = sample_traj();
        let meta = Metadata::of(&tr).with("note", "x");
        let mut buf = Vec::new();
        write_trajectory_json(&mut buf, &tr, &meta).unwrap();
        let (back, m2) = read_trajectory_json(&buf[..]).unwrap();
        assert_eq!(back.samples(), tr.samples());
        assert_eq!(m2, meta);
        assert_eq!(back.branch(), Branch::Shot);
    }

    #[test]
    fn csv_rejects_garbage() {
        let p = Params::new(2, 1).unwrap();
        for bad in [
            "",
            "t,x\n1,2\n",
            "t,x,xd,y,yd,phi,phid\n",
            "t,x,xd,y,yd,phi,phid\n0,0,0,0,0,0\n",
            "t,x,xd,y,yd,phi,phid\n0,0,0,0,0,0,nope\n",
            "t,x,xd,y,yd,phi,phid\n1,0,0,0,0,0,0\n0,0,0,0,0,0,0\n",
            "t,x,xd,y,yd,phi,phid\n0,0,0,0,0,0,inf\n",
            "t,x,xd,y,yd,phi,phid\n0,0,0,0,0,0,0\n1,0,0,0,0,0,0.12",
        ] {
            assert!(
                matches!(read_trajectory_csv(bad.as_bytes(), p), Err(Error::Parse(_))),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn json_rejects_inconsistent_metadata() {
        let doc = r#"{"metadata":{"m":2,"k":1,"branch":"shot","t_start":0,"t_end":2},
            "samples":[{"t":0,"x":0,"xd":0,"y":0,"yd":0,"phi":0,"phid":1},
                       {"t":1,"x":0,"xd":0,"y":0,"yd":0,"phi":0,"phid":1}]}"#;
        assert!(read_trajectory_json(doc.as_bytes()).is_err());
        let doc = doc.replace("\"m\":2", "\"m\":1");
        assert!(read_trajectory_json(doc.as_bytes()).is_err());
    }
}
