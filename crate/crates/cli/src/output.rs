use std::fs::{self, File};
use std::io::{BufReader, BufWriter, ErrorKind, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};
use soliton_profile::io::{
    read_trajectory_csv, read_trajectory_json, write_trajectory_csv, write_trajectory_json, Metadata,
};
use soliton_profile::{Params, Trajectory};

use crate::{CliError, Format, InputArgs};

/// An output directory, created on first use.
pub struct OutDir {
    dir: PathBuf,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    /// Opens `name` for writing and hands the writer to `f`.
    pub fn write<F>(&self, name: &str, f: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut BufWriter<File>) -> soliton_profile::Result<()>,
    {
        let path = self.dir.join(name);
        let io_err = |source| CliError::Io {
            path: path.clone(),
            source,
        };
        let mut w = BufWriter::new(File::create(&path).map_err(io_err)?);
        f(&mut w)?;
        w.flush().map_err(io_err)?;
        log::debug!("wrote {}", path.display());
        Ok(())
    }

    pub fn write_json(&self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value).map_err(|e| soliton_profile::Error::Parse(e.to_string()))?;
            writeln!(w)?;
            Ok(())
        })
    }

    pub fn write_trajectory(&self, traj: &Trajectory, meta: &Metadata, format: Format) -> Result<(), CliError> {
        match format {
            Format::Csv => self.write("trajectory.csv", |w| write_trajectory_csv(w, traj)),
            Format::Json => self.write("trajectory.json", |w| write_trajectory_json(w, traj, meta)),
        }
    }
}

pub fn print_json(value: &impl Serialize) -> Result<(), CliError> {
    to_stdout(|w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(|e| {
            if e.is_io() {
                soliton_profile::Error::Io(e.into())
            } else {
                soliton_profile::Error::Parse(e.to_string())
            }
        })?;
        writeln!(w)?;
        Ok(())
    })
}

/// Runs `f` against a locked stdout. A closed pipe on the reading end is
/// not an error.
pub fn to_stdout<F>(f: F) -> Result<(), CliError>
where
    F: FnOnce(&mut std::io::StdoutLock<'static>) -> soliton_profile::Result<()>,
{
    let mut out = std::io::stdout().lock();
    let result = f(&mut out).and_then(|()| Ok(out.flush()?));
    match result {
        Err(soliton_profile::Error::Io(e)) if e.kind() == ErrorKind::BrokenPipe => Ok(()),
        Err(soliton_profile::Error::Io(source)) => Err(CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
        other => Ok(other?),
    }
}

/// The settings every run records, so output files describe themselves.
pub fn run_info(command: &str, params: &Params) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("params".into(), serde_json::to_value(params).unwrap_or(Value::Null));
    m
}

/// Adds the entries of `extra` to trajectory metadata.
pub fn with_all(mut meta: Metadata, extra: Map<String, Value>) -> Metadata {
    meta.extra.extend(extra);
    meta
}

/// Loads a trajectory and the parameters it belongs to.
///
/// JSON carries `(m, k)` in its metadata and any `--m/--k` given must agree;
/// CSV needs both flags.
pub fn load(input: &InputArgs) -> Result<Trajectory, CliError> {
    let format = input
        .input_format
        .unwrap_or_else(|| match input.file.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        });
    let file = File::open(&input.file).map_err(|source| CliError::Io {
        path: input.file.clone(),
        source,
    })?;
    let reader = BufReader::new(file);
    let traj = match format {
        Format::Json => {
            let (traj, meta) = read_trajectory_json(reader)?;
            for (flag, given, stored) in [("m", input.m, meta.m), ("k", input.k, meta.k)] {
                if given.is_some_and(|g| g != stored) {
                    return Err(CliError::Usage(format!(
                        "--{flag} {} disagrees with {flag} = {stored} in {}",
                        given.unwrap_or_default(),
                        input.file.display()
                    )));
                }
            }
            traj
        }
        Format::Csv => {
            let (Some(m), Some(k)) = (input.m, input.k) else {
                return Err(CliError::Usage("CSV input needs --m and --k".into()));
            };
            let params = Params::new(m, k).map_err(|e| CliError::Usage(e.to_string()))?;
            read_trajectory_csv(reader, params)?
        }
    };
    log::info!(
        "read {} samples on [{}, {}] from {}",
        traj.len(),
        traj.t_start(),
        traj.t_end(),
        input.file.display()
    );
    Ok(traj)
}
