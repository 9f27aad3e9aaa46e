//! CSV and JSON file formats. Every writer goes through [`write_atomic`].

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use shocksynth_core::filterbank::BasisMatrix;
use shocksynth_core::nzdf::BodePoint;
use shocksynth_core::{Signal, SrsCurve};

pub const SIGNAL_HEADER: &str = "time_s,accel_m_s2";
pub const SPEC_HEADER: &str = "freq_hz,peak_accel_m_s2";
pub const SRS_HEADER: &str = "freq_hz,srs_m_s2";
pub const BODE_HEADER: &str = "freq_hz,mag_db,phase_deg";

/// Relative deviation of any time step from the mean step that is tolerated.
pub const TIME_JITTER: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("no samples")]
    NoSamples,

    #[error(transparent)]
    Core(#[from] shocksynth_core::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io { path: path.to_path_buf(), source }
}

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(path))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| IoError::Io { path: path.to_path_buf(), source: e.error })?;
    Ok(())
}

fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(io_err(path))
}

/// Data rows of a two-column CSV with the given header, with 1-based line
/// numbers. Blank lines are skipped.
fn parse_pairs(text: &str, header: &str) -> Result<Vec<(usize, f64, f64)>, IoError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        Some((_, h)) if h.trim().is_empty() => return Err(IoError::NoSamples),
        Some((line, _)) => return Err(IoError::Parse { line, msg: format!("expected header `{header}`") }),
        None => return Err(IoError::NoSamples),
    }
    let mut rows = Vec::new();
    for (line, l) in lines {
        if l.trim().is_empty() {
            continue;
        }
        let mut fields = l.split(',');
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(IoError::Parse { line, msg: "expected two comma-separated fields".into() });
        };
        let num = |s: &str| -> Result<f64, IoError> {
            match s.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(IoError::Parse { line, msg: format!("not a finite number: `{}`", s.trim()) }),
            }
        };
        rows.push((line, num(a)?, num(b)?));
    }
    if rows.is_empty() {
        return Err(IoError::NoSamples);
    }
    Ok(rows)
}

/// Parses the `time_s,accel_m_s2` format. The sample rate is taken from the
/// mean time step.
pub fn parse_signal(text: &str) -> Result<Signal, IoError> {
    let rows = parse_pairs(text, SIGNAL_HEADER)?;
    if rows.len() < 2 {
        return Err(IoError::Parse { line: rows[0].0, msg: "need at least two samples".into() });
    }
    let t0 = rows[0].1;
    let span = rows[rows.len() - 1].1 - t0;
    let dt = span / (rows.len() - 1) as f64;
    if dt <= 0.0 {
        return Err(IoError::Parse { line: rows[1].0, msg: "non-uniform time step".into() });
    }
    for w in rows.windows(2) {
        let step = w[1].1 - w[0].1;
        if ((step - dt) / dt).abs() > TIME_JITTER {
            return Err(IoError::Parse { line: w[1].0, msg: "non-uniform time step".into() });
        }
    }
    let mut fs = 1.0 / dt;
    // times printed in decimal rarely reproduce an integral rate exactly
    if (fs - fs.round()).abs() <= TIME_JITTER * fs {
        fs = fs.round();
    }
    let samples = rows.iter().map(|r| r.2).collect();
    Ok(Signal::with_start(fs, samples, t0)?)
}

pub fn format_signal(sig: &Signal) -> String {
    let mut s = String::with_capacity(32 * (sig.len() + 1));
    s.push_str(SIGNAL_HEADER);
    s.push('\n');
    for (i, v) in sig.samples().iter().enumerate() {
        let _ = writeln!(s, "{},{}", sig.time(i), v);
    }
    s
}

pub fn read_signal(path: &Path) -> Result<Signal, IoError> {
    parse_signal(&read_text(path)?)
}

pub fn write_signal(sig: &Signal, path: &Path) -> Result<(), IoError> {
    write_atomic(path, format_signal(sig).as_bytes())
}

/// Breakpoints from the `freq_hz,peak_accel_m_s2` format.
pub fn parse_spec(text: &str) -> Result<Vec<(f64, f64)>, IoError> {
    Ok(parse_pairs(text, SPEC_HEADER)?.into_iter().map(|(_, f, a)| (f, a)).collect())
}

pub fn read_spec(path: &Path) -> Result<Vec<(f64, f64)>, IoError> {
    parse_spec(&read_text(path)?)
}

pub fn format_srs(curve: &SrsCurve) -> String {
    let mut s = String::from(SRS_HEADER);
    s.push('\n');
    for (f, v) in curve.freqs.iter().zip(&curve.values) {
        let _ = writeln!(s, "{f},{v}");
    }
    s
}

pub fn write_srs(curve: &SrsCurve, path: &Path) -> Result<(), IoError> {
    write_atomic(path, format_srs(curve).as_bytes())
}

pub fn format_bode(points: &[BodePoint]) -> String {
    let mut s = String::from(BODE_HEADER);
    s.push('\n');
    for p in points {
        let _ = writeln!(s, "{},{},{}", p.freq_hz, p.mag_db, p.phase_deg);
    }
    s
}

pub fn write_bode(points: &[BodePoint], path: &Path) -> Result<(), IoError> {
    write_atomic(path, format_bode(points).as_bytes())
}

/// A table whose first column is `first` and whose remaining columns are
/// headed by the bank centers.
fn format_table(first: &str, centers: &[f64], rows: impl Iterator<Item = (f64, Vec<f64>)>) -> String {
    let mut s = String::from(first);
    for fc in centers {
        let _ = write!(s, ",{fc}");
    }
    s.push('\n');
    for (key, vals) in rows {
        let _ = write!(s, "{key}");
        for v in vals {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

/// One column per bank center, headed by its frequency; the first column is
/// time.
pub fn format_basis(basis: &BasisMatrix) -> String {
    let first = &basis.columns[0];
    let rows = (0..basis.column_len()).map(|i| (first.time(i), basis.columns.iter().map(|c| c.samples()[i]).collect()));
    format_table("time_s", &basis.layout.centers, rows)
}

pub fn write_basis(basis: &BasisMatrix, path: &Path) -> Result<(), IoError> {
    write_atomic(path, format_basis(basis).as_bytes())
}

/// Magnitude in dB of each bank filter (one column per center) over `freqs`.
pub fn format_bank_magnitudes(centers: &[f64], freqs: &[f64], mag_db: &[Vec<f64>]) -> String {
    let rows = freqs.iter().enumerate().map(|(i, &f)| (f, mag_db.iter().map(|col| col[i]).collect()));
    format_table("freq_hz", centers, rows)
}
