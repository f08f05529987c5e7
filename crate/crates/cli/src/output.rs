//! Atomic file output and the TSV layouts.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use specstat::{CvResult, ProfilePoint, SpectralEstimate};

use crate::error::{CliError, Result};

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let label = path.display().to_string();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).map_err(CliError::io(format!("creating {label}")))?;
    tmp.write_all(contents.as_bytes())
        .and_then(|_| tmp.flush())
        .map_err(CliError::io(format!("writing {label}")))?;
    tmp.persist(path)
        .map_err(|e| CliError::io(format!("renaming into {label}"))(e.error))?;
    Ok(())
}

/// Standard output when `path` is `None`.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, contents),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())
                .and_then(|_| out.flush())
                .map_err(CliError::io("writing standard output"))
        }
    }
}

/// `dir/report.json` with suffix `qprofile.tsv` becomes `dir/report.qprofile.tsv`.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

pub fn profile_tsv(points: &[ProfilePoint]) -> String {
    let mut s = String::from("t\tu\tQ\n");
    for p in points {
        let _ = writeln!(s, "{}\t{}\t{}", p.center, p.u, p.q);
    }
    s
}

/// Non-negative frequencies of the raw and smoothed global periodogram.
pub fn spectrum_tsv(raw: &SpectralEstimate, smoothed: &SpectralEstimate) -> String {
    let mut s = String::from("lambda\tperiodogram\tsmoothed\n");
    for ((lambda, i), (_, g)) in raw.points().zip(smoothed.points()) {
        if lambda >= 0.0 {
            let _ = writeln!(s, "{lambda}\t{i}\t{g}");
        }
    }
    s
}

/// One segment's local and smoothed local periodogram, appended to `s`.
pub fn segment_rows(
    s: &mut String,
    segment: usize,
    center: i64,
    u: f64,
    local: &SpectralEstimate,
    smoothed: &SpectralEstimate,
) {
    for ((lambda, i), (_, v)) in local.points().zip(smoothed.points()) {
        if lambda >= 0.0 {
            let _ = writeln!(s, "{segment}\t{center}\t{u}\t{lambda}\t{i}\t{v}");
        }
    }
}

pub const SEGMENTS_HEADER: &str = "segment\tcenter\tu\tlambda\tlocal_periodogram\tsmoothed\n";

pub fn cv_tsv(cv: &CvResult) -> String {
    let mut s = String::from("h\tcv\tselected\n");
    for (&h, &score) in cv.grid.iter().zip(&cv.scores) {
        let _ = writeln!(s, "{h}\t{score}\t{}", h == cv.h_star);
    }
    s
}

/// One value per line.
pub fn series_text(values: &[f64]) -> String {
    let mut s = String::with_capacity(values.len() * 20);
    for v in values {
        let _ = writeln!(s, "{v}");
    }
    s
}
