//! CSV and JSON artifacts. Floats are written in shortest round-trip form, so identical
//! results give byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::averaging::{FbarEstimate, MixingReport};
use crate::error::Result;
use crate::experiments::ErrorTable;
use crate::simulator::SlowFastState;
use crate::spectral::SpectralField;

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Long format: one row per `(t, mode)`.
pub fn write_trajectory<W: Write>(out: W, path: &[SlowFastState]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "mode", "x", "y"])?;
    for s in path {
        for (k, (x, y)) in s.x.coeffs().iter().zip(s.y.coeffs()).enumerate() {
            w.serialize((s.t, k + 1, x, y))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Averaged-equation path, one row per `(t, mode)`.
pub fn write_averaged<W: Write>(out: W, path: &[(f64, SpectralField)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "mode", "x"])?;
    for (t, x) in path {
        for (k, v) in x.coeffs().iter().enumerate() {
            w.serialize((t, k + 1, v))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_fbar<W: Write>(out: W, est: &FbarEstimate) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["mode", "value", "standard_error"])?;
    for (k, (v, se)) in est.value.coeffs().iter().zip(&est.standard_error).enumerate() {
        w.serialize((k + 1, v, se))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_mixing<W: Write>(out: W, report: &MixingReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "estimate", "standard_error", "fitted"])?;
    for i in 0..report.times.len() {
        w.serialize((
            report.times[i],
            report.estimates[i],
            report.standard_errors[i],
            report.fitted[i],
        ))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_error_table<W: Write>(out: W, table: &ErrorTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["epsilon", "error", "standard_error", "samples", "excluded_flag"])?;
    for r in &table.rows {
        w.serialize((r.epsilon, r.error, r.standard_error, r.samples, r.excluded))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Runs `write` against a freshly created file, creating parent directories.
pub fn to_file(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut file = create(path)?;
    write(&mut file)?;
    file.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{ErrorKind, ErrorRow};

    #[test]
    fn trajectory_layout() {
        let s = SlowFastState::new(
            SpectralField::new(vec![1.0, 0.5]).unwrap(),
            SpectralField::new(vec![-0.25, 0.0]).unwrap(),
            0.1,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &[s]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,mode,x,y\n0.0,1,1.0,-0.25\n0.0,2,0.5,0.0\n");
    }

    #[test]
    fn error_table_layout() {
        let table = ErrorTable {
            kind: ErrorKind::Weak,
            model: "tanh".into(),
            horizon: 0.5,
            basis_size: 4,
            seed: 1,
            rows: vec![ErrorRow {
                epsilon: 0.125,
                error: 0.003,
                standard_error: 0.0001,
                samples: 200,
                dropped: 0,
                excluded: true,
            }],
        };
        let mut buf = Vec::new();
        write_error_table(&mut buf, &table).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "epsilon,error,standard_error,samples,excluded_flag\n0.125,0.003,0.0001,200,true\n"
        );
    }

    #[test]
    fn files_land_in_new_directories() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a/b/fit.json");
        to_file(&path, |w| write_json(w, &[1.5, 2.0])).unwrap();
        let back: Vec<f64> = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        assert_eq!(back, vec![1.5, 2.0]);
    }
}
