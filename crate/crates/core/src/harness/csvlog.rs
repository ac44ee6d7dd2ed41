use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sim::TrialLog;

/// Column names for a robot with `dof` joints.
pub fn log_header(dof: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=dof).map(|i| format!("q{i}")));
    for c in ["d_true", "d_curr", "activation", "link", "mpr_x", "mpr_y", "mpr_z", "Amp_x", "Amp_y", "Amp_z"] {
        h.push(c.to_string());
    }
    h.extend((1..=dof).map(|i| format!("qdot{i}")));
    h
}

/// One row per tick. Numbers use shortest round-trip formatting; missing
/// values are `NaN` and a missing link is 0.
pub fn write_log_to<W: Write>(log: &TrialLog, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(log_header(log.dof))?;
    let mut rec: Vec<String> = Vec::with_capacity(2 * log.dof + 11);
    for r in &log.rows {
        rec.clear();
        rec.push(r.t.to_string());
        rec.extend(r.q.iter().map(f64::to_string));
        rec.push(r.d_true.to_string());
        rec.push(r.d_curr.unwrap_or(f64::NAN).to_string());
        rec.push(r.activation.to_string());
        match &r.nearest {
            Some(n) => {
                rec.push(n.link.to_string());
                rec.extend(n.robot_point.iter().map(f64::to_string));
                rec.extend(n.env_point.iter().map(f64::to_string));
            }
            None => {
                rec.push("0".into());
                rec.extend(std::iter::repeat_n(f64::NAN.to_string(), 6));
            }
        }
        rec.extend(r.qdot.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

pub fn write_log(log: &TrialLog, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_log_to(log, std::io::BufWriter::new(f))
}

/// Reads the `d_true` column back from a trial CSV.
pub fn read_d_true(path: &Path) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_path(path)?;
    let col = r
        .headers()?
        .iter()
        .position(|h| h == "d_true")
        .ok_or_else(|| Error::config(path, "no d_true column"))?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let v = rec[col].parse::<f64>().map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 2,
            msg: e.to_string(),
        })?;
        out.push(v);
    }
    Ok(out)
}
