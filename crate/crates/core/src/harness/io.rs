use std::io::Write;
use std::path::Path;

use super::SweepRow;
use crate::error::{Error, Result};

pub const SWEEP_CSV_HEADER: [&str; 12] =
    ["grid_idx", "K", "w", "k", "N", "seed", "verdict", "spread", "omega_locked", "T_conv", "error", "config_json"];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Sweep rows as CSV text. Floats use the shortest representation that
/// round-trips; absent values are empty fields.
pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_CSV_HEADER).expect("in-memory write");
    for r in rows {
        let o = &r.outcome;
        w.write_record([
            r.grid_idx.to_string(),
            r.coupling.to_string(),
            opt(r.w),
            r.k.to_string(),
            r.n.to_string(),
            opt(r.seed),
            o.verdict.clone().unwrap_or_default(),
            opt(o.spread),
            opt(o.omega_locked),
            opt(o.t_conv),
            o.error.clone().unwrap_or_default(),
            r.config_json.clone(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

pub fn write_rows_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    atomic_write(path, rows_to_csv(rows).as_bytes())
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never observe a partial file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::PointOutcome;

    #[test]
    fn csv_quotes_json_and_leaves_gaps() {
        let row = SweepRow {
            grid_idx: 3,
            indices: vec![3],
            replicate: 0,
            coupling: 0.02,
            w: None,
            k: 10.0,
            n: 20,
            seed: Some(5),
            outcome: PointOutcome { verdict: Some("locked".into()), spread: Some(1e-6), ..Default::default() },
            config_json: r#"{"a":1,"b":"x"}"#.into(),
        };
        let text = rows_to_csv(&[row]);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SWEEP_CSV_HEADER.join(","));
        assert_eq!(lines.next().unwrap(), r#"3,0.02,,10,20,5,locked,0.000001,,,,"{""a"":1,""b"":""x""}""#);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        atomic_write(&p, b"one").unwrap();
        atomic_write(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
