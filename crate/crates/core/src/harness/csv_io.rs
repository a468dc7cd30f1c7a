use std::path::Path;

use super::SweepRecord;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 10] = [
    "n", "k", "m", "theta", "eta", "h", "trials", "successes", "prob", "master_seed",
];

fn float(v: f64) -> String {
    // 17 significant digits: exact round trip for every finite f64.
    format!("{v:.16e}")
}

/// Write records sorted by `n`, then `m`.
pub fn emit_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    let wrap = |source: csv::Error| Error::Csv {
        path: path.into(),
        source,
    };
    let mut sorted: Vec<&SweepRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.n, r.m));
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    w.write_record(CSV_HEADER).map_err(wrap)?;
    for r in sorted {
        w.write_record([
            r.n.to_string(),
            r.k.to_string(),
            r.m.to_string(),
            float(r.theta),
            float(r.eta),
            float(r.h),
            r.trials.to_string(),
            r.successes.to_string(),
            float(r.prob),
            r.master_seed.to_string(),
        ])
        .map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRecord>> {
    let wrap = |source: csv::Error| Error::Csv {
        path: path.into(),
        source,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(wrap)?;
    let header = rdr.headers().map_err(wrap)?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::InvalidConfig(format!(
            "{}: unexpected header {:?}",
            path.display(),
            header
        )));
    }
    rdr.deserialize().map(|row| row.map_err(wrap)).collect()
}
