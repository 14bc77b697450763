//! Atomic file output and the sweep CSV table.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::report::RwaRow;

/// Column order of the `validate-rwa` CSV table.
pub const RWA_CSV_HEADER: [&str; 11] = [
    "index",
    "eta",
    "eta_r",
    "omega_over_nu",
    "omega",
    "nu",
    "t_final",
    "infidelity",
    "accepted_steps",
    "rejected_steps",
    "norm_drift",
];

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Path of the JSON report written next to a CSV table.
pub fn companion_json(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

pub fn rwa_csv(rows: &[RwaRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RWA_CSV_HEADER).expect("in-memory write");
    for row in rows {
        w.write_record([
            row.index.to_string(),
            row.eta.to_string(),
            row.eta_r.to_string(),
            row.omega_over_nu.to_string(),
            row.omega.to_string(),
            row.nu.to_string(),
            row.t_final.to_string(),
            row.infidelity.to_string(),
            row.accepted_steps.to_string(),
            row.rejected_steps.to_string(),
            row.norm_drift.to_string(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}
