//! Plot-ready CSV and JSON encodings of sweep rows.
//!
//! CSV header order is fixed: `distance_km,mu,q_zz,s,e_zz,rate_ecs,rate_bell,rate_plob`.
//! Missing values are empty fields (CSV) or `null` (JSON). Floats use the
//! shortest decimal that round-trips.

use std::io::{Read, Write};

use crate::error::Result;
use crate::sweep::SweepRow;

pub const CSV_HEADER: [&str; 8] = [
    "distance_km",
    "mu",
    "q_zz",
    "s",
    "e_zz",
    "rate_ecs",
    "rate_bell",
    "rate_plob",
];

pub fn write_csv<W: Write>(rows: &[SweepRow], writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(reader: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    if headers.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(crate::Error::InvalidParams(format!(
            "unexpected CSV header {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    r.deserialize().map(|row| row.map_err(Into::into)).collect()
}

pub fn write_json<W: Write>(rows: &[SweepRow], mut writer: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, rows)?;
    writeln!(writer)?;
    Ok(())
}

pub fn read_json<R: Read>(reader: R) -> Result<Vec<SweepRow>> {
    Ok(serde_json::from_reader(reader)?)
}
