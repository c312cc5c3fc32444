use std::io::{Read, Write};

use crate::diagnostics::DiagRecord;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 8] = [
    "time", "energy", "enstrophy_u", "enstrophy_B", "div_u", "div_B", "q_u_L4", "q_B_L4",
];

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::param(format!("csv: {other:?}")),
    }
}

/// Writes the header and one row per record, each value with 17
/// significant digits.
pub fn write_csv<W: Write>(out: W, records: &[DiagRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in records {
        let row = [
            r.time, r.energy, r.enstrophy_u, r.enstrophy_b, r.div_u, r.div_b, r.q_u_l4, r.q_b_l4,
        ];
        w.write_record(row.iter().map(|v| format!("{v:.16e}"))).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<DiagRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::param(format!("unexpected csv header {header:?}")));
    }
    let mut out = Vec::new();
    for row in r.records() {
        let row = row.map_err(csv_err)?;
        let v = row
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| Error::param(format!("bad number {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if v.len() != CSV_HEADER.len() {
            return Err(Error::param(format!("row has {} columns", v.len())));
        }
        out.push(DiagRecord {
            time: v[0],
            energy: v[1],
            enstrophy_u: v[2],
            enstrophy_b: v[3],
            div_u: v[4],
            div_b: v[5],
            q_u_l4: v[6],
            q_b_l4: v[7],
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "time,energy,enstrophy_u,enstrophy_B,div_u,div_B,q_u_L4,q_B_L4\n"
        );
    }

    #[test]
    fn record_roundtrips() {
        let r = DiagRecord {
            time: 0.1,
            energy: std::f64::consts::PI.powi(3),
            enstrophy_u: 1.0 / 3.0,
            enstrophy_b: 2e-300,
            div_u: 0.0,
            div_b: 1.2345678901234567e-17,
            q_u_l4: 7.0,
            q_b_l4: f64::MIN_POSITIVE,
        };
        let mut buf = Vec::new();
        write_csv(&mut buf, &[r]).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, vec![r]);
    }
}
