use std::io::Write;

use crate::optimize::DescentHistory;
use crate::{Error, Result};

/// Bumped whenever [`HISTORY_COLUMNS`] changes.
pub const HISTORY_SCHEMA_VERSION: u32 = 1;

pub const HISTORY_COLUMNS: [&str; 7] = [
    "n",
    "t_n",
    "dual_norm",
    "running_min",
    "cum_t",
    "rate_product",
    "energy",
];

/// 17 significant digits, which round-trips every `f64`.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes the history as comma-separated values with a header row. The
/// energy cell is empty on iterations without a Monte-Carlo estimate.
pub fn write_history<W: Write>(history: &DescentHistory, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(HISTORY_COLUMNS).map_err(io)?;
    for r in history.records() {
        w.write_record([
            r.n.to_string(),
            fmt_f64(r.step),
            fmt_f64(r.dual_norm),
            fmt_f64(r.running_min),
            fmt_f64(r.cumulative_step),
            fmt_f64(r.rate_product()),
            r.energy.map(fmt_f64).unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Converts a history CSV into whitespace-separated plot columns
/// `n cum_t dual_norm running_min rate_product reference`, where
/// `reference = 1 / cum_t`. One output row per input row, after a `#`
/// header line.
pub fn emit_plotdata(csv_text: &str) -> Result<String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(csv_text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Csv {
        line: 1,
        message: e.to_string(),
    })?;
    if header.iter().collect::<Vec<_>>() != HISTORY_COLUMNS {
        return Err(Error::Csv {
            line: 1,
            message: format!("unexpected header, expected `{}`", HISTORY_COLUMNS.join(",")),
        });
    }

    let mut out = String::from("# n cum_t dual_norm running_min rate_product reference\n");
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let number = |idx: usize| -> Result<f64> {
            let cell = &record[idx];
            cell.parse::<f64>().map_err(|_| Error::Csv {
                line,
                message: format!("column `{}` is not a number: `{cell}`", HISTORY_COLUMNS[idx]),
            })
        };
        let n = record[0].parse::<u64>().map_err(|_| Error::Csv {
            line,
            message: format!("column `n` is not an integer: `{}`", &record[0]),
        })?;
        let cum_t = number(4)?;
        out.push_str(&format!(
            "{n} {} {} {} {} {}\n",
            fmt_f64(cum_t),
            fmt_f64(number(2)?),
            fmt_f64(number(3)?),
            fmt_f64(number(5)?),
            fmt_f64(1.0 / cum_t),
        ));
    }
    Ok(out)
}
