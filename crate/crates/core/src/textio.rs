//! Plain-text complex matrices.
//!
//! One matrix row per line, entries separated by whitespace, each entry
//! written as `re+imj` or `re-imj` (a bare real is accepted on input). Blank
//! lines and lines starting with `#` are ignored. Output uses 17 significant
//! digits, enough to read every `f64` back bit for bit.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::linalg::{c, Complex, ComplexMatrix};

pub fn format_complex(z: Complex) -> String {
    format!("{:.16e}{:+.16e}j", z.re, z.im)
}

/// Parses `re+imj`, `re-imj`, `imj` or `re`.
pub fn parse_complex(tok: &str) -> std::result::Result<Complex, String> {
    let bad = || format!("malformed complex entry '{tok}'");
    let Some(body) = tok.strip_suffix(['j', 'i']) else {
        return tok.parse::<f64>().map(|re| c(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that does not belong to an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "+" | "" => "1",
        "-" => "-1",
        s => s,
    };
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = im.parse().map_err(|_| bad())?;
    if !re.is_finite() || !im.is_finite() {
        return Err(format!("non-finite entry '{tok}'"));
    }
    Ok(c(re, im))
}

pub fn write_matrix<W: Write>(mut w: W, m: &ComplexMatrix) -> Result<()> {
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|&z| format_complex(z)).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

/// Reads a matrix. Errors name the 1-based line and entry column.
pub fn read_matrix<R: BufRead>(r: R) -> Result<ComplexMatrix> {
    let mut rows: Vec<Vec<Complex>> = Vec::new();
    for (ln, line) in r.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        for (col, tok) in trimmed.split_whitespace().enumerate() {
            let z = parse_complex(tok).map_err(|msg| Error::Parse {
                line: ln + 1,
                column: col + 1,
                msg,
            })?;
            row.push(z);
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    line: ln + 1,
                    column: row.len().min(first.len()) + 1,
                    msg: format!("expected {} entries, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            msg: "no matrix rows found".into(),
        });
    }
    Ok(ComplexMatrix::from_rows(&rows))
}
