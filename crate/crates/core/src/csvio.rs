//! Comma-separated numeric input and matrix output.
//!
//! Input may start with one header row; it is recognised by any field that
//! does not parse as a number. Output floats carry 17 significant digits.

use std::io::{Read, Write};

use crate::copula::DataMatrix;
use crate::error::{Error, Result};
use crate::harness::fmt_f64;
use crate::linalg::SymMatrix;
use crate::regularize::SparsePcaResult;

/// Parsed data with the header row, if there was one.
#[derive(Debug, Clone, PartialEq)]
pub struct DataCsv {
    pub header: Option<Vec<String>>,
    pub data: DataMatrix,
}

fn parse_field(s: &str) -> Option<f64> {
    let t = s.trim();
    // Rust accepts "inf"/"nan" spellings; treat them as numbers so they are
    // reported as non-finite rather than mistaken for a header.
    t.parse::<f64>().ok()
}

/// Reads an `n x d` numeric table.
pub fn read_data_csv(r: impl Read) -> Result<DataCsv> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut header = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 1;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: Vec<Option<f64>> = rec.iter().map(parse_field).collect();
        if i == 0 && parsed.iter().any(Option::is_none) {
            header = Some(rec.iter().map(str::to_string).collect::<Vec<_>>());
            width = Some(rec.len());
            continue;
        }
        match width {
            Some(w) if w != rec.len() => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {w} fields, got {}", rec.len()),
                })
            }
            None => width = Some(rec.len()),
            _ => {}
        }
        let mut row = Vec::with_capacity(parsed.len());
        for (j, v) in parsed.into_iter().enumerate() {
            let v = v.ok_or_else(|| Error::Parse {
                line,
                message: format!("field {} is not a number: {:?}", j + 1, &rec[j]),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite { row: rows.len(), col: j });
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no data rows".into(),
        });
    }
    Ok(DataCsv {
        header,
        data: DataMatrix::from_rows(&rows)?,
    })
}

/// Writes a symmetric matrix row by row.
pub fn write_matrix_csv(m: &SymMatrix, header: Option<&[String]>, mut w: impl Write) -> Result<()> {
    if let Some(h) = header {
        writeln!(w, "{}", h.join(","))?;
    }
    for j in 0..m.dim() {
        let row: Vec<String> = m.row(j).iter().map(|&v| fmt_f64(v)).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Reads a square numeric matrix (optional header) as a symmetric matrix.
pub fn read_matrix_csv(r: impl Read) -> Result<SymMatrix> {
    let parsed = read_data_csv(r)?;
    let rows: Vec<Vec<f64>> = (0..parsed.data.n()).map(|i| parsed.data.row(i)).collect();
    SymMatrix::from_rows(&rows)
}

/// One line per coordinate: `index,name,in_support,value`, preceded by the
/// leading eigenvalue.
pub fn write_sparse_pca_csv(r: &SparsePcaResult, names: Option<&[String]>, mut w: impl Write) -> Result<()> {
    writeln!(w, "# leading_value={}", fmt_f64(r.leading_value))?;
    writeln!(w, "index,name,in_support,value")?;
    for (i, &v) in r.leading_vector.iter().enumerate() {
        let name = names.and_then(|n| n.get(i)).map_or_else(|| format!("V{}", i + 1), Clone::clone);
        let inside = r.support.binary_search(&i).is_ok();
        writeln!(w, "{i},{name},{inside},{}", fmt_f64(v))?;
    }
    Ok(())
}
