//! Latent and label CSV files.
//!
//! Both start with a header row. The latents header is `z0,z1,…,z{D-1}`; the
//! labels header is the attribute names in schema order. Values are written
//! in scientific notation with 17 significant digits, so a save/load round
//! trip is exact.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use latentmap_core::{AttributeSchema, Matrix, PairedDataset};

use crate::error::{Error, Result};

/// Header and rows of one CSV file, with every cell parsed and finite.
struct Table {
    header: Vec<String>,
    rows: Vec<f64>,
    n: usize,
}

impl Table {
    fn into_matrix(self) -> Matrix {
        Matrix::from_vec(self.n, self.header.len(), self.rows).expect("rows checked while reading")
    }
}

fn read_table(path: &Path) -> Result<Table> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_error(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.is_empty() || header == [""] {
        return Err(Error::format(path, "missing header row"));
    }
    let mut rows = Vec::new();
    let mut n = 0;
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        for (i, token) in record.iter().enumerate() {
            let cell = |reason: String| Error::Cell {
                path: path.to_path_buf(),
                line,
                column: i + 1,
                reason,
            };
            let value: f64 = token
                .trim()
                .parse()
                .map_err(|_| cell(format!("`{token}` is not a number")))?;
            if !value.is_finite() {
                return Err(cell(format!("`{token}` is not a finite number")));
            }
            rows.push(value);
        }
        n += 1;
    }
    Ok(Table { header, rows, n })
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => Error::Cell {
            path: path.to_path_buf(),
            line: line.unwrap_or(0),
            column: len as usize,
            reason: format!("row has {len} fields, header has {expected_len}"),
        },
        kind => Error::format(path, format!("{kind:?}")),
    }
}

fn write_table(path: &Path, header: &[String], m: &Matrix) -> Result<()> {
    let io = |e| Error::io(path, e);
    let file = File::create(path).map_err(io)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    let mut line = String::new();
    for row in m.row_iter() {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format!("{v:.16e}"));
        }
        line.push('\n');
        w.write_all(line.as_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn latent_header(d: usize) -> Vec<String> {
    (0..d).map(|j| format!("z{j}")).collect()
}

/// Reads a latents CSV into an `N×D` matrix.
pub fn load_latents(path: &Path) -> Result<Matrix> {
    let table = read_table(path)?;
    let expected = latent_header(table.header.len());
    if let Some(j) = (0..expected.len()).find(|&j| table.header[j] != expected[j]) {
        return Err(Error::Cell {
            path: path.to_path_buf(),
            line: 1,
            column: j + 1,
            reason: format!("expected header `{}`, found `{}`", expected[j], table.header[j]),
        });
    }
    if table.n == 0 {
        return Err(Error::format(path, "no data rows"));
    }
    Ok(table.into_matrix())
}

pub fn save_latents(path: &Path, z: &Matrix) -> Result<()> {
    write_table(path, &latent_header(z.cols()), z)
}

/// Reads and validates a paired dataset. The labels header defines the
/// attribute schema.
pub fn load_dataset(latents_path: &Path, labels_path: &Path) -> Result<PairedDataset> {
    let latents = load_latents(latents_path)?;
    let labels = read_table(labels_path)?;
    let schema = AttributeSchema::new(labels.header.clone()).map_err(|e| Error::format(labels_path, e.to_string()))?;
    if labels.n != latents.rows() {
        return Err(latentmap_core::Error::Dimension {
            context: "label rows vs latent rows",
            expected: latents.rows(),
            actual: labels.n,
        }
        .into());
    }
    PairedDataset::new(latents, labels.into_matrix(), schema).map_err(|e| match e {
        latentmap_core::Error::InvalidEntry {
            row,
            column,
            value,
            reason,
            ..
        } => Error::Cell {
            path: labels_path.to_path_buf(),
            line: row as u64 + 2,
            column: column + 1,
            reason: format!("{value} is {reason}"),
        },
        e => e.into(),
    })
}

pub fn save_dataset(ds: &PairedDataset, latents_path: &Path, labels_path: &Path) -> Result<()> {
    save_latents(latents_path, ds.latents())?;
    write_table(labels_path, ds.schema().names(), ds.labels())
}
