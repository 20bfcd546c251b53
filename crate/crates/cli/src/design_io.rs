//! CSV formats: design files with `x1..xp,y1..yq` headers and output-only
//! reference files. Values carry 17 significant digits so every f64 the tool
//! writes reads back bit for bit.

use std::path::Path;

use osfd_core::design::Design;
use osfd_core::Point;

use crate::error::{CliError, CliResult};

pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_value(raw: &str, path: &Path) -> CliResult<f64> {
    raw.trim().parse().map_err(|_| {
        CliError::Config(format!("{}: `{raw}` is not a number", path.display()))
    })
}

/// A design file split back into its input and output columns.
pub struct DesignTable {
    pub inputs: Vec<Point>,
    pub outputs: Vec<Point>,
    pub p: usize,
    pub q: usize,
}

pub fn write_design(path: &Path, design: &Design) -> CliResult<()> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    let header: Vec<String> = (1..=design.input_dim())
        .map(|j| format!("x{j}"))
        .chain((1..=design.output_dim()).map(|j| format!("y{j}")))
        .collect();
    writer
        .write_record(&header)
        .and_then(|_| {
            for (x, y) in design.inputs().iter().zip(design.outputs_raw()) {
                let row: Vec<String> =
                    x.iter().chain(y.iter()).map(|&v| format_value(v)).collect();
                writer.write_record(&row)?;
            }
            writer.flush().map_err(csv::Error::from)
        })
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn read_table(path: &Path) -> CliResult<(Vec<String>, Vec<Vec<f64>>)> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record =
            record.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if record.len() != header.len() {
            return Err(CliError::Config(format!(
                "{}: row has {} fields, header has {}",
                path.display(),
                record.len(),
                header.len()
            )));
        }
        let mut row = Vec::with_capacity(record.len());
        for field in record.iter() {
            row.push(parse_value(field, path)?);
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// Column indices of the `x*` then `y*` headers, verifying the layout.
fn split_header(header: &[String], path: &Path) -> CliResult<(usize, usize)> {
    let p = header.iter().take_while(|h| h.starts_with('x')).count();
    let q = header.len() - p;
    if q == 0 || !header[p..].iter().all(|h| h.starts_with('y')) {
        return Err(CliError::Config(format!(
            "{}: header must be x1..xp followed by y1..yq",
            path.display()
        )));
    }
    Ok((p, q))
}

pub fn read_design(path: &Path) -> CliResult<DesignTable> {
    let (header, rows) = read_table(path)?;
    let (p, q) = split_header(&header, path)?;
    if p == 0 {
        return Err(CliError::Config(format!(
            "{}: design file needs at least one x column",
            path.display()
        )));
    }
    let mut inputs = Vec::with_capacity(rows.len());
    let mut outputs = Vec::with_capacity(rows.len());
    for row in rows {
        inputs.push(Point::from(&row[..p]));
        outputs.push(Point::from(&row[p..]));
    }
    Ok(DesignTable { inputs, outputs, p, q })
}

/// Output points from a reference file. Accepts output-only files with a
/// `y1..yq` header and full design files, whose x columns are ignored.
pub fn read_outputs(path: &Path) -> CliResult<Vec<Point>> {
    let (header, rows) = read_table(path)?;
    let (p, _q) = split_header(&header, path)?;
    Ok(rows.into_iter().map(|row| Point::from(&row[p..])).collect())
}

pub fn write_outputs(path: &Path, outputs: &[Point], q: usize) -> CliResult<()> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    let header: Vec<String> = (1..=q).map(|j| format!("y{j}")).collect();
    writer
        .write_record(&header)
        .and_then(|_| {
            for y in outputs {
                let row: Vec<String> = y.iter().map(|&v| format_value(v)).collect();
                writer.write_record(&row)?;
            }
            writer.flush().map_err(csv::Error::from)
        })
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}
