//! CSV ingestion: comma separator, `.` decimal point, UTF-8, header row.
//! Parse failures carry 1-based line numbers.

use std::path::Path;

use crate::error::{CliError, CliResult};

/// One parsed row of a p-value file.
#[derive(Debug, Clone, Copy)]
pub struct PValueRow {
    /// 1-based couple index from the file.
    pub index: usize,
    pub p_h: f64,
    pub p_k: Option<f64>,
}

fn parse_probability(field: &str, what: &str, line: usize) -> CliResult<f64> {
    let value: f64 = field
        .trim()
        .parse()
        .map_err(|_| CliError::parse(line, format!("cannot parse {what} from {field:?}")))?;
    if !(0.0..=1.0).contains(&value) {
        return Err(CliError::parse(
            line,
            format!("{what} = {value} out of range [0, 1]"),
        ));
    }
    Ok(value)
}

/// Reads `index,p_h[,p_k[,decision]]`, validating that the indices are
/// exactly 1..=M. Rows are returned in index order.
pub fn read_pvalue_rows(path: &Path) -> CliResult<Vec<PValueRow>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let Some((_, header)) = lines.next() else {
        return Err(CliError::parse(1, "empty input"));
    };
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let expected: &[&[&str]] = &[
        &["index", "p_h"],
        &["index", "p_h", "p_k"],
        &["index", "p_h", "p_k", "decision"],
    ];
    if !expected.contains(&columns.as_slice()) {
        return Err(CliError::parse(
            1,
            format!("expected header index,p_h[,p_k[,decision]], got {header:?}"),
        ));
    }
    let has_p_k = columns.len() >= 3;

    let mut rows: Vec<(usize, PValueRow)> = Vec::new();
    for (line, raw) in lines {
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != columns.len() {
            return Err(CliError::parse(
                line,
                format!("expected {} fields, got {}", columns.len(), fields.len()),
            ));
        }
        let index: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| CliError::parse(line, format!("cannot parse index {:?}", fields[0])))?;
        if index == 0 {
            return Err(CliError::parse(line, "indices are 1-based"));
        }
        let p_h = parse_probability(fields[1], "p_h", line)?;
        let p_k = if has_p_k {
            Some(parse_probability(fields[2], "p_k", line)?)
        } else {
            None
        };
        if rows.iter().any(|(_, r)| r.index == index) {
            return Err(CliError::parse(line, format!("duplicate index {index}")));
        }
        rows.push((line, PValueRow { index, p_h, p_k }));
    }
    if rows.is_empty() {
        return Err(CliError::parse(2, "no data rows"));
    }
    let m = rows.len();
    for (line, row) in &rows {
        if row.index > m {
            return Err(CliError::parse(
                *line,
                format!("index {} outside 1..={m}", row.index),
            ));
        }
    }
    rows.sort_by_key(|(_, r)| r.index);
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

/// Reads a data matrix: the header names the variables, every following row
/// is one observation.
pub fn read_matrix(path: &Path) -> CliResult<(Vec<String>, Vec<Vec<f64>>)> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let Some((_, header)) = lines.next() else {
        return Err(CliError::parse(1, "empty input"));
    };
    let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    if names.iter().any(String::is_empty) {
        return Err(CliError::parse(1, "blank variable name in header"));
    }
    let mut rows = Vec::new();
    for (line, raw) in lines {
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != names.len() {
            return Err(CliError::parse(
                line,
                format!("expected {} fields, got {}", names.len(), fields.len()),
            ));
        }
        let row = fields
            .iter()
            .map(|f| {
                f.trim().parse::<f64>().map_err(|_| {
                    CliError::parse(line, format!("cannot parse value {f:?}"))
                })
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::parse(2, "no data rows"));
    }
    Ok((names, rows))
}
