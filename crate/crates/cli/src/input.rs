//! Dense matrix readers for CSV and Matrix Market files.

use std::fs;
use std::path::Path;

use clap::ValueEnum;
use colsel::DenseMatrix;
use serde::Serialize;

use crate::error::CliError;

/// Refuse inputs with more entries than this.
pub const MAX_ENTRIES: usize = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    #[value(name = "matrix-market", alias = "mm")]
    MatrixMarket,
}

impl Format {
    /// `.mtx` and `.mm` files are Matrix Market, everything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase) {
            Some(ext) if ext == "mtx" || ext == "mm" => Format::MatrixMarket,
            _ => Format::Csv,
        }
    }
}

pub fn load_matrix(path: &Path, format: Format) -> Result<DenseMatrix, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    match format {
        Format::Csv => parse_csv(&text),
        Format::MatrixMarket => parse_matrix_market(&text),
    }
}

fn parse_value(token: &str, line: usize, column: usize) -> Result<f64, CliError> {
    let token = token.trim();
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::BadToken {
            line,
            column,
            token: token.to_string(),
        }),
    }
}

fn check_size(rows: usize, cols: usize) -> Result<(), CliError> {
    match rows.checked_mul(cols) {
        Some(n) if n <= MAX_ENTRIES => Ok(()),
        _ => Err(CliError::TooLarge { rows, cols }),
    }
}

/// One row per line, comma separated. Blank lines are skipped.
pub fn parse_csv(text: &str) -> Result<DenseMatrix, CliError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let row = raw
            .split(',')
            .enumerate()
            .map(|(j, tok)| parse_value(tok, line, j + 1))
            .collect::<Result<Vec<_>, _>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(CliError::Ragged {
                    line,
                    expected: w,
                    found: row.len(),
                })
            }
            _ => {}
        }
        check_size(rows.len() + 1, row.len())?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Malformed {
            line: 1,
            message: "no data rows".into(),
        });
    }
    Ok(DenseMatrix::from_rows(&rows)?)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Layout {
    Array,
    Coordinate,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

fn parse_header(line: &str) -> Result<(Layout, Symmetry), CliError> {
    let words: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(CliError::Malformed {
            line: 1,
            message: "expected '%%MatrixMarket matrix <layout> <field> <symmetry>'".into(),
        });
    }
    let layout = match words[2].as_str() {
        "array" => Layout::Array,
        "coordinate" => Layout::Coordinate,
        other => return Err(CliError::Unsupported(format!("layout '{other}'"))),
    };
    if words[3] != "real" {
        return Err(CliError::Unsupported(format!("field '{}'", words[3])));
    }
    let symmetry = match (layout, words[4].as_str()) {
        (_, "general") => Symmetry::General,
        (Layout::Coordinate, "symmetric") => Symmetry::Symmetric,
        (_, other) => return Err(CliError::Unsupported(format!("symmetry '{other}' for this layout"))),
    };
    Ok((layout, symmetry))
}

fn parse_index(token: &str, bound: usize, line: usize, column: usize) -> Result<usize, CliError> {
    match token.parse::<usize>() {
        Ok(k) if (1..=bound).contains(&k) => Ok(k - 1),
        _ => Err(CliError::BadToken {
            line,
            column,
            token: token.to_string(),
        }),
    }
}

/// `array real general` (column-major) and `coordinate real general|symmetric`.
pub fn parse_matrix_market(text: &str) -> Result<DenseMatrix, CliError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or(CliError::Malformed {
        line: 1,
        message: "empty file".into(),
    })?;
    let (layout, symmetry) = parse_header(header)?;
    let mut body = lines.filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('%'));

    let (size_line, size) = body.next().ok_or(CliError::Malformed {
        line: 2,
        message: "missing size line".into(),
    })?;
    let dims: Vec<&str> = size.split_whitespace().collect();
    let expected = if layout == Layout::Array { 2 } else { 3 };
    if dims.len() != expected {
        return Err(CliError::Malformed {
            line: size_line,
            message: format!("size line needs {expected} integers"),
        });
    }
    let dim = |k: usize| {
        dims[k].parse::<usize>().map_err(|_| CliError::BadToken {
            line: size_line,
            column: k + 1,
            token: dims[k].to_string(),
        })
    };
    let (rows, cols) = (dim(0)?, dim(1)?);
    check_size(rows, cols)?;
    if symmetry == Symmetry::Symmetric && rows != cols {
        return Err(CliError::Malformed {
            line: size_line,
            message: "symmetric matrix must be square".into(),
        });
    }

    let mut m = vec![0.0; rows * cols];
    match layout {
        Layout::Array => {
            let mut k = 0;
            for (line, l) in body {
                for (j, tok) in l.split_whitespace().enumerate() {
                    let v = parse_value(tok, line, j + 1)?;
                    if k >= rows * cols {
                        return Err(CliError::Malformed {
                            line,
                            message: format!("more than {} entries", rows * cols),
                        });
                    }
                    m[(k % rows) * cols + k / rows] = v;
                    k += 1;
                }
            }
            if k != rows * cols {
                return Err(CliError::Malformed {
                    line: text.lines().count(),
                    message: format!("expected {} entries, found {k}", rows * cols),
                });
            }
        }
        Layout::Coordinate => {
            let nnz = dim(2)?;
            let mut seen = 0;
            for (line, l) in body {
                let toks: Vec<&str> = l.split_whitespace().collect();
                if toks.len() != 3 {
                    return Err(CliError::Malformed {
                        line,
                        message: "coordinate entries need 'row col value'".into(),
                    });
                }
                let i = parse_index(toks[0], rows, line, 1)?;
                let j = parse_index(toks[1], cols, line, 2)?;
                let v = parse_value(toks[2], line, 3)?;
                m[i * cols + j] = v;
                if symmetry == Symmetry::Symmetric {
                    m[j * cols + i] = v;
                }
                seen += 1;
            }
            if seen != nnz {
                return Err(CliError::Malformed {
                    line: text.lines().count(),
                    message: format!("expected {nnz} entries, found {seen}"),
                });
            }
        }
    }
    Ok(DenseMatrix::from_row_slice(rows, cols, &m)?)
}
