//! Matrix Market I/O for dense real matrices (`coordinate` and `array`
//! layouts, `general` and `symmetric` storage) plus the plain-text block
//! partition sidecar (one block size per line).

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::{BlockPartition, Matrix};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

pub fn read_matrix_market(path: &Path) -> Result<Matrix> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_matrix_market(&text, path)
}

/// Parses Matrix Market text; `path` is only used in error messages.
pub fn parse_matrix_market(text: &str, path: &Path) -> Result<Matrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(path, hline, "expected '%%MatrixMarket matrix <layout> <field> <symmetry>'"));
    }
    let layout = match tokens[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(parse_err(path, hline, format!("unsupported layout '{other}'"))),
    };
    if !matches!(tokens[3].as_str(), "real" | "integer" | "double") {
        return Err(parse_err(path, hline, format!("unsupported field '{}'", tokens[3])));
    }
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_err(path, hline, format!("unsupported symmetry '{other}'"))),
    };

    let mut data = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (sline, size) = data
        .next()
        .ok_or_else(|| parse_err(path, hline + 1, "missing size line"))?;
    let dims = parse_usizes(size, path, sline)?;
    let (rows, cols) = match (layout, dims.as_slice()) {
        (Layout::Coordinate, [r, c, _]) | (Layout::Array, [r, c]) => (*r, *c),
        _ => return Err(parse_err(path, sline, "malformed size line")),
    };
    if symmetric && rows != cols {
        return Err(parse_err(path, sline, "symmetric matrix must be square"));
    }
    let mut m = Matrix::zeros(rows, cols);

    match layout {
        Layout::Coordinate => {
            let nnz = dims[2];
            let mut seen = 0;
            for (ln, line) in data {
                let parts: Vec<&str> = line.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(parse_err(path, ln, "expected 'row col value'"));
                }
                let i = parse_index(parts[0], rows, path, ln)?;
                let j = parse_index(parts[1], cols, path, ln)?;
                let v = parse_value(parts[2], path, ln)?;
                m[(i, j)] = v;
                if symmetric {
                    m[(j, i)] = v;
                }
                seen += 1;
            }
            if seen != nnz {
                return Err(parse_err(path, sline, format!("declared {nnz} entries, found {seen}")));
            }
        }
        Layout::Array => {
            // Column-major; symmetric files store the lower triangle only.
            let slots: Vec<(usize, usize)> = (0..cols)
                .flat_map(|j| (0..rows).map(move |i| (i, j)))
                .filter(|&(i, j)| !symmetric || i >= j)
                .collect();
            let mut k = 0;
            for (ln, line) in data {
                for tok in line.split_whitespace() {
                    let &(i, j) = slots
                        .get(k)
                        .ok_or_else(|| parse_err(path, ln, "too many values"))?;
                    let v = parse_value(tok, path, ln)?;
                    m[(i, j)] = v;
                    if symmetric {
                        m[(j, i)] = v;
                    }
                    k += 1;
                }
            }
            if k != slots.len() {
                return Err(parse_err(path, sline, format!("expected {} values, found {k}", slots.len())));
            }
        }
    }
    Ok(m)
}

fn parse_usizes(line: &str, path: &Path, ln: usize) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| parse_err(path, ln, format!("'{t}' is not a nonnegative integer")))
        })
        .collect()
}

fn parse_index(tok: &str, bound: usize, path: &Path, ln: usize) -> Result<usize> {
    match tok.parse::<usize>() {
        Ok(i) if (1..=bound).contains(&i) => Ok(i - 1),
        _ => Err(parse_err(path, ln, format!("index '{tok}' outside 1..={bound}"))),
    }
}

fn parse_value(tok: &str, path: &Path, ln: usize) -> Result<f64> {
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(parse_err(path, ln, format!("'{tok}' is not a finite number"))),
    }
}

/// Writes `m` in `array real general` layout. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_matrix_market(path: &Path, m: &Matrix) -> Result<()> {
    let mut out = String::new();
    out.push_str("%%MatrixMarket matrix array real general\n");
    out.push_str(&format!("{} {}\n", m.rows(), m.cols()));
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            out.push_str(&format!("{:e}\n", m[(i, j)]));
        }
    }
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(out.as_bytes()).map_err(io_err(path))
}

pub fn read_partition(path: &Path) -> Result<BlockPartition> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut sizes = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.parse::<usize>() {
            Ok(s) if s > 0 => sizes.push(s),
            _ => return Err(parse_err(path, i + 1, format!("'{line}' is not a positive block size"))),
        }
    }
    BlockPartition::new(sizes)
}

pub fn write_partition(path: &Path, p: &BlockPartition) -> Result<()> {
    let text: String = p.sizes().iter().map(|s| format!("{s}\n")).collect();
    fs::write(path, text).map_err(io_err(path))
}
