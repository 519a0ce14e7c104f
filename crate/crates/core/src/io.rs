//! Plain-text field dump format shared by all tooling.
//!
//! Layout: a single header line
//!
//! ```text
//! FIELD v1 <kind> <nx> <ny> <x_min> <x_max> <y_min> <y_max>
//! ```
//!
//! with `kind` either `vector` (node-sampled, ny+1 lines of 2(nx+1) values,
//! components interleaved) or `tensor` (cell-sampled, ny lines of 4·nx values,
//! entries interleaved row-major), followed by the samples in ASCII float64,
//! one grid row per line. Values are printed in Rust's shortest round-trip
//! form, so write → read reproduces the field bit-exactly.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};

use crate::error::{Error, Result};
use crate::field::{TensorField, VectorField};
use crate::grid::Grid2;

pub fn write_vector<W: Write>(w: &mut W, field: &VectorField) -> Result<()> {
    let g = &field.grid;
    writeln!(w, "FIELD v1 vector {} {} {} {} {} {}", g.nx, g.ny, g.x_min, g.x_max, g.y_min, g.y_max)?;
    for j in 0..=g.ny {
        let row = &field.data[2 * g.node_index(0, j)..2 * g.node_index(g.nx, j) + 2];
        writeln!(w, "{}", join(row))?;
    }
    Ok(())
}

pub fn write_tensor<W: Write>(w: &mut W, field: &TensorField) -> Result<()> {
    let g = &field.grid;
    writeln!(w, "FIELD v1 tensor {} {} {} {} {} {}", g.nx, g.ny, g.x_min, g.x_max, g.y_min, g.y_max)?;
    for cy in 0..g.ny {
        let row = &field.data[4 * g.cell_index(0, cy)..4 * g.cell_index(g.nx - 1, cy) + 4];
        writeln!(w, "{}", join(row))?;
    }
    Ok(())
}

pub fn save_vector(path: &std::path::Path, field: &VectorField) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    write_vector(&mut w, field)
}

pub fn save_tensor(path: &std::path::Path, field: &TensorField) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    write_tensor(&mut w, field)
}

pub enum AnyField {
    Vector(VectorField),
    Tensor(TensorField),
}

pub fn read_field<R: Read>(r: R) -> Result<AnyField> {
    let mut lines = BufReader::new(r).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty field dump".into()))??;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 9 || toks[0] != "FIELD" || toks[1] != "v1" {
        return Err(Error::Parse(format!("bad field header: {header}")));
    }
    let kind = toks[2];
    let nx: usize = parse(toks[3])?;
    let ny: usize = parse(toks[4])?;
    let bounds: Vec<f64> = toks[5..9].iter().map(|t| parse(t)).collect::<Result<_>>()?;
    let grid = Grid2::new(nx, ny, bounds[0], bounds[1], bounds[2], bounds[3])?;
    let (rows, per_row) = match kind {
        "vector" => (ny + 1, 2 * (nx + 1)),
        "tensor" => (ny, 4 * nx),
        other => return Err(Error::Parse(format!("unknown field kind: {other}"))),
    };
    let mut data = Vec::with_capacity(rows * per_row);
    for jr in 0..rows {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("field dump truncated at row {jr}")))??;
        let before = data.len();
        for tok in line.split_whitespace() {
            data.push(parse::<f64>(tok)?);
        }
        if data.len() - before != per_row {
            return Err(Error::Parse(format!(
                "row {jr} has {} values, expected {per_row}",
                data.len() - before
            )));
        }
    }
    Ok(match kind {
        "vector" => AnyField::Vector(VectorField { grid, data }),
        _ => AnyField::Tensor(TensorField { grid, data }),
    })
}

pub fn load_vector(path: &std::path::Path) -> Result<VectorField> {
    match read_field(std::fs::File::open(path)?)? {
        AnyField::Vector(v) => Ok(v),
        AnyField::Tensor(_) => Err(Error::Parse(format!("{}: expected a vector field", path.display()))),
    }
}

pub fn load_tensor(path: &std::path::Path) -> Result<TensorField> {
    match read_field(std::fs::File::open(path)?)? {
        AnyField::Tensor(t) => Ok(t),
        AnyField::Vector(_) => Err(Error::Parse(format!("{}: expected a tensor field", path.display()))),
    }
}

fn parse<T: std::str::FromStr>(tok: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::Parse(format!("bad numeric token: {tok}")))
}

fn join(vals: &[f64]) -> String {
    let mut s = String::with_capacity(vals.len() * 20);
    for (k, v) in vals.iter().enumerate() {
        if k > 0 {
            s.push(' ');
        }
        s.push_str(&format!("{v}"));
    }
    s
}
