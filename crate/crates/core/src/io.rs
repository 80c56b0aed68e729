//! Plain-text formats.
//!
//! * sequences: one entry per line, optionally preceded by `#tail power_decay c s`;
//! * matrices: one comma-separated row per line;
//! * measures with a sampled function: `node,weight,sample` per line
//!   (an optional `node,weight,sample` header is skipped);
//! * two-variable samples: a header `y,<y_1>,…,<y_m>` followed by rows
//!   `<x_i>,f(x_i,y_1),…,f(x_i,y_m)`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::function_space::{DiscreteMeasureSpace, GridFunction, MeasureKind};
use crate::linalg::Matrix;
use crate::sequence_space::{Tail, WeightedSequence};

const TAIL_PREFIX: &str = "#tail";

fn parse_f64(field: &str, line: usize) -> Result<f64> {
    let t = field.trim();
    t.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse { line, msg: format!("expected a finite number, found {t:?}") })
}

/// Numeric CSV records with 1-based line numbers (shifted by `offset` header
/// lines). Blank lines are skipped.
fn records(text: &str, offset: usize) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|err| Error::Parse {
            line: err.position().map_or(0, |p| p.line() as usize) + offset,
            msg: err.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize) + offset;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let row = rec.iter().map(|f| parse_f64(f, line)).collect::<Result<Vec<_>>>()?;
        out.push((line, row));
    }
    Ok(out)
}

/// Splits off a leading line; returns it together with the remainder.
fn first_line(text: &str) -> (&str, &str) {
    match text.find('\n') {
        Some(i) => (&text[..i], &text[i + 1..]),
        None => (text, ""),
    }
}

pub fn parse_sequence(text: &str) -> Result<WeightedSequence> {
    let (head, rest) = first_line(text);
    let (tail, body, offset) = if head.trim_start().starts_with(TAIL_PREFIX) {
        let fields: Vec<&str> = head.split_whitespace().collect();
        match fields.as_slice() {
            [_, "power_decay", c, s] => {
                (Tail::PowerDecay { c: parse_f64(c, 1)?, s: parse_f64(s, 1)? }, rest, 1)
            }
            _ => {
                return Err(Error::Parse { line: 1, msg: format!("expected `#tail power_decay c s`, found {head:?}") })
            }
        }
    } else {
        (Tail::None, text, 0)
    };
    let mut entries = Vec::new();
    for (line, row) in records(body, offset)? {
        if row.len() != 1 {
            return Err(Error::Parse { line, msg: format!("expected one value, found {}", row.len()) });
        }
        entries.push(row[0]);
    }
    WeightedSequence::with_tail(entries, tail)
}

pub fn write_sequence<W: Write>(mut out: W, x: &WeightedSequence) -> Result<()> {
    if let Tail::PowerDecay { c, s } = x.tail() {
        writeln!(out, "{TAIL_PREFIX} power_decay {c} {s}")?;
    }
    for v in x.entries() {
        writeln!(out, "{v}")?;
    }
    Ok(())
}

pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let rows = records(text, 0)?;
    let Some((_, first)) = rows.first() else {
        return Err(Error::Parse { line: 1, msg: "empty matrix".into() });
    };
    let cols = first.len();
    if let Some((line, row)) = rows.iter().find(|(_, r)| r.len() != cols) {
        return Err(Error::Parse { line: *line, msg: format!("expected {cols} columns, found {}", row.len()) });
    }
    let data: Vec<f64> = rows.iter().flat_map(|(_, r)| r.iter().copied()).collect();
    Matrix::from_row_major(rows.len(), cols, data)
}

pub fn write_matrix<W: Write>(mut out: W, m: &Matrix) -> Result<()> {
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(f64::to_string).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Reads `node,weight,sample` lines as a quadrature measure and a function.
pub fn parse_measure_function(text: &str) -> Result<(DiscreteMeasureSpace, GridFunction)> {
    let (head, rest) = first_line(text);
    let body = if head.trim().eq_ignore_ascii_case("node,weight,sample") { rest } else { text };
    let offset = usize::from(body.len() != text.len());
    let (mut nodes, mut weights, mut samples) = (Vec::new(), Vec::new(), Vec::new());
    for (line, row) in records(body, offset)? {
        let [x, w, f] = row[..] else {
            return Err(Error::Parse { line, msg: format!("expected node,weight,sample; found {} fields", row.len()) });
        };
        nodes.push(x);
        weights.push(w);
        samples.push(f);
    }
    let kind = if weights.iter().all(|&w| w == 1.0) && nodes.iter().enumerate().all(|(i, &x)| x == i as f64) {
        MeasureKind::Counting
    } else {
        MeasureKind::Quadrature
    };
    Ok((DiscreteMeasureSpace::new(kind, nodes, weights)?, GridFunction::new(samples)?))
}

pub fn write_measure_function<W: Write>(mut out: W, mu: &DiscreteMeasureSpace, f: &GridFunction) -> Result<()> {
    if mu.len() != f.len() {
        return Err(Error::Shape(format!("{} samples on {} nodes", f.len(), mu.len())));
    }
    writeln!(out, "node,weight,sample")?;
    for ((x, w), v) in mu.nodes().iter().zip(mu.weights()).zip(f.samples()) {
        writeln!(out, "{x},{w},{v}")?;
    }
    Ok(())
}

/// Two-variable samples: `(x_nodes, y_nodes, f)` with `f[(i, j)] = f(x_i, y_j)`.
pub fn parse_grid2(text: &str) -> Result<(Vec<f64>, Vec<f64>, Matrix)> {
    let (head, rest) = first_line(text);
    let mut fields = head.split(',');
    match fields.next() {
        Some(tag) if tag.trim() == "y" => {}
        _ => return Err(Error::Parse { line: 1, msg: "expected a header row starting with `y`".into() }),
    }
    let ys = fields.map(|f| parse_f64(f, 1)).collect::<Result<Vec<_>>>()?;
    let mut xs = Vec::new();
    let mut data = Vec::new();
    for (line, row) in records(rest, 1)? {
        if row.len() != ys.len() + 1 {
            return Err(Error::Parse { line, msg: format!("expected {} fields, found {}", ys.len() + 1, row.len()) });
        }
        xs.push(row[0]);
        data.extend_from_slice(&row[1..]);
    }
    let m = Matrix::from_row_major(xs.len(), ys.len(), data)?;
    Ok((xs, ys, m))
}

pub fn write_grid2<W: Write>(mut out: W, xs: &[f64], ys: &[f64], f: &Matrix) -> Result<()> {
    if f.rows() != xs.len() || f.cols() != ys.len() {
        return Err(Error::Shape("grid does not match its node lists".into()));
    }
    let header: Vec<String> = ys.iter().map(f64::to_string).collect();
    writeln!(out, "y,{}", header.join(","))?;
    for (i, x) in xs.iter().enumerate() {
        let row: Vec<String> = f.row(i).iter().map(f64::to_string).collect();
        writeln!(out, "{x},{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_round_trip() {
        let x = parse_sequence("#tail power_decay 1 1\n1\n0.5\n0.25\n").unwrap();
        assert_eq!(x.entries(), &[1.0, 0.5, 0.25]);
        assert_eq!(x.tail(), Tail::PowerDecay { c: 1.0, s: 1.0 });
        let mut buf = Vec::new();
        write_sequence(&mut buf, &x).unwrap();
        assert_eq!(parse_sequence(std::str::from_utf8(&buf).unwrap()).unwrap(), x);

        let plain = parse_sequence("3\n\n-4\n").unwrap();
        assert_eq!(plain.entries(), &[3.0, -4.0]);
        assert_eq!(plain.tail(), Tail::None);
    }

    #[test]
    fn sequence_errors_carry_line_numbers() {
        assert_eq!(
            parse_sequence("1\n2\nabc\n"),
            Err(Error::Parse { line: 3, msg: "expected a finite number, found \"abc\"".into() })
        );
        assert!(matches!(parse_sequence("#tail power_decay 1 1\n1\n2,3\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_sequence("#tail geometric 0.5\n1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_sequence("1\nnan\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn matrix_round_trip() {
        let m = parse_matrix("1, 0\n0,1\n").unwrap();
        assert_eq!(m, Matrix::identity(2));
        let mut buf = Vec::new();
        write_matrix(&mut buf, &m).unwrap();
        assert_eq!(parse_matrix(std::str::from_utf8(&buf).unwrap()).unwrap(), m);
        assert!(matches!(parse_matrix("1,2\n3\n"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_matrix("").is_err());
    }

    #[test]
    fn measure_round_trip() {
        let mu = DiscreteMeasureSpace::midpoint(0.0, 1.0, 4).unwrap();
        let f = GridFunction::sample(&mu, |x| x * x).unwrap();
        let mut buf = Vec::new();
        write_measure_function(&mut buf, &mu, &f).unwrap();
        let (mu2, f2) = parse_measure_function(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!((mu2, f2), (mu, f));

        let (c, _) = parse_measure_function("0,1,5\n1,1,-2\n").unwrap();
        assert_eq!(c.kind(), MeasureKind::Counting);
        assert!(matches!(parse_measure_function("0,1\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn grid2_round_trip() {
        let (xs, ys, m) = parse_grid2("y,0.5,1.5\n0,1,2\n1,3,4\n").unwrap();
        assert_eq!((xs.clone(), ys.clone()), (vec![0.0, 1.0], vec![0.5, 1.5]));
        assert_eq!(m[(1, 0)], 3.0);
        let mut buf = Vec::new();
        write_grid2(&mut buf, &xs, &ys, &m).unwrap();
        assert_eq!(parse_grid2(std::str::from_utf8(&buf).unwrap()).unwrap(), (xs, ys, m));
        assert!(parse_grid2("x,1\n").is_err());
    }
}
