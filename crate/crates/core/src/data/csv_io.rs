//! CSV persistence of relations.
//!
//! The header declares each column's role: `id`, `j:<name>` for join
//! attributes, `s:<name>` for local skyline attributes and
//! `g:<name>:<SUM|MIN>` for aggregate components. Lines starting with `#`
//! are comments. Values are written in shortest round-trip decimal form.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::relation::{AggFn, JoinValue, Relation, Schema, Tuple, TupleId};

enum Column {
    Id,
    Join(usize),
    Local(usize),
    Agg(usize),
}

struct Header {
    schema: Schema,
    columns: Vec<Column>,
}

fn parse_header(cells: &[String], err: impl Fn(String) -> Error) -> Result<Header> {
    let mut join_attrs = Vec::new();
    let mut local_attrs = Vec::new();
    let mut agg_attrs = Vec::new();
    let mut columns = Vec::with_capacity(cells.len());
    for (i, cell) in cells.iter().enumerate() {
        let col = if cell == "id" {
            if i != 0 {
                return Err(err(format!(
                    "column {}: `id` must be the first column",
                    i + 1
                )));
            }
            Column::Id
        } else if let Some(name) = cell.strip_prefix("j:") {
            join_attrs.push(name.to_string());
            Column::Join(join_attrs.len() - 1)
        } else if let Some(name) = cell.strip_prefix("s:") {
            local_attrs.push(name.to_string());
            Column::Local(local_attrs.len() - 1)
        } else if let Some(rest) = cell.strip_prefix("g:") {
            let (name, f) = rest.rsplit_once(':').ok_or_else(|| {
                err(format!(
                    "column {}: aggregate column {cell:?} needs the form g:<name>:<SUM|MIN>",
                    i + 1
                ))
            })?;
            let f: AggFn = f
                .parse()
                .map_err(|e: Error| err(format!("column {}: {e}", i + 1)))?;
            agg_attrs.push((name.to_string(), f));
            Column::Agg(agg_attrs.len() - 1)
        } else {
            return Err(err(format!(
                "column {}: unrecognised header {cell:?}",
                i + 1
            )));
        };
        if i == 0 && !matches!(col, Column::Id) {
            return Err(err("the first column must be `id`".into()));
        }
        columns.push(col);
    }
    if columns.is_empty() {
        return Err(err("empty header".into()));
    }
    let schema = Schema::new(join_attrs, local_attrs, agg_attrs).map_err(|e| err(e.to_string()))?;
    Ok(Header { schema, columns })
}

/// Parses a relation from any reader; `source_name` labels diagnostics.
pub fn read_csv_from<R: Read>(reader: R, source_name: &str) -> Result<Relation> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let at = |line: u64, msg: String| Error::Csv {
        source_name: source_name.to_string(),
        line,
        msg,
    };
    let csv_err = |e: csv::Error| {
        let line = e.position().map(|p| p.line()).unwrap_or(0);
        at(line, e.to_string())
    };

    let mut records = rdr.records();
    let header = match records.next() {
        Some(rec) => {
            let rec = rec.map_err(csv_err)?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            let cells: Vec<String> = rec.iter().map(str::to_string).collect();
            parse_header(&cells, |msg| at(line, msg))?
        }
        None => return Err(at(0, "missing header row".into())),
    };

    let schema = header.schema;
    let (m, l, a) = (schema.m(), schema.l(), schema.a());
    let width = header.columns.len();
    let mut tuples = Vec::new();
    let mut seen: HashMap<TupleId, u64> = HashMap::new();
    for rec in records {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != width {
            return Err(at(
                line,
                format!("expected {width} fields, found {}", rec.len()),
            ));
        }
        let mut id = None;
        let mut join_key = vec![JoinValue::Text(String::new()); m];
        let mut sky = vec![0.0; l + a];
        for (c, (cell, col)) in rec.iter().zip(&header.columns).enumerate() {
            match col {
                Column::Id => {
                    let v: u64 = cell.parse().map_err(|_| {
                        at(
                            line,
                            format!(
                                "column {}: id {cell:?} is not a non-negative integer",
                                c + 1
                            ),
                        )
                    })?;
                    id = Some(TupleId(v));
                }
                Column::Join(j) => join_key[*j] = JoinValue::parse(cell),
                Column::Local(_) | Column::Agg(_) => {
                    let pos = match col {
                        Column::Local(s) => *s,
                        Column::Agg(g) => l + g,
                        _ => unreachable!(),
                    };
                    let v: f64 = cell
                        .parse()
                        .ok()
                        .filter(|v: &f64| v.is_finite())
                        .ok_or_else(|| {
                            at(
                                line,
                                format!("column {}: {cell:?} is not a finite number", c + 1),
                            )
                        })?;
                    sky[pos] = v;
                }
            }
        }
        let id = id.expect("id column is always present");
        if let Some(first) = seen.insert(id, line) {
            return Err(at(
                line,
                format!("duplicate id {id} (first seen on line {first})"),
            ));
        }
        tuples.push(Tuple { id, join_key, sky });
    }
    Relation::new(schema, tuples).map_err(|e| at(0, e.to_string()))
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Relation> {
    let path = path.as_ref();
    read_csv_from(File::open(path)?, &path.display().to_string())
}

/// Writes `relation`, preceded by `# <line>` for each metadata line.
pub fn write_csv_to<W: Write>(writer: W, relation: &Relation, metadata: &[String]) -> Result<()> {
    let mut w = BufWriter::new(writer);
    for line in metadata {
        writeln!(w, "# {line}")?;
    }
    let schema = relation.schema();
    let mut header = vec!["id".to_string()];
    header.extend(schema.join_attrs.iter().map(|n| format!("j:{n}")));
    header.extend(schema.local_attrs.iter().map(|n| format!("s:{n}")));
    header.extend(
        schema
            .agg_attrs
            .iter()
            .map(|(n, f)| format!("g:{n}:{}", f.name())),
    );
    let mut out = csv::WriterBuilder::new().from_writer(w);
    out.write_record(&header).map_err(io_err)?;
    let mut row: Vec<String> = Vec::with_capacity(header.len());
    for t in relation.tuples() {
        row.clear();
        row.push(t.id.to_string());
        row.extend(t.join_key.iter().map(|k| k.to_string()));
        row.extend(t.sky.iter().map(|x| x.to_string()));
        out.write_record(&row).map_err(io_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_csv(relation: &Relation, path: impl AsRef<Path>, metadata: &[String]) -> Result<()> {
    write_csv_to(File::create(path)?, relation, metadata)
}

fn io_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
