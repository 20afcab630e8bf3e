//! CSV edge files and optional node declaration files.
//!
//! Edge files start with `relation,source,target,<attr>...`. Every row names
//! its relation; columns belonging to other relations must be left empty.
//! Node files are `node,object_type` and declare nodes that may have no edges.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use edgeattr_core::graph::{AttrValue, AttributeKind, AttributedMultigraph, GraphSchema};

use crate::error::{Error, LineError, Result};

fn line_err(line: u64, message: impl Into<String>) -> LineError {
    LineError { line, message: message.into() }
}

/// Column index in the file for every attribute of every relation.
struct Layout {
    width: usize,
    columns: Vec<Vec<usize>>,
}

fn layout(header: &csv::StringRecord, schema: &GraphSchema) -> std::result::Result<Layout, LineError> {
    let fixed = ["relation", "source", "target"];
    for (i, want) in fixed.iter().enumerate() {
        if header.get(i).map(str::trim) != Some(*want) {
            return Err(line_err(1, format!("header must start with relation,source,target (column {} is not \"{want}\")", i + 1)));
        }
    }
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    for (i, n) in names.iter().enumerate().skip(3) {
        if names[..i].contains(n) {
            return Err(line_err(1, format!("duplicate column \"{n}\"")));
        }
    }
    let mut columns = Vec::with_capacity(schema.relations.len());
    for rel in &schema.relations {
        let mut cols = Vec::with_capacity(rel.attributes.len());
        for attr in &rel.attributes.attributes {
            let pos = names
                .iter()
                .skip(3)
                .position(|n| *n == attr.name)
                .ok_or_else(|| line_err(1, format!("missing column \"{}\" for relation \"{}\"", attr.name, rel.name)))?;
            cols.push(pos + 3);
        }
        columns.push(cols);
    }
    Ok(Layout { width: names.len(), columns })
}

/// Reads an edge file into a graph, validating every row against `schema`.
pub fn read_graph<R: Read>(reader: R, schema: GraphSchema) -> std::result::Result<AttributedMultigraph, LineError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
    let mut records = rdr.records();
    let mut graph = AttributedMultigraph::new(schema.clone());
    let header = match records.next() {
        None => return Ok(graph),
        Some(r) => r.map_err(|e| line_err(1, e.to_string()))?,
    };
    let layout = layout(&header, &schema)?;

    for rec in records {
        let rec = rec.map_err(|e| line_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec.get(0).is_some_and(|f| f.trim().is_empty()) {
            continue;
        }
        if rec.len() != layout.width {
            return Err(line_err(line, format!("expected {} columns, found {}", layout.width, rec.len())));
        }
        let rel_name = rec[0].trim();
        let ri = schema.relation_index(rel_name).ok_or_else(|| line_err(line, format!("unknown relation \"{rel_name}\"")))?;
        let rel = &schema.relations[ri];
        let own = &layout.columns[ri];
        for c in 3..layout.width {
            if !own.contains(&c) && !rec[c].trim().is_empty() {
                return Err(line_err(line, format!("column {} must be empty for relation \"{rel_name}\"", c + 1)));
            }
        }
        let mut values = Vec::with_capacity(own.len());
        for (attr, &c) in rel.attributes.attributes.iter().zip(own) {
            let raw = rec[c].trim();
            let value = match attr.kind {
                AttributeKind::Categorical => AttrValue::Category(attr.category_index(raw).ok_or_else(|| {
                    line_err(line, format!("value \"{raw}\" outside the domain of \"{}\"", attr.name))
                })?),
                AttributeKind::Numerical | AttributeKind::Temporal => {
                    let x: f64 = raw
                        .parse()
                        .map_err(|_| line_err(line, format!("non-numeric value \"{raw}\" in \"{}\"", attr.name)))?;
                    AttrValue::Number(x)
                }
            };
            values.push(value);
        }
        graph
            .add_edge(rel_name, rec[1].trim(), rec[2].trim(), values)
            .map_err(|e| line_err(line, e.to_string()))?;
    }
    Ok(graph)
}

/// Adds the nodes listed in a `node,object_type` file.
pub fn read_nodes<R: Read>(reader: R, graph: &mut AttributedMultigraph) -> std::result::Result<(), LineError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    for rec in rdr.records() {
        let rec = rec.map_err(|e| line_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 2 {
            return Err(line_err(line, format!("expected 2 columns, found {}", rec.len())));
        }
        graph.add_node(rec[0].trim(), rec[1].trim()).map_err(|e| line_err(line, e.to_string()))?;
    }
    Ok(())
}

/// Loads an edge file, then an optional node file, from disk.
pub fn load_graph(edge_file: &Path, nodes_file: Option<&Path>, schema: GraphSchema) -> Result<AttributedMultigraph> {
    let f = File::open(edge_file).map_err(|e| Error::io(edge_file, e))?;
    let mut graph = read_graph(f, schema).map_err(|source| Error::Csv { path: edge_file.into(), source })?;
    if let Some(path) = nodes_file {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        read_nodes(f, &mut graph).map_err(|source| Error::Csv { path: path.into(), source })?;
    }
    Ok(graph)
}

/// Attribute column names in schema order, each once.
fn attribute_columns(schema: &GraphSchema) -> Vec<&str> {
    let mut cols: Vec<&str> = Vec::new();
    for rel in &schema.relations {
        for a in &rel.attributes.attributes {
            if !cols.contains(&a.name.as_str()) {
                cols.push(&a.name);
            }
        }
    }
    cols
}

/// Writes the edge list in the format [`read_graph`] accepts, in edge order.
pub fn write_edges<W: Write>(graph: &AttributedMultigraph, writer: W) -> std::io::Result<()> {
    let schema = graph.schema();
    let cols = attribute_columns(schema);
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["relation", "source", "target"];
    header.extend(&cols);
    w.write_record(&header)?;
    let mut row: Vec<String> = vec![String::new(); header.len()];
    for edge in graph.edges() {
        let rel = schema.relation(edge.relation);
        row.iter_mut().for_each(String::clear);
        row[0].push_str(&rel.name);
        row[1].push_str(&graph.node(edge.source).id);
        row[2].push_str(&graph.node(edge.target).id);
        for (attr, value) in rel.attributes.attributes.iter().zip(&edge.values) {
            let c = 3 + cols.iter().position(|n| *n == attr.name).expect("column present");
            row[c] = match value {
                AttrValue::Category(i) => attr.domain[*i as usize].clone(),
                AttrValue::Number(x) => x.to_string(),
            };
        }
        w.write_record(&row)?;
    }
    w.flush()
}

/// Writes a `node,object_type` file for nodes without edges.
pub fn write_isolated_nodes<W: Write>(graph: &AttributedMultigraph, writer: W) -> std::io::Result<()> {
    let mut touched = vec![false; graph.node_count()];
    for e in graph.edges() {
        touched[e.source] = true;
        touched[e.target] = true;
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["node", "object_type"])?;
    for (i, n) in graph.nodes().iter().enumerate() {
        if !touched[i] {
            w.write_record([n.id.as_str(), graph.object_type_name(i)])?;
        }
    }
    w.flush()
}
