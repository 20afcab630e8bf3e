//! JSON schema documents.
//!
//! ```json
//! {
//!   "object_types": ["user", "product"],
//!   "relations": [{
//!     "name": "rates", "source": "user", "target": "product", "directed": false,
//!     "attributes": [
//!       {"name": "stars", "kind": "categorical", "domain": [1, 2, 3, 4, 5]},
//!       {"name": "ts", "kind": "temporal"}
//!     ]
//!   }]
//! }
//! ```
//!
//! Numeric domain values are kept as their JSON text (`1` and `"1"` are the
//! same category).

use edgeattr_core::graph::{AttributeDef, AttributeKind, AttributeSchema, GraphSchema, RelationType};
use serde_json::{Map, Value};

use crate::error::SchemaFileError;

fn err(path: &str, message: impl Into<String>) -> SchemaFileError {
    SchemaFileError { path: path.to_string(), message: message.into() }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, SchemaFileError> {
    obj.get(key).ok_or_else(|| err(path, format!("missing key \"{key}\"")))
}

fn string(v: &Value, path: &str) -> Result<String, SchemaFileError> {
    match v {
        Value::String(s) if !s.is_empty() => Ok(s.clone()),
        Value::String(_) => Err(err(path, "empty string")),
        _ => Err(err(path, "expected a string")),
    }
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, SchemaFileError> {
    v.as_array().ok_or_else(|| err(path, "expected an array"))
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, SchemaFileError> {
    v.as_object().ok_or_else(|| err(path, "expected an object"))
}

/// Parses and validates a schema document.
pub fn parse_schema(config_text: &str) -> Result<GraphSchema, SchemaFileError> {
    let root: Value = serde_json::from_str(config_text).map_err(|e| err("$", format!("malformed document: {e}")))?;
    let root = object(&root, "$")?;

    let types_v = array(field(root, "object_types", "$")?, "object_types")?;
    let mut object_types = Vec::with_capacity(types_v.len());
    for (i, t) in types_v.iter().enumerate() {
        let path = format!("object_types[{i}]");
        let name = string(t, &path)?;
        if object_types.contains(&name) {
            return Err(err(&path, format!("duplicate object type \"{name}\"")));
        }
        object_types.push(name);
    }
    if object_types.is_empty() {
        return Err(err("object_types", "object type list empty"));
    }

    let rels_v = array(field(root, "relations", "$")?, "relations")?;
    if rels_v.is_empty() {
        return Err(err("relations", "relation list empty"));
    }
    let mut relations: Vec<RelationType> = Vec::with_capacity(rels_v.len());
    for (i, r) in rels_v.iter().enumerate() {
        let base = format!("relations[{i}]");
        let obj = object(r, &base)?;
        let name = string(field(obj, "name", &base)?, &format!("{base}.name"))?;
        if relations.iter().any(|x| x.name == name) {
            return Err(err(&format!("{base}.name"), format!("duplicate relation \"{name}\"")));
        }
        let mut ends = Vec::with_capacity(2);
        for key in ["source", "target"] {
            let path = format!("{base}.{key}");
            let ty = string(field(obj, key, &base)?, &path)?;
            if !object_types.contains(&ty) {
                return Err(err(&path, format!("undeclared object type \"{ty}\"")));
            }
            ends.push(ty);
        }
        let directed = field(obj, "directed", &base)?
            .as_bool()
            .ok_or_else(|| err(&format!("{base}.directed"), "expected a boolean"))?;
        let attrs_path = format!("{base}.attributes");
        let attrs_v = array(field(obj, "attributes", &base)?, &attrs_path)?;
        if attrs_v.is_empty() {
            return Err(err(&attrs_path, "relation declares no attributes"));
        }
        let mut attributes: Vec<AttributeDef> = Vec::with_capacity(attrs_v.len());
        for (j, a) in attrs_v.iter().enumerate() {
            let apath = format!("{attrs_path}[{j}]");
            let aobj = object(a, &apath)?;
            let aname = string(field(aobj, "name", &apath)?, &format!("{apath}.name"))?;
            if attributes.iter().any(|x| x.name == aname) {
                return Err(err(&format!("{apath}.name"), format!("duplicate attribute \"{aname}\"")));
            }
            let kind_path = format!("{apath}.kind");
            let kind = match field(aobj, "kind", &apath)?.as_str() {
                Some("categorical") => AttributeKind::Categorical,
                Some("numerical") => AttributeKind::Numerical,
                Some("temporal") => AttributeKind::Temporal,
                Some(other) => return Err(err(&kind_path, format!("unknown attribute kind \"{other}\""))),
                None => return Err(err(&kind_path, "expected a string")),
            };
            let dpath = format!("{apath}.domain");
            let mut domain = Vec::new();
            match (kind, aobj.get("domain")) {
                (AttributeKind::Categorical, None) => return Err(err(&apath, "categorical attribute needs a domain")),
                (AttributeKind::Categorical, Some(d)) => {
                    for (k, v) in array(d, &dpath)?.iter().enumerate() {
                        let vpath = format!("{dpath}[{k}]");
                        let label = match v {
                            Value::String(s) => s.clone(),
                            Value::Number(n) => n.to_string(),
                            _ => return Err(err(&vpath, "domain values must be strings or numbers")),
                        };
                        if domain.contains(&label) {
                            return Err(err(&vpath, format!("duplicate domain value \"{label}\"")));
                        }
                        domain.push(label);
                    }
                    if domain.is_empty() {
                        return Err(err(&dpath, "empty categorical domain"));
                    }
                }
                (_, Some(_)) => return Err(err(&dpath, "only categorical attributes take a domain")),
                (_, None) => {}
            }
            attributes.push(AttributeDef { name: aname, kind, domain });
        }
        let target = ends.pop().expect("two endpoints");
        let source = ends.pop().expect("two endpoints");
        relations.push(RelationType { name, source, target, directed, attributes: AttributeSchema::new(attributes) });
    }

    GraphSchema::new(object_types, relations).map_err(|e| err("$", e.to_string()))
}

/// Serializes a schema in the same document format [`parse_schema`] reads.
pub fn schema_to_json(schema: &GraphSchema) -> String {
    let mut s = serde_json::to_string_pretty(schema).expect("schema serializes");
    s.push('\n');
    s
}
