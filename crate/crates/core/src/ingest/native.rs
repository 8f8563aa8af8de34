//! Repository-native dataset exports (Dataverse JSON).
//!
//! Accepted shapes: the bare dataset object with `datasetVersion`, the API
//! envelope `{"status": "OK", "data": {...}}`, or a version object under
//! `latestVersion`. Metadata blocks must be in the keyed-object layout.

use std::collections::BTreeMap;

use serde_json::{Map, Value};

use super::croissant::{scalar_text, value_list};
use super::record::{FileEntry, SchemaRegistry, SourceRecord};
use super::IngestError;

const SUPPORTED_SCHEMA_VERSIONS: &[&str] = &["1", "1.0"];

fn unwrap_envelope(doc: &Value) -> &Value {
    match doc.get("data") {
        Some(inner) if doc.get("status").is_some() => inner,
        _ => doc,
    }
}

fn version_object(dataset: &Map<String, Value>) -> Option<&Map<String, Value>> {
    dataset
        .get("datasetVersion")
        .or_else(|| dataset.get("latestVersion"))
        .and_then(Value::as_object)
}

fn persistent_id(dataset: &Map<String, Value>, version: &Map<String, Value>) -> Option<String> {
    let text = |m: &Map<String, Value>, k: &str| m.get(k).and_then(scalar_text).filter(|s| !s.is_empty());
    if let (Some(protocol), Some(authority), Some(identifier)) = (
        text(dataset, "protocol"),
        text(dataset, "authority"),
        text(dataset, "identifier"),
    ) {
        return Some(format!("{protocol}:{authority}/{identifier}"));
    }
    text(version, "datasetPersistentId")
        .or_else(|| text(dataset, "persistentId"))
        .or_else(|| text(dataset, "global_id"))
        .or_else(|| text(dataset, "persistentUrl"))
}

/// A primitive or controlled-vocabulary field value as strings.
fn field_values(field: &Value) -> Vec<String> {
    match field.get("value") {
        Some(v) => value_list(v),
        None => vec![],
    }
}

/// Flattens one field into `(type_name, values)` pairs. Compound fields
/// contribute one pair per sub-field.
fn flatten_field(field: &Value, out: &mut Vec<(String, Vec<String>)>) {
    let Some(type_name) = field.get("typeName").and_then(Value::as_str) else {
        return;
    };
    let is_compound = field.get("typeClass").and_then(Value::as_str) == Some("compound");
    if !is_compound {
        out.push((type_name.to_string(), field_values(field)));
        return;
    }
    let entries: Vec<&Value> = match field.get("value") {
        Some(Value::Array(items)) => items.iter().collect(),
        Some(obj @ Value::Object(_)) => vec![obj],
        _ => vec![],
    };
    for entry in entries {
        if let Some(subfields) = entry.as_object() {
            for sub in subfields.values() {
                flatten_field(sub, out);
            }
        }
    }
}

fn description_text(field: &Value) -> Vec<String> {
    // dsDescription is compound: [{"dsDescriptionValue": {"value": ...}}]
    let mut flat = Vec::new();
    flatten_field(field, &mut flat);
    flat.into_iter()
        .filter(|(name, _)| name == "dsDescriptionValue")
        .flat_map(|(_, values)| values)
        .collect()
}

fn parse_files(version: &Map<String, Value>) -> Vec<FileEntry> {
    let Some(files) = version.get("files").and_then(Value::as_array) else {
        return vec![];
    };
    files
        .iter()
        .map(|f| {
            let data = f.get("dataFile").unwrap_or(f);
            FileEntry {
                name: f
                    .get("label")
                    .or_else(|| data.get("filename"))
                    .and_then(scalar_text)
                    .unwrap_or_default(),
                media_type: data.get("contentType").and_then(scalar_text).unwrap_or_default(),
                byte_size: data.get("filesize").and_then(Value::as_u64).unwrap_or(0),
            }
        })
        .collect()
}

/// Parses a native dataset export.
pub fn parse_native_json(doc: &Value, registry: &SchemaRegistry) -> Result<SourceRecord, IngestError> {
    let dataset = unwrap_envelope(doc)
        .as_object()
        .ok_or_else(|| IngestError::MalformedPage("native export is not a JSON object".into()))?;
    if let Some(version) = dataset.get("schemaVersion") {
        let v = scalar_text(version).unwrap_or_default();
        if !SUPPORTED_SCHEMA_VERSIONS.contains(&v.as_str()) {
            return Err(IngestError::UnknownSchemaVersion(v));
        }
    }
    let version = version_object(dataset).ok_or_else(|| IngestError::MissingField("datasetVersion".into()))?;
    let blocks = match version.get("metadataBlocks") {
        Some(Value::Object(blocks)) => blocks,
        Some(_) => {
            return Err(IngestError::UnknownSchemaVersion(
                "metadataBlocks is not keyed by block name".into(),
            ))
        }
        None => return Err(IngestError::UnknownSchemaVersion("no metadataBlocks".into())),
    };

    let mut title = None;
    let mut descriptions = Vec::new();
    let mut custom_fields: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (block_name, block) in blocks {
        let Some(fields) = block.get("fields").and_then(Value::as_array) else {
            continue;
        };
        for field in fields {
            let type_name = field.get("typeName").and_then(Value::as_str).unwrap_or_default();
            if block_name == "citation" && type_name == "title" {
                title = field.get("value").and_then(scalar_text);
                continue;
            }
            if block_name == "citation" && type_name == "dsDescription" {
                descriptions.extend(description_text(field));
                continue;
            }
            let mut flat = Vec::new();
            flatten_field(field, &mut flat);
            for (name, values) in flat {
                custom_fields
                    .entry(registry.normalize_key(&name))
                    .or_default()
                    .extend(values);
            }
        }
    }

    let title = title
        .filter(|t| !t.trim().is_empty())
        .ok_or_else(|| IngestError::MissingField("title".into()))?;
    let persistent_id =
        persistent_id(dataset, version).ok_or_else(|| IngestError::MissingField("persistent_id".into()))?;
    let collection_id = dataset
        .get("ownerAlias")
        .or_else(|| dataset.get("collection"))
        .and_then(scalar_text)
        .unwrap_or_default();

    let record = SourceRecord {
        persistent_id,
        title,
        description: descriptions.join("\n\n"),
        custom_fields,
        file_manifest: parse_files(version),
        collection_id,
    };
    record.validate()?;
    Ok(record)
}
