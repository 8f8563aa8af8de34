//! Croissant JSON-LD dataset descriptions.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use super::record::{FileEntry, SchemaRegistry, SourceRecord};
use super::IngestError;

const CROISSANT_NS: &str = "mlcommons.org/croissant";

/// Properties consumed by the parser; everything else lands in `custom_fields`.
const CORE_KEYS: &[&str] = &[
    "@context",
    "@type",
    "@id",
    "name",
    "description",
    "identifier",
    "distribution",
    "isPartOf",
    "conformsTo",
    "dct:conformsTo",
];

fn strip_prefix(term: &str) -> &str {
    let local = term.rsplit_once(':').map(|(_, l)| l).unwrap_or(term);
    local.rsplit(['/', '#']).next().unwrap_or(local)
}

fn mentions_croissant(v: &Value) -> bool {
    match v {
        Value::String(s) => s.contains(CROISSANT_NS),
        Value::Array(items) => items.iter().any(mentions_croissant),
        Value::Object(map) => map.values().any(mentions_croissant),
        _ => false,
    }
}

fn is_dataset_type(v: &Value) -> bool {
    match v {
        Value::String(s) => strip_prefix(s) == "Dataset",
        Value::Array(items) => items.iter().any(is_dataset_type),
        _ => false,
    }
}

/// Scalar JSON-LD value: plain string, number, or `{"@value": ...}`.
pub(crate) fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Object(map) => map
            .get("@value")
            .or_else(|| map.get("value"))
            .and_then(scalar_text),
        Value::Array(items) => items.iter().find_map(scalar_text),
        Value::Null => None,
    }
}

/// Flattens an arbitrary property value into field values.
pub(crate) fn value_list(v: &Value) -> Vec<String> {
    match v {
        Value::Null => vec![],
        Value::Array(items) => items.iter().flat_map(value_list).collect(),
        Value::Object(map) if map.contains_key("@value") => {
            scalar_text(v).into_iter().collect()
        }
        Value::Object(_) => vec![v.to_string()],
        other => scalar_text(other).into_iter().collect(),
    }
}

fn parse_size(v: &Value) -> u64 {
    match v {
        Value::Number(n) => n.as_u64().unwrap_or(0),
        Value::String(s) => {
            let digits: String = s.trim().chars().take_while(|c| c.is_ascii_digit()).collect();
            digits.parse().unwrap_or(0)
        }
        _ => 0,
    }
}

fn parse_distribution(v: Option<&Value>) -> Vec<FileEntry> {
    let items = match v {
        Some(Value::Array(items)) => items.as_slice(),
        Some(single @ Value::Object(_)) => std::slice::from_ref(single),
        _ => return vec![],
    };
    items
        .iter()
        .filter_map(Value::as_object)
        .map(|obj| FileEntry {
            name: obj
                .get("name")
                .or_else(|| obj.get("@id"))
                .and_then(scalar_text)
                .unwrap_or_default(),
            media_type: obj
                .get("encodingFormat")
                .and_then(scalar_text)
                .unwrap_or_default(),
            byte_size: obj.get("contentSize").map(parse_size).unwrap_or(0),
        })
        .collect()
}

fn required(obj: &Map<String, Value>, keys: &[&str], field: &str) -> Result<String, IngestError> {
    keys.iter()
        .filter_map(|k| obj.get(*k))
        .find_map(scalar_text)
        .filter(|s| !s.trim().is_empty())
        .ok_or_else(|| IngestError::MissingField(field.to_string()))
}

/// Parses a Croissant dataset description.
///
/// `name` and `identifier` (falling back to `@id`) are required. The
/// collection comes from `isPartOf` when present and is empty otherwise.
pub fn parse_croissant(doc: &Value, registry: &SchemaRegistry) -> Result<SourceRecord, IngestError> {
    let obj = doc
        .as_object()
        .ok_or_else(|| IngestError::NotCroissant("document is not a JSON object".into()))?;
    let context = obj
        .get("@context")
        .ok_or_else(|| IngestError::NotCroissant("missing @context".into()))?;
    if !mentions_croissant(context) && !obj.get("conformsTo").is_some_and(mentions_croissant) {
        return Err(IngestError::NotCroissant("context does not declare the Croissant vocabulary".into()));
    }
    if !obj.get("@type").is_some_and(is_dataset_type) {
        return Err(IngestError::NotCroissant("@type is not a Dataset".into()));
    }

    let title = required(obj, &["name"], "name")?;
    let persistent_id = required(obj, &["identifier", "@id"], "identifier")?;
    let description = obj.get("description").and_then(scalar_text).unwrap_or_default();
    let collection_id = obj
        .get("isPartOf")
        .and_then(|v| match v {
            Value::Object(m) => m.get("identifier").or_else(|| m.get("name")).and_then(scalar_text),
            other => scalar_text(other),
        })
        .unwrap_or_default();

    let mut custom_fields: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (key, value) in obj {
        if CORE_KEYS.contains(&key.as_str()) {
            continue;
        }
        custom_fields
            .entry(registry.normalize_key(key))
            .or_default()
            .extend(value_list(value));
    }

    let record = SourceRecord {
        persistent_id,
        title,
        description,
        custom_fields,
        file_manifest: parse_distribution(obj.get("distribution")),
        collection_id,
    };
    record.validate()?;
    Ok(record)
}

/// Renders a record as a Croissant document that parses back to the same
/// record.
pub fn to_croissant(record: &SourceRecord) -> Value {
    let mut obj = Map::new();
    obj.insert(
        "@context".into(),
        json!({
            "@language": "en",
            "@vocab": "https://schema.org/",
            "sc": "https://schema.org/",
            "cr": "http://mlcommons.org/croissant/",
        }),
    );
    obj.insert("@type".into(), json!("sc:Dataset"));
    obj.insert("conformsTo".into(), json!("http://mlcommons.org/croissant/1.0"));
    obj.insert("name".into(), json!(record.title));
    obj.insert("identifier".into(), json!(record.persistent_id));
    if !record.description.is_empty() {
        obj.insert("description".into(), json!(record.description));
    }
    if !record.collection_id.is_empty() {
        obj.insert("isPartOf".into(), json!(record.collection_id));
    }
    let files: Vec<Value> = record
        .file_manifest
        .iter()
        .map(|f| {
            json!({
                "@type": "cr:FileObject",
                "@id": f.name,
                "name": f.name,
                "encodingFormat": f.media_type,
                "contentSize": format!("{} B", f.byte_size),
            })
        })
        .collect();
    obj.insert("distribution".into(), Value::Array(files));
    for (key, values) in &record.custom_fields {
        if CORE_KEYS.contains(&key.as_str()) {
            continue;
        }
        obj.insert(key.clone(), json!(values));
    }
    Value::Object(obj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> Value {
        json!({
            "@context": {"@vocab": "https://schema.org/", "cr": "http://mlcommons.org/croissant/"},
            "@type": "sc:Dataset",
            "name": "ShareMusic Events",
            "identifier": "doi:10.5072/FK2/EVENTS"
        })
    }

    #[test]
    fn minimal_doc_maps_name_to_title() {
        let r = parse_croissant(&minimal(), &SchemaRegistry::default()).unwrap();
        assert_eq!(r.title, "ShareMusic Events");
        assert_eq!(r.persistent_id, "doi:10.5072/FK2/EVENTS");
        assert!(r.custom_fields.is_empty());
        assert!(r.file_manifest.is_empty());
    }

    #[test]
    fn distribution_entries_become_manifest() {
        let mut doc = minimal();
        doc["distribution"] = json!([
            {"@type": "cr:FileObject", "name": "a.wav", "encodingFormat": "audio/wav", "contentSize": "1200 B"},
            {"@type": "cr:FileObject", "name": "b.csv", "encodingFormat": "text/csv", "contentSize": 34}
        ]);
        let r = parse_croissant(&doc, &SchemaRegistry::default()).unwrap();
        assert_eq!(r.file_manifest.len(), 2);
        assert_eq!(r.file_manifest[0].byte_size, 1200);
        assert_eq!(r.file_manifest[1].media_type, "text/csv");
    }

    #[test]
    fn missing_name_is_reported() {
        let mut doc = minimal();
        doc.as_object_mut().unwrap().remove("name");
        let err = parse_croissant(&doc, &SchemaRegistry::default()).unwrap_err();
        assert!(matches!(err, IngestError::MissingField(f) if f == "name"));
    }

    #[test]
    fn missing_identifier_falls_back_to_at_id() {
        let mut doc = minimal();
        doc.as_object_mut().unwrap().remove("identifier");
        assert!(matches!(
            parse_croissant(&doc, &SchemaRegistry::default()),
            Err(IngestError::MissingField(f)) if f == "identifier"
        ));
        doc["@id"] = json!("https://example.org/ds/1");
        let r = parse_croissant(&doc, &SchemaRegistry::default()).unwrap();
        assert_eq!(r.persistent_id, "https://example.org/ds/1");
    }

    #[test]
    fn wrong_type_or_context_is_not_croissant() {
        let mut doc = minimal();
        doc["@type"] = json!("sc:Person");
        assert!(matches!(parse_croissant(&doc, &SchemaRegistry::default()), Err(IngestError::NotCroissant(_))));
        let mut doc = minimal();
        doc["@context"] = json!({"@vocab": "https://schema.org/"});
        assert!(matches!(parse_croissant(&doc, &SchemaRegistry::default()), Err(IngestError::NotCroissant(_))));
    }

    #[test]
    fn unknown_and_declared_properties_kept() {
        let mut doc = minimal();
        doc["sm:artForm"] = json!("dance");
        doc["modalities"] = json!(["sound", "haptic"]);
        doc["license"] = json!({"@value": "CC-BY-4.0"});
        let r = parse_croissant(&doc, &SchemaRegistry::default()).unwrap();
        assert_eq!(r.field("art_form"), ["dance"]);
        assert_eq!(r.field("modalities"), ["sound", "haptic"]);
        assert_eq!(r.field("license"), ["CC-BY-4.0"]);
    }

    #[test]
    fn render_then_parse_is_identity() {
        let mut doc = minimal();
        doc["description"] = json!("Concerts and workshops");
        doc["isPartOf"] = json!("sharemusic");
        doc["topicName"] = json!(["Inclusion"]);
        doc["distribution"] = json!([{"name": "x.mp4", "encodingFormat": "video/mp4", "contentSize": "9 B"}]);
        let reg = SchemaRegistry::default();
        let first = parse_croissant(&doc, &reg).unwrap();
        let second = parse_croissant(&to_croissant(&first), &reg).unwrap();
        assert_eq!(first, second);
    }
}
