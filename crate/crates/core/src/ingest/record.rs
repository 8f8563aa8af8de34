use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::IngestError;

/// One file listed in a dataset's distribution. Payloads are never fetched.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub media_type: String,
    pub byte_size: u64,
}

/// Canonical metadata for one archived dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceRecord {
    pub persistent_id: String,
    pub title: String,
    pub description: String,
    /// Field name to values, in source order. Keys outside the schema
    /// registry are kept verbatim.
    pub custom_fields: BTreeMap<String, Vec<String>>,
    pub file_manifest: Vec<FileEntry>,
    pub collection_id: String,
}

impl SourceRecord {
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.persistent_id.trim().is_empty() {
            return Err(IngestError::MissingField("persistent_id".into()));
        }
        Ok(())
    }

    pub fn field(&self, name: &str) -> &[String] {
        self.custom_fields.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Text that gets chunked and embedded: title, description, then one
    /// `field: value` line per custom field value. Empty parts are skipped.
    pub fn indexable_text(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        if !self.title.is_empty() {
            parts.push(self.title.clone());
        }
        if !self.description.is_empty() {
            parts.push(self.description.clone());
        }
        for (field, values) in &self.custom_fields {
            for value in values {
                parts.push(format!("{field}: {value}"));
            }
        }
        parts.join("\n")
    }

    /// Canonical serialization used by the store.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }

    pub fn from_canonical_json(text: &str) -> Result<Self, IngestError> {
        let record: SourceRecord = serde_json::from_str(text)
            .map_err(|e| IngestError::MalformedPage(format!("canonical record: {e}")))?;
        record.validate()?;
        Ok(record)
    }
}

/// A declared custom metadata field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    /// Canonical snake_case name used in `custom_fields`.
    pub name: String,
    /// Alternative spellings seen on the wire (camelCase type names, prefixed
    /// JSON-LD terms).
    #[serde(default)]
    pub aliases: Vec<String>,
    /// Whether values of this field are linked against the vocabulary.
    #[serde(default = "yes")]
    pub linkable: bool,
}

fn yes() -> bool {
    true
}

/// Registry of declared custom fields. Extensible per collection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaRegistry {
    pub fields: Vec<FieldSpec>,
}

pub const FIELD_MODALITIES: &str = "modalities";
pub const FIELD_INTERACTION_MODES: &str = "interaction_modes";
pub const FIELD_ART_FORM: &str = "art_form";
pub const FIELD_TOPIC_NAME: &str = "topic_name";
pub const FIELD_TOPIC_TYPE: &str = "topic_type";

impl Default for SchemaRegistry {
    fn default() -> Self {
        let spec = |name: &str, aliases: &[&str]| FieldSpec {
            name: name.to_string(),
            aliases: aliases.iter().map(|a| a.to_string()).collect(),
            linkable: true,
        };
        SchemaRegistry {
            fields: vec![
                spec(FIELD_MODALITIES, &["modality", "modalities"]),
                spec(
                    FIELD_INTERACTION_MODES,
                    &["waysOfInteraction", "ways_of_interaction", "interactionModes", "interactionMode"],
                ),
                spec(FIELD_ART_FORM, &["artForm", "artForms"]),
                spec(FIELD_TOPIC_NAME, &["topicName"]),
                spec(FIELD_TOPIC_TYPE, &["topicType"]),
            ],
        }
    }
}

impl SchemaRegistry {
    pub fn with_fields(mut self, extra: impl IntoIterator<Item = FieldSpec>) -> Self {
        for field in extra {
            if let Some(existing) = self.fields.iter_mut().find(|f| f.name == field.name) {
                *existing = field;
            } else {
                self.fields.push(field);
            }
        }
        self
    }

    /// Maps a wire key to its canonical field name. JSON-LD prefixes
    /// (`sm:artForm`) are stripped only when the local part is declared.
    pub fn canonical_name(&self, key: &str) -> Option<&str> {
        let local = key.rsplit_once(':').map(|(_, l)| l).unwrap_or(key);
        let local = local.rsplit_once('#').map(|(_, l)| l).unwrap_or(local);
        self.fields
            .iter()
            .find(|f| {
                f.name == key
                    || f.name == local
                    || f.aliases.iter().any(|a| a == key || a == local)
            })
            .map(|f| f.name.as_str())
    }

    pub fn normalize_key(&self, key: &str) -> String {
        self.canonical_name(key).unwrap_or(key).to_string()
    }

    pub fn is_declared(&self, name: &str) -> bool {
        self.fields.iter().any(|f| f.name == name)
    }

    pub fn linkable_fields(&self) -> impl Iterator<Item = &str> {
        self.fields.iter().filter(|f| f.linkable).map(|f| f.name.as_str())
    }

    /// Custom field keys of `record` that the registry does not declare.
    pub fn unknown_fields(&self, record: &SourceRecord) -> Vec<String> {
        record
            .custom_fields
            .keys()
            .filter(|k| !self.is_declared(k))
            .cloned()
            .collect()
    }
}
