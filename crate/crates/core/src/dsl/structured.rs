//! JSON interchange.
//!
//! Every document is an envelope `{"format": "modelweave", "version": 1,
//! "kind": ..., "model": ...}` where `kind` is one of `core`, `aspect`,
//! `weaving`, `requirements` or `woven`. Field names inside `model` are
//! camelCase and stable across releases of the same format version.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aspect_model::AspectModel;
use crate::core_model::CoreModel;
use crate::requirements::DecompositionGraph;
use crate::weaver::WovenModel;
use crate::weaving_model::WeavingModel;

pub const FORMAT_NAME: &str = "modelweave";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "lowercase")]
pub enum Document {
    Core(CoreModel),
    Aspect(AspectModel),
    Weaving(WeavingModel),
    Requirements(DecompositionGraph),
    Woven(WovenModel),
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    #[serde(flatten)]
    document: Document,
}

#[derive(Debug, Error)]
pub enum StructuredError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format `{0}` version {1}")]
    Format(String, u32),
}

/// Pretty-printed JSON with a trailing newline.
pub fn export_structured(doc: &Document) -> String {
    let envelope = Envelope {
        format: FORMAT_NAME.to_string(),
        version: FORMAT_VERSION,
        document: doc.clone(),
    };
    let mut s = serde_json::to_string_pretty(&envelope).expect("model values serialize");
    s.push('\n');
    s
}

pub fn import_structured(text: &str) -> Result<Document, StructuredError> {
    let envelope: Envelope = serde_json::from_str(text)?;
    if envelope.format != FORMAT_NAME || envelope.version != FORMAT_VERSION {
        return Err(StructuredError::Format(envelope.format, envelope.version));
    }
    Ok(envelope.document)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let docs = [
            Document::Core(crate::core_model::tests::m1()),
            Document::Core(CoreModel::new("Empty")),
            Document::Aspect(crate::aspect_model::tests::m2()),
            Document::Weaving(crate::weaving_model::tests::m1_m2()),
            Document::Requirements(DecompositionGraph::new("G")),
            Document::Woven(WovenModel::from_core(crate::core_model::tests::m1())),
        ];
        for doc in docs {
            let text = export_structured(&doc);
            assert_eq!(import_structured(&text).unwrap(), doc);
            assert_eq!(export_structured(&doc), text);
        }
    }

    #[test]
    fn envelope_fields() {
        let text = export_structured(&Document::Core(CoreModel::new("E")));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["format"], "modelweave");
        assert_eq!(v["version"], 1);
        assert_eq!(v["kind"], "core");
        assert_eq!(v["model"]["name"], "E");
        let wrong = text.replace("\"version\": 1", "\"version\": 9");
        assert!(matches!(import_structured(&wrong), Err(StructuredError::Format(..))));
        assert!(import_structured("{").is_err());
    }
}
