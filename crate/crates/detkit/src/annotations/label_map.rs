//! The label map: a bidirectional id <-> name <-> display-name registry.
//!
//! External format is a strict JSON array:
//! `[{"id": 1, "name": "lying", "display_name": "Lying"}, ...]`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LabelMapError {
    #[error("label map JSON is invalid: {0}")]
    Json(String),
    #[error("duplicate id {0}")]
    DuplicateId(u32),
    #[error("duplicate name {0:?}")]
    DuplicateName(String),
    #[error("id {0} is invalid: ids must be >= 1 (0 is reserved for background)")]
    InvalidId(u32),
    #[error("name must be nonempty")]
    EmptyName,
    #[error("unknown class name {0:?}")]
    UnknownName(String),
    #[error("unknown class id {0}")]
    UnknownId(u32),
}

/// One registry entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelEntry {
    pub id: u32,
    pub name: String,
    pub display_name: String,
}

/// Registry linking class names, integer ids, and display names. Ids are
/// unique and start at 1; names are unique; lookups are total over entries.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMap {
    entries: Vec<LabelEntry>,
    by_name: HashMap<String, u32>,
    by_id: HashMap<u32, usize>,
}

impl LabelMap {
    pub fn new(entries: Vec<LabelEntry>) -> Result<Self, LabelMapError> {
        let mut by_name = HashMap::new();
        let mut by_id = HashMap::new();
        for (idx, entry) in entries.iter().enumerate() {
            if entry.id < 1 {
                return Err(LabelMapError::InvalidId(entry.id));
            }
            if entry.name.is_empty() {
                return Err(LabelMapError::EmptyName);
            }
            if by_id.insert(entry.id, idx).is_some() {
                return Err(LabelMapError::DuplicateId(entry.id));
            }
            if by_name.insert(entry.name.clone(), entry.id).is_some() {
                return Err(LabelMapError::DuplicateName(entry.name.clone()));
            }
        }
        Ok(Self {
            entries,
            by_name,
            by_id,
        })
    }

    /// Builds a map from class names in first-appearance order, assigning ids
    /// from 1. Display names are the class names with the first letter
    /// upper-cased.
    pub fn from_class_names<I, S>(names: I) -> Result<Self, LabelMapError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut seen = Vec::<String>::new();
        for name in names {
            let name = name.as_ref();
            if !seen.iter().any(|n| n == name) {
                seen.push(name.to_string());
            }
        }
        let entries = seen
            .into_iter()
            .enumerate()
            .map(|(i, name)| LabelEntry {
                id: (i + 1) as u32,
                display_name: display_name_for(&name),
                name,
            })
            .collect();
        Self::new(entries)
    }

    pub fn entries(&self) -> &[LabelEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Name -> id.
    pub fn resolve(&self, name: &str) -> Result<u32, LabelMapError> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| LabelMapError::UnknownName(name.to_string()))
    }

    /// Id -> name.
    pub fn resolve_id(&self, id: u32) -> Result<&str, LabelMapError> {
        self.by_id
            .get(&id)
            .map(|&idx| self.entries[idx].name.as_str())
            .ok_or(LabelMapError::UnknownId(id))
    }

    /// Parses the strict JSON array format.
    pub fn parse(text: &str) -> Result<Self, LabelMapError> {
        let entries: Vec<LabelEntry> =
            serde_json::from_str(text).map_err(|e| LabelMapError::Json(e.to_string()))?;
        Self::new(entries)
    }

    /// Serializes to the strict JSON array format (pretty-printed, stable).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries).expect("label entries serialize cleanly")
    }
}

fn display_name_for(name: &str) -> String {
    let mut chars = name.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}
