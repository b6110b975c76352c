//! Raw SUA event names to canonical events.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::{Deserializer, MapAccess, Visitor};
use thiserror::Error;

use cspmon_core::{Event, Observed};

#[derive(Debug, Error)]
pub enum MappingError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad mapping JSON: {0}")]
    Json(String),
    #[error("mapping for `{raw}`: {reason}")]
    Value { raw: String, reason: String },
}

/// Keys are distinct raw names; values are well-formed events.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Mapping {
    entries: HashMap<String, Event>,
}

struct Entries(BTreeMap<String, String>);

impl<'de> serde::Deserialize<'de> for Entries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Entries;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object mapping raw event names to event texts")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Entries, A::Error> {
                let mut out = BTreeMap::new();
                while let Some((k, v)) = map.next_entry::<String, String>()? {
                    if out.contains_key(&k) {
                        return Err(serde::de::Error::custom(format!("duplicate key `{k}`")));
                    }
                    out.insert(k, v);
                }
                Ok(Entries(out))
            }
        }
        d.deserialize_map(V)
    }
}

impl Mapping {
    pub fn parse(json: &str) -> Result<Mapping, MappingError> {
        let Entries(raw) = serde_json::from_str(json).map_err(|e| MappingError::Json(e.to_string()))?;
        let mut entries = HashMap::with_capacity(raw.len());
        for (k, v) in raw {
            let event = v.parse::<Event>().map_err(|e| MappingError::Value {
                raw: k.clone(),
                reason: e.to_string(),
            })?;
            entries.insert(k, event);
        }
        Ok(Mapping { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, raw: &str) -> Option<&Event> {
        self.entries.get(raw)
    }

    /// Checks every target against the model alphabet. Entries are checked
    /// in key order so the reported error is stable.
    pub fn validate(&self, alphabet: &BTreeSet<Event>) -> Result<(), MappingError> {
        let mut keys: Vec<&String> = self.entries.keys().collect();
        keys.sort();
        for k in keys {
            let e = &self.entries[k];
            if !alphabet.contains(e) {
                return Err(MappingError::Value {
                    raw: k.clone(),
                    reason: format!("`{e}` is not in the alphabet"),
                });
            }
        }
        Ok(())
    }

    /// The mapped event, else `raw` read as an event, else `Unmapped`.
    pub fn map_event(&self, raw: &str) -> Observed {
        let raw = raw.trim();
        if let Some(e) = self.entries.get(raw) {
            return Observed::Event(e.clone());
        }
        match raw.parse::<Event>() {
            Ok(e) => Observed::Event(e),
            Err(_) => Observed::Unmapped(raw.to_string()),
        }
    }
}

pub fn load_mapping(path: &Path) -> Result<Mapping, MappingError> {
    let text = fs::read_to_string(path).map_err(|source| MappingError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Mapping::parse(&text)
}
