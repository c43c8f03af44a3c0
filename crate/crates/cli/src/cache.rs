//! Content-addressed stage cache and atomic file writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Canonical JSON: object keys sorted, no whitespace.
pub fn canonical<T: Serialize>(input: &T) -> String {
    let v = serde_json::to_value(input).expect("serializable stage input");
    serde_json::to_string(&sort(v)).expect("json")
}

fn sort(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut entries: Vec<(String, Value)> = m.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, sort(v))).collect())
        }
        Value::Array(a) => Value::Array(a.into_iter().map(sort).collect()),
        other => other,
    }
}

pub fn cache_key<T: Serialize>(input: &T) -> String {
    let digest = Sha256::digest(canonical(input).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Write `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct Entry {
    input: Value,
    output: Value,
}

pub enum Lookup<T> {
    Hit(T),
    Miss,
    /// Stored input differs from the requested one.
    Collision,
}

pub struct Cache {
    dir: PathBuf,
    enabled: bool,
}

impl Cache {
    pub fn new(dir: PathBuf, enabled: bool) -> Self {
        Cache { dir, enabled }
    }

    fn path(&self, stage: &str, key: &str) -> PathBuf {
        self.dir.join(stage).join(format!("{key}.json"))
    }

    pub fn get<I: Serialize, T: DeserializeOwned>(&self, stage: &str, input: &I) -> Lookup<T> {
        if !self.enabled {
            return Lookup::Miss;
        }
        let key = cache_key(input);
        let Ok(text) = fs::read_to_string(self.path(stage, &key)) else {
            return Lookup::Miss;
        };
        let Ok(entry) = serde_json::from_str::<Entry>(&text) else {
            return Lookup::Miss;
        };
        if canonical(&entry.input) != canonical(input) {
            return Lookup::Collision;
        }
        match serde_json::from_value(entry.output) {
            Ok(v) => Lookup::Hit(v),
            Err(_) => Lookup::Miss,
        }
    }

    pub fn put<I: Serialize, T: Serialize>(&self, stage: &str, input: &I, output: &T) -> std::io::Result<()> {
        if !self.enabled {
            return Ok(());
        }
        let entry = Entry {
            input: sort(serde_json::to_value(input).expect("json")),
            output: serde_json::to_value(output).expect("json"),
        };
        let text = serde_json::to_string(&entry).expect("json");
        write_atomic(&self.path(stage, &cache_key(input)), text.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use serde_json::json;

    #[test]
    fn key_ignores_field_order() {
        let a = json!({"n": 3, "tol": {"a": 1.0, "b": 2.0}});
        let b = json!({"tol": {"b": 2.0, "a": 1.0}, "n": 3});
        assert_eq!(cache_key(&a), cache_key(&b));
        let c = json!({"n": 3, "tol": {"a": 1.0, "b": 2.5}});
        assert_ne!(cache_key(&a), cache_key(&c));
    }

    #[test]
    fn stored_entries_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path().to_path_buf(), true);
        let input = json!({"stage": "x", "n": 1});
        assert!(matches!(cache.get::<_, Vec<f64>>("x", &input), Lookup::Miss));
        cache.put("x", &input, &vec![1.5, 2.5]).unwrap();
        match cache.get::<_, Vec<f64>>("x", &input) {
            Lookup::Hit(v) => assert_eq!(v, vec![1.5, 2.5]),
            _ => panic!("expected a hit"),
        }
        let path = cache.path("x", &cache_key(&input));
        let forged = serde_json::to_string(&json!({"input": {"other": 1}, "output": [0.0]})).unwrap();
        fs::write(path, forged).unwrap();
        assert!(matches!(cache.get::<_, Vec<f64>>("x", &input), Lookup::Collision));
        let off = Cache::new(dir.path().to_path_buf(), false);
        assert!(matches!(off.get::<_, Vec<f64>>("x", &input), Lookup::Miss));
    }

    proptest! {
        #[test]
        fn key_is_stable_under_key_permutation(pairs in prop::collection::btree_map("[a-z]{1,6}", -1e6f64..1e6, 1..8), seed in 0u64..1000) {
            let mut items: Vec<(String, f64)> = pairs.into_iter().collect();
            let forward: serde_json::Map<String, Value> = items.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
            let n = items.len();
            items.rotate_left((seed as usize) % n);
            items.reverse();
            let shuffled: serde_json::Map<String, Value> = items.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
            prop_assert_eq!(cache_key(&Value::Object(forward)), cache_key(&Value::Object(shuffled)));
        }
    }
}
