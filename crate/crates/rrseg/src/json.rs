//! Canonical JSON output: sorted keys, two-space indentation, UTF-8, LF,
//! trailing newline. Byte-stable for byte-stable inputs.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Serializes any value through `serde_json::Value`, whose object maps are
/// BTree-backed, so keys come out sorted.
pub fn to_canonical_string<T: Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("in-memory serialization cannot fail");
    let mut out = serde_json::to_string_pretty(&value).expect("value serialization cannot fail");
    out.push('\n');
    out
}

pub fn write_canonical<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_canonical_string(value)).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// Fixed six-decimal rendering used for every reported metric value.
pub fn fixed6(value: f64) -> String {
    format!("{value:.6}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn keys_are_sorted_regardless_of_insertion_order() {
        let mut map = HashMap::new();
        map.insert("zebra", 1);
        map.insert("apple", 2);
        let out = to_canonical_string(&map);
        let apple = out.find("apple").unwrap();
        let zebra = out.find("zebra").unwrap();
        assert!(apple < zebra);
        assert!(out.ends_with('\n'));
    }

    #[test]
    fn fixed6_formats() {
        assert_eq!(fixed6(0.4), "0.400000");
        assert_eq!(fixed6(2.0 / 3.0), "0.666667");
        assert_eq!(fixed6(1.0), "1.000000");
    }
}
