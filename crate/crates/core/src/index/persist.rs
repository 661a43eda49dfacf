//! Single-file index format.
//!
//! ```text
//! magic    5 bytes   "FMLY1"
//! version  u16 LE
//! length   u64 LE    payload byte length
//! payload  bincode (fixed-width little-endian integers)
//! checksum u64 LE    FNV-1a 64 of the payload
//! ```
//!
//! The payload holds the config, stored records, the sorted term dictionary
//! with postings, and the suggestion table. Facet dictionaries and the id
//! map are rebuilt on load.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DocumentRecord, IndexConfig, IndexError, IndexSnapshot, Posting, TermKey};

pub const MAGIC: &[u8; 5] = b"FMLY1";
pub const FORMAT_VERSION: u16 = 1;

const HEADER_LEN: usize = 5 + 2 + 8;

#[derive(Serialize)]
struct PayloadRef<'a> {
    config: &'a IndexConfig,
    docs: &'a [DocumentRecord],
    postings: Vec<(&'a TermKey, &'a [Posting])>,
    suggestions: &'a BTreeMap<String, u64>,
}

#[derive(Deserialize)]
struct Payload {
    config: IndexConfig,
    docs: Vec<DocumentRecord>,
    postings: Vec<(TermKey, Vec<Posting>)>,
    suggestions: BTreeMap<String, u64>,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

impl IndexSnapshot {
    pub fn to_bytes(&self) -> Vec<u8> {
        let payload = PayloadRef {
            config: &self.config,
            docs: &self.docs,
            postings: self
                .postings
                .iter()
                .map(|(k, list)| (k, list.postings.as_slice()))
                .collect(),
            suggestions: &self.suggestions,
        };
        let body = bincode::serialize(&payload).expect("in-memory serialization cannot fail");
        let mut out = Vec::with_capacity(HEADER_LEN + body.len() + 8);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(body.len() as u64).to_le_bytes());
        out.extend_from_slice(&body);
        out.extend_from_slice(&fnv1a(&body).to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<IndexSnapshot, IndexError> {
        if bytes.len() < 5 || &bytes[..5] != MAGIC {
            let found = String::from_utf8_lossy(&bytes[..bytes.len().min(5)]).into_owned();
            return Err(IndexError::FormatVersionMismatch {
                found: format!("magic {found:?}"),
                expected: format!("magic {:?}", std::str::from_utf8(MAGIC).unwrap()),
            });
        }
        if bytes.len() < HEADER_LEN {
            return Err(IndexError::Corrupt("truncated header".to_string()));
        }
        let version = u16::from_le_bytes([bytes[5], bytes[6]]);
        if version != FORMAT_VERSION {
            return Err(IndexError::FormatVersionMismatch {
                found: version.to_string(),
                expected: FORMAT_VERSION.to_string(),
            });
        }
        let length = u64::from_le_bytes(bytes[7..HEADER_LEN].try_into().unwrap());
        let expected_total = (HEADER_LEN as u64)
            .checked_add(length)
            .and_then(|n| n.checked_add(8))
            .ok_or_else(|| IndexError::Corrupt("payload length overflow".to_string()))?;
        if bytes.len() as u64 != expected_total {
            return Err(IndexError::Corrupt(format!(
                "expected {expected_total} bytes, found {}",
                bytes.len()
            )));
        }
        let body = &bytes[HEADER_LEN..HEADER_LEN + length as usize];
        let checksum = u64::from_le_bytes(bytes[HEADER_LEN + length as usize..].try_into().unwrap());
        if fnv1a(body) != checksum {
            return Err(IndexError::Corrupt("checksum mismatch".to_string()));
        }
        let payload: Payload = bincode::deserialize(body).map_err(|e| IndexError::Corrupt(e.to_string()))?;
        let snapshot = IndexSnapshot::from_parts(
            payload.config,
            payload.docs,
            payload.postings.into_iter().collect(),
            payload.suggestions,
        );
        snapshot.check_consistency().map_err(IndexError::Corrupt)?;
        Ok(snapshot)
    }

    /// Writes the index to `path` via a temporary sibling file.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), IndexError> {
        let path = path.as_ref();
        let tmp = path.with_extension("tmp");
        {
            let mut file = fs::File::create(&tmp)?;
            file.write_all(&self.to_bytes())?;
            file.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<IndexSnapshot, IndexError> {
        IndexSnapshot::from_bytes(&fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::tests::record;
    use crate::index::IndexBuilder;

    fn sample() -> IndexSnapshot {
        let mut builder = IndexBuilder::new(IndexConfig::default()).unwrap();
        builder
            .add_document(record("a", "Groups", "en", "finite groups"))
            .unwrap();
        builder
            .add_document(record("b", "Rings", "cs", "commutative rings"))
            .unwrap();
        builder.commit()
    }

    #[test]
    fn round_trip() {
        let snapshot = sample();
        let bytes = snapshot.to_bytes();
        assert_eq!(&bytes[..5], b"FMLY1");
        let loaded = IndexSnapshot::from_bytes(&bytes).unwrap();
        assert_eq!(loaded, snapshot);
        assert_eq!(loaded.to_bytes(), bytes);
    }

    #[test]
    fn empty_index() {
        let snapshot = IndexBuilder::new(IndexConfig::default()).unwrap().commit();
        let loaded = IndexSnapshot::from_bytes(&snapshot.to_bytes()).unwrap();
        assert_eq!(loaded.doc_count(), 0);
    }

    #[test]
    fn rejects_damage() {
        let bytes = sample().to_bytes();
        for cut in [0, 3, 10, bytes.len() / 2, bytes.len() - 1] {
            assert!(IndexSnapshot::from_bytes(&bytes[..cut]).is_err(), "cut at {cut}");
        }
        let mut flipped = bytes.clone();
        let mid = flipped.len() / 2;
        flipped[mid] ^= 0x40;
        assert!(matches!(
            IndexSnapshot::from_bytes(&flipped),
            Err(IndexError::Corrupt(_))
        ));
        let mut version = bytes.clone();
        version[5] = 9;
        assert!(matches!(
            IndexSnapshot::from_bytes(&version),
            Err(IndexError::FormatVersionMismatch { .. })
        ));
        assert!(matches!(
            IndexSnapshot::from_bytes(b"not an index"),
            Err(IndexError::FormatVersionMismatch { .. })
        ));
    }

    #[test]
    fn save_and_load_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("index.fmly");
        let snapshot = sample();
        snapshot.save(&path).unwrap();
        assert_eq!(IndexSnapshot::load(&path).unwrap(), snapshot);
        assert!(matches!(
            IndexSnapshot::load(dir.path().join("missing")),
            Err(IndexError::Io(_))
        ));
    }
}
