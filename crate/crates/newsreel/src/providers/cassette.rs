use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use newsreel_core::digest::{json_digest, sha256_hex};
use newsreel_core::{ImageRef, Timestamp};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{GeneratedImage, ProviderKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CassetteEntry {
    pub provider_kind: ProviderKind,
    pub request_digest: String,
    pub request: Value,
    pub response: Value,
    pub recorded_at: Timestamp,
}

/// Digest of a request's identifying fields. `serde_json::Value` objects
/// keep their keys sorted, so field order in the source never matters.
pub fn request_digest(kind: ProviderKind, fields: &Value) -> String {
    json_digest(&json!({ "kind": kind, "request": fields }))
}

#[derive(Debug, Default)]
struct State {
    entries: Vec<CassetteEntry>,
    cursors: HashMap<(ProviderKind, String), usize>,
}

/// Recorded provider traffic: a JSON array of entries, with image bytes in
/// sibling files named by their digest.
#[derive(Debug)]
pub struct Cassette {
    path: PathBuf,
    state: Mutex<State>,
}

impl Cassette {
    /// Loads an existing cassette.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let text = fs::read_to_string(&path)
            .map_err(|e| Error::Format(format!("cannot read cassette {}: {e}", path.display())))?;
        let entries: Vec<CassetteEntry> = serde_json::from_str(&text)
            .map_err(|e| Error::StorageCorrupt(format!("cassette {}: {e}", path.display())))?;
        Ok(Cassette { path, state: Mutex::new(State { entries, cursors: HashMap::new() }) })
    }

    /// Loads `path` if present, otherwise starts an empty cassette there.
    pub fn load_or_create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if path.exists() {
            Cassette::load(path)
        } else {
            Ok(Cassette { path: path.to_path_buf(), state: Mutex::new(State::default()) })
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn dir(&self) -> PathBuf {
        self.path.parent().map(Path::to_path_buf).unwrap_or_default()
    }

    fn state(&self) -> std::sync::MutexGuard<'_, State> {
        self.state.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn entries(&self) -> Vec<CassetteEntry> {
        self.state().entries.clone()
    }

    pub fn len(&self) -> usize {
        self.state().entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn has_kind(&self, kind: ProviderKind) -> bool {
        self.state().entries.iter().any(|e| e.provider_kind == kind)
    }

    /// The next recorded response for this request. Repeated requests walk
    /// through their recordings in order and then keep returning the last.
    pub fn lookup(&self, kind: ProviderKind, digest: &str) -> Option<Value> {
        let mut state = self.state();
        let matches: Vec<usize> = state
            .entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.provider_kind == kind && e.request_digest == digest)
            .map(|(i, _)| i)
            .collect();
        let last = *matches.last()?;
        let cursor = state.cursors.entry((kind, digest.to_string())).or_insert(0);
        let index = matches.get(*cursor).copied().unwrap_or(last);
        *cursor += 1;
        Some(state.entries[index].response.clone())
    }

    /// Appends an entry and rewrites the file. Entries are kept sorted by
    /// kind and digest (stable for repeats) so concurrent recording still
    /// yields the same file.
    pub fn append(&self, entry: CassetteEntry) -> Result<()> {
        let mut state = self.state();
        state.entries.push(entry);
        state.entries.sort_by(|a, b| (a.provider_kind, &a.request_digest).cmp(&(b.provider_kind, &b.request_digest)));
        self.save(&state.entries)
    }

    fn save(&self, entries: &[CassetteEntry]) -> Result<()> {
        let values: Vec<Value> = entries
            .iter()
            .map(serde_json::to_value)
            .collect::<Result<_, _>>()
            .map_err(|e| Error::Format(e.to_string()))?;
        let mut text = serde_json::to_string_pretty(&values).map_err(|e| Error::Format(e.to_string()))?;
        text.push('\n');
        write_atomic(&self.path, text.as_bytes())
    }

    /// Stores image bytes beside the cassette and returns the response
    /// value that refers to them.
    pub fn write_image(&self, image: &GeneratedImage) -> Result<Value> {
        let image_ref: ImageRef = image.image_ref();
        let file = image_ref.file_name();
        let path = self.dir().join(&file);
        if !path.exists() {
            write_atomic(&path, &image.bytes)?;
        }
        Ok(json!({ "file": file, "media_type": image.media_type, "sha256": image_ref.digest }))
    }

    pub fn read_image(&self, response: &Value) -> Result<GeneratedImage> {
        let field = |k: &str| {
            response[k]
                .as_str()
                .map(str::to_string)
                .ok_or_else(|| Error::StorageCorrupt(format!("image entry has no {k}")))
        };
        let (file, media_type, digest) = (field("file")?, field("media_type")?, field("sha256")?);
        if file.contains('/') || file.contains('\\') || file.starts_with('.') {
            return Err(Error::StorageCorrupt(format!("image file name `{file}` is not a plain file name")));
        }
        let bytes = fs::read(self.dir().join(&file))
            .map_err(|e| Error::StorageCorrupt(format!("recorded image {file}: {e}")))?;
        if sha256_hex(&bytes) != digest {
            return Err(Error::StorageCorrupt(format!("recorded image {file} does not match its digest")));
        }
        Ok(GeneratedImage { bytes, media_type })
    }
}

/// Writes through a temporary file in the same directory, then renames.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(digest: &str, text: &str) -> CassetteEntry {
        CassetteEntry {
            provider_kind: ProviderKind::Completion,
            request_digest: digest.into(),
            request: json!({}),
            response: json!({ "text": text }),
            recorded_at: Timestamp(0),
        }
    }

    #[test]
    fn digest_ignores_field_order() {
        let a: Value = serde_json::from_str(r#"{"prompt":"p","request_tag":"t","temperature":0.2}"#).unwrap();
        let b: Value = serde_json::from_str(r#"{"temperature":0.2,"request_tag":"t","prompt":"p"}"#).unwrap();
        assert_eq!(request_digest(ProviderKind::Completion, &a), request_digest(ProviderKind::Completion, &b));
        assert_ne!(request_digest(ProviderKind::Completion, &a), request_digest(ProviderKind::Image, &a));
    }

    #[test]
    fn repeated_requests_walk_recordings() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cassette::load_or_create(dir.path().join("c.json")).unwrap();
        c.append(entry("d", "first")).unwrap();
        c.append(entry("d", "second")).unwrap();
        let reloaded = Cassette::load(c.path()).unwrap();
        let texts: Vec<Value> =
            (0..3).map(|_| reloaded.lookup(ProviderKind::Completion, "d").unwrap()["text"].clone()).collect();
        assert_eq!(texts, vec![json!("first"), json!("second"), json!("second")]);
        assert!(reloaded.lookup(ProviderKind::Completion, "other").is_none());
        assert!(reloaded.lookup(ProviderKind::Image, "d").is_none());
    }

    #[test]
    fn file_keys_are_sorted() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cassette::load_or_create(dir.path().join("c.json")).unwrap();
        c.append(entry("d", "x")).unwrap();
        let text = fs::read_to_string(c.path()).unwrap();
        let keys = ["provider_kind", "recorded_at", "request", "request_digest", "response"];
        let positions: Vec<usize> = keys.iter().map(|k| text.find(&format!("\"{k}\"")).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn images_round_trip_and_detect_tampering() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cassette::load_or_create(dir.path().join("c.json")).unwrap();
        let image = GeneratedImage { bytes: vec![1, 2, 3], media_type: "image/png".into() };
        let response = c.write_image(&image).unwrap();
        assert_eq!(c.read_image(&response).unwrap(), image);
        fs::write(dir.path().join(response["file"].as_str().unwrap()), [9]).unwrap();
        assert!(matches!(c.read_image(&response), Err(Error::StorageCorrupt(_))));
    }
}
