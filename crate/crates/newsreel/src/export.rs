//! Export bundles: everything a filmer needs, plus a manifest of digests.

use std::fs;
use std::path::Path;

use newsreel_core::digest::sha256_hex;
use newsreel_core::screenplay::format_script;
use newsreel_core::{CharacterBoard, ImageRef, Project, Script, ScriptLine, Storyboard};
use serde::{Deserialize, Serialize};

use crate::blobs::BlobStore;
use crate::error::{Error, Result};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestFile {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Omitted {
    pub section: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportManifest {
    pub project_id: String,
    /// Every file in the bundle except this manifest, sorted by path.
    pub files: Vec<ManifestFile>,
    pub omitted: Vec<Omitted>,
}

/// One storyboard panel as listed in `storyboard/manifest.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelEntry {
    pub image: Option<String>,
    pub line_index: usize,
    pub speaker: String,
    pub parenthetical: Option<String>,
    pub text: String,
    pub expression: String,
    pub gesture: String,
    pub action: String,
    pub image_prompt: String,
}

/// Lowercase ASCII words joined by `-`.
pub fn slug(name: &str) -> String {
    let mut out = String::new();
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.is_empty() && !out.ends_with('-') {
            out.push('-');
        }
    }
    let out = out.trim_end_matches('-').to_string();
    if out.is_empty() {
        "character".into()
    } else {
        out
    }
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    Ok(text.into_bytes())
}

struct Bundle<'a> {
    files: Vec<(String, Vec<u8>)>,
    omitted: Vec<Omitted>,
    blobs: &'a dyn BlobStore,
}

impl Bundle<'_> {
    fn add(&mut self, path: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((path.into(), bytes));
    }

    fn omit(&mut self, section: &str, reason: &str) {
        self.omitted.push(Omitted { section: section.into(), reason: reason.into() });
    }

    fn add_image(&mut self, stem: String, image: &Option<ImageRef>) -> Result<Option<String>> {
        let Some(image) = image else { return Ok(None) };
        let path = format!("{stem}.{}", image.extension());
        let bytes = self.blobs.get(image)?;
        self.add(path.clone(), bytes);
        Ok(Some(path))
    }

    fn add_board(&mut self, board: &CharacterBoard) -> Result<()> {
        let mut checklist = String::new();
        for (i, card) in board.cards.iter().enumerate() {
            let stem = format!("character_board/{:02}_{}", i + 1, slug(&card.character_name));
            self.add_image(format!("{stem}_portrait"), &card.portrait_image)?;
            self.add_image(format!("{stem}_background"), &card.background_image)?;
            if i > 0 {
                checklist.push('\n');
            }
            checklist.push_str(&format!("{}\n", card.character_name));
            for prop in &card.props {
                checklist.push_str(&format!("[ ] {prop}\n"));
            }
        }
        self.add("character_board/props.txt", checklist.into_bytes());
        self.add("character_board/cards.json", json_bytes(board)?);
        Ok(())
    }

    fn add_storyboard(&mut self, storyboard: &Storyboard, script: &Script) -> Result<()> {
        let mut entries = Vec::new();
        for (i, panel) in storyboard.panels.iter().enumerate() {
            let image = self.add_image(format!("storyboard/{:03}", i + 1), &panel.image)?;
            let (parenthetical, text) = match script.lines.get(panel.line_index) {
                Some(ScriptLine::Dialog { parenthetical, text, .. }) => (parenthetical.clone(), text.clone()),
                _ => return Err(Error::StorageCorrupt(format!("panel {i} does not point at a dialog line"))),
            };
            entries.push(PanelEntry {
                image: image.map(|p| p.trim_start_matches("storyboard/").to_string()),
                line_index: panel.line_index,
                speaker: panel.speaker.clone(),
                parenthetical,
                text,
                expression: panel.expression.clone(),
                gesture: panel.gesture.clone(),
                action: panel.action.clone(),
                image_prompt: panel.image_prompt.clone(),
            });
        }
        self.add("storyboard/manifest.json", json_bytes(&entries)?);
        Ok(())
    }
}

/// Bundle files as (relative path, bytes).
pub type BundleFiles = Vec<(String, Vec<u8>)>;

/// The files of a bundle and its manifest, without touching the disk.
pub fn bundle_contents(project: &Project, blobs: &dyn BlobStore) -> Result<(BundleFiles, ExportManifest)> {
    let mut b = Bundle { files: Vec::new(), omitted: Vec::new(), blobs };
    b.add("project.json", json_bytes(project)?);
    let staleness = project.staleness();
    match project.active_script() {
        None => {
            for section in ["script", "highlights", "character_board", "storyboard"] {
                b.omit(section, "no active script");
            }
        }
        Some(script) => {
            b.add("script.txt", format_script(script).into_bytes());
            b.add("script.json", json_bytes(script)?);
            match project.highlights_for(&script.id) {
                Some(h) => b.add("highlights.json", json_bytes(h)?),
                None => b.omit("highlights", "not computed for the active script"),
            }
            match &project.character_board {
                None => b.omit("character_board", "not built"),
                Some(_) if staleness.character_board => b.omit("character_board", "stale"),
                Some(board) => b.add_board(board)?,
            }
            match &project.storyboard {
                None => b.omit("storyboard", "not built"),
                Some(_) if staleness.storyboard => b.omit("storyboard", "stale"),
                Some(sb) => b.add_storyboard(sb, script)?,
            }
        }
    }
    let mut files = b.files;
    files.sort_by(|x, y| x.0.cmp(&y.0));
    let manifest = ExportManifest {
        project_id: project.id.clone(),
        files: files
            .iter()
            .map(|(path, bytes)| ManifestFile {
                path: path.clone(),
                sha256: sha256_hex(bytes),
                bytes: bytes.len() as u64,
            })
            .collect(),
        omitted: b.omitted,
    };
    Ok((files, manifest))
}

/// Writes the bundle under `dest` and returns its manifest. Existing files
/// with the same names are replaced.
pub fn export_bundle(project: &Project, blobs: &dyn BlobStore, dest: &Path) -> Result<ExportManifest> {
    let (files, manifest) = bundle_contents(project, blobs)?;
    for (path, bytes) in &files {
        let target = dest.join(path);
        if let Some(parent) = target.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(target, bytes)?;
    }
    fs::create_dir_all(dest)?;
    fs::write(dest.join(MANIFEST), json_bytes(&manifest)?)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs() {
        assert_eq!(slug("Credit Union"), "credit-union");
        assert_eq!(slug("Consumers (like Ed Delaney)"), "consumers-like-ed-delaney");
        assert_eq!(slug("!!"), "character");
    }
}
