//! Content-addressed image storage.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use newsreel_core::digest::sha256_hex;
use newsreel_core::{ImageRef, Project};

use crate::error::{Error, Result};
use crate::providers::GeneratedImage;

pub trait BlobStore: Send + Sync {
    fn put(&self, image: &GeneratedImage) -> Result<ImageRef>;
    fn get(&self, image: &ImageRef) -> Result<Vec<u8>>;
}

fn check_digest(image: &ImageRef) -> Result<()> {
    if image.digest.len() == 64 && image.digest.bytes().all(|b| b.is_ascii_hexdigit() && !b.is_ascii_uppercase()) {
        Ok(())
    } else {
        Err(Error::invalid("image.digest", "must be 64 lowercase hex digits"))
    }
}

/// Blobs held in memory, for batch runs that only export at the end.
#[derive(Debug, Default)]
pub struct MemoryBlobs {
    blobs: Mutex<BTreeMap<String, Vec<u8>>>,
}

impl BlobStore for MemoryBlobs {
    fn put(&self, image: &GeneratedImage) -> Result<ImageRef> {
        let image_ref = image.image_ref();
        self.blobs.lock().unwrap_or_else(|p| p.into_inner()).insert(image_ref.digest.clone(), image.bytes.clone());
        Ok(image_ref)
    }

    fn get(&self, image: &ImageRef) -> Result<Vec<u8>> {
        self.blobs
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .get(&image.digest)
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("blob {}", image.digest)))
    }
}

/// Blobs as files named `<digest>.<ext>` in one directory.
#[derive(Debug, Clone)]
pub struct DirBlobs {
    dir: PathBuf,
}

impl DirBlobs {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        DirBlobs { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_of(&self, image: &ImageRef) -> Result<PathBuf> {
        check_digest(image)?;
        Ok(self.dir.join(image.file_name()))
    }
}

impl BlobStore for DirBlobs {
    fn put(&self, image: &GeneratedImage) -> Result<ImageRef> {
        let image_ref = image.image_ref();
        let path = self.path_of(&image_ref)?;
        if !path.exists() {
            crate::providers::write_atomic(&path, &image.bytes)?;
        }
        Ok(image_ref)
    }

    fn get(&self, image: &ImageRef) -> Result<Vec<u8>> {
        let path = self.path_of(image)?;
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(Error::NotFound(format!("blob {}", image.digest)))
            }
            Err(e) => return Err(e.into()),
        };
        if sha256_hex(&bytes) != image.digest {
            return Err(Error::StorageCorrupt(format!("blob {} does not match its digest", image.digest)));
        }
        Ok(bytes)
    }
}

/// Every image a project refers to, board first, in order.
pub fn project_images(project: &Project) -> Vec<&ImageRef> {
    let cards = project.character_board.iter().flat_map(|b| &b.cards);
    let portraits = cards.flat_map(|c| [&c.portrait_image, &c.background_image]).flatten();
    let panels = project.storyboard.iter().flat_map(|s| &s.panels).filter_map(|p| p.image.as_ref());
    portraits.chain(panels).collect()
}

pub fn copy_images(project: &Project, from: &dyn BlobStore, to: &dyn BlobStore) -> Result<()> {
    for image in project_images(project) {
        to.put(&GeneratedImage { bytes: from.get(image)?, media_type: image.media_type.clone() })?;
    }
    Ok(())
}
