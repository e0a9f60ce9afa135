//! One directory per project: `project.json` plus content-addressed blobs.

use std::fs::{self, File, TryLockError};
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use newsreel_core::Project;

use crate::blobs::DirBlobs;
use crate::error::{Error, Result};
use crate::providers::write_atomic;

const PROJECT_FILE: &str = "project.json";
const LOCK_FILE: &str = ".lock";

#[derive(Debug, Clone)]
pub struct Workspace {
    root: PathBuf,
}

/// Held while a writer owns a project. Dropping it releases the lock.
#[derive(Debug)]
pub struct ProjectLock {
    _file: File,
}

/// Project ids become directory names, so only plain names are allowed.
fn check_id(id: &str) -> Result<()> {
    let plain =
        !id.is_empty() && id.len() <= 64 && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_');
    if plain {
        Ok(())
    } else {
        Err(Error::NotFound(id.to_string()))
    }
}

impl Workspace {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Workspace { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dir(&self, id: &str) -> Result<PathBuf> {
        check_id(id)?;
        Ok(self.root.join(id))
    }

    pub fn blobs(&self, id: &str) -> Result<DirBlobs> {
        Ok(DirBlobs::new(self.dir(id)?.join("blobs")))
    }

    pub fn exists(&self, id: &str) -> bool {
        self.dir(id).is_ok_and(|d| d.join(PROJECT_FILE).is_file())
    }

    /// Ids of every stored project, sorted.
    pub fn list(&self) -> Result<Vec<String>> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.root)? {
            let entry = entry?;
            if let Some(name) = entry.file_name().to_str() {
                if self.exists(name) {
                    ids.push(name.to_string());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }

    /// Stores a new project. Fails if the id is taken.
    pub fn create(&self, project: &Project) -> Result<()> {
        if self.exists(&project.id) {
            return Err(Error::invalid("project.id", "already exists"));
        }
        self.save(project)
    }

    /// Writes `project.json` through a temporary file and a rename, so a
    /// crash never leaves a half-written project behind.
    pub fn save(&self, project: &Project) -> Result<()> {
        let dir = self.dir(&project.id)?;
        fs::create_dir_all(dir.join("blobs"))?;
        let mut text = serde_json::to_string_pretty(project).map_err(|e| Error::Format(e.to_string()))?;
        text.push('\n');
        write_atomic(&dir.join(PROJECT_FILE), text.as_bytes())
    }

    /// Loads a project and checks that its event log rebuilds it exactly.
    pub fn load(&self, id: &str) -> Result<Project> {
        let path = self.dir(id)?.join(PROJECT_FILE);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == ErrorKind::NotFound => return Err(Error::NotFound(id.to_string())),
            Err(e) => return Err(e.into()),
        };
        let project: Project =
            serde_json::from_str(&text).map_err(|e| Error::StorageCorrupt(format!("{}: {e}", path.display())))?;
        if project.id != id {
            return Err(Error::StorageCorrupt(format!("{} holds project {}", path.display(), project.id)));
        }
        let rebuilt = Project::replay(&project.event_log)
            .map_err(|e| Error::StorageCorrupt(format!("event log of {id} does not replay: {e}")))?;
        if rebuilt != project {
            return Err(Error::StorageCorrupt(format!("state of {id} differs from its event log")));
        }
        Ok(project)
    }

    fn lock_file(&self, id: &str) -> Result<File> {
        let dir = self.dir(id)?;
        if !dir.join(PROJECT_FILE).is_file() {
            return Err(Error::NotFound(id.to_string()));
        }
        Ok(File::options().create(true).truncate(false).write(true).open(dir.join(LOCK_FILE))?)
    }

    /// Waits for exclusive write access to project `id`.
    pub fn lock(&self, id: &str) -> Result<ProjectLock> {
        let file = self.lock_file(id)?;
        file.lock()?;
        Ok(ProjectLock { _file: file })
    }

    /// Exclusive write access to project `id`, or `Locked` if another
    /// writer holds it.
    pub fn try_lock(&self, id: &str) -> Result<ProjectLock> {
        let file = self.lock_file(id)?;
        match file.try_lock() {
            Ok(()) => Ok(ProjectLock { _file: file }),
            Err(TryLockError::WouldBlock) => Err(Error::Locked(id.to_string())),
            Err(TryLockError::Error(e)) => Err(e.into()),
        }
    }
}
