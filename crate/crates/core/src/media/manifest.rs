use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub video_id: String,
    pub model_name: String,
    pub prompt: String,
    pub frames_path: PathBuf,
    pub captions_path: Option<PathBuf>,
}

#[derive(Deserialize)]
struct Row {
    video_id: String,
    model_name: String,
    prompt: String,
    frames_path: String,
    #[serde(default)]
    captions_path: Option<String>,
}

/// Videos to process, in file order.
#[derive(Debug, Clone, Default)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    /// Reads a manifest CSV. Relative paths resolve against the manifest's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_reader(file, base)
    }

    pub fn from_reader(reader: impl std::io::Read, base: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(reader);
        let resolve = |p: &str| {
            let p = PathBuf::from(p);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        let mut seen = HashSet::new();
        let mut entries = Vec::new();
        for (line, row) in rdr.deserialize::<Row>().enumerate() {
            let row = row?;
            if row.prompt.trim().is_empty() {
                return Err(Error::Manifest(format!(
                    "video {} has an empty prompt",
                    row.video_id
                )));
            }
            if !seen.insert(row.video_id.clone()) {
                return Err(Error::Manifest(format!(
                    "duplicate video_id {} at row {}",
                    row.video_id,
                    line + 1
                )));
            }
            entries.push(ManifestEntry {
                frames_path: resolve(&row.frames_path),
                captions_path: row
                    .captions_path
                    .filter(|s| !s.is_empty())
                    .map(|s| resolve(&s)),
                video_id: row.video_id,
                model_name: row.model_name,
                prompt: row.prompt,
            });
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
