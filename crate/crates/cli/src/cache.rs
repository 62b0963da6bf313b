//! Content-addressed cache for graded pieces. Keys hash the canonical spec
//! description plus the artifact version; reads verify the stored description
//! against the request, so hash collisions or corrupted files fall back to
//! recomputation with a warning on stderr.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use dalab_core::serialize::GradedSubspaceJson;
use dalab_core::variety::GradedSubspace;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// FNV-1a over the canonical bytes; collisions are harmless because reads
/// verify the full description.
pub fn cache_key(description: &str) -> String {
    let mut hash: u64 = 0xcbf29ce484222325;
    for byte in description.as_bytes() {
        hash ^= *byte as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    format!("{hash:016x}")
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct CacheEntry {
    version: String,
    description: String,
    piece: GradedSubspaceJson,
}

pub struct PieceCache {
    dir: Option<PathBuf>,
    pub hits: usize,
    pub misses: usize,
}

impl PieceCache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        if let Some(d) = &dir {
            let _ = std::fs::create_dir_all(d);
        }
        Self { dir, hits: 0, misses: 0 }
    }

    fn path_for(&self, description: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| {
            let key = cache_key(&format!("{ARTIFACT_VERSION}|{description}"));
            d.join(format!("{key}.json"))
        })
    }

    pub fn get_or_compute(
        &mut self,
        description: &str,
        compute: impl FnOnce() -> GradedSubspace,
    ) -> GradedSubspace {
        let Some(path) = self.path_for(description) else {
            return compute();
        };
        if let Some(piece) = self.try_read(&path, description) {
            self.hits += 1;
            return piece;
        }
        let piece = compute();
        self.misses += 1;
        self.write(&path, description, &piece);
        piece
    }

    fn try_read(&self, path: &Path, description: &str) -> Option<GradedSubspace> {
        let text = std::fs::read_to_string(path).ok()?;
        let entry: CacheEntry = match serde_json::from_str(&text) {
            Ok(e) => e,
            Err(e) => {
                eprintln!("warning: cache entry {} unreadable ({e}); recomputing", path.display());
                return None;
            }
        };
        if entry.version != ARTIFACT_VERSION || entry.description != description {
            eprintln!(
                "warning: cache entry {} does not match its key; recomputing",
                path.display()
            );
            return None;
        }
        match entry.piece.to_subspace() {
            Ok(piece) => Some(piece),
            Err(e) => {
                eprintln!("warning: cache entry {} corrupt ({e}); recomputing", path.display());
                None
            }
        }
    }

    fn write(&self, path: &Path, description: &str, piece: &GradedSubspace) {
        let entry = CacheEntry {
            version: ARTIFACT_VERSION.to_string(),
            description: description.to_string(),
            piece: GradedSubspaceJson::from_subspace(piece),
        };
        if let Ok(text) = serde_json::to_string(&entry) {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("warning: cannot write cache entry {}: {e}", path.display());
            }
        }
    }
}
