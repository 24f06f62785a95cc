//! JSON manifests listing `EEGT` blobs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{blob, first_non_finite_row, TrialSet};
use crate::{Error, Result};

/// On-disk description of a trial set. Blob paths are resolved relative to
/// the manifest's directory unless absolute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub band_tag: String,
    pub class_names: Vec<String>,
    pub n_subjects: u16,
    pub n_channels: u32,
    pub n_samples: u32,
    pub trials: Vec<PathBuf>,
    /// Free-form record of how the set was produced.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
    }
}

/// Loads and validates every blob referenced by a manifest, in manifest order.
pub fn ingest(manifest_path: &Path) -> Result<TrialSet> {
    let manifest = Manifest::read(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let mut trials = Vec::with_capacity(manifest.trials.len());
    for (i, rel) in manifest.trials.iter().enumerate() {
        let path = base.join(rel);
        let t = blob::read_trial(&path)?;
        if t.n_channels() != manifest.n_channels as usize
            || t.n_samples() != manifest.n_samples as usize
        {
            return Err(Error::Dimension(format!(
                "{}: blob is {}x{}, manifest expects {}x{}",
                path.display(),
                t.n_channels(),
                t.n_samples(),
                manifest.n_channels,
                manifest.n_samples
            )));
        }
        if let Some(channel) = first_non_finite_row(&t.data) {
            return Err(Error::NonFinite { trial: i, channel });
        }
        trials.push(t);
    }
    TrialSet::new(
        trials,
        manifest.band_tag,
        manifest.class_names,
        manifest.n_subjects,
    )
}

/// Writes `dir/manifest.json` and one blob per trial under `dir/blobs/`.
/// Returns the manifest path.
pub fn write_trialset(
    set: &TrialSet,
    dir: &Path,
    provenance: Option<serde_json::Value>,
) -> Result<PathBuf> {
    let blob_dir = dir.join("blobs");
    fs::create_dir_all(&blob_dir).map_err(|e| Error::io(&blob_dir, e))?;
    let (n_channels, n_samples) = set.shape().unwrap_or((0, 0));
    let mut paths = Vec::with_capacity(set.len());
    for (i, t) in set.trials().iter().enumerate() {
        let rel = PathBuf::from("blobs").join(format!("{i:06}.eegt"));
        blob::write_trial(t, &dir.join(&rel))?;
        paths.push(rel);
    }
    let manifest = Manifest {
        band_tag: set.band_tag().to_string(),
        class_names: set.class_names().to_vec(),
        n_subjects: set.n_subjects(),
        n_channels: n_channels as u32,
        n_samples: n_samples as u32,
        trials: paths,
        provenance,
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
