//! File-mediated pipeline stages. Each writes its artifacts and a
//! `stage.json` under `<out>/<stage>/`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use eegimg::encode::{encode_single, encode_stacked, read_tensor, write_png, write_tensor};
use eegimg::split::{stratified_group_split, SplitAssignment};
use eegimg::texture::{export_features, extract_tensor, FeatureFormat, FeatureMatrix, Modality};
use eegimg::trial::{crop_window, ingest, write_trialset, zscore_channels, Trial, TrialSet};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{EncodeVariant, PipelineConfig};
use crate::error::{CliError, Result};
use crate::provenance::{create_dir, read_json, write_json, StageManifest};

/// Shared state for one invocation.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: PipelineConfig,
    pub out: PathBuf,
    pub jobs: usize,
}

impl Context {
    pub fn new(config: PipelineConfig, out: PathBuf, jobs: usize) -> Self {
        Self {
            config,
            out,
            jobs: jobs.max(1),
        }
    }

    pub fn stage_dir(&self, stage: &str) -> Result<PathBuf> {
        let dir = self.out.join(stage);
        create_dir(&dir)?;
        Ok(dir)
    }

    pub fn manifest(&self, stage: &str, seed: Option<u64>) -> StageManifest {
        StageManifest::new(stage, self.config.hash(), seed)
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {} worker threads: {e}", self.jobs)))
    }
}

/// Loads a manifest, then crops and z-scores as configured. Values are
/// rounded to `f32` so the written copy matches what later stages see.
pub fn ingest_stage(ctx: &Context, manifest: &Path) -> Result<TrialSet> {
    let set = ingest(manifest)?;
    let cfg = &ctx.config;
    let set = set.try_map(|t| {
        let mut t = match cfg.crop {
            Some((start, end)) => crop_window(t, start, end)?,
            None => t.clone(),
        };
        if cfg.zscore {
            t = zscore_channels(&t);
        }
        t.data.mapv_inplace(|v| f64::from(v as f32));
        Ok(t)
    })?;
    let dir = ctx.stage_dir("ingest")?;
    let provenance = serde_json::json!({
        "source": manifest,
        "crop": cfg.crop,
        "zscore": cfg.zscore,
        "config_hash": cfg.hash(),
    });
    write_trialset(&set, &dir, Some(provenance))?;
    ctx.manifest("ingest", None)
        .input(manifest)
        .artifact("manifest.json")
        .artifact("blobs")
        .write(&dir)?;
    Ok(set)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub file: String,
    /// Stimulus id.
    pub sample_id: u32,
    pub label: u16,
    /// Absent for the subject-channel variant.
    pub subject: Option<u16>,
}

/// `index.json` of the encode stage, in tensor order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorIndex {
    pub variant: EncodeVariant,
    pub entries: Vec<TensorEntry>,
}

/// Trials grouped by stimulus in order of first appearance.
fn group_by_stimulus(set: &TrialSet) -> Result<Vec<Vec<&Trial>>> {
    let mut order: Vec<u32> = Vec::new();
    let mut groups: HashMap<u32, Vec<&Trial>> = HashMap::new();
    for t in set.trials() {
        let group = groups.entry(t.stimulus_id).or_insert_with(|| {
            order.push(t.stimulus_id);
            Vec::new()
        });
        if let Some(first) = group.first() {
            if first.class_label != t.class_label {
                return Err(CliError::Data(format!(
                    "stimulus {} carries labels {} and {}",
                    t.stimulus_id, first.class_label, t.class_label
                )));
            }
        }
        group.push(t);
    }
    Ok(order.into_iter().map(|id| groups.remove(&id).unwrap()).collect())
}

/// Encodes every trial (or stimulus group) to `<out>/encode/tensors/`.
/// Work is spread over `ctx.jobs` threads; output never depends on it.
pub fn encode_stage(ctx: &Context, set: &TrialSet, source: &Path) -> Result<PathBuf> {
    let cfg = &ctx.config;
    cfg.encode.validate()?;
    let dir = ctx.stage_dir("encode")?;
    let tensor_dir = dir.join("tensors");
    create_dir(&tensor_dir)?;
    let units: Vec<Vec<&Trial>> = match cfg.encode_variant {
        EncodeVariant::Single => set.trials().iter().map(|t| vec![t]).collect(),
        EncodeVariant::Subjects => group_by_stimulus(set)?,
    };
    let entries = ctx.pool()?.install(|| {
        units
            .par_iter()
            .enumerate()
            .map(|(i, unit)| -> eegimg::Result<TensorEntry> {
                let img = match cfg.encode_variant {
                    EncodeVariant::Single => encode_single(unit[0], &cfg.encode)?,
                    EncodeVariant::Subjects => encode_stacked(unit, &cfg.encode)?,
                };
                let file = format!("{i:06}.eegi");
                write_tensor(&img, &tensor_dir.join(&file))?;
                if cfg.png {
                    write_png(&img.channel(0), &tensor_dir.join(format!("{i:06}.png")))?;
                }
                Ok(TensorEntry {
                    file,
                    sample_id: unit[0].stimulus_id,
                    label: unit[0].class_label,
                    subject: (cfg.encode_variant == EncodeVariant::Single).then_some(unit[0].subject_id),
                })
            })
            .collect::<eegimg::Result<Vec<_>>>()
    })?;
    let index = TensorIndex {
        variant: cfg.encode_variant,
        entries,
    };
    write_json(&dir.join("index.json"), &index)?;
    ctx.manifest("encode", None)
        .input(source)
        .artifact("index.json")
        .artifact("tensors")
        .write(&dir)?;
    Ok(dir)
}

/// Texture features of every tensor listed in `<encode_dir>/index.json`,
/// written to `<out>/features/eeg_features.csv`.
pub fn features_stage(ctx: &Context, encode_dir: &Path) -> Result<FeatureMatrix> {
    let index: TensorIndex = read_json(&encode_dir.join("index.json"))?;
    let tensor_dir = encode_dir.join("tensors");
    let cfg = &ctx.config.features;
    let vectors = ctx.pool()?.install(|| {
        index
            .entries
            .par_iter()
            .map(|e| extract_tensor(&read_tensor(&tensor_dir.join(&e.file))?, cfg))
            .collect::<eegimg::Result<Vec<_>>>()
    })?;
    let ids = index.entries.iter().map(|e| e.sample_id).collect();
    let labels = index.entries.iter().map(|e| e.label).collect();
    let m = FeatureMatrix::from_vectors(&vectors, ids, labels)?.with_modality(Modality::Eeg);
    let dir = ctx.stage_dir("features")?;
    export_features(&m, &dir.join("eeg_features.csv"), FeatureFormat::Csv)?;
    ctx.manifest("features", None)
        .input(encode_dir)
        .artifact("eeg_features.csv")
        .write(&dir)?;
    Ok(m)
}

/// Stratified stimulus-grouped split, written to `<out>/split/split.json`.
pub fn split_stage(ctx: &Context, set: &TrialSet, source: &Path) -> Result<SplitAssignment> {
    let split = &ctx.config.split;
    let a = stratified_group_split(set, split.ratios, split.seed)?;
    let dir = ctx.stage_dir("split")?;
    a.save(&dir.join("split.json"))?;
    ctx.manifest("split", Some(split.seed))
        .input(source)
        .artifact("split.json")
        .write(&dir)?;
    Ok(a)
}
