use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use eegimg::classify::EvalReport;
use eegimg::split::{apply_split, Split};
use eegimg::texture::import_features;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{CliError, Result};
use crate::model::{fuse_stage, TrainedModel};
use crate::provenance::{create_dir, write_json, TOOL, VERSION};
use crate::stages::{encode_stage, features_stage, ingest_stage, split_stage, Context};

/// Contents of `<out>/report.json`. Holds nothing that varies between
/// identical runs; wall-clock times go to `timings.json` instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub config: PipelineConfig,
    pub class_names: Vec<String>,
    /// Stimuli per split.
    pub split_counts: BTreeMap<Split, usize>,
    /// `None` for a split with no rows.
    pub splits: BTreeMap<Split, Option<EvalReport>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Contents of `<out>/timings.json`, in execution order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub stages: Vec<StageTiming>,
}

impl Timings {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f()?;
        self.stages.push(StageTiming {
            stage: stage.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        Ok(out)
    }

    pub fn get(&self, stage: &str) -> Option<f64> {
        self.stages.iter().find(|t| t.stage == stage).map(|t| t.seconds)
    }
}

/// Runs every stage in order and writes `report.json` and `timings.json`.
/// The config is validated before anything touches the output directory.
pub fn run_pipeline(config: PipelineConfig, out: &Path, jobs: usize) -> Result<(RunReport, Timings)> {
    config.validate()?;
    let manifest = config
        .manifest
        .clone()
        .ok_or_else(|| CliError::Config("no manifest given (set \"manifest\" or pass --manifest)".into()))?;
    create_dir(out)?;
    let ctx = Context::new(config, out.to_path_buf(), jobs);
    let cfg = &ctx.config;
    let mut timings = Timings::default();

    let set = timings.time("ingest", || ingest_stage(&ctx, &manifest))?;
    let eeg = match &cfg.eeg_features {
        Some(path) => timings.time("features", || Ok(import_features(path)?))?,
        None => {
            let source = out.join("ingest").join("manifest.json");
            let encode_dir = timings.time("encode", || encode_stage(&ctx, &set, &source))?;
            timings.time("features", || features_stage(&ctx, &encode_dir))?
        }
    };
    let fused = timings.time("fuse", || fuse_stage(&ctx, &eeg))?;
    let assignment = timings.time("split", || split_stage(&ctx, &set, &manifest))?;

    let (model, parts) = timings.time("train", || {
        let parts = apply_split(&assignment, &fused.features)?;
        let targets = fused.targets.as_ref().map(|t| apply_split(&assignment, t)).transpose()?;
        let model = TrainedModel::fit(&ctx, &parts.train, targets.as_ref().map(|t| &t.train))?;
        let dir = ctx.stage_dir("train")?;
        model.save(&dir.join("model.json"))?;
        ctx.manifest("train", Some(cfg.split.seed)).artifact("model.json").write(&dir)?;
        Ok((model, parts))
    })?;

    let splits = timings.time("eval", || {
        let mut splits = BTreeMap::new();
        for s in Split::ALL {
            splits.insert(s, model.evaluate(parts.get(s), set.n_classes())?);
        }
        Ok(splits)
    })?;
    let counts = assignment.counts();
    let report = RunReport {
        tool: TOOL.to_string(),
        version: VERSION.to_string(),
        config_hash: cfg.hash(),
        config: cfg.clone(),
        class_names: set.class_names().to_vec(),
        split_counts: Split::ALL.iter().map(|&s| (s, counts[s as usize])).collect(),
        splits,
    };
    write_json(&out.join("report.json"), &report)?;
    write_json(&out.join("timings.json"), &timings)?;
    Ok((report, timings))
}
