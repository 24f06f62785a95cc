use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use eegimg::split::{apply_split, Split, SplitAssignment};
use eegimg::texture::{export_features, import_features, FeatureFormat};
use eegimg::trial::{generate_synthetic, ingest, synthetic_stimulus_features, write_trialset, SyntheticSpec};

use crate::config::{config_hash, PipelineConfig};
use crate::error::{CliError, Result};
use crate::model::TrainedModel;
use crate::pipeline::run_pipeline;
use crate::provenance::{create_dir, write_json, StageManifest};
use crate::stages::{encode_stage, features_stage, ingest_stage, split_stage, Context};

#[derive(Debug, Parser)]
#[command(name = "eegimg", version, about = "Encode EEG trials as images, extract texture features, fuse and classify")]
pub struct Cli {
    /// Pipeline config (JSON). Flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for the encode and features stages.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub jobs: Option<u64>,
    /// Seed for the split, the classifier and the synthetic generator.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded synthetic trial set (blobs and manifest) to --out.
    Synth(SynthArgs),
    /// Validate, crop and z-score a trial set into <out>/ingest.
    Ingest {
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Encode trials as image tensors into <out>/encode.
    Encode {
        /// Trial set manifest; defaults to the config's.
        #[arg(long)]
        trials: Option<PathBuf>,
        /// Also write channel 0 of each tensor as PNG.
        #[arg(long)]
        png: bool,
    },
    /// Extract texture features from an encode directory into <out>/features.
    Features {
        #[arg(long)]
        tensors: PathBuf,
    },
    /// Assign stimuli to train/validation/test into <out>/split.
    Split {
        #[arg(long)]
        trials: Option<PathBuf>,
    },
    /// Fit the scaler and classifier on the training split into <out>/train.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        split: PathBuf,
        /// Image features aligned with --features, for regression fusion.
        #[arg(long)]
        targets: Option<PathBuf>,
    },
    /// Score a trained model on every split into <out>/eval.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        split: PathBuf,
    },
    /// Run every stage and write <out>/report.json.
    Pipeline {
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
}

#[derive(Debug, clap::Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    pub classes: u64,
    /// Stimuli per class.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub stimuli: u64,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..=u64::from(u16::MAX)))]
    pub subjects: u64,
    #[arg(long, default_value_t = 128, value_parser = clap::value_parser!(u64).range(1..))]
    pub channels: u64,
    #[arg(long, default_value_t = 440, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    /// Amplitude of the class pattern relative to the noise.
    #[arg(long, default_value_t = 2.0)]
    pub separation: f64,
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,
    /// Also write per-stimulus image features of this width.
    #[arg(long)]
    pub image_dim: Option<usize>,
    #[arg(long, default_value_t = 2.0)]
    pub image_separation: f64,
}

fn require(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{} does not exist", path.display())))
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    Ok(cfg)
}

fn trials_path(flag: &Option<PathBuf>, cfg: &PipelineConfig) -> Result<PathBuf> {
    let path = flag
        .clone()
        .or_else(|| cfg.manifest.clone())
        .ok_or_else(|| CliError::Config("no trial manifest given".into()))?;
    require(&path)?;
    Ok(path)
}

pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(&cli)?;
    let jobs = cli.jobs.unwrap_or(1) as usize;
    let out = cli.out.clone();
    match &cli.command {
        Command::Synth(args) => synth(args, cli.seed.unwrap_or(0), &out),
        Command::Pipeline { manifest } => {
            if let Some(m) = manifest {
                cfg.manifest = Some(m.clone());
            }
            let (report, _) = run_pipeline(cfg, &out, jobs)?;
            for (split, r) in &report.splits {
                if let Some(r) = r {
                    println!("{:<10} n={:<6} accuracy={:.4}", split.name(), r.n_samples, r.accuracy);
                }
            }
            println!("wrote {}", out.join("report.json").display());
            Ok(())
        }
        Command::Ingest { manifest } => {
            let manifest = trials_path(manifest, &cfg)?;
            cfg.validate()?;
            let set = ingest_stage(&Context::new(cfg, out.clone(), jobs), &manifest)?;
            println!("ingested {} trials into {}", set.len(), out.join("ingest").display());
            Ok(())
        }
        Command::Encode { trials, png } => {
            let manifest = trials_path(trials, &cfg)?;
            cfg.png |= *png;
            cfg.validate()?;
            let set = ingest(&manifest)?;
            let dir = encode_stage(&Context::new(cfg, out, jobs), &set, &manifest)?;
            println!("encoded {} trials into {}", set.len(), dir.display());
            Ok(())
        }
        Command::Features { tensors } => {
            require(tensors)?;
            let m = features_stage(&Context::new(cfg, out.clone(), jobs), tensors)?;
            println!("{} x {} features into {}", m.n_rows(), m.n_features(), out.join("features").display());
            Ok(())
        }
        Command::Split { trials } => {
            let manifest = trials_path(trials, &cfg)?;
            cfg.validate()?;
            let set = ingest(&manifest)?;
            let a = split_stage(&Context::new(cfg, out.clone(), jobs), &set, &manifest)?;
            let [tr, va, te] = a.counts();
            println!("stimuli train={tr} validation={va} test={te}");
            Ok(())
        }
        Command::Train { features, split, targets } => train(cfg, &out, features, split, targets.as_deref()),
        Command::Eval { model, features, split } => eval(cfg, &out, model, features, split),
    }
}

fn synth(args: &SynthArgs, seed: u64, out: &Path) -> Result<()> {
    let spec = SyntheticSpec {
        n_classes: args.classes as usize,
        n_stimuli_per_class: args.stimuli as usize,
        n_subjects: args.subjects as usize,
        n_channels: args.channels as usize,
        n_samples: args.samples as usize,
        class_separation: args.separation,
        noise_std: args.noise,
        seed,
    };
    spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let set = generate_synthetic(&spec)?;
    create_dir(out)?;
    let hash = config_hash(&spec);
    let provenance = serde_json::json!({ "generator": "synthetic", "spec": spec, "config_hash": hash });
    write_trialset(&set, out, Some(provenance))?;
    let mut manifest = StageManifest::new("synth", hash, Some(seed)).artifact("manifest.json").artifact("blobs");
    if let Some(dim) = args.image_dim {
        let image = synthetic_stimulus_features(&spec, dim, args.image_separation)?;
        export_features(&image, &out.join("image_features.csv"), FeatureFormat::Csv)?;
        manifest = manifest.artifact("image_features.csv");
    }
    manifest.write(out)?;
    println!("wrote {} trials to {}", set.len(), out.display());
    Ok(())
}

fn train(cfg: PipelineConfig, out: &Path, features: &Path, split: &Path, targets: Option<&Path>) -> Result<()> {
    require(features)?;
    require(split)?;
    if let Some(t) = targets {
        require(t)?;
    }
    let assignment = SplitAssignment::load(split)?;
    let m = import_features(features)?;
    let train_targets = match targets {
        Some(t) => Some(apply_split(&assignment, &import_features(t)?)?.train),
        None => None,
    };
    let parts = apply_split(&assignment, &m)?;
    let ctx = Context::new(cfg, out.to_path_buf(), 1);
    let model = TrainedModel::fit(&ctx, &parts.train, train_targets.as_ref())?;
    let dir = ctx.stage_dir("train")?;
    model.save(&dir.join("model.json"))?;
    let mut manifest = ctx.manifest("train", Some(assignment.seed)).input(features).input(split);
    if let Some(t) = targets {
        manifest = manifest.input(t);
    }
    manifest.artifact("model.json").write(&dir)?;
    println!("trained on {} rows into {}", parts.train.n_rows(), dir.display());
    Ok(())
}

fn eval(cfg: PipelineConfig, out: &Path, model: &Path, features: &Path, split: &Path) -> Result<()> {
    for p in [model, features, split] {
        require(p)?;
    }
    let trained = TrainedModel::load(model)?;
    let assignment = SplitAssignment::load(split)?;
    let m = import_features(features)?;
    let n_classes = m.n_classes();
    let parts = apply_split(&assignment, &m)?;
    let mut reports = BTreeMap::new();
    for s in Split::ALL {
        let r = trained.evaluate(parts.get(s), n_classes)?;
        if let Some(r) = &r {
            println!("{:<10} n={:<6} accuracy={:.4}", s.name(), r.n_samples, r.accuracy);
        }
        reports.insert(s, r);
    }
    let ctx = Context::new(cfg, out.to_path_buf(), 1);
    let dir = ctx.stage_dir("eval")?;
    write_json(&dir.join("report.json"), &reports)?;
    ctx.manifest("eval", Some(assignment.seed))
        .input(model)
        .input(features)
        .input(split)
        .artifact("report.json")
        .write(&dir)?;
    Ok(())
}

/// Parses `std::env::args`, runs, and returns the process exit code.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("eegimg: {e}");
            e.exit_code()
        }
    }
}
