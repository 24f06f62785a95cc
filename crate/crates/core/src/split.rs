//! Stratified train/validation/test assignment over stimulus ids.
//!
//! All trials of one stimulus land in the same split. Within each class the
//! split sizes follow largest-remainder apportionment of the ratios, with
//! remainder ties resolved in the order train, validation, test; which
//! stimuli fill each quota is decided by a seeded shuffle.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::texture::FeatureMatrix;
use crate::trial::TrialSet;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Validation, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub ratios: [f64; 3],
    pub seed: u64,
    pub assignment: BTreeMap<u32, Split>,
}

impl SplitAssignment {
    pub fn get(&self, stimulus_id: u32) -> Option<Split> {
        self.assignment.get(&stimulus_id).copied()
    }

    /// Number of stimuli in each split, in train/validation/test order.
    pub fn counts(&self) -> [usize; 3] {
        let mut out = [0; 3];
        for s in self.assignment.values() {
            out[*s as usize] += 1;
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("assignment serialises");
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
    }
}

pub fn validate_ratios(ratios: [f64; 3]) -> Result<()> {
    if ratios.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::invalid(format!("split ratios must be nonnegative, got {ratios:?}")));
    }
    if (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("split ratios must sum to 1, got {ratios:?}")));
    }
    Ok(())
}

/// Largest-remainder apportionment of `n` items; ties in the fractional
/// remainder go to the earlier split.
pub fn apportion(n: usize, ratios: [f64; 3]) -> [usize; 3] {
    let quotas = ratios.map(|r| r * n as f64);
    // small epsilon absorbs representation error such as 0.7 * 50
    let mut counts = quotas.map(|q| (q + 1e-9).floor() as usize);
    let remainders: [f64; 3] = std::array::from_fn(|i| (quotas[i] - counts[i] as f64).max(0.0));
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        let (ra, rb) = (remainders[a], remainders[b]);
        if (ra - rb).abs() <= 1e-9 {
            a.cmp(&b)
        } else {
            rb.total_cmp(&ra)
        }
    });
    let assigned: usize = counts.iter().sum();
    for &i in order.iter().cycle().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Splits the stimuli of `s`. Every class named by the set must have at
/// least one stimulus.
pub fn stratified_group_split(s: &TrialSet, ratios: [f64; 3], seed: u64) -> Result<SplitAssignment> {
    stratified_split_stimuli(
        s.trials().iter().map(|t| (t.stimulus_id, t.class_label)),
        Some(s.n_classes()),
        ratios,
        seed,
    )
}

/// Splits `(stimulus_id, label)` pairs; repeated pairs are collapsed.
/// With `n_classes` given, every class in `0..n_classes` must appear.
pub fn stratified_split_stimuli(
    pairs: impl IntoIterator<Item = (u32, u16)>,
    n_classes: Option<usize>,
    ratios: [f64; 3],
    seed: u64,
) -> Result<SplitAssignment> {
    validate_ratios(ratios)?;
    let mut label_of: HashMap<u32, u16> = HashMap::new();
    for (stimulus, label) in pairs {
        if let Some(prev) = label_of.insert(stimulus, label) {
            if prev != label {
                return Err(Error::invalid(format!(
                    "stimulus {stimulus} carries labels {prev} and {label}"
                )));
            }
        }
    }
    let mut by_class: BTreeMap<u16, Vec<u32>> = BTreeMap::new();
    for (&stimulus, &label) in &label_of {
        by_class.entry(label).or_default().push(stimulus);
    }
    if let Some(c) = n_classes {
        if let Some(missing) = (0..c).find(|&k| !by_class.contains_key(&(k as u16))) {
            return Err(Error::invalid(format!("class {missing} has no stimuli")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = BTreeMap::new();
    for stimuli in by_class.values_mut() {
        stimuli.sort_unstable();
        stimuli.shuffle(&mut rng);
        let counts = apportion(stimuli.len(), ratios);
        let mut it = stimuli.iter();
        for (split, count) in Split::ALL.into_iter().zip(counts) {
            for &stimulus in it.by_ref().take(count) {
                assignment.insert(stimulus, split);
            }
        }
    }
    Ok(SplitAssignment {
        ratios,
        seed,
        assignment,
    })
}

/// Anything whose rows carry a stimulus id.
pub trait StimulusKeyed: Sized {
    fn stimulus_ids(&self) -> Vec<u32>;
    /// The rows at `indices`, in that order.
    fn subset(&self, indices: &[usize]) -> Self;
}

impl StimulusKeyed for FeatureMatrix {
    fn stimulus_ids(&self) -> Vec<u32> {
        self.sample_ids().to_vec()
    }

    fn subset(&self, indices: &[usize]) -> Self {
        self.select_rows(indices)
    }
}

impl StimulusKeyed for TrialSet {
    fn stimulus_ids(&self) -> Vec<u32> {
        self.trials().iter().map(|t| t.stimulus_id).collect()
    }

    fn subset(&self, indices: &[usize]) -> Self {
        let mut idx = indices.iter().copied().peekable();
        let mut pos = 0;
        self.filter(|_| {
            let keep = idx.peek() == Some(&pos);
            if keep {
                idx.next();
            }
            pos += 1;
            keep
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition<T> {
    pub train: T,
    pub validation: T,
    pub test: T,
}

impl<T> Partition<T> {
    pub fn get(&self, split: Split) -> &T {
        match split {
            Split::Train => &self.train,
            Split::Validation => &self.validation,
            Split::Test => &self.test,
        }
    }
}

/// Splits rows by their stimulus' assignment, preserving relative order.
pub fn apply_split<T: StimulusKeyed>(a: &SplitAssignment, m: &T) -> Result<Partition<T>> {
    let mut idx: [Vec<usize>; 3] = Default::default();
    for (row, id) in m.stimulus_ids().into_iter().enumerate() {
        let split = a
            .get(id)
            .ok_or_else(|| Error::invalid(format!("stimulus {id} (row {row}) is not in the split assignment")))?;
        idx[split as usize].push(row);
    }
    let [train, validation, test] = idx;
    Ok(Partition {
        train: m.subset(&train),
        validation: m.subset(&validation),
        test: m.subset(&test),
    })
}
