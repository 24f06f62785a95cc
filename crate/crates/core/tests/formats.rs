use std::fs;
use std::path::Path;

use eegimg::trial::{encode_trial_blob, generate_synthetic, ingest, write_trialset, SyntheticSpec, Trial};
use eegimg::Error;
use ndarray::Array2;

fn trial(subject: u16, stimulus: u32, label: u16, channels: usize, samples: usize) -> Trial {
    Trial {
        subject_id: subject,
        stimulus_id: stimulus,
        class_label: label,
        sample_rate: 1000.0,
        data: Array2::from_shape_fn((channels, samples), |(c, t)| (c * 10 + t) as f64 * 0.25),
    }
}

fn write_manifest(dir: &Path, blobs: &[Vec<u8>], channels: u32, samples: u32) -> std::path::PathBuf {
    let mut names = Vec::new();
    for (i, b) in blobs.iter().enumerate() {
        let name = format!("t{i}.eegt");
        fs::write(dir.join(&name), b).unwrap();
        names.push(name);
    }
    let manifest = serde_json::json!({
        "band_tag": "raw",
        "class_names": ["a", "b"],
        "n_subjects": 2,
        "n_channels": channels,
        "n_samples": samples,
        "trials": names,
    });
    let path = dir.join("manifest.json");
    fs::write(&path, manifest.to_string()).unwrap();
    path
}

#[test]
fn ingests_two_trials_in_manifest_order() {
    let dir = tempfile::tempdir().unwrap();
    let blobs = [encode_trial_blob(&trial(1, 7, 0, 4, 16)), encode_trial_blob(&trial(2, 9, 1, 4, 16))];
    let set = ingest(&write_manifest(dir.path(), &blobs, 4, 16)).unwrap();
    assert_eq!(set.len(), 2);
    assert_eq!(set.shape(), Some((4, 16)));
    assert_eq!(set.trials()[0].stimulus_id, 7);
    assert_eq!(set.trials()[1].class_label, 1);
    assert_eq!(set.trials()[1].data, trial(2, 9, 1, 4, 16).data);
}

#[test]
fn wrong_magic_is_a_format_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut blob = encode_trial_blob(&trial(1, 0, 0, 2, 4));
    blob[..4].copy_from_slice(b"NOPE");
    let err = ingest(&write_manifest(dir.path(), &[blob], 2, 4)).unwrap_err();
    assert!(matches!(err, Error::Format { .. }), "{err}");
}

#[test]
fn channel_mismatch_names_the_offending_file() {
    let dir = tempfile::tempdir().unwrap();
    let blobs = [encode_trial_blob(&trial(1, 0, 0, 3, 8)), encode_trial_blob(&trial(2, 0, 0, 2, 8))];
    let err = ingest(&write_manifest(dir.path(), &blobs, 3, 8)).unwrap_err();
    assert!(err.to_string().contains("t1.eegt"), "{err}");
}

#[test]
fn nan_sample_reports_trial_and_channel() {
    let dir = tempfile::tempdir().unwrap();
    let mut bad = trial(2, 0, 1, 3, 8);
    bad.data[[2, 5]] = f64::NAN;
    let blobs = [encode_trial_blob(&trial(1, 0, 0, 3, 8)), encode_trial_blob(&bad)];
    let err = ingest(&write_manifest(dir.path(), &blobs, 3, 8)).unwrap_err();
    assert!(matches!(err, Error::NonFinite { trial: 1, channel: 2 }), "{err}");
}

#[test]
fn truncated_blob_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut blob = encode_trial_blob(&trial(1, 0, 0, 2, 4));
    blob.truncate(blob.len() - 3);
    assert!(ingest(&write_manifest(dir.path(), &[blob], 2, 4)).is_err());
}

#[test]
fn written_trialset_ingests_bit_exact() {
    let spec = SyntheticSpec { n_classes: 3, n_stimuli_per_class: 2, n_subjects: 2, n_channels: 5, n_samples: 12, ..SyntheticSpec::default() };
    let set = generate_synthetic(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = write_trialset(&set, dir.path(), Some(serde_json::json!({"seed": 0}))).unwrap();
    let back = ingest(&path).unwrap();
    assert_eq!(back.len(), set.len());
    assert_eq!(back.class_names(), set.class_names());
    for (a, b) in set.trials().iter().zip(back.trials()) {
        assert_eq!(a, b);
    }
}
