use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_samples: usize,
    pub accuracy: f64,
    /// `None` for classes without test samples.
    pub per_class_accuracy: Vec<Option<f64>>,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<u64>>,
}

/// Evaluates with the class count inferred from the largest label seen.
pub fn evaluate(predicted: &[u16], truth: &[u16]) -> Result<EvalReport> {
    let n_classes = predicted
        .iter()
        .chain(truth)
        .max()
        .map_or(0, |&m| usize::from(m) + 1);
    evaluate_with_classes(predicted, truth, n_classes)
}

pub fn evaluate_with_classes(predicted: &[u16], truth: &[u16], n_classes: usize) -> Result<EvalReport> {
    if predicted.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::invalid("cannot evaluate zero samples"));
    }
    let mut confusion = vec![vec![0u64; n_classes]; n_classes];
    for (&p, &t) in predicted.iter().zip(truth) {
        let (p, t) = (usize::from(p), usize::from(t));
        if p >= n_classes || t >= n_classes {
            return Err(Error::invalid(format!("label outside 0..{n_classes}")));
        }
        confusion[t][p] += 1;
    }
    let correct: u64 = (0..n_classes).map(|i| confusion[i][i]).sum();
    let per_class_accuracy = confusion
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let total: u64 = row.iter().sum();
            (total > 0).then(|| row[i] as f64 / total as f64)
        })
        .collect();
    Ok(EvalReport {
        n_samples: truth.len(),
        accuracy: correct as f64 / truth.len() as f64,
        per_class_accuracy,
        confusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let r = evaluate(&[0, 1, 2, 1], &[0, 1, 2, 1]).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.confusion, vec![vec![1, 0, 0], vec![0, 2, 0], vec![0, 0, 1]]);
    }

    #[test]
    fn hand_counted() {
        let r = evaluate(&[0, 1, 1, 1], &[0, 0, 1, 1]).unwrap();
        assert_eq!(r.accuracy, 0.75);
        assert_eq!(r.confusion, vec![vec![1, 1], vec![0, 2]]);
        assert_eq!(r.per_class_accuracy, vec![Some(0.5), Some(1.0)]);
    }

    #[test]
    fn empty_and_mismatch() {
        assert!(evaluate(&[], &[]).is_err());
        assert!(evaluate(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn absent_class_has_no_accuracy() {
        let r = evaluate_with_classes(&[0, 0], &[0, 0], 3).unwrap();
        assert_eq!(r.per_class_accuracy, vec![Some(1.0), None, None]);
    }
}
