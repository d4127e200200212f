use super::AnalysisError;

/// Per-class F1 in `[0, 1]`; a class with no gold and no predicted
/// instances scores 0.
pub fn per_class_f1(predictions: &[usize], golds: &[usize], num_classes: usize) -> Result<Vec<f64>, AnalysisError> {
    if predictions.is_empty() {
        return Err(AnalysisError::Empty("no predictions to score".into()));
    }
    if predictions.len() != golds.len() {
        return Err(AnalysisError::Invalid(format!(
            "{} predictions for {} golds",
            predictions.len(),
            golds.len()
        )));
    }
    let mut tp = vec![0usize; num_classes];
    let mut pred = vec![0usize; num_classes];
    let mut gold = vec![0usize; num_classes];
    for (&p, &g) in predictions.iter().zip(golds) {
        if p >= num_classes || g >= num_classes {
            return Err(AnalysisError::Invalid(format!(
                "label {} outside {num_classes} classes",
                p.max(g)
            )));
        }
        pred[p] += 1;
        gold[g] += 1;
        if p == g {
            tp[p] += 1;
        }
    }
    Ok((0..num_classes)
        .map(|c| {
            let denom = pred[c] + gold[c];
            if denom == 0 {
                0.0
            } else {
                2.0 * tp[c] as f64 / denom as f64
            }
        })
        .collect())
}

/// Unweighted mean of per-class F1 over the whole label space, in percent.
pub fn macro_f1(predictions: &[usize], golds: &[usize], num_classes: usize) -> Result<f64, AnalysisError> {
    if num_classes == 0 {
        return Err(AnalysisError::Empty("empty label space".into()));
    }
    let f = per_class_f1(predictions, golds, num_classes)?;
    Ok(100.0 * f.iter().sum::<f64>() / num_classes as f64)
}
