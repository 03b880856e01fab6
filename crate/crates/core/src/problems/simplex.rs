use crate::error::{Error, Result};

/// Euclidean projection onto the probability simplex `{v ≥ 0, Σv = 1}`
/// by sorting and thresholding.
pub fn project_simplex(w: &[f64]) -> Result<Vec<f64>> {
    if w.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted = w.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));

    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            tau = candidate;
        } else {
            break;
        }
    }
    Ok(w.iter().map(|&x| (x - tau).max(0.0)).collect())
}
