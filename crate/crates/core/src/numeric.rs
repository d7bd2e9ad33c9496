//! Log-domain helpers.

/// `ln Σ exp(t)`; `-inf` for an empty sequence.
pub(crate) fn log_sum_exp<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let v: Vec<f64> = terms.into_iter().collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + v.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// Normalized `exp(t)` over the given log-weights (`-inf` entries map to 0).
pub(crate) fn softmax(logw: &[f64]) -> Vec<f64> {
    let m = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logw
        .iter()
        .map(|&t| if t == f64::NEG_INFINITY { 0.0 } else { (t - m).exp() })
        .collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|v| v / z).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_for_large_magnitudes() {
        let v = log_sum_exp([1000.0, 1000.0]);
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(std::iter::empty()), f64::NEG_INFINITY);
        let s = softmax(&[-800.0, -800.0, f64::NEG_INFINITY]);
        assert_eq!(s, vec![0.5, 0.5, 0.0]);
    }
}
