/// `log Σ exp(x_i)` with max-shift; `-inf` for an empty or all `-inf` input.
pub(crate) fn log_sum_exp(xs: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let s: f64 = xs.into_iter().map(|x| (x - max).exp()).sum();
    max + s.ln()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `log C(t, k)`; exact integer arithmetic up to `t = 64`.
pub(crate) fn log_binomial(t: u32, k: u32) -> f64 {
    assert!(k <= t);
    let k = k.min(t - k);
    if t <= 64 {
        let mut c: u128 = 1;
        for i in 0..u128::from(k) {
            c = c * (u128::from(t) - i) / (i + 1);
        }
        (c as f64).ln()
    } else {
        (0..k)
            .map(|i| (f64::from(t - i)).ln() - (f64::from(i + 1)).ln())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lse_matches_naive_and_survives_large_inputs() {
        let xs = [0.1, -2.0, 3.5];
        let naive = xs.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(xs) - naive).abs() < 1e-14);
        assert!((log_sum_exp([1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp([f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(Vec::<f64>::new()), f64::NEG_INFINITY);
    }

    #[test]
    fn binomials() {
        assert_eq!(log_binomial(5, 0), 0.0);
        assert!((log_binomial(5, 2) - 10f64.ln()).abs() < 1e-15);
        assert!((log_binomial(64, 32) - 1_832_624_140_942_590_534f64.ln()).abs() < 1e-12);
        // the two branches agree where both are valid
        let direct: f64 = (0..30).map(|i| f64::from(100 - i).ln() - f64::from(i + 1).ln()).sum();
        assert!((log_binomial(100, 30) - direct).abs() < 1e-12);
    }
}
