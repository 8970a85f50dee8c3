/// Mean, sample standard deviation, min and max of a non-empty slice.
///
/// Deviations are accumulated relative to the first sample, so identical
/// inputs give exactly that value and a standard deviation of zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

pub fn summarize(values: &[f64]) -> Summary {
    assert!(!values.is_empty(), "summary of an empty sample");
    let count = values.len() as f64;
    let pivot = values[0];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for v in values {
        let d = v - pivot;
        sum += d;
        sum_sq += d * d;
    }
    let std = if values.len() > 1 {
        ((sum_sq - sum * sum / count) / (count - 1.0)).max(0.0).sqrt()
    } else {
        0.0
    };
    Summary {
        mean: pivot + sum / count,
        std,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_values_have_no_spread() {
        let s = summarize(&[0.1 + 0.2; 7]);
        assert_eq!(s.std, 0.0);
        assert_eq!(s.mean, 0.1 + 0.2);
    }

    #[test]
    fn matches_textbook_formula() {
        let s = summarize(&[1.0, 2.0, 4.0]);
        assert!((s.mean - 7.0 / 3.0).abs() < 1e-15);
        assert!((s.std - (7.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!((s.min, s.max), (1.0, 4.0));
        assert_eq!(summarize(&[3.0]).std, 0.0);
    }
}
