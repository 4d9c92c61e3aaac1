//! Distances between distributions and simple sampling statistics.

/// `1/2 * sum |p_i - q_i|`. Missing entries count as zero.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * zip_longest(p, q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// `max |p_i - q_i|`. Missing entries count as zero.
pub fn max_abs_diff(p: &[f64], q: &[f64]) -> f64 {
    zip_longest(p, q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn zip_longest<'a>(p: &'a [f64], q: &'a [f64]) -> impl Iterator<Item = (f64, f64)> + 'a {
    let n = p.len().max(q.len());
    (0..n).map(move |i| (p.get(i).copied().unwrap_or(0.0), q.get(i).copied().unwrap_or(0.0)))
}

/// Normalized histogram of sampled indices.
pub fn empirical(counts: &[u64]) -> Vec<f64> {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return vec![0.0; counts.len()];
    }
    counts.iter().map(|&c| c as f64 / n as f64).collect()
}

/// Pearson chi-square statistic of `counts` against `expected`
/// probabilities; cells with zero expected mass are skipped.
pub fn chi_square(counts: &[u64], expected: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    counts
        .iter()
        .zip(expected)
        .filter(|(_, &e)| e > 0.0)
        .map(|(&c, &e)| {
            let m = e * n as f64;
            (c as f64 - m).powi(2) / m
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_values() {
        assert_eq!(total_variation(&[1.0, 0.0], &[0.0, 1.0]), 1.0);
        assert_eq!(total_variation(&[0.5, 0.5], &[0.5]), 0.25);
        assert_eq!(max_abs_diff(&[0.1, 0.4], &[0.2, 0.2]), 0.2);
        assert_eq!(empirical(&[1, 3]), vec![0.25, 0.75]);
        assert_eq!(chi_square(&[50, 50], &[0.5, 0.5]), 0.0);
    }

    proptest! {
        #[test]
        fn tv_is_a_bounded_metric(a in prop::collection::vec(0.0f64..1.0, 1..8), b in prop::collection::vec(0.0f64..1.0, 1..8)) {
            let norm = |v: &Vec<f64>| { let s: f64 = v.iter().sum::<f64>().max(1e-9); v.iter().map(|x| x / s).collect::<Vec<_>>() };
            let (p, q) = (norm(&a), norm(&b));
            let d = total_variation(&p, &q);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&d));
            prop_assert!((d - total_variation(&q, &p)).abs() < 1e-15);
            prop_assert!(total_variation(&p, &p) == 0.0);
        }
    }
}
