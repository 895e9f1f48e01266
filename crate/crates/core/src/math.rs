//! Vector and scalar math: cosine similarity, pairwise similarity, entropy.

use crate::error::{Error, Result};
use crate::types::{EmbeddingMatrix, SimilarityMatrix};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity of two non-zero vectors of equal dimension.
///
/// Both inputs are normalized before the dot product and the result is
/// clamped to [-1, 1]; bitwise-equal inputs give exactly 1.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let na = norm(a);
    if na == 0.0 || !na.is_finite() {
        return Err(Error::ZeroVector(0));
    }
    let nb = norm(b);
    if nb == 0.0 || !nb.is_finite() {
        return Err(Error::ZeroVector(1));
    }
    if a == b {
        return Ok(1.0);
    }
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x / na) * (y / nb)).sum();
    Ok(s.clamp(-1.0, 1.0))
}

/// Cosine similarity of every pair of rows.
///
/// Rows are normalized once; each unordered pair is evaluated exactly once
/// and mirrored.
pub fn pairwise_similarity(em: &EmbeddingMatrix) -> SimilarityMatrix {
    let unit = em.normalized();
    pairwise_with(&unit, |a, b| if a == b { 1.0 } else { dot(a, b) })
}

/// Fill a similarity matrix by calling `kernel` once per unordered pair
/// `(i, j)` with `i < j`.
pub fn pairwise_with<F>(em: &EmbeddingMatrix, mut kernel: F) -> SimilarityMatrix
where
    F: FnMut(&[f64], &[f64]) -> f64,
{
    let p = em.rows();
    let mut upper = vec![0.0; p * p];
    for i in 0..p {
        let a = em.row(i);
        for j in i + 1..p {
            upper[i * p + j] = kernel(a, em.row(j));
        }
    }
    SimilarityMatrix::from_upper(p, |i, j| upper[i * p + j])
}

/// Shannon entropy in nats, `-Σ p ln p` with `0 ln 0 = 0`.
///
/// The input need not sum to one.
pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    let mut h = 0.0;
    for (index, &value) in p.iter().enumerate() {
        if value < 0.0 || value.is_nan() {
            return Err(Error::NegativeProbability { index, value });
        }
        if value > 0.0 {
            h -= value * value.ln();
        }
    }
    // -x ln x is negative only for x > 1, which a (sub)probability vector never has.
    Ok(h.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cosine_examples() {
        assert_eq!(
            cosine_similarity(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap(),
            0.0
        );
        assert_eq!(cosine_similarity(&[2.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        let expected = 0.5f64.sqrt();
        let got = cosine_similarity(&[1.0, 1.0, 0.0], &[1.0, 0.0, 0.0]).unwrap();
        assert!((got - expected).abs() < 1e-15);
    }

    #[test]
    fn cosine_errors() {
        assert!(matches!(
            cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]),
            Err(Error::ZeroVector(0))
        ));
        assert!(matches!(
            cosine_similarity(&[1.0, 0.0], &[0.0, 0.0]),
            Err(Error::ZeroVector(1))
        ));
        assert!(matches!(
            cosine_similarity(&[1.0, 0.0], &[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                actual: 1
            })
        ));
    }

    #[test]
    fn pairwise_basis_and_singleton() {
        let em = EmbeddingMatrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let sm = pairwise_similarity(&em);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(sm.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
        let one = EmbeddingMatrix::from_rows(&[vec![0.3, -0.2]]).unwrap();
        let sm = pairwise_similarity(&one);
        assert_eq!(sm.size(), 1);
        assert_eq!(sm.get(0, 0), 1.0);
    }

    #[test]
    fn pairwise_duplicated_rows_are_exactly_one() {
        let row = vec![0.1, 0.7, -0.3, 0.29];
        let em = EmbeddingMatrix::from_rows(&[row.clone(), vec![1.0, 0.0, 0.0, 0.0], row]).unwrap();
        let sm = pairwise_similarity(&em);
        assert_eq!(sm.get(0, 2), 1.0);
        assert_eq!(sm.get(2, 0), 1.0);
    }

    #[test]
    fn pairwise_evaluates_each_pair_once() {
        for p in 1..12usize {
            let rows: Vec<Vec<f64>> = (0..p).map(|i| vec![1.0, i as f64]).collect();
            let em = EmbeddingMatrix::from_rows(&rows).unwrap();
            let mut calls = 0usize;
            pairwise_with(&em, |a, b| {
                calls += 1;
                dot(a, b)
            });
            assert_eq!(calls, p * (p - 1) / 2);
        }
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(shannon_entropy(&[1.0]).unwrap(), 0.0);
        assert!((shannon_entropy(&[0.5, 0.5]).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        // -(0.5 ln 0.5 + 0.3333 ln 0.3333 + 0.1667 ln 0.1667), summed term by term offline
        let h = shannon_entropy(&[0.5, 0.3333, 0.1667]).unwrap();
        assert!((h - 1.011427364613537).abs() < 1e-12);
        assert_eq!(shannon_entropy(&[0.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(
            shannon_entropy(&[0.5, -0.1]),
            Err(Error::NegativeProbability { index: 1, .. })
        ));
    }

    #[test]
    fn entropy_bounded_by_ln_k() {
        for k in 1..=10usize {
            let uniform = vec![1.0 / k as f64; k];
            let h = shannon_entropy(&uniform).unwrap();
            assert!((h - (k as f64).ln()).abs() < 1e-12);
        }
    }

    fn nonzero_vec(dim: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, dim).prop_filter("non-zero", |v| norm(v) > 1e-3)
    }

    proptest! {
        #[test]
        fn cosine_self_is_one(a in nonzero_vec(8)) {
            prop_assert!((cosine_similarity(&a, &a).unwrap() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn cosine_scale_invariant(a in nonzero_vec(6), b in nonzero_vec(6), c in 1e-3f64..1e3) {
            let scaled: Vec<f64> = a.iter().map(|x| x * c).collect();
            let lhs = cosine_similarity(&scaled, &b).unwrap();
            let rhs = cosine_similarity(&a, &b).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }

        #[test]
        fn pairwise_is_symmetric_and_deterministic(
            rows in prop::collection::vec(nonzero_vec(5), 1..10)
        ) {
            let em = EmbeddingMatrix::from_rows(&rows).unwrap();
            let a = pairwise_similarity(&em);
            let b = pairwise_similarity(&em);
            prop_assert_eq!(&a, &b);
            for i in 0..a.size() {
                prop_assert_eq!(a.get(i, i), 1.0);
                for j in 0..a.size() {
                    prop_assert_eq!(a.get(i, j).to_bits(), a.get(j, i).to_bits());
                    prop_assert!((-1.0..=1.0).contains(&a.get(i, j)));
                }
            }
        }

        #[test]
        fn entropy_at_most_ln_k(weights in prop::collection::vec(0.0f64..1.0, 1..=10)) {
            let total: f64 = weights.iter().sum();
            prop_assume!(total > 1e-6);
            let p: Vec<f64> = weights.iter().map(|w| w / total).collect();
            let h = shannon_entropy(&p).unwrap();
            prop_assert!(h >= 0.0);
            prop_assert!(h <= (p.len() as f64).ln() + 1e-12);
            let spread = p.iter().cloned().fold(f64::MIN, f64::max)
                - p.iter().cloned().fold(f64::MAX, f64::min);
            if spread > 1e-3 {
                prop_assert!(h < (p.len() as f64).ln() - 1e-12);
            }
        }
    }
}
