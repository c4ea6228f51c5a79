//! Soft cosine measure.

use crate::vsm::{SimilarityMatrix, WeightedBow};

/// SCM score with a flag telling whether either side had no mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScmScore {
    pub value: f64,
    pub empty: bool,
}

/// `xᵀSy / (√(xᵀSx)·√(yᵀSy))`.
///
/// The denominator is evaluated as `√(xᵀSx · yᵀSy)`, so `x == y` gives
/// exactly 1. An all-zero side scores 0 with `empty` set. The value stays in
/// `[0, 1]` when `S` is positive semidefinite; a sparsified `S` need not be,
/// and the raw quotient is returned unclamped.
pub fn scm(x: &WeightedBow, y: &WeightedBow, s: &SimilarityMatrix) -> ScmScore {
    if x.is_zero() || y.is_zero() {
        return ScmScore {
            value: 0.0,
            empty: true,
        };
    }
    let xy = s.inner(x, y);
    let xx = s.inner(x, x);
    let yy = s.inner(y, y);
    ScmScore {
        value: xy / (xx * yy).sqrt(),
        empty: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vsm::WeightedBow;
    use proptest::prelude::*;

    fn bow(w: &[f64]) -> WeightedBow {
        WeightedBow::from_entries(w.iter().copied().enumerate().filter(|(_, v)| *v > 0.0)).unwrap()
    }

    #[test]
    fn self_similarity() {
        let s = SimilarityMatrix::from_pairs(3, [(0, 1, 0.4), (1, 2, 0.7)]).unwrap();
        let x = bow(&[1.0, 2.0, 0.3]);
        assert_eq!(scm(&x, &x, &s).value, 1.0);
    }

    #[test]
    fn hard_cosine_disjoint() {
        let s = SimilarityMatrix::identity(4);
        assert_eq!(scm(&bow(&[1.0, 1.0, 0.0, 0.0]), &bow(&[0.0, 0.0, 2.0, 1.0]), &s).value, 0.0);
    }

    #[test]
    fn dense_three_terms() {
        let dense = [[1.0, 0.5, 0.2], [0.5, 1.0, 0.9], [0.2, 0.9, 1.0]];
        let s = SimilarityMatrix::from_pairs(3, [(0, 1, 0.5), (0, 2, 0.2), (1, 2, 0.9)]).unwrap();
        let (xv, yv) = ([1.0, 0.0, 2.0], [0.0, 3.0, 1.0]);
        let q = |a: &[f64; 3], b: &[f64; 3]| -> f64 {
            (0..3).map(|i| (0..3).map(|j| a[i] * dense[i][j] * b[j]).sum::<f64>()).sum()
        };
        let want = q(&xv, &yv) / (q(&xv, &xv).sqrt() * q(&yv, &yv).sqrt());
        let got = scm(&bow(&xv), &bow(&yv), &s).value;
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn empty_side_flagged() {
        let s = SimilarityMatrix::identity(2);
        let r = scm(&WeightedBow::default(), &bow(&[1.0, 0.0]), &s);
        assert_eq!(r, ScmScore { value: 0.0, empty: true });
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(
            x in prop::collection::vec(0.0f64..3.0, 4),
            y in prop::collection::vec(0.0f64..3.0, 4),
        ) {
            // exponent-2 matrix from nonnegative vectors is PSD
            let e = [[1.0, 0.2, 0.0], [0.3, 1.0, 0.1], [0.0, 0.5, 1.0], [0.6, 0.6, 0.6]];
            let cos = |a: &[f64; 3], b: &[f64; 3]| {
                let d: f64 = a.iter().zip(b).map(|(p, q)| p * q).sum();
                let n = |v: &[f64; 3]| v.iter().map(|p| p * p).sum::<f64>().sqrt();
                d / (n(a) * n(b))
            };
            let mut pairs = Vec::new();
            for i in 0..4 {
                for j in i + 1..4 {
                    pairs.push((i, j, cos(&e[i], &e[j]).powi(2)));
                }
            }
            let s = SimilarityMatrix::from_pairs(4, pairs).unwrap();
            let (bx, by) = (bow(&x), bow(&y));
            let a = scm(&bx, &by, &s);
            let b = scm(&by, &bx, &s);
            prop_assert!((a.value - b.value).abs() < 1e-12);
            prop_assert!(a.value >= 0.0 && a.value <= 1.0 + 1e-12);
        }
    }
}
