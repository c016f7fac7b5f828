//! Max, min, mean and median of a sample.
//!
//! Counts are skewed (one long submission drags the mean far from the
//! typical one), so both mean and median are reported.

use num_traits::Float;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary<T: Float> {
    pub count: usize,
    pub max: T,
    pub min: T,
    pub mean: T,
    pub median: T,
}

impl<T: Float> Summary<T> {
    /// `None` for an empty sample or one containing NaN.
    pub fn of<I: IntoIterator<Item = T>>(values: I) -> Option<Self> {
        let mut v: Vec<T> = values.into_iter().collect();
        if v.is_empty() || v.iter().any(|x| x.is_nan()) {
            return None;
        }
        v.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
        let n = v.len();
        let count = T::from(n)?;
        let sum = v.iter().fold(T::zero(), |acc, &x| acc + x);
        let two = T::one() + T::one();
        let median = if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / two };
        Some(Summary {
            count: n,
            max: v[n - 1],
            min: v[0],
            mean: sum / count,
            median,
        })
    }

    pub fn map<U: Float>(self, f: impl Fn(T) -> U) -> Summary<U> {
        Summary {
            count: self.count,
            max: f(self.max),
            min: f(self.min),
            mean: f(self.mean),
            median: f(self.median),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_and_even_medians() {
        let s = Summary::of([3.0, 1.0, 2.0]).unwrap();
        assert_eq!((s.min, s.max, s.mean, s.median), (1.0, 3.0, 2.0, 2.0));
        let s = Summary::of([4.0f32, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!((s.median, s.mean), (2.5, 2.5));
    }

    #[test]
    fn empty_and_nan_have_no_summary() {
        assert!(Summary::<f64>::of([]).is_none());
        assert!(Summary::of([1.0, f64::NAN]).is_none());
    }
}
