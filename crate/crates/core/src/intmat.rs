//! Exact integer matrix helpers (determinants of class matrices).

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// Determinant of a square integer matrix by fraction-free (Bareiss)
/// elimination.
pub fn det(m: &[Vec<i64>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|row| {
            assert_eq!(row.len(), n, "determinant of non-square matrix");
            row.iter().map(|&x| BigInt::from(x)).collect()
        })
        .collect();
    let mut prev = BigInt::one();
    let mut sign = 1i32;
    for k in 0..n {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    if sign < 0 {
        -a[n - 1][n - 1].clone()
    } else {
        a[n - 1][n - 1].clone()
    }
}

/// Whether an integer matrix is square with determinant of absolute value 1.
pub fn is_unimodular(m: &[Vec<i64>]) -> bool {
    if m.iter().any(|r| r.len() != m.len()) {
        return false;
    }
    det(m).abs() == BigInt::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_determinants() {
        assert_eq!(det(&[vec![2]]), BigInt::from(2));
        assert_eq!(det(&[vec![1, 2], vec![3, 4]]), BigInt::from(-2));
        assert_eq!(
            det(&[vec![1, 0, 0], vec![5, 1, 0], vec![7, -2, 1]]),
            BigInt::one()
        );
        assert_eq!(det(&[vec![0, 1], vec![1, 0]]), BigInt::from(-1));
        assert_eq!(det(&[vec![1, 1], vec![1, 1]]), BigInt::zero());
    }

    #[test]
    fn unimodularity() {
        assert!(is_unimodular(&[vec![1, 1], vec![0, 1]]));
        assert!(!is_unimodular(&[vec![2, 0], vec![0, 1]]));
    }
}
