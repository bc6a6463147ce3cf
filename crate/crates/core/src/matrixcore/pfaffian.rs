use alloc::vec::Vec;

use super::SkewMatrix;
use crate::error::{Error, Result};
use crate::logval::SignedLog;

/// Largest order accepted by [`pfaffian_naive`] (10395 matchings).
pub const NAIVE_MAX_ORDER: usize = 12;

/// Sum over perfect matchings, expanding along the first row.
pub fn pfaffian_naive(a: &SkewMatrix) -> Result<f64> {
    let n = a.order();
    if n > NAIVE_MAX_ORDER {
        return Err(Error::Size { order: n, cap: NAIVE_MAX_ORDER });
    }
    let idx: Vec<usize> = (0..n).collect();
    Ok(matching_sum(a, &idx))
}

fn matching_sum(a: &SkewMatrix, idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return 1.0;
    }
    let first = idx[0];
    let mut total = 0.0;
    let mut rest: Vec<usize> = Vec::with_capacity(idx.len() - 2);
    for k in 1..idx.len() {
        let v = a.get(first, idx[k]);
        if v == 0.0 {
            continue;
        }
        rest.clear();
        rest.extend(idx[1..].iter().enumerate().filter(|&(p, _)| p + 1 != k).map(|(_, &i)| i));
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        total += sign * v * matching_sum(a, &rest);
    }
    total
}

const NULL_PIVOT: f64 = 1e-300;

/// Parlett-Reid elimination `A = L T L^T` with partial pivoting; returns
/// `log|Pf A|` and its sign (sign 0 when a pivot column vanishes).
pub fn pfaffian(a: &SkewMatrix) -> SignedLog {
    let n = a.order();
    let mut m: Vec<f64> = a.as_matrix().as_slice().to_vec();
    let at = |i: usize, j: usize| i * n + j;
    let mut log_abs = 0.0;
    let mut sign = 1.0;
    let mut k = 0;
    while k + 1 < n {
        let mut kp = k + 1;
        let mut best = m[at(k + 1, k)].abs();
        for i in k + 2..n {
            let v = m[at(i, k)].abs();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if kp != k + 1 {
            for j in 0..n {
                m.swap(at(k + 1, j), at(kp, j));
            }
            for i in 0..n {
                m.swap(at(i, k + 1), at(i, kp));
            }
            sign = -sign;
        }
        let pivot = m[at(k, k + 1)];
        if pivot.abs() < NULL_PIVOT {
            return SignedLog::ZERO;
        }
        log_abs += libm::log(pivot.abs());
        if pivot < 0.0 {
            sign = -sign;
        }
        if k + 2 < n {
            let tau: Vec<f64> = (k + 2..n).map(|j| m[at(k, j)] / pivot).collect();
            let col: Vec<f64> = (k + 2..n).map(|i| m[at(i, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    m[at(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    SignedLog::new(log_abs, sign)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrixcore::Matrix;

    fn skew2(a: f64) -> SkewMatrix {
        SkewMatrix::from_upper(2, |_, _| a).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(pfaffian_naive(&skew2(2.5)).unwrap(), 2.5);
        let four = SkewMatrix::from_upper(4, |i, j| if (i, j) == (0, 1) || (i, j) == (2, 3) { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(pfaffian_naive(&four).unwrap(), 1.0);
        let p = pfaffian(&skew2(-3.0));
        assert_eq!(p.sign, -1.0);
        assert!((p.log_abs - libm::log(3.0)).abs() < 1e-15);
        let blocks = SkewMatrix::from_upper(8, |i, j| if i % 2 == 0 && j == i + 1 { 1.0 } else { 0.0 }).unwrap();
        let p = pfaffian(&blocks);
        assert_eq!((p.log_abs, p.sign), (0.0, 1.0));
    }

    #[test]
    fn four_by_four_formula() {
        let v = [1.3, -0.7, 2.2, 0.4, -1.1, 0.9];
        let a = SkewMatrix::from_upper(4, |i, j| {
            let k = match (i, j) {
                (0, 1) => 0,
                (0, 2) => 1,
                (0, 3) => 2,
                (1, 2) => 3,
                (1, 3) => 4,
                _ => 5,
            };
            v[k]
        })
        .unwrap();
        let expect = v[0] * v[5] - v[1] * v[4] + v[2] * v[3];
        assert!((pfaffian_naive(&a).unwrap() - expect).abs() < 1e-14);
        assert!((pfaffian(&a).value() - expect).abs() < 1e-14);
    }

    #[test]
    fn zero_row_gives_zero() {
        let a = SkewMatrix::from_upper(6, |i, j| if i == 2 || j == 2 { 0.0 } else { (i + 2 * j) as f64 * 0.1 }).unwrap();
        assert_eq!(pfaffian(&a).sign, 0.0);
        assert_eq!(pfaffian_naive(&a).unwrap(), 0.0);
    }

    #[test]
    fn naive_rejects_large() {
        let a = SkewMatrix::from_upper(14, |_, _| 1.0).unwrap();
        assert!(matches!(pfaffian_naive(&a), Err(Error::Size { .. })));
    }

    #[test]
    fn construction_checks_skewness() {
        let bad = Matrix::from_fn(2, |i, j| if i == j { 0.0 } else { 1.0 });
        assert!(matches!(SkewMatrix::new(bad), Err(Error::NotSkew(_))));
        let odd = Matrix::from_fn(3, |_, _| 0.0);
        assert!(SkewMatrix::new(odd).is_err());
        let nearly = Matrix::from_fn(2, |i, j| match (i, j) {
            (0, 1) => 1.0 + 4e-13,
            (1, 0) => -1.0,
            _ => 0.0,
        });
        let s = SkewMatrix::new(nearly).unwrap();
        assert_eq!(s.get(0, 1), -s.get(1, 0));
    }
}
