//! Dense Gaussian elimination over any [`Scalar`].

use crate::scalar::Scalar;

/// Solves `a · x = b`. Returns the index of a zero pivot column when the
/// system is singular.
pub fn solve<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Result<Vec<T>, usize> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .filter(|&r| !a[r][col].is_zero_value())
            .min_by(|&r1, &r2| a[r1][col].pivot_cost().total_cmp(&a[r2][col].pivot_cost()))
            .ok_or(col)?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = T::one_value().div(&a[col][col]);
        for r in col + 1..n {
            if a[r][col].is_zero_value() {
                continue;
            }
            let factor = a[r][col].mul(&inv);
            for c in col..n {
                if !a[col][c].is_zero_value() {
                    let delta = factor.mul(&a[col][c]);
                    a[r][c] = a[r][c].sub(&delta);
                }
            }
            let delta = factor.mul(&b[col]);
            b[r] = b[r].sub(&delta);
        }
    }
    let mut x = vec![T::zero_value(); n];
    for r in (0..n).rev() {
        let mut acc = b[r].clone();
        for c in r + 1..n {
            if !a[r][c].is_zero_value() {
                acc = acc.sub(&a[r][c].mul(&x[c]));
            }
        }
        x[r] = acc.div(&a[r][r]);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat, Rational};

    #[test]
    fn solves_small_exact_system() {
        // x + y = 3, x - y = 1
        let a = vec![vec![int(1), int(1)], vec![int(1), int(-1)]];
        let x = solve(a, vec![int(3), int(1)]).unwrap();
        assert_eq!(x, vec![int(2), int(1)]);
    }

    #[test]
    fn needs_row_exchange() {
        let a = vec![vec![int(0), int(2)], vec![rat(1, 3), int(1)]];
        let x = solve(a, vec![int(4), int(1)]).unwrap();
        assert_eq!(x, vec![int(-3), int(2)]);
    }

    #[test]
    fn singular_is_reported() {
        let a: Vec<Vec<Rational>> = vec![vec![int(1), int(2)], vec![int(2), int(4)]];
        assert_eq!(solve(a, vec![int(1), int(2)]), Err(1));
    }

    #[test]
    fn float_solution() {
        let a = vec![vec![4.0, 1.0], vec![1.0, 3.0]];
        let x = solve(a, vec![1.0, 2.0]).unwrap();
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-12 && (x[1] - 7.0 / 11.0).abs() < 1e-12);
    }
}
