//! Coefficients expressing a vertex's follow probability as a sum over
//! subsets of its parents, for an arbitrary overlap response `f`.
//!
//! `a[k][i]` obeys `a[k][i] = a[k-1][i-1] - a[k-1][i]` with `a[k][k] = 1`,
//! `a[k][0] = (-1)^k` and zero outside `0..=k`, and
//! `delta[k] = sum_i a[k][i] f(i)`, the k-th forward difference of `f` at 0.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest supported `kmax`. Coefficients grow like binomials and the
/// subset formula is exponential in the parent count.
pub const MAX_DELTA_ORDER: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct DeltaTable<T = f64> {
    /// Row `k` has `k + 1` entries.
    pub a: Vec<Vec<i64>>,
    pub delta: Vec<T>,
}

/// Builds the `a` triangle up to `kmax` by the recursion.
pub fn coefficient_triangle(kmax: usize) -> Result<Vec<Vec<i64>>> {
    if kmax > MAX_DELTA_ORDER {
        return Err(Error::GuardExceeded {
            what: "delta table order",
            limit: MAX_DELTA_ORDER,
            actual: kmax,
        });
    }
    let mut a: Vec<Vec<i64>> = vec![vec![1]];
    for k in 1..=kmax {
        let prev = &a[k - 1];
        let row = (0..=k)
            .map(|i| {
                let left = if i == 0 { 0 } else { prev[i - 1] };
                let right = if i < k { prev[i] } else { 0 };
                left - right
            })
            .collect();
        a.push(row);
    }
    Ok(a)
}

pub fn delta_table<T: Scalar>(f: impl Fn(usize) -> T, kmax: usize) -> Result<DeltaTable<T>> {
    let a = coefficient_triangle(kmax)?;
    let fv: Vec<T> = (0..=kmax).map(&f).collect();
    let delta = a
        .iter()
        .map(|row| {
            row.iter()
                .zip(&fv)
                .fold(T::zero(), |acc, (&c, &fi)| acc + T::lit(c as f64) * fi)
        })
        .collect();
    Ok(DeltaTable { a, delta })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_response() {
        let beta = 0.28;
        let t = delta_table(|i| 1.0 + beta * i as f64, 6).unwrap();
        assert_eq!(t.delta[0], 1.0);
        assert!((t.delta[1] - beta).abs() < 1e-15);
        assert!(t.delta[2..].iter().all(|d| d.abs() < 1e-14));
    }

    #[test]
    fn constant_response() {
        let t = delta_table(|_| 1.0f64, 5).unwrap();
        assert_eq!(t.delta, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn square_response() {
        // a^2 = (1, -2, 1), a^3 = (-1, 3, -3, 1) on f = (0, 1, 4, 9).
        let t = delta_table(|i| (i * i) as f64, 3).unwrap();
        assert_eq!(t.a[2], vec![1, -2, 1]);
        assert_eq!(t.a[3], vec![-1, 3, -3, 1]);
        assert_eq!(t.delta, vec![0.0, 1.0, 2.0, 0.0]);
    }

    #[test]
    fn boundary_values() {
        let a = coefficient_triangle(12).unwrap();
        for (k, row) in a.iter().enumerate() {
            assert_eq!(row[k], 1);
            assert_eq!(row[0], if k % 2 == 0 { 1 } else { -1 });
        }
    }

    #[test]
    fn guard() {
        assert!(coefficient_triangle(MAX_DELTA_ORDER).is_ok());
        assert!(matches!(
            delta_table(|_| 1.0f64, MAX_DELTA_ORDER + 1),
            Err(Error::GuardExceeded { .. })
        ));
    }
}
