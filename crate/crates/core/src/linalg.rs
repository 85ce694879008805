//! Dense linear algebra on the tiny matrices (dim <= 7) the engine needs:
//! partial-pivot inversion over f64 and over the jet ring, and a Cholesky
//! positive-definiteness probe. Row-major storage throughout.

use crate::error::{GeometryError, Result};
use crate::jet::Jet;

/// Inverts `a` (n x n, row-major) by Gauss-Jordan with partial pivoting.
/// Returns the inverse together with a crude condition estimate
/// max|pivot| / min|pivot|; a pivot below `1e-13 * max|pivot|` is treated
/// as singular.
pub fn invert(a: &[f64], n: usize, at_point: &[f64]) -> Result<(Vec<f64>, f64)> {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    let mut pivots = Vec::with_capacity(n);
    for col in 0..n {
        let mut best = col;
        for row in col + 1..n {
            if m[row * n + col].abs() > m[best * n + col].abs() {
                best = row;
            }
        }
        if best != col {
            for k in 0..n {
                m.swap(col * n + k, best * n + k);
                inv.swap(col * n + k, best * n + k);
            }
        }
        let p = m[col * n + col];
        pivots.push(p.abs());
        let pmax = pivots.iter().cloned().fold(0.0, f64::max);
        if p.abs() <= 1e-13 * pmax.max(1e-300) {
            let pmin = pivots.iter().cloned().fold(f64::INFINITY, f64::min);
            return Err(GeometryError::SingularMetric {
                point: at_point.to_vec(),
                condition: pmax / pmin.max(1e-300),
            });
        }
        let r = 1.0 / p;
        for k in 0..n {
            m[col * n + k] *= r;
            inv[col * n + k] *= r;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = m[row * n + col];
            if f != 0.0 {
                for k in 0..n {
                    m[row * n + k] -= f * m[col * n + k];
                    inv[row * n + k] -= f * inv[col * n + k];
                }
            }
        }
    }
    let pmax = pivots.iter().cloned().fold(0.0, f64::max);
    let pmin = pivots.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((inv, pmax / pmin.max(1e-300)))
}

/// Gauss-Jordan inversion over the jet ring, pivoting on values. Gives the
/// inverse-metric entries together with their exact derivatives.
pub fn invert_jets(a: &[Jet], n: usize, at_point: &[f64]) -> Result<Vec<Jet>> {
    assert_eq!(a.len(), n * n);
    let dim = a[0].dim();
    let mut m = a.to_vec();
    let mut inv: Vec<Jet> = (0..n * n).map(|_| Jet::constant(dim, 0.0)).collect();
    for i in 0..n {
        inv[i * n + i] = Jet::constant(dim, 1.0);
    }
    let mut pmax: f64 = 0.0;
    for col in 0..n {
        let mut best = col;
        for row in col + 1..n {
            if m[row * n + col].value().abs() > m[best * n + col].value().abs() {
                best = row;
            }
        }
        if best != col {
            for k in 0..n {
                m.swap(col * n + k, best * n + k);
                inv.swap(col * n + k, best * n + k);
            }
        }
        let p = m[col * n + col].value().abs();
        pmax = pmax.max(p);
        if p <= 1e-13 * pmax.max(1e-300) {
            return Err(GeometryError::SingularMetric {
                point: at_point.to_vec(),
                condition: f64::INFINITY,
            });
        }
        let r = m[col * n + col].recip();
        for k in 0..n {
            m[col * n + k] = &m[col * n + k] * &r;
            inv[col * n + k] = &inv[col * n + k] * &r;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = m[row * n + col].clone();
            if f.value() != 0.0 || f.order() < 3 {
                for k in 0..n {
                    m[row * n + k] = &m[row * n + k] - &(&f * &m[col * n + k]);
                    inv[row * n + k] = &inv[row * n + k] - &(&f * &inv[col * n + k]);
                }
            }
        }
    }
    Ok(inv)
}

/// Cholesky probe: fails with the offending pivot if `a` is not positive
/// definite to working precision.
pub fn check_positive_definite(a: &[f64], n: usize, at_point: &[f64]) -> Result<()> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(GeometryError::IndefiniteMetric {
                        point: at_point.to_vec(),
                        pivot: s,
                    });
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(())
}

pub fn mat_vec(a: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverts_known_3x3() {
        // Diagonal-dominant matrix with a hand-checked inverse action.
        let a = [2.0, 0.0, 1.0, 0.0, 3.0, 0.0, 1.0, 0.0, 1.0];
        let (inv, cond) = invert(&a, 3, &[0.0; 3]).unwrap();
        let x = [1.0, -2.0, 0.5];
        let ax = mat_vec(&a, 3, &x);
        let back = mat_vec(&inv, 3, &ax);
        for i in 0..3 {
            assert!((back[i] - x[i]).abs() < 1e-13);
        }
        assert!(cond >= 1.0);
    }

    #[test]
    fn rejects_singular() {
        let a = [1.0, 2.0, 2.0, 4.0];
        assert!(matches!(
            invert(&a, 2, &[0.1, 0.2]),
            Err(GeometryError::SingularMetric { .. })
        ));
    }

    #[test]
    fn jet_inverse_differentiates_correctly() {
        // a(t) = [[1+t^2, t],[t, 2]]; d/dt of the inverse checked against
        // -A^{-1} A' A^{-1} assembled by hand from plain-f64 inverses.
        let t0 = 0.37;
        let js = Jet::seed(&[t0], 2);
        let t = &js[0];
        let a = vec![
            (t * t).add_scalar(1.0),
            t.clone(),
            t.clone(),
            Jet::constant(1, 2.0),
        ];
        let inv = invert_jets(&a, 2, &[t0]).unwrap();

        let f = |t: f64| -> Vec<f64> {
            let a = [1.0 + t * t, t, t, 2.0];
            invert(&a, 2, &[t]).unwrap().0
        };
        let h = 1e-5;
        let lo = f(t0 - h);
        let hi = f(t0 + h);
        for k in 0..4 {
            let fd = (hi[k] - lo[k]) / (2.0 * h);
            assert!(
                (inv[k].d1(0) - fd).abs() < 1e-8,
                "entry {k}: jet {} vs fd {}",
                inv[k].d1(0),
                fd
            );
        }
    }

    #[test]
    fn cholesky_flags_indefinite() {
        let bad = [1.0, 2.0, 2.0, 1.0];
        assert!(check_positive_definite(&bad, 2, &[0.0; 2]).is_err());
        let good = [2.0, 0.3, 0.3, 1.0];
        assert!(check_positive_definite(&good, 2, &[0.0; 2]).is_ok());
    }
}
