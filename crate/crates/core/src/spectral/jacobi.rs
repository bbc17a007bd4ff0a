use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::scalar::Real;

const MAX_SWEEPS: usize = 64;

/// Eigen-decomposition `m = Q·diag(values)·Qᵀ` of a symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymEigen<T> {
    /// Ascending eigenvalues.
    pub values: Vec<T>,
    /// Orthonormal eigenvectors stored as columns, ordered like `values`.
    pub vectors: SquareMatrix<T>,
}

impl<T: Real> SymEigen<T> {
    /// `Q·diag(values)·Qᵀ`.
    pub fn reconstruct(&self) -> SquareMatrix<T> {
        let n = self.values.len();
        let mut m = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = (0..n).map(|k| self.vectors[(i, k)] * self.values[k] * self.vectors[(j, k)]).sum();
            }
        }
        m
    }
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn sym_eigenvalues<T: Real>(m: &SquareMatrix<T>) -> Result<Vec<T>> {
    sym_eigen(m).map(|e| e.values)
}

/// Cyclic Jacobi eigen-decomposition.
///
/// Sweeps rotate away every off-diagonal pair in row order. During the first
/// three sweeps pairs below a threshold of `0.2·off/n²` are skipped; later
/// sweeps rotate everything that is not already negligible. Iteration stops
/// once the off-diagonal Frobenius norm drops below `1e-12·‖m‖_F` (or a few
/// ulps for single precision).
pub fn sym_eigen<T: Real>(m: &SquareMatrix<T>) -> Result<SymEigen<T>> {
    let n = m.order();
    let scale = (0..n).flat_map(|i| m.row(i).iter().copied()).fold(T::zero(), |a, c| a.max(c.abs()));
    let asymmetry = m.asymmetry();
    if asymmetry > T::lit(1e-9) * scale.max(T::one()) {
        return Err(Error::NotSymmetric { asymmetry: asymmetry.as_f64() });
    }

    // Work on the exactly symmetrized copy.
    let mut a = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = T::lit(0.5) * (m[(i, j)] + m[(j, i)]);
        }
    }
    let mut v = SquareMatrix::identity(n);
    let tol = T::lit(1e-12).max(T::lit(8.0) * T::epsilon()) * a.frobenius_norm();

    for sweep in 0..MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off <= tol {
            break;
        }
        let threshold = if sweep < 3 { T::lit(0.2) * off / T::from_count(n * n) } else { T::zero() };
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= threshold || apq == T::zero() {
                    continue;
                }
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = SquareMatrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, col)] = v[(row, src)];
        }
    }
    Ok(SymEigen { values, vectors })
}

fn off_diagonal_norm<T: Real>(a: &SquareMatrix<T>) -> T {
    let n = a.order();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s = s + a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Applies the rotation that annihilates `a[(p, q)]`.
fn rotate<T: Real>(a: &mut SquareMatrix<T>, v: &mut SquareMatrix<T>, p: usize, q: usize) {
    let n = a.order();
    let apq = a[(p, q)];
    let theta = (a[(q, q)] - a[(p, p)]) / (T::lit(2.0) * apq);
    let t = {
        let mag = T::one() / (theta.abs() + (theta * theta + T::one()).sqrt());
        if theta < T::zero() {
            -mag
        } else {
            mag
        }
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = T::zero();
    a[(q, p)] = T::zero();
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_unit_spectrum() {
        let values = sym_eigenvalues(&SquareMatrix::<f64>::identity(6)).unwrap();
        assert_eq!(values, vec![1.0; 6]);
    }

    #[test]
    fn diagonal_values_are_sorted() {
        let values = sym_eigenvalues(&SquareMatrix::from_diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(values, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn two_by_two_closed_form() {
        let m = SquareMatrix::from_rows(&[vec![2.0f64, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = sym_eigen(&m).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
        assert!(e.reconstruct().sub(&m).frobenius_norm() < 1e-14);
    }

    #[test]
    fn rejects_asymmetric_input() {
        let m = SquareMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eigen(&m), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn single_precision() {
        let m = SquareMatrix::from_rows(&[vec![4.0f32, 1.0, 0.0], vec![1.0, 3.0, 0.5], vec![0.0, 0.5, 1.0]]).unwrap();
        let e = sym_eigen(&m).unwrap();
        assert!(e.reconstruct().sub(&m).frobenius_norm() < 1e-5);
        let trace: f32 = e.values.iter().sum();
        assert!((trace - 8.0).abs() < 1e-5);
    }
}
