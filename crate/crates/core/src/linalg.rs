//! Small dense linear algebra: 3-vectors, 3×3 matrices and square matrices
//! of runtime size for the spectral routines.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use crate::scalar::Real;

/// Column 3-vector.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3<T>(pub [T; 3]);

impl<T: Real> Vec3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self([x, y, z])
    }

    pub fn zeros() -> Self {
        Self([T::zero(); 3])
    }

    /// Unit basis vector along axis `i`.
    pub fn unit(i: usize) -> Self {
        let mut v = Self::zeros();
        v.0[i] = T::one();
        v
    }

    /// Point on the planar circle of radius `radius` at polar angle `beta_deg`.
    pub fn on_circle(radius: T, beta_deg: T) -> Self {
        let b = beta_deg.to_radians();
        Self::new(radius * b.cos(), radius * b.sin(), T::zero())
    }

    pub fn x(&self) -> T {
        self.0[0]
    }

    pub fn y(&self) -> T {
        self.0[1]
    }

    pub fn z(&self) -> T {
        self.0[2]
    }

    pub fn dot(&self, other: &Self) -> T {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn norm_squared(&self) -> T {
        self.dot(self)
    }

    pub fn norm(&self) -> T {
        self.norm_squared().sqrt()
    }

    pub fn distance(&self, other: &Self) -> T {
        (*self - *other).norm()
    }

    pub fn abs(&self) -> Self {
        Self(self.0.map(|c| c.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Polar angle in the x-y plane, in degrees on [0, 360).
    pub fn polar_angle_deg(&self) -> T {
        let a = self.0[1].atan2(self.0[0]).to_degrees();
        if a < T::zero() {
            a + T::lit(360.0)
        } else {
            a
        }
    }

    pub fn cast<U: Real>(&self) -> Vec3<U> {
        Vec3(self.0.map(|c| U::lit(c.as_f64())))
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1], self.0[2] + rhs.0[2]])
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self([self.0[0] - rhs.0[0], self.0[1] - rhs.0[1], self.0[2] - rhs.0[2]])
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self(self.0.map(|c| -c))
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self(self.0.map(|c| c * s))
    }
}

impl<T> Index<usize> for Vec3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T> IndexMut<usize> for Vec3<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

/// Row-major 3×3 matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Mat3<T>(pub [[T; 3]; 3]);

impl<T: Real> Mat3<T> {
    pub fn zeros() -> Self {
        Self([[T::zero(); 3]; 3])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            m.0[i][i] = T::one();
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = self.0[j][i];
            }
        }
        m
    }

    pub fn scale(&self, s: T) -> Self {
        Self(self.0.map(|row| row.map(|c| c * s)))
    }

    pub fn determinant(&self) -> T {
        let a = &self.0;
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> T {
        (0..3)
            .map(|j| (0..3).map(|i| self.0[i][j].abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.0.iter().flatten().fold(T::zero(), |m, c| m.max(c.abs()))
    }

    /// Inverse via the adjugate together with the 1-norm condition number
    /// `‖A‖₁·‖A⁻¹‖₁`. Returns `None` when the determinant vanishes or the
    /// result is not finite.
    pub fn inverse_with_condition(&self) -> Option<(Self, T)> {
        let det = self.determinant();
        if det == T::zero() || !det.is_finite() {
            return None;
        }
        let a = &self.0;
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
        let adj = [
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ];
        let inv = Mat3(adj).scale(T::one() / det);
        let cond = self.norm_1() * inv.norm_1();
        if !cond.is_finite() || inv.0.iter().flatten().any(|c| !c.is_finite()) {
            return None;
        }
        Some((inv, cond))
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut m = *self;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = m.0[i][j] - other.0[i][j];
            }
        }
        m
    }
}

impl<T: Real> Mul<Vec3<T>> for Mat3<T> {
    type Output = Vec3<T>;
    fn mul(self, v: Vec3<T>) -> Vec3<T> {
        let a = &self.0;
        Vec3([
            a[0][0] * v.0[0] + a[0][1] * v.0[1] + a[0][2] * v.0[2],
            a[1][0] * v.0[0] + a[1][1] * v.0[1] + a[1][2] * v.0[2],
            a[2][0] * v.0[0] + a[2][1] * v.0[1] + a[2][2] * v.0[2],
        ])
    }
}

impl<T: Real> Mul for Mat3<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        m
    }
}

/// Dense square matrix of runtime order, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> SquareMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    /// Builds a matrix from rows; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<T>]) -> Option<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(Self { n, data: rows.iter().flatten().copied().collect() })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = self[(j, i)];
            }
        }
        m
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "order mismatch");
        let mut m = Self::zeros(self.n);
        for i in 0..self.n {
            for k in 0..self.n {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..self.n {
                    m[(i, j)] = m[(i, j)] + a * other[(k, j)];
                }
            }
        }
        m
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|c| *c * *c).sum::<T>().sqrt()
    }

    /// Largest entrywise absolute difference to the transpose.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn quadratic_form(&self, x: &[T]) -> T {
        assert_eq!(x.len(), self.n, "vector length mismatch");
        (0..self.n).map(|i| x[i] * (0..self.n).map(|j| self[(i, j)] * x[j]).sum::<T>()).sum()
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "order mismatch");
        Self { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| *a - *b).collect() }
    }
}

impl<T> Index<(usize, usize)> for SquareMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for SquareMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_rotation_is_transpose() {
        let (s, c) = 0.3f64.sin_cos();
        let m = Mat3([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]);
        let (inv, cond) = m.inverse_with_condition().unwrap();
        let t = m.transpose();
        for i in 0..3 {
            for j in 0..3 {
                assert!((inv.0[i][j] - t.0[i][j]).abs() < 1e-15);
            }
        }
        assert!((1.0..2.0).contains(&cond));
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let m = Mat3([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 1.0, 1.0]]);
        assert!(m.inverse_with_condition().is_none());
    }

    #[test]
    fn matrix_vector_product() {
        let m = Mat3([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 10.0]]);
        let v = Vec3::new(1.0, -1.0, 2.0);
        assert_eq!((m * v).0, [5.0, 11.0, 19.0]);
        let (inv, _) = m.inverse_with_condition().unwrap();
        let back = inv * (m * v);
        assert!((back - v).norm() < 1e-13);
    }

    #[test]
    fn polar_angle_wraps_to_positive() {
        let v = Vec3::<f64>::new(0.0, -1.0, 0.0);
        assert!((v.polar_angle_deg() - 270.0).abs() < 1e-12);
        assert!((Vec3::<f64>::on_circle(1.0, 200.0).polar_angle_deg() - 200.0).abs() < 1e-9);
    }

    #[test]
    fn square_matrix_quadratic_form() {
        let m = SquareMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        assert_eq!(m.quadratic_form(&[1.0, 1.0]), 7.0);
        assert_eq!(m.asymmetry(), 0.0);
        assert!(SquareMatrix::<f64>::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_none());
    }
}
