//! Small dense linear algebra over `Complex64`: 2-vectors, 2x2 matrices,
//! closed-form Hermitian eigen/singular decompositions, and a pivoted
//! Gaussian solver for the stationary-distribution systems.
//!
//! Everything here is sized for the problem at hand (qubit operators and
//! state-transition matrices with at most a few dozen states), so the
//! decompositions are exact closed forms rather than iterative routines.

use num_complex::Complex64;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Complex column 2-vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2(pub [C64; 2]);

impl Vec2 {
    pub fn zero() -> Self {
        Vec2([C64::new(0.0, 0.0); 2])
    }

    pub fn basis(i: usize) -> Self {
        let mut v = Self::zero();
        v.0[i] = C64::new(1.0, 0.0);
        v
    }

    pub fn from_reals(a: f64, b: f64) -> Self {
        Vec2([C64::new(a, 0.0), C64::new(b, 0.0)])
    }

    /// Inner product `<self|other>` (conjugate-linear in `self`).
    pub fn dot(&self, other: &Vec2) -> C64 {
        self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1]
    }

    pub fn norm_sq(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, s: C64) -> Vec2 {
        Vec2([self.0[0] * s, self.0[1] * s])
    }

    pub fn add(&self, other: &Vec2) -> Vec2 {
        Vec2([self.0[0] + other.0[0], self.0[1] + other.0[1]])
    }

    pub fn sub(&self, other: &Vec2) -> Vec2 {
        Vec2([self.0[0] - other.0[0], self.0[1] - other.0[1]])
    }

    pub fn normalized(&self) -> Vec2 {
        let n = self.norm();
        self.scale(C64::new(1.0 / n, 0.0))
    }

    /// A unit vector orthogonal to `self` (assumes `self` is nonzero).
    pub fn orthogonal(&self) -> Vec2 {
        Vec2([-self.0[1].conj(), self.0[0].conj()]).normalized()
    }
}

/// Complex 2x2 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub fn zero() -> Self {
        Mat2([[C64::new(0.0, 0.0); 2]; 2])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        m.0[0][0] = C64::new(1.0, 0.0);
        m.0[1][1] = C64::new(1.0, 0.0);
        m
    }

    pub fn from_rows(r0: [C64; 2], r1: [C64; 2]) -> Self {
        Mat2([r0, r1])
    }

    pub fn diag_real(a: f64, b: f64) -> Self {
        Mat2([
            [C64::new(a, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(b, 0.0)],
        ])
    }

    /// Outer product `|u><v|`.
    pub fn outer(u: &Vec2, v: &Vec2) -> Self {
        Mat2([
            [u.0[0] * v.0[0].conj(), u.0[0] * v.0[1].conj()],
            [u.0[1] * v.0[0].conj(), u.0[1] * v.0[1].conj()],
        ])
    }

    pub fn adjoint(&self) -> Mat2 {
        Mat2([
            [self.0[0][0].conj(), self.0[1][0].conj()],
            [self.0[0][1].conj(), self.0[1][1].conj()],
        ])
    }

    pub fn mul(&self, other: &Mat2) -> Mat2 {
        let mut out = Mat2::zero();
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] = self.0[i][0] * other.0[0][j] + self.0[i][1] * other.0[1][j];
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &Vec2) -> Vec2 {
        Vec2([
            self.0[0][0] * v.0[0] + self.0[0][1] * v.0[1],
            self.0[1][0] * v.0[0] + self.0[1][1] * v.0[1],
        ])
    }

    pub fn add(&self, other: &Mat2) -> Mat2 {
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] += other.0[i][j];
            }
        }
        out
    }

    pub fn sub(&self, other: &Mat2) -> Mat2 {
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] -= other.0[i][j];
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Mat2 {
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] *= s;
            }
        }
        out
    }

    pub fn scale_real(&self, s: f64) -> Mat2 {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                s += self.0[i][j].norm_sqr();
            }
        }
        s.sqrt()
    }

    pub fn powi(&self, n: u32) -> Mat2 {
        let mut out = Mat2::identity();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Deviation from unitarity, `|| M^H M - I ||_F`.
    pub fn unitarity_residual(&self) -> f64 {
        self.adjoint().mul(self).sub(&Mat2::identity()).frobenius_norm()
    }
}

/// Eigen-decomposition of a 2x2 Hermitian matrix.
///
/// Returns `(eigenvalues, eigenvectors)` sorted by descending eigenvalue.
/// Only the lower/upper triangle consistency of the input is assumed
/// (entries are read as `[[a, c], [c*, b]]` with `a`, `b` real parts).
pub fn eigh2(m: &Mat2) -> ([f64; 2], [Vec2; 2]) {
    let a = m.0[0][0].re;
    let b = m.0[1][1].re;
    let c = m.0[0][1];
    let mid = 0.5 * (a + b);
    let half_diff = 0.5 * (a - b);
    let r = (half_diff * half_diff + c.norm_sqr()).sqrt();
    let lam = [mid + r, mid - r];

    let scale = a.abs().max(b.abs()).max(c.norm()).max(1e-300);
    if c.norm() <= 1e-15 * scale {
        // Effectively diagonal.
        if a >= b {
            return (lam, [Vec2::basis(0), Vec2::basis(1)]);
        }
        return (lam, [Vec2::basis(1), Vec2::basis(0)]);
    }

    let mut vecs = [Vec2::zero(); 2];
    for (i, &l) in lam.iter().enumerate() {
        // Pick the numerically larger of the two analytic eigenvector forms.
        let cand1 = Vec2([c, C64::new(l - a, 0.0)]);
        let cand2 = Vec2([C64::new(l - b, 0.0), c.conj()]);
        let v = if cand1.norm_sq() >= cand2.norm_sq() {
            cand1
        } else {
            cand2
        };
        vecs[i] = v.normalized();
    }
    (lam, vecs)
}

/// Singular value decomposition of a 2x2 complex matrix.
///
/// `a = sum_i s[i] |u[i]><v[i]|` with `s[0] >= s[1] >= 0` and each frame
/// orthonormal.
#[derive(Debug, Clone, Copy)]
pub struct Svd2 {
    pub s: [f64; 2],
    pub u: [Vec2; 2],
    pub v: [Vec2; 2],
}

pub fn svd2(a: &Mat2) -> Svd2 {
    let h = a.adjoint().mul(a);
    let (lam, v) = eigh2(&h);
    let s = [lam[0].max(0.0).sqrt(), lam[1].max(0.0).sqrt()];
    let mut u = [Vec2::zero(); 2];
    for i in 0..2 {
        if s[i] > 1e-300 {
            u[i] = a.mul_vec(&v[i]).scale(C64::new(1.0 / s[i], 0.0));
        }
    }
    // Complete degenerate columns orthogonally.
    if s[0] <= 1e-300 {
        u[0] = Vec2::basis(0);
    }
    if s[1] <= 1e-300 || u[1].norm_sq() < 0.5 {
        u[1] = u[0].orthogonal();
    }
    Svd2 { s, u, v }
}

/// Reconstruct `sum_i s[i] |u[i]><v[i]|`.
pub fn svd2_reconstruct(svd: &Svd2) -> Mat2 {
    Mat2::outer(&svd.u[0], &svd.v[0])
        .scale_real(svd.s[0])
        .add(&Mat2::outer(&svd.u[1], &svd.v[1]).scale_real(svd.s[1]))
}

/// Solve a dense real linear system `a x = b` in place (partial pivoting).
///
/// Returns `None` when the system is singular to working precision.
#[allow(clippy::needless_range_loop)]
pub fn solve_dense(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < 1e-13 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = 1.0 / a[col][col];
        for row in col + 1..n {
            let factor = a[row][col] * inv;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}
