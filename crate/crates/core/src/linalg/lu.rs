use num_traits::{One, Zero};

use super::Mat;
use crate::scalar::{abs2, Cplx, Real};

/// LU factorization with partial pivoting of a square complex matrix.
#[derive(Debug, Clone)]
pub struct LuFactor<T: Real> {
    lu: Mat<Cplx<T>>,
    perm: Vec<usize>,
}

impl<T: Real> LuFactor<T> {
    /// Factorizes `a`; returns `None` when a pivot is exactly zero.
    pub fn new(mut a: Mat<Cplx<T>>) -> Option<Self> {
        let n = a.rows();
        assert_eq!(n, a.cols(), "LU needs a square matrix");
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = abs2(a[(k, k)]);
            for i in k + 1..n {
                let v = abs2(a[(i, k)]);
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == T::zero() || !best.is_finite() {
                return None;
            }
            a.swap_rows(k, p);
            perm.swap(k, p);
            let pivot_inv = Cplx::<T>::one() / a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] * pivot_inv;
                a[(i, k)] = f;
                if f.is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = a[(k, j)];
                    a[(i, j)] -= f * u;
                }
            }
        }
        Some(Self { lu: a, perm })
    }

    pub fn solve(&self, b: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let n = self.lu.rows();
        let mut x: Vec<Cplx<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn solves_small_system() {
        let a = Mat::from_rows(&[vec![cplx(0.0, 0.0), cplx(2.0, 1.0)], vec![cplx(1.0, -1.0), cplx(3.0, 0.0)]]);
        let x_true = vec![cplx(1.0, 2.0), cplx(-0.5, 0.25)];
        let b = a.matvec(&x_true);
        let x = LuFactor::new(a).unwrap().solve(&b);
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).norm() < 1e-14);
        }
    }

    #[test]
    fn singular_is_none() {
        let a = Mat::from_rows(&[vec![cplx(1.0, 0.0), cplx(2.0, 0.0)], vec![cplx(2.0, 0.0), cplx(4.0, 0.0)]]);
        assert!(LuFactor::new(a).is_none());
    }
}
