//! Eigendecomposition of general complex matrices through Hessenberg reduction
//! and shifted QR iteration to complex Schur form.

use num_complex::Complex;
use num_traits::{One, Zero};

use super::Mat;
use crate::error::{Error, Result};
use crate::scalar::{abs2, cabs, Cplx, Real};

#[derive(Debug, Clone)]
pub struct ComplexEigen<T: Real> {
    pub values: Vec<Cplx<T>>,
    /// Right eigenvectors as columns, unit Euclidean norm.
    pub vectors: Mat<Cplx<T>>,
}

pub fn complex_eigen<T: Real>(a: &Mat<Cplx<T>>) -> Result<ComplexEigen<T>> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "complex_eigen needs a square matrix");
    if n == 0 {
        return Ok(ComplexEigen { values: vec![], vectors: Mat::zeros(0, 0) });
    }
    let (mut h, mut q) = hessenberg(a);
    schur_qr(&mut h, &mut q)?;
    let values: Vec<_> = (0..n).map(|k| h[(k, k)]).collect();
    let vectors = triangular_eigenvectors(&h, &q);
    Ok(ComplexEigen { values, vectors })
}

fn identity<T: Real>(n: usize) -> Mat<Cplx<T>> {
    Mat::from_fn(n, n, |i, j| if i == j { Cplx::one() } else { Cplx::zero() })
}

/// Returns (H, Q) with a = Q H Qᴴ and H upper Hessenberg.
fn hessenberg<T: Real>(a: &Mat<Cplx<T>>) -> (Mat<Cplx<T>>, Mat<Cplx<T>>) {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = identity::<T>(n);
    let two = T::lit(2.0);
    for k in 0..n.saturating_sub(2) {
        let mut norm2 = T::zero();
        for i in k + 1..n {
            norm2 += abs2(h[(i, k)]);
        }
        let norm = norm2.sqrt();
        if norm == T::zero() {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let x0_abs = cabs(x0);
        let phase = if x0_abs == T::zero() { Cplx::one() } else { x0 / x0_abs };
        let alpha = -phase * norm;
        let mut v: Vec<Cplx<T>> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|&z| abs2(z)).sum::<T>().sqrt();
        if vnorm == T::zero() {
            continue;
        }
        for z in &mut v {
            *z /= vnorm;
        }
        // h <- (I - 2 v vᴴ) h
        for j in 0..n {
            let mut s = Cplx::zero();
            for (idx, i) in (k + 1..n).enumerate() {
                s += v[idx].conj() * h[(i, j)];
            }
            s *= two;
            for (idx, i) in (k + 1..n).enumerate() {
                h[(i, j)] -= v[idx] * s;
            }
        }
        // h <- h (I - 2 v vᴴ), q <- q (I - 2 v vᴴ)
        for m in [&mut h, &mut q] {
            for i in 0..n {
                let mut s = Cplx::zero();
                for (idx, j) in (k + 1..n).enumerate() {
                    s += m[(i, j)] * v[idx];
                }
                s *= two;
                for (idx, j) in (k + 1..n).enumerate() {
                    m[(i, j)] -= s * v[idx].conj();
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = Cplx::zero();
        }
    }
    (h, q)
}

/// Givens rotation (c, s) with c real such that [c s; -s̄ c]·[x; y] = [r; 0].
fn givens<T: Real>(x: Cplx<T>, y: Cplx<T>) -> (T, Cplx<T>) {
    let ax = cabs(x);
    let nu = ax.hypot(cabs(y));
    if nu == T::zero() {
        return (T::one(), Cplx::zero());
    }
    if ax == T::zero() {
        return (T::zero(), Cplx::one());
    }
    let c = ax / nu;
    let s = (x / ax) * y.conj() / nu;
    (c, s)
}

/// Wilkinson shift: eigenvalue of the trailing 2×2 block closest to its last entry.
fn wilkinson<T: Real>(a: Cplx<T>, b: Cplx<T>, c: Cplx<T>, d: Cplx<T>) -> Cplx<T> {
    let half = T::lit(0.5);
    let tr = (a + d) * half;
    let diff = (a - d) * half;
    let disc = (diff * diff + b * c).sqrt();
    let l1 = tr + disc;
    let l2 = tr - disc;
    if abs2(l1 - d) < abs2(l2 - d) {
        l1
    } else {
        l2
    }
}

fn schur_qr<T: Real>(h: &mut Mat<Cplx<T>>, z: &mut Mat<Cplx<T>>) -> Result<()> {
    let n = h.rows();
    let eps = T::epsilon();
    let mut norm = T::zero();
    for i in 0..n {
        for j in 0..n {
            norm = norm.max(cabs(h[(i, j)]));
        }
    }
    let tiny = T::min_positive_value() / eps;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let max_iter = 60 * n.max(1);
    let mut rot: Vec<(T, Cplx<T>)> = Vec::with_capacity(n);

    while hi > 0 {
        // find the active window [lo, hi]
        let mut lo = hi;
        while lo > 0 {
            let sub = cabs(h[(lo, lo - 1)]);
            let scale = cabs(h[(lo, lo)]) + cabs(h[(lo - 1, lo - 1)]);
            let scale = if scale == T::zero() { norm } else { scale };
            if sub <= eps * scale || sub <= tiny {
                h[(lo, lo - 1)] = Cplx::zero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > max_iter {
            return Err(Error::Numerical("complex QR iteration did not converge".into()));
        }

        let mu = if iter.is_multiple_of(11) {
            // exceptional shift
            h[(hi, hi)] + Complex::new(cabs(h[(hi, hi - 1)]), T::zero()) * T::lit(0.75)
        } else {
            wilkinson(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        for k in lo..=hi {
            h[(k, k)] -= mu;
        }
        rot.clear();
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rot.push((c, s));
            for j in k..n {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = a * c + s * b;
                h[(k + 1, j)] = -s.conj() * a + b * c;
            }
            h[(k + 1, k)] = Cplx::zero();
        }
        for (idx, k) in (lo..hi).enumerate() {
            let (c, s) = rot[idx];
            let last = (k + 1).min(hi);
            for i in 0..=last {
                let p = h[(i, k)];
                let q = h[(i, k + 1)];
                h[(i, k)] = p * c + q * s.conj();
                h[(i, k + 1)] = -p * s + q * c;
            }
            for i in 0..n {
                let p = z[(i, k)];
                let q = z[(i, k + 1)];
                z[(i, k)] = p * c + q * s.conj();
                z[(i, k + 1)] = -p * s + q * c;
            }
        }
        for k in lo..=hi {
            h[(k, k)] += mu;
        }
    }
    Ok(())
}

/// Eigenvectors of the upper-triangular Schur factor, mapped back through `q`.
fn triangular_eigenvectors<T: Real>(t: &Mat<Cplx<T>>, q: &Mat<Cplx<T>>) -> Mat<Cplx<T>> {
    let n = t.rows();
    let mut norm = T::zero();
    for i in 0..n {
        for j in i..n {
            norm = norm.max(cabs(t[(i, j)]));
        }
    }
    let small = (norm * T::epsilon()).max(T::min_positive_value());
    let mut out = Mat::zeros(n, n);
    let mut y = vec![Cplx::<T>::zero(); n];
    for k in 0..n {
        let lambda = t[(k, k)];
        y.iter_mut().for_each(|v| *v = Cplx::zero());
        y[k] = Cplx::one();
        for i in (0..k).rev() {
            let mut s = Cplx::<T>::zero();
            for j in i + 1..=k {
                s += t[(i, j)] * y[j];
            }
            let mut d = t[(i, i)] - lambda;
            if cabs(d) < small {
                d = Complex::new(small, T::zero());
            }
            y[i] = -s / d;
        }
        let mut col: Vec<Cplx<T>> =
            (0..n).map(|i| (0..=k).fold(Cplx::zero(), |acc, j| acc + q[(i, j)] * y[j])).collect();
        let nrm = col.iter().map(|&v| abs2(v)).sum::<T>().sqrt();
        for v in &mut col {
            *v /= nrm;
        }
        for i in 0..n {
            out[(i, k)] = col[i];
        }
    }
    out
}
