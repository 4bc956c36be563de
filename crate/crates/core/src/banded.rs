//! Banded LU factorization with partial pivoting.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Scalar field usable as a matrix entry.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn zero() -> Self;
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Square matrix with `kl` sub- and `ku` super-diagonals.
#[derive(Debug, Clone)]
pub struct BandMatrix<T> {
    n: usize,
    kl: usize,
    ku: usize,
    // Row-major, width 2kl+ku+1 to leave room for pivoting fill-in.
    data: Vec<T>,
}

impl<T: Scalar> BandMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> BandMatrix<T> {
        BandMatrix { n, kl, ku, data: vec![T::zero(); n * (2 * kl + ku + 1)] }
    }

    fn width(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width() + (j + self.kl - i)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Adds `v` to entry `(i, j)`; panics outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        assert!(j + self.kl >= i && j <= i + self.ku, "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] = self.data[k] + v;
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if j + self.kl < i || j > i + self.ku || j >= self.n {
            T::zero()
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// `y = A x` for any vector type the entries can scale.
    pub fn matvec<V>(&self, x: &[V]) -> Vec<V>
    where
        V: Copy + Add<Output = V> + Mul<T, Output = V>,
    {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                let mut acc = x[lo] * self.get(i, lo);
                for j in lo + 1..=hi {
                    acc = acc + x[j] * self.get(i, j);
                }
                acc
            })
            .collect()
    }

    /// Max-row-sum norm.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j).modulus()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Gaussian elimination with row partial pivoting.
    pub fn factor(mut self) -> Result<BandLu<T>> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let reach = kl + ku;
        let mut piv = vec![0usize; n];
        let mut lower = vec![T::zero(); n * kl.max(1)];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].modulus();
            for r in k + 1..=last {
                let m = self.data[self.idx(r, k)].modulus();
                if m > best {
                    best = m;
                    p = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::SolverBreakdown(f64::INFINITY));
            }
            piv[k] = p;
            let jmax = (k + reach).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let (a, b) = (self.idx(k, j), self.idx(p, j));
                    self.data.swap(a, b);
                }
            }
            let d = self.data[self.idx(k, k)];
            for r in k + 1..=last {
                let ir = self.idx(r, k);
                let m = self.data[ir] / d;
                self.data[ir] = T::zero();
                lower[k * kl + (r - k - 1)] = m;
                let (rk, rr) = (self.idx(k, k), self.idx(r, k));
                for off in 1..=jmax - k {
                    let v = self.data[rk + off];
                    self.data[rr + off] = self.data[rr + off] - m * v;
                }
            }
        }
        Ok(BandLu { u: self, lower, piv })
    }
}

/// Factors `P A = L U` of a band matrix.
#[derive(Debug, Clone)]
pub struct BandLu<T> {
    u: BandMatrix<T>,
    lower: Vec<T>,
    piv: Vec<usize>,
}

impl<T: Scalar> BandLu<T> {
    /// Solves `A x = b` in place.
    pub fn solve_in_place<V>(&self, b: &mut [V])
    where
        V: Copy + Sub<Output = V> + Mul<T, Output = V> + Div<T, Output = V>,
    {
        let (n, kl, ku) = (self.u.n, self.u.kl, self.u.ku);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            for r in k + 1..=(k + kl).min(n - 1) {
                b[r] = b[r] - bk * self.lower[k * kl + (r - k - 1)];
            }
        }
        let reach = kl + ku;
        for i in (0..n).rev() {
            let row = self.u.idx(i, i);
            let mut acc = b[i];
            for j in i + 1..=(i + reach).min(n - 1) {
                acc = acc - b[j] * self.u.data[row + (j - i)];
            }
            b[i] = acc / self.u.data[row];
        }
    }
}
