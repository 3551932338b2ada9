//! Dense exact linear algebra over the two coefficient fields: the rationals
//! and prime fields.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub trait Field: Clone + PartialEq + std::fmt::Debug {
    fn zero(&self) -> Self;
    fn one(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Self;
    fn from_bigint(&self, v: &BigInt) -> Self;
}

impl Field for BigRational {
    fn zero(&self) -> Self {
        <BigRational as Zero>::zero()
    }
    fn one(&self) -> Self {
        <BigRational as One>::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Self {
        self.recip()
    }
    fn from_bigint(&self, v: &BigInt) -> Self {
        BigRational::from_integer(v.clone())
    }
}

/// Element of F_p. Each value carries its modulus; moduli never mix.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Fp {
    pub v: u64,
    pub p: u64,
}

impl Fp {
    pub fn new(v: i64, p: u64) -> Self {
        let m = v.rem_euclid(p as i64) as u64;
        Fp { v: m, p }
    }
    pub fn from_big(v: &BigInt, p: u64) -> Self {
        let m = v.mod_floor_u64(p);
        Fp { v: m, p }
    }
}

trait ModFloor {
    fn mod_floor_u64(&self, p: u64) -> u64;
}

impl ModFloor for BigInt {
    fn mod_floor_u64(&self, p: u64) -> u64 {
        use num_integer::Integer;
        let m = self.mod_floor(&BigInt::from(p));
        u64::try_from(m).expect("mod_floor is in range")
    }
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut bb = b as u128 % p as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * bb % p as u128;
        }
        bb = bb * bb % p as u128;
        e >>= 1;
    }
    b = acc as u64;
    b
}

impl Field for Fp {
    fn zero(&self) -> Self {
        Fp { v: 0, p: self.p }
    }
    fn one(&self) -> Self {
        Fp { v: 1 % self.p, p: self.p }
    }
    fn is_zero(&self) -> bool {
        self.v == 0
    }
    fn add(&self, o: &Self) -> Self {
        debug_assert_eq!(self.p, o.p);
        Fp { v: ((self.v as u128 + o.v as u128) % self.p as u128) as u64, p: self.p }
    }
    fn sub(&self, o: &Self) -> Self {
        debug_assert_eq!(self.p, o.p);
        Fp { v: ((self.v as u128 + self.p as u128 - o.v as u128) % self.p as u128) as u64, p: self.p }
    }
    fn mul(&self, o: &Self) -> Self {
        debug_assert_eq!(self.p, o.p);
        Fp { v: ((self.v as u128 * o.v as u128) % self.p as u128) as u64, p: self.p }
    }
    fn neg(&self) -> Self {
        Fp { v: if self.v == 0 { 0 } else { self.p - self.v }, p: self.p }
    }
    fn inv(&self) -> Self {
        assert!(self.v != 0, "inverse of zero");
        Fp { v: pow_mod(self.v, self.p - 2, self.p), p: self.p }
    }
    fn from_bigint(&self, v: &BigInt) -> Self {
        Fp::from_big(v, self.p)
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Dense matrix over a field. Carries a context element so empty matrices
/// still know their field (e.g. the modulus).
#[derive(Clone, Debug)]
pub struct FMat<F> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<F>,
    ctx: F,
}

impl<F: Field> FMat<F> {
    /// `sample` supplies the field context (e.g. the modulus).
    pub fn zeros(rows: usize, cols: usize, sample: &F) -> Self {
        FMat { rows, cols, data: vec![sample.zero(); rows * cols], ctx: sample.zero() }
    }

    pub fn from_rows(rows: Vec<Vec<F>>, sample: &F) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c, sample);
        for (i, row) in rows.into_iter().enumerate() {
            assert_eq!(row.len(), c);
            for (j, v) in row.into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn identity(n: usize, sample: &F) -> Self {
        let mut m = Self::zeros(n, n, sample);
        for i in 0..n {
            m.set(i, i, sample.one());
        }
        m
    }

    pub fn from_int(rows: usize, cols: usize, get: impl Fn(usize, usize) -> BigInt, sample: &F) -> Self {
        let mut m = Self::zeros(rows, cols, sample);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, sample.from_bigint(&get(i, j)));
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &F {
        &self.data[i * self.cols + j]
    }
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<F> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn mul(&self, other: &FMat<F>) -> FMat<F> {
        assert_eq!(self.cols, other.rows);
        let sample = self.sample();
        let mut out = FMat::zeros(self.rows, other.cols, &sample);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(i, j).add(&a.mul(b));
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[F]) -> Vec<F> {
        assert_eq!(self.cols, v.len());
        let sample = self.sample();
        (0..self.rows)
            .map(|i| {
                let mut acc = sample.zero();
                for j in 0..self.cols {
                    let a = self.get(i, j);
                    if !a.is_zero() && !v[j].is_zero() {
                        acc = acc.add(&a.mul(&v[j]));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn sample(&self) -> F {
        self.ctx.clone()
    }

    /// Reduced row echelon form in place; returns pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            for j in 0..self.cols {
                self.data.swap(r * self.cols + j, pr * self.cols + j);
            }
            let inv = self.get(r, c).inv();
            for j in 0..self.cols {
                let v = self.get(r, j).mul(&inv);
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i == r || self.get(i, c).is_zero() {
                    continue;
                }
                let f = self.get(i, c).clone();
                for j in 0..self.cols {
                    let v = self.get(i, j).sub(&f.mul(self.get(r, j)));
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Kernel basis (columns).
    pub fn kernel(&self) -> Vec<Vec<F>> {
        let sample = self.sample();
        let mut m = self.clone();
        let pivots = m.rref();
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![sample.zero(); self.cols];
            v[free] = sample.one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = m.get(r, free).neg();
            }
            basis.push(v);
        }
        basis
    }

    /// Solve `self · x = b`; `None` when inconsistent.
    pub fn solve(&self, b: &[F]) -> Option<Vec<F>> {
        assert_eq!(b.len(), self.rows);
        let sample = self.sample();
        let mut aug = FMat::zeros(self.rows, self.cols + 1, &sample);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        let pivots = aug.rref();
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![sample.zero(); self.cols];
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = aug.get(r, self.cols).clone();
        }
        Some(x)
    }

    /// Inverse of a square matrix, when it exists.
    pub fn inverse(&self) -> Option<FMat<F>> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return Some(self.clone());
        }
        let sample = self.sample();
        let mut aug = FMat::zeros(n, 2 * n, &sample);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, sample.one());
        }
        let pivots = aug.rref();
        if pivots.len() < n || pivots.iter().enumerate().any(|(i, &c)| c != i) {
            return None;
        }
        let mut inv = FMat::zeros(n, n, &sample);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, aug.get(i, n + j).clone());
            }
        }
        Some(inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    #[test]
    fn rational_rref_and_kernel() {
        let mut m = FMat::from_rows(vec![vec![q(1), q(2), q(3)], vec![q(2), q(4), q(6)]], &q(0));
        assert_eq!(m.rank(), 1);
        let k = m.kernel();
        assert_eq!(k.len(), 2);
        let pivots = m.rref();
        assert_eq!(pivots, vec![0]);
    }

    #[test]
    fn fp_inverse_and_solve() {
        let p = 7;
        let e = |v: i64| Fp::new(v, p);
        let m = FMat::from_rows(vec![vec![e(2), e(1)], vec![e(5), e(3)]], &e(0));
        let inv = m.inverse().unwrap();
        let id = m.mul(&inv);
        assert_eq!(id.get(0, 0).v, 1);
        assert_eq!(id.get(0, 1).v, 0);
        assert_eq!(id.get(1, 1).v, 1);
        let x = m.solve(&[e(3), e(4)]).unwrap();
        assert_eq!(m.mul_vec(&x), vec![e(3), e(4)]);
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let e = |v: i64| Fp::new(v, 5);
        let m = FMat::from_rows(vec![vec![e(1), e(2)], vec![e(2), e(4)]], &e(0));
        assert!(m.inverse().is_none());
    }

    #[test]
    fn primality() {
        assert!(is_prime(2));
        assert!(is_prime(7));
        assert!(!is_prime(1));
        assert!(!is_prime(9));
    }
}
