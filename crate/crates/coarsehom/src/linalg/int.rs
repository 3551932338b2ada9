//! Exact integer matrices: Smith normal form with unimodular transforms,
//! kernels, linear solving, determinants, and sparse lattice reduction.
//!
//! All reductions run on `i64` first and escalate to `BigInt` when any
//! intermediate value overflows; Smith normal form of random matrices grows
//! coefficients quickly, boundary matrices almost never do.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Scalar contract for the in-place reductions. Arithmetic is checked so the
/// `i64` instance can report overflow instead of wrapping.
pub trait SnfScalar: Clone + Eq + std::fmt::Debug + Zero + One {
    fn to_bigint(&self) -> BigInt;
    fn checked_add(&self, o: &Self) -> Option<Self>;
    fn checked_sub(&self, o: &Self) -> Option<Self>;
    fn checked_mul(&self, o: &Self) -> Option<Self>;
    fn checked_neg(&self) -> Option<Self>;
    /// Division with symmetric remainder: `a = q·b + r`, `|r| ≤ |b|/2`.
    fn div_rem_nearest(&self, b: &Self) -> Option<(Self, Self)>;
    /// Exact division; caller guarantees divisibility.
    fn div_exact(&self, b: &Self) -> Option<Self>;
    /// `(g, s, t)` with `g = gcd ≥ 0` and `s·a + t·b = g`.
    fn ext_gcd(&self, b: &Self) -> Option<(Self, Self, Self)>;
    fn abs_cmp(&self, o: &Self) -> Ordering;
    fn is_negative(&self) -> bool;
    fn is_divisible_by(&self, b: &Self) -> bool;
}

impl SnfScalar for i64 {
    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn checked_add(&self, o: &Self) -> Option<Self> {
        i64::checked_add(*self, *o)
    }
    fn checked_sub(&self, o: &Self) -> Option<Self> {
        i64::checked_sub(*self, *o)
    }
    fn checked_mul(&self, o: &Self) -> Option<Self> {
        i64::checked_mul(*self, *o)
    }
    fn checked_neg(&self) -> Option<Self> {
        i64::checked_neg(*self)
    }
    fn div_rem_nearest(&self, b: &Self) -> Option<(Self, Self)> {
        if *b == 0 {
            return None;
        }
        let a = *self as i128;
        let bb = *b as i128;
        let mut q = a / bb;
        let mut r = a - q * bb;
        // pull the remainder into the symmetric range
        if r.abs() * 2 > bb.abs() {
            let step = if (r < 0) == (bb < 0) { 1 } else { -1 };
            q += step;
            r = a - q * bb;
        }
        Some((i64::try_from(q).ok()?, i64::try_from(r).ok()?))
    }
    fn div_exact(&self, b: &Self) -> Option<Self> {
        self.checked_div(*b)
    }
    fn ext_gcd(&self, b: &Self) -> Option<(Self, Self, Self)> {
        // classic iterative version over i128, narrowed at the end
        let (mut r0, mut r1) = (*self as i128, *b as i128);
        let (mut s0, mut s1) = (1i128, 0i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        if r0 < 0 {
            r0 = -r0;
            s0 = -s0;
            t0 = -t0;
        }
        Some((
            i64::try_from(r0).ok()?,
            i64::try_from(s0).ok()?,
            i64::try_from(t0).ok()?,
        ))
    }
    fn abs_cmp(&self, o: &Self) -> Ordering {
        self.unsigned_abs().cmp(&o.unsigned_abs())
    }
    fn is_negative(&self) -> bool {
        *self < 0
    }
    fn is_divisible_by(&self, b: &Self) -> bool {
        *b != 0 && self % b == 0
    }
}

impl SnfScalar for BigInt {
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
    fn checked_add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn checked_sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn checked_mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn checked_neg(&self) -> Option<Self> {
        Some(-self)
    }
    fn div_rem_nearest(&self, b: &Self) -> Option<(Self, Self)> {
        if Zero::is_zero(b) {
            return None;
        }
        let (mut q, mut r) = Integer::div_rem(self, b);
        if r.abs() * 2 > b.abs() {
            let step: BigInt = if r.sign() == b.sign() { One::one() } else { -BigInt::one() };
            q += &step;
            r = self - &q * b;
        }
        Some((q, r))
    }
    fn div_exact(&self, b: &Self) -> Option<Self> {
        Some(self / b)
    }
    fn ext_gcd(&self, b: &Self) -> Option<(Self, Self, Self)> {
        let e = self.extended_gcd(b);
        Some((e.gcd, e.x, e.y))
    }
    fn abs_cmp(&self, o: &Self) -> Ordering {
        self.abs().cmp(&o.abs())
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn is_divisible_by(&self, b: &Self) -> bool {
        !Zero::is_zero(b) && Zero::is_zero(&(self % b))
    }
}

/// Dense matrix over `BigInt`, row major. Small and explicit; the engine keeps
/// genuinely large operands in sparse column form instead.
#[derive(Clone, PartialEq, Eq)]
pub struct IMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<BigInt>,
}

impl std::fmt::Debug for IMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "IMat {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl IMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IMat { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IMat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows_i64(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = IMat::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, BigInt::from(*v));
            }
        }
        m
    }

    pub fn from_columns(rows: usize, cols: &[Vec<BigInt>]) -> Self {
        let mut m = IMat::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> IMat {
        let mut t = IMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IMat) -> IMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = IMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if Zero::is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if Zero::is_zero(b) {
                        continue;
                    }
                    let cur = out.get(i, j) + a * b;
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = BigInt::zero();
                for j in 0..self.cols {
                    let a = self.get(i, j);
                    if !Zero::is_zero(a) && !Zero::is_zero(&v[j]) {
                        acc += a * &v[j];
                    }
                }
                acc
            })
            .collect()
    }

    pub fn sub(&self, other: &IMat) -> IMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = IMat::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j) - other.get(i, j));
            }
        }
        out
    }

    fn to_i64(&self) -> Option<Mat<i64>> {
        let mut data = Vec::with_capacity(self.data.len());
        for v in &self.data {
            data.push(i64::try_from(v).ok()?);
        }
        Some(Mat { rows: self.rows, cols: self.cols, data })
    }

    fn from_generic<T: SnfScalar>(m: &Mat<T>) -> IMat {
        IMat {
            rows: m.rows,
            cols: m.cols,
            data: m.data.iter().map(SnfScalar::to_bigint).collect(),
        }
    }

    /// Fraction-free determinant (Bareiss). Square matrices only.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a: Vec<Vec<BigInt>> =
            (0..n).map(|i| (0..n).map(|j| self.get(i, j).clone()).collect()).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if Zero::is_zero(&a[k][k]) {
                let Some(p) = (k + 1..n).find(|&i| !Zero::is_zero(&a[i][k])) else {
                    return BigInt::zero();
                };
                a.swap(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = num / &prev;
                }
                a[i][k] = BigInt::zero();
            }
            prev = a[k][k].clone();
        }
        sign * a[n - 1][n - 1].clone()
    }
}

#[derive(Clone)]
struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: SnfScalar> Mat<T> {
    fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }
    fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }
    #[inline]
    fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }
    #[inline]
    fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }
    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }
    /// row_i -= q * row_k
    fn row_sub(&mut self, i: usize, k: usize, q: &T) -> Option<()> {
        if q.is_zero() {
            return Some(());
        }
        for j in 0..self.cols {
            let t = q.checked_mul(self.get(k, j))?;
            let v = self.get(i, j).checked_sub(&t)?;
            self.set(i, j, v);
        }
        Some(())
    }
    /// col_j -= q * col_k
    fn col_sub(&mut self, j: usize, k: usize, q: &T) -> Option<()> {
        if q.is_zero() {
            return Some(());
        }
        for i in 0..self.rows {
            let t = q.checked_mul(self.get(i, k))?;
            let v = self.get(i, j).checked_sub(&t)?;
            self.set(i, j, v);
        }
        Some(())
    }
    fn negate_row(&mut self, i: usize) -> Option<()> {
        for j in 0..self.cols {
            let v = self.get(i, j).checked_neg()?;
            self.set(i, j, v);
        }
        Some(())
    }
    /// rows (a, b) <- (s·a + t·b, u·a + v·b)
    fn row_combine(&mut self, a: usize, b: usize, s: &T, t: &T, u: &T, v: &T) -> Option<()> {
        for j in 0..self.cols {
            let x = self.get(a, j).clone();
            let y = self.get(b, j).clone();
            let na = s.checked_mul(&x)?.checked_add(&t.checked_mul(&y)?)?;
            let nb = u.checked_mul(&x)?.checked_add(&v.checked_mul(&y)?)?;
            self.set(a, j, na);
            self.set(b, j, nb);
        }
        Some(())
    }
    /// cols (a, b) <- (s·a + t·b, u·a + v·b)
    fn col_combine(&mut self, a: usize, b: usize, s: &T, t: &T, u: &T, v: &T) -> Option<()> {
        for i in 0..self.rows {
            let x = self.get(i, a).clone();
            let y = self.get(i, b).clone();
            let na = s.checked_mul(&x)?.checked_add(&t.checked_mul(&y)?)?;
            let nb = u.checked_mul(&x)?.checked_add(&v.checked_mul(&y)?)?;
            self.set(i, a, na);
            self.set(i, b, nb);
        }
        Some(())
    }
}

/// Which transform matrices [`smith`] should return.
#[derive(Clone, Copy, Default)]
pub struct SnfWant {
    pub u: bool,
    pub v: bool,
    pub uinv: bool,
}

impl SnfWant {
    pub fn all() -> Self {
        SnfWant { u: true, v: true, uinv: true }
    }
    pub fn uv() -> Self {
        SnfWant { u: true, v: true, uinv: false }
    }
    pub fn none() -> Self {
        SnfWant::default()
    }
}

/// Smith normal form `U · M · V = S` with `S` diagonal, successive
/// divisibility, and unimodular `U`, `V`.
pub struct Snf {
    pub rank: usize,
    /// Invariant factors `d_1 | d_2 | … | d_r`, all positive.
    pub factors: Vec<BigInt>,
    pub u: Option<IMat>,
    pub v: Option<IMat>,
    pub uinv: Option<IMat>,
    pub rows: usize,
    pub cols: usize,
}

impl Snf {
    /// Rebuild the full diagonal matrix.
    pub fn s_matrix(&self) -> IMat {
        let mut s = IMat::zeros(self.rows, self.cols);
        for (i, d) in self.factors.iter().enumerate() {
            s.set(i, i, d.clone());
        }
        s
    }
}

struct Reduction<T> {
    a: Mat<T>,
    u: Option<Mat<T>>,
    v: Option<Mat<T>>,
    uinv: Option<Mat<T>>,
}

impl<T: SnfScalar> Reduction<T> {
    fn row_sub(&mut self, i: usize, k: usize, q: &T) -> Option<()> {
        self.a.row_sub(i, k, q)?;
        if let Some(u) = &mut self.u {
            u.row_sub(i, k, q)?;
        }
        if let Some(ui) = &mut self.uinv {
            // inverse accumulates the opposite column operation: col_k += q * col_i
            let nq = q.checked_neg()?;
            ui.col_sub(k, i, &nq)?;
        }
        Some(())
    }
    fn col_sub(&mut self, j: usize, k: usize, q: &T) -> Option<()> {
        self.a.col_sub(j, k, q)?;
        if let Some(v) = &mut self.v {
            v.col_sub(j, k, q)?;
        }
        Some(())
    }
    fn swap_rows(&mut self, x: usize, y: usize) {
        self.a.swap_rows(x, y);
        if let Some(u) = &mut self.u {
            u.swap_rows(x, y);
        }
        if let Some(ui) = &mut self.uinv {
            ui.swap_cols(x, y);
        }
    }
    fn swap_cols(&mut self, x: usize, y: usize) {
        self.a.swap_cols(x, y);
        if let Some(v) = &mut self.v {
            v.swap_cols(x, y);
        }
    }
    fn negate_row(&mut self, i: usize) -> Option<()> {
        self.a.negate_row(i)?;
        if let Some(u) = &mut self.u {
            u.negate_row(i)?;
        }
        if let Some(ui) = &mut self.uinv {
            for r in 0..ui.rows {
                let v = ui.get(r, i).checked_neg()?;
                ui.set(r, i, v);
            }
        }
        Some(())
    }
    /// One-shot gcd elimination of `a[i][k]` against the pivot `a[k][k]`:
    /// rows (k, i) <- (s·k + t·i, −(b/g)·k + (a/g)·i), determinant one.
    fn gcd_rows(&mut self, k: usize, i: usize) -> Option<()> {
        let av = self.a.get(k, k).clone();
        let bv = self.a.get(i, k).clone();
        let (g, s, t) = av.ext_gcd(&bv)?;
        let ag = av.div_exact(&g)?;
        let bg = bv.div_exact(&g)?;
        let nbg = bg.checked_neg()?;
        self.a.row_combine(k, i, &s, &t, &nbg, &ag)?;
        if let Some(u) = &mut self.u {
            u.row_combine(k, i, &s, &t, &nbg, &ag)?;
        }
        if let Some(ui) = &mut self.uinv {
            // inverse block [[a/g, −t], [b/g, s]] applied on columns
            ui.col_combine(k, i, &ag, &bg, &t.checked_neg()?, &s)?;
        }
        Some(())
    }
    /// One-shot gcd elimination of `a[k][j]` against the pivot, on columns.
    fn gcd_cols(&mut self, k: usize, j: usize) -> Option<()> {
        let av = self.a.get(k, k).clone();
        let bv = self.a.get(k, j).clone();
        let (g, s, t) = av.ext_gcd(&bv)?;
        let ag = av.div_exact(&g)?;
        let bg = bv.div_exact(&g)?;
        let nbg = bg.checked_neg()?;
        self.a.col_combine(k, j, &s, &t, &nbg, &ag)?;
        if let Some(v) = &mut self.v {
            v.col_combine(k, j, &s, &t, &nbg, &ag)?;
        }
        Some(())
    }
}

fn snf_generic<T: SnfScalar>(m: &Mat<T>, want: SnfWant) -> Option<(Mat<T>, Reduction<T>, usize)> {
    let rows = m.rows;
    let cols = m.cols;
    let mut red = Reduction {
        a: m.clone(),
        u: want.u.then(|| Mat::identity(rows)),
        v: want.v.then(|| Mat::identity(cols)),
        uinv: want.uinv.then(|| Mat::identity(rows)),
    };
    let steps = rows.min(cols);
    let mut k = 0;
    while k < steps {
        // pivot: smallest |value|, then position
        let mut pivot: Option<(usize, usize)> = None;
        for i in k..rows {
            for j in k..cols {
                let v = red.a.get(i, j);
                if v.is_zero() {
                    continue;
                }
                match &pivot {
                    None => pivot = Some((i, j)),
                    Some((pi, pj)) => {
                        if v.abs_cmp(red.a.get(*pi, *pj)) == Ordering::Less {
                            pivot = Some((i, j));
                        }
                    }
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        red.swap_rows(k, pi);
        red.swap_cols(k, pj);

        // clear row and column k: divisible entries by plain subtraction, the
        // rest by a one-shot extended-gcd combination that shrinks the pivot
        'clear: loop {
            let mut dirty = false;
            for i in k + 1..rows {
                if red.a.get(i, k).is_zero() {
                    continue;
                }
                if red.a.get(i, k).is_divisible_by(red.a.get(k, k)) {
                    let (q, _) = red.a.get(i, k).div_rem_nearest(red.a.get(k, k))?;
                    red.row_sub(i, k, &q)?;
                } else {
                    red.gcd_rows(k, i)?;
                    dirty = true;
                }
            }
            for j in k + 1..cols {
                if red.a.get(k, j).is_zero() {
                    continue;
                }
                if red.a.get(k, j).is_divisible_by(red.a.get(k, k)) {
                    let (q, _) = red.a.get(k, j).div_rem_nearest(red.a.get(k, k))?;
                    red.col_sub(j, k, &q)?;
                } else {
                    red.gcd_cols(k, j)?;
                    dirty = true;
                }
            }
            if dirty {
                continue 'clear;
            }
            // divisibility sweep: the pivot must divide the remaining block
            let mut offender = None;
            'scan: for i in k + 1..rows {
                for j in k + 1..cols {
                    if !red.a.get(i, j).is_zero() && !red.a.get(i, j).is_divisible_by(red.a.get(k, k)) {
                        offender = Some(i);
                        break 'scan;
                    }
                }
            }
            match offender {
                Some(i) => {
                    // fold the offending row into row k and re-eliminate
                    let minus_one = T::zero().checked_sub(&T::one())?;
                    red.row_sub(k, i, &minus_one)?;
                }
                None => break 'clear,
            }
        }
        if red.a.get(k, k).is_negative() {
            red.negate_row(k)?;
        }
        k += 1;
    }
    let rank = k;
    let s = red.a.clone();
    Some((s, red, rank))
}

/// Smith normal form with the requested transforms, `i64` fast path first.
pub fn smith(m: &IMat, want: SnfWant) -> Snf {
    if let Some(small) = m.to_i64() {
        if let Some((s, red, rank)) = snf_generic(&small, want) {
            return pack_snf(m, s, red, rank);
        }
    }
    let big = Mat::<BigInt> { rows: m.rows, cols: m.cols, data: m.data.clone() };
    let (s, red, rank) = snf_generic(&big, want).expect("BigInt reduction cannot overflow");
    pack_snf(m, s, red, rank)
}

fn pack_snf<T: SnfScalar>(m: &IMat, s: Mat<T>, red: Reduction<T>, rank: usize) -> Snf {
    let factors = (0..rank).map(|i| s.get(i, i).to_bigint()).collect();
    Snf {
        rank,
        factors,
        u: red.u.as_ref().map(IMat::from_generic),
        v: red.v.as_ref().map(IMat::from_generic),
        uinv: red.uinv.as_ref().map(IMat::from_generic),
        rows: m.rows,
        cols: m.cols,
    }
}

/// Basis of the integer kernel of `m` (columns).
pub fn kernel(m: &IMat) -> Vec<Vec<BigInt>> {
    let snf = smith(m, SnfWant { u: false, v: true, uinv: false });
    let v = snf.v.unwrap();
    (snf.rank..m.cols).map(|j| v.column(j)).collect()
}

/// Integer rank.
pub fn rank(m: &IMat) -> usize {
    smith(m, SnfWant::none()).rank
}

/// Solve `m · x = b` over the integers.
pub fn solve(snf: &Snf, b: &[BigInt]) -> Option<Vec<BigInt>> {
    let u = snf.u.as_ref().expect("solve needs U");
    let v = snf.v.as_ref().expect("solve needs V");
    let y = u.mul_vec(b);
    let mut w = vec![BigInt::zero(); snf.cols];
    for (i, yi) in y.iter().enumerate() {
        if i < snf.rank {
            let d = &snf.factors[i];
            if !Zero::is_zero(&(yi % d)) {
                return None;
            }
            w[i] = yi / d;
        } else if !Zero::is_zero(yi) {
            return None;
        }
    }
    Some(v.mul_vec(&w))
}

pub type SparseVec = BTreeMap<usize, BigInt>;

pub fn sparse_from_dense(v: &[BigInt]) -> SparseVec {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !Zero::is_zero(*x))
        .map(|(i, x)| (i, x.clone()))
        .collect()
}

pub fn sparse_to_dense(v: &SparseVec, len: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); len];
    for (&i, x) in v {
        out[i] = x.clone();
    }
    out
}

/// Reduce a (possibly huge) set of lattice generators to at most `rows`
/// columns spanning the same lattice, by unimodular column combinations
/// pivoting on the largest nonzero index.
pub fn reduce_lattice_columns(cols: impl IntoIterator<Item = SparseVec>) -> Vec<SparseVec> {
    let mut owners: BTreeMap<usize, SparseVec> = BTreeMap::new();
    for mut c in cols {
        loop {
            let Some((&low, _)) = c.last_key_value() else { break };
            match owners.get(&low) {
                None => {
                    owners.insert(low, c);
                    break;
                }
                Some(owner) => {
                    let a = owner.get(&low).unwrap().clone();
                    let b = c.get(&low).unwrap().clone();
                    let ext = a.extended_gcd(&b);
                    let (g, x, y) = (ext.gcd, ext.x, ext.y);
                    let ca = &a / &g;
                    let cb = &b / &g;
                    // new owner = x*owner + y*c ; new c = ca*c - cb*owner
                    let owner = owner.clone();
                    let new_owner = sparse_combine(&owner, &x, &c, &y);
                    let new_c = sparse_combine(&c, &ca, &owner, &(-cb));
                    debug_assert!(!new_c.contains_key(&low));
                    owners.insert(low, new_owner);
                    c = new_c;
                }
            }
        }
    }
    owners.into_values().collect()
}

fn sparse_combine(a: &SparseVec, ca: &BigInt, b: &SparseVec, cb: &BigInt) -> SparseVec {
    let mut out: SparseVec = BTreeMap::new();
    if !Zero::is_zero(ca) {
        for (&i, v) in a {
            out.insert(i, v * ca);
        }
    }
    if !Zero::is_zero(cb) {
        for (&i, v) in b {
            let e = out.entry(i).or_insert_with(BigInt::zero);
            *e += v * cb;
        }
    }
    out.retain(|_, v| !Zero::is_zero(v));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn verify_certificate(m: &IMat) {
        let snf = smith(m, SnfWant::all());
        let u = snf.u.clone().unwrap();
        let v = snf.v.clone().unwrap();
        let s = snf.s_matrix();
        assert_eq!(u.mul(m).mul(&v), s, "U·M·V != S");
        assert_eq!(u.det().abs(), BigInt::one(), "U not unimodular");
        assert_eq!(v.det().abs(), BigInt::one(), "V not unimodular");
        for w in snf.factors.windows(2) {
            assert!(Zero::is_zero(&(&w[1] % &w[0])), "divisibility violated");
        }
        let ui = snf.uinv.unwrap();
        assert_eq!(u.mul(&ui), IMat::identity(m.rows), "uinv wrong");
    }

    #[test]
    fn snf_of_diag_2_3_is_1_6() {
        let m = IMat::from_rows_i64(&[vec![2, 0], vec![0, 3]]);
        let snf = smith(&m, SnfWant::all());
        assert_eq!(snf.factors, vec![BigInt::from(1), BigInt::from(6)]);
        verify_certificate(&m);
    }

    #[test]
    fn snf_of_diag_1_0() {
        let m = IMat::from_rows_i64(&[vec![1, 0], vec![0, 0]]);
        let snf = smith(&m, SnfWant::all());
        assert_eq!(snf.rank, 1);
        assert_eq!(snf.factors, vec![BigInt::from(1)]);
        verify_certificate(&m);
    }

    #[test]
    fn snf_of_hollow_triangle_boundary() {
        // edges (01),(02),(12) against vertices 0,1,2
        let m = IMat::from_rows_i64(&[vec![-1, -1, 0], vec![1, 0, -1], vec![0, 1, 1]]);
        let snf = smith(&m, SnfWant::all());
        assert_eq!(snf.rank, 2);
        assert!(snf.factors.iter().all(|d| *d == BigInt::one()));
        verify_certificate(&m);
        // kernel is one circle: rank of H1 = 3 - 2 = 1
        assert_eq!(kernel(&m).len(), 1);
    }

    #[test]
    fn solve_roundtrip() {
        let m = IMat::from_rows_i64(&[vec![2, 1], vec![0, 3]]);
        let snf = smith(&m, SnfWant::all());
        let b = vec![BigInt::from(5), BigInt::from(9)];
        let x = solve(&snf, &b).unwrap();
        assert_eq!(m.mul_vec(&x), b);
        let b2 = vec![BigInt::from(1), BigInt::from(1)];
        assert!(solve(&snf, &b2).is_none(), "3 does not divide 1");
    }

    #[test]
    fn lattice_reduction_preserves_span() {
        // columns (2,0),(3,0),(0,5),(4,5) over Z^2 span Z x 5Z ... check membership
        let cols: Vec<SparseVec> = vec![
            sparse_from_dense(&[BigInt::from(2), BigInt::from(0)]),
            sparse_from_dense(&[BigInt::from(3), BigInt::from(0)]),
            sparse_from_dense(&[BigInt::from(0), BigInt::from(5)]),
            sparse_from_dense(&[BigInt::from(4), BigInt::from(5)]),
        ];
        let red = reduce_lattice_columns(cols);
        assert!(red.len() <= 2);
        let m = IMat::from_columns(2, &red.iter().map(|c| sparse_to_dense(c, 2)).collect::<Vec<_>>());
        let snf = smith(&m, SnfWant::all());
        // (1,0) must be inside, (0,1) must not
        assert!(solve(&snf, &[BigInt::from(1), BigInt::from(0)]).is_some());
        assert!(solve(&snf, &[BigInt::from(0), BigInt::from(1)]).is_none());
        assert!(solve(&snf, &[BigInt::from(0), BigInt::from(5)]).is_some());
    }

    #[test]
    fn bareiss_det_matches_known() {
        let m = IMat::from_rows_i64(&[vec![1, 2], vec![3, 4]]);
        assert_eq!(m.det(), BigInt::from(-2));
        let m = IMat::from_rows_i64(&[vec![2, 0, 1], vec![1, 1, 0], vec![0, 3, 1]]);
        assert_eq!(m.det(), BigInt::from(5));
    }

    #[test]
    fn escalates_to_bigint_on_overflow() {
        // large entries force the BigInt path straight away
        let mut m = IMat::zeros(2, 2);
        m.set(0, 0, BigInt::from(i64::MAX) * 4 + 1);
        m.set(0, 1, BigInt::from(3));
        m.set(1, 0, BigInt::from(7));
        m.set(1, 1, BigInt::from(i64::MAX) * 2);
        verify_certificate(&m);
    }
}
