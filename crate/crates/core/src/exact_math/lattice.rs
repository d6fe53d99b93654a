//! Integer vectors and matrices, Smith and Hermite normal forms, exact linear solves.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::rational::Rational;
use super::ExactMathError;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVector(Vec<BigInt>);

impl LatticeVector {
    pub fn new(coords: Vec<BigInt>) -> Self {
        LatticeVector(coords)
    }

    pub fn from_i64(coords: &[i64]) -> Self {
        LatticeVector(coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero(n: usize) -> Self {
        LatticeVector(vec![BigInt::zero(); n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = Self::zero(n);
        v.0[i] = BigInt::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn to_rational(&self) -> Vec<Rational> {
        self.0.iter().map(|c| Rational::from_integer(c.clone())).collect()
    }

    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.0.iter().map(ToPrimitive::to_i64).collect()
    }

    pub fn neg(&self) -> Self {
        LatticeVector(self.0.iter().map(|c| -c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        LatticeVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        LatticeVector(self.0.iter().map(|c| c * k).collect())
    }

    /// gcd of the coordinates (0 for the zero vector).
    pub fn content(&self) -> BigInt {
        self.0.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Primitive generator of the ray through `self` together with the multiplicity.
    pub fn primitive_part(&self) -> (LatticeVector, BigInt) {
        let g = self.content();
        if g.is_zero() {
            return (self.clone(), g);
        }
        (LatticeVector(self.0.iter().map(|c| c / &g).collect()), g)
    }

    /// Rational combination `Σ c_k v_k` (caller guarantees integrality).
    pub fn from_rational(v: &[Rational]) -> Option<Self> {
        v.iter()
            .map(|x| if x.is_integer() { Some(x.to_integer()) } else { None })
            .collect::<Option<Vec<_>>>()
            .map(LatticeVector)
    }
}

impl fmt::Debug for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl std::ops::Index<usize> for LatticeVector {
    type Output = BigInt;
    fn index(&self, i: usize) -> &BigInt {
        &self.0[i]
    }
}

impl Serialize for LatticeVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let ints = self
            .to_i64()
            .ok_or_else(|| serde::ser::Error::custom("lattice coordinate exceeds i64"))?;
        ints.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LatticeVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let ints = Vec::<i64>::deserialize(d)?;
        Ok(LatticeVector::from_i64(&ints))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntegerMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntegerMatrix { rows, cols, entries: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<BigInt>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        IntegerMatrix { rows: r, cols: c, entries: rows.iter().flatten().cloned().collect() }
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        let big: Vec<Vec<BigInt>> =
            rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        Self::from_rows(&big)
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[LatticeVector]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, LatticeVector::dim);
        let mut m = Self::zeros(r, c);
        for (j, v) in cols.iter().enumerate() {
            for i in 0..r {
                m.set(i, j, v[i].clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<BigInt> {
        self.entries[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> LatticeVector {
        LatticeVector((0..self.rows).map(|i| self.get(i, j).clone()).collect())
    }

    pub fn mul(&self, other: &IntegerMatrix) -> IntegerMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = BigInt::zero();
                for k in 0..self.cols {
                    acc += self.get(i, k) * other.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn apply(&self, v: &LatticeVector) -> LatticeVector {
        assert_eq!(self.cols, v.dim());
        LatticeVector(
            (0..self.rows)
                .map(|i| (0..self.cols).map(|k| self.get(i, k) * &v[k]).sum())
                .collect(),
        )
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.entries.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.entries.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] += k * row[src]
    fn add_row(&mut self, dst: usize, src: usize, k: &BigInt) {
        for j in 0..self.cols {
            let v = self.get(src, j) * k;
            self.entries[dst * self.cols + j] += v;
        }
    }

    /// col[dst] += k * col[src]
    fn add_col(&mut self, dst: usize, src: usize, k: &BigInt) {
        for i in 0..self.rows {
            let v = self.get(i, src) * k;
            self.entries[i * self.cols + dst] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -self.get(i, j);
            self.set(i, j, v);
        }
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a.get(k, k).is_zero() {
                match (k + 1..n).find(|&i| !a.get(i, k).is_zero()) {
                    Some(i) => {
                        a.swap_rows(i, k);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
            }
            prev = a.get(k, k).clone();
        }
        sign * a.get(n - 1, n - 1)
    }

    /// Smith normal form `U·A·V = D`.
    pub fn smith(&self) -> Smith {
        let (m, n) = (self.rows, self.cols);
        let mut d = self.clone();
        let mut u = IntegerMatrix::identity(m);
        let mut v = IntegerMatrix::identity(n);
        let mut t = 0;
        while t < m.min(n) {
            // Pivot of minimal absolute value in the trailing block.
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    let x = d.get(i, j);
                    if !x.is_zero() && best.map_or(true, |(bi, bj)| x.abs() < d.get(bi, bj).abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { break };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);
            loop {
                let mut dirty = false;
                for i in t + 1..m {
                    if d.get(i, t).is_zero() {
                        continue;
                    }
                    let q = -d.get(i, t).div_floor(d.get(t, t));
                    d.add_row(i, t, &q);
                    u.add_row(i, t, &q);
                    if !d.get(i, t).is_zero() {
                        d.swap_rows(t, i);
                        u.swap_rows(t, i);
                        dirty = true;
                    }
                }
                for j in t + 1..n {
                    if d.get(t, j).is_zero() {
                        continue;
                    }
                    let q = -d.get(t, j).div_floor(d.get(t, t));
                    d.add_col(j, t, &q);
                    v.add_col(j, t, &q);
                    if !d.get(t, j).is_zero() {
                        d.swap_cols(t, j);
                        v.swap_cols(t, j);
                        dirty = true;
                    }
                }
                if dirty {
                    continue;
                }
                // Divisibility of the trailing block by the pivot.
                let piv = d.get(t, t).clone();
                let bad = (t + 1..m)
                    .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
                    .find(|&(i, j)| !d.get(i, j).is_multiple_of(&piv));
                match bad {
                    Some((i, _)) => {
                        d.add_row(t, i, &BigInt::one());
                        u.add_row(t, i, &BigInt::one());
                    }
                    None => break,
                }
            }
            if d.get(t, t).is_negative() {
                d.negate_row(t);
                u.negate_row(t);
            }
            t += 1;
        }
        let diagonal = (0..t).map(|i| d.get(i, i).clone()).collect();
        Smith { u, d, v, diagonal }
    }

    /// Rank over ℚ.
    pub fn rank(&self) -> usize {
        self.smith().diagonal.len()
    }
}

/// `u · a · v = d` with `d` diagonal; `diagonal` holds the nonzero invariant factors.
#[derive(Clone, Debug)]
pub struct Smith {
    pub u: IntegerMatrix,
    pub d: IntegerMatrix,
    pub v: IntegerMatrix,
    pub diagonal: Vec<BigInt>,
}

/// Row-style Hermite normal form of the lattice spanned by `rows`; zero rows dropped.
pub fn hermite_rows(rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    if rows.is_empty() {
        return Vec::new();
    }
    let mut a = IntegerMatrix::from_rows(rows);
    let (m, n) = (a.rows, a.cols);
    let mut r = 0;
    for c in 0..n {
        if r == m {
            break;
        }
        loop {
            let piv = (r..m)
                .filter(|&i| !a.get(i, c).is_zero())
                .min_by(|&x, &y| a.get(x, c).abs().cmp(&a.get(y, c).abs()));
            let Some(p) = piv else { break };
            a.swap_rows(r, p);
            let mut done = true;
            for i in r + 1..m {
                if !a.get(i, c).is_zero() {
                    let q = -a.get(i, c).div_floor(a.get(r, c));
                    a.add_row(i, r, &q);
                    if !a.get(i, c).is_zero() {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if a.get(r, c).is_zero() {
            continue;
        }
        if a.get(r, c).is_negative() {
            a.negate_row(r);
        }
        for i in 0..r {
            let q = -a.get(i, c).div_floor(a.get(r, c));
            a.add_row(i, r, &q);
        }
        r += 1;
    }
    (0..r).map(|i| a.row(i)).collect()
}

/// Integral, saturated basis of `ker(A) ∩ ℤ^cols`, in Hermite normal form.
pub fn snf_kernel_basis(a: &IntegerMatrix) -> Result<Vec<LatticeVector>, ExactMathError> {
    if a.rows == 0 || a.cols == 0 {
        return Err(ExactMathError::EmptyMatrix);
    }
    let s = a.smith();
    if s.diagonal.len() < a.rows {
        return Err(ExactMathError::RankDeficient { rows: a.rows, rank: s.diagonal.len() });
    }
    let raw: Vec<Vec<BigInt>> =
        (s.diagonal.len()..a.cols).map(|j| s.v.column(j).coords().to_vec()).collect();
    Ok(hermite_rows(&raw).into_iter().map(LatticeVector::new).collect())
}

/// Some integral `x` with `A x = b`, or `None` when no integral solution exists.
pub fn solve_integral(a: &IntegerMatrix, b: &LatticeVector) -> Option<LatticeVector> {
    assert_eq!(a.rows, b.dim());
    let s = a.smith();
    let ub = s.u.apply(b);
    let rank = s.diagonal.len();
    if ub.coords()[rank..].iter().any(|c| !c.is_zero()) {
        return None;
    }
    let mut z = vec![BigInt::zero(); a.cols];
    for (i, d) in s.diagonal.iter().enumerate() {
        if !ub.coords()[i].is_multiple_of(d) {
            return None;
        }
        z[i] = &ub.coords()[i] / d;
    }
    Some(s.v.apply(&LatticeVector::new(z)))
}

/// Exact solve of `M x = b` over ℚ, `M` given by columns; `None` if inconsistent.
/// Requires independent columns.
pub fn solve_columns(cols: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let k = cols.len();
    let n = b.len();
    let mut aug: Vec<Vec<Rational>> =
        (0..n).map(|i| cols.iter().map(|c| c[i].clone()).chain([b[i].clone()]).collect()).collect();
    let mut row = 0;
    let mut pivots = Vec::with_capacity(k);
    for c in 0..k {
        let Some(p) = (row..n).find(|&i| !aug[i][c].is_zero()) else { continue };
        aug.swap(row, p);
        let inv = aug[row][c].recip();
        for x in aug[row].iter_mut() {
            *x *= &inv;
        }
        for i in 0..n {
            if i != row && !aug[i][c].is_zero() {
                let f = aug[i][c].clone();
                for j in 0..=k {
                    let v = &aug[row][j] * &f;
                    aug[i][j] -= v;
                }
            }
        }
        pivots.push(c);
        row += 1;
    }
    if (row..n).any(|i| !aug[i][k].is_zero()) {
        return None;
    }
    let mut x = vec![Rational::zero(); k];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = aug[r][k].clone();
    }
    Some(x)
}

/// Rank over ℚ of a list of rational vectors.
pub fn rational_rank(vectors: &[Vec<Rational>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let n = vectors[0].len();
    let mut rows: Vec<Vec<Rational>> = vectors.to_vec();
    let mut rank = 0;
    for c in 0..n {
        let Some(p) = (rank..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(rank, p);
        for i in rank + 1..rows.len() {
            if !rows[i][c].is_zero() {
                let f = &rows[i][c] / &rows[rank][c];
                for j in c..n {
                    let v = &rows[rank][j] * &f;
                    rows[i][j] -= v;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Inverse of a square rational matrix (row-major), `None` if singular.
pub fn rational_inverse(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(c, p);
        let inv = a[c][c].recip();
        for x in a[c].iter_mut() {
            *x *= &inv;
        }
        for i in 0..n {
            if i != c && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..2 * n {
                    let v = &a[c][j] * &f;
                    a[i][j] -= v;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}
