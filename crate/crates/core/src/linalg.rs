//! Exact rational scalars and sparse linear algebra over the rationals.
//!
//! Every subspace is stored through its fully reduced row-echelon basis with
//! leftmost pivots. That basis is canonical, so two subspaces are equal
//! exactly when their stored rows are identical.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Exact rational number; always kept in lowest terms with positive denominator.
pub type Scalar = BigRational;

pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

pub fn frac(p: i64, q: i64) -> Scalar {
    Scalar::new(BigInt::from(p), BigInt::from(q))
}

/// Formats a scalar as `p/q`, always with an explicit denominator.
pub fn format_scalar(s: &Scalar) -> String {
    format!("{}/{}", s.numer(), s.denom())
}

/// Parses `p/q` or a bare integer `p`.
pub fn parse_scalar(text: &str) -> Result<Scalar> {
    let text = text.trim();
    let bad = || Error::Parse(format!("invalid rational `{text}`"));
    match text.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Scalar::new(p, q))
        }
        None => {
            let p: BigInt = text.parse().map_err(|_| bad())?;
            Ok(Scalar::from_integer(p))
        }
    }
}

pub fn factorial(n: u32) -> Scalar {
    (1..=n).fold(Scalar::one(), |acc, k| acc * int(k as i64))
}

/// `binom(top, k)` for an arbitrary integer `top` and `k >= 0`.
pub fn binomial(top: i64, k: u32) -> Scalar {
    let mut acc = Scalar::one();
    for i in 0..k as i64 {
        acc *= int(top - i);
        acc /= int(i + 1);
    }
    acc
}

/// Sparse vector with strictly increasing indices and no stored zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SparseVec {
    entries: Vec<(usize, Scalar)>,
}

impl SparseVec {
    pub fn zero() -> Self {
        SparseVec::default()
    }

    /// Builds a vector from arbitrary `(index, value)` pairs, summing repeats.
    pub fn from_pairs<I: IntoIterator<Item = (usize, Scalar)>>(pairs: I) -> Self {
        let mut entries: Vec<(usize, Scalar)> = pairs.into_iter().collect();
        entries.sort_by_key(|(i, _)| *i);
        let mut out: Vec<(usize, Scalar)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            match out.last_mut() {
                Some((j, acc)) if *j == i => *acc += v,
                _ => out.push((i, v)),
            }
        }
        out.retain(|(_, v)| !v.is_zero());
        SparseVec { entries: out }
    }

    pub fn from_dense(values: &[Scalar]) -> Self {
        SparseVec {
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, v)| (i, v.clone()))
                .collect(),
        }
    }

    pub fn unit(index: usize) -> Self {
        SparseVec {
            entries: vec![(index, Scalar::one())],
        }
    }

    pub fn to_dense(&self, len: usize) -> Vec<Scalar> {
        let mut out = vec![Scalar::zero(); len];
        for (i, v) in &self.entries {
            out[*i] = v.clone();
        }
        out
    }

    pub fn entries(&self) -> &[(usize, Scalar)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, index: usize) -> Scalar {
        match self.entries.binary_search_by_key(&index, |(i, _)| *i) {
            Ok(pos) => self.entries[pos].1.clone(),
            Err(_) => Scalar::zero(),
        }
    }

    pub fn leading(&self) -> Option<usize> {
        self.entries.first().map(|(i, _)| *i)
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|(i, _)| *i)
    }

    pub fn scale(&self, factor: &Scalar) -> SparseVec {
        if factor.is_zero() {
            return SparseVec::zero();
        }
        SparseVec {
            entries: self.entries.iter().map(|(i, v)| (*i, v * factor)).collect(),
        }
    }

    /// `self + factor * other`
    pub fn add_scaled(&self, other: &SparseVec, factor: &Scalar) -> SparseVec {
        if factor.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some((i, x)), Some((j, y))) => {
                    if i < j {
                        out.push((*i, x.clone()));
                        a.next();
                    } else if j < i {
                        out.push((*j, y * factor));
                        b.next();
                    } else {
                        let s = x + y * factor;
                        if !s.is_zero() {
                            out.push((*i, s));
                        }
                        a.next();
                        b.next();
                    }
                }
                (Some((i, x)), None) => {
                    out.push((*i, x.clone()));
                    a.next();
                }
                (None, Some((j, y))) => {
                    out.push((*j, y * factor));
                    b.next();
                }
                (None, None) => break,
            }
        }
        SparseVec { entries: out }
    }

    pub fn sub(&self, other: &SparseVec) -> SparseVec {
        self.add_scaled(other, &-Scalar::one())
    }

    pub fn dot(&self, dense: &[Scalar]) -> Scalar {
        self.entries
            .iter()
            .fold(Scalar::zero(), |acc, (i, v)| acc + v * &dense[*i])
    }
}

impl fmt::Display for SparseVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, (i, v)) in self.entries.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{i}: {v}")?;
        }
        write!(f, "}}")
    }
}

/// A subspace of one graded component, stored as a canonical RREF basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace {
    degree: usize,
    ambient_dim: usize,
    rows: Vec<SparseVec>,
}

#[derive(Serialize)]
struct SubspaceSummary {
    degree: usize,
    ambient_dim: usize,
    dim: usize,
}

impl Serialize for Subspace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SubspaceSummary {
            degree: self.degree,
            ambient_dim: self.ambient_dim,
            dim: self.dim(),
        }
        .serialize(s)
    }
}

impl Subspace {
    pub fn zero(degree: usize, ambient_dim: usize) -> Self {
        Subspace {
            degree,
            ambient_dim,
            rows: Vec::new(),
        }
    }

    pub fn full(degree: usize, ambient_dim: usize) -> Self {
        Subspace {
            degree,
            ambient_dim,
            rows: (0..ambient_dim).map(SparseVec::unit).collect(),
        }
    }

    /// RREF basis of the span of `vectors`.
    pub fn span<'a, I>(degree: usize, ambient_dim: usize, vectors: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a SparseVec>,
    {
        let mut s = Subspace::zero(degree, ambient_dim);
        for v in vectors {
            s.insert(v)?;
        }
        Ok(s)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> &[SparseVec] {
        &self.rows
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.ambient_dim
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.rows.iter().filter_map(|r| r.leading()).collect()
    }

    fn check_vec(&self, v: &SparseVec) -> Result<()> {
        match v.max_index() {
            Some(i) if i >= self.ambient_dim => Err(Error::Structural(format!(
                "index {i} out of range for ambient dimension {}",
                self.ambient_dim
            ))),
            _ => Ok(()),
        }
    }

    fn check_compatible(&self, other: &Subspace) -> Result<()> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: other.ambient_dim,
            });
        }
        if self.degree != other.degree {
            return Err(Error::Structural(format!(
                "degree mismatch: {} vs {}",
                self.degree, other.degree
            )));
        }
        Ok(())
    }

    /// Normal form of `v` modulo the subspace: pivot columns are cleared.
    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        // rows are fully reduced, so each pivot coefficient can be read off `v` directly
        let mut out = v.clone();
        for row in &self.rows {
            let p = row.leading().expect("rows are nonzero");
            let c = v.get(p);
            if !c.is_zero() {
                out = out.add_scaled(row, &-c);
            }
        }
        out
    }

    /// Adds `v` to the span; returns whether the dimension grew.
    pub fn insert(&mut self, v: &SparseVec) -> Result<bool> {
        self.check_vec(v)?;
        let r = self.reduce(v);
        let Some(p) = r.leading() else {
            return Ok(false);
        };
        let inv = r.get(p).recip();
        let r = r.scale(&inv);
        for row in self.rows.iter_mut() {
            let c = row.get(p);
            if !c.is_zero() {
                *row = row.add_scaled(&r, &-c);
            }
        }
        let pos = self.rows.partition_point(|row| row.leading().expect("nonzero") < p);
        self.rows.insert(pos, r);
        Ok(true)
    }

    pub fn member(&self, v: &SparseVec) -> Result<bool> {
        self.check_vec(v)?;
        Ok(self.reduce(v).is_zero())
    }

    /// Whether `other` is a subspace of `self`.
    pub fn contains(&self, other: &Subspace) -> Result<bool> {
        self.check_compatible(other)?;
        Ok(other.rows.iter().all(|r| self.reduce(r).is_zero()))
    }

    pub fn equal(&self, other: &Subspace) -> Result<bool> {
        self.check_compatible(other)?;
        Ok(self.rows == other.rows)
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for r in &other.rows {
            out.insert(r)?;
        }
        Ok(out)
    }

    /// Intersection by the Zassenhaus construction on the doubled space.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check_compatible(other)?;
        let n = self.ambient_dim;
        let shift =
            |v: &SparseVec| -> Vec<(usize, Scalar)> { v.entries().iter().map(|(i, x)| (i + n, x.clone())).collect() };
        let mut doubled: Vec<SparseVec> = Vec::new();
        for s in &self.rows {
            let mut pairs = s.entries().to_vec();
            pairs.extend(shift(s));
            doubled.push(SparseVec::from_pairs(pairs));
        }
        for t in &other.rows {
            doubled.push(t.clone());
        }
        let big = Subspace::span(self.degree, 2 * n, doubled.iter())?;
        let lower: Vec<SparseVec> = big
            .rows
            .iter()
            .filter(|r| r.leading().is_some_and(|p| p >= n))
            .map(|r| SparseVec::from_pairs(r.entries().iter().map(|(i, x)| (i - n, x.clone()))))
            .collect();
        Subspace::span(self.degree, n, lower.iter())
    }

    /// Rows of `other`'s basis that extend `self`, chosen greedily in RREF order.
    pub fn complement_in(&self, other: &Subspace) -> Result<Vec<SparseVec>> {
        self.check_compatible(other)?;
        let mut acc = self.clone();
        let mut out = Vec::new();
        for r in &other.rows {
            if acc.insert(r)? {
                out.push(r.clone());
            }
        }
        Ok(out)
    }

    /// Coordinates of `v` in the stored basis, if `v` lies in the span.
    pub fn coordinates(&self, v: &SparseVec) -> Result<Option<Vec<Scalar>>> {
        self.check_vec(v)?;
        if !self.reduce(v).is_zero() {
            return Ok(None);
        }
        Ok(Some(
            self.rows.iter().map(|r| v.get(r.leading().expect("nonzero"))).collect(),
        ))
    }
}

/// Dense rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Scalar::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Scalar::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Structural("ragged matrix rows".into()));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Matrix whose columns are the given sparse vectors.
    pub fn from_columns(columns: &[SparseVec], rows: usize) -> Result<Self> {
        let mut m = Matrix::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, v) in col.entries() {
                if *i >= rows {
                    return Err(Error::Structural(format!("row index {i} out of range")));
                }
                m.set(*i, j, v.clone());
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let v = out.get(i, j) + a * b;
                        out.set(i, j, v);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    /// Applies the matrix to a list of vector-valued unknowns.
    pub fn apply(&self, xs: &[SparseVec]) -> Result<Vec<SparseVec>> {
        if xs.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: xs.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                xs.iter()
                    .enumerate()
                    .fold(SparseVec::zero(), |acc, (j, x)| acc.add_scaled(x, self.get(i, j)))
            })
            .collect())
    }

    pub fn determinant(&self) -> Result<Scalar> {
        if self.rows != self.cols {
            return Err(Error::Structural("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Scalar::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !a.get(r, c).is_zero()) else {
                return Ok(Scalar::zero());
            };
            if p != c {
                for j in 0..n {
                    a.data.swap(p * n + j, c * n + j);
                }
                det = -det;
            }
            let pivot = a.get(c, c).clone();
            det *= &pivot;
            for r in (c + 1)..n {
                let f = a.get(r, c) / &pivot;
                if f.is_zero() {
                    continue;
                }
                for j in c..n {
                    let v = a.get(r, j) - &f * a.get(c, j);
                    a.set(r, j, v);
                }
            }
        }
        Ok(det)
    }

    pub fn rank(&self) -> usize {
        let rows: Vec<SparseVec> = (0..self.rows).map(|i| SparseVec::from_dense(self.row(i))).collect();
        Subspace::span(0, self.cols, rows.iter())
            .expect("rows fit the column count")
            .dim()
    }
}

/// Solves `M x = rhs` where each unknown and each right-hand side is a vector.
///
/// Returns one exact solution (free unknowns set to zero) or `None` when the
/// system is inconsistent. When `M` is invertible the solution is unique.
pub fn solve(m: &Matrix, rhs: &[SparseVec]) -> Result<Option<Vec<SparseVec>>> {
    if rhs.len() != m.rows {
        return Err(Error::DimensionMismatch {
            expected: m.rows,
            found: rhs.len(),
        });
    }
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.clone();
    let mut b: Vec<SparseVec> = rhs.to_vec();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a.get(i, c).is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                a.data.swap(p * cols + j, r * cols + j);
            }
            b.swap(p, r);
        }
        let inv = a.get(r, c).recip();
        for j in 0..cols {
            let v = a.get(r, j) * &inv;
            a.set(r, j, v);
        }
        b[r] = b[r].scale(&inv);
        for i in 0..rows {
            if i == r {
                continue;
            }
            let f = a.get(i, c).clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..cols {
                let v = a.get(i, j) - &f * a.get(r, j);
                a.set(i, j, v);
            }
            b[i] = b[i].add_scaled(&b[r], &-f.clone());
        }
        pivot_cols.push(c);
        r += 1;
    }
    if b[r..].iter().any(|v| !v.is_zero()) {
        return Ok(None);
    }
    let mut x = vec![SparseVec::zero(); cols];
    for (row, &c) in pivot_cols.iter().enumerate() {
        x[c] = b[row].clone();
    }
    Ok(Some(x))
}

/// Scalar solve: finds coefficients expressing `target` through `columns`.
pub fn solve_combination(columns: &[SparseVec], target: &SparseVec, ambient_dim: usize) -> Result<Option<Vec<Scalar>>> {
    let m = Matrix::from_columns(columns, ambient_dim)?;
    let rhs: Vec<SparseVec> = (0..ambient_dim)
        .map(|i| {
            let v = target.get(i);
            if v.is_zero() {
                SparseVec::zero()
            } else {
                SparseVec::from_pairs([(0, v)])
            }
        })
        .collect();
    Ok(solve(&m, &rhs)?.map(|xs| xs.iter().map(|x| x.get(0)).collect()))
}

/// Degreewise family of subspaces `m -> S_m` for `m = 0..=cutoff`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct GradedFamily {
    pieces: Vec<Subspace>,
}

impl GradedFamily {
    pub fn new(pieces: Vec<Subspace>) -> Result<Self> {
        if pieces.iter().enumerate().any(|(m, s)| s.degree() != m) {
            return Err(Error::Structural("family pieces must be indexed by degree".into()));
        }
        Ok(GradedFamily { pieces })
    }

    /// The zero family over ambient dimensions `dims[m]`.
    pub fn zero(dims: &[usize]) -> Self {
        GradedFamily {
            pieces: dims.iter().enumerate().map(|(m, &d)| Subspace::zero(m, d)).collect(),
        }
    }

    pub fn cutoff(&self) -> usize {
        self.pieces.len().saturating_sub(1)
    }

    pub fn piece(&self, m: usize) -> &Subspace {
        &self.pieces[m]
    }

    pub fn pieces(&self) -> &[Subspace] {
        &self.pieces
    }

    pub fn dims(&self) -> Vec<usize> {
        self.pieces.iter().map(Subspace::dim).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(Subspace::is_zero)
    }

    fn zip<T>(&self, other: &GradedFamily, f: impl Fn(&Subspace, &Subspace) -> Result<T>) -> Result<Vec<T>> {
        if self.pieces.len() != other.pieces.len() {
            return Err(Error::DimensionMismatch {
                expected: self.pieces.len(),
                found: other.pieces.len(),
            });
        }
        self.pieces.iter().zip(&other.pieces).map(|(s, t)| f(s, t)).collect()
    }

    pub fn contains(&self, other: &GradedFamily) -> Result<bool> {
        Ok(self.zip(other, |s, t| s.contains(t))?.into_iter().all(|b| b))
    }

    /// First degree at which the two families differ.
    pub fn first_difference(&self, other: &GradedFamily) -> Result<Option<usize>> {
        Ok(self.zip(other, |s, t| s.equal(t))?.into_iter().position(|eq| !eq))
    }

    pub fn equal(&self, other: &GradedFamily) -> Result<bool> {
        Ok(self.first_difference(other)?.is_none())
    }

    pub fn sum(&self, other: &GradedFamily) -> Result<GradedFamily> {
        Ok(GradedFamily {
            pieces: self.zip(other, |s, t| s.sum(t))?,
        })
    }

    pub fn intersect(&self, other: &GradedFamily) -> Result<GradedFamily> {
        Ok(GradedFamily {
            pieces: self.zip(other, |s, t| s.intersect(t))?,
        })
    }
}
