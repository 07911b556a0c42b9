//! Rank-r free-boson Fock model truncated at a degree cutoff.
//!
//! Basis states are creation monomials `a{f}[-n]...|0>` with modes `n >= 1`;
//! the degree of a monomial is the sum of its modes. The modes obey
//! `[a^f_m, a^g_n] = m K_{fg} delta_{m+n,0}` with `K` the level matrix, and
//! the zero modes act trivially.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::RwLock;

use num_traits::{One, Zero};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{format_scalar, int, parse_scalar, Matrix, Scalar, SparseVec, Subspace};

/// One creation mode `a^flavor_{-mode}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Factor {
    pub flavor: u8,
    pub mode: u32,
}

impl Factor {
    pub fn new(flavor: u8, mode: u32) -> Self {
        Factor { flavor, mode }
    }

    fn key(&self) -> (u8, std::cmp::Reverse<u32>) {
        (self.flavor, std::cmp::Reverse(self.mode))
    }
}

impl PartialOrd for Factor {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Factor {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

/// Creation monomial applied to the vacuum, factors in canonical order
/// (flavor ascending, then mode descending).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockMonomial {
    factors: Vec<Factor>,
}

impl FockMonomial {
    pub fn vacuum() -> Self {
        FockMonomial::default()
    }

    pub fn new(mut factors: Vec<Factor>) -> Result<Self> {
        if factors.iter().any(|f| f.mode == 0) {
            return Err(Error::Structural("creation modes must be >= 1".into()));
        }
        factors.sort();
        Ok(FockMonomial { factors })
    }

    pub(crate) fn from_sorted(factors: Vec<Factor>) -> Self {
        debug_assert!(factors.windows(2).all(|w| w[0] <= w[1]));
        FockMonomial { factors }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn weight(&self) -> usize {
        self.factors.iter().map(|f| f.mode as usize).sum()
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_vacuum(&self) -> bool {
        self.factors.is_empty()
    }

    /// Total derivative count `sum (mode - 1)`; the Li rank of the monomial.
    pub fn derivative_count(&self) -> usize {
        self.weight() - self.len()
    }

    pub fn with_factor(&self, factor: Factor) -> Self {
        let mut factors = self.factors.clone();
        let pos = factors.partition_point(|f| *f <= factor);
        factors.insert(pos, factor);
        FockMonomial { factors }
    }

    pub(crate) fn without_index(&self, index: usize) -> Self {
        let mut factors = self.factors.clone();
        factors.remove(index);
        FockMonomial { factors }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |why: &str| Error::Parse(format!("monomial `{text}`: {why}"));
        let body = text.trim().strip_suffix("|0>").ok_or_else(|| bad("missing `|0>`"))?;
        let mut factors = Vec::new();
        let mut rest = body;
        while !rest.is_empty() {
            rest = rest.strip_prefix('a').ok_or_else(|| bad("expected `a`"))?;
            let open = rest.find('[').ok_or_else(|| bad("expected `[`"))?;
            let flavor: u8 = rest[..open].parse().map_err(|_| bad("bad flavor"))?;
            rest = &rest[open + 1..];
            let close = rest.find(']').ok_or_else(|| bad("expected `]`"))?;
            let mode: i64 = rest[..close].parse().map_err(|_| bad("bad mode"))?;
            if mode >= 0 {
                return Err(bad("modes must be negative"));
            }
            rest = &rest[close + 1..];
            let mut power = 1usize;
            if let Some(r) = rest.strip_prefix('^') {
                let end = r.find(|c: char| !c.is_ascii_digit()).unwrap_or(r.len());
                power = r[..end].parse().map_err(|_| bad("bad exponent"))?;
                rest = &r[end..];
            }
            for _ in 0..power {
                factors.push(Factor::new(flavor, (-mode) as u32));
            }
        }
        FockMonomial::new(factors)
    }
}

impl fmt::Display for FockMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut i = 0;
        while i < self.factors.len() {
            let fac = self.factors[i];
            let mut j = i;
            while j < self.factors.len() && self.factors[j] == fac {
                j += 1;
            }
            write!(f, "a{}[-{}]", fac.flavor, fac.mode)?;
            if j - i > 1 {
                write!(f, "^{}", j - i)?;
            }
            i = j;
        }
        write!(f, "|0>")
    }
}

/// Finite rational combination of Fock monomials.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FockState {
    terms: BTreeMap<FockMonomial, Scalar>,
}

impl FockState {
    pub fn zero() -> Self {
        FockState::default()
    }

    pub fn from_monomial(m: FockMonomial) -> Self {
        FockState::term(Scalar::one(), m)
    }

    pub fn term(coeff: Scalar, m: FockMonomial) -> Self {
        let mut s = FockState::zero();
        s.add_term(m, coeff);
        s
    }

    pub fn from_terms<I: IntoIterator<Item = (FockMonomial, Scalar)>>(terms: I) -> Self {
        let mut s = FockState::zero();
        for (m, c) in terms {
            s.add_term(m, c);
        }
        s
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FockMonomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &FockMonomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn add_term(&mut self, m: FockMonomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &FockState, factor: &Scalar) {
        if factor.is_zero() {
            return;
        }
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c * factor);
        }
    }

    pub fn add(&self, other: &FockState) -> FockState {
        let mut out = self.clone();
        out.add_scaled(other, &Scalar::one());
        out
    }

    pub fn sub(&self, other: &FockState) -> FockState {
        let mut out = self.clone();
        out.add_scaled(other, &-Scalar::one());
        out
    }

    pub fn scale(&self, factor: &Scalar) -> FockState {
        if factor.is_zero() {
            return FockState::zero();
        }
        FockState {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * factor)).collect(),
        }
    }

    pub fn neg(&self) -> FockState {
        self.scale(&-Scalar::one())
    }

    /// Common weight of all terms; `None` for the zero state or mixed degrees.
    pub fn degree(&self) -> Option<usize> {
        let mut it = self.terms.keys().map(|m| m.weight());
        let first = it.next()?;
        it.all(|w| w == first).then_some(first)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.degree().is_some()
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.terms.keys().map(|m| m.weight()).max()
    }

    /// Homogeneous components keyed by degree.
    pub fn components(&self) -> BTreeMap<usize, FockState> {
        let mut out: BTreeMap<usize, FockState> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.weight()).or_default().add_term(m.clone(), c.clone());
        }
        out
    }

    /// Coefficient of the vacuum.
    pub fn vacuum_coefficient(&self) -> Scalar {
        self.coefficient(&FockMonomial::vacuum())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut s = FockState::zero();
        let text = text.trim();
        if text == "0" || text.is_empty() {
            return Ok(s);
        }
        for part in text.split(" + ") {
            let part = part.trim();
            let (c, m) = match part.split_once('*') {
                Some((c, m)) => (parse_scalar(c)?, FockMonomial::parse(m)?),
                None => (Scalar::one(), FockMonomial::parse(part)?),
            };
            s.add_term(m, c);
        }
        Ok(s)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("state serializes")
    }

    /// Reads the `[["p/q", "monomial"], ...]` form.
    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let arr = value
            .as_array()
            .ok_or_else(|| Error::Parse("state JSON must be an array".into()))?;
        let mut s = FockState::zero();
        for item in arr {
            let pair = item
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| Error::Parse("state term must be a pair".into()))?;
            let c = pair[0]
                .as_str()
                .ok_or_else(|| Error::Parse("coefficient must be a string".into()))?;
            let m = pair[1]
                .as_str()
                .ok_or_else(|| Error::Parse("monomial must be a string".into()))?;
            s.add_term(FockMonomial::parse(m)?, parse_scalar(c)?);
        }
        Ok(s)
    }
}

impl Serialize for FockState {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.terms.len()))?;
        for (m, c) in &self.terms {
            seq.serialize_element(&(format_scalar(c), m.to_string()))?;
        }
        seq.end()
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}*{}", format_scalar(c), m)?;
        }
        Ok(())
    }
}

/// Polynomial in `lambda` (and optionally `mu`) with state coefficients.
/// Keys are exponent pairs `(i, j)` for `lambda^i mu^j`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LambdaPoly {
    coeffs: BTreeMap<(u32, u32), FockState>,
}

impl LambdaPoly {
    pub fn zero() -> Self {
        LambdaPoly::default()
    }

    pub fn constant(s: FockState) -> Self {
        let mut p = LambdaPoly::zero();
        p.add_term(0, 0, &s);
        p
    }

    pub fn add_term(&mut self, i: u32, j: u32, s: &FockState) {
        if s.is_zero() {
            return;
        }
        let entry = self.coeffs.entry((i, j)).or_default();
        entry.add_scaled(s, &Scalar::one());
        if entry.is_zero() {
            self.coeffs.remove(&(i, j));
        }
    }

    pub fn add_scaled_term(&mut self, i: u32, j: u32, s: &FockState, factor: &Scalar) {
        self.add_term(i, j, &s.scale(factor));
    }

    pub fn coeff(&self, i: u32, j: u32) -> FockState {
        self.coeffs.get(&(i, j)).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &FockState)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_univariate(&self) -> bool {
        self.coeffs.keys().all(|(_, j)| *j == 0)
    }

    pub fn lambda_degree(&self) -> Option<u32> {
        self.coeffs.keys().map(|(i, _)| *i).max()
    }

    pub fn add(&self, other: &LambdaPoly) -> LambdaPoly {
        let mut out = self.clone();
        for ((i, j), s) in &other.coeffs {
            out.add_term(*i, *j, s);
        }
        out
    }

    pub fn sub(&self, other: &LambdaPoly) -> LambdaPoly {
        self.add(&other.scale(&-Scalar::one()))
    }

    pub fn scale(&self, factor: &Scalar) -> LambdaPoly {
        let mut out = LambdaPoly::zero();
        for ((i, j), s) in &self.coeffs {
            out.add_term(*i, *j, &s.scale(factor));
        }
        out
    }

    /// Multiplies by `lambda^di mu^dj`.
    pub fn shift(&self, di: u32, dj: u32) -> LambdaPoly {
        LambdaPoly {
            coeffs: self
                .coeffs
                .iter()
                .map(|((i, j), s)| ((i + di, j + dj), s.clone()))
                .collect(),
        }
    }

    /// Applies a fallible map to every coefficient.
    pub fn try_map<F>(&self, mut f: F) -> Result<LambdaPoly>
    where
        F: FnMut(&FockState) -> Result<FockState>,
    {
        let mut out = LambdaPoly::zero();
        for ((i, j), s) in &self.coeffs {
            out.add_term(*i, *j, &f(s)?);
        }
        Ok(out)
    }

    /// Coefficients `c_j` of a univariate polynomial, indexed by `j`.
    pub fn univariate_coeffs(&self) -> Vec<FockState> {
        let n = self.lambda_degree().map_or(0, |d| d as usize + 1);
        (0..n).map(|i| self.coeff(i as u32, 0)).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.coeffs
                .iter()
                .map(|((i, j), s)| serde_json::json!({"lambda": i, "mu": j, "coeff": s}))
                .collect(),
        )
    }
}

impl fmt::Display for LambdaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (k, ((i, j), s)) in self.coeffs.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "l^{i} m^{j} ({s})")?;
        }
        Ok(())
    }
}

/// Parameters of a free-boson model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelSpec {
    pub rank: usize,
    /// Symmetric nondegenerate level matrix, `rank x rank`.
    pub level: Vec<Vec<Scalar>>,
    pub cutoff: usize,
}

impl ModelSpec {
    pub fn diagonal(rank: usize, level: Scalar, cutoff: usize) -> Self {
        let level = (0..rank)
            .map(|f| {
                (0..rank)
                    .map(|g| if f == g { level.clone() } else { Scalar::zero() })
                    .collect()
            })
            .collect();
        ModelSpec { rank, level, cutoff }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 || self.rank > u8::MAX as usize {
            return Err(Error::Precondition(format!("rank {} out of range", self.rank)));
        }
        if self.cutoff < 2 {
            return Err(Error::Precondition("cutoff must be at least 2".into()));
        }
        if self.level.len() != self.rank || self.level.iter().any(|r| r.len() != self.rank) {
            return Err(Error::Precondition("level matrix must be rank x rank".into()));
        }
        for f in 0..self.rank {
            for g in 0..self.rank {
                if self.level[f][g] != self.level[g][f] {
                    return Err(Error::Precondition("level matrix must be symmetric".into()));
                }
            }
        }
        let det = Matrix::from_rows(self.level.clone())?.determinant()?;
        if det.is_zero() {
            return Err(Error::Precondition("level matrix must be nondegenerate".into()));
        }
        Ok(())
    }
}

pub(crate) type ProductKey = (FockMonomial, i64, FockMonomial);

/// A free-boson model with its degree bases precomputed up to the cutoff.
#[derive(Debug)]
pub struct Model {
    spec: ModelSpec,
    bases: Vec<Vec<FockMonomial>>,
    index: Vec<HashMap<FockMonomial, usize>>,
    pub(crate) product_cache: RwLock<HashMap<ProductKey, FockState>>,
}

impl Model {
    pub fn new(spec: ModelSpec) -> Result<Self> {
        spec.validate()?;
        let bases: Vec<Vec<FockMonomial>> = (0..=spec.cutoff).map(|m| enumerate_monomials(spec.rank, m)).collect();
        let index = bases
            .iter()
            .map(|b| b.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect())
            .collect();
        Ok(Model {
            spec,
            bases,
            index,
            product_cache: RwLock::new(HashMap::new()),
        })
    }

    /// Rank-one model at level 1.
    pub fn rank_one(cutoff: usize) -> Result<Self> {
        Model::new(ModelSpec::diagonal(1, Scalar::one(), cutoff))
    }

    pub fn diagonal(rank: usize, level: Scalar, cutoff: usize) -> Result<Self> {
        Model::new(ModelSpec::diagonal(rank, level, cutoff))
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn rank(&self) -> usize {
        self.spec.rank
    }

    pub fn cutoff(&self) -> usize {
        self.spec.cutoff
    }

    pub fn level(&self, f: usize, g: usize) -> &Scalar {
        &self.spec.level[f][g]
    }

    pub(crate) fn check_degree(&self, op: &'static str, degree: usize) -> Result<()> {
        if degree > self.spec.cutoff {
            Err(Error::CutoffExceeded {
                op,
                degree,
                cutoff: self.spec.cutoff,
            })
        } else {
            Ok(())
        }
    }

    pub fn vacuum(&self) -> FockState {
        FockState::from_monomial(FockMonomial::vacuum())
    }

    /// The weight-one generator `a{f}[-1]|0>`.
    pub fn generator(&self, flavor: usize) -> FockState {
        assert!(flavor < self.rank(), "flavor out of range");
        FockState::from_monomial(FockMonomial::from_sorted(vec![Factor::new(flavor as u8, 1)]))
    }

    pub fn basis(&self, m: usize) -> Result<&[FockMonomial]> {
        self.check_degree("basis", m)?;
        Ok(&self.bases[m])
    }

    pub fn dim(&self, m: usize) -> Result<usize> {
        Ok(self.basis(m)?.len())
    }

    pub fn basis_states(&self, m: usize) -> Result<Vec<FockState>> {
        Ok(self.basis(m)?.iter().cloned().map(FockState::from_monomial).collect())
    }

    pub fn full_space(&self, m: usize) -> Result<Subspace> {
        Ok(Subspace::full(m, self.dim(m)?))
    }

    /// Coordinates of a state that is homogeneous of degree `m` (or zero).
    pub fn to_vector(&self, a: &FockState, m: usize) -> Result<SparseVec> {
        self.check_degree("to_vector", m)?;
        let idx = &self.index[m];
        let mut pairs = Vec::with_capacity(a.len());
        for (mono, c) in a.terms() {
            let i = idx
                .get(mono)
                .ok_or_else(|| Error::Structural(format!("{mono} is not a basis monomial of degree {m}")))?;
            pairs.push((*i, c.clone()));
        }
        Ok(SparseVec::from_pairs(pairs))
    }

    pub fn from_vector(&self, v: &SparseVec, m: usize) -> Result<FockState> {
        let basis = self.basis(m)?;
        let mut s = FockState::zero();
        for (i, c) in v.entries() {
            let mono = basis
                .get(*i)
                .ok_or_else(|| Error::Structural(format!("index {i} out of range")))?;
            s.add_term(mono.clone(), c.clone());
        }
        Ok(s)
    }

    /// Translation operator: Leibniz rule with `[d, a_{-n}] = n a_{-n-1}`.
    pub fn derivative(&self, a: &FockState) -> Result<FockState> {
        if let Some(d) = a.max_degree() {
            self.check_degree("derivative", d + 1)?;
        }
        let mut out = FockState::zero();
        for (mono, c) in a.terms() {
            for (i, fac) in mono.factors().iter().enumerate() {
                let raised = mono.without_index(i).with_factor(Factor::new(fac.flavor, fac.mode + 1));
                out.add_term(raised, c * int(fac.mode as i64));
            }
        }
        Ok(out)
    }

    pub fn derivative_n(&self, a: &FockState, k: usize) -> Result<FockState> {
        let mut s = a.clone();
        for _ in 0..k {
            s = self.derivative(&s)?;
        }
        Ok(s)
    }

    /// Action of `a^flavor_n`.
    pub fn mode_action(&self, flavor: usize, n: i64, a: &FockState) -> Result<FockState> {
        if flavor >= self.rank() {
            return Err(Error::Structural(format!("flavor {flavor} out of range")));
        }
        if n < 0 {
            if let Some(d) = a.max_degree() {
                self.check_degree("mode_action", d + (-n) as usize)?;
            }
        }
        let mut out = FockState::zero();
        for (mono, c) in a.terms() {
            out.add_scaled(&self.mode_on_monomial(flavor, n, mono), c);
        }
        Ok(out)
    }

    pub(crate) fn mode_on_monomial(&self, flavor: usize, n: i64, mono: &FockMonomial) -> FockState {
        use std::cmp::Ordering::*;
        match n.cmp(&0) {
            Equal => FockState::zero(),
            Less => FockState::from_monomial(mono.with_factor(Factor::new(flavor as u8, (-n) as u32))),
            Greater => {
                let mut out = FockState::zero();
                for (i, fac) in mono.factors().iter().enumerate() {
                    if fac.mode as i64 != n {
                        continue;
                    }
                    let k = self.level(flavor, fac.flavor as usize);
                    if k.is_zero() {
                        continue;
                    }
                    out.add_term(mono.without_index(i), int(n) * k);
                }
                out
            }
        }
    }

    /// Inverse of the level matrix.
    pub fn inverse_level(&self) -> Vec<Vec<Scalar>> {
        let r = self.rank();
        let m = Matrix::from_rows(self.spec.level.clone()).expect("square");
        let rhs: Vec<SparseVec> = (0..r).map(SparseVec::unit).collect();
        let x = crate::linalg::solve(&m, &rhs)
            .expect("shapes agree")
            .expect("level is nondegenerate");
        (0..r).map(|i| (0..r).map(|j| x[i].get(j)).collect()).collect()
    }
}

/// All weight-`m` monomials for `rank` flavors, in canonical sorted order.
pub fn enumerate_monomials(rank: usize, m: usize) -> Vec<FockMonomial> {
    fn go(rank: usize, remaining: usize, min: Option<Factor>, acc: &mut Vec<Factor>, out: &mut Vec<FockMonomial>) {
        if remaining == 0 {
            out.push(FockMonomial::from_sorted(acc.clone()));
            return;
        }
        for flavor in 0..rank as u8 {
            for mode in (1..=remaining as u32).rev() {
                let f = Factor::new(flavor, mode);
                if min.is_some_and(|lo| f < lo) {
                    continue;
                }
                acc.push(f);
                go(rank, remaining - mode as usize, Some(f), acc, out);
                acc.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(rank, m, None, &mut Vec::new(), &mut out);
    out.sort();
    out
}
