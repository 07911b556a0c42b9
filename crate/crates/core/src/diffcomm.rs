//! The differential polynomial algebra `C[u, u', u'', ...]` graded by weight
//! `wt u^(n) = n + 1`, its sign automorphism and generator growth of the
//! invariant subalgebra.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{format_scalar, int, GradedFamily, Scalar, SparseVec, Subspace};

/// `prod (u^(n))^k`, stored as sorted `(n, k)` pairs with `k > 0`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DiffMonomial {
    exps: Vec<(u32, u32)>,
}

impl DiffMonomial {
    pub fn one() -> Self {
        DiffMonomial::default()
    }

    /// Product of the variables `u^(n)` for `n` in `orders` (with repetition).
    pub fn from_orders(orders: &[u32]) -> Self {
        let mut map: BTreeMap<u32, u32> = BTreeMap::new();
        for &n in orders {
            *map.entry(n).or_default() += 1;
        }
        DiffMonomial {
            exps: map.into_iter().collect(),
        }
    }

    pub fn exponents(&self) -> &[(u32, u32)] {
        &self.exps
    }

    pub fn weight(&self) -> usize {
        self.exps.iter().map(|&(n, k)| ((n + 1) * k) as usize).sum()
    }

    /// Number of variables counted with multiplicity.
    pub fn length(&self) -> usize {
        self.exps.iter().map(|&(_, k)| k as usize).sum()
    }

    pub fn mul(&self, other: &DiffMonomial) -> DiffMonomial {
        let mut map: BTreeMap<u32, u32> = self.exps.iter().copied().collect();
        for &(n, k) in &other.exps {
            *map.entry(n).or_default() += k;
        }
        DiffMonomial {
            exps: map.into_iter().collect(),
        }
    }

    fn change(&self, n: u32, delta: i32) -> DiffMonomial {
        let mut map: BTreeMap<u32, u32> = self.exps.iter().copied().collect();
        let e = map.entry(n).or_default();
        *e = (*e as i32 + delta) as u32;
        if *e == 0 {
            map.remove(&n);
        }
        DiffMonomial {
            exps: map.into_iter().collect(),
        }
    }
}

impl fmt::Display for DiffMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exps.is_empty() {
            return write!(f, "1");
        }
        for (i, &(n, k)) in self.exps.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "u{n}")?;
            if k > 1 {
                write!(f, "^{k}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct DiffPoly {
    terms: BTreeMap<DiffMonomial, Scalar>,
}

impl DiffPoly {
    pub fn zero() -> Self {
        DiffPoly::default()
    }

    pub fn one() -> Self {
        DiffPoly::monomial(DiffMonomial::one())
    }

    pub fn monomial(m: DiffMonomial) -> Self {
        let mut p = DiffPoly::zero();
        p.add_term(m, Scalar::one());
        p
    }

    /// The variable `u^(n)`.
    pub fn variable(n: u32) -> Self {
        DiffPoly::monomial(DiffMonomial::from_orders(&[n]))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&DiffMonomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: DiffMonomial, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    pub fn mul(&self, other: &DiffPoly) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, a) in &self.terms {
            for (n, b) in &other.terms {
                out.add_term(m.mul(n), a * b);
            }
        }
        out
    }

    /// Leibniz extension of `u^(n) -> u^(n+1)`.
    pub fn derivative(&self) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            for &(n, k) in m.exponents() {
                let next = m.change(n, -1).change(n + 1, 1);
                out.add_term(next, c * int(k as i64));
            }
        }
        out
    }

    /// `u -> -u`: each monomial picks up `(-1)^length`.
    pub fn sigma(&self) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            let v = if m.length() % 2 == 0 { c.clone() } else { -c.clone() };
            out.add_term(m.clone(), v);
        }
        out
    }

    /// `(p + sigma p) / 2`.
    pub fn reynolds(&self) -> DiffPoly {
        self.add(&self.sigma()).scale(&Scalar::new(1.into(), 2.into()))
    }

    /// Weight when homogeneous; `None` for zero or mixed polynomials.
    pub fn weight(&self) -> Option<usize> {
        let mut ws = self.terms.keys().map(DiffMonomial::weight);
        let w = ws.next()?;
        ws.all(|x| x == w).then_some(w)
    }

    pub fn max_weight(&self) -> Option<usize> {
        self.terms.keys().map(DiffMonomial::weight).max()
    }
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}*{}", format_scalar(c), m)?;
        }
        Ok(())
    }
}

/// Monomial bases of `A` by weight, up to a cutoff.
#[derive(Clone, Debug)]
pub struct DiffAlgebra {
    cutoff: usize,
    bases: Vec<Vec<DiffMonomial>>,
    index: Vec<HashMap<DiffMonomial, usize>>,
}

impl DiffAlgebra {
    pub fn new(cutoff: usize) -> Self {
        let bases: Vec<Vec<DiffMonomial>> = (0..=cutoff).map(monomials_of_weight).collect();
        let index = bases
            .iter()
            .map(|b| b.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect())
            .collect();
        DiffAlgebra { cutoff, bases, index }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self, w: usize) -> usize {
        self.bases.get(w).map_or(0, Vec::len)
    }

    pub fn basis(&self, w: usize) -> Result<&[DiffMonomial]> {
        self.check(w, "basis")?;
        Ok(&self.bases[w])
    }

    fn check(&self, w: usize, op: &'static str) -> Result<()> {
        if w > self.cutoff {
            return Err(Error::CutoffExceeded {
                op,
                degree: w,
                cutoff: self.cutoff,
            });
        }
        Ok(())
    }

    /// `d`, refusing results above the cutoff weight.
    pub fn d(&self, p: &DiffPoly) -> Result<DiffPoly> {
        if let Some(w) = p.max_weight() {
            self.check(w + 1, "d")?;
        }
        Ok(p.derivative())
    }

    pub fn mul(&self, p: &DiffPoly, q: &DiffPoly) -> Result<DiffPoly> {
        if let (Some(a), Some(b)) = (p.max_weight(), q.max_weight()) {
            self.check(a + b, "diffcomm_mul")?;
        }
        Ok(p.mul(q))
    }

    pub fn to_vector(&self, p: &DiffPoly, w: usize) -> Result<SparseVec> {
        self.check(w, "to_vector")?;
        let mut pairs = Vec::new();
        for (m, c) in p.terms() {
            let i = self.index[w].get(m).ok_or(Error::DimensionMismatch {
                expected: w,
                found: m.weight(),
            })?;
            pairs.push((*i, c.clone()));
        }
        Ok(SparseVec::from_pairs(pairs))
    }

    pub fn from_vector(&self, v: &SparseVec, w: usize) -> Result<DiffPoly> {
        self.check(w, "from_vector")?;
        let mut p = DiffPoly::zero();
        for (i, c) in v.entries() {
            let m = self.bases[w].get(*i).ok_or(Error::DimensionMismatch {
                expected: self.bases[w].len(),
                found: *i + 1,
            })?;
            p.add_term(m.clone(), c.clone());
        }
        Ok(p)
    }

    /// The sigma-invariant subspace in weight `w`: even-length monomials.
    pub fn invariant_space(&self, w: usize) -> Result<Subspace> {
        let units: Vec<SparseVec> = self
            .basis(w)?
            .iter()
            .enumerate()
            .filter(|(_, m)| m.length() % 2 == 0)
            .map(|(i, _)| SparseVec::unit(i))
            .collect();
        Subspace::span(w, self.dim(w), units.iter())
    }

    /// Weightwise span of all products of derivatives of elements of `gens`.
    pub fn diff_subalgebra_span(&self, gens: &[DiffPoly]) -> Result<GradedFamily> {
        let mut items: Vec<(usize, DiffPoly)> = Vec::new();
        for g in gens {
            let Some(w) = g.weight() else {
                if g.is_zero() {
                    continue;
                }
                return Err(Error::Precondition("generators must be homogeneous".into()));
            };
            if w == 0 {
                continue;
            }
            let mut y = g.clone();
            for k in 0..=(self.cutoff.saturating_sub(w)) {
                items.push((w + k, y.clone()));
                y = y.derivative();
            }
        }
        let mut spans: Vec<Subspace> = Vec::with_capacity(self.cutoff + 1);
        for w in 0..=self.cutoff {
            let mut s = Subspace::zero(w, self.dim(w));
            if w == 0 {
                s.insert(&self.to_vector(&DiffPoly::one(), 0)?)?;
            } else {
                for (iw, y) in &items {
                    if *iw > w {
                        continue;
                    }
                    let lower = &spans[w - iw];
                    for v in lower.basis() {
                        let p = y.mul(&self.from_vector(v, w - iw)?);
                        s.insert(&self.to_vector(&p, w)?)?;
                    }
                }
            }
            spans.push(s);
        }
        GradedFamily::new(spans)
    }

    /// Greedy differential generation of the sigma-invariants: at each weight
    /// the invariants outside the current subalgebra are added as new
    /// generators, taken as a complement basis in row-echelon order.
    pub fn generator_growth(&self) -> Result<GrowthReport> {
        let mut rows = Vec::new();
        let mut generators: Vec<DiffPoly> = Vec::new();
        // reachable[w] for the generators found so far
        let mut reachable: Vec<Subspace> = Vec::with_capacity(self.cutoff + 1);
        for w in 0..=self.cutoff {
            let inv = self.invariant_space(w)?;
            let mut s = Subspace::zero(w, self.dim(w));
            if w == 0 {
                s.insert(&self.to_vector(&DiffPoly::one(), 0)?)?;
            } else {
                for g in &generators {
                    let gw = g.weight().unwrap_or(0);
                    let mut y = g.clone();
                    let mut iw = gw;
                    while iw <= w {
                        for v in reachable[w - iw].basis() {
                            let p = y.mul(&self.from_vector(v, w - iw)?);
                            s.insert(&self.to_vector(&p, w)?)?;
                        }
                        y = y.derivative();
                        iw += 1;
                    }
                }
            }
            let reachable_dim = s.dim();
            let fresh = if w == 0 { Vec::new() } else { s.complement_in(&inv)? };
            for v in &fresh {
                s.insert(v)?;
                generators.push(self.from_vector(v, w)?);
            }
            rows.push(GrowthRow {
                weight: w,
                invariant_dim: inv.dim(),
                reachable_dim,
                new_generators: fresh.len(),
            });
            reachable.push(s);
        }
        Ok(GrowthReport {
            cutoff: self.cutoff,
            generators: generators.iter().map(ToString::to_string).collect(),
            rows,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthRow {
    pub weight: usize,
    pub invariant_dim: usize,
    pub reachable_dim: usize,
    pub new_generators: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub cutoff: usize,
    pub generators: Vec<String>,
    pub rows: Vec<GrowthRow>,
}

impl GrowthReport {
    pub fn total(&self) -> usize {
        self.rows.iter().map(|r| r.new_generators).sum()
    }

    /// Whether every even weight `2..=cutoff` needed a new generator.
    pub fn grows_at_every_even_weight(&self) -> bool {
        self.rows
            .iter()
            .filter(|r| r.weight >= 2 && r.weight % 2 == 0)
            .all(|r| r.new_generators >= 1)
    }
}

/// Per-weight count of even-length monomials.
pub fn invariant_dims(cutoff: usize) -> Vec<usize> {
    (0..=cutoff)
        .map(|w| monomials_of_weight(w).iter().filter(|m| m.length() % 2 == 0).count())
        .collect()
}

/// Monomials of weight `w`, in a fixed order (partitions of `w` with parts
/// `n + 1`, largest part first).
pub fn monomials_of_weight(w: usize) -> Vec<DiffMonomial> {
    fn go(rest: usize, max_part: usize, acc: &mut Vec<u32>, out: &mut Vec<DiffMonomial>) {
        if rest == 0 {
            out.push(DiffMonomial::from_orders(acc));
            return;
        }
        for part in (1..=max_part.min(rest)).rev() {
            acc.push(part as u32 - 1);
            go(rest - part, part, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    go(w, w, &mut Vec::new(), &mut out);
    out
}
