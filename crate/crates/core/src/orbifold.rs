//! Finite groups of flavor rotations, the averaging projector onto
//! invariants, greedy strong-generator search and the rewriting of
//! invariants through invariant coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::diffcomm::{DiffAlgebra, GrowthReport};
use crate::error::{Error, Result};
use crate::fock::{Factor, FockMonomial, FockState, Model};
use crate::lifilt::{reachable_family, strong_gen_test_within, Filtration, StrongGenReport};
use crate::linalg::{format_scalar, int, solve_combination, GradedFamily, Matrix, Scalar, Subspace};
use crate::par::{self, Strategy};

const MAX_GROUP_ORDER: usize = 4096;

/// A finite group acting on the flavors by rational matrices that preserve
/// the level form; `g(a^f) = sum_h M[h][f] a^h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupAction {
    rank: usize,
    elements: Vec<Matrix>,
}

impl GroupAction {
    /// Closure of `generators` under composition.
    pub fn generated_by(model: &Model, generators: &[Matrix]) -> Result<Self> {
        let rank = model.rank();
        let level = Matrix::from_rows(
            (0..rank)
                .map(|f| (0..rank).map(|g| model.level(f, g).clone()).collect())
                .collect(),
        )?;
        for g in generators {
            if g.rows() != rank || g.cols() != rank {
                return Err(Error::DimensionMismatch {
                    expected: rank,
                    found: g.rows(),
                });
            }
            if g.transpose().mul(&level)?.mul(g)? != level {
                return Err(Error::Structural(
                    "group element does not preserve the level form".into(),
                ));
            }
        }
        let mut elements = vec![Matrix::identity(rank)];
        let mut frontier = elements.clone();
        while let Some(h) = frontier.pop() {
            for g in generators {
                let p = g.mul(&h)?;
                if !elements.contains(&p) {
                    if elements.len() == MAX_GROUP_ORDER {
                        return Err(Error::Structural("generated group is too large or infinite".into()));
                    }
                    elements.push(p.clone());
                    frontier.push(p);
                }
            }
        }
        elements.sort_by_key(|m| format!("{m:?}"));
        Ok(GroupAction { rank, elements })
    }

    pub fn trivial(model: &Model) -> Result<Self> {
        GroupAction::generated_by(model, &[])
    }

    /// `a^f -> -a^f` on every flavor.
    pub fn sign(model: &Model) -> Result<Self> {
        let n = model.rank();
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, int(-1));
        }
        GroupAction::generated_by(model, &[m])
    }

    /// Exchange of flavors 0 and 1.
    pub fn flavor_swap(model: &Model) -> Result<Self> {
        let n = model.rank();
        if n < 2 {
            return Err(Error::Precondition("flavor swap needs rank >= 2".into()));
        }
        let mut m = Matrix::identity(n);
        m.set(0, 0, int(0));
        m.set(1, 1, int(0));
        m.set(0, 1, int(1));
        m.set(1, 0, int(1));
        GroupAction::generated_by(model, &[m])
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Matrix] {
        &self.elements
    }

    /// `g(a)` for the element with index `g`.
    pub fn act(&self, g: usize, a: &FockState) -> FockState {
        let m = &self.elements[g];
        let mut out = FockState::zero();
        for (mono, c) in a.terms() {
            // expand the product of the transformed factors
            let mut partial: Vec<(Vec<Factor>, Scalar)> = vec![(Vec::new(), c.clone())];
            for f in mono.factors() {
                let mut next = Vec::new();
                for (fs, coeff) in &partial {
                    for h in 0..self.rank {
                        let e = m.get(h, f.flavor as usize);
                        if e.is_zero() {
                            continue;
                        }
                        let mut fs2 = fs.clone();
                        fs2.push(Factor::new(h as u8, f.mode));
                        next.push((fs2, coeff * e));
                    }
                }
                partial = next;
            }
            for (fs, coeff) in partial {
                let mono = FockMonomial::new(fs).expect("modes stay positive");
                out.add_term(mono, coeff);
            }
        }
        out
    }

    /// `(1/|G|) sum_g g(a)`.
    pub fn reynolds(&self, a: &FockState) -> FockState {
        let mut out = FockState::zero();
        for g in 0..self.order() {
            out = out.add(&self.act(g, a));
        }
        out.scale(&Scalar::new(1.into(), (self.order() as i64).into()))
    }

    /// Degreewise image of the averaging projector.
    pub fn invariant_family(&self, model: &Model) -> Result<GradedFamily> {
        let mut pieces = Vec::new();
        for m in 0..=model.cutoff() {
            let mut s = Subspace::zero(m, model.dim(m)?);
            for x in model.basis_states(m)? {
                let r = self.reynolds(&x);
                if !r.is_zero() {
                    s.insert(&model.to_vector(&r, m)?)?;
                }
            }
            pieces.push(s);
        }
        GradedFamily::new(pieces)
    }

    /// Invariant dimensions from the averaged graded traces
    /// `prod_n 1 / det(1 - q^n g)`, expanded through the cutoff.
    pub fn character_dims(&self, cutoff: usize) -> Result<Vec<Scalar>> {
        let mut total = vec![Scalar::zero(); cutoff + 1];
        for g in &self.elements {
            // log of the graded trace: sum_{n,k} tr(g^k) q^{nk} / k
            let mut log = vec![Scalar::zero(); cutoff + 1];
            let mut power = Matrix::identity(self.rank);
            for k in 1..=cutoff {
                power = power.mul(g)?;
                let mut tr = Scalar::zero();
                for i in 0..self.rank {
                    tr += power.get(i, i);
                }
                let term = tr / int(k as i64);
                let mut e = k;
                while e <= cutoff {
                    log[e] += &term;
                    e += k;
                }
            }
            let series = exp_series(&log);
            for (t, s) in total.iter_mut().zip(series) {
                *t += s;
            }
        }
        let order = int(self.order() as i64);
        Ok(total.into_iter().map(|t| t / &order).collect())
    }
}

/// `exp(s)` for a power series with `s_0 = 0`: `m e_m = sum_j j s_j e_{m-j}`.
fn exp_series(s: &[Scalar]) -> Vec<Scalar> {
    let mut e = vec![Scalar::zero(); s.len()];
    e[0] = Scalar::one();
    for m in 1..s.len() {
        let mut acc = Scalar::zero();
        for j in 1..=m {
            acc += int(j as i64) * &s[j] * &e[m - j];
        }
        e[m] = acc / int(m as i64);
    }
    e
}

#[derive(Clone, Debug, Serialize)]
pub struct LawTally {
    pub checked: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReynoldsLaws {
    pub automorphism: LawTally,
    pub idempotent: LawTally,
    pub commutes_with_d: LawTally,
    /// `R(uv) = u R(v)`
    pub left_module: LawTally,
    /// `R(vu) = R(v) u`
    pub right_module: LawTally,
    pub pass: bool,
}

/// Automorphism and projector laws on basis elements with total degree at
/// most `max_degree`; `u` runs over a basis of the invariants.
pub fn reynolds_laws(
    model: &Model,
    group: &GroupAction,
    max_degree: usize,
    strategy: Strategy,
) -> Result<ReynoldsLaws> {
    let max_degree = max_degree.min(model.cutoff());
    let inv = group.invariant_family(model)?;
    let mut basis = Vec::new();
    let mut invariants = Vec::new();
    for m in 0..=max_degree {
        for s in model.basis_states(m)? {
            basis.push((m, s));
        }
        for s in model.family_states(&inv, m)? {
            invariants.push((m, s));
        }
    }
    let mut automorphism = LawTally { checked: 0, failed: 0 };
    let mut idempotent = LawTally { checked: 0, failed: 0 };
    let mut commutes_with_d = LawTally { checked: 0, failed: 0 };
    for g in 0..group.order() {
        automorphism.checked += 1;
        if group.act(g, &model.vacuum()) != model.vacuum() {
            automorphism.failed += 1;
        }
    }
    for (m, v) in &basis {
        let r = group.reynolds(v);
        idempotent.checked += 1;
        if group.reynolds(&r) != r {
            idempotent.failed += 1;
        }
        if *m < model.cutoff() {
            commutes_with_d.checked += 1;
            if group.reynolds(&model.derivative(v)?) != model.derivative(&r)? {
                commutes_with_d.failed += 1;
            }
            for g in 0..group.order() {
                automorphism.checked += 1;
                if group.act(g, &model.derivative(v)?) != model.derivative(&group.act(g, v))? {
                    automorphism.failed += 1;
                }
            }
        }
    }
    let mut pairs = Vec::new();
    for (i, (ma, _)) in basis.iter().enumerate() {
        for (j, (mb, _)) in basis.iter().enumerate() {
            if ma + mb <= max_degree {
                pairs.push((i, j));
            }
        }
    }
    let auto = par::try_map(strategy, &pairs, |&(i, j)| -> Result<(usize, usize)> {
        let (a, b) = (&basis[i].1, &basis[j].1);
        let ab = model.nop(a, b)?;
        let mut failed = 0;
        for g in 0..group.order() {
            if group.act(g, &ab) != model.nop(&group.act(g, a), &group.act(g, b))? {
                failed += 1;
            }
        }
        Ok((group.order(), failed))
    })?;
    for (c, f) in auto {
        automorphism.checked += c;
        automorphism.failed += f;
    }
    let mut mixed = Vec::new();
    for (i, (mu, _)) in invariants.iter().enumerate() {
        for (j, (mv, _)) in basis.iter().enumerate() {
            if mu + mv <= max_degree {
                mixed.push((i, j));
            }
        }
    }
    let module = par::try_map(strategy, &mixed, |&(i, j)| -> Result<(bool, bool)> {
        let (u, v) = (&invariants[i].1, &basis[j].1);
        let rv = group.reynolds(v);
        let left = group.reynolds(&model.nop(u, v)?) == model.nop(u, &rv)?;
        let right = group.reynolds(&model.nop(v, u)?) == model.nop(&rv, u)?;
        Ok((left, right))
    })?;
    let left_module = LawTally {
        checked: module.len(),
        failed: module.iter().filter(|(l, _)| !l).count(),
    };
    let right_module = LawTally {
        checked: module.len(),
        failed: module.iter().filter(|(_, r)| !r).count(),
    };
    let pass = [
        &automorphism,
        &idempotent,
        &commutes_with_d,
        &left_module,
        &right_module,
    ]
    .iter()
    .all(|t| t.failed == 0);
    Ok(ReynoldsLaws {
        automorphism,
        idempotent,
        commutes_with_d,
        left_module,
        right_module,
        pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchStep {
    pub degree: usize,
    pub invariant_dim: usize,
    pub reachable_dim: usize,
    pub new_generators: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchReport {
    pub max_gen_degree: usize,
    pub generators: Vec<String>,
    pub generator_degrees: Vec<usize>,
    pub steps: Vec<SearchStep>,
    pub test: StrongGenReport,
}

/// Greedy strong generators of the invariants: at each degree up to
/// `max_gen_degree`, a complement of the reachable invariants is added.
/// The resulting set is then tested against the invariants through the cutoff.
pub fn strong_gen_search(
    model: &Model,
    group: &GroupAction,
    max_gen_degree: usize,
) -> Result<(Vec<FockState>, SearchReport)> {
    if max_gen_degree > model.cutoff() {
        return Err(Error::Precondition("max_gen_degree must not exceed the cutoff".into()));
    }
    let inv = group.invariant_family(model)?;
    let mut xs: Vec<FockState> = Vec::new();
    let mut steps = Vec::new();
    for m in 1..=max_gen_degree {
        let reach = reachable_family(model, &xs)?;
        let r = reach.piece(m).intersect(inv.piece(m))?;
        let fresh = r.complement_in(inv.piece(m))?;
        steps.push(SearchStep {
            degree: m,
            invariant_dim: inv.piece(m).dim(),
            reachable_dim: r.dim(),
            new_generators: fresh.len(),
        });
        for v in &fresh {
            xs.push(model.from_vector(v, m)?);
        }
    }
    let filt = Filtration::of_subalgebra(model, &inv)?;
    let test = strong_gen_test_within(model, &filt, &xs, &inv)?;
    let report = SearchReport {
        max_gen_degree,
        generators: xs.iter().map(ToString::to_string).collect(),
        generator_degrees: xs.iter().map(|x| x.degree().unwrap_or(0)).collect(),
        steps,
        test,
    };
    Ok((xs, report))
}

/// Which side of `d^k x` the coefficient multiplies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffSide {
    /// `:r (d^k x):`
    Left,
    /// `:(d^k x) s:`
    Right,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessTerm {
    pub coeff: FockState,
    pub x: usize,
    pub d: usize,
    pub side: CoeffSide,
}

fn term_value(model: &Model, xs: &[FockState], t: &WitnessTerm, coeff: &FockState) -> Result<FockState> {
    let y = model.derivative_n(&xs[t.x], t.d)?;
    match t.side {
        CoeffSide::Left => model.nop(coeff, &y),
        CoeffSide::Right => model.nop(&y, coeff),
    }
}

fn witness_value(model: &Model, xs: &[FockState], w: &[WitnessTerm]) -> Result<FockState> {
    let mut out = FockState::zero();
    for t in w {
        out = out.add(&term_value(model, xs, t, &t.coeff)?);
    }
    Ok(out)
}

/// Expresses `u` in the span of `:(d^k x) v:` and `:v (d^k x):`, grouping
/// the coefficients of each `(x, k, side)` into one state.
pub fn xv_vx_membership(model: &Model, u: &FockState, xs: &[FockState]) -> Result<Option<Vec<WitnessTerm>>> {
    if u.is_zero() {
        return Ok(Some(Vec::new()));
    }
    let m = u
        .degree()
        .ok_or_else(|| Error::Precondition(format!("{u} is not homogeneous")))?;
    let mut columns = Vec::new();
    let mut labels = Vec::new();
    for (i, x) in xs.iter().enumerate() {
        let dx = x
            .degree()
            .ok_or_else(|| Error::Precondition(format!("{x} is not homogeneous")))?;
        if dx == 0 || dx > m {
            continue;
        }
        for d in 0..=(m - dx) {
            let y = model.derivative_n(x, d)?;
            if y.is_zero() {
                break;
            }
            let rest = m - dx - d;
            for (j, v) in model.basis_states(rest)?.iter().enumerate() {
                for side in [CoeffSide::Left, CoeffSide::Right] {
                    let p = match side {
                        CoeffSide::Left => model.nop(v, &y)?,
                        CoeffSide::Right => model.nop(&y, v)?,
                    };
                    columns.push(model.to_vector(&p, m)?);
                    labels.push((i, d, side, j));
                }
            }
        }
    }
    let Some(coeffs) = solve_combination(&columns, &model.to_vector(u, m)?, model.dim(m)?)? else {
        return Ok(None);
    };
    let mut grouped: BTreeMap<(usize, usize, CoeffSide), FockState> = BTreeMap::new();
    for ((i, d, side, j), c) in labels.into_iter().zip(coeffs) {
        if c.is_zero() {
            continue;
        }
        let rest = m - xs[i].degree().unwrap_or(0) - d;
        let v = &model.basis_states(rest)?[j];
        grouped
            .entry((i, d, side))
            .or_insert_with(FockState::zero)
            .add_scaled(v, &c);
    }
    Ok(Some(
        grouped
            .into_iter()
            .filter(|(_, s)| !s.is_zero())
            .map(|((x, d, side), coeff)| WitnessTerm { coeff, x, d, side })
            .collect(),
    ))
}

/// Normally ordered expression in the elements of `X` and scalars.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    /// A multiple of the vacuum.
    Scalar(Scalar),
    /// `d^d x_index`
    Gen {
        index: usize,
        d: usize,
    },
    Nop(Box<Expr>, Box<Expr>),
    Sum(Vec<Expr>),
    /// An invariant for which no witness was found.
    Unresolved(FockState),
}

impl Expr {
    pub fn evaluate(&self, model: &Model, xs: &[FockState]) -> Result<FockState> {
        Ok(match self {
            Expr::Scalar(c) => model.vacuum().scale(c),
            Expr::Gen { index, d } => model.derivative_n(&xs[*index], *d)?,
            Expr::Nop(a, b) => model.nop(&a.evaluate(model, xs)?, &b.evaluate(model, xs)?)?,
            Expr::Sum(parts) => {
                let mut out = FockState::zero();
                for p in parts {
                    out = out.add(&p.evaluate(model, xs)?);
                }
                out
            }
            Expr::Unresolved(s) => s.clone(),
        })
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Scalar(_) | Expr::Gen { .. } | Expr::Unresolved(_) => 0,
            Expr::Nop(a, b) => 1 + a.depth().max(b.depth()),
            Expr::Sum(parts) => parts.iter().map(Expr::depth).max().unwrap_or(0),
        }
    }

    /// Nested arrays: `["scalar", "p/q"]`, `["gen", i, d]`, `["nop", l, r]`,
    /// `["sum", ...]`, `["unresolved", state]`.
    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        match self {
            Expr::Scalar(c) => json!(["scalar", format_scalar(c)]),
            Expr::Gen { index, d } => json!(["gen", index, d]),
            Expr::Nop(a, b) => json!(["nop", a.to_json(), b.to_json()]),
            Expr::Sum(parts) => {
                let mut v = vec![json!("sum")];
                v.extend(parts.iter().map(Expr::to_json));
                serde_json::Value::Array(v)
            }
            Expr::Unresolved(s) => json!(["unresolved", s.to_string()]),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Scalar(c) => write!(f, "{}", format_scalar(c)),
            Expr::Gen { index, d: 0 } => write!(f, "x{index}"),
            Expr::Gen { index, d } => write!(f, "d^{d} x{index}"),
            Expr::Nop(a, b) => write!(f, ":({a})({b}):"),
            Expr::Sum(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
            Expr::Unresolved(s) => write!(f, "?[{s}]"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Rewrite {
    pub tree: Expr,
    /// Invariants met during the recursion that admit no witness.
    pub unresolved: Vec<FockState>,
    /// The tree evaluates back to `u`.
    pub verified: bool,
}

impl Rewrite {
    pub fn complete(&self) -> bool {
        self.unresolved.is_empty()
    }
}

/// Rewrites the invariant `u` through `X` given a witness
/// `u = sum :r (d^k x): + :(d^k x) s:`. Coefficients are replaced by their
/// averages, which keeps the sum equal to `u`, and the averaged
/// coefficients are rewritten recursively in lower degree.
pub fn hilbert_rewrite(
    model: &Model,
    group: &GroupAction,
    u: &FockState,
    xs: &[FockState],
    witness: &[WitnessTerm],
) -> Result<Rewrite> {
    let m = u
        .degree()
        .ok_or_else(|| Error::Precondition("hilbert_rewrite needs a nonzero homogeneous state".into()))?;
    if m == 0 {
        return Err(Error::Precondition("hilbert_rewrite needs positive degree".into()));
    }
    if group.reynolds(u) != *u {
        return Err(Error::Precondition(format!("{u} is not invariant")));
    }
    for x in xs {
        if group.reynolds(x) != *x {
            return Err(Error::Precondition(format!("generator {x} is not invariant")));
        }
    }
    let mut unresolved = Vec::new();
    let tree = rewrite_with(model, group, u, xs, witness, &mut unresolved)?;
    let verified = tree.evaluate(model, xs)? == *u;
    Ok(Rewrite {
        tree,
        unresolved,
        verified,
    })
}

fn rewrite_with(
    model: &Model,
    group: &GroupAction,
    u: &FockState,
    xs: &[FockState],
    witness: &[WitnessTerm],
    unresolved: &mut Vec<FockState>,
) -> Result<Expr> {
    if witness_value(model, xs, witness)? != *u {
        return Err(Error::Witness(format!("witness does not evaluate to {u}")));
    }
    let averaged: Vec<FockState> = witness.iter().map(|t| group.reynolds(&t.coeff)).collect();
    let mut check = FockState::zero();
    for (t, c) in witness.iter().zip(&averaged) {
        check = check.add(&term_value(model, xs, t, c)?);
    }
    if check != *u {
        return Err(Error::Consistency(format!(
            "averaged witness no longer evaluates to {u}"
        )));
    }
    let mut parts = Vec::new();
    for (t, c) in witness.iter().zip(&averaged) {
        if c.is_zero() {
            continue;
        }
        let coeff = rewrite_invariant(model, group, c, xs, unresolved)?;
        let gen = Expr::Gen { index: t.x, d: t.d };
        parts.push(match t.side {
            CoeffSide::Left => Expr::Nop(Box::new(coeff), Box::new(gen)),
            CoeffSide::Right => Expr::Nop(Box::new(gen), Box::new(coeff)),
        });
    }
    Ok(if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        Expr::Sum(parts)
    })
}

fn rewrite_invariant(
    model: &Model,
    group: &GroupAction,
    c: &FockState,
    xs: &[FockState],
    unresolved: &mut Vec<FockState>,
) -> Result<Expr> {
    let Some(d) = c.degree() else {
        return Err(Error::Consistency("averaged coefficient is not homogeneous".into()));
    };
    if d == 0 {
        return Ok(Expr::Scalar(c.vacuum_coefficient()));
    }
    match xv_vx_membership(model, c, xs)? {
        Some(w) => rewrite_with(model, group, c, xs, &w, unresolved),
        None => {
            unresolved.push(c.clone());
            Ok(Expr::Unresolved(c.clone()))
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ImplicationCheck {
    pub strong_generation: bool,
    pub positive_part_in_xv: bool,
    pub first_gap: Option<usize>,
    pub pass: bool,
}

/// If `X` strongly generates the invariants through the cutoff, then every
/// positive-degree invariant lies in `XV`.
pub fn implication_check(model: &Model, group: &GroupAction, xs: &[FockState]) -> Result<ImplicationCheck> {
    let inv = group.invariant_family(model)?;
    let filt = Filtration::of_subalgebra(model, &inv)?;
    let test = strong_gen_test_within(model, &filt, xs, &inv)?;
    let xv = crate::ideals::xv_span(model, xs)?;
    let mut first_gap = None;
    for m in 1..=model.cutoff() {
        if !xv.piece(m).contains(inv.piece(m))? {
            first_gap = Some(m);
            break;
        }
    }
    let positive_part_in_xv = first_gap.is_none();
    Ok(ImplicationCheck {
        strong_generation: test.pass,
        positive_part_in_xv,
        first_gap,
        pass: !test.pass || positive_part_in_xv,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ContrastReport {
    /// Greedy search on the invariants of the model.
    pub noncommutative: SearchReport,
    /// Greedy generator growth on the invariants of the polynomial algebra.
    pub commutative: GrowthReport,
    /// The first terminates (finite set passing the test), the second keeps
    /// needing generators at every even weight.
    pub dichotomy: bool,
}

pub fn contrast_report(
    model: &Model,
    group: &GroupAction,
    max_gen_degree: usize,
    commutative_cutoff: usize,
) -> Result<ContrastReport> {
    let (_, noncommutative) = strong_gen_search(model, group, max_gen_degree)?;
    let commutative = DiffAlgebra::new(commutative_cutoff).generator_growth()?;
    let dichotomy = noncommutative.test.pass && commutative.grows_at_every_even_weight();
    Ok(ContrastReport {
        noncommutative,
        commutative,
        dichotomy,
    })
}
