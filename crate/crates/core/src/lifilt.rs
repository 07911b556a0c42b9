//! Li's decreasing filtration `E_n`, ranks, the associated graded algebra and
//! strong-generation tests.
//!
//! `E_n ∩ V^m` is spanned by right-associated products of derivatives of the
//! weight-one generators whose derivative counts sum to at least `n`. The
//! audit in [`Filtration::check_laws`] re-multiplies every piece by every
//! other piece, which is what makes the generator-only construction agree
//! with the definition over arbitrary homogeneous factors.

use serde::Serialize;

use crate::diffcomm::{DiffAlgebra, DiffMonomial, DiffPoly};
use crate::error::{Error, Result};
use crate::fock::{FockState, Model};
use crate::linalg::{factorial, GradedFamily, SparseVec, Subspace};
use crate::par::{self, Strategy};

/// Pieces `E_n ∩ V^m` for `0 <= n <= m + 1 <= cutoff + 1`.
#[derive(Clone, Debug)]
pub struct Filtration {
    cutoff: usize,
    // pieces[m][n]; pieces[m][m + 1] is the zero space
    pieces: Vec<Vec<Subspace>>,
    // filtration of the whole space rather than of a subalgebra
    whole: bool,
}

impl Filtration {
    /// The filtration of `V`, generated by the weight-one fields.
    pub fn build(model: &Model) -> Result<Self> {
        let gens: Vec<(usize, FockState)> = (0..model.rank()).map(|f| (1, model.generator(f))).collect();
        Filtration::from_generators(model, &gens, true)
    }

    /// The filtration of a subalgebra `U` by its own derivatives, with all
    /// homogeneous elements of `U` as factors. Pieces live in the ambient
    /// coordinates of `V`; `E_0` is `U` itself.
    pub fn of_subalgebra(model: &Model, sub: &GradedFamily) -> Result<Self> {
        let mut gens = Vec::new();
        for m in 1..=model.cutoff().min(sub.cutoff()) {
            for s in states_of(model, sub.piece(m))? {
                gens.push((m, s));
            }
        }
        Filtration::from_generators(model, &gens, false)
    }

    fn from_generators(model: &Model, gens: &[(usize, FockState)], whole: bool) -> Result<Self> {
        let cutoff = model.cutoff();
        // derivatives of every factor, with weight and derivative order
        let mut heads: Vec<(usize, usize, FockState)> = Vec::new();
        for (k, g) in gens {
            let mut y = g.clone();
            for d in 0..=cutoff.saturating_sub(*k) {
                if y.is_zero() {
                    break;
                }
                heads.push((k + d, d, y.clone()));
                if k + d < cutoff {
                    y = model.derivative(&y)?;
                }
            }
        }
        let mut pieces: Vec<Vec<Subspace>> = Vec::with_capacity(cutoff + 1);
        let mut tails: Vec<Vec<Vec<FockState>>> = Vec::with_capacity(cutoff + 1);
        for m in 0..=cutoff {
            let dim = model.dim(m)?;
            let mut row = Vec::with_capacity(m + 2);
            for n in 0..=m + 1 {
                let mut s = Subspace::zero(m, dim);
                if m == 0 {
                    if n == 0 {
                        s.insert(&model.to_vector(&model.vacuum(), 0)?)?;
                    }
                } else {
                    for (w, d, head) in &heads {
                        if *w > m {
                            continue;
                        }
                        let lower = &tails[m - w];
                        let need = n.saturating_sub(*d);
                        if need >= lower.len() {
                            continue;
                        }
                        for tail in &lower[need] {
                            let p = model.nop(head, tail)?;
                            s.insert(&model.to_vector(&p, m)?)?;
                        }
                    }
                }
                row.push(s);
            }
            tails.push(row.iter().map(|s| states_of(model, s)).collect::<Result<_>>()?);
            pieces.push(row);
        }
        Ok(Filtration { cutoff, pieces, whole })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// `E_n ∩ V^m`; the whole space for `n <= 0`, zero for `n > m`.
    pub fn piece(&self, n: i64, m: usize) -> Result<&Subspace> {
        if m > self.cutoff {
            return Err(Error::CutoffExceeded {
                op: "en_span",
                degree: m,
                cutoff: self.cutoff,
            });
        }
        let row = &self.pieces[m];
        let idx = n.clamp(0, (row.len() - 1) as i64) as usize;
        Ok(&row[idx])
    }

    /// `E_n` as a graded family.
    pub fn family(&self, n: i64) -> Result<GradedFamily> {
        GradedFamily::new(
            (0..=self.cutoff)
                .map(|m| self.piece(n, m).cloned())
                .collect::<Result<_>>()?,
        )
    }

    /// `{n, m, dim}` rows.
    pub fn table(&self) -> Vec<FiltrationCell> {
        let mut out = Vec::new();
        for (m, row) in self.pieces.iter().enumerate() {
            for (n, s) in row.iter().enumerate().take(m + 1) {
                out.push(FiltrationCell { n, m, dim: s.dim() });
            }
        }
        out
    }

    /// Largest `n` with `a ∈ E_n`, by binary search over the nested pieces.
    pub fn rank_of(&self, model: &Model, a: &FockState) -> Result<usize> {
        if a.is_zero() {
            return Err(Error::UndefinedRank);
        }
        let m = a
            .degree()
            .ok_or_else(|| Error::Precondition("rank_of needs a homogeneous state".into()))?;
        let v = model.to_vector(a, m)?;
        if !self.piece(0, m)?.member(&v)? {
            return Err(Error::Precondition(format!("{a} is outside the filtered space")));
        }
        let (mut lo, mut hi) = (0usize, m);
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if self.piece(mid as i64, m)?.member(&v)? {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        Ok(lo)
    }

    /// Class of `a` at its own rank.
    pub fn class_of(&self, model: &Model, a: &FockState) -> Result<GrElement> {
        let rank = self.rank_of(model, a)?;
        self.class_at(model, a, rank)
    }

    /// Class of `a` in `E_rank / E_{rank+1}`; `a` must lie in `E_rank`.
    pub fn class_at(&self, model: &Model, a: &FockState, rank: usize) -> Result<GrElement> {
        let Some(m) = a.degree() else {
            if a.is_zero() {
                return Err(Error::Precondition("class of zero needs an explicit degree".into()));
            }
            return Err(Error::Precondition("gr classes need homogeneous states".into()));
        };
        self.class_in_degree(model, a, rank, m)
    }

    fn class_in_degree(&self, model: &Model, a: &FockState, rank: usize, m: usize) -> Result<GrElement> {
        let v = model.to_vector(a, m)?;
        if !self.piece(rank as i64, m)?.member(&v)? {
            return Err(Error::Precondition(format!("state is not in E_{rank}")));
        }
        let normal = self.piece(rank as i64 + 1, m)?.reduce(&v);
        Ok(GrElement {
            rank,
            degree: m,
            representative: model.from_vector(&normal, m)?,
        })
    }

    /// `[a][b] = [ab]` at the summed rank.
    pub fn gr_mul(&self, model: &Model, x: &GrElement, y: &GrElement) -> Result<GrElement> {
        let p = model.nop(&x.representative, &y.representative)?;
        self.class_in_degree(model, &p, x.rank + y.rank, x.degree + y.degree)
    }

    /// `d[a] = [da]` one rank up.
    pub fn gr_d(&self, model: &Model, x: &GrElement) -> Result<GrElement> {
        let p = model.derivative(&x.representative)?;
        self.class_in_degree(model, &p, x.rank + 1, x.degree + 1)
    }

    /// `[E_i, E_j] ⊆ E_{i+j+1}` in degree `m`.
    pub fn check_grok(&self, model: &Model, i: usize, j: usize, m: usize) -> Result<GrokReport> {
        if i + j + 1 > m || m > self.cutoff {
            return Err(Error::Precondition(format!(
                "need i + j + 1 <= m <= cutoff, got ({i}, {j}, {m})"
            )));
        }
        let target = self.piece((i + j + 1) as i64, m)?;
        let mut checked = 0;
        let mut violations = Vec::new();
        for m1 in 0..=m {
            let m2 = m - m1;
            let xs = states_of(model, self.piece(i as i64, m1)?)?;
            let ys = states_of(model, self.piece(j as i64, m2)?)?;
            for x in &xs {
                for y in &ys {
                    checked += 1;
                    let c = model.commutator(x, y)?;
                    if !target.member(&model.to_vector(&c, m)?)? {
                        violations.push(format!("[{x}, {y}]"));
                    }
                }
            }
        }
        Ok(GrokReport {
            i,
            j,
            m,
            checked,
            pass: violations.is_empty(),
            violations,
        })
    }

    /// Nesting, vanishing, `E_i E_j ⊆ E_{i+j}` and `d E_i ⊆ E_{i+1}` for all
    /// cells up to degree `max_degree`.
    pub fn check_laws(&self, model: &Model, max_degree: usize, strategy: Strategy) -> Result<LawsReport> {
        let max_degree = max_degree.min(self.cutoff);
        let mut violations = Vec::new();
        for m in 0..=max_degree {
            for n in 0..=m {
                if !self.piece(n as i64, m)?.contains(self.piece(n as i64 + 1, m)?)? {
                    violations.push(format!("E_{} not inside E_{} at degree {m}", n + 1, n));
                }
            }
            if !self.piece(m as i64 + 1, m)?.is_zero() {
                violations.push(format!("E_{} nonzero at degree {m}", m + 1));
            }
            if self.whole && !self.piece(0, m)?.is_full() {
                violations.push(format!("E_0 is not all of V^{m}"));
            }
        }
        // product and derivative laws, one task per (i, m1, j, m2) cell
        let mut cells = Vec::new();
        for m1 in 0..=max_degree {
            for i in 0..=m1 {
                for m2 in 0..=(max_degree - m1) {
                    for j in 0..=m2 {
                        cells.push((i, m1, j, m2));
                    }
                }
            }
        }
        let product_checks = par::try_map(strategy, &cells, |&(i, m1, j, m2)| -> Result<(usize, Vec<String>)> {
            let xs = states_of(model, self.piece(i as i64, m1)?)?;
            let ys = states_of(model, self.piece(j as i64, m2)?)?;
            let target = self.piece((i + j) as i64, m1 + m2)?;
            let mut bad = Vec::new();
            let mut count = 0;
            for x in &xs {
                for y in &ys {
                    count += 1;
                    let p = model.nop(x, y)?;
                    if !target.member(&model.to_vector(&p, m1 + m2)?)? {
                        bad.push(format!("E_{i}E_{j}: :({x})({y}): not in E_{}", i + j));
                    }
                }
            }
            Ok((count, bad))
        })?;
        let mut products_checked = 0;
        for (c, bad) in product_checks {
            products_checked += c;
            violations.extend(bad);
        }
        let mut derivatives_checked = 0;
        for m in 0..max_degree {
            for i in 0..=m {
                let target = self.piece(i as i64 + 1, m + 1)?;
                for x in states_of(model, self.piece(i as i64, m)?)? {
                    derivatives_checked += 1;
                    let d = model.derivative(&x)?;
                    if !target.member(&model.to_vector(&d, m + 1)?)? {
                        violations.push(format!("d({x}) not in E_{}", i + 1));
                    }
                }
            }
        }
        Ok(LawsReport {
            max_degree,
            products_checked,
            derivatives_checked,
            pass: violations.is_empty(),
            violations,
        })
    }

    /// Commutativity and associativity of gr on basis classes with total
    /// degree at most `max_degree`, plus well-definedness of the product
    /// under changes of representative by basis vectors of `E_{i+1}`.
    pub fn check_gr_algebra(&self, model: &Model, max_degree: usize, strategy: Strategy) -> Result<GrAlgebraReport> {
        let max_degree = max_degree.min(self.cutoff);
        let classes = self.basis_classes(model, max_degree)?;
        let mut pairs = Vec::new();
        for (a, x) in classes.iter().enumerate() {
            for (b, y) in classes.iter().enumerate() {
                if x.degree + y.degree <= max_degree {
                    pairs.push((a, b));
                }
            }
        }
        let comm = par::try_map(strategy, &pairs, |&(a, b)| -> Result<bool> {
            let xy = self.gr_mul(model, &classes[a], &classes[b])?;
            let yx = self.gr_mul(model, &classes[b], &classes[a])?;
            Ok(xy == yx)
        })?;
        let mut triples = Vec::new();
        for &(a, b) in &pairs {
            for (c, z) in classes.iter().enumerate() {
                if classes[a].degree + classes[b].degree + z.degree <= max_degree {
                    triples.push((a, b, c));
                }
            }
        }
        let assoc = par::try_map(strategy, &triples, |&(a, b, c)| -> Result<bool> {
            let left = self.gr_mul(model, &self.gr_mul(model, &classes[a], &classes[b])?, &classes[c])?;
            let right = self.gr_mul(model, &classes[a], &self.gr_mul(model, &classes[b], &classes[c])?)?;
            Ok(left == right)
        })?;
        // well-definedness: shifting a representative by E_{i+1} keeps the product class
        let shifts = par::try_map(strategy, &pairs, |&(a, b)| -> Result<bool> {
            let (x, y) = (&classes[a], &classes[b]);
            let base = self.gr_mul(model, x, y)?;
            for v in self.piece(x.rank as i64 + 1, x.degree)?.basis() {
                let shifted = GrElement {
                    rank: x.rank,
                    degree: x.degree,
                    representative: x.representative.add(&model.from_vector(v, x.degree)?),
                };
                if self.gr_mul(model, &shifted, y)? != base {
                    return Ok(false);
                }
            }
            Ok(true)
        })?;
        let commutative_failures = comm.iter().filter(|ok| !**ok).count();
        let associative_failures = assoc.iter().filter(|ok| !**ok).count();
        let well_defined_failures = shifts.iter().filter(|ok| !**ok).count();
        Ok(GrAlgebraReport {
            max_degree,
            pairs_checked: pairs.len(),
            triples_checked: triples.len(),
            commutative_failures,
            associative_failures,
            well_defined_failures,
            pass: commutative_failures == 0 && associative_failures == 0 && well_defined_failures == 0,
        })
    }

    /// Classes of the Fock basis monomials, each at its own rank.
    pub fn basis_classes(&self, model: &Model, max_degree: usize) -> Result<Vec<GrElement>> {
        let mut out = Vec::new();
        for m in 0..=max_degree {
            for s in model.basis_states(m)? {
                out.push(self.class_of(model, &s)?);
            }
        }
        Ok(out)
    }

    /// Whether every `E_n ∩ V^m` is spanned by the monomials with derivative
    /// count at least `n`.
    pub fn is_monomial(&self, model: &Model) -> Result<bool> {
        for m in 0..=self.cutoff {
            let basis = model.basis(m)?;
            for n in 0..=m + 1 {
                let expected: Vec<SparseVec> = basis
                    .iter()
                    .enumerate()
                    .filter(|(_, mono)| mono.derivative_count() >= n)
                    .map(|(i, _)| SparseVec::unit(i))
                    .collect();
                let s = Subspace::span(m, basis.len(), expected.iter())?;
                if !s.equal(self.piece(n as i64, m)?)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

fn states_of(model: &Model, s: &Subspace) -> Result<Vec<FockState>> {
    s.basis().iter().map(|v| model.from_vector(v, s.degree())).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct FiltrationCell {
    pub n: usize,
    pub m: usize,
    pub dim: usize,
}

/// Element of `E_rank / E_{rank+1}` with a representative in normal form
/// modulo `E_{rank+1}`; equality of classes is equality of these fields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrElement {
    pub rank: usize,
    pub degree: usize,
    pub representative: FockState,
}

impl GrElement {
    pub fn is_zero(&self) -> bool {
        self.representative.is_zero()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GrokReport {
    pub i: usize,
    pub j: usize,
    pub m: usize,
    pub checked: usize,
    pub pass: bool,
    pub violations: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LawsReport {
    pub max_degree: usize,
    pub products_checked: usize,
    pub derivatives_checked: usize,
    pub pass: bool,
    pub violations: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrAlgebraReport {
    pub max_degree: usize,
    pub pairs_checked: usize,
    pub triples_checked: usize,
    pub commutative_failures: usize,
    pub associative_failures: usize,
    pub well_defined_failures: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeCheck {
    pub m: usize,
    pub reachable_dim: usize,
    pub target_dim: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct StrongGenReport {
    pub generators: Vec<String>,
    pub cutoff: usize,
    pub degrees: Vec<DegreeCheck>,
    pub first_failure: Option<usize>,
    /// `dim V^m - dim(reachable)` at the first failing degree.
    pub missing_dim: usize,
    pub pass: bool,
    /// Outcome of the equivalent test on classes in gr V.
    pub gr_pass: bool,
    pub gr_first_failure: Option<usize>,
    /// Whether the two tests agree at every degree.
    pub agree: bool,
}

/// Span of right-associated products of derivatives of `xs`, degreewise.
/// Degree-zero elements of `xs` are ignored (they act as scalars).
pub fn reachable_family(model: &Model, xs: &[FockState]) -> Result<GradedFamily> {
    let items = derivative_items(model, xs)?;
    let cutoff = model.cutoff();
    let mut spans: Vec<Subspace> = Vec::with_capacity(cutoff + 1);
    let mut states: Vec<Vec<FockState>> = Vec::with_capacity(cutoff + 1);
    for m in 0..=cutoff {
        let mut s = Subspace::zero(m, model.dim(m)?);
        if m == 0 {
            s.insert(&model.to_vector(&model.vacuum(), 0)?)?;
        } else {
            for (w, head) in &items {
                if *w > m {
                    continue;
                }
                for tail in &states[m - w] {
                    let p = model.nop(head, tail)?;
                    s.insert(&model.to_vector(&p, m)?)?;
                }
            }
        }
        states.push(states_of(model, &s)?);
        spans.push(s);
    }
    GradedFamily::new(spans)
}

/// `(weight, d^k x)` for every `x` of positive degree and every `k` within the cutoff.
pub(crate) fn derivative_items(model: &Model, xs: &[FockState]) -> Result<Vec<(usize, FockState)>> {
    let mut items = Vec::new();
    for x in xs {
        let Some(dx) = x.degree() else {
            if x.is_zero() {
                continue;
            }
            return Err(Error::Precondition("generators must be homogeneous".into()));
        };
        if dx == 0 {
            continue;
        }
        let mut y = x.clone();
        let mut w = dx;
        while w <= model.cutoff() && !y.is_zero() {
            items.push((w, y.clone()));
            if w == model.cutoff() {
                break;
            }
            y = model.derivative(&y)?;
            w += 1;
        }
    }
    Ok(items)
}

/// Strong generation of `V` by `xs` through the cutoff, computed both
/// directly and through classes in gr V.
pub fn strong_gen_test(model: &Model, filt: &Filtration, xs: &[FockState]) -> Result<StrongGenReport> {
    let full = GradedFamily::new(
        (0..=model.cutoff())
            .map(|m| model.full_space(m))
            .collect::<Result<_>>()?,
    )?;
    strong_gen_test_within(model, filt, xs, &full)
}

/// Same test with a subalgebra `target` in place of `V`; `filt` must be the
/// filtration of `target` itself (see [`Filtration::of_subalgebra`]).
pub fn strong_gen_test_within(
    model: &Model,
    filt: &Filtration,
    xs: &[FockState],
    target: &GradedFamily,
) -> Result<StrongGenReport> {
    let reach = reachable_family(model, xs)?;
    let gr_reach = gr_generated_family(model, filt, xs)?;
    let target_gr = gr_dims_of(filt, target)?;
    let mut degrees = Vec::new();
    let mut first_failure = None;
    let mut missing_dim = 0;
    let mut gr_first_failure = None;
    let mut agree = true;
    for m in 0..=model.cutoff() {
        let r = reach.piece(m);
        let t = target.piece(m);
        let direct_ok = r.equal(t)?;
        let gr_ok = gr_reach[m] == target_gr[m];
        if !direct_ok && first_failure.is_none() {
            first_failure = Some(m);
            missing_dim = t.dim().saturating_sub(r.dim());
        }
        if !gr_ok && gr_first_failure.is_none() {
            gr_first_failure = Some(m);
        }
        agree &= direct_ok == gr_ok;
        degrees.push(DegreeCheck {
            m,
            reachable_dim: r.dim(),
            target_dim: t.dim(),
        });
    }
    Ok(StrongGenReport {
        generators: xs.iter().map(ToString::to_string).collect(),
        cutoff: model.cutoff(),
        degrees,
        first_failure,
        missing_dim,
        pass: first_failure.is_none(),
        gr_pass: gr_first_failure.is_none(),
        gr_first_failure,
        agree,
    })
}

/// Per degree, the dimensions `dim (S ∩ E_i + E_{i+1}) / E_{i+1}` for `i = 0..=m`.
pub fn gr_dims_of(filt: &Filtration, fam: &GradedFamily) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    for m in 0..=filt.cutoff().min(fam.cutoff()) {
        let s = fam.piece(m);
        let mut row = Vec::new();
        for i in 0..=m {
            let ei = filt.piece(i as i64, m)?;
            let ej = filt.piece(i as i64 + 1, m)?;
            let lower = s.intersect(ei)?.sum(ej)?;
            row.push(lower.dim() - ej.dim());
        }
        out.push(row);
    }
    Ok(out)
}

/// Per degree and rank, dimension of the piece of the differential
/// commutative subalgebra of gr V generated by the classes `[x]`.
fn gr_generated_family(model: &Model, filt: &Filtration, xs: &[FockState]) -> Result<Vec<Vec<usize>>> {
    // items: (weight, nominal rank, representative d^k x)
    let mut items: Vec<(usize, usize, FockState)> = Vec::new();
    for x in xs {
        let Some(dx) = x.degree() else { continue };
        if dx == 0 {
            continue;
        }
        let r = filt.rank_of(model, x)?;
        let mut y = x.clone();
        let mut k = 0;
        while dx + k <= model.cutoff() && !y.is_zero() {
            items.push((dx + k, r + k, y.clone()));
            if dx + k == model.cutoff() {
                break;
            }
            y = model.derivative(&y)?;
            k += 1;
        }
    }
    let cutoff = model.cutoff();
    // spans[m][i]: classes of rank i in degree m, kept as subspaces of E_i ∩ V^m mod E_{i+1}
    let mut spans: Vec<Vec<Subspace>> = (0..=cutoff)
        .map(|m| {
            let d = model.dim(m)?;
            Ok((0..=m).map(|_| Subspace::zero(m, d)).collect())
        })
        .collect::<Result<_>>()?;
    fn go(
        model: &Model,
        filt: &Filtration,
        items: &[(usize, usize, FockState)],
        start: usize,
        weight: usize,
        rank: usize,
        rep: &FockState,
        spans: &mut Vec<Vec<Subspace>>,
    ) -> Result<()> {
        if rank <= weight {
            let v = model.to_vector(rep, weight)?;
            let normal = filt.piece(rank as i64 + 1, weight)?.reduce(&v);
            if !normal.is_zero() {
                spans[weight][rank].insert(&normal)?;
            }
        }
        for (idx, (w, r, y)) in items.iter().enumerate().skip(start) {
            if weight + w > model.cutoff() {
                continue;
            }
            let p = model.nop(y, rep)?;
            go(model, filt, items, idx, weight + w, rank + r, &p, spans)?;
        }
        Ok(())
    }
    go(model, filt, &items, 0, 0, 0, &model.vacuum(), &mut spans)?;
    let mut out = Vec::new();
    for (m, row) in spans.iter().enumerate() {
        let mut dims = Vec::new();
        for (i, s) in row.iter().enumerate() {
            let ej = filt.piece(i as i64 + 1, m)?;
            dims.push(s.sum(ej)?.dim() - ej.dim());
        }
        out.push(dims);
    }
    Ok(out)
}

/// The monomials `:(d^{d_1} x_1) ... (d^{d_h} x_h):` with all `d_i > 0` and
/// `sum d_i = d`, one per multiset of `(x, d_i)` pairs, keeping those within
/// the cutoff.
pub fn ed_generators(model: &Model, xs: &[FockState], d: usize) -> Result<Vec<FockState>> {
    if d == 0 {
        return Err(Error::Precondition("ed_generators needs d >= 1".into()));
    }
    let mut degrees = Vec::new();
    for x in xs {
        degrees.push(
            x.degree()
                .ok_or_else(|| Error::Precondition("generators must be homogeneous".into()))?,
        );
    }
    // items (x index, derivative order), ordered; multisets are nondecreasing index sequences
    let items: Vec<(usize, usize)> = (0..xs.len()).flat_map(|i| (1..=d).map(move |k| (i, k))).collect();
    let mut out = Vec::new();
    fn go(
        items: &[(usize, usize)],
        start: usize,
        remaining: usize,
        acc: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if remaining == 0 {
            out.push(acc.clone());
            return;
        }
        for (idx, &(i, k)) in items.iter().enumerate().skip(start) {
            if k <= remaining {
                acc.push((i, k));
                go(items, idx, remaining - k, acc, out);
                acc.pop();
            }
        }
    }
    let mut shapes = Vec::new();
    go(&items, 0, d, &mut Vec::new(), &mut shapes);
    for shape in shapes {
        let weight: usize = shape.iter().map(|&(i, k)| degrees[i] + k).sum();
        if weight > model.cutoff() {
            continue;
        }
        let factors: Vec<(usize, FockState)> = shape.iter().map(|&(i, k)| (k, xs[i].clone())).collect();
        out.push(model.right_assoc(&factors)?);
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct EdVerification {
    pub d: usize,
    pub generators: Vec<String>,
    pub dims_en: Vec<usize>,
    pub dims_xv: Vec<usize>,
    pub first_difference: Option<usize>,
    pub pass: bool,
}

/// Checks that the monomials of [`ed_generators`] strongly generate `E_d`:
/// `(C[d] X_d) V = E_d` degreewise.
pub fn verify_ed_generators(model: &Model, filt: &Filtration, xs: &[FockState], d: usize) -> Result<EdVerification> {
    let gens = ed_generators(model, xs, d)?;
    let xv = crate::ideals::xv_span(model, &gens)?;
    let en = filt.family(d as i64)?;
    let first_difference = en.first_difference(&xv)?;
    Ok(EdVerification {
        d,
        generators: gens.iter().map(ToString::to_string).collect(),
        dims_en: en.dims(),
        dims_xv: xv.dims(),
        first_difference,
        pass: first_difference.is_none(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DiffCommComparison {
    pub cutoff: usize,
    pub gr_dims: Vec<usize>,
    pub diffcomm_dims: Vec<usize>,
    pub filtration_is_monomial: bool,
    pub generator_images_ok: bool,
    pub products_checked: usize,
    pub product_mismatches: usize,
    pub derivatives_checked: usize,
    pub derivative_mismatches: usize,
    pub injective: bool,
    pub pass: bool,
}

/// Image of a class under `[d^n b] -> u^(n)`: a monomial `a_{-n_1} ... |0>`
/// of derivative count equal to the rank maps to `prod u^(n_j - 1) / (n_j - 1)!`.
pub fn class_to_diffpoly(x: &GrElement) -> DiffPoly {
    let mut p = DiffPoly::zero();
    for (mono, c) in x.representative.terms() {
        if mono.derivative_count() != x.rank {
            continue;
        }
        let mut scale = c.clone();
        let mut orders = Vec::new();
        for f in mono.factors() {
            scale /= factorial(f.mode - 1);
            orders.push(f.mode - 1);
        }
        p.add_term(DiffMonomial::from_orders(&orders), scale);
    }
    p
}

/// Compares gr V of the rank-one model with the differential polynomial
/// algebra `C[u^(n)]` under `[d^n b] -> u^(n)`.
pub fn gr_to_diffcomm(model: &Model, filt: &Filtration) -> Result<DiffCommComparison> {
    if model.rank() != 1 {
        return Err(Error::Precondition("gr_to_diffcomm needs the rank-one model".into()));
    }
    let cutoff = model.cutoff();
    let alg = DiffAlgebra::new(cutoff);
    let gr_dims: Vec<usize> = gr_dims_of(filt, &filt.family(0)?)?
        .iter()
        .map(|row| row.iter().sum())
        .collect();
    let diffcomm_dims: Vec<usize> = (0..=cutoff).map(|w| alg.dim(w)).collect();
    let filtration_is_monomial = filt.is_monomial(model)?;

    let b = model.generator(0);
    let mut generator_images_ok = true;
    for n in 0..cutoff {
        let x = filt.class_at(model, &model.derivative_n(&b, n)?, n)?;
        generator_images_ok &= class_to_diffpoly(&x) == DiffPoly::variable(n as u32);
    }

    let classes = filt.basis_classes(model, cutoff)?;
    let mut products_checked = 0;
    let mut product_mismatches = 0;
    for x in &classes {
        for y in &classes {
            if x.degree + y.degree > cutoff {
                continue;
            }
            products_checked += 1;
            let xy = filt.gr_mul(model, x, y)?;
            let lhs = class_to_diffpoly(&xy);
            let rhs = class_to_diffpoly(x).mul(&class_to_diffpoly(y));
            if lhs != rhs {
                product_mismatches += 1;
            }
        }
    }
    let mut derivatives_checked = 0;
    let mut derivative_mismatches = 0;
    for x in classes.iter().filter(|x| x.degree < cutoff) {
        derivatives_checked += 1;
        let lhs = class_to_diffpoly(&filt.gr_d(model, x)?);
        if lhs != class_to_diffpoly(x).derivative() {
            derivative_mismatches += 1;
        }
    }
    // distinct basis classes go to linearly independent polynomials in each weight
    let mut injective = true;
    for m in 0..=cutoff {
        let images: Vec<SparseVec> = classes
            .iter()
            .filter(|x| x.degree == m)
            .map(|x| alg.to_vector(&class_to_diffpoly(x), m))
            .collect::<Result<_>>()?;
        let span = Subspace::span(m, alg.dim(m), images.iter())?;
        injective &= span.dim() == images.len();
    }
    let pass = gr_dims == diffcomm_dims
        && filtration_is_monomial
        && generator_images_ok
        && product_mismatches == 0
        && derivative_mismatches == 0
        && injective;
    Ok(DiffCommComparison {
        cutoff,
        gr_dims,
        diffcomm_dims,
        filtration_is_monomial,
        generator_images_ok,
        products_checked,
        product_mismatches,
        derivatives_checked,
        derivative_mismatches,
        injective,
        pass,
    })
}
