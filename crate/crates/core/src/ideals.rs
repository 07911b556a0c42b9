//! Right and two-sided ideals closed under `d` and the normally ordered
//! product, built degree by degree up to the cutoff.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{FockState, Model};
use crate::lifilt::{gr_dims_of, reachable_family, Filtration};
use crate::linalg::{GradedFamily, Subspace};
use crate::par::{self, Strategy};
use crate::products::ProductMode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Right,
    TwoSided,
}

#[derive(Clone, Debug)]
pub struct IdealFamily {
    pub side: Side,
    pub generators: Vec<FockState>,
    pub family: GradedFamily,
    pub cutoff: usize,
}

fn generator_degrees(xs: &[FockState]) -> Result<Vec<usize>> {
    xs.iter()
        .map(|x| {
            x.degree()
                .ok_or_else(|| Error::Precondition(format!("generator {x} is not homogeneous")))
        })
        .collect()
}

/// Smallest ideal containing `xs`. Every operation raises the degree except
/// multiplication by the vacuum, so one pass in increasing degree suffices.
pub fn closure(model: &Model, xs: &[FockState], side: Side, strategy: Strategy) -> Result<IdealFamily> {
    let xs: Vec<FockState> = xs.iter().filter(|x| !x.is_zero()).cloned().collect();
    let degrees = generator_degrees(&xs)?;
    if degrees.contains(&0) {
        return Err(Error::Precondition("the vacuum generates the whole space".into()));
    }
    let cutoff = model.cutoff();
    let mut pieces: Vec<Subspace> = Vec::with_capacity(cutoff + 1);
    let mut states: Vec<Vec<FockState>> = Vec::with_capacity(cutoff + 1);
    for m in 0..=cutoff {
        let dim = model.dim(m)?;
        let mut s = Subspace::zero(m, dim);
        for (x, &d) in xs.iter().zip(&degrees) {
            if d == m {
                s.insert(&model.to_vector(x, m)?)?;
            }
        }
        if m > 0 {
            for y in &states[m - 1] {
                s.insert(&model.to_vector(&model.derivative(y)?, m)?)?;
            }
            let mut pairs: Vec<(usize, usize, usize, bool)> = Vec::new();
            for k in 1..m {
                for i in 0..states[m - k].len() {
                    for j in 0..model.dim(k)? {
                        pairs.push((m - k, i, j, false));
                        if side == Side::TwoSided {
                            pairs.push((m - k, i, j, true));
                        }
                    }
                }
            }
            if !s.is_full() && !pairs.is_empty() {
                let products = par::try_map(strategy, &pairs, |&(deg, i, j, left)| {
                    let v = &model.basis_states(m - deg)?[j];
                    let y = &states[deg][i];
                    let p = if left { model.nop(v, y)? } else { model.nop(y, v)? };
                    model.to_vector(&p, m)
                })?;
                for v in &products {
                    if s.is_full() {
                        break;
                    }
                    s.insert(v)?;
                }
            }
        }
        states.push(model.family_states_of(&s)?);
        pieces.push(s);
    }
    Ok(IdealFamily {
        side,
        generators: xs,
        family: GradedFamily::new(pieces)?,
        cutoff,
    })
}

impl Model {
    pub(crate) fn family_states_of(&self, s: &Subspace) -> Result<Vec<FockState>> {
        s.basis().iter().map(|v| self.from_vector(v, s.degree())).collect()
    }
}

/// Span of `:(d^k x) v:` over `x ∈ X`, `k >= 0` and basis elements `v`
/// (including the vacuum). Not closed under right multiplication in general.
pub fn xv_span(model: &Model, xs: &[FockState]) -> Result<GradedFamily> {
    let degrees = generator_degrees(xs)?;
    let cutoff = model.cutoff();
    let mut pieces: Vec<Subspace> = (0..=cutoff)
        .map(|m| Ok(Subspace::zero(m, model.dim(m)?)))
        .collect::<Result<_>>()?;
    for (x, &d) in xs.iter().zip(&degrees) {
        let mut y = x.clone();
        for k in 0..=cutoff.saturating_sub(d) {
            if y.is_zero() {
                break;
            }
            let w = d + k;
            for dv in 0..=(cutoff - w) {
                for v in model.basis_states(dv)? {
                    let p = model.nop(&y, &v)?;
                    pieces[w + dv].insert(&model.to_vector(&p, w + dv)?)?;
                }
            }
            if w < cutoff {
                y = model.derivative(&y)?;
            }
        }
    }
    GradedFamily::new(pieces)
}

/// Smallest `N` with `E_N ∩ V^m ⊆ I_m` for every `m <= cutoff`, searched over
/// the `N` for which `E_N` is nonzero within the cutoff (`1 <= N < cutoff`).
/// Beyond that range the containment is vacuous, so it carries no evidence.
pub fn is_full(filt: &Filtration, fam: &GradedFamily) -> Result<Option<usize>> {
    let cutoff = filt.cutoff().min(fam.cutoff());
    for n in 1..cutoff {
        let mut ok = true;
        for m in 0..=cutoff {
            if !fam.piece(m).contains(filt.piece(n as i64, m)?)? {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureAudit {
    pub derivatives_checked: usize,
    pub products_checked: usize,
    pub generators_contained: bool,
    pub violations: Vec<String>,
    pub pass: bool,
}

/// Re-applies `d` and the products to every basis element of the ideal.
pub fn audit_closure(model: &Model, ideal: &IdealFamily, strategy: Strategy) -> Result<ClosureAudit> {
    let fam = &ideal.family;
    let cutoff = ideal.cutoff;
    let mut violations = Vec::new();
    let mut generators_contained = true;
    for x in &ideal.generators {
        let m = x.degree().unwrap_or(0);
        if !fam.piece(m).member(&model.to_vector(x, m)?)? {
            generators_contained = false;
            violations.push(format!("generator {x} missing"));
        }
    }
    let mut derivatives_checked = 0;
    for m in 0..cutoff {
        for y in model.family_states(fam, m)? {
            derivatives_checked += 1;
            if !fam
                .piece(m + 1)
                .member(&model.to_vector(&model.derivative(&y)?, m + 1)?)?
            {
                violations.push(format!("d({y}) escapes"));
            }
        }
    }
    let mut cells = Vec::new();
    for m in 0..=cutoff {
        for k in 0..=(cutoff - m) {
            cells.push((m, k));
        }
    }
    let results = par::try_map(strategy, &cells, |&(m, k)| -> Result<(usize, Vec<String>)> {
        let mut bad = Vec::new();
        let mut count = 0;
        for y in model.family_states(fam, m)? {
            for v in model.basis_states(k)? {
                count += 1;
                let p = model.nop(&y, &v)?;
                if !fam.piece(m + k).member(&model.to_vector(&p, m + k)?)? {
                    bad.push(format!(":({y})({v}): escapes"));
                }
                if ideal.side == Side::TwoSided {
                    count += 1;
                    let q = model.nop(&v, &y)?;
                    if !fam.piece(m + k).member(&model.to_vector(&q, m + k)?)? {
                        bad.push(format!(":({v})({y}): escapes"));
                    }
                }
            }
        }
        Ok((count, bad))
    })?;
    let mut products_checked = 0;
    for (c, bad) in results {
        products_checked += c;
        violations.extend(bad);
    }
    Ok(ClosureAudit {
        derivatives_checked,
        products_checked,
        generators_contained,
        pass: violations.is_empty(),
        violations,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct IdealGenReport {
    pub ideal_dims: Vec<usize>,
    pub xv_dims: Vec<usize>,
    /// `dim I_m - dim (XV)_m` per degree.
    pub discrepancy: Vec<usize>,
    pub first_difference: Option<usize>,
    pub pass: bool,
    pub gr_pass: bool,
    pub agree: bool,
}

/// Whether `X ⊆ I` strongly generates `I` (`I = (C[d] X) V` degreewise), with
/// the same question asked in gr V: do the classes `[x]` generate `gr I` as a
/// differential ideal?
pub fn ideal_strong_gen_test(
    model: &Model,
    filt: &Filtration,
    ideal: &GradedFamily,
    xs: &[FockState],
) -> Result<IdealGenReport> {
    for x in xs {
        let m = x
            .degree()
            .ok_or_else(|| Error::Precondition(format!("generator {x} is not homogeneous")))?;
        if m > ideal.cutoff() || !ideal.piece(m).member(&model.to_vector(x, m)?)? {
            return Err(Error::Precondition(format!("generator {x} is not in the ideal")));
        }
    }
    let xv = xv_span(model, xs)?;
    let first_difference = ideal.first_difference(&xv)?;
    let discrepancy = ideal
        .dims()
        .iter()
        .zip(xv.dims())
        .map(|(a, b)| a.saturating_sub(b))
        .collect();
    let gr_ideal = gr_dims_of(filt, ideal)?;
    let gr_generated = gr_ideal_generated(model, filt, xs)?;
    let gr_pass = gr_ideal == gr_generated;
    let pass = first_difference.is_none();
    Ok(IdealGenReport {
        ideal_dims: ideal.dims(),
        xv_dims: xv.dims(),
        discrepancy,
        first_difference,
        pass,
        gr_pass,
        agree: pass == gr_pass,
    })
}

/// Rank-by-rank dimensions of the differential ideal of gr V generated by the
/// classes `[x]`: spans of `[d^k x][v]` for Fock basis monomials `v`, taken at
/// nominal rank `rank(x) + k + rank(v)`.
fn gr_ideal_generated(model: &Model, filt: &Filtration, xs: &[FockState]) -> Result<Vec<Vec<usize>>> {
    let cutoff = model.cutoff();
    let mut spans: Vec<Vec<Subspace>> = (0..=cutoff)
        .map(|m| {
            let d = model.dim(m)?;
            Ok((0..=m).map(|_| Subspace::zero(m, d)).collect())
        })
        .collect::<Result<_>>()?;
    for x in xs {
        let dx = x.degree().unwrap_or(0);
        let rx = filt.rank_of(model, x)?;
        let mut y = x.clone();
        for k in 0..=cutoff.saturating_sub(dx) {
            if y.is_zero() {
                break;
            }
            let w = dx + k;
            for dv in 0..=(cutoff - w) {
                for (mono, v) in model.basis(dv)?.iter().zip(model.basis_states(dv)?) {
                    let rank = rx + k + mono.derivative_count();
                    let m = w + dv;
                    if rank > m {
                        continue;
                    }
                    let p = model.nop(&y, &v)?;
                    let normal = filt.piece(rank as i64 + 1, m)?.reduce(&model.to_vector(&p, m)?);
                    if !normal.is_zero() {
                        spans[m][rank].insert(&normal)?;
                    }
                }
            }
            if w < cutoff {
                y = model.derivative(&y)?;
            }
        }
    }
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

#[derive(Clone, Debug, Serialize)]
pub struct ChainStep {
    pub k: usize,
    pub generators: usize,
    pub dims: Vec<usize>,
    pub full_witness: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainReport {
    pub steps: Vec<ChainStep>,
    pub nested: bool,
    /// First index after which every ideal in the chain is equal to it.
    pub stabilization_index: usize,
    /// The chain repeats at least once before its end.
    pub stabilized: bool,
    /// For consecutive `I ⊆ J`: `gr I = gr J` exactly when `I = J`.
    pub gr_lemma_pass: bool,
    pub pass: bool,
}

/// Closures of an increasing list of generator sets.
pub fn chain_experiment(
    model: &Model,
    filt: &Filtration,
    sets: &[Vec<FockState>],
    side: Side,
    strategy: Strategy,
) -> Result<ChainReport> {
    if sets.is_empty() {
        return Err(Error::Precondition(
            "chain_experiment needs at least one generator set".into(),
        ));
    }
    let ideals = par::try_map(strategy, sets, |xs| closure(model, xs, side, strategy))?;
    let mut steps = Vec::new();
    for (k, (xs, ideal)) in sets.iter().zip(&ideals).enumerate() {
        steps.push(ChainStep {
            k,
            generators: xs.len(),
            dims: ideal.family.dims(),
            full_witness: is_full(filt, &ideal.family)?,
        });
    }
    let mut nested = true;
    let mut gr_lemma_pass = true;
    for w in ideals.windows(2) {
        let (i, j) = (&w[0].family, &w[1].family);
        nested &= j.contains(i)?;
        let equal = i.equal(j)?;
        let gr_equal = gr_dims_of(filt, i)? == gr_dims_of(filt, j)?;
        gr_lemma_pass &= equal == gr_equal;
    }
    let last = &ideals[ideals.len() - 1].family;
    let mut stabilization_index = ideals.len() - 1;
    while stabilization_index > 0 && ideals[stabilization_index - 1].family.equal(last)? {
        stabilization_index -= 1;
    }
    let stabilized = ideals.len() == 1 || stabilization_index < ideals.len() - 1;
    Ok(ChainReport {
        steps,
        nested,
        stabilization_index,
        stabilized,
        gr_lemma_pass,
        pass: nested && stabilized && gr_lemma_pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct InclusionReport {
    pub max_degree: usize,
    pub left_dims: Vec<usize>,
    pub right_dims: Vec<usize>,
    pub first_violation: Option<usize>,
    pub pass: bool,
}

/// `⟦A, B⟧ · C ⊆ ⟦A, B · C⟧`, compared at degrees `<= max_degree`. The
/// products are truncated at the cutoff, so `max_degree` should sit well
/// below it.
pub fn kac_inclusion(
    model: &Model,
    a: &GradedFamily,
    b: &GradedFamily,
    c: &GradedFamily,
    max_degree: usize,
) -> Result<InclusionReport> {
    let ab = model.subspace_product(a, b, ProductMode::NonNegative)?;
    let left = model.subspace_product(&ab, c, ProductMode::All)?;
    let bc = model.subspace_product(b, c, ProductMode::All)?;
    let right = model.subspace_product(a, &bc, ProductMode::NonNegative)?;
    let max_degree = max_degree.min(model.cutoff());
    let mut first_violation = None;
    for m in 0..=max_degree {
        if !right.piece(m).contains(left.piece(m))? {
            first_violation = Some(m);
            break;
        }
    }
    Ok(InclusionReport {
        max_degree,
        left_dims: left.dims()[..=max_degree].to_vec(),
        right_dims: right.dims()[..=max_degree].to_vec(),
        first_violation,
        pass: first_violation.is_none(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct XvLemmaReport {
    pub xv_dims: Vec<usize>,
    pub subalgebra_xv_dims: Vec<usize>,
    pub pass: bool,
}

/// `XV = ⟨X⟩₊ V`, where `⟨X⟩₊` is the positive-degree part of the span of
/// normally ordered products of derivatives of `X`.
pub fn xv_lemma_check(model: &Model, xs: &[FockState]) -> Result<XvLemmaReport> {
    let xv = xv_span(model, xs)?;
    let sub = reachable_family(model, xs)?;
    let mut monomials = Vec::new();
    for m in 1..=model.cutoff() {
        monomials.extend(model.family_states(&sub, m)?);
    }
    let big = xv_span(model, &monomials)?;
    Ok(XvLemmaReport {
        xv_dims: xv.dims(),
        subalgebra_xv_dims: big.dims(),
        pass: xv.equal(&big)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(cutoff: usize) -> (Model, Filtration) {
        let m = Model::rank_one(cutoff).unwrap();
        let f = Filtration::build(&m).unwrap();
        (m, f)
    }

    #[test]
    fn closure_of_generator() {
        let (m, _) = setup(5);
        let i = closure(&m, &[m.generator(0)], Side::Right, Strategy::Sequential).unwrap();
        assert_eq!(i.family.dims(), vec![0, 1, 2, 3, 5, 7]);
    }

    #[test]
    fn closure_of_square_skips_degree_one() {
        let (m, _) = setup(5);
        let b = m.generator(0);
        let i = closure(&m, &[m.nop(&b, &b).unwrap()], Side::Right, Strategy::Sequential).unwrap();
        assert_eq!(i.family.piece(1).dim(), 0);
        assert!(audit_closure(&m, &i, Strategy::Sequential).unwrap().pass);
    }

    #[test]
    fn vacuum_rejected() {
        let (m, _) = setup(4);
        assert!(closure(&m, &[m.vacuum()], Side::Right, Strategy::Sequential).is_err());
    }

    #[test]
    fn xv_of_generator() {
        let (m, _) = setup(5);
        let xv = xv_span(&m, &[m.generator(0)]).unwrap();
        assert_eq!(xv.piece(1).dim(), 1);
        assert_eq!(xv.dims(), vec![0, 1, 2, 3, 5, 7]);
    }

    #[test]
    fn fullness_examples() {
        let (m, f) = setup(6);
        let i = closure(&m, &[m.generator(0)], Side::Right, Strategy::Sequential).unwrap();
        assert_eq!(is_full(&f, &i.family).unwrap(), Some(1));
        assert_eq!(is_full(&f, &m.zero_family()).unwrap(), None);
    }

    #[test]
    fn strong_gen_of_ideals() {
        let (m, f) = setup(6);
        let b = m.generator(0);
        let i = closure(&m, &[b.clone()], Side::Right, Strategy::Sequential).unwrap();
        let rep = ideal_strong_gen_test(&m, &f, &i.family, &[b.clone()]).unwrap();
        assert!(rep.pass && rep.agree);
        let rep = ideal_strong_gen_test(&m, &f, &m.zero_family(), &[]).unwrap();
        assert!(rep.pass && rep.gr_pass);
        let bb = m.nop(&b, &b).unwrap();
        let zero = m.zero_family();
        assert!(ideal_strong_gen_test(&m, &f, &zero, &[bb]).is_err());
    }

    #[test]
    fn derivative_chain_stabilizes_at_once() {
        let (m, f) = setup(6);
        let b = m.generator(0);
        let sets: Vec<Vec<FockState>> = (0..3)
            .map(|k| (0..=k).map(|j| m.derivative_n(&b, j).unwrap()).collect())
            .collect();
        let rep = chain_experiment(&m, &f, &sets, Side::Right, Strategy::Sequential).unwrap();
        assert_eq!(rep.stabilization_index, 0);
        assert!(rep.pass);
    }

    #[test]
    fn kac_inclusion_small() {
        let (m, _) = setup(7);
        let b = m.generator(0);
        let a = m.family_from_states([&b]).unwrap();
        let bfam = m.derivative_closure(&[b.clone()]).unwrap();
        let v = m.family_from_states(m.basis_states(1).unwrap().iter()).unwrap();
        let c = m.derivative_closure(&m.family_states(&v, 1).unwrap()).unwrap();
        assert!(kac_inclusion(&m, &a, &bfam, &c, 3).unwrap().pass);
    }

    #[test]
    fn xv_lemma_for_square() {
        let (m, _) = setup(6);
        let b = m.generator(0);
        assert!(xv_lemma_check(&m, &[m.nop(&b, &b).unwrap()]).unwrap().pass);
    }
}
