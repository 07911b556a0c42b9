//! Reconstruction of the lambda-bracket from the normally ordered product.
//!
//! Everything here is generic over [`NormalOrdered`], which exposes the
//! product `:ab:`, the derivative and coordinates, and nothing else. The
//! bracket of the model is therefore out of reach of this module by
//! construction; [`purity_audit`] double-checks with the call counter.

use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{FockState, LambdaPoly, Model};
use crate::linalg::{frac, int, solve, solve_combination, Matrix, Scalar, SparseVec, Subspace};
use crate::products::bracket_call_count;

/// The data the recovery procedure may use.
pub trait NormalOrdered {
    fn nop(&self, a: &FockState, b: &FockState) -> Result<FockState>;
    fn derivative(&self, a: &FockState) -> Result<FockState>;
    fn cutoff(&self) -> usize;
    fn dim(&self, m: usize) -> Result<usize>;
    fn basis_states(&self, m: usize) -> Result<Vec<FockState>>;
    fn to_vector(&self, a: &FockState, m: usize) -> Result<SparseVec>;
    fn from_vector(&self, v: &SparseVec, m: usize) -> Result<FockState>;
    fn vacuum(&self) -> FockState;
}

impl NormalOrdered for Model {
    fn nop(&self, a: &FockState, b: &FockState) -> Result<FockState> {
        Model::nop(self, a, b)
    }
    fn derivative(&self, a: &FockState) -> Result<FockState> {
        Model::derivative(self, a)
    }
    fn cutoff(&self) -> usize {
        Model::cutoff(self)
    }
    fn dim(&self, m: usize) -> Result<usize> {
        Model::dim(self, m)
    }
    fn basis_states(&self, m: usize) -> Result<Vec<FockState>> {
        Model::basis_states(self, m)
    }
    fn to_vector(&self, a: &FockState, m: usize) -> Result<SparseVec> {
        Model::to_vector(self, a, m)
    }
    fn from_vector(&self, v: &SparseVec, m: usize) -> Result<FockState> {
        Model::from_vector(self, v, m)
    }
    fn vacuum(&self) -> FockState {
        Model::vacuum(self)
    }
}

fn derivative_n<A: NormalOrdered>(alg: &A, a: &FockState, k: usize) -> Result<FockState> {
    let mut x = a.clone();
    for _ in 0..k {
        x = alg.derivative(&x)?;
    }
    Ok(x)
}

fn nonzero_degree(a: &FockState) -> Result<usize> {
    a.degree()
        .ok_or_else(|| Error::Precondition(format!("{a} is not a nonzero homogeneous state")))
}

/// Largest degree touched when recovering a pair of degrees `(h, k)` with
/// `h + k >= 1`: the left-hand side `d^n (ab - ba)` sits in degree `h + k + n`.
pub fn required_cutoff(h: usize, k: usize) -> usize {
    2 * (h + k) - 1
}

/// `(n+1) x (n+1)` matrix with entries `(-1)^j / (i+j+1)`.
pub fn hilbert_sign_matrix(n: usize) -> Matrix {
    let rows = (0..=n)
        .map(|i| {
            (0..=n)
                .map(|j| {
                    let sign = if j % 2 == 0 { 1 } else { -1 };
                    frac(sign, (i + j + 1) as i64)
                })
                .collect()
        })
        .collect();
    Matrix::from_rows(rows).expect("square by construction")
}

#[derive(Clone, Debug)]
pub struct RecoverySystem {
    pub n: usize,
    pub degree_a: usize,
    pub degree_b: usize,
    pub matrix: Matrix,
    /// `d^{n-i} (:(d^i a) b: - :b (d^i a):)` for `i = 0..=n`.
    pub lhs: Vec<FockState>,
}

impl RecoverySystem {
    /// Degree of every left-hand side.
    pub fn lhs_degree(&self) -> usize {
        self.degree_a + self.degree_b + self.n
    }
}

pub fn build_system<A: NormalOrdered>(alg: &A, a: &FockState, b: &FockState) -> Result<RecoverySystem> {
    let (ha, hb) = (nonzero_degree(a)?, nonzero_degree(b)?);
    if ha + hb == 0 {
        return Err(Error::Precondition(
            "two degree-zero states have no bracket to recover".into(),
        ));
    }
    let n = ha + hb - 1;
    let top = ha + hb + n;
    if top > alg.cutoff() {
        return Err(Error::CutoffExceeded {
            op: "build_system",
            degree: top,
            cutoff: alg.cutoff(),
        });
    }
    let mut lhs = Vec::with_capacity(n + 1);
    let mut da = a.clone();
    for i in 0..=n {
        let comm = alg.nop(&da, b)?.sub(&alg.nop(b, &da)?);
        lhs.push(derivative_n(alg, &comm, n - i)?);
        if i < n {
            da = alg.derivative(&da)?;
        }
    }
    Ok(RecoverySystem {
        n,
        degree_a: ha,
        degree_b: hb,
        matrix: hilbert_sign_matrix(n),
        lhs,
    })
}

/// The values `d^{n+j+1} c_j`, `j = 0..=n`.
pub fn solve_mod_torsion<A: NormalOrdered>(alg: &A, sys: &RecoverySystem) -> Result<Vec<FockState>> {
    let deg = sys.lhs_degree();
    let rhs: Vec<SparseVec> = sys.lhs.iter().map(|s| alg.to_vector(s, deg)).collect::<Result<_>>()?;
    let xs = solve(&sys.matrix, &rhs)?.ok_or_else(|| Error::Consistency("recovery matrix is singular".into()))?;
    xs.iter().map(|v| alg.from_vector(v, deg)).collect()
}

/// Solves `d^m x = w` for `x` of degree `target_degree`. The flag is set when
/// the answer is only determined up to multiples of the vacuum.
pub fn divide_partial<A: NormalOrdered>(
    alg: &A,
    w: &FockState,
    m: usize,
    target_degree: usize,
) -> Result<(FockState, bool)> {
    let top = target_degree + m;
    if top > alg.cutoff() {
        return Err(Error::CutoffExceeded {
            op: "divide_partial",
            degree: top,
            cutoff: alg.cutoff(),
        });
    }
    let basis = alg.basis_states(target_degree)?;
    let columns: Vec<SparseVec> = basis
        .iter()
        .map(|s| alg.to_vector(&derivative_n(alg, s, m)?, top))
        .collect::<Result<_>>()?;
    let target = alg.to_vector(w, top)?;
    let coeffs = solve_combination(&columns, &target, alg.dim(top)?)?
        .ok_or_else(|| Error::Consistency(format!("{w} is not in the image of d^{m}")))?;
    let mut x = FockState::zero();
    for (s, c) in basis.iter().zip(&coeffs) {
        x.add_scaled(s, c);
    }
    Ok((x, target_degree == 0))
}

/// Coefficients `c_j` of `[a_lambda b] = sum_j lambda^j c_j` except for the
/// vacuum component of `c_n`, which is left at zero.
#[derive(Clone, Debug)]
pub struct PartialBracket {
    pub n: usize,
    pub coeffs: Vec<FockState>,
}

pub fn noncentral_part<A: NormalOrdered>(alg: &A, a: &FockState, b: &FockState) -> Result<PartialBracket> {
    let sys = build_system(alg, a, b)?;
    let values = solve_mod_torsion(alg, &sys)?;
    let total = sys.degree_a + sys.degree_b;
    let mut coeffs = Vec::with_capacity(sys.n + 1);
    for (j, w) in values.iter().enumerate() {
        let (c, ambiguous) = divide_partial(alg, w, sys.n + j + 1, total - j - 1)?;
        debug_assert_eq!(ambiguous, j == sys.n);
        coeffs.push(c);
    }
    Ok(PartialBracket { n: sys.n, coeffs })
}

/// `sum_j :(d^{j+1} x / (j+1)) c_j:`
fn integrate_left<A: NormalOrdered>(alg: &A, x: &FockState, coeffs: &[FockState]) -> Result<FockState> {
    let mut out = FockState::zero();
    let mut dx = x.clone();
    for (j, c) in coeffs.iter().enumerate() {
        dx = alg.derivative(&dx)?;
        if c.is_zero() {
            continue;
        }
        out.add_scaled(&alg.nop(&dx, c)?, &frac(1, j as i64 + 1));
    }
    Ok(out)
}

fn associator<A: NormalOrdered>(alg: &A, a: &FockState, b: &FockState, c: &FockState) -> Result<FockState> {
    let left = alg.nop(&alg.nop(a, b)?, c)?;
    let right = alg.nop(a, &alg.nop(b, c)?)?;
    Ok(left.sub(&right))
}

/// The two central unknowns of the associator equation for `(a, u, b)`:
/// `z'` multiplies `d^{n'+1} a / (n'+1)` and `z` multiplies `d^{n+1} u / (n+1)`.
/// Returns `z` when it is uniquely determined.
pub fn resolve_central<A: NormalOrdered>(
    alg: &A,
    a: &FockState,
    b: &FockState,
    u: &FockState,
    ab: &PartialBracket,
) -> Result<Option<Scalar>> {
    let (ha, hb, hu) = (nonzero_degree(a)?, nonzero_degree(b)?, nonzero_degree(u)?);
    if hu == 0 {
        return Ok(None);
    }
    let deg = ha + hu + hb;
    if deg > alg.cutoff() || required_cutoff(hu, hb) > alg.cutoff() {
        return Err(Error::CutoffExceeded {
            op: "resolve_central",
            degree: deg.max(required_cutoff(hu, hb)),
            cutoff: alg.cutoff(),
        });
    }
    let ub = noncentral_part(alg, u, b)?;
    let col_z_prime = derivative_n(alg, a, ub.n + 1)?.scale(&frac(1, ub.n as i64 + 1));
    let col_z = derivative_n(alg, u, ab.n + 1)?.scale(&frac(1, ab.n as i64 + 1));
    let cz = alg.to_vector(&col_z, deg)?;
    let czp = alg.to_vector(&col_z_prime, deg)?;
    if !determines_first(&cz, &czp, alg.dim(deg)?)? {
        return Ok(None);
    }
    let known = integrate_left(alg, a, &ub.coeffs)?.add(&integrate_left(alg, u, &ab.coeffs)?);
    let residual = associator(alg, a, u, b)?.sub(&known);
    let coeffs = solve_combination(&[cz, czp], &alg.to_vector(&residual, deg)?, alg.dim(deg)?)?
        .ok_or_else(|| Error::Consistency("associator equation has no central solution".into()))?;
    Ok(Some(coeffs[0].clone()))
}

/// Whether the coefficient of `x` in `z x + z' y` is determined: `x ∉ span(y)`.
fn determines_first(x: &SparseVec, y: &SparseVec, ambient: usize) -> Result<bool> {
    let mut s = Subspace::zero(0, ambient);
    s.insert(y)?;
    Ok(!s.member(x)?)
}

/// Central coefficient from `(a, a, a) = 2 (int a)[a_lambda a]`.
fn resolve_self<A: NormalOrdered>(alg: &A, a: &FockState, aa: &PartialBracket) -> Result<Option<Scalar>> {
    let ha = nonzero_degree(a)?;
    let deg = 3 * ha;
    if ha == 0 || deg > alg.cutoff() {
        return Ok(None);
    }
    let col = derivative_n(alg, a, aa.n + 1)?.scale(&frac(2, aa.n as i64 + 1));
    if col.is_zero() {
        return Ok(None);
    }
    let known = integrate_left(alg, a, &aa.coeffs)?.scale(&int(2));
    let residual = associator(alg, a, a, a)?.sub(&known);
    let c = solve_combination(
        &[alg.to_vector(&col, deg)?],
        &alg.to_vector(&residual, deg)?,
        alg.dim(deg)?,
    )?
    .ok_or_else(|| Error::Consistency("self-associator equation has no central solution".into()))?;
    Ok(Some(c[0].clone()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CentralRoute {
    /// No central unknown: one side is zero or both are scalars.
    Trivial,
    /// Associator `(a, u, b)`.
    Direct,
    /// Associator `(b, u, a)` followed by skew-symmetry.
    Swapped,
    /// `(a, a, a)`.
    SelfBracket,
}

#[derive(Clone, Debug)]
pub struct Recovered {
    pub bracket: LambdaPoly,
    pub route: CentralRoute,
    pub u_used: Option<FockState>,
}

fn assemble(pb: &PartialBracket, z: &Scalar, vacuum: &FockState) -> LambdaPoly {
    let mut out = LambdaPoly::zero();
    for (j, c) in pb.coeffs.iter().enumerate() {
        let mut c = c.clone();
        if j == pb.n {
            c.add_scaled(vacuum, z);
        }
        out.add_term(j as u32, 0, &c);
    }
    out
}

/// First admissible `u` in ascending degree: the central coefficient of the
/// pair is determined by the associator equation and every degree involved
/// fits under the cutoff.
fn search_u<A: NormalOrdered>(
    alg: &A,
    a: &FockState,
    b: &FockState,
    ab: &PartialBracket,
) -> Result<Option<(FockState, Scalar)>> {
    let (ha, hb) = (nonzero_degree(a)?, nonzero_degree(b)?);
    for hu in 1..=alg.cutoff() {
        if ha + hu + hb > alg.cutoff() || required_cutoff(hu, hb) > alg.cutoff() {
            break;
        }
        for u in alg.basis_states(hu)? {
            if let Some(z) = resolve_central(alg, a, b, &u, ab)? {
                return Ok(Some((u, z)));
            }
        }
    }
    Ok(None)
}

/// Full pipeline: linear system, division by powers of `d`, then the
/// central term.
pub fn recover_bracket<A: NormalOrdered>(alg: &A, a: &FockState, b: &FockState) -> Result<Recovered> {
    let trivial = Recovered {
        bracket: LambdaPoly::zero(),
        route: CentralRoute::Trivial,
        u_used: None,
    };
    if a.is_zero() || b.is_zero() {
        return Ok(trivial);
    }
    let (ha, hb) = (nonzero_degree(a)?, nonzero_degree(b)?);
    if ha + hb == 0 {
        return Ok(trivial);
    }
    let ab = noncentral_part(alg, a, b)?;
    let vacuum = alg.vacuum();
    if let Some((u, z)) = search_u(alg, a, b, &ab)? {
        return Ok(Recovered {
            bracket: assemble(&ab, &z, &vacuum),
            route: CentralRoute::Direct,
            u_used: Some(u),
        });
    }
    if a == b {
        if let Some(z) = resolve_self(alg, a, &ab)? {
            return Ok(Recovered {
                bracket: assemble(&ab, &z, &vacuum),
                route: CentralRoute::SelfBracket,
                u_used: None,
            });
        }
    }
    // The central coefficient of [b_lambda a] fixes that of [a_lambda b]:
    // skew-symmetry sends lambda^n c_n to -(-lambda)^n c_n on scalars.
    let ba = noncentral_part(alg, b, a)?;
    if let Some((u, z_ba)) = search_u(alg, b, a, &ba)? {
        let sign = if ab.n % 2 == 0 { -Scalar::one() } else { Scalar::one() };
        return Ok(Recovered {
            bracket: assemble(&ab, &(sign * z_ba), &vacuum),
            route: CentralRoute::Swapped,
            u_used: Some(u),
        });
    }
    Err(Error::Search(format!(
        "no admissible u for ({a}, {b}) within the cutoff"
    )))
}

/// Recovery with a prescribed `u` (direct route); `None` when `u` does not
/// determine the central term.
pub fn recover_bracket_with<A: NormalOrdered>(
    alg: &A,
    a: &FockState,
    b: &FockState,
    u: &FockState,
) -> Result<Option<LambdaPoly>> {
    let ab = noncentral_part(alg, a, b)?;
    Ok(resolve_central(alg, a, b, u, &ab)?.map(|z| assemble(&ab, &z, &alg.vacuum())))
}

/// All admissible `u` (basis states, ascending degree) for the direct route.
pub fn admissible_us<A: NormalOrdered>(alg: &A, a: &FockState, b: &FockState, limit: usize) -> Result<Vec<FockState>> {
    let (ha, hb) = (nonzero_degree(a)?, nonzero_degree(b)?);
    let ab = noncentral_part(alg, a, b)?;
    let mut out = Vec::new();
    for hu in 1..=alg.cutoff() {
        if ha + hu + hb > alg.cutoff() || required_cutoff(hu, hb) > alg.cutoff() {
            break;
        }
        for u in alg.basis_states(hu)? {
            if resolve_central(alg, a, b, &u, &ab)?.is_some() {
                out.push(u);
                if out.len() == limit {
                    return Ok(out);
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct PairOutcome {
    pub a: String,
    pub b: String,
    pub recovered: serde_json::Value,
    pub direct: serde_json::Value,
    pub equal: bool,
    pub route: CentralRoute,
    pub u_used: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PurityAudit {
    pub pairs: usize,
    pub bracket_calls: u64,
    pub pass: bool,
}

/// Runs the pipeline on `pairs` and confirms that the model's bracket was
/// never evaluated on this thread meanwhile.
pub fn purity_audit(model: &Model, pairs: &[(FockState, FockState)]) -> Result<PurityAudit> {
    let before = bracket_call_count();
    for (a, b) in pairs {
        recover_bracket(model, a, b)?;
    }
    let calls = bracket_call_count() - before;
    Ok(PurityAudit {
        pairs: pairs.len(),
        bracket_calls: calls,
        pass: calls == 0,
    })
}

/// Recovers one pair and compares with the model's own bracket.
pub fn compare_pair(model: &Model, a: &FockState, b: &FockState) -> Result<PairOutcome> {
    let rec = recover_bracket(model, a, b)?;
    let direct = model.lambda_bracket(a, b)?;
    Ok(PairOutcome {
        a: a.to_string(),
        b: b.to_string(),
        recovered: rec.bracket.to_json(),
        direct: direct.to_json(),
        equal: rec.bracket == direct,
        route: rec.route,
        u_used: rec.u_used.map(|u| u.to_string()),
    })
}
