//! n-th products, the normally ordered product, the lambda-bracket and the
//! identity verifier.
//!
//! Products are computed by structural recursion on the left monomial. For
//! `a = a^f_{-p} a'` the field of `a` is the normally ordered product of the
//! divided derivative `d^{(p-1)} b^f(z)` with `Y(a', z)`, which gives
//!
//! ```text
//! a_(N) c = sum_{q >= p} C(q-1, p-1) a^f_{-q} (a'_(N+q-p) c)
//!         + sum_{m >= 1} C(-m-1, p-1) a'_(N-m-p) (a^f_m c)
//! ```
//!
//! anchored at `1_(N) c = delta_{N,-1} c`. The identities of the vertex
//! algebra are then outputs checked against this engine, not inputs to it.

use std::cell::Cell;
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{Factor, FockMonomial, FockState, LambdaPoly, Model, ProductKey};
use crate::linalg::{binomial, factorial, frac, int, GradedFamily, Scalar, Subspace};

thread_local! {
    static BRACKET_CALLS: Cell<u64> = const { Cell::new(0) };
}

/// Number of public bracket-level calls (`lambda_bracket`, or `nth_product`
/// with `n >= 0`) made on the current thread.
pub fn bracket_call_count() -> u64 {
    BRACKET_CALLS.with(Cell::get)
}

fn note_bracket_call() {
    BRACKET_CALLS.with(|c| c.set(c.get() + 1));
}

impl Model {
    /// `a_(n) b`.
    pub fn nth_product(&self, a: &FockState, n: i64, b: &FockState) -> Result<FockState> {
        if n >= 0 {
            note_bracket_call();
        }
        self.product(a, n, b)
    }

    /// Normally ordered product `:ab: = a_(-1) b`.
    pub fn nop(&self, a: &FockState, b: &FockState) -> Result<FockState> {
        self.product(a, -1, b)
    }

    pub(crate) fn product(&self, a: &FockState, n: i64, b: &FockState) -> Result<FockState> {
        let (Some(da), Some(db)) = (a.max_degree(), b.max_degree()) else {
            return Ok(FockState::zero());
        };
        let top = da as i64 + db as i64 - n - 1;
        if top > self.cutoff() as i64 {
            // only fail if some pair of components actually lands above the cutoff
            let ca = a.components();
            let cb = b.components();
            for i in ca.keys() {
                for j in cb.keys() {
                    let d = *i as i64 + *j as i64 - n - 1;
                    if d > self.cutoff() as i64 {
                        return Err(Error::CutoffExceeded {
                            op: "nth_product",
                            degree: d as usize,
                            cutoff: self.cutoff(),
                        });
                    }
                }
            }
        }
        let mut out = FockState::zero();
        for (ma, ca) in a.terms() {
            for (mb, cb) in b.terms() {
                let r = self.monomial_product(ma, n, mb);
                out.add_scaled(&r, &(ca * cb));
            }
        }
        Ok(out)
    }

    fn monomial_product(&self, a: &FockMonomial, n: i64, c: &FockMonomial) -> FockState {
        if a.is_vacuum() {
            return if n == -1 {
                FockState::from_monomial(c.clone())
            } else {
                FockState::zero()
            };
        }
        let target = a.weight() as i64 + c.weight() as i64 - n - 1;
        if target < 0 {
            return FockState::zero();
        }
        let key: ProductKey = (a.clone(), n, c.clone());
        if let Some(hit) = self.product_cache.read().expect("cache lock").get(&key) {
            return hit.clone();
        }
        let lead: Factor = a.factors()[0];
        let rest = FockMonomial::from_sorted(a.factors()[1..].to_vec());
        let p = lead.mode as i64;
        let flavor = lead.flavor as usize;
        let mut out = FockState::zero();
        // creation part of the leading field, placed to the left
        for q in p..=target {
            let coeff = binomial(q - 1, (p - 1) as u32);
            let inner = self.monomial_product(&rest, n + q - p, c);
            for (m, x) in inner.terms() {
                out.add_term(m.with_factor(Factor::new(lead.flavor, q as u32)), x * &coeff);
            }
        }
        // annihilation part, acting on c first
        for m in 1..=c.weight() as i64 {
            let lowered = self.mode_on_monomial(flavor, m, c);
            if lowered.is_zero() {
                continue;
            }
            let coeff = binomial(-m - 1, (p - 1) as u32);
            for (cm, x) in lowered.terms() {
                let inner = self.monomial_product(&rest, n - m - p, cm);
                out.add_scaled(&inner, &(x * &coeff));
            }
        }
        self.product_cache.write().expect("cache lock").insert(key, out.clone());
        out
    }

    /// `[a_lambda b] = sum_n lambda^n / n! a_(n) b`.
    pub fn lambda_bracket(&self, a: &FockState, b: &FockState) -> Result<LambdaPoly> {
        note_bracket_call();
        self.bracket(a, b)
    }

    pub(crate) fn bracket(&self, a: &FockState, b: &FockState) -> Result<LambdaPoly> {
        let mut out = LambdaPoly::zero();
        let (Some(da), Some(db)) = (a.max_degree(), b.max_degree()) else {
            return Ok(out);
        };
        for n in 0..(da + db) as i64 {
            let c = self.product(a, n, b)?;
            out.add_term(n as u32, 0, &c.scale(&factorial(n as u32).recip()));
        }
        Ok(out)
    }

    /// Right-associated product `:x_1 x_2 ... x_h:` of `d^{k_i} x_i`.
    pub fn right_assoc(&self, factors: &[(usize, FockState)]) -> Result<FockState> {
        let mut acc = self.vacuum();
        for (k, x) in factors.iter().rev() {
            let dx = self.derivative_n(x, *k)?;
            acc = self.nop(&dx, &acc)?;
        }
        Ok(acc)
    }

    /// `int_{-d}^0 dlambda P`: the `lambda^j` coefficient contributes
    /// `(-1)^j d^{j+1} c_j / (j+1)`.
    pub fn integrate_dl_lower(&self, p: &LambdaPoly) -> Result<FockState> {
        if !p.is_univariate() {
            return Err(Error::Precondition(
                "integrate_dl_lower needs a univariate polynomial".into(),
            ));
        }
        let mut out = FockState::zero();
        for (j, c) in p.univariate_coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if j % 2 == 0 { 1 } else { -1 };
            let d = self.derivative_n(c, j + 1)?;
            out.add_scaled(&d, &frac(sign, j as i64 + 1));
        }
        Ok(out)
    }

    /// `(ab)c - a(bc)` from the normally ordered product alone.
    pub fn associator(&self, a: &FockState, b: &FockState, c: &FockState) -> Result<FockState> {
        let left = self.nop(&self.nop(a, b)?, c)?;
        let right = self.nop(a, &self.nop(b, c)?)?;
        Ok(left.sub(&right))
    }

    pub fn commutator(&self, a: &FockState, b: &FockState) -> Result<FockState> {
        Ok(self.nop(a, b)?.sub(&self.nop(b, a)?))
    }

    /// `sum_j :(d^{j+1} x / (j+1)) c_j:` for the coefficients `c_j` of `p`.
    pub(crate) fn integrate_left(&self, x: &FockState, p: &LambdaPoly) -> Result<FockState> {
        let mut out = FockState::zero();
        for (j, c) in p.univariate_coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let dx = self.derivative_n(x, j + 1)?.scale(&frac(1, j as i64 + 1));
            out.add_scaled(&self.nop(&dx, c)?, &Scalar::one());
        }
        Ok(out)
    }

    /// Associator formula: `(int_0^d a)[b_lambda c] + (int_0^d b)[a_lambda c]`.
    pub fn quasi_assoc_rhs(&self, a: &FockState, b: &FockState, c: &FockState) -> Result<FockState> {
        let bc = self.bracket(b, c)?;
        let ac = self.bracket(a, c)?;
        Ok(self.integrate_left(a, &bc)?.add(&self.integrate_left(b, &ac)?))
    }

    /// Noncommutative Wick formula right-hand side.
    pub fn wick_rhs(&self, a: &FockState, b: &FockState, c: &FockState) -> Result<LambdaPoly> {
        let ab = self.bracket(a, b)?;
        let ac = self.bracket(a, c)?;
        let mut out = LambdaPoly::zero();
        for ((i, _), g) in ab.terms() {
            out.add_term(*i, 0, &self.nop(g, c)?);
        }
        for ((i, _), d) in ac.terms() {
            out.add_term(*i, 0, &self.nop(b, d)?);
        }
        for ((i, _), g) in ab.terms() {
            let inner = self.bracket(g, c)?;
            for ((k, _), h) in inner.terms() {
                out.add_scaled_term(i + k + 1, 0, h, &frac(1, *k as i64 + 1));
            }
        }
        Ok(out)
    }

    /// Applies `d` to every coefficient.
    pub(crate) fn poly_derivative(&self, p: &LambdaPoly) -> Result<LambdaPoly> {
        p.try_map(|s| self.derivative(s))
    }

    /// Substitutes `lambda -> -d - lambda` into a univariate polynomial,
    /// with `d` acting on the coefficients.
    pub(crate) fn substitute_minus_d_minus_lambda(&self, p: &LambdaPoly) -> Result<LambdaPoly> {
        let mut out = LambdaPoly::zero();
        for (j, c) in p.univariate_coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if j % 2 == 0 { Scalar::one() } else { -Scalar::one() };
            for k in 0..=j {
                let dk = self.derivative_n(c, k)?;
                out.add_scaled_term((j - k) as u32, 0, &dk, &(&sign * binomial(j as i64, k as u32)));
            }
        }
        Ok(out)
    }

    /// Degreewise span of `a_(n) b`; `NonNegative` restricts to `n >= 0`.
    pub fn subspace_product(&self, a: &GradedFamily, b: &GradedFamily, mode: ProductMode) -> Result<GradedFamily> {
        let cutoff = self.cutoff();
        let mut spans: Vec<Subspace> = (0..=cutoff)
            .map(|m| Ok(Subspace::zero(m, self.dim(m)?)))
            .collect::<Result<_>>()?;
        for ma in 0..=a.cutoff().min(cutoff) {
            let xs = self.family_states(a, ma)?;
            if xs.is_empty() {
                continue;
            }
            for mb in 0..=b.cutoff().min(cutoff) {
                let ys = self.family_states(b, mb)?;
                if ys.is_empty() {
                    continue;
                }
                let top = (ma + mb) as i64 - 1;
                let lo = match mode {
                    ProductMode::All => top - cutoff as i64,
                    ProductMode::NonNegative => 0.max(top - cutoff as i64),
                };
                for n in lo..=top {
                    let deg = (top - n) as usize;
                    for x in &xs {
                        for y in &ys {
                            let p = self.product(x, n, y)?;
                            if !p.is_zero() {
                                spans[deg].insert(&self.to_vector(&p, deg)?)?;
                            }
                        }
                    }
                }
            }
        }
        GradedFamily::new(spans)
    }

    /// Basis states of the degree-`m` piece of a family.
    pub fn family_states(&self, fam: &GradedFamily, m: usize) -> Result<Vec<FockState>> {
        fam.piece(m).basis().iter().map(|v| self.from_vector(v, m)).collect()
    }

    /// Degreewise span of the homogeneous components of `states`.
    pub fn family_from_states<'a, I>(&self, states: I) -> Result<GradedFamily>
    where
        I: IntoIterator<Item = &'a FockState>,
    {
        let mut spans: Vec<Subspace> = (0..=self.cutoff())
            .map(|m| Ok(Subspace::zero(m, self.dim(m)?)))
            .collect::<Result<_>>()?;
        for s in states {
            for (m, comp) in s.components() {
                self.check_degree("family_from_states", m)?;
                spans[m].insert(&self.to_vector(&comp, m)?)?;
            }
        }
        GradedFamily::new(spans)
    }

    pub fn zero_family(&self) -> GradedFamily {
        let dims: Vec<usize> = (0..=self.cutoff())
            .map(|m| self.dim(m).expect("within cutoff"))
            .collect();
        GradedFamily::zero(&dims)
    }

    /// The C[d]-span of `states`, truncated at the cutoff.
    pub fn derivative_closure(&self, states: &[FockState]) -> Result<GradedFamily> {
        let mut all = Vec::new();
        for s in states {
            let mut x = s.clone();
            while !x.is_zero() {
                all.push(x.clone());
                match x.max_degree() {
                    Some(d) if d < self.cutoff() => x = self.derivative(&x)?,
                    _ => break,
                }
            }
        }
        self.family_from_states(all.iter())
    }

    /// The level-normalized Virasoro element `1/2 sum K^{-1}_{fg} :b_f b_g:`.
    pub fn virasoro_element(&self) -> Result<FockState> {
        let kinv = self.inverse_level();
        let mut w = FockState::zero();
        for f in 0..self.rank() {
            for g in 0..self.rank() {
                if kinv[f][g].is_zero() {
                    continue;
                }
                let p = self.nop(&self.generator(f), &self.generator(g))?;
                w.add_scaled(&p, &(&kinv[f][g] * frac(1, 2)));
            }
        }
        Ok(w)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductMode {
    All,
    NonNegative,
}

/// The identities the verifier knows about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityName {
    LeftSymmetry,
    Commass,
    Quasicomm,
    Wick,
    Skew,
    Sesquilinearity,
    Jacobi,
    ConformalWeight,
    Virasoro,
    Vacuum,
    Translation,
}

impl IdentityName {
    pub const ALL: [IdentityName; 11] = [
        IdentityName::LeftSymmetry,
        IdentityName::Commass,
        IdentityName::Quasicomm,
        IdentityName::Wick,
        IdentityName::Skew,
        IdentityName::Sesquilinearity,
        IdentityName::Jacobi,
        IdentityName::ConformalWeight,
        IdentityName::Virasoro,
        IdentityName::Vacuum,
        IdentityName::Translation,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            IdentityName::LeftSymmetry => "left_symmetry",
            IdentityName::Commass => "commass",
            IdentityName::Quasicomm => "quasicomm",
            IdentityName::Wick => "wick",
            IdentityName::Skew => "skew",
            IdentityName::Sesquilinearity => "sesquilinearity",
            IdentityName::Jacobi => "jacobi",
            IdentityName::ConformalWeight => "conformal_weight",
            IdentityName::Virasoro => "virasoro",
            IdentityName::Vacuum => "vacuum",
            IdentityName::Translation => "translation",
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            IdentityName::LeftSymmetry | IdentityName::Commass | IdentityName::Wick | IdentityName::Jacobi => 3,
            IdentityName::Quasicomm
            | IdentityName::Skew
            | IdentityName::Sesquilinearity
            | IdentityName::ConformalWeight
            | IdentityName::Translation => 2,
            IdentityName::Virasoro | IdentityName::Vacuum => 1,
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        IdentityName::ALL.into_iter().find(|i| i.as_str() == text)
    }
}

impl fmt::Display for IdentityName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of one identity check. `discrepancy` holds the nonzero
/// difference(s) on failure.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub identity: IdentityName,
    pub args: Vec<String>,
    pub pass: bool,
    pub discrepancy: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub central_charge: Option<String>,
}

/// Named residuals accumulated during a check; every one must vanish.
#[derive(Default)]
struct Residuals(Vec<(String, serde_json::Value)>);

impl Residuals {
    fn state(&mut self, name: impl Into<String>, s: FockState) {
        if !s.is_zero() {
            self.0.push((name.into(), s.to_json()));
        }
    }

    fn poly(&mut self, name: impl Into<String>, p: LambdaPoly) {
        if !p.is_zero() {
            self.0.push((name.into(), p.to_json()));
        }
    }

    fn fail(&mut self, name: impl Into<String>, why: impl Into<String>) {
        self.0.push((name.into(), serde_json::Value::String(why.into())));
    }

    fn into_report(self, identity: IdentityName, args: &[FockState], central: Option<String>) -> IdentityReport {
        let pass = self.0.is_empty();
        IdentityReport {
            identity,
            args: args.iter().map(ToString::to_string).collect(),
            pass,
            discrepancy: (!pass).then(|| serde_json::Value::Object(self.0.into_iter().collect())),
            central_charge: central,
        }
    }
}

impl Model {
    /// Checks one identity on the given arguments exactly.
    pub fn check_identity(&self, id: IdentityName, args: &[FockState]) -> Result<IdentityReport> {
        if args.len() != id.arity() {
            return Err(Error::Arity {
                identity: id.as_str(),
                expected: id.arity(),
                found: args.len(),
            });
        }
        let mut r = Residuals::default();
        let mut central = None;
        match id {
            IdentityName::LeftSymmetry => {
                let (a, b, c) = (&args[0], &args[1], &args[2]);
                let abc = self.associator(a, b, c)?;
                let bac = self.associator(b, a, c)?;
                r.state("associator_swap", abc.sub(&bac));
                r.state("associator_formula", abc.sub(&self.quasi_assoc_rhs(a, b, c)?));
            }
            IdentityName::Commass => {
                let (a, b, c) = (&args[0], &args[1], &args[2]);
                let lhs = self.associator(a, b, c)?;
                let ca = self.commutator(c, a)?;
                let cb = self.commutator(c, b)?;
                let ab = self.nop(a, b)?;
                let rhs = self.nop(&ca, b)?.add(&self.nop(a, &cb)?).sub(&self.commutator(c, &ab)?);
                r.state("difference", lhs.sub(&rhs));
            }
            IdentityName::Quasicomm => {
                let (a, b) = (&args[0], &args[1]);
                let lhs = self.commutator(a, b)?;
                let rhs = self.integrate_dl_lower(&self.bracket(a, b)?)?;
                r.state("difference", lhs.sub(&rhs));
            }
            IdentityName::Wick => {
                let (a, b, c) = (&args[0], &args[1], &args[2]);
                let lhs = self.bracket(a, &self.nop(b, c)?)?;
                r.poly("difference", lhs.sub(&self.wick_rhs(a, b, c)?));
            }
            IdentityName::Skew => {
                let (a, b) = (&args[0], &args[1]);
                let ab = self.bracket(a, b)?;
                let ba = self.substitute_minus_d_minus_lambda(&self.bracket(b, a)?)?;
                r.poly("difference", ab.add(&ba));
            }
            IdentityName::Sesquilinearity => {
                let (a, b) = (&args[0], &args[1]);
                let ab = self.bracket(a, b)?;
                let da_b = self.bracket(&self.derivative(a)?, b)?;
                r.poly("left", da_b.add(&ab.shift(1, 0)));
                let a_db = self.bracket(a, &self.derivative(b)?)?;
                let rhs = self.poly_derivative(&ab)?.add(&ab.shift(1, 0));
                r.poly("right", a_db.sub(&rhs));
            }
            IdentityName::Jacobi => {
                let (a, b, c) = (&args[0], &args[1], &args[2]);
                r.poly("difference", self.jacobi_residual(a, b, c)?);
            }
            IdentityName::ConformalWeight => {
                let (w, x) = (&args[0], &args[1]);
                match x.degree() {
                    None if x.is_zero() => {}
                    None => r.fail("argument", "x must be homogeneous"),
                    Some(m) => {
                        let p = self.bracket(w, x)?;
                        r.state("lambda0", p.coeff(0, 0).sub(&self.derivative(x)?));
                        r.state("lambda1", p.coeff(1, 0).sub(&x.scale(&int(m as i64))));
                    }
                }
            }
            IdentityName::Virasoro => {
                let w = &args[0];
                let p = self.bracket(w, w)?;
                r.state("lambda0", p.coeff(0, 0).sub(&self.derivative(w)?));
                r.state("lambda1", p.coeff(1, 0).sub(&w.scale(&int(2))));
                r.state("lambda2", p.coeff(2, 0));
                let top = p.coeff(3, 0);
                let z = top.vacuum_coefficient();
                r.state("lambda3_noncentral", top.sub(&self.vacuum().scale(&z)));
                for ((i, j), s) in p.terms() {
                    if *i > 3 || *j > 0 {
                        r.state(format!("lambda{i}"), s.clone());
                    }
                }
                central = Some(crate::linalg::format_scalar(&(z * int(12))));
            }
            IdentityName::Vacuum => {
                let a = &args[0];
                let one = self.vacuum();
                r.state("unit_left", self.nop(&one, a)?.sub(a));
                r.state("unit_right", self.nop(a, &one)?.sub(a));
                let da = a.max_degree().unwrap_or(0);
                for n in 0..=(da as i64) {
                    r.state(format!("a_({n})1"), self.product(a, n, &one)?);
                    r.state(format!("1_({n})a"), self.product(&one, n, a)?);
                }
                // Y(a,z)1 = e^{z d} a
                let mut j = 1usize;
                while da + j <= self.cutoff() {
                    let lhs = self.product(a, -(j as i64) - 1, &one)?;
                    let rhs = self.derivative_n(a, j)?.scale(&factorial(j as u32).recip());
                    r.state(format!("a_(-{})1", j + 1), lhs.sub(&rhs));
                    r.state(format!("1_(-{})a", j + 1), self.product(&one, -(j as i64) - 1, a)?);
                    j += 1;
                }
            }
            IdentityName::Translation => {
                let (a, b) = (&args[0], &args[1]);
                let (Some(da), Some(db)) = (a.max_degree(), b.max_degree()) else {
                    return Ok(r.into_report(id, args, None));
                };
                let sum = (da + db) as i64;
                let lo = sum - self.cutoff() as i64;
                let d_a = self.derivative(a)?;
                let d_b = self.derivative(b)?;
                for n in lo..=sum {
                    let lhs = self.derivative(&self.product(a, n, b)?)?;
                    let da_b = self.product(&d_a, n, b)?;
                    let a_db = self.product(a, n, &d_b)?;
                    r.state(format!("derivation_{n}"), lhs.sub(&da_b).sub(&a_db));
                    let lower = self.product(a, n - 1, b)?;
                    r.state(format!("d_field_{n}"), da_b.add(&lower.scale(&int(n))));
                }
                // j! a_(-j-1) b = (d^j a)_(-1) b
                let mut j = 0usize;
                while da + db + j <= self.cutoff() {
                    let lhs = self.product(a, -(j as i64) - 1, b)?.scale(&factorial(j as u32));
                    let rhs = self.nop(&self.derivative_n(a, j)?, b)?;
                    r.state(format!("negative_product_{j}"), lhs.sub(&rhs));
                    j += 1;
                }
            }
        }
        Ok(r.into_report(id, args, central))
    }

    /// `[a_l [b_m c]] - [b_m [a_l c]] - [[a_l b]_{l+m} c]` as a bivariate polynomial.
    pub fn jacobi_residual(&self, a: &FockState, b: &FockState, c: &FockState) -> Result<LambdaPoly> {
        let mut out = LambdaPoly::zero();
        for ((j, _), cj) in self.bracket(b, c)?.terms() {
            for ((i, _), e) in self.bracket(a, cj)?.terms() {
                out.add_term(*i, *j, e);
            }
        }
        for ((i, _), di) in self.bracket(a, c)?.terms() {
            for ((j, _), f) in self.bracket(b, di)?.terms() {
                out.add_scaled_term(*i, *j, f, &-Scalar::one());
            }
        }
        for ((i, _), g) in self.bracket(a, b)?.terms() {
            for ((k, _), h) in self.bracket(g, c)?.terms() {
                for l in 0..=*k {
                    let coeff = -binomial(*k as i64, l);
                    out.add_scaled_term(i + l, k - l, h, &coeff);
                }
            }
        }
        Ok(out)
    }

    /// Central charge read off `[w_l w]`, if `w` is a Virasoro element.
    pub fn central_charge(&self, w: &FockState) -> Result<Option<Scalar>> {
        let rep = self.check_identity(IdentityName::Virasoro, std::slice::from_ref(w))?;
        if !rep.pass {
            return Ok(None);
        }
        let p = self.bracket(w, w)?;
        Ok(Some(p.coeff(3, 0).vacuum_coefficient() * int(12)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockMonomial;

    fn st(m: &Model, text: &str) -> FockState {
        let _ = m;
        FockState::parse(text).unwrap()
    }

    #[test]
    fn b1b_is_vacuum() {
        let m = Model::rank_one(4).unwrap();
        let b = m.generator(0);
        assert_eq!(m.nth_product(&b, 1, &b).unwrap(), m.vacuum());
        assert!(m.nth_product(&b, 0, &b).unwrap().is_zero());
    }

    #[test]
    fn negative_products_follow_derivatives() {
        let m = Model::rank_one(6).unwrap();
        let b = m.generator(0);
        let db = m.derivative(&b).unwrap();
        assert_eq!(m.nth_product(&b, -2, &b).unwrap(), m.nop(&db, &b).unwrap());
    }

    #[test]
    fn b0_of_bb_vanishes() {
        let m = Model::rank_one(4).unwrap();
        let b = m.generator(0);
        let bb = m.nop(&b, &b).unwrap();
        assert!(m.nth_product(&b, 0, &bb).unwrap().is_zero());
    }

    #[test]
    fn nop_examples() {
        let m = Model::rank_one(6).unwrap();
        let b = m.generator(0);
        assert_eq!(m.nop(&b, &b).unwrap(), st(&m, "a0[-1]^2|0>"));
        let x = st(&m, "2*a0[-3]a0[-1]|0> + a0[-2]|0>");
        assert_eq!(m.nop(&m.vacuum(), &x).unwrap(), x);
        let db = m.derivative(&b).unwrap();
        assert_eq!(m.commutator(&db, &b).unwrap(), FockState::zero());
    }

    #[test]
    fn bb_b_associator() {
        let m = Model::rank_one(6).unwrap();
        let b = m.generator(0);
        let assoc = m.associator(&b, &b, &b).unwrap();
        let ddb = m.derivative_n(&b, 2).unwrap();
        assert_eq!(assoc, ddb);
        assert_eq!(m.quasi_assoc_rhs(&b, &b, &b).unwrap(), ddb);
        let bbb = m
            .right_assoc(&[(0, b.clone()), (0, b.clone()), (0, b.clone())])
            .unwrap();
        let left = m.nop(&m.nop(&b, &b).unwrap(), &b).unwrap();
        assert_eq!(left.sub(&bbb), ddb);
    }

    #[test]
    fn right_assoc_small() {
        let m = Model::rank_one(6).unwrap();
        let b = m.generator(0);
        assert_eq!(m.right_assoc(&[(0, b.clone())]).unwrap(), b);
        let db = m.derivative(&b).unwrap();
        assert_eq!(
            m.right_assoc(&[(1, b.clone()), (0, b.clone())]).unwrap(),
            m.nop(&db, &b).unwrap()
        );
    }

    #[test]
    fn brackets() {
        let m = Model::rank_one(8).unwrap();
        let b = m.generator(0);
        let bb = m.nop(&b, &b).unwrap();
        assert_eq!(
            m.lambda_bracket(&b, &b).unwrap(),
            LambdaPoly::constant(m.vacuum()).shift(1, 0)
        );
        assert_eq!(
            m.lambda_bracket(&b, &bb).unwrap(),
            LambdaPoly::constant(b.scale(&int(2))).shift(1, 0)
        );
        let w = m.virasoro_element().unwrap();
        let ww = m.lambda_bracket(&w, &w).unwrap();
        let mut expect = LambdaPoly::constant(m.derivative(&w).unwrap());
        expect.add_term(1, 0, &w.scale(&int(2)));
        expect.add_term(3, 0, &m.vacuum().scale(&frac(1, 12)));
        assert_eq!(ww, expect);
    }

    #[test]
    fn integrals() {
        let m = Model::rank_one(6).unwrap();
        let b = m.generator(0);
        let one = LambdaPoly::constant(m.vacuum());
        assert!(m.integrate_dl_lower(&one.shift(1, 0)).unwrap().is_zero());
        assert!(m.integrate_dl_lower(&one.shift(2, 0)).unwrap().is_zero());
        assert_eq!(
            m.integrate_dl_lower(&LambdaPoly::constant(b.clone())).unwrap(),
            m.derivative(&b).unwrap()
        );
    }

    #[test]
    fn wick_examples() {
        let m = Model::rank_one(8).unwrap();
        let b = m.generator(0);
        assert_eq!(
            m.wick_rhs(&b, &b, &b).unwrap(),
            m.lambda_bracket(&b, &m.nop(&b, &b).unwrap()).unwrap()
        );
        let x = st(&m, "a0[-2]a0[-1]|0>");
        assert_eq!(
            m.wick_rhs(&x, &m.vacuum(), &b).unwrap(),
            m.lambda_bracket(&x, &b).unwrap()
        );
        let w = m.virasoro_element().unwrap();
        let bb = m.nop(&b, &b).unwrap();
        assert_eq!(m.wick_rhs(&w, &b, &b).unwrap(), m.lambda_bracket(&w, &bb).unwrap());
    }

    #[test]
    fn associator_edge_cases() {
        let m = Model::rank_one(6).unwrap();
        let b = m.generator(0);
        let x = st(&m, "a0[-2]|0>");
        assert!(m.quasi_assoc_rhs(&b, &x, &m.vacuum()).unwrap().is_zero());
        assert!(m.quasi_assoc_rhs(&m.vacuum(), &b, &x).unwrap().is_zero());
    }

    #[test]
    fn identity_arity() {
        let m = Model::rank_one(4).unwrap();
        let b = m.generator(0);
        assert!(matches!(
            m.check_identity(IdentityName::Jacobi, &[b.clone()]),
            Err(Error::Arity { .. })
        ));
    }

    #[test]
    fn identity_examples() {
        let m = Model::rank_one(8).unwrap();
        let b = m.generator(0);
        let db = m.derivative(&b).unwrap();
        let bb = m.nop(&b, &b).unwrap();
        assert!(
            m.check_identity(IdentityName::Quasicomm, &[b.clone(), b.clone()])
                .unwrap()
                .pass
        );
        assert!(
            m.check_identity(IdentityName::LeftSymmetry, &[b.clone(), db, bb])
                .unwrap()
                .pass
        );
        let w = m.virasoro_element().unwrap();
        let rep = m.check_identity(IdentityName::Virasoro, &[w.clone()]).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.central_charge.as_deref(), Some("1/1"));
    }

    #[test]
    fn failing_identity_reports_discrepancy() {
        let m = Model::rank_one(6).unwrap();
        let b = m.generator(0);
        // b is not a Virasoro element
        let rep = m
            .check_identity(IdentityName::ConformalWeight, &[b.clone(), b.clone()])
            .unwrap();
        assert!(!rep.pass);
        assert!(rep.discrepancy.is_some());
    }

    #[test]
    fn vacuum_subspace_products() {
        let m = Model::rank_one(4).unwrap();
        let one = m.family_from_states([m.vacuum()].iter()).unwrap();
        let full = GradedFamily::new((0..=4).map(|d| m.full_space(d).unwrap()).collect()).unwrap();
        assert!(m
            .subspace_product(&one, &full, ProductMode::NonNegative)
            .unwrap()
            .is_zero());
        let b = m.family_from_states([m.generator(0)].iter()).unwrap();
        let bb = m.subspace_product(&b, &b, ProductMode::NonNegative).unwrap();
        assert_eq!(bb.dims(), vec![1, 0, 0, 0, 0]);
    }

    #[test]
    fn cutoff_overflow() {
        let m = Model::rank_one(3).unwrap();
        let x = FockState::from_monomial(FockMonomial::parse("a0[-2]|0>").unwrap());
        assert!(matches!(m.nop(&x, &x), Err(Error::CutoffExceeded { .. })));
    }

    #[test]
    fn bracket_counter_is_thread_local() {
        let m = Model::rank_one(4).unwrap();
        let b = m.generator(0);
        let before = bracket_call_count();
        m.nop(&b, &b).unwrap();
        assert_eq!(bracket_call_count(), before);
        m.lambda_bracket(&b, &b).unwrap();
        assert_eq!(bracket_call_count(), before + 1);
    }
}
