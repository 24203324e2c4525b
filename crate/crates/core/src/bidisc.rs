//! Pairs `(M_{z1}|_S, M_{z2}|_S)` for joint invariant subspaces `S` of
//! `H²(D²)` generated by polynomials, truncated by total degree.
//!
//! Monomials `z1^a z2^b` are orthonormal; a polynomial of total degree `<= N`
//! is a vector over the monomials ordered by total degree `d = a + b`, then by
//! `b`, i.e. at index `d(d+1)/2 + b`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::defect::five_way_verdict;
use crate::error::{Error, Result};
use crate::json::{self, JsonComplex};
use crate::linalg::{
    c, identity, kernel_within, op_norm, operator_class, select_columns, vec_norm, zeros, CMatrix, CVector, Subspace,
    TolerancePolicy, C64,
};
use crate::model::{GradedPair, PairPurity, Purity};

pub const DEFAULT_GUARD: usize = 3;
/// Escalation limit `M = N + ESCALATION` for adjoint projections.
pub const ESCALATION: usize = 8;

pub fn monomial_index(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

pub fn monomial_count(n: usize) -> usize {
    (n + 1) * (n + 2) / 2
}

fn monomial_at(idx: usize) -> (usize, usize) {
    let mut d = 0;
    while monomial_index(d + 1, 0) <= idx {
        d += 1;
    }
    let b = idx - monomial_index(d, 0);
    (d - b, b)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Term {
    a: usize,
    b: usize,
    c: JsonComplex,
}

#[derive(Serialize, Deserialize)]
struct RawPoly {
    terms: Vec<Term>,
}

/// Polynomial in `z1, z2` with finitely many nonzero coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoly", into = "RawPoly")]
pub struct BivariatePoly {
    terms: BTreeMap<(usize, usize), C64>,
}

impl TryFrom<RawPoly> for BivariatePoly {
    type Error = Error;

    fn try_from(raw: RawPoly) -> Result<Self> {
        Self::new(raw.terms.into_iter().map(|t| ((t.a, t.b), json::complex_from_json(t.c))))
    }
}

impl From<BivariatePoly> for RawPoly {
    fn from(p: BivariatePoly) -> Self {
        RawPoly {
            terms: p
                .terms
                .iter()
                .map(|(&(a, b), &z)| Term {
                    a,
                    b,
                    c: json::complex_to_json(z),
                })
                .collect(),
        }
    }
}

impl BivariatePoly {
    /// Repeated exponents are summed; exact zeros are dropped.
    pub fn new<I: IntoIterator<Item = ((usize, usize), C64)>>(terms: I) -> Result<Self> {
        let mut map: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for (k, z) in terms {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite("polynomial coefficient"));
            }
            *map.entry(k).or_default() += z;
        }
        map.retain(|_, z| *z != C64::new(0.0, 0.0));
        Ok(Self { terms: map })
    }

    pub fn monomial(a: usize, b: usize) -> Self {
        Self {
            terms: BTreeMap::from([((a, b), c(1.0, 0.0))]),
        }
    }

    pub fn terms(&self) -> &BTreeMap<(usize, usize), C64> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> Option<usize> {
        self.terms.keys().map(|&(a, b)| a + b).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|&(a, b)| a + b);
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    pub fn times_monomial(&self, a: usize, b: usize) -> Self {
        Self {
            terms: self.terms.iter().map(|(&(x, y), &z)| ((x + a, y + b), z)).collect(),
        }
    }

    /// Coefficient vector over monomials of total degree `<= n`.
    pub fn to_vector(&self, n: usize) -> Result<CVector> {
        let deg = self.total_degree().unwrap_or(0);
        if deg > n {
            return Err(Error::Guard { degree: deg, limit: n });
        }
        let mut v = CVector::zeros(monomial_count(n));
        for (&(a, b), &z) in &self.terms {
            v[monomial_index(a, b)] = z;
        }
        Ok(v)
    }

    /// Entries with modulus `<= cut` are dropped.
    pub fn from_vector(v: &CVector, cut: f64) -> Self {
        let terms = (0..v.len())
            .filter(|&i| v[i].norm() > cut)
            .map(|i| (monomial_at(i), v[i]))
            .collect();
        Self { terms }
    }

    pub fn norm(&self) -> f64 {
        self.terms.values().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Generator file contents.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BidiscSpec {
    pub generators: Vec<BivariatePoly>,
    pub degree: usize,
    #[serde(default = "default_guard")]
    pub guard: usize,
}

fn default_guard() -> usize {
    DEFAULT_GUARD
}

/// Graded orthonormal basis of `S_N`, the span of the monomial multiples of
/// the generators of total degree `<= N`.
#[derive(Clone, Debug)]
pub struct TruncatedSubspace {
    generators: Vec<BivariatePoly>,
    degree: usize,
    guard: usize,
    basis: CMatrix,
    grades: Vec<usize>,
}

impl TruncatedSubspace {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn guard(&self) -> usize {
        self.guard
    }

    pub fn generators(&self) -> &[BivariatePoly] {
        &self.generators
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Columns are coefficient vectors over monomials of degree `<= N`.
    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn grades(&self) -> &[usize] {
        &self.grades
    }

    pub fn with_guard(mut self, guard: usize) -> Self {
        self.guard = guard;
        self
    }

    /// Number of basis vectors per grade.
    pub fn grade_profile(&self) -> Vec<usize> {
        let mut out = vec![0; self.degree + 1];
        for &g in &self.grades {
            out[g] += 1;
        }
        out
    }
}

/// Degree-ordered Gram–Schmidt over the candidates `z^α g`; the grade of a
/// basis vector is the total degree of the candidate that produced it.
pub fn span_to_degree(generators: &[BivariatePoly], n: usize) -> Result<TruncatedSubspace> {
    let gens: Vec<BivariatePoly> = generators.iter().filter(|g| !g.is_zero()).cloned().collect();
    if gens.is_empty() {
        return Err(Error::Precondition("at least one nonzero generator is required".into()));
    }
    let mut candidates: Vec<(usize, CVector)> = Vec::new();
    for g in &gens {
        let dg = g.total_degree().unwrap_or(0);
        if dg > n {
            continue;
        }
        for d in 0..=(n - dg) {
            for b in 0..=d {
                candidates.push((d + dg, g.times_monomial(d - b, b).to_vector(n)?));
            }
        }
    }
    // stable: within a degree, generator order then monomial order
    candidates.sort_by_key(|(d, _)| *d);
    let total = monomial_count(n);
    let mut cols: Vec<CVector> = Vec::new();
    let mut grades = Vec::new();
    for (d, v) in candidates {
        let scale = vec_norm(&v);
        let mut r = v;
        for _ in 0..2 {
            for q in &cols {
                let coef = q.dotc(&r);
                r -= q * coef;
            }
        }
        let nr = vec_norm(&r);
        if nr <= 1e-10 * scale {
            continue;
        }
        cols.push(r / c(nr, 0.0));
        grades.push(d);
        if cols.len() == total {
            break;
        }
    }
    let mut basis = zeros(total, cols.len());
    for (k, q) in cols.iter().enumerate() {
        basis.set_column(k, q);
    }
    Ok(TruncatedSubspace {
        generators: gens,
        degree: n,
        guard: DEFAULT_GUARD,
        basis,
        grades,
    })
}

/// Multiplication by `z_j` on monomials of degree `<= n`, dropping degree
/// `n + 1`.
fn shift_matrix(j: usize, n: usize) -> CMatrix {
    let total = monomial_count(n);
    let mut m = zeros(total, total);
    for d in 0..n {
        for b in 0..=d {
            let a = d - b;
            let to = if j == 1 { monomial_index(a + 1, b) } else { monomial_index(a, b + 1) };
            m[(to, monomial_index(a, b))] = c(1.0, 0.0);
        }
    }
    m
}

fn lift(v: &CVector, n: usize) -> CVector {
    let mut out = CVector::zeros(monomial_count(n));
    out.rows_mut(0, v.len()).copy_from(v);
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct Projection {
    pub value: BivariatePoly,
    /// Truncation degree whose projection is returned.
    pub degree: usize,
    /// Norm of the change from the previous truncation.
    pub last_change: f64,
}

/// `P_S f` by projecting onto `S_N`, `S_{N+2}`, … until successive values
/// differ by less than `approx_tol`, up to `S_limit`.
pub fn project_onto_s(
    f: &BivariatePoly,
    generators: &[BivariatePoly],
    n: usize,
    guard: usize,
    limit: usize,
    tol: &TolerancePolicy,
) -> Result<Projection> {
    let deg = f.total_degree().unwrap_or(0);
    if deg + guard > n {
        return Err(Error::Guard {
            degree: deg,
            limit: n.saturating_sub(guard),
        });
    }
    let (vals, degree, last_change) = project_many(&[f.to_vector(n)?], generators, n, limit, tol)?;
    Ok(Projection {
        value: BivariatePoly::from_vector(&vals[0], 0.0),
        degree,
        last_change,
    })
}

/// Escalated projection of several vectors at once; returns values lifted to
/// the accepted degree.
fn project_many(
    vs: &[CVector],
    generators: &[BivariatePoly],
    n: usize,
    limit: usize,
    tol: &TolerancePolicy,
) -> Result<(Vec<CVector>, usize, f64)> {
    let project = |deg: usize| -> Result<Vec<CVector>> {
        let s = span_to_degree(generators, deg)?;
        let b = s.basis();
        Ok(vs.iter().map(|v| b * (b.adjoint() * lift(v, deg))).collect())
    };
    let mut prev = project(n)?;
    let mut prev_deg = n;
    let mut last_change = f64::INFINITY;
    let mut deg = n + 2;
    while deg <= limit {
        let next = project(deg)?;
        last_change = next
            .iter()
            .zip(&prev)
            .map(|(x, y)| vec_norm(&(x - lift(y, deg))))
            .fold(0.0, f64::max);
        if last_change < tol.approx_tol {
            return Ok((next, deg, last_change));
        }
        prev = next;
        prev_deg = deg;
        deg += 2;
    }
    Err(Error::NoStabilization {
        limit: limit.max(prev_deg),
        last_change,
    })
}

/// `(M_{z1}|_S, M_{z2}|_S)` compressed to `S_N`, graded by total degree.
///
/// Forward maps are exact below degree `N`. The adjoint compressions are
/// checked on interior coordinates against the escalated projection
/// `P_S M_{z_j}*`; a mismatch means this truncation cannot represent the
/// adjoint and is reported as an error.
pub fn restricted_pair(s: &TruncatedSubspace, tol: &TolerancePolicy) -> Result<GradedPair> {
    let n = s.degree;
    let b = s.basis();
    let shifts = [shift_matrix(1, n), shift_matrix(2, n)];
    let v1 = b.adjoint() * &shifts[0] * b;
    let v2 = b.adjoint() * &shifts[1] * b;

    let interior: Vec<usize> = (0..s.dim()).filter(|&k| s.grades[k] + s.guard <= n).collect();
    if !s.generators.iter().all(BivariatePoly::is_homogeneous) && !interior.is_empty() {
        let limit = n + ESCALATION;
        for (j, t) in [&v1, &v2].into_iter().enumerate() {
            let inputs: Vec<CVector> = interior
                .iter()
                .map(|&k| shifts[j].adjoint() * b.column(k))
                .collect();
            let (exact, deg, _) = project_many(&inputs, &s.generators, n, limit, tol)?;
            let compressed = b * t.adjoint();
            let worst = interior
                .iter()
                .zip(&exact)
                .map(|(&k, e)| vec_norm(&(e - lift(&compressed.column(k).into_owned(), deg))))
                .fold(0.0, f64::max);
            if worst > tol.approx_tol {
                return Err(Error::Residual {
                    what: "adjoint compression on interior degrees vs escalated projection",
                    residual: worst,
                    tol: tol.approx_tol,
                });
            }
        }
    }
    let declared = Purity::Declared { pure: true };
    Ok(GradedPair::from_graded_parts(
        v1,
        v2,
        &s.grades,
        n,
        s.guard,
        PairPurity {
            v1: declared,
            v2: declared,
            product: declared,
        },
    ))
}

/// Builds the pair straight from a generator file.
pub fn pair_from_spec(spec: &BidiscSpec, tol: &TolerancePolicy) -> Result<(TruncatedSubspace, GradedPair)> {
    if spec.degree < spec.guard + 1 {
        return Err(Error::Guard {
            degree: spec.guard + 1,
            limit: spec.degree,
        });
    }
    let s = span_to_degree(&spec.generators, spec.degree)?.with_guard(spec.guard);
    let pair = restricted_pair(&s, tol)?;
    Ok((s, pair))
}

/// Per-grade dimensions of `ker T*` on interior grades, `T` given in the
/// graded basis of `s`.
fn kernel_profile(s: &TruncatedSubspace, t: &CMatrix, tol: &TolerancePolicy) -> Vec<usize> {
    let top = s.degree.saturating_sub(s.guard);
    let mut out = Vec::with_capacity(top + 1);
    let mut below = 0;
    for k in 0..=top {
        let idx: Vec<usize> = (0..s.dim()).filter(|&i| s.grades[i] <= k).collect();
        let band = Subspace::coordinate(s.dim(), &idx);
        let dim = kernel_within(&t.adjoint(), &band, tol).dim();
        out.push(dim - below);
        below = dim;
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct SlocinskiVerdict {
    /// The pair is doubly commuting.
    pub applicable: bool,
    /// Signatures match the full-space pair; `None` when not applicable.
    pub pass: Option<bool>,
    pub defect_rank: usize,
    pub defect_is_projection: bool,
    /// Dimensions of `W ∩ (grade k)` for interior `k`, from the lowest
    /// nonzero grade on.
    pub wandering_profile: Vec<usize>,
    /// The same for `H²(D²)`: `1, 2, 2, …`.
    pub reference_profile: Vec<usize>,
}

/// For doubly commuting `S`, compares the signatures that a unitary
/// equivalence with `(M_{z1}, M_{z2})` on `H²(D²)` would force: a rank-one
/// projection defect and the grade profile of `W`.
pub fn slocinski_check(s: &TruncatedSubspace, pair: &GradedPair, tol: &TolerancePolicy) -> Result<SlocinskiVerdict> {
    let report = five_way_verdict(pair, tol)?;
    let rank = report.spectrum.iter().filter(|&&x| x.abs() > tol.approx_tol).count();
    let is_projection = operator_class(&report.defect_matrix, tol.approx_tol).projection;
    let product = pair.v1() * pair.v2();
    let mut profile = kernel_profile(s, &product, tol);
    let first = profile.iter().position(|&k| k > 0).unwrap_or(profile.len());
    profile.drain(..first);
    let reference: Vec<usize> = (0..profile.len()).map(|k| if k == 0 { 1 } else { 2 }).collect();
    let applicable = report.verdicts.doubly_commuting;
    let pass = applicable.then(|| rank == 1 && is_projection && !profile.is_empty() && profile == reference);
    Ok(SlocinskiVerdict {
        applicable,
        pass,
        defect_rank: rank,
        defect_is_projection: is_projection,
        wandering_profile: profile,
        reference_profile: reference,
    })
}

/// `‖V1V2 − V2V1‖` and the adjoint pairing defect on interior columns.
pub fn structural_residuals(pair: &GradedPair) -> (f64, f64) {
    let comm = op_norm(&(pair.v1() * pair.v2() - pair.v2() * pair.v1()));
    let idx = pair.interior_indices();
    let sel = select_columns(&identity(pair.dim()), &idx);
    let iso = [pair.v1(), pair.v2()]
        .iter()
        .map(|t| op_norm(&((t.adjoint() * *t - identity(pair.dim())) * &sel)))
        .fold(0.0, f64::max);
    (comm, iso)
}
