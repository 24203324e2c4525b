//! Joint unitary equivalence of pure pairs through their invariant tuples.
//!
//! Two tuples are compared by traces of words in `{C1, C2, C1*, C2*}`; a
//! positive answer additionally needs a unitary `Z` with `Z C_j = C̃_j Z`,
//! recovered from the intertwiner null space and verified.

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bcl::{coefficients_from_wandering, wandering_data_of_graded};
use crate::error::{Error, Result};
use crate::json;
use crate::linalg::{identity, op_norm, polar_unitary, zeros, CMatrix, CVector, TolerancePolicy, C64};
use crate::model::GradedPair;
use crate::random::gaussian_matrix;

/// Seed of the random combination of intertwiners.
const WITNESS_SEED: u64 = 0x1503_a1e5;
const WITNESS_ATTEMPTS: usize = 4;

#[derive(Clone, Debug, Serialize)]
pub struct InvariantTuple {
    #[serde(with = "json::matrix")]
    pub c1: CMatrix,
    #[serde(with = "json::matrix")]
    pub c2: CMatrix,
}

impl InvariantTuple {
    pub fn new(c1: CMatrix, c2: CMatrix) -> Result<Self> {
        if !c1.is_square() || c1.shape() != c2.shape() {
            return Err(Error::Dimension(format!(
                "invariant matrices must be square of equal size, got {:?} and {:?}",
                c1.shape(),
                c2.shape()
            )));
        }
        crate::linalg::check_finite(&c1, "C1")?;
        crate::linalg::check_finite(&c2, "C2")?;
        Ok(Self { c1, c2 })
    }

    pub fn dim(&self) -> usize {
        self.c1.nrows()
    }

    pub fn conjugate(&self, z: &CMatrix) -> Self {
        Self {
            c1: z * &self.c1 * z.adjoint(),
            c2: z * &self.c2 * z.adjoint(),
        }
    }

    fn generators(&self) -> [CMatrix; 4] {
        [
            self.c1.clone(),
            self.c2.clone(),
            self.c1.adjoint(),
            self.c2.adjoint(),
        ]
    }
}

const LETTERS: [&str; 4] = ["1", "2", "1*", "2*"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    True,
    False,
    Undetermined,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub verdict: Verdict,
    /// Shortest word whose traces differ, over `{1, 2, 1*, 2*}`.
    pub distinguishing_word: Option<String>,
    pub trace_a: Option<[f64; 2]>,
    pub trace_b: Option<[f64; 2]>,
    /// Number of linearly independent words examined.
    pub algebra_dim: usize,
    /// Longest word among them.
    pub max_word_length: usize,
    #[serde(with = "json::opt_matrix")]
    pub witness: Option<CMatrix>,
    pub witness_residual: Option<f64>,
    pub intertwiner_dim: usize,
    pub reason: String,
}

impl EquivalenceReport {
    fn short(verdict: Verdict, reason: String) -> Self {
        Self {
            verdict,
            distinguishing_word: None,
            trace_a: None,
            trace_b: None,
            algebra_dim: 0,
            max_word_length: 0,
            witness: None,
            witness_residual: None,
            intertwiner_dim: 0,
            reason,
        }
    }
}

fn flatten(m: &CMatrix) -> CVector {
    CVector::from_iterator(m.len(), m.iter().cloned())
}

struct Word {
    letters: Vec<usize>,
    a: CMatrix,
    b: CMatrix,
}

impl Word {
    fn name(&self) -> String {
        if self.letters.is_empty() {
            return "e".into();
        }
        self.letters.iter().map(|&l| LETTERS[l]).collect()
    }
}

enum TraceOutcome {
    Agree { algebra_dim: usize, max_len: usize },
    Differ { word: Word, ta: C64, tb: C64, algebra_dim: usize, max_len: usize },
}

/// Breadth-first search over words, keeping only those independent of the
/// joint span already found; the trace difference is linear on that span, so
/// checking it on the kept words covers every word, and the first failure is
/// a shortest distinguishing word.
fn trace_search(a: &InvariantTuple, b: &InvariantTuple, tol: f64) -> TraceOutcome {
    let n = a.dim();
    let ga = a.generators();
    let gb = b.generators();
    let mut basis: Vec<CVector> = Vec::new();
    let mut queue = VecDeque::new();
    let mut kept = 0;
    let mut max_len = 0;
    let mut max_trace: f64 = 1.0;
    let start = Word {
        letters: vec![],
        a: identity(n),
        b: identity(n),
    };
    queue.push_back(start);
    while let Some(word) = queue.pop_front() {
        let mut v = flatten(&word.a);
        v.extend(word.b.iter().cloned());
        let norm = v.norm();
        if norm <= f64::MIN_POSITIVE {
            continue;
        }
        v /= C64::new(norm, 0.0);
        for _ in 0..2 {
            for q in &basis {
                let coef = q.dotc(&v);
                v -= q * coef;
            }
        }
        let resid = v.norm();
        if resid <= 1e-8 {
            continue;
        }
        v /= C64::new(resid, 0.0);
        basis.push(v);
        kept += 1;
        max_len = max_len.max(word.letters.len());

        let ta = word.a.trace();
        let tb = word.b.trace();
        max_trace = max_trace.max(ta.norm()).max(tb.norm());
        if (ta - tb).norm() > tol * max_trace {
            return TraceOutcome::Differ {
                word,
                ta,
                tb,
                algebra_dim: kept,
                max_len,
            };
        }
        if basis.len() >= 2 * n * n {
            break;
        }
        for g in 0..4 {
            let mut letters = word.letters.clone();
            letters.push(g);
            queue.push_back(Word {
                letters,
                a: &word.a * &ga[g],
                b: &word.b * &gb[g],
            });
        }
    }
    TraceOutcome::Agree {
        algebra_dim: kept,
        max_len,
    }
}

/// `max_j ‖Z C_j − C̃_j Z‖` over `C_j` and their adjoints.
pub fn intertwining_residual(z: &CMatrix, a: &InvariantTuple, b: &InvariantTuple) -> f64 {
    a.generators()
        .iter()
        .zip(b.generators().iter())
        .map(|(x, y)| op_norm(&(z * x - y * z)))
        .fold(0.0, f64::max)
}

/// Null space of `Z ↦ (Z C_j − C̃_j Z)_j` as matrices.
fn intertwiners(a: &InvariantTuple, b: &InvariantTuple, tol: f64) -> Vec<CMatrix> {
    let n = a.dim();
    let nn = n * n;
    let id = identity(n);
    let ga = a.generators();
    let gb = b.generators();
    let mut sys = zeros(4 * nn, nn);
    for g in 0..4 {
        // vec(Z X) = (Xᵀ ⊗ I) vec Z, vec(Y Z) = (I ⊗ Y) vec Z
        let block = ga[g].transpose().kronecker(&id) - id.kronecker(&gb[g]);
        sys.view_mut((g * nn, 0), (nn, nn)).copy_from(&block);
    }
    let scale = 1.0 + op_norm(&sys);
    let gram = sys.adjoint() * &sys;
    let gram = (&gram + gram.adjoint()) * C64::new(0.5, 0.0);
    let eig = gram.symmetric_eigen();
    let cut = (tol * scale).powi(2);
    (0..nn)
        .filter(|&k| eig.eigenvalues[k] <= cut)
        .map(|k| {
            let col = eig.eigenvectors.column(k);
            CMatrix::from_column_slice(n, n, col.as_slice())
        })
        .collect()
}

/// Three-valued decision of `(C1, C2) ≅ (C̃1, C̃2)`; `True` only with a
/// verified unitary witness.
pub fn simultaneous_unitary_equiv(a: &InvariantTuple, b: &InvariantTuple, tol: &TolerancePolicy) -> EquivalenceReport {
    if a.dim() != b.dim() {
        return EquivalenceReport::short(Verdict::False, format!("dimensions differ: {} vs {}", a.dim(), b.dim()));
    }
    let band = tol.approx_tol;
    let (algebra_dim, max_len) = match trace_search(a, b, band) {
        TraceOutcome::Differ {
            word,
            ta,
            tb,
            algebra_dim,
            max_len,
        } => {
            return EquivalenceReport {
                verdict: Verdict::False,
                reason: format!("trace of word {} differs", word.name()),
                distinguishing_word: Some(word.name()),
                trace_a: Some([ta.re, ta.im]),
                trace_b: Some([tb.re, tb.im]),
                algebra_dim,
                max_word_length: max_len,
                witness: None,
                witness_residual: None,
                intertwiner_dim: 0,
            }
        }
        TraceOutcome::Agree { algebra_dim, max_len } => (algebra_dim, max_len),
    };
    let mut report = EquivalenceReport {
        algebra_dim,
        max_word_length: max_len,
        ..EquivalenceReport::short(Verdict::Undetermined, String::new())
    };
    let n = a.dim();
    if n == 0 {
        report.verdict = Verdict::True;
        report.witness = Some(zeros(0, 0));
        report.witness_residual = Some(0.0);
        report.reason = "both tuples are empty".into();
        return report;
    }
    let null = intertwiners(a, b, band);
    report.intertwiner_dim = null.len();
    if null.is_empty() {
        report.reason = "word traces agree but the intertwiner system has no solution".into();
        return report;
    }
    let scale = 1.0 + [&a.c1, &a.c2, &b.c1, &b.c2].iter().map(|m| op_norm(m)).fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(WITNESS_SEED);
    let mut best: Option<(f64, CMatrix)> = None;
    for _ in 0..WITNESS_ATTEMPTS {
        let g = gaussian_matrix(null.len(), 1, &mut rng);
        let mut z = zeros(n, n);
        for (k, basis) in null.iter().enumerate() {
            z += basis * g[(k, 0)];
        }
        let q = polar_unitary(&z);
        let unit = op_norm(&(q.adjoint() * &q - identity(n)));
        let residual = intertwining_residual(&q, a, b).max(unit);
        if best.as_ref().is_none_or(|(r, _)| residual < *r) {
            best = Some((residual, q));
        }
        if residual <= band * scale {
            break;
        }
    }
    let (residual, q) = best.expect("at least one attempt");
    report.witness_residual = Some(residual);
    if residual <= band * scale {
        report.verdict = Verdict::True;
        report.witness = Some(q);
        report.reason = "verified unitary witness".into();
    } else {
        report.reason = format!("word traces agree but the best unitary candidate has residual {residual:.3e}");
    }
    report
}

/// `(V1|_{W2}, V2*|_{V2W1})` as operators on `W`, i.e. the coefficients of
/// `Φ1`, and the alternative pair `(U, P_{W2})`.
pub fn invariants_of_pair(pair: &GradedPair, tol: &TolerancePolicy) -> Result<(InvariantTuple, InvariantTuple)> {
    if !pair.purity().product.is_pure() {
        return Err(Error::NotPure("the product V1 V2 is not pure on this model".into()));
    }
    let wd = wandering_data_of_graded(pair, tol)?;
    let coeffs = coefficients_from_wandering(&wd, pair)?;
    let primary = InvariantTuple::new(coeffs.a, coeffs.b)?;
    let secondary = InvariantTuple::new(wd.u.clone(), wd.p())?;
    Ok((primary, secondary))
}

#[derive(Clone, Debug, Serialize)]
pub struct PairEquivalence {
    pub verdict: Verdict,
    pub coefficient_route: EquivalenceReport,
    pub up_route: EquivalenceReport,
}

/// Decides equivalence by the coefficient route and confirms with the
/// `(U, P)` route; disagreement between them is an error.
pub fn pair_equivalence(a: &GradedPair, b: &GradedPair, tol: &TolerancePolicy) -> Result<PairEquivalence> {
    let (pa, sa) = invariants_of_pair(a, tol)?;
    let (pb, sb) = invariants_of_pair(b, tol)?;
    let coefficient_route = simultaneous_unitary_equiv(&pa, &pb, tol);
    let up_route = simultaneous_unitary_equiv(&sa, &sb, tol);
    if coefficient_route.verdict != up_route.verdict {
        return Err(Error::Inconsistent(format!(
            "coefficient route says {:?} ({}), (U, P) route says {:?} ({})",
            coefficient_route.verdict, coefficient_route.reason, up_route.verdict, up_route.reason
        )));
    }
    Ok(PairEquivalence {
        verdict: coefficient_route.verdict,
        coefficient_route,
        up_route,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bcl::{build_multipliers, extract_bcl, BCLData};
    use crate::linalg::c;
    use crate::random::{random_bcl, random_unitary, rng_from_seed};
    use proptest::prelude::*;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn m(rows: &[&[f64]]) -> CMatrix {
        CMatrix::from_fn(rows.len(), rows[0].len(), |i, j| c(rows[i][j], 0.0))
    }

    fn random_tuple(n: usize, seed: u64) -> InvariantTuple {
        let mut rng = rng_from_seed(seed);
        InvariantTuple::new(gaussian_matrix(n, n, &mut rng), gaussian_matrix(n, n, &mut rng)).unwrap()
    }

    fn fixture() -> (InvariantTuple, InvariantTuple) {
        let d = m(&[&[1.0, 0.0], &[0.0, 0.0]]);
        (
            InvariantTuple::new(m(&[&[0.0, 1.0], &[0.0, 0.0]]), d.clone()).unwrap(),
            InvariantTuple::new(m(&[&[0.0, 0.0], &[1.0, 0.0]]), d).unwrap(),
        )
    }

    /// Traces of every word up to `len`, enumerated exhaustively.
    fn exhaustive_first_difference(a: &InvariantTuple, b: &InvariantTuple, len: usize) -> Option<usize> {
        let ga = a.generators();
        let gb = b.generators();
        let mut layer = vec![(identity(a.dim()), identity(b.dim()))];
        for l in 0..=len {
            if layer.iter().any(|(x, y)| (x.trace() - y.trace()).norm() > 1e-9) {
                return Some(l);
            }
            let mut next = Vec::new();
            for (x, y) in &layer {
                for g in 0..4 {
                    next.push((x * &ga[g], y * &gb[g]));
                }
            }
            layer = next;
        }
        None
    }

    #[test]
    fn conjugated_tuple_is_equivalent_with_witness() {
        let a = random_tuple(3, 1);
        let z = random_unitary(3, &mut rng_from_seed(2));
        let b = a.conjugate(&z);
        let r = simultaneous_unitary_equiv(&a, &b, &tol());
        assert_eq!(r.verdict, Verdict::True, "{}", r.reason);
        let w = r.witness.unwrap();
        assert!(intertwining_residual(&w, &a, &b) < 1e-8);
    }

    #[test]
    fn dimension_mismatch_is_false() {
        let r = simultaneous_unitary_equiv(&random_tuple(2, 1), &random_tuple(3, 1), &tol());
        assert_eq!(r.verdict, Verdict::False);
    }

    #[test]
    fn fixture_is_distinguished_by_a_length_three_word() {
        let (a, b) = fixture();
        let r = simultaneous_unitary_equiv(&a, &b, &tol());
        assert_eq!(r.verdict, Verdict::False);
        let word = r.distinguishing_word.unwrap();
        let len = word.chars().filter(|ch| *ch == '1' || *ch == '2').count();
        assert_eq!(Some(len), exhaustive_first_difference(&a, &b, 8));
        assert_eq!(len, 3);
        // tr(C1 C2 C1*) = 0 vs 1
        let t = |x: &InvariantTuple| (&x.c1 * &x.c2 * x.c1.adjoint()).trace().re;
        assert_eq!((t(&a), t(&b)), (0.0, 1.0));
    }

    #[test]
    fn unitarily_similar_but_not_jointly_equivalent_pairs() {
        // same spectra separately, different joint position
        let a = InvariantTuple::new(m(&[&[1.0, 0.0], &[0.0, 0.0]]), m(&[&[1.0, 0.0], &[0.0, 0.0]])).unwrap();
        let b = InvariantTuple::new(m(&[&[1.0, 0.0], &[0.0, 0.0]]), m(&[&[0.0, 0.0], &[0.0, 1.0]])).unwrap();
        let r = simultaneous_unitary_equiv(&a, &b, &tol());
        assert_eq!(r.verdict, Verdict::False);
        assert_eq!(exhaustive_first_difference(&a, &b, 4), Some(2));
    }

    #[test]
    fn pair_examples() {
        let swap = BCLData::new(m(&[&[0.0, 1.0], &[1.0, 0.0]]), m(&[&[1.0, 0.0], &[0.0, 0.0]]), &tol()).unwrap();
        let diag = BCLData::new(identity(2), m(&[&[1.0, 0.0], &[0.0, 0.0]]), &tol()).unwrap();
        let s = build_multipliers(&swap).graded(4, &tol()).unwrap();
        let d = build_multipliers(&diag).graded(4, &tol()).unwrap();
        assert_eq!(pair_equivalence(&s, &s, &tol()).unwrap().verdict, Verdict::True);
        assert_eq!(pair_equivalence(&s, &d, &tol()).unwrap().verdict, Verdict::False);
        assert_eq!(pair_equivalence(&d, &s, &tol()).unwrap().verdict, Verdict::False);

        let data = random_bcl(3, None, &mut rng_from_seed(5));
        let p = build_multipliers(&data).graded(4, &tol()).unwrap();
        let back = extract_bcl(&p, &tol()).unwrap();
        let q = build_multipliers(&back).graded(4, &tol()).unwrap();
        assert_eq!(pair_equivalence(&p, &q, &tol()).unwrap().verdict, Verdict::True);
    }

    #[test]
    fn conjugated_bcl_data_give_equivalent_pairs() {
        let mut rng = rng_from_seed(8);
        for dim in 1..=4 {
            let data = random_bcl(dim, None, &mut rng);
            let z = random_unitary(dim, &mut rng);
            let p = build_multipliers(&data).graded(3, &tol()).unwrap();
            let q = build_multipliers(&data.conjugate(&z)).graded(3, &tol()).unwrap();
            let r = pair_equivalence(&p, &q, &tol()).unwrap();
            assert_eq!(r.verdict, Verdict::True);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn verdict_is_conjugation_invariant_and_symmetric(seed in 0u64..10_000, n in 1usize..4) {
            let a = random_tuple(n, seed);
            let b = random_tuple(n, seed + 1);
            let z = random_unitary(n, &mut rng_from_seed(seed + 2));
            let base = simultaneous_unitary_equiv(&a, &b, &tol()).verdict;
            prop_assert_eq!(base, Verdict::False);
            prop_assert_eq!(simultaneous_unitary_equiv(&a.conjugate(&z), &b, &tol()).verdict, base);
            prop_assert_eq!(simultaneous_unitary_equiv(&b, &a, &tol()).verdict, base);
            prop_assert_eq!(simultaneous_unitary_equiv(&a, &a.conjugate(&z), &tol()).verdict, Verdict::True);
        }
    }
}
