//! Vector-valued Hardy space on finitely supported Taylor sequences.
//!
//! A [`GradedVector`] is a polynomial `f(z) = Σ f_m z^m` with coefficients in
//! `C^dim`; a [`PolySymbol`] is a matrix polynomial acting by multiplication.
//! Forward multiplication never truncates and adjoints only lower degrees, so
//! identities between degree-one symbols hold to rounding error.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::json::{self, JsonComplex, JsonMatrix};
use crate::linalg::{c, check_finite, identity, op_norm, zeros, CMatrix, CVector, Subspace, TolerancePolicy, C64, ZERO};

#[derive(Clone, Debug, PartialEq)]
pub struct GradedVector {
    dim: usize,
    coeffs: Vec<CVector>,
}

impl GradedVector {
    pub fn new(dim: usize, coeffs: Vec<CVector>) -> Result<Self> {
        if let Some(bad) = coeffs.iter().find(|v| v.len() != dim) {
            return Err(Error::Dimension(format!(
                "coefficient of length {} in a {dim}-dimensional sequence",
                bad.len()
            )));
        }
        if coeffs
            .iter()
            .flat_map(|v| v.iter())
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite("graded vector"));
        }
        let mut out = Self { dim, coeffs };
        out.trim();
        Ok(out)
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(eta: CVector) -> Self {
        Self::monomial(0, eta)
    }

    /// `z^degree η`
    pub fn monomial(degree: usize, eta: CVector) -> Self {
        let dim = eta.len();
        let mut coeffs = vec![CVector::zeros(dim); degree];
        coeffs.push(eta);
        let mut out = Self { dim, coeffs };
        out.trim();
        out
    }

    fn trim(&mut self) {
        while self
            .coeffs
            .last()
            .is_some_and(|v| v.iter().all(|z| *z == ZERO))
        {
            self.coeffs.pop();
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `None` for the zero vector.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[CVector] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> CVector {
        self.coeffs
            .get(n)
            .cloned()
            .unwrap_or_else(|| CVector::zeros(self.dim))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|v| v.norm_squared()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self, other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &GradedVector) -> C64 {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| a.dotc(b))
            .sum()
    }

    pub fn add(&self, other: &GradedVector) -> GradedVector {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| self.coeff(k) + other.coeff(k)).collect();
        let mut out = GradedVector {
            dim: self.dim,
            coeffs,
        };
        out.trim();
        out
    }

    pub fn sub(&self, other: &GradedVector) -> GradedVector {
        self.add(&other.scale(c(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> GradedVector {
        let mut out = GradedVector {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|v| v * s).collect(),
        };
        out.trim();
        out
    }

    /// Keep coefficients of degree `<= n`.
    pub fn truncate(&self, n: usize) -> GradedVector {
        let mut out = GradedVector {
            dim: self.dim,
            coeffs: self.coeffs.iter().take(n + 1).cloned().collect(),
        };
        out.trim();
        out
    }

    /// Stack the coefficients of degree `<= n` into one vector of length
    /// `(n + 1) * dim`.
    pub fn to_flat(&self, n: usize) -> Result<CVector> {
        if self.degree().is_some_and(|d| d > n) {
            return Err(Error::Guard {
                degree: self.degree().unwrap_or(0),
                limit: n,
            });
        }
        let mut out = CVector::zeros((n + 1) * self.dim);
        for (m, v) in self.coeffs.iter().enumerate() {
            out.rows_mut(m * self.dim, self.dim).copy_from(v);
        }
        Ok(out)
    }

    pub fn from_flat(dim: usize, flat: &CVector) -> GradedVector {
        if dim == 0 {
            return GradedVector::zero(0);
        }
        let blocks = flat.len() / dim;
        let coeffs = (0..blocks)
            .map(|m| flat.rows(m * dim, dim).into_owned())
            .collect();
        let mut out = GradedVector { dim, coeffs };
        out.trim();
        out
    }
}

#[derive(Serialize, Deserialize)]
struct GradedVectorJson {
    dim: usize,
    coeffs: Vec<Vec<JsonComplex>>,
}

impl Serialize for GradedVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GradedVectorJson {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(json::vector_to_json).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GradedVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = GradedVectorJson::deserialize(d)?;
        let coeffs = raw.coeffs.iter().map(|v| json::vector_from_json(v)).collect();
        GradedVector::new(raw.dim, coeffs).map_err(serde::de::Error::custom)
    }
}

/// Matrix polynomial `Φ(z) = Σ_k A_k z^k` acting on `C^dim`-valued sequences.
#[derive(Clone, Debug, PartialEq)]
pub struct PolySymbol {
    dim: usize,
    matrices: Vec<CMatrix>,
}

impl PolySymbol {
    pub fn new(matrices: Vec<CMatrix>) -> Result<Self> {
        let dim = matrices.first().map(|m| m.nrows()).ok_or_else(|| {
            Error::Dimension("symbol needs at least one coefficient".into())
        })?;
        for m in &matrices {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::Dimension(format!(
                    "coefficient {}x{} in a symbol of size {dim}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            check_finite(m, "symbol coefficient")?;
        }
        let mut out = Self { dim, matrices };
        out.trim();
        Ok(out)
    }

    pub(crate) fn from_parts(dim: usize, matrices: Vec<CMatrix>) -> Self {
        let mut out = Self { dim, matrices };
        if out.matrices.is_empty() {
            out.matrices.push(zeros(dim, dim));
        }
        out.trim();
        out
    }

    fn trim(&mut self) {
        while self.matrices.len() > 1
            && self
                .matrices
                .last()
                .is_some_and(|m| m.iter().all(|z| *z == ZERO))
        {
            self.matrices.pop();
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_parts(dim, vec![identity(dim)])
    }

    /// `z I`
    pub fn shift(dim: usize) -> Self {
        Self::from_parts(dim, vec![zeros(dim, dim), identity(dim)])
    }

    pub fn linear(a0: CMatrix, a1: CMatrix) -> Result<Self> {
        Self::new(vec![a0, a1])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.matrices.len() - 1
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    pub fn coeff(&self, k: usize) -> CMatrix {
        self.matrices
            .get(k)
            .cloned()
            .unwrap_or_else(|| zeros(self.dim, self.dim))
    }

    pub fn eval(&self, z: C64) -> CMatrix {
        // Horner
        let mut acc = zeros(self.dim, self.dim);
        for m in self.matrices.iter().rev() {
            acc = acc * z + m;
        }
        acc
    }

    /// Largest coefficient distance, padding the shorter symbol with zeros.
    pub fn coeff_distance(&self, other: &PolySymbol) -> f64 {
        let n = self.matrices.len().max(other.matrices.len());
        (0..n)
            .map(|k| op_norm(&(self.coeff(k) - other.coeff(k))))
            .fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct PolySymbolJson {
    dim: usize,
    matrices: Vec<JsonMatrix>,
}

impl Serialize for PolySymbol {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolySymbolJson {
            dim: self.dim,
            matrices: self.matrices.iter().map(json::matrix_to_json).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolySymbol {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = PolySymbolJson::deserialize(d)?;
        let matrices = raw
            .matrices
            .iter()
            .map(|m| json::matrix_from_json(m, Some(raw.dim)))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        if raw.dim == 0 && matrices.iter().all(|m| m.nrows() == 0) {
            return Ok(PolySymbol::from_parts(0, Vec::new()));
        }
        let sym = PolySymbol::new(matrices).map_err(D::Error::custom)?;
        if sym.dim != raw.dim {
            return Err(D::Error::custom(format!(
                "declared dim {} but matrices are {}x{}",
                raw.dim, sym.dim, sym.dim
            )));
        }
        Ok(sym)
    }
}

fn check_dims(a: usize, b: usize, what: &str) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::Dimension(format!("{what}: {a} vs {b}")))
    }
}

/// `M_Φ f`, the exact polynomial product.
pub fn mult_apply(phi: &PolySymbol, f: &GradedVector) -> Result<GradedVector> {
    check_dims(phi.dim, f.dim, "mult_apply")?;
    let Some(df) = f.degree() else {
        return Ok(GradedVector::zero(f.dim));
    };
    let mut coeffs = vec![CVector::zeros(f.dim); df + phi.degree() + 1];
    for (k, a) in phi.matrices.iter().enumerate() {
        for (m, fm) in f.coeffs.iter().enumerate() {
            coeffs[k + m] += a * fm;
        }
    }
    GradedVector::new(f.dim, coeffs)
}

/// `M_Φ^* f`, with `(M_Φ^* f)_n = Σ_k A_k^H f_{n+k}`.
pub fn mult_adjoint_apply(phi: &PolySymbol, f: &GradedVector) -> Result<GradedVector> {
    check_dims(phi.dim, f.dim, "mult_adjoint_apply")?;
    let Some(df) = f.degree() else {
        return Ok(GradedVector::zero(f.dim));
    };
    let adj: Vec<CMatrix> = phi.matrices.iter().map(|a| a.adjoint()).collect();
    let coeffs = (0..=df)
        .map(|n| {
            let mut acc = CVector::zeros(f.dim);
            for (k, ak) in adj.iter().enumerate() {
                if let Some(v) = f.coeffs.get(n + k) {
                    acc += ak * v;
                }
            }
            acc
        })
        .collect();
    GradedVector::new(f.dim, coeffs)
}

/// Coefficient convolution `ΦΨ`.
pub fn symbol_product(phi: &PolySymbol, psi: &PolySymbol) -> Result<PolySymbol> {
    check_dims(phi.dim, psi.dim, "symbol_product")?;
    let n = phi.degree() + psi.degree() + 1;
    let mut out = vec![zeros(phi.dim, phi.dim); n];
    for (i, a) in phi.matrices.iter().enumerate() {
        for (j, b) in psi.matrices.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    Ok(PolySymbol::from_parts(phi.dim, out))
}

/// Number of boundary points used by the sampled inner test.
pub const INNER_SAMPLES: usize = 64;

/// Whether `M_Φ` is an isometry.
///
/// Degree-one symbols use the exact criterion `A0*A0 + A1*A1 = I`,
/// `A0*A1 = 0` at `eq_tol`; higher degrees sample `Φ` on the unit circle.
pub fn symbol_is_inner(phi: &PolySymbol, tol: &TolerancePolicy) -> bool {
    if phi.degree() <= 1 {
        let a0 = phi.coeff(0);
        let a1 = phi.coeff(1);
        let gram = a0.adjoint() * &a0 + a1.adjoint() * &a1;
        op_norm(&(gram - identity(phi.dim))) <= tol.eq_tol
            && op_norm(&(a0.adjoint() * &a1)) <= tol.eq_tol
    } else {
        symbol_is_inner_sampled(phi, INNER_SAMPLES, tol.approx_tol)
    }
}

pub fn symbol_is_inner_sampled(phi: &PolySymbol, samples: usize, tol: f64) -> bool {
    boundary_isometry_defect(phi, samples) <= tol
}

/// `max_t ‖Φ(e^{it})^* Φ(e^{it}) − I‖` over equispaced samples.
pub fn boundary_isometry_defect(phi: &PolySymbol, samples: usize) -> f64 {
    let id = identity(phi.dim);
    (0..samples)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / samples as f64;
            let v = phi.eval(C64::from_polar(1.0, t));
            op_norm(&(v.adjoint() * &v - &id))
        })
        .fold(0.0, f64::max)
}

/// Szegő kernel vector `S(·, w) η` truncated at `degree`.
#[derive(Clone, Debug)]
pub struct KernelVector {
    pub point: C64,
    pub direction: CVector,
    pub degree: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct TruncatedKernel {
    pub vector: GradedVector,
    /// Norm of the discarded tail `Σ_{m>N} w̄^m z^m η`.
    pub tail_bound: f64,
}

pub fn kernel_tail_bound(r: f64, degree: usize, eta_norm: f64) -> f64 {
    r.powi(degree as i32 + 1) / (1.0 - r * r).sqrt() * eta_norm
}

pub fn kernel_vector_truncate(k: &KernelVector) -> Result<TruncatedKernel> {
    let r = k.point.norm();
    if !(r < 1.0) {
        return Err(Error::Precondition(format!(
            "kernel point must lie in the open unit disc (|w| = {r})"
        )));
    }
    let wbar = k.point.conj();
    let mut pow = c(1.0, 0.0);
    let mut coeffs = Vec::with_capacity(k.degree + 1);
    for _ in 0..=k.degree {
        coeffs.push(&k.direction * pow);
        pow *= wbar;
    }
    Ok(TruncatedKernel {
        vector: GradedVector::new(k.direction.len(), coeffs)?,
        tail_bound: kernel_tail_bound(r, k.degree, k.direction.norm()),
    })
}

fn check_wandering(shift: &PolySymbol, w: &Subspace, tol: &TolerancePolicy) -> Result<()> {
    check_dims(shift.dim, w.ambient_dim(), "wandering subspace")?;
    let mut residual: f64 = 0.0;
    for j in 0..w.dim() {
        let eta = GradedVector::constant(w.basis().column(j).into_owned());
        residual = residual.max(mult_adjoint_apply(shift, &eta)?.norm());
    }
    if residual > tol.eq_tol {
        return Err(Error::Residual {
            what: "wandering subspace vs kernel of the adjoint shift",
            residual,
            tol: tol.eq_tol,
        });
    }
    Ok(())
}

/// Taylor coefficients `Θ_m = P_W V^{*m} C|_W`, `m = 0..=degree`, of the
/// symbol of an operator `C` given only through its forward action.
///
/// `shift` is the symbol of the pure isometry `V` and `w` a subspace of the
/// constants lying in `ker V^*`. The result is expressed in the basis of `w`.
pub fn taylor_extract<F>(
    shift: &PolySymbol,
    apply: F,
    w: &Subspace,
    degree: usize,
    tol: &TolerancePolicy,
) -> Result<PolySymbol>
where
    F: Fn(&GradedVector) -> GradedVector,
{
    check_wandering(shift, w, tol)?;
    let k = w.dim();
    let b = w.basis();
    let mut out = vec![zeros(k, k); degree + 1];
    for j in 0..k {
        let mut g = apply(&GradedVector::constant(b.column(j).into_owned()));
        check_dims(g.dim, shift.dim, "operator output")?;
        for (m, coeff) in out.iter_mut().enumerate() {
            if m > 0 {
                g = mult_adjoint_apply(shift, &g)?;
            }
            let col = b.adjoint() * g.coeff(0);
            coeff.set_column(j, &col);
        }
    }
    Ok(PolySymbol::from_parts(k, out))
}

/// Largest deviation between `C(V^k η)` and `V^k Θ(V) η` on coefficients of
/// degree `<= horizon`, over `η` in the basis of `w` and `k <= probe_degree`.
///
/// Zero (to rounding) exactly when `C` acts as the multiplier with the
/// extracted coefficients on these probes, which holds when `C` commutes with
/// the shift and `theta` covers degrees up to `horizon`.
pub fn commutant_residual<F>(
    shift: &PolySymbol,
    apply: F,
    w: &Subspace,
    theta: &PolySymbol,
    probe_degree: usize,
    horizon: usize,
) -> Result<f64>
where
    F: Fn(&GradedVector) -> GradedVector,
{
    let b = w.basis();
    let mut worst: f64 = 0.0;
    for j in 0..w.dim() {
        // Θ(V) η = Σ_m V^m B Θ_m e_j
        let mut expected = GradedVector::zero(shift.dim);
        let mut vm = PolySymbol::identity(shift.dim);
        for m in 0..=theta.degree() {
            let eta_m = b * (theta.coeff(m).column(j).into_owned());
            let term = mult_apply(&vm, &GradedVector::constant(eta_m))?;
            expected = expected.add(&term);
            vm = symbol_product(&vm, shift)?;
        }
        let mut probe = GradedVector::constant(b.column(j).into_owned());
        let mut target = expected;
        for _ in 0..=probe_degree {
            let got = apply(&probe);
            let diff = got.truncate(horizon).sub(&target.truncate(horizon));
            worst = worst.max(diff.norm());
            probe = mult_apply(shift, &probe)?;
            target = mult_apply(shift, &target)?;
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, ONE};
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> CVector {
        CVector::from_iterator(xs.len(), xs.iter().map(|&x| c(x, 0.0)))
    }

    fn mat(rows: &[&[f64]]) -> CMatrix {
        CMatrix::from_fn(rows.len(), rows[0].len(), |i, j| c(rows[i][j], 0.0))
    }

    #[test]
    fn shift_moves_constant_up() {
        let eta = v(&[1.0, 2.0]);
        let out = mult_apply(&PolySymbol::shift(2), &GradedVector::constant(eta.clone())).unwrap();
        assert_eq!(out, GradedVector::monomial(1, eta));
    }

    #[test]
    fn identity_symbol_fixes_vectors() {
        let f = GradedVector::new(2, vec![v(&[1.0, 0.0]), v(&[0.0, 3.0])]).unwrap();
        assert_eq!(mult_apply(&PolySymbol::identity(2), &f).unwrap(), f);
    }

    #[test]
    fn linear_symbol_on_constant_matches_convolution() {
        let a = mat(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = mat(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let f0 = v(&[1.0, -1.0]);
        let phi = PolySymbol::linear(a.clone(), b.clone()).unwrap();
        let out = mult_apply(&phi, &GradedVector::constant(f0.clone())).unwrap();
        assert_eq!(out.coeff(0), &a * &f0);
        assert_eq!(out.coeff(1), &b * &f0);
        assert_eq!(out.degree(), Some(1));
    }

    #[test]
    fn adjoint_shift_examples() {
        let eta = v(&[1.0, 2.0]);
        let s = PolySymbol::shift(2);
        assert!(mult_adjoint_apply(&s, &GradedVector::constant(eta.clone()))
            .unwrap()
            .is_zero());
        let back = mult_adjoint_apply(&s, &GradedVector::monomial(1, eta.clone())).unwrap();
        assert_eq!(back, GradedVector::constant(eta));
    }

    #[test]
    fn adjoint_of_linear_symbol() {
        let a = mat(&[&[1.0, 2.0], &[0.0, 1.0]]);
        let b = mat(&[&[0.0, 1.0], &[5.0, 0.0]]);
        let phi = PolySymbol::linear(a.clone(), b.clone()).unwrap();
        let f = GradedVector::new(2, vec![v(&[1.0, 2.0]), v(&[3.0, 4.0])]).unwrap();
        let out = mult_adjoint_apply(&phi, &f).unwrap();
        assert_eq!(out.coeff(0), a.adjoint() * f.coeff(0) + b.adjoint() * f.coeff(1));
        assert_eq!(out.coeff(1), a.adjoint() * f.coeff(1));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let f = GradedVector::constant(v(&[1.0]));
        assert!(matches!(
            mult_apply(&PolySymbol::identity(2), &f),
            Err(Error::Dimension(_))
        ));
        assert!(symbol_product(&PolySymbol::identity(2), &PolySymbol::identity(3)).is_err());
    }

    #[test]
    fn symbol_product_examples() {
        let s = PolySymbol::shift(2);
        let s2 = symbol_product(&s, &s).unwrap();
        assert_eq!(s2.degree(), 2);
        assert_eq!(s2.coeff(2), identity(2));
        assert_eq!(s2.coeff(0), zeros(2, 2));
        let phi = PolySymbol::linear(mat(&[&[1.0, 2.0], &[3.0, 4.0]]), mat(&[&[0.0, 1.0], &[0.0, 0.0]])).unwrap();
        assert_eq!(symbol_product(&phi, &PolySymbol::identity(2)).unwrap(), phi);
    }

    #[test]
    fn inner_examples() {
        let tol = TolerancePolicy::default();
        assert!(symbol_is_inner(&PolySymbol::shift(3), &tol));
        let half = PolySymbol::new(vec![identity(2) * c(0.5, 0.0)]).unwrap();
        assert!(!symbol_is_inner(&half, &tol));
        // z^2 goes through the sampled branch
        let s2 = symbol_product(&PolySymbol::shift(2), &PolySymbol::shift(2)).unwrap();
        assert!(symbol_is_inner(&s2, &tol));
    }

    #[test]
    fn kernel_vector_examples() {
        let e1 = v(&[1.0, 0.0]);
        let at0 = kernel_vector_truncate(&KernelVector {
            point: c(0.0, 0.0),
            direction: e1.clone(),
            degree: 5,
        })
        .unwrap();
        assert_eq!(at0.vector, GradedVector::constant(e1.clone()));
        let zero = kernel_vector_truncate(&KernelVector {
            point: c(0.3, 0.1),
            direction: v(&[0.0, 0.0]),
            degree: 4,
        })
        .unwrap();
        assert!(zero.vector.is_zero());
        let half = kernel_vector_truncate(&KernelVector {
            point: c(0.5, 0.0),
            direction: e1.clone(),
            degree: 2,
        })
        .unwrap();
        assert_eq!(half.vector.coeffs(), &[e1.clone(), &e1 * c(0.5, 0.0), &e1 * c(0.25, 0.0)]);
        let expected_tail = 0.125 / (0.75f64).sqrt();
        assert!((half.tail_bound - expected_tail).abs() < 1e-15);
        assert!(kernel_vector_truncate(&KernelVector {
            point: c(1.0, 0.0),
            direction: e1,
            degree: 1
        })
        .is_err());
    }

    #[test]
    fn taylor_extract_monomial_and_identity() {
        let tol = TolerancePolicy::default();
        let s = PolySymbol::shift(1);
        let w = Subspace::whole(1);
        let z2 = symbol_product(&s, &s).unwrap();
        let theta = taylor_extract(&s, |f| mult_apply(&z2, f).unwrap(), &w, 4, &tol).unwrap();
        let coeffs: Vec<C64> = (0..5).map(|m| theta.coeff(m)[(0, 0)]).collect();
        assert_eq!(coeffs, vec![ZERO, ZERO, ONE, ZERO, ZERO]);
        let id = taylor_extract(&PolySymbol::shift(2), |f| f.clone(), &Subspace::whole(2), 3, &tol).unwrap();
        assert_eq!(id, PolySymbol::identity(2));
    }

    #[test]
    fn taylor_extract_rejects_non_wandering_subspace() {
        let tol = TolerancePolicy::default();
        // z^2 has wandering space {1, z}; the constant space is fine, but for
        // V = identity (not a shift) nothing is wandering
        let r = taylor_extract(&PolySymbol::identity(1), |f| f.clone(), &Subspace::whole(1), 2, &tol);
        assert!(matches!(r, Err(Error::Residual { .. })));
    }

    fn cvec(n: usize) -> impl Strategy<Value = CVector> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
            .prop_map(|xs| CVector::from_iterator(xs.len(), xs.into_iter().map(|(a, b)| c(a, b))))
    }

    fn graded(dim: usize, max_deg: usize) -> impl Strategy<Value = GradedVector> {
        prop::collection::vec(cvec(dim), 1..=max_deg + 1)
            .prop_map(move |cs| GradedVector::new(dim, cs).unwrap())
    }

    fn cmat(n: usize) -> impl Strategy<Value = CMatrix> {
        cvec(n * n).prop_map(move |v| CMatrix::from_iterator(n, n, v.iter().cloned()))
    }

    fn symbol(n: usize, max_deg: usize) -> impl Strategy<Value = PolySymbol> {
        prop::collection::vec(cmat(n), 1..=max_deg + 1).prop_map(|ms| PolySymbol::new(ms).unwrap())
    }

    proptest! {
        #[test]
        fn adjoint_pairing(phi in symbol(3, 3), g in graded(3, 4), f in graded(3, 6)) {
            let lhs = mult_apply(&phi, &g).unwrap().inner(&f);
            let rhs = g.inner(&mult_adjoint_apply(&phi, &f).unwrap());
            prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + lhs.norm()));
        }

        #[test]
        fn product_is_associative(a in symbol(2, 2), b in symbol(2, 2), d in symbol(2, 2)) {
            let left = symbol_product(&symbol_product(&a, &b).unwrap(), &d).unwrap();
            let right = symbol_product(&a, &symbol_product(&b, &d).unwrap()).unwrap();
            prop_assert!(left.coeff_distance(&right) < 1e-10);
        }

        #[test]
        fn taylor_extract_inverts_multiplication(psi in symbol(3, 3)) {
            let tol = TolerancePolicy::default();
            let s = PolySymbol::shift(3);
            let theta = taylor_extract(&s, |f| mult_apply(&psi, f).unwrap(), &Subspace::whole(3), 5, &tol).unwrap();
            prop_assert!(theta.coeff_distance(&psi) <= 1e-10);
        }

        #[test]
        fn graded_vector_json_round_trip(f in graded(2, 3)) {
            let s = serde_json::to_string(&f).unwrap();
            let back: GradedVector = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(back, f);
        }
    }
}
