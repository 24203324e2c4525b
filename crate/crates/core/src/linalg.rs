//! Dense complex linear algebra on small matrices.
//!
//! Everything here is built on `nalgebra` matrices of `Complex64`. Subspaces
//! carry an orthonormal basis whose choice depends only on the subspace: the
//! basis is produced by pivoted Gram-Schmidt on the columns of the orthogonal
//! projector, so two computations of the same subspace give the same basis
//! (up to rounding) regardless of how the spanning set was presented.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Tolerances used for discrete decisions.
///
/// `eq_tol` governs exact algebraic routes (rank decisions, identity checks),
/// `approx_tol` governs truncated or iterative routes and the zero band of
/// positivity verdicts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    pub eq_tol: f64,
    pub approx_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            eq_tol: 1e-9,
            approx_tol: 1e-6,
        }
    }
}

impl TolerancePolicy {
    pub fn new(eq_tol: f64, approx_tol: f64) -> Result<Self> {
        let ok = eq_tol.is_finite()
            && approx_tol.is_finite()
            && eq_tol > 0.0
            && eq_tol <= approx_tol
            && approx_tol < 1.0;
        if ok {
            Ok(Self { eq_tol, approx_tol })
        } else {
            Err(Error::Tolerance { eq_tol, approx_tol })
        }
    }

    /// Policy with the given approximate tolerance; `eq_tol` is lowered to
    /// match when `approx_tol` is below the default exact tolerance.
    pub fn with_approx(approx_tol: f64) -> Result<Self> {
        Self::new(approx_tol.min(1e-9), approx_tol)
    }
}

pub fn check_finite(m: &CMatrix, what: &'static str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMatrix {
    CMatrix::zeros(r, c)
}

pub fn adjoint(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

/// Largest singular value; zero for empty matrices.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 || m.iter().all(|z| *z == ZERO) {
        return 0.0;
    }
    augmented_eigen(m)
        .eigenvalues
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

// nalgebra's complex SVD is unreliable on rank-deficient input, so singular
// data comes from the Hermitian dilation [[0, M], [M^H, 0]], whose spectrum
// is {±σ_i} plus zeros and whose eigenvectors for σ > 0 are (u; v)/√2.
fn augmented_eigen(m: &CMatrix) -> nalgebra::SymmetricEigen<C64, nalgebra::Dyn> {
    let (r, k) = m.shape();
    let mut h = zeros(r + k, r + k);
    h.view_mut((0, r), (r, k)).copy_from(m);
    h.view_mut((r, 0), (k, r)).copy_from(&m.adjoint());
    h.symmetric_eigen()
}

/// Singular triples with `σ > cut`: `m ≈ u diag(s) v^H`.
pub(crate) struct SingularPart {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

pub(crate) fn singular_part(m: &CMatrix, cut: f64) -> SingularPart {
    let (r, k) = m.shape();
    if r == 0 || k == 0 {
        return SingularPart {
            u: zeros(r, 0),
            s: Vec::new(),
            v: zeros(k, 0),
        };
    }
    let eig = augmented_eigen(m);
    let mut idx: Vec<usize> = (0..r + k).filter(|&i| eig.eigenvalues[i] > cut).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let scale = c(std::f64::consts::SQRT_2, 0.0);
    let mut u = zeros(r, idx.len());
    let mut v = zeros(k, idx.len());
    for (j, &i) in idx.iter().enumerate() {
        let col = eig.eigenvectors.column(i);
        u.set_column(j, &(col.rows(0, r) * scale));
        v.set_column(j, &(col.rows(r, k) * scale));
    }
    SingularPart {
        u,
        s: idx.iter().map(|&i| eig.eigenvalues[i]).collect(),
        v,
    }
}

pub fn vec_norm(v: &CVector) -> f64 {
    v.norm()
}

/// Select the rows and columns listed in `idx`.
pub fn submatrix(m: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

pub fn select_columns(m: &CMatrix, cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(m.nrows(), cols.len(), |i, j| m[(i, cols[j])])
}

/// Embed the columns of `m` (indexed by `rows`) into an `n`-row matrix.
pub fn embed_rows(m: &CMatrix, rows: &[usize], n: usize) -> CMatrix {
    let mut out = zeros(n, m.ncols());
    for (i, &r) in rows.iter().enumerate() {
        for j in 0..m.ncols() {
            out[(r, j)] = m[(i, j)];
        }
    }
    out
}

/// Orthonormal basis of the column space; the basis is not canonical.
/// Singular values below `rel_tol · max(σ_max, 1)` are dropped, so a matrix
/// that is zero up to rounding has an empty column space.
fn column_space_raw(vectors: &CMatrix, rel_tol: f64) -> CMatrix {
    let n = vectors.nrows();
    let smax = op_norm(vectors);
    let cut = rel_tol * smax.max(1.0);
    if smax <= cut {
        return zeros(n, 0);
    }
    let u = singular_part(vectors, cut).u;
    // re-orthonormalize; the dilation eigenvectors are only orthogonal up to
    // the separation of the singular values
    if u.ncols() == 0 {
        u
    } else {
        let k = u.ncols();
        u.qr().q().columns(0, k).into_owned()
    }
}

/// Orthonormal basis of the range of an (approximate) orthogonal projector;
/// its singular values sit near 0 or 1, so the cut is absolute.
fn projector_range(proj: &CMatrix) -> CMatrix {
    let n = proj.nrows();
    if n == 0 || proj.ncols() == 0 {
        return zeros(n, 0);
    }
    let h = (proj + proj.adjoint()) * c(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    select_columns(&eig.eigenvectors, &keep)
}

/// Canonical orthonormal basis of the range of an orthogonal projector of
/// known rank.
fn canonical_basis(proj: &CMatrix, rank: usize) -> CMatrix {
    let n = proj.nrows();
    let mut resid = proj.clone();
    let mut basis = zeros(n, rank);
    for k in 0..rank {
        let norms: Vec<f64> = (0..n).map(|j| resid.column(j).norm()).collect();
        let max = norms.iter().cloned().fold(0.0, f64::max);
        let pivot = norms
            .iter()
            .position(|&x| x >= 0.5 * max)
            .expect("non-empty residual");
        let mut v: CVector = resid.column(pivot).into_owned() / c(norms[pivot], 0.0);
        // second pass against already chosen vectors
        for prev in 0..k {
            let b = basis.column(prev).into_owned();
            let coef = b.dotc(&v);
            v -= b * coef;
        }
        let nv = v.norm();
        v /= c(nv, 0.0);
        let ph = v[pivot];
        if ph.norm() > 0.0 {
            v *= ph.conj() / ph.norm();
        }
        let row = v.adjoint() * &resid;
        resid -= &v * row;
        basis.set_column(k, &v);
    }
    basis
}

/// A subspace of `C^ambient_dim` represented by an orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: CMatrix,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: zeros(ambient_dim, 0),
        }
    }

    pub fn whole(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: identity(ambient_dim),
        }
    }

    /// Span of the listed coordinate vectors.
    pub fn coordinate(ambient_dim: usize, indices: &[usize]) -> Self {
        let mut basis = zeros(ambient_dim, indices.len());
        for (k, &i) in indices.iter().enumerate() {
            basis[(i, k)] = ONE;
        }
        Self { ambient_dim, basis }
    }

    /// Subspace spanned by orthonormal columns, re-expressed in its
    /// canonical basis.
    pub(crate) fn from_orthonormal(basis: CMatrix) -> Self {
        Self::from_raw(basis)
    }

    fn from_raw(raw: CMatrix) -> Self {
        let ambient_dim = raw.nrows();
        let rank = raw.ncols();
        if rank == 0 {
            return Self::zero(ambient_dim);
        }
        let proj = &raw * raw.adjoint();
        Self {
            ambient_dim,
            basis: canonical_basis(&proj, rank),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn projector(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }

    /// Norm of the part of `other` lying outside `self`.
    pub fn containment_residual(&self, other: &Subspace) -> f64 {
        let outside = other.basis() - self.projector() * other.basis();
        op_norm(&outside)
    }

    /// Projector distance, the basis-independent subspace metric.
    pub fn distance(&self, other: &Subspace) -> f64 {
        op_norm(&(self.projector() - other.projector()))
    }

    pub fn same_as(&self, other: &Subspace, tol: f64) -> bool {
        self.ambient_dim == other.ambient_dim && self.distance(other) <= tol
    }

    /// Image of the subspace under `m`.
    pub fn image(&self, m: &CMatrix, tol: &TolerancePolicy) -> Subspace {
        Subspace::from_raw(column_space_raw(&(m * &self.basis), tol.eq_tol))
    }

    /// Re-express the subspace inside a larger ambient space.
    pub fn embed(&self, rows: &[usize], n: usize) -> Subspace {
        Subspace::from_raw(embed_rows(&self.basis, rows, n))
    }
}

/// Orthonormal basis for the column span of `vectors`.
///
/// The rank is the number of singular values above `eq_tol` times the largest
/// one.
pub fn orthonormal_basis(vectors: &CMatrix, tol: &TolerancePolicy) -> Result<Subspace> {
    check_finite(vectors, "spanning vectors")?;
    Ok(Subspace::from_raw(column_space_raw(vectors, tol.eq_tol)))
}

pub fn projector(s: &Subspace) -> CMatrix {
    s.projector()
}

/// `S ⊖ T` for `T ⊆ S`.
pub fn ortho_complement_within(
    s: &Subspace,
    t: &Subspace,
    tol: &TolerancePolicy,
) -> Result<Subspace> {
    if s.ambient_dim != t.ambient_dim {
        return Err(Error::Dimension(format!(
            "ambient {} vs {}",
            s.ambient_dim, t.ambient_dim
        )));
    }
    let residual = s.containment_residual(t);
    if residual > tol.eq_tol {
        return Err(Error::Containment { residual });
    }
    let coords = s.basis().adjoint() * t.basis();
    let inside = column_space_raw(&coords, tol.eq_tol);
    let target = s.dim() - t.dim();
    let proj = identity(s.dim()) - &inside * inside.adjoint();
    let comp = s.basis() * projector_range(&proj);
    debug_assert_eq!(comp.ncols(), target);
    Ok(Subspace::from_raw(comp))
}

/// Null space of `m` inside `C^{ncols}`.
pub fn kernel(m: &CMatrix, tol: &TolerancePolicy) -> Subspace {
    let n = m.ncols();
    let row_space = column_space_raw(&m.adjoint(), tol.eq_tol);
    let proj = identity(n) - &row_space * row_space.adjoint();
    Subspace::from_raw(projector_range(&proj))
}

/// `{x ∈ S : m x = 0}`.
pub fn kernel_within(m: &CMatrix, s: &Subspace, tol: &TolerancePolicy) -> Subspace {
    let k = kernel(&(m * s.basis()), tol);
    Subspace::from_raw(s.basis() * k.basis())
}

/// Eigenvalues of a Hermitian matrix in nondecreasing order.
pub fn hermitian_spectrum(m: &CMatrix, tol: &TolerancePolicy) -> Result<Vec<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "spectrum of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    check_finite(m, "hermitian input")?;
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let residual = op_norm(&(m - m.adjoint()));
    if residual > tol.eq_tol * (1.0 + op_norm(m)) {
        return Err(Error::NotHermitian { residual });
    }
    let sym = (m + m.adjoint()) * c(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().cloned().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(ev)
}

/// Sign classification of a spectrum with a symmetric zero band.
pub fn is_nonnegative(spectrum: &[f64], band: f64) -> bool {
    spectrum.iter().all(|&x| x >= -band)
}

pub fn is_nonpositive(spectrum: &[f64], band: f64) -> bool {
    spectrum.iter().all(|&x| x <= band)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorClass {
    pub isometry: bool,
    pub unitary: bool,
    pub projection: bool,
    pub self_adjoint: bool,
}

/// Operator-class flags decided with the given absolute tolerance.
pub fn operator_class(m: &CMatrix, tol: f64) -> OperatorClass {
    let (r, cdim) = m.shape();
    let isometry = op_norm(&(m.adjoint() * m - identity(cdim))) <= tol;
    let square = r == cdim;
    let unitary = isometry && square && op_norm(&(m * m.adjoint() - identity(r))) <= tol;
    let self_adjoint = square && op_norm(&(m - m.adjoint())) <= tol;
    let projection = self_adjoint && op_norm(&(m * m - m)) <= tol;
    OperatorClass {
        isometry,
        unitary,
        projection,
        self_adjoint,
    }
}

/// Unitary factor of the polar decomposition `m = Q |m|`.
pub fn polar_unitary(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    if n == 0 {
        return zeros(0, 0);
    }
    let part = singular_part(m, 1e-12 * op_norm(m).max(f64::MIN_POSITIVE));
    let k = part.s.len();
    let mut out = &part.u * part.v.adjoint();
    if k < n {
        // pair the two null directions arbitrarily
        let uc = projector_range(&(identity(n) - &part.u * part.u.adjoint()));
        let vc = projector_range(&(identity(n) - &part.v * part.v.adjoint()));
        let r = uc.ncols().min(vc.ncols());
        out += uc.columns(0, r) * vc.columns(0, r).adjoint();
    }
    out
}

/// Spectral radius via the complex Schur form; if the QR iteration stalls,
/// falls back to `‖A^k‖^{1/k}` with `k = 256`.
pub fn spectral_radius(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    match Schur::try_new(m.clone(), f64::EPSILON, 10_000) {
        Some(s) => {
            let t = s.unpack().1;
            (0..t.nrows()).map(|i| t[(i, i)].norm()).fold(0.0, f64::max)
        }
        None => {
            let mut p = m.clone();
            let mut log_scale = 0.0;
            for _ in 0..8 {
                p = &p * &p;
                let nrm = op_norm(&p);
                if nrm == 0.0 {
                    return 0.0;
                }
                p /= c(nrm, 0.0);
                log_scale = 2.0 * log_scale + nrm.ln();
            }
            (log_scale / 256.0).exp()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn m(rows: &[&[f64]]) -> CMatrix {
        CMatrix::from_fn(rows.len(), rows[0].len(), |i, j| c(rows[i][j], 0.0))
    }

    #[test]
    fn collinear_columns_give_rank_one() {
        let s = orthonormal_basis(&m(&[&[1.0, 2.0], &[0.0, 0.0]]), &tol()).unwrap();
        assert_eq!(s.dim(), 1);
        assert!((s.basis()[(0, 0)] - ONE).norm() < 1e-14);
    }

    #[test]
    fn zero_matrix_spans_nothing() {
        let s = orthonormal_basis(&zeros(3, 2), &tol()).unwrap();
        assert_eq!(s.dim(), 0);
        assert_eq!(s.ambient_dim(), 3);
        assert_eq!(s.projector(), zeros(3, 3));
    }

    #[test]
    fn two_independent_columns_span_everything() {
        let s = orthonormal_basis(&m(&[&[1.0, 1.0], &[1.0, -1.0]]), &tol()).unwrap();
        assert_eq!(s.dim(), 2);
        // Gram oracle: P = A (A^H A)^{-1} A^H
        let a = m(&[&[1.0, 1.0], &[1.0, -1.0]]);
        let gram = a.adjoint() * &a;
        let p = &a * gram.try_inverse().unwrap() * a.adjoint();
        assert!(op_norm(&(s.projector() - p)) < 1e-12);
        assert!(op_norm(&(s.projector() - identity(2))) < 1e-12);
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let mut a = zeros(2, 1);
        a[(0, 0)] = c(f64::NAN, 0.0);
        assert!(matches!(
            orthonormal_basis(&a, &tol()),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn projector_examples() {
        let e1 = Subspace::coordinate(2, &[0]);
        assert_eq!(e1.projector(), m(&[&[1.0, 0.0], &[0.0, 0.0]]));
        assert!(op_norm(&(Subspace::whole(3).projector() - identity(3))) < 1e-15);
        let diag = orthonormal_basis(&m(&[&[1.0], &[1.0]]), &tol()).unwrap();
        // outer-product oracle v v^H / |v|^2 with v = (1, 1)
        let oracle = m(&[&[0.5, 0.5], &[0.5, 0.5]]);
        assert!(op_norm(&(diag.projector() - oracle)) < 1e-14);
    }

    #[test]
    fn complement_examples() {
        let whole = Subspace::whole(2);
        let e1 = Subspace::coordinate(2, &[0]);
        let comp = ortho_complement_within(&whole, &e1, &tol()).unwrap();
        assert!(comp.same_as(&Subspace::coordinate(2, &[1]), 1e-12));
        let same = ortho_complement_within(&e1, &e1, &tol()).unwrap();
        assert_eq!(same.dim(), 0);

        let s = orthonormal_basis(&m(&[&[1.0, 1.0], &[1.0, -1.0]]), &tol()).unwrap();
        let t = orthonormal_basis(&m(&[&[1.0], &[1.0]]), &tol()).unwrap();
        let r = ortho_complement_within(&s, &t, &tol()).unwrap();
        // projector-difference oracle
        let oracle = s.projector() - t.projector();
        assert!(op_norm(&(r.projector() - oracle)) < 1e-12);
        assert_eq!(r.dim(), 1);
    }

    #[test]
    fn complement_rejects_non_contained() {
        let e1 = Subspace::coordinate(2, &[0]);
        let e2 = Subspace::coordinate(2, &[1]);
        match ortho_complement_within(&e1, &e2, &tol()) {
            Err(Error::Containment { residual }) => assert!((residual - 1.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn spectrum_examples() {
        let d = m(&[&[1.0, 0.0], &[0.0, -1.0]]);
        assert_eq!(hermitian_spectrum(&d, &tol()).unwrap(), vec![-1.0, 1.0]);
        let z = hermitian_spectrum(&zeros(3, 3), &tol()).unwrap();
        assert!(z.iter().all(|x| x.abs() < 1e-15) && z.len() == 3);
        // characteristic polynomial of [[1/2,1/2],[1/2,1/2]]: x^2 - x = 0
        let h = hermitian_spectrum(&m(&[&[0.5, 0.5], &[0.5, 0.5]]), &tol()).unwrap();
        assert!(h[0].abs() < 1e-14 && (h[1] - 1.0).abs() < 1e-14);
        assert!(matches!(
            hermitian_spectrum(&m(&[&[0.0, 1.0], &[0.0, 0.0]]), &tol()),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn operator_class_examples() {
        let id = operator_class(&identity(2), 1e-9);
        assert!(id.isometry && id.unitary && id.projection && id.self_adjoint);
        let p = operator_class(&m(&[&[1.0, 0.0], &[0.0, 0.0]]), 1e-9);
        assert!(p.projection && !p.isometry);
        let col = operator_class(&m(&[&[1.0], &[0.0]]), 1e-9);
        assert!(col.isometry && !col.unitary && !col.self_adjoint);
    }

    #[test]
    fn kernel_of_nilpotent() {
        let n = m(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let k = kernel(&n, &tol());
        assert!(k.same_as(&Subspace::coordinate(2, &[0]), 1e-12));
        let k0 = kernel(&zeros(0, 3), &tol());
        assert_eq!(k0.dim(), 3);
    }

    #[test]
    fn rounding_sized_matrix_has_full_kernel() {
        // 1 − P for P = [1 + 4e-16]
        let k = kernel(&m(&[&[-4e-16]]), &tol());
        assert_eq!(k.dim(), 1);
        assert_eq!(kernel(&m(&[&[1e-3]]), &tol()).dim(), 0);
    }

    #[test]
    fn canonical_basis_is_presentation_independent() {
        let a = m(&[&[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0]]);
        let b = m(&[&[1.0, 2.0], &[2.0, 3.0], &[1.0, 1.0]]);
        let sa = orthonormal_basis(&a, &tol()).unwrap();
        let sb = orthonormal_basis(&b, &tol()).unwrap();
        assert!(op_norm(&(sa.basis() - sb.basis())) < 1e-12);
    }

    #[test]
    fn spectral_radius_of_nilpotent_and_rotation() {
        assert!(spectral_radius(&m(&[&[0.0, 1.0], &[0.0, 0.0]])) < 1e-12);
        let r = m(&[&[0.0, -1.0], &[1.0, 0.0]]);
        assert!((spectral_radius(&r) - 1.0).abs() < 1e-12);
    }

    fn cmatrix(rows: usize, cols: usize) -> impl Strategy<Value = CMatrix> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), rows * cols)
            .prop_map(move |v| CMatrix::from_fn(rows, cols, |i, j| c(v[i * cols + j].0, v[i * cols + j].1)))
    }

    proptest! {
        #[test]
        fn projector_is_idempotent_hermitian_with_trace_dim(a in cmatrix(5, 3)) {
            let s = orthonormal_basis(&a, &tol()).unwrap();
            let p = s.projector();
            prop_assert!(op_norm(&(&p * &p - &p)) < 1e-8);
            prop_assert!(op_norm(&(&p - p.adjoint())) < 1e-8);
            prop_assert!((p.trace().re - s.dim() as f64).abs() < 1e-8);
        }

        #[test]
        fn complement_plus_part_reconstructs(a in cmatrix(6, 4), sel in 0usize..4) {
            let s = orthonormal_basis(&a, &tol()).unwrap();
            let t = orthonormal_basis(&(&a.columns(0, sel + 1).into_owned()), &tol()).unwrap();
            let r = ortho_complement_within(&s, &t, &tol()).unwrap();
            prop_assert_eq!(r.dim(), s.dim() - t.dim());
            prop_assert!(op_norm(&(r.projector() + t.projector() - s.projector())) < 1e-8);
        }

        #[test]
        fn singular_part_reconstructs(a in cmatrix(5, 3), rank in 1usize..3) {
            // force a rank-deficient product, the case plain complex SVD gets wrong
            let m = a.columns(0, rank).into_owned() * a.columns(0, rank).adjoint();
            let part = singular_part(&m, 1e-12);
            let d = CMatrix::from_diagonal(&DVector::from_iterator(part.s.len(), part.s.iter().map(|&x| c(x, 0.0))));
            prop_assert!(op_norm(&(&part.u * d * part.v.adjoint() - &m)) < 1e-9);
            prop_assert_eq!(part.s.len(), rank);
        }

        #[test]
        fn polar_factor_is_unitary(a in cmatrix(4, 4), drop in 0usize..3) {
            let mut m = a.clone();
            for j in 0..drop {
                m.set_column(j, &CVector::zeros(4));
            }
            let q = polar_unitary(&m);
            prop_assert!(op_norm(&(q.adjoint() * &q - identity(4))) < 1e-9);
        }

        #[test]
        fn spectrum_sums_to_trace(a in cmatrix(4, 4)) {
            let h = &a + a.adjoint();
            let ev = hermitian_spectrum(&h, &tol()).unwrap();
            prop_assert!((ev.iter().sum::<f64>() - h.trace().re).abs() < 1e-8);
            prop_assert!(ev.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
