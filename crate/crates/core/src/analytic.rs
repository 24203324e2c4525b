//! Analytic descriptions of a pure pair: the symbols `Θ_{V_j}`, the unitaries
//! `Π̃_i = Π_{V_i}Π_V*` and `Π̃ = Π̃_2Π̃_1*` on kernel vectors, and the
//! invariants `θ_{V_i,V_j}`.
//!
//! Vectors of `H²_{W_i}` are [`GradedVector`]s in the canonical basis of
//! `W_i`; vectors of the model space are ambient coordinate vectors.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hardy::{kernel_tail_bound, GradedVector, PolySymbol};
use crate::json;
use crate::linalg::{op_norm, vec_norm, zeros, CMatrix, CVector, Subspace, TolerancePolicy, C64, ONE};
use crate::model::{which_name, GradedPair, Which};

/// Truncated Taylor series of an analytic operator function `W_dom → W_cod`.
#[derive(Clone, Debug, Serialize)]
pub struct AnalyticSymbolSeries {
    pub domain_dim: usize,
    pub codomain_dim: usize,
    #[serde(with = "json::matrices")]
    pub coeffs: Vec<CMatrix>,
    pub degree: usize,
    /// Bound on the operator norm of the discarded tail `Σ_{m>N} z^m T_m`
    /// acting on unit vectors, in the `H²` sense.
    pub tail_bound: f64,
}

impl AnalyticSymbolSeries {
    fn new(domain_dim: usize, codomain_dim: usize, coeffs: Vec<CMatrix>, tail_bound: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Dimension("a series needs at least one coefficient".into()));
        }
        for m in &coeffs {
            if m.shape() != (codomain_dim, domain_dim) {
                return Err(Error::Dimension(format!(
                    "coefficient of shape {:?}, expected {:?}",
                    m.shape(),
                    (codomain_dim, domain_dim)
                )));
            }
            crate::linalg::check_finite(m, "series coefficient")?;
        }
        Ok(Self {
            domain_dim,
            codomain_dim,
            degree: coeffs.len() - 1,
            coeffs,
            tail_bound,
        })
    }

    pub fn coeff(&self, m: usize) -> CMatrix {
        self.coeffs
            .get(m)
            .cloned()
            .unwrap_or_else(|| zeros(self.codomain_dim, self.domain_dim))
    }

    pub fn eval(&self, z: C64) -> CMatrix {
        let mut acc = zeros(self.codomain_dim, self.domain_dim);
        for m in self.coeffs.iter().rev() {
            acc = acc * z + m;
        }
        acc
    }

    /// Multiplication by the truncated series, keeping degrees `<= degree`.
    pub fn apply(&self, f: &GradedVector, degree: usize) -> Result<GradedVector> {
        if f.dim() != self.domain_dim {
            return Err(Error::Dimension(format!(
                "series domain {} applied to a vector of dimension {}",
                self.domain_dim,
                f.dim()
            )));
        }
        let mut out = vec![CVector::zeros(self.codomain_dim); degree + 1];
        for (b, fb) in f.coeffs().iter().enumerate().take(degree + 1) {
            for (a, ta) in self.coeffs.iter().enumerate().take(degree + 1 - b) {
                out[a + b] += ta * fb;
            }
        }
        GradedVector::new(self.codomain_dim, out)
    }

    /// The square truncation as a polynomial symbol, e.g. for the boundary
    /// inner test.
    pub fn to_poly(&self) -> Result<PolySymbol> {
        if self.domain_dim != self.codomain_dim {
            return Err(Error::Dimension("only square series convert to symbols".into()));
        }
        if self.domain_dim == 0 {
            return Err(Error::Dimension("empty series".into()));
        }
        PolySymbol::new(self.coeffs.clone())
    }
}

/// `z f`
fn times_z(f: &GradedVector, degree: usize) -> GradedVector {
    let mut coeffs = vec![CVector::zeros(f.dim())];
    coeffs.extend(f.coeffs().iter().take(degree).cloned());
    GradedVector::new(f.dim(), coeffs).expect("shifted coefficients are finite")
}

fn dist(a: &GradedVector, b: &GradedVector, degree: usize) -> f64 {
    a.truncate(degree).sub(&b.truncate(degree)).norm()
}

/// Exact forward action of `V_1`, `V_2` or `V` on the model: inputs must be
/// supported on interior coordinates.
struct Forward<'a> {
    pair: &'a GradedPair,
    interior: Vec<bool>,
    limit: usize,
    tol: &'a TolerancePolicy,
}

impl<'a> Forward<'a> {
    fn new(pair: &'a GradedPair, tol: &'a TolerancePolicy) -> Self {
        let mut interior = vec![false; pair.dim()];
        let idx = pair.interior_indices();
        for &i in &idx {
            interior[i] = true;
        }
        let limit = idx.iter().map(|&i| pair.grade(i)).max().unwrap_or(0);
        Self {
            pair,
            interior,
            limit,
            tol,
        }
    }

    fn check(&self, v: &CVector) -> Result<()> {
        let cut = self.tol.eq_tol * vec_norm(v).max(1.0);
        let worst = (0..v.len())
            .filter(|&i| !self.interior[i] && v[i].norm() > cut)
            .map(|i| self.pair.grade(i))
            .max();
        match worst {
            None => Ok(()),
            Some(degree) => Err(Error::Guard {
                degree,
                limit: self.limit,
            }),
        }
    }

    fn apply(&self, which: Which, v: &CVector) -> Result<CVector> {
        match which {
            Which::First => {
                self.check(v)?;
                Ok(self.pair.v1() * v)
            }
            Which::Second => {
                self.check(v)?;
                Ok(self.pair.v2() * v)
            }
            Which::Product => {
                let u = self.apply(Which::Second, v)?;
                self.apply(Which::First, &u)
            }
        }
    }
}

fn wandering_of(pair: &GradedPair, which: Which, tol: &TolerancePolicy) -> Result<Subspace> {
    pair.finite_wandering(which, tol)
}

fn require_pure(pair: &GradedPair, which: Which) -> Result<()> {
    if pair.purity().of(which).is_pure() {
        Ok(())
    } else {
        Err(Error::NotPure(format!("{} is not certified pure", which_name(which))))
    }
}

fn pair_of(i: Which) -> Result<Which> {
    match i {
        Which::First => Ok(Which::Second),
        Which::Second => Ok(Which::First),
        Which::Product => Err(Error::Precondition("expected i ∈ {1, 2}".into())),
    }
}

fn check_in(s: &Subspace, v: &CVector, what: &str, tol: &TolerancePolicy) -> Result<()> {
    let residual = vec_norm(&(v - s.projector() * v));
    if residual > tol.approx_tol * vec_norm(v).max(1.0) {
        return Err(Error::Precondition(format!("{what} is not in the expected subspace (residual {residual:.3e})")));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct WoldTransform {
    /// `Π_{V_i} h` in the basis of `W_i`, to the requested degree.
    pub vector: GradedVector,
    /// `‖V_i*^{N+1} h‖`, the norm of the discarded tail.
    pub tail: f64,
}

/// `Π_{V_i} h = Σ_m z^m P_{W_i} V_i*^m h`.
pub fn wold_transform(
    pair: &GradedPair,
    i: Which,
    h: &CVector,
    degree: usize,
    tol: &TolerancePolicy,
) -> Result<WoldTransform> {
    pair_of(i)?;
    if h.len() != pair.dim() {
        return Err(Error::Dimension(format!("vector of length {} on a model of dimension {}", h.len(), pair.dim())));
    }
    let wi = wandering_of(pair, i, tol)?;
    wold_with(pair.op(i).adjoint(), wi.basis(), h, degree)
}

fn wold_with(adj: CMatrix, basis: &CMatrix, h: &CVector, degree: usize) -> Result<WoldTransform> {
    let mut g = h.clone();
    let mut coeffs = Vec::with_capacity(degree + 1);
    for m in 0..=degree {
        if m > 0 {
            g = &adj * &g;
        }
        coeffs.push(basis.adjoint() * &g);
    }
    g = &adj * &g;
    Ok(WoldTransform {
        vector: GradedVector::new(basis.ncols(), coeffs)?,
        tail: vec_norm(&g),
    })
}

/// `Θ_{V_j}(z) = P_{W_i}(I − zV_i*)^{-1}V_j|_{W_i}` with coefficients
/// `P_{W_i}V_i*^m V_j|_{W_i}`, `m <= degree`, in the basis of `W_i`.
pub fn theta_vj(pair: &GradedPair, i: Which, degree: usize, tol: &TolerancePolicy) -> Result<AnalyticSymbolSeries> {
    let j = pair_of(i)?;
    require_pure(pair, i)?;
    let wi = wandering_of(pair, i, tol)?;
    let fwd = Forward::new(pair, tol);
    let b = wi.basis();
    let k = b.ncols();
    let adj = pair.op(i).adjoint();
    let mut g = zeros(pair.dim(), k);
    for col in 0..k {
        let v = fwd.apply(j, &b.column(col).into_owned())?;
        g.set_column(col, &v);
    }
    let mut coeffs = Vec::with_capacity(degree + 1);
    for m in 0..=degree {
        if m > 0 {
            g = &adj * &g;
        }
        coeffs.push(b.adjoint() * &g);
    }
    let tail = op_norm(&(&adj * &g));
    AnalyticSymbolSeries::new(k, k, coeffs, tail)
}

/// `‖Π_{V_i}V_j h − Θ_{V_j}Π_{V_i}h‖` on degrees `<= degree`.
pub fn intertwining_residual_theta(
    pair: &GradedPair,
    i: Which,
    h: &CVector,
    degree: usize,
    tol: &TolerancePolicy,
) -> Result<f64> {
    let j = pair_of(i)?;
    let theta = theta_vj(pair, i, degree, tol)?;
    let vh = Forward::new(pair, tol).apply(j, h)?;
    let lhs = wold_transform(pair, i, &vh, degree, tol)?.vector;
    let rhs = theta.apply(&wold_transform(pair, i, h, degree, tol)?.vector, degree)?;
    Ok(dist(&lhs, &rhs, degree))
}

/// `Π_V* f = Σ_m V^m f_m` for `f` in the basis of `W`, by Horner in `V`.
fn product_synthesis(fwd: &Forward<'_>, w: &Subspace, f: &GradedVector) -> Result<CVector> {
    let Some(top) = f.degree() else {
        return Ok(CVector::zeros(fwd.pair.dim()));
    };
    let mut acc = w.basis() * f.coeff(top);
    for m in (0..top).rev() {
        acc = w.basis() * f.coeff(m) + fwd.apply(Which::Product, &acc)?;
    }
    Ok(acc)
}

#[derive(Clone, Debug, Serialize)]
pub struct TildePiImage {
    /// `Π_{V_i}Π_V*` applied to the input (the definitional route).
    pub vector: GradedVector,
    pub degree: usize,
}

/// `Π̃_i f = Π_{V_i}Π_V* f` for finitely supported `f ∈ H²_W`, given in the
/// basis of `W`.
pub fn tilde_pi(
    pair: &GradedPair,
    i: Which,
    f: &GradedVector,
    degree: usize,
    tol: &TolerancePolicy,
) -> Result<TildePiImage> {
    pair_of(i)?;
    require_pure(pair, i)?;
    let w = wandering_of(pair, Which::Product, tol)?;
    if f.dim() != w.dim() {
        return Err(Error::Dimension(format!("expected a W-valued vector of dimension {}", w.dim())));
    }
    let fwd = Forward::new(pair, tol);
    let h = product_synthesis(&fwd, &w, f)?;
    Ok(TildePiImage {
        vector: wold_transform(pair, i, &h, degree, tol)?.vector,
        degree,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TildePiChecks {
    /// `‖Π̃_i(zf) − zΘ_{V_j}Π̃_i f‖` on degrees `<= degree`.
    pub intertwining: f64,
    /// `|‖Π̃_i f‖² + tail² − ‖f‖²|`
    pub isometry: f64,
}

/// Intertwining and isometry residuals of `Π̃_i` on a finitely supported `f`.
pub fn tilde_pi_checks(
    pair: &GradedPair,
    i: Which,
    f: &GradedVector,
    degree: usize,
    tol: &TolerancePolicy,
) -> Result<TildePiChecks> {
    let theta = theta_vj(pair, i, degree, tol)?;
    let pf = tilde_pi(pair, i, f, degree, tol)?.vector;
    let pzf = tilde_pi(pair, i, &times_z(f, f.degree().unwrap_or(0) + 1), degree, tol)?.vector;
    let rhs = times_z(&theta.apply(&pf, degree)?, degree);
    let intertwining = dist(&pzf, &rhs, degree);

    let w = wandering_of(pair, Which::Product, tol)?;
    let h = product_synthesis(&Forward::new(pair, tol), &w, f)?;
    let full = wold_transform(pair, i, &h, degree, tol)?;
    let isometry = (full.vector.norm_sqr() + full.tail * full.tail - f.norm_sqr()).abs();
    Ok(TildePiChecks {
        intertwining,
        isometry,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelImage {
    /// Definitional route.
    pub vector: GradedVector,
    /// Closed formula route.
    pub closed: GradedVector,
    pub route_difference: f64,
    /// Norm of the kernel tail dropped by truncating at the given degree.
    pub tail_bound: f64,
    pub degree: usize,
}

/// `Π̃_i(S(·, w)η)` for `η ∈ W` (ambient coordinates), by the closed formula
/// `(I − w̄zΘ_{V_j}(z))^{-1} P_{W_i}(I − zV_i*)^{-1}η` and by applying
/// `Π_{V_i}Π_V*` to the truncated kernel vector.
pub fn tilde_pi_on_kernel(
    pair: &GradedPair,
    i: Which,
    w: C64,
    eta: &CVector,
    degree: usize,
    tol: &TolerancePolicy,
) -> Result<KernelImage> {
    pair_of(i)?;
    require_pure(pair, i)?;
    let r = w.norm();
    if !(r < 1.0) {
        return Err(Error::Precondition(format!("kernel point must lie in the open unit disc (|w| = {r})")));
    }
    let ws = wandering_of(pair, Which::Product, tol)?;
    if eta.len() != pair.dim() {
        return Err(Error::Dimension(format!("vector of length {} on a model of dimension {}", eta.len(), pair.dim())));
    }
    check_in(&ws, eta, "η", tol)?;
    let wbar = w.conj();

    let theta = theta_vj(pair, i, degree, tol)?;
    let f0 = wold_transform(pair, i, eta, degree, tol)?.vector;
    let mut term = f0.clone();
    let mut closed = f0;
    let mut pow = ONE;
    for _ in 1..=degree {
        term = times_z(&theta.apply(&term, degree)?, degree);
        pow *= wbar;
        closed = closed.add(&term.scale(pow));
    }

    let fwd = Forward::new(pair, tol);
    let mut h = CVector::zeros(pair.dim());
    let mut vm = eta.clone();
    let mut pow = ONE;
    for m in 0..=degree {
        if m > 0 {
            vm = fwd.apply(Which::Product, &vm)?;
            pow *= wbar;
        }
        h += &vm * pow;
    }
    let vector = wold_transform(pair, i, &h, degree, tol)?.vector;
    let route_difference = dist(&vector, &closed, degree);
    let tail_bound = kernel_tail_bound(r, degree, vec_norm(eta));
    if route_difference > tail_bound + tol.approx_tol {
        return Err(Error::Residual {
            what: "kernel image routes",
            residual: route_difference,
            tol: tail_bound + tol.approx_tol,
        });
    }
    Ok(KernelImage {
        vector,
        closed,
        route_difference,
        tail_bound,
        degree,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DoubleKernelImage {
    pub vector: GradedVector,
    pub closed: GradedVector,
    pub route_difference: f64,
    /// `|w|^{K+1}/(1 − |w|)‖η_1‖` for the dropped Neumann terms.
    pub tail_bound: f64,
    /// `‖Π̃(z^{m+1}e) − Θ_{V_1}Π̃(z^m e)‖` over basis vectors `e` of `W_1`
    /// and `m < terms`.
    pub intertwining: f64,
    pub degree: usize,
}

/// `Π̃ = Π̃_2Π̃_1*` on `S(·, w)η_1`, `η_1 ∈ W_1`: the closed formula
/// `(I − w̄Θ_{V_1}(z))^{-1}P_{W_2}(I − zV_2*)^{-1}η_1` against
/// `Π_{V_2}Π_{V_1}*` on the truncated kernel vector. Both Neumann series run
/// to `degree` terms.
pub fn tilde_pi_double(
    pair: &GradedPair,
    w: C64,
    eta1: &CVector,
    degree: usize,
    tol: &TolerancePolicy,
) -> Result<DoubleKernelImage> {
    require_pure(pair, Which::First)?;
    require_pure(pair, Which::Second)?;
    let r = w.norm();
    if !(r < 1.0) {
        return Err(Error::Precondition(format!("kernel point must lie in the open unit disc (|w| = {r})")));
    }
    if eta1.len() != pair.dim() {
        return Err(Error::Dimension(format!("vector of length {} on a model of dimension {}", eta1.len(), pair.dim())));
    }
    let w1 = wandering_of(pair, Which::First, tol)?;
    check_in(&w1, eta1, "η₁", tol)?;
    let wbar = w.conj();
    let fwd = Forward::new(pair, tol);

    let theta1 = theta_vj(pair, Which::Second, degree, tol)?;
    let g0 = wold_transform(pair, Which::Second, eta1, degree, tol)?.vector;
    let mut term = g0.clone();
    let mut closed = g0;
    let mut pow = ONE;
    for _ in 1..=degree {
        term = theta1.apply(&term, degree)?;
        pow *= wbar;
        closed = closed.add(&term.scale(pow));
    }

    let mut h = CVector::zeros(pair.dim());
    let mut vk = eta1.clone();
    let mut pow = ONE;
    for k in 0..=degree {
        if k > 0 {
            vk = fwd.apply(Which::First, &vk)?;
            pow *= wbar;
        }
        h += &vk * pow;
    }
    let vector = wold_transform(pair, Which::Second, &h, degree, tol)?.vector;
    let route_difference = dist(&vector, &closed, degree);
    let tail_bound = r.powi(degree as i32 + 1) / (1.0 - r) * vec_norm(eta1);
    if route_difference > tail_bound + tol.approx_tol {
        return Err(Error::Residual {
            what: "double kernel image routes",
            residual: route_difference,
            tol: tail_bound + tol.approx_tol,
        });
    }

    // Π̃ M_z = M_{Θ_{V1}} Π̃ on monomials z^m e.
    let terms = degree.min(3);
    let mut intertwining: f64 = 0.0;
    for col in 0..w1.dim() {
        let mut v = w1.basis().column(col).into_owned();
        let mut prev = wold_transform(pair, Which::Second, &v, degree, tol)?.vector;
        for _ in 0..terms {
            v = fwd.apply(Which::First, &v)?;
            let next = wold_transform(pair, Which::Second, &v, degree, tol)?.vector;
            intertwining = intertwining.max(dist(&next, &theta1.apply(&prev, degree)?, degree));
            prev = next;
        }
    }
    Ok(DoubleKernelImage {
        vector,
        closed,
        route_difference,
        tail_bound,
        intertwining,
        degree,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CharacteristicInvariant {
    /// `θ_{V_i,V_j}` from `W_j` (canonical basis) into ambient coordinates.
    pub series: AnalyticSymbolSeries,
    /// Largest coefficient error of
    /// `P_{W_i}(I − zV_i*)^{-1}|_W = I_W + θ_{V_i,V_j}(z)V_i*|_W`.
    pub bridge_residual: f64,
}

/// `θ_{V_i,V_j}(z) = [−V_i + zP_{W_i}(I − zV_i*)^{-1}P_{W_j}]|_{W_j}`, with
/// coefficients `−V_i|_{W_j}` and `P_{W_i}V_i*^{m−1}|_{W_j}`.
pub fn characteristic_invariant(
    pair: &GradedPair,
    i: Which,
    degree: usize,
    tol: &TolerancePolicy,
) -> Result<CharacteristicInvariant> {
    let j = pair_of(i)?;
    let wi = wandering_of(pair, i, tol)?;
    let wj = wandering_of(pair, j, tol)?;
    let w = wandering_of(pair, Which::Product, tol)?;
    let fwd = Forward::new(pair, tol);
    let n = pair.dim();
    let bj = wj.basis();
    let pi = wi.projector();
    let adj = pair.op(i).adjoint();

    let mut t0 = zeros(n, wj.dim());
    for col in 0..wj.dim() {
        let v = fwd.apply(i, &bj.column(col).into_owned())?;
        t0.set_column(col, &(-v));
    }
    let mut coeffs = vec![t0];
    let mut g = bj.clone();
    for m in 1..=degree {
        if m > 1 {
            g = &adj * &g;
        }
        coeffs.push(&pi * &g);
    }
    let tail = op_norm(&(&adj * &g));
    let series = AnalyticSymbolSeries::new(wj.dim(), n, coeffs, tail)?;

    // Bridge identity, coefficientwise on W.
    let bw = w.basis();
    let lowered = bj.adjoint() * &adj * bw;
    let mut g = bw.clone();
    let mut bridge: f64 = 0.0;
    for m in 0..=degree {
        if m > 0 {
            g = &adj * &g;
        }
        let left = &pi * &g;
        let mut right = series.coeff(m) * &lowered;
        if m == 0 {
            right += bw;
        }
        bridge = bridge.max(op_norm(&(left - right)));
    }
    Ok(CharacteristicInvariant {
        series,
        bridge_residual: bridge,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bcl::{build_multipliers, BCLData};
    use crate::hardy::{symbol_is_inner_sampled, GradedVector};
    use crate::linalg::{c, identity, ZERO};
    use crate::random::{random_bcl, random_vector_in, rng_from_seed};
    use rand::Rng;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn m(rows: &[&[f64]]) -> CMatrix {
        CMatrix::from_fn(rows.len(), rows[0].len(), |i, j| c(rows[i][j], 0.0))
    }

    fn shift_and(phi2: PolySymbol, n: usize) -> GradedPair {
        GradedPair::from_symbols(&PolySymbol::shift(1), &phi2, n, &tol()).unwrap()
    }

    fn constant(n: usize) -> CVector {
        let mut v = CVector::zeros(n);
        v[0] = ONE;
        v
    }

    fn swap(n: usize) -> GradedPair {
        let data = BCLData::new(m(&[&[0.0, 1.0], &[1.0, 0.0]]), m(&[&[1.0, 0.0], &[0.0, 0.0]]), &tol()).unwrap();
        build_multipliers(&data).graded(n, &tol()).unwrap()
    }

    /// Both factors pure needs `0 < rank P < dim`, so `dim >= 2`.
    fn pure_bcl(seed: u64, dim: usize, n: usize) -> GradedPair {
        let mut rng = rng_from_seed(seed);
        loop {
            let rank = rng.random_range(1..dim);
            let data = random_bcl(dim, Some(rank), &mut rng);
            let pair = build_multipliers(&data).graded(n, &tol()).unwrap();
            let p = pair.purity();
            if p.v1.is_pure() && p.v2.is_pure() {
                return pair;
            }
        }
    }

    #[test]
    fn theta_examples() {
        let p = shift_and(PolySymbol::identity(1), 6);
        let th = theta_vj(&p, Which::First, 4, &tol()).unwrap();
        assert!((th.coeff(0)[(0, 0)] - ONE).norm() < 1e-14);
        for k in 1..=4 {
            assert!(th.coeff(k)[(0, 0)].norm() < 1e-14);
        }
        let zz = shift_and(PolySymbol::shift(1), 8);
        let th = theta_vj(&zz, Which::First, 4, &tol()).unwrap();
        let expect = [0.0, 1.0, 0.0, 0.0, 0.0];
        for (k, e) in expect.iter().enumerate() {
            assert!((th.coeff(k)[(0, 0)] - c(*e, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn theta_requires_purity() {
        let p = GradedPair::from_symbols(&PolySymbol::identity(1), &PolySymbol::shift(1), 5, &tol()).unwrap();
        assert!(matches!(theta_vj(&p, Which::First, 3, &tol()), Err(Error::NotPure(_))));
    }

    #[test]
    fn theta_on_doubly_commuting_tensor_model_is_constant() {
        // V1 = M_z ⊗ I, V2 = I ⊗ U on H² ⊗ C^2 with U unitary.
        let u = m(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let phi1 = PolySymbol::linear(zeros(2, 2), identity(2)).unwrap();
        let phi2 = PolySymbol::linear(u.clone(), zeros(2, 2)).unwrap();
        let p = GradedPair::from_symbols(&phi1, &phi2, 6, &tol()).unwrap();
        let th = theta_vj(&p, Which::First, 4, &tol()).unwrap();
        assert!(op_norm(&(th.coeff(0) - &u)) < 1e-12);
        for k in 1..=4 {
            assert!(op_norm(&th.coeff(k)) < 1e-14);
        }
    }

    #[test]
    fn theta_intertwines_and_is_inner() {
        let p = pure_bcl(3, 3, 40);
        let mut rng = rng_from_seed(4);
        let theta = theta_vj(&p, Which::First, 30, &tol()).unwrap();
        if theta.tail_bound < 1e-6 {
            assert!(symbol_is_inner_sampled(&theta.to_poly().unwrap(), 64, 1e-5));
        }
        let interior = p.interior_indices();
        let mut h = CVector::zeros(p.dim());
        for &i in interior.iter().take(9) {
            h[i] = c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
        assert!(intertwining_residual_theta(&p, Which::First, &h, 10, &tol()).unwrap() < 1e-10);
    }

    #[test]
    fn kernel_image_examples() {
        let p = shift_and(PolySymbol::identity(1), 12);
        let eta = constant(p.dim());
        let img = tilde_pi_on_kernel(&p, Which::First, c(0.4, 0.2), &eta, 8, &tol()).unwrap();
        let wbar = c(0.4, -0.2);
        let mut pow = ONE;
        for k in 0..=8 {
            assert!((img.vector.coeff(k)[0] - pow).norm() < 1e-13);
            pow *= wbar;
        }
        let at0 = tilde_pi_on_kernel(&p, Which::First, ZERO, &eta, 8, &tol()).unwrap();
        assert!((at0.vector.coeff(0)[0] - ONE).norm() < 1e-14);
        assert!(at0.vector.truncate(8).sub(&at0.vector.truncate(0)).norm() < 1e-14);
    }

    #[test]
    fn kernel_image_two_routes_on_random_instance() {
        let p = pure_bcl(11, 3, 22);
        let mut rng = rng_from_seed(12);
        let eta = random_vector_in(&p.wandering(&tol()).w, &mut rng);
        for i in [Which::First, Which::Second] {
            let img = tilde_pi_on_kernel(&p, i, c(0.3, 0.0), &eta, 20, &tol()).unwrap();
            assert!(img.route_difference <= 1e-6, "{}", img.route_difference);
        }
    }

    #[test]
    fn tilde_pi_checks_on_random_instance() {
        let p = pure_bcl(21, 2, 30);
        let mut rng = rng_from_seed(22);
        let coeffs = (0..4)
            .map(|_| CVector::from_fn(2, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)))
            .collect();
        let f = GradedVector::new(2, coeffs).unwrap();
        for i in [Which::First, Which::Second] {
            let r = tilde_pi_checks(&p, i, &f, 24, &tol()).unwrap();
            assert!(r.intertwining < 1e-8, "{r:?}");
            assert!(r.isometry < 1e-8, "{r:?}");
        }
    }

    #[test]
    fn double_examples() {
        let zz = shift_and(PolySymbol::shift(1), 14);
        let eta = constant(zz.dim());
        let img = tilde_pi_double(&zz, c(0.5, 0.1), &eta, 10, &tol()).unwrap();
        let wbar = c(0.5, -0.1);
        let mut pow = ONE;
        for k in 0..=10 {
            assert!((img.vector.coeff(k)[0] - pow).norm() < 1e-12);
            pow *= wbar;
        }
        assert!(img.intertwining < 1e-12);
        let zero = tilde_pi_double(&zz, c(0.5, 0.1), &CVector::zeros(zz.dim()), 10, &tol()).unwrap();
        assert!(zero.vector.is_zero() || zero.vector.norm() < 1e-15);

        let p = pure_bcl(31, 3, 14);
        let mut rng = rng_from_seed(32);
        let w1 = p.finite_wandering(Which::First, &tol()).unwrap();
        let eta1 = random_vector_in(&w1, &mut rng);
        let at0 = tilde_pi_double(&p, ZERO, &eta1, 10, &tol()).unwrap();
        let direct = wold_transform(&p, Which::Second, &eta1, 10, &tol()).unwrap().vector;
        assert!(dist(&at0.vector, &direct, 10) < 1e-13);
        let img = tilde_pi_double(&p, c(-0.2, 0.45), &eta1, 12, &tol()).unwrap();
        assert!(img.route_difference < 1e-9 && img.intertwining < 1e-9);
    }

    #[test]
    fn characteristic_examples() {
        let p = shift_and(PolySymbol::identity(1), 5);
        let inv = characteristic_invariant(&p, Which::First, 3, &tol()).unwrap();
        assert_eq!(inv.series.domain_dim, 0);
        let q = GradedPair::from_symbols(&PolySymbol::identity(1), &PolySymbol::shift(1), 5, &tol()).unwrap();
        let inv = characteristic_invariant(&q, Which::First, 3, &tol()).unwrap();
        assert_eq!(inv.series.domain_dim, 1);
        let mut expect = CVector::zeros(q.dim());
        expect[0] = c(-1.0, 0.0);
        assert!(vec_norm(&(inv.series.coeff(0).column(0) - expect)) < 1e-14);
        for k in 1..=3 {
            assert!(op_norm(&inv.series.coeff(k)) < 1e-14);
        }
        let s = characteristic_invariant(&swap(8), Which::First, 5, &tol()).unwrap();
        assert!(s.bridge_residual < 1e-9);
    }

    #[test]
    fn bridge_identity_on_random_instances() {
        for seed in 0..5 {
            let p = pure_bcl(40 + seed, 2 + seed as usize % 4, 14);
            for i in [Which::First, Which::Second] {
                let inv = characteristic_invariant(&p, i, 10, &tol()).unwrap();
                assert!(inv.bridge_residual < 1e-9, "{}", inv.bridge_residual);
            }
        }
    }

    #[test]
    fn series_apply_matches_eval_on_polynomials() {
        let s = AnalyticSymbolSeries::new(1, 1, vec![m(&[&[1.0]]), m(&[&[2.0]])], 0.0).unwrap();
        let f = GradedVector::new(1, vec![CVector::from_element(1, ONE), CVector::from_element(1, ONE)]).unwrap();
        let g = s.apply(&f, 5).unwrap();
        let got: Vec<f64> = (0..4).map(|k| g.coeff(k)[0].re).collect();
        assert_eq!(got, vec![1.0, 3.0, 2.0, 0.0]);
        assert!((s.eval(c(0.5, 0.0))[(0, 0)] - c(2.0, 0.0)).norm() < 1e-15);
    }
}
