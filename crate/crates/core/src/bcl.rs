//! BCL multiplier pairs `Φ1 = U*(P + zP⊥)`, `Φ2 = (P⊥ + zP)U`, their
//! wandering-subspace geometry, and extraction of `(U, P)` from a pair.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::{symbol_product, GradedVector, PolySymbol};
use crate::json;
use crate::linalg::{
    identity, kernel, op_norm, operator_class, zeros, CMatrix, CVector, Subspace, TolerancePolicy,
};
use crate::model::{GradedPair, Which};

/// Generating data `(U, P)` on a finite-dimensional wandering space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BCLData {
    dim: usize,
    #[serde(rename = "U", with = "json::matrix")]
    u: CMatrix,
    #[serde(rename = "P", with = "json::matrix")]
    p: CMatrix,
}

impl BCLData {
    /// Validates that `U` is unitary and `P` an orthogonal projection within
    /// `approx_tol`.
    pub fn new(u: CMatrix, p: CMatrix, tol: &TolerancePolicy) -> Result<Self> {
        let out = Self::new_unchecked(u, p);
        out.validate(tol)?;
        Ok(out)
    }

    pub(crate) fn new_unchecked(u: CMatrix, p: CMatrix) -> Self {
        Self {
            dim: u.nrows(),
            u,
            p,
        }
    }

    pub fn validate(&self, tol: &TolerancePolicy) -> Result<()> {
        let n = self.dim;
        for (m, name) in [(&self.u, "U"), (&self.p, "P")] {
            crate::linalg::check_finite(m, "BCL data")?;
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::Dimension(format!(
                    "{name} is {}x{} but dim is {n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        if !operator_class(&self.u, tol.approx_tol).unitary {
            return Err(Error::InvalidOperator("U is not unitary".into()));
        }
        if !operator_class(&self.p, tol.approx_tol).projection {
            return Err(Error::InvalidOperator("P is not an orthogonal projection".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn u(&self) -> &CMatrix {
        &self.u
    }

    pub fn p(&self) -> &CMatrix {
        &self.p
    }

    pub fn p_perp(&self) -> CMatrix {
        identity(self.dim) - &self.p
    }

    /// `(Z U Z*, Z P Z*)`.
    pub fn conjugate(&self, z: &CMatrix) -> BCLData {
        BCLData::new_unchecked(z * &self.u * z.adjoint(), z * &self.p * z.adjoint())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BCLPair {
    pub phi1: PolySymbol,
    pub phi2: PolySymbol,
}

impl BCLPair {
    pub fn dim(&self) -> usize {
        self.phi1.dim()
    }

    /// `(‖Φ1Φ2 − zI‖, ‖Φ2Φ1 − zI‖)` over coefficients.
    pub fn identity_residuals(&self) -> Result<(f64, f64)> {
        let z = PolySymbol::shift(self.dim());
        let a = symbol_product(&self.phi1, &self.phi2)?.coeff_distance(&z);
        let b = symbol_product(&self.phi2, &self.phi1)?.coeff_distance(&z);
        Ok((a, b))
    }

    pub fn graded(&self, degree: usize, tol: &TolerancePolicy) -> Result<GradedPair> {
        GradedPair::from_symbols(&self.phi1, &self.phi2, degree, tol)
    }
}

pub fn build_multipliers(data: &BCLData) -> BCLPair {
    let uh = data.u.adjoint();
    let pp = data.p_perp();
    BCLPair {
        phi1: PolySymbol::from_parts(data.dim, vec![&uh * &data.p, &uh * &pp]),
        phi2: PolySymbol::from_parts(data.dim, vec![&pp * &data.u, &data.p * &data.u]),
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct WanderingResiduals {
    /// `‖P_{W1} + P_{V1W2} − P_W‖`
    pub first_split: f64,
    /// `‖P_{V2W1} + P_{W2} − P_W‖`
    pub second_split: f64,
    /// `‖U*U − I‖`
    pub unitary: f64,
    /// Largest component of a wandering vector outside `W`, or of `V1 W2`,
    /// `V2 W1` outside `W`.
    pub containment: f64,
}

impl WanderingResiduals {
    pub fn max(&self) -> f64 {
        self.first_split
            .max(self.second_split)
            .max(self.unitary)
            .max(self.containment)
    }
}

/// Wandering subspaces expressed in coordinates of an orthonormal basis of
/// `W`, together with the unitary `U(η1 ⊕ V1η2) = V2η1 ⊕ η2`.
#[derive(Clone, Debug, Serialize)]
pub struct WanderingData {
    #[serde(skip)]
    pub w: Subspace,
    #[serde(skip)]
    pub w1: Subspace,
    #[serde(skip)]
    pub w2: Subspace,
    #[serde(skip)]
    pub v1w2: Subspace,
    #[serde(skip)]
    pub v2w1: Subspace,
    #[serde(rename = "U", with = "json::matrix")]
    pub u: CMatrix,
    /// Columns: the chosen basis of `W` in the pair's coordinates.
    #[serde(skip)]
    pub embedding: CMatrix,
    pub residuals: WanderingResiduals,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct WanderingDims {
    pub w: usize,
    pub w1: usize,
    pub w2: usize,
    pub v1w2: usize,
    pub v2w1: usize,
}

impl WanderingData {
    pub fn dims(&self) -> WanderingDims {
        WanderingDims {
            w: self.w.dim(),
            w1: self.w1.dim(),
            w2: self.w2.dim(),
            v1w2: self.v1w2.dim(),
            v2w1: self.v2w1.dim(),
        }
    }

    /// `P_{W2}` in the chosen basis of `W`.
    pub fn p(&self) -> CMatrix {
        self.w2.projector()
    }

    fn finish(mut self, tol: &TolerancePolicy) -> Result<Self> {
        let k = self.w.dim();
        let id = identity(k);
        self.residuals.first_split = op_norm(&(self.w1.projector() + self.v1w2.projector() - &id));
        self.residuals.second_split = op_norm(&(self.v2w1.projector() + self.w2.projector() - &id));
        self.residuals.unitary = op_norm(&(self.u.adjoint() * &self.u - &id));
        let worst = self.residuals.max();
        if worst > tol.eq_tol {
            return Err(Error::Residual {
                what: "wandering decomposition",
                residual: worst,
                tol: tol.eq_tol,
            });
        }
        Ok(self)
    }
}

/// Wandering data of a BCL pair read off the symbols: all five subspaces sit
/// in the constants, `W1 = ker Φ1(0)*`, `W2 = ker Φ2(0)*`, and `V1`, `V2` act
/// on them through the constant terms.
pub fn wandering_data_of_pair(pair: &BCLPair, tol: &TolerancePolicy) -> Result<WanderingData> {
    let d = pair.dim();
    let a0 = pair.phi1.coeff(0);
    let a1 = pair.phi1.coeff(1);
    let c0 = pair.phi2.coeff(0);
    let c1 = pair.phi2.coeff(1);
    let w1 = kernel(&a0.adjoint(), tol);
    let w2 = kernel(&c0.adjoint(), tol);
    let v1w2 = w2.image(&a0, tol);
    let v2w1 = w1.image(&c0, tol);
    // V1 η for η ∈ W2 must be constant, and likewise V2 on W1
    let containment = op_norm(&(&a1 * w2.basis())).max(op_norm(&(&c1 * w1.basis())));
    let u = &c0 * w1.projector() + a0.adjoint() * v1w2.projector();
    WanderingData {
        w: Subspace::whole(d),
        w1,
        w2,
        v1w2,
        v2w1,
        u,
        embedding: identity(d),
        residuals: WanderingResiduals {
            containment,
            ..Default::default()
        },
    }
    .finish(tol)
}

/// Wandering data of an abstract graded pair whose product has a finite
/// wandering space; `W` gets its canonical basis and the other subspaces are
/// expressed in it.
pub fn wandering_data_of_graded(pair: &GradedPair, tol: &TolerancePolicy) -> Result<WanderingData> {
    let w = pair.finite_wandering(Which::Product, tol)?;
    let gw = pair.wandering(tol);
    let b = w.basis().clone();
    let inside = |s: &Subspace| -> (Subspace, f64) {
        let res = w.containment_residual(s);
        let coords = b.adjoint() * s.basis();
        (Subspace::from_orthonormal(coords), res)
    };
    // W1, W2 lie in W, hence in the interior where V1, V2 are exact
    let (w1, r1) = inside(&gw.w1);
    let (w2, r2) = inside(&gw.w2);
    let (v1w2, r3) = inside(&gw.v1w2);
    let (v2w1, r4) = inside(&gw.v2w1);
    let t1 = pair.v1();
    let t2 = pair.v2();
    let u_amb = t2 * gw.w1.projector() + t1.adjoint() * gw.v1w2.projector();
    let u = b.adjoint() * u_amb * &b;
    WanderingData {
        w: Subspace::whole(w.dim()),
        w1,
        w2,
        v1w2,
        v2w1,
        u,
        embedding: b,
        residuals: WanderingResiduals {
            containment: r1.max(r2).max(r3).max(r4),
            ..Default::default()
        },
    }
    .finish(tol)
}

/// Coefficients `Φ1 = A + zB`, `Φ2 = C + zD` of the BCL representation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BclCoefficients {
    #[serde(with = "json::matrix")]
    pub a: CMatrix,
    #[serde(with = "json::matrix")]
    pub b: CMatrix,
    #[serde(with = "json::matrix")]
    pub c: CMatrix,
    #[serde(with = "json::matrix")]
    pub d: CMatrix,
}

impl BclCoefficients {
    pub fn distance(&self, other: &BclCoefficients) -> f64 {
        [
            op_norm(&(&self.a - &other.a)),
            op_norm(&(&self.b - &other.b)),
            op_norm(&(&self.c - &other.c)),
            op_norm(&(&self.d - &other.d)),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn pair(&self) -> BCLPair {
        let k = self.a.nrows();
        BCLPair {
            phi1: PolySymbol::from_parts(k, vec![self.a.clone(), self.b.clone()]),
            phi2: PolySymbol::from_parts(k, vec![self.c.clone(), self.d.clone()]),
        }
    }
}

/// Coefficients from the geometry: `A = V1 P_{W2}`, `B = V2* P_{V2W1}`,
/// `C = V2 P_{W1}`, `D = V1* P_{V1W2}`, each applied through the pair's own
/// operators and read back in the basis of `W`.
pub fn coefficients_from_wandering(wd: &WanderingData, pair: &GradedPair) -> Result<BclCoefficients> {
    let e = &wd.embedding;
    if e.nrows() > pair.dim() {
        return Err(Error::Dimension(format!(
            "wandering basis has {} coordinates, pair has {}",
            e.nrows(),
            pair.dim()
        )));
    }
    let e = if e.nrows() < pair.dim() {
        let mut big = zeros(pair.dim(), e.ncols());
        big.view_mut((0, 0), e.shape()).copy_from(e);
        big
    } else {
        e.clone()
    };
    let through = |op: &CMatrix, proj: CMatrix| -> CMatrix { e.adjoint() * op * &e * proj };
    let t1 = pair.v1();
    let t2 = pair.v2();
    Ok(BclCoefficients {
        a: through(t1, wd.w2.projector()),
        b: through(&t2.adjoint(), wd.v2w1.projector()),
        c: through(t2, wd.w1.projector()),
        d: through(&t1.adjoint(), wd.v1w2.projector()),
    })
}

/// Coefficients from `(U, P)`: `A = U*P`, `B = U*P⊥`, `C = P⊥U`, `D = PU`.
pub fn coefficients_from_data(data: &BCLData) -> BclCoefficients {
    let uh = data.u.adjoint();
    let pp = data.p_perp();
    BclCoefficients {
        a: &uh * &data.p,
        b: &uh * &pp,
        c: &pp * &data.u,
        d: &data.p * &data.u,
    }
}

/// Both coefficient constructions for `data`; fails if they disagree beyond
/// `eq_tol`.
pub fn coefficient_routes(data: &BCLData, tol: &TolerancePolicy) -> Result<(BclCoefficients, BclCoefficients, f64)> {
    let pair = build_multipliers(data);
    let wd = wandering_data_of_pair(&pair, tol)?;
    let graded = pair.graded(2, tol)?;
    let geometric = coefficients_from_wandering(&wd, &graded)?;
    let direct = coefficients_from_data(data);
    let gap = geometric.distance(&direct);
    if gap > tol.eq_tol {
        return Err(Error::Residual {
            what: "coefficient route agreement",
            residual: gap,
            tol: tol.eq_tol,
        });
    }
    Ok((geometric, direct, gap))
}

/// `η_m = P_W V^{*m} h` for the chosen isometry, stopping once `V^{*m} h`
/// vanishes; the reassembly `Σ V^m η_m` must reproduce `h`.
pub fn wold_coefficients(
    pair: &GradedPair,
    which: Which,
    w: &Subspace,
    h: &CVector,
    tol: &TolerancePolicy,
) -> Result<Vec<CVector>> {
    let t = pair.op(which);
    let th = t.adjoint();
    let pw = w.projector();
    let scale = 1.0 + h.norm();
    let mut rest = h.clone();
    let mut out = Vec::new();
    for _ in 0..=pair.dim() {
        if rest.norm() <= tol.eq_tol * scale {
            break;
        }
        out.push(&pw * &rest);
        rest = &th * rest;
    }
    let mut rebuilt = CVector::zeros(h.len());
    for eta in out.iter().rev() {
        rebuilt = &t * rebuilt + eta;
    }
    let residual = (&rebuilt - h).norm();
    if residual > tol.eq_tol * scale {
        return Err(Error::Residual {
            what: "Wold reconstruction",
            residual,
            tol: tol.eq_tol * scale,
        });
    }
    Ok(out)
}

/// Wold coefficients of a polynomial `h ∈ H²_{C^d}` for the product shift of
/// a BCL model, as a graded vector over `W`.
pub fn wold_coefficients_graded(pair: &GradedPair, wd: &WanderingData, h: &GradedVector, tol: &TolerancePolicy) -> Result<GradedVector> {
    let top = pair.top_degree().unwrap_or(0);
    let flat = h.to_flat(top)?;
    if flat.len() != pair.dim() {
        return Err(Error::Dimension(format!(
            "vector over {} coordinates, pair has {}",
            flat.len(),
            pair.dim()
        )));
    }
    let w = Subspace::from_orthonormal(embed_full(&wd.embedding, pair.dim()));
    let etas = wold_coefficients(pair, Which::Product, &w, &flat, tol)?;
    let coeffs = etas.iter().map(|eta| w.basis().adjoint() * eta).collect();
    GradedVector::new(wd.w.dim(), coeffs)
}

fn embed_full(e: &CMatrix, n: usize) -> CMatrix {
    let mut big = zeros(n, e.ncols());
    big.view_mut((0, 0), e.shape()).copy_from(e);
    big
}

/// Read `(U, P)` off an abstract pair whose product is pure, in the canonical
/// basis of `W`.
pub fn extract_bcl(pair: &GradedPair, tol: &TolerancePolicy) -> Result<BCLData> {
    if !pair.purity().product.is_pure() {
        return Err(Error::NotPure("the product V1 V2 is not pure on this model".into()));
    }
    let wd = wandering_data_of_graded(pair, tol)?;
    Ok(BCLData::new_unchecked(wd.u.clone(), wd.p()))
}
