//! Defect operator `C = I − V1V1* − V2V2* + V1V2V1*V2*`, fringe operators,
//! and the five-way characterization of `C ≥ 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::json;
use crate::linalg::{
    c, hermitian_spectrum, identity, op_norm, operator_class, submatrix, CMatrix, TolerancePolicy,
};
use crate::model::{GradedPair, GradedWandering, Which};

/// `C` on every coordinate of the model.
pub fn defect_full(pair: &GradedPair) -> CMatrix {
    let t1 = pair.v1();
    let t2 = pair.v2();
    let n = pair.dim();
    let t = t1 * t2;
    let raw = identity(n) - t1 * t1.adjoint() - t2 * t2.adjoint() + &t * t.adjoint();
    (&raw + raw.adjoint()) * c(0.5, 0.0)
}

/// `C` restricted to interior coordinates, where each of its four terms is
/// computed without truncation loss.
pub fn defect_direct(pair: &GradedPair) -> Result<CMatrix> {
    if pair.interior_indices().is_empty() {
        return Err(Error::Precondition("no interior coordinates at this truncation".into()));
    }
    Ok(pair.interior_block(&defect_full(pair)))
}

#[derive(Clone, Debug)]
pub struct GeometricDefect {
    /// `P_{W1} − P_{V2W1}` on the interior.
    pub first: CMatrix,
    /// `P_{W2} − P_{V1W2}` on the interior.
    pub second: CMatrix,
    pub gap: f64,
}

/// Both projector-difference expressions of `C`; they must agree within
/// `eq_tol`.
pub fn defect_geometric(pair: &GradedPair, wd: &GradedWandering, tol: &TolerancePolicy) -> Result<GeometricDefect> {
    let first = pair.interior_block(&(wd.w1.projector() - wd.v2w1.projector()));
    let second = pair.interior_block(&(wd.w2.projector() - wd.v1w2.projector()));
    let gap = op_norm(&(&first - &second));
    if gap > tol.eq_tol {
        return Err(Error::Residual {
            what: "geometric defect routes",
            residual: gap,
            tol: tol.eq_tol,
        });
    }
    Ok(GeometricDefect { first, second, gap })
}

/// `F_j = P_{W_i} V_j|_{W_i}` with domain the interior part of `W_i`, in the
/// canonical bases. Square whenever `W_i` is finite and interior.
pub fn fringe_operator(pair: &GradedPair, wd: &GradedWandering, j: Which) -> Result<CMatrix> {
    let (wi, wi_int) = match j {
        Which::Second => (&wd.w1, &wd.w1_int),
        Which::First => (&wd.w2, &wd.w2_int),
        Which::Product => return Err(Error::Precondition("fringe operators are defined for V1 and V2".into())),
    };
    let t = pair.op(j);
    Ok(wi.basis().adjoint() * t * wi_int.basis())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Verdicts {
    pub nonneg: bool,
    #[serde(rename = "V2W1_in_W1")]
    pub v2w1_in_w1: bool,
    pub doubly_commuting: bool,
    pub projection: bool,
    pub fringe2_isometric: bool,
}

impl Verdicts {
    pub fn all_equal(&self) -> bool {
        let v = [
            self.nonneg,
            self.v2w1_in_w1,
            self.doubly_commuting,
            self.projection,
            self.fringe2_isometric,
        ];
        v.iter().all(|&x| x == v[0])
    }

    pub fn common(&self) -> Option<bool> {
        self.all_equal().then_some(self.nonneg)
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct VerdictResiduals {
    /// Smallest eigenvalue of `C` (zero for an empty interior).
    pub min_eigenvalue: f64,
    /// `‖P⊥_{W1} V2|_{W1}‖`
    pub v2w1_outside_w1: f64,
    /// `‖V1*V2 − V2V1*‖` on interior inputs.
    pub commutator: f64,
    /// `max(‖C² − C‖, ‖C − C*‖)`
    pub projection_defect: f64,
    /// `‖F2*F2 − I‖`
    pub fringe2_isometry_defect: f64,
    /// `‖defect_direct − defect_geometric‖`
    pub two_route_gap: f64,
    /// `‖(I − F2*F2) − (V2|_{W1})* P_{V1W2} V2|_{W1}‖`
    pub fringe_identity: f64,
    /// `‖C − P_{W1}P_{W2}‖`, meaningful on doubly commuting pairs.
    pub product_identity: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DefectReport {
    #[serde(with = "json::matrix")]
    pub defect_matrix: CMatrix,
    pub spectrum: Vec<f64>,
    pub verdicts: Verdicts,
    pub residuals: VerdictResiduals,
    #[serde(with = "json::matrix")]
    pub fringe1: CMatrix,
    #[serde(with = "json::matrix")]
    pub fringe2: CMatrix,
    pub consistency: bool,
    pub defect_norm: f64,
    pub interior_dim: usize,
}

impl DefectReport {
    pub fn max_eigenvalue(&self) -> f64 {
        self.spectrum.last().copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum.first().copied().unwrap_or(0.0)
    }

    pub fn ensure_consistent(&self) -> Result<()> {
        if self.consistency {
            return Ok(());
        }
        Err(Error::Inconsistent(format!(
            "verdicts {:?} with residuals {:?}",
            self.verdicts, self.residuals
        )))
    }
}

/// Evaluates the five equivalent conditions: `C ≥ 0`, `V2W1 ⊆ W1`,
/// `V1*V2 = V2V1*`, `C` a projection, `F2` an isometry. All decisions use
/// `approx_tol`; `consistency` records whether they agree.
pub fn five_way_verdict(pair: &GradedPair, tol: &TolerancePolicy) -> Result<DefectReport> {
    let wd = pair.wandering(tol);
    let direct = defect_direct(pair)?;
    let geometric = defect_geometric(pair, &wd, tol)?;
    let two_route_gap = op_norm(&(&direct - &geometric.first));
    let spectrum = hermitian_spectrum(&direct, tol)?;
    let band = tol.approx_tol;

    let t1 = pair.v1();
    let t2 = pair.v2();
    let b1 = wd.w1_int.basis();
    let v2_on_w1 = t2 * b1;
    let perp = identity(pair.dim()) - wd.w1.projector();
    let v2w1_outside_w1 = op_norm(&(&perp * &v2_on_w1));

    let interior = pair.interior_indices();
    let all: Vec<usize> = (0..pair.dim()).collect();
    let comm = t1.adjoint() * t2 - t2 * t1.adjoint();
    let commutator = op_norm(&submatrix(&comm, &all, &interior));

    let projection_defect = op_norm(&(&direct * &direct - &direct)).max(op_norm(&(&direct - direct.adjoint())));
    let is_projection = operator_class(&direct, band).projection;

    let fringe2 = fringe_operator(pair, &wd, Which::Second)?;
    let fringe1 = fringe_operator(pair, &wd, Which::First)?;
    let k = fringe2.ncols();
    let gram = fringe2.adjoint() * &fringe2;
    let fringe2_isometry_defect = op_norm(&(&gram - identity(k)));
    let lemma = v2_on_w1.adjoint() * wd.v1w2.projector() * &v2_on_w1;
    let fringe_identity = op_norm(&(identity(k) - &gram - lemma));

    let product = pair.interior_block(&(wd.w1.projector() * wd.w2.projector()));
    let product_identity = op_norm(&(&direct - product));

    let min_eigenvalue = spectrum.first().copied().unwrap_or(0.0);
    let verdicts = Verdicts {
        nonneg: min_eigenvalue >= -band,
        v2w1_in_w1: v2w1_outside_w1 <= band,
        doubly_commuting: commutator <= band,
        projection: is_projection,
        fringe2_isometric: fringe2_isometry_defect <= band,
    };
    Ok(DefectReport {
        defect_norm: op_norm(&direct),
        interior_dim: direct.nrows(),
        defect_matrix: direct,
        spectrum,
        consistency: verdicts.all_equal(),
        verdicts,
        residuals: VerdictResiduals {
            min_eigenvalue,
            v2w1_outside_w1,
            commutator,
            projection_defect,
            fringe2_isometry_defect,
            two_route_gap,
            fringe_identity,
            product_identity,
        },
        fringe1,
        fringe2,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct NegativityContext {
    pub some_vi_pure: bool,
    pub some_dim_wj_finite: bool,
}

impl NegativityContext {
    pub fn of_pair(pair: &GradedPair, tol: &TolerancePolicy) -> Self {
        let p = pair.purity();
        Self {
            some_vi_pure: p.v1.is_pure() || p.v2.is_pure(),
            some_dim_wj_finite: pair.finite_wandering(Which::First, tol).is_ok()
                || pair.finite_wandering(Which::Second, tol).is_ok(),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct NegativityVerdict {
    /// At least one hypothesis flag holds.
    pub applicable: bool,
    /// Largest eigenvalue within the zero band, i.e. `C ≤ 0`.
    pub nonpositive: bool,
    pub max_eigenvalue: f64,
    pub defect_norm: f64,
    /// `C ≤ 0` forces `C = 0`.
    pub pass: bool,
    pub context: NegativityContext,
}

/// Under either hypothesis, `C ≤ 0` only when `C = 0`.
pub fn negativity_check(report: &DefectReport, context: NegativityContext, tol: &TolerancePolicy) -> NegativityVerdict {
    let applicable = context.some_vi_pure || context.some_dim_wj_finite;
    let max_eigenvalue = report.max_eigenvalue();
    let nonpositive = max_eigenvalue <= tol.approx_tol;
    let pass = !applicable || !nonpositive || report.defect_norm <= tol.approx_tol;
    NegativityVerdict {
        applicable,
        nonpositive,
        max_eigenvalue,
        defect_norm: report.defect_norm,
        pass,
        context,
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ContainmentReport {
    pub shift_dim: usize,
    pub unitary_dim: usize,
    /// Off-diagonal blocks of `V1`, `V2` between the shift and unitary parts.
    pub reducing_residual: f64,
    /// `‖U_j*U_j − I‖` for the unitary blocks.
    pub unitary_residual: f64,
    /// Unitary-part component of `W1` and `W2`: zero iff `H_s(V_j) ⊆ H_s(V)`.
    pub wandering_unitary_component: f64,
    /// `H_s(V_j) ⊆ H_s(V)` for both `j`.
    pub shift_parts_nested: bool,
    /// `H_u(V) ⊆ H_u(V_j)` for both `j`.
    pub unitary_parts_nested: bool,
}

/// Checks the nesting of Wold parts for a pair given as a graded shift part
/// plus an explicit unitary part.
pub fn wold_part_containments(pair: &GradedPair, tol: &TolerancePolicy) -> ContainmentReport {
    let s = pair.shift_indices();
    let u = pair.unitary_indices();
    let mut reducing: f64 = 0.0;
    let mut unitary: f64 = 0.0;
    for t in [pair.v1(), pair.v2()] {
        reducing = reducing
            .max(op_norm(&submatrix(t, &s, &u)))
            .max(op_norm(&submatrix(t, &u, &s)));
        let block = submatrix(t, &u, &u);
        unitary = unitary.max(op_norm(&(block.adjoint() * &block - identity(u.len()))));
    }
    let wd = pair.wandering(tol);
    let mut component: f64 = 0.0;
    for w in [&wd.w1, &wd.w2] {
        let all: Vec<usize> = (0..w.dim()).collect();
        component = component.max(op_norm(&submatrix(w.basis(), &u, &all)));
    }
    ContainmentReport {
        shift_dim: s.len(),
        unitary_dim: u.len(),
        reducing_residual: reducing,
        unitary_residual: unitary,
        wandering_unitary_component: component,
        shift_parts_nested: reducing <= tol.eq_tol && component <= tol.eq_tol,
        unitary_parts_nested: reducing <= tol.eq_tol && unitary <= tol.eq_tol,
    }
}
