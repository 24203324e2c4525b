//! Finite graded models of commuting isometry pairs.
//!
//! A [`GradedPair`] holds the compressions of `V1`, `V2` to a finite set of
//! coordinates. Shift-part coordinates carry a grade (polynomial degree) and
//! the top degree of their truncation; unitary-part coordinates are exact.
//! Adjoints are exact on every coordinate for the models built here, forward
//! maps are exact on coordinates below the top degree, and anything derived
//! from wandering subspaces is trusted only on interior coordinates, those
//! with `grade + guard <= top`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hardy::{symbol_is_inner, symbol_product, PolySymbol};
use crate::linalg::{
    check_finite, identity, kernel, kernel_within, op_norm, spectral_radius, submatrix, zeros,
    CMatrix, Subspace, TolerancePolicy,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "basis", rename_all = "kebab-case")]
pub enum Purity {
    /// Measured: `M_Φ` with `Φ` inner is pure iff the spectral radius of
    /// `Φ(0)` is below one.
    SpectralRadius { pure: bool, radius: f64 },
    /// Asserted by construction and recorded as such.
    Declared { pure: bool },
}

impl Purity {
    pub fn is_pure(&self) -> bool {
        match *self {
            Purity::SpectralRadius { pure, .. } | Purity::Declared { pure } => pure,
        }
    }

    fn of_symbol(phi: &PolySymbol, tol: &TolerancePolicy) -> Purity {
        let radius = spectral_radius(&phi.coeff(0));
        Purity::SpectralRadius {
            pure: radius < 1.0 - tol.approx_tol,
            radius,
        }
    }

    fn and(self, other: Purity) -> Purity {
        Purity::Declared {
            pure: self.is_pure() && other.is_pure(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairPurity {
    pub v1: Purity,
    pub v2: Purity,
    pub product: Purity,
}

impl PairPurity {
    pub fn of(&self, which: Which) -> Purity {
        match which {
            Which::First => self.v1,
            Which::Second => self.v2,
            Which::Product => self.product,
        }
    }
}

/// Selects `V1`, `V2` or the product `V = V1 V2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Which {
    First,
    Second,
    Product,
}

impl Which {
    /// The other factor of the pair; the product maps to itself.
    pub fn other(self) -> Which {
        match self {
            Which::First => Which::Second,
            Which::Second => Which::First,
            Which::Product => Which::Product,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Which::First => 1,
            Which::Second => 2,
            Which::Product => 0,
        }
    }

    pub fn from_index(j: usize) -> Result<Which> {
        match j {
            1 => Ok(Which::First),
            2 => Ok(Which::Second),
            _ => Err(Error::Precondition(format!("isometry index must be 1 or 2, got {j}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Coord {
    grade: usize,
    /// `None` for unitary-part coordinates.
    top: Option<usize>,
    guard: usize,
}

impl Coord {
    fn interior(&self) -> bool {
        self.top.is_none_or(|t| self.grade + self.guard <= t)
    }

    fn forward_exact(&self) -> bool {
        self.top.is_none_or(|t| self.grade < t)
    }
}

#[derive(Clone, Debug)]
pub struct GradedPair {
    v1: CMatrix,
    v2: CMatrix,
    coords: Vec<Coord>,
    purity: PairPurity,
}

/// Block-Toeplitz compression of `M_Φ` to degrees `0..=n`.
pub fn compress_symbol(phi: &PolySymbol, n: usize) -> CMatrix {
    let d = phi.dim();
    let mut out = zeros((n + 1) * d, (n + 1) * d);
    for (k, a) in phi.matrices().iter().enumerate() {
        for m in 0..=n {
            if m + k > n {
                break;
            }
            out.view_mut(((m + k) * d, m * d), (d, d)).copy_from(a);
        }
    }
    out
}

impl GradedPair {
    /// `(M_Φ1, M_Φ2)` on `H²_{C^d}` truncated at degree `n`.
    ///
    /// The guard is the largest symbol degree, so interior inputs stay
    /// within the model under one forward application.
    pub fn from_symbols(phi1: &PolySymbol, phi2: &PolySymbol, n: usize, tol: &TolerancePolicy) -> Result<Self> {
        if phi1.dim() != phi2.dim() {
            return Err(Error::Dimension(format!("symbols of size {} and {}", phi1.dim(), phi2.dim())));
        }
        let guard = phi1.degree().max(phi2.degree()).max(1);
        if n < guard + 1 {
            return Err(Error::Precondition(format!(
                "truncation degree {n} too small for symbols of degree {guard} (need at least {})",
                guard + 1
            )));
        }
        // inputs are validated at approx_tol; hand-written matrices carry a few
        // digits only
        let loose = TolerancePolicy {
            eq_tol: tol.approx_tol,
            approx_tol: tol.approx_tol,
        };
        for (phi, name) in [(phi1, "first"), (phi2, "second")] {
            if !symbol_is_inner(phi, &loose) {
                return Err(Error::InvalidOperator(format!("{name} symbol is not inner")));
            }
        }
        let p12 = symbol_product(phi1, phi2)?;
        let p21 = symbol_product(phi2, phi1)?;
        let residual = p12.coeff_distance(&p21);
        if residual > tol.approx_tol {
            return Err(Error::Residual {
                what: "symbol commutator",
                residual,
                tol: tol.approx_tol,
            });
        }
        let d = phi1.dim();
        let coords = (0..=n)
            .flat_map(|m| {
                (0..d).map(move |_| Coord {
                    grade: m,
                    top: Some(n),
                    guard,
                })
            })
            .collect();
        Ok(Self {
            v1: compress_symbol(phi1, n),
            v2: compress_symbol(phi2, n),
            coords,
            purity: PairPurity {
                v1: Purity::of_symbol(phi1, tol),
                v2: Purity::of_symbol(phi2, tol),
                product: Purity::of_symbol(&p12, tol),
            },
        })
    }

    /// A commuting pair of unitary matrices, exact on every coordinate.
    pub fn unitary_pair(u1: &CMatrix, u2: &CMatrix, tol: &TolerancePolicy) -> Result<Self> {
        let n = u1.nrows();
        for (u, name) in [(u1, "first"), (u2, "second")] {
            check_finite(u, "unitary matrix")?;
            if u.nrows() != n || u.ncols() != n {
                return Err(Error::Dimension(format!("{name} unitary is {}x{}, expected {n}x{n}", u.nrows(), u.ncols())));
            }
            let res = op_norm(&(u.adjoint() * u - identity(n))).max(op_norm(&(u * u.adjoint() - identity(n))));
            if res > tol.approx_tol {
                return Err(Error::InvalidOperator(format!("{name} matrix is not unitary (residual {res:.3e})")));
            }
        }
        let res = op_norm(&(u1 * u2 - u2 * u1));
        if res > tol.approx_tol {
            return Err(Error::Residual {
                what: "unitary commutator",
                residual: res,
                tol: tol.approx_tol,
            });
        }
        let not_pure = Purity::Declared { pure: n == 0 };
        Ok(Self {
            v1: u1.clone(),
            v2: u2.clone(),
            coords: vec![
                Coord {
                    grade: 0,
                    top: None,
                    guard: 0
                };
                n
            ],
            purity: PairPurity {
                v1: not_pure,
                v2: not_pure,
                product: not_pure,
            },
        })
    }

    /// Assemble a pair from compressions with per-coordinate grades.
    pub(crate) fn from_graded_parts(
        v1: CMatrix,
        v2: CMatrix,
        grades: &[usize],
        top: usize,
        guard: usize,
        purity: PairPurity,
    ) -> Self {
        let coords = grades
            .iter()
            .map(|&grade| Coord {
                grade,
                top: Some(top),
                guard,
            })
            .collect();
        Self { v1, v2, coords, purity }
    }

    /// Orthogonal direct sum; each part keeps its own truncation data.
    pub fn direct_sum(parts: &[GradedPair]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Precondition("direct sum of no parts".into()));
        }
        let n: usize = parts.iter().map(|p| p.dim()).sum();
        let mut v1 = zeros(n, n);
        let mut v2 = zeros(n, n);
        let mut coords = Vec::with_capacity(n);
        let mut off = 0;
        for p in parts {
            let k = p.dim();
            v1.view_mut((off, off), (k, k)).copy_from(&p.v1);
            v2.view_mut((off, off), (k, k)).copy_from(&p.v2);
            coords.extend_from_slice(&p.coords);
            off += k;
        }
        let fold = |f: fn(&PairPurity) -> Purity| {
            parts
                .iter()
                .map(|p| f(&p.purity))
                .reduce(Purity::and)
                .expect("non-empty")
        };
        let purity = if parts.len() == 1 {
            parts[0].purity
        } else {
            PairPurity {
                v1: fold(|p| p.v1),
                v2: fold(|p| p.v2),
                product: fold(|p| p.product),
            }
        };
        Ok(Self { v1, v2, coords, purity })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn v1(&self) -> &CMatrix {
        &self.v1
    }

    pub fn v2(&self) -> &CMatrix {
        &self.v2
    }

    pub fn op(&self, which: Which) -> CMatrix {
        match which {
            Which::First => self.v1.clone(),
            Which::Second => self.v2.clone(),
            Which::Product => &self.v1 * &self.v2,
        }
    }

    pub fn purity(&self) -> &PairPurity {
        &self.purity
    }

    pub fn grade(&self, i: usize) -> usize {
        self.coords[i].grade
    }

    /// Largest top degree among shift-part coordinates.
    pub fn top_degree(&self) -> Option<usize> {
        self.coords.iter().filter_map(|c| c.top).max()
    }

    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.coords[i].interior()).collect()
    }

    pub fn forward_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.coords[i].forward_exact()).collect()
    }

    pub fn unitary_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.coords[i].top.is_none()).collect()
    }

    pub fn shift_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.coords[i].top.is_some()).collect()
    }

    pub fn interior(&self) -> Subspace {
        Subspace::coordinate(self.dim(), &self.interior_indices())
    }

    pub fn forward_band(&self) -> Subspace {
        Subspace::coordinate(self.dim(), &self.forward_indices())
    }

    pub fn has_unitary_part(&self) -> bool {
        self.coords.iter().any(|c| c.top.is_none())
    }

    /// Restrict a square operator to interior rows and columns.
    pub fn interior_block(&self, m: &CMatrix) -> CMatrix {
        let idx = self.interior_indices();
        submatrix(m, &idx, &idx)
    }

    /// Largest grade carried by any vector of `s`, ignoring entries below
    /// `eq_tol`.
    pub fn max_grade_of(&self, s: &Subspace, tol: &TolerancePolicy) -> usize {
        let b = s.basis();
        (0..self.dim())
            .filter(|&i| b.row(i).norm() > tol.eq_tol)
            .map(|i| self.grade(i))
            .max()
            .unwrap_or(0)
    }

    /// Whether `s` lies in the interior coordinates (so it is seen entirely
    /// by the truncation).
    pub fn is_interior(&self, s: &Subspace, tol: &TolerancePolicy) -> bool {
        self.interior().containment_residual(s) <= tol.eq_tol
    }

    /// Wandering subspaces of `V1`, `V2` and `V`, computed as kernels of the
    /// exact adjoints, plus their forward images.
    pub fn wandering(&self, tol: &TolerancePolicy) -> GradedWandering {
        let t1 = &self.v1;
        let t2 = &self.v2;
        let t = t1 * t2;
        let w = kernel(&t.adjoint(), tol);
        let w1 = kernel(&t1.adjoint(), tol);
        let w2 = kernel(&t2.adjoint(), tol);
        let fwd = self.forward_band();
        let w1_fwd = kernel_within(&t1.adjoint(), &fwd, tol);
        let w2_fwd = kernel_within(&t2.adjoint(), &fwd, tol);
        let v2w1 = w1_fwd.image(t2, tol);
        let v1w2 = w2_fwd.image(t1, tol);
        let interior = self.interior();
        let w1_int = kernel_within(&t1.adjoint(), &interior, tol);
        let w2_int = kernel_within(&t2.adjoint(), &interior, tol);
        GradedWandering {
            w,
            w1,
            w2,
            w1_fwd,
            w2_fwd,
            w1_int,
            w2_int,
            v1w2,
            v2w1,
        }
    }

    /// Wandering subspace of the chosen isometry, required to lie in the
    /// interior band; one reaching the edge is not finite at this truncation.
    pub fn finite_wandering(&self, which: Which, tol: &TolerancePolicy) -> Result<Subspace> {
        let t = self.op(which);
        let w = kernel(&t.adjoint(), tol);
        if !self.is_interior(&w, tol) {
            return Err(Error::Precondition(format!(
                "wandering subspace of {} reaches the truncation edge (grade {}); it is not finite at this truncation",
                which_name(which),
                self.max_grade_of(&w, tol)
            )));
        }
        Ok(w)
    }
}

pub(crate) fn which_name(which: Which) -> &'static str {
    match which {
        Which::First => "V1",
        Which::Second => "V2",
        Which::Product => "V = V1 V2",
    }
}

/// Wandering subspaces of a graded pair, all in ambient coordinates.
///
/// `w1_fwd` is `W1` restricted to coordinates where `V2` is exact, so that
/// `v2w1 = V2 w1_fwd` is computed without truncation; `w1_int` is `W1` on the
/// interior band. Dually for the `2` variants.
#[derive(Clone, Debug)]
pub struct GradedWandering {
    pub w: Subspace,
    pub w1: Subspace,
    pub w2: Subspace,
    pub w1_fwd: Subspace,
    pub w2_fwd: Subspace,
    pub w1_int: Subspace,
    pub w2_int: Subspace,
    pub v1w2: Subspace,
    pub v2w1: Subspace,
}

impl GradedWandering {
    pub fn of(&self, which: Which) -> &Subspace {
        match which {
            Which::First => &self.w1,
            Which::Second => &self.w2,
            Which::Product => &self.w,
        }
    }

    pub fn interior_of(&self, which: Which) -> Option<&Subspace> {
        match which {
            Which::First => Some(&self.w1_int),
            Which::Second => Some(&self.w2_int),
            Which::Product => None,
        }
    }
}
