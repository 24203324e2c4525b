//! Seed-deterministic random instances.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bcl::BCLData;
use crate::linalg::{c, identity, zeros, CMatrix, CVector, Subspace, C64};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) / c(std::f64::consts::SQRT_2, 0.0)
    })
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases
/// of `diag(R)` moved into `Q`.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    if n == 0 {
        return zeros(0, 0);
    }
    let qr = gaussian_matrix(n, n, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= ph;
    }
    q
}

/// Orthogonal projection of the given rank onto a Haar-random subspace.
pub fn random_projection<R: Rng>(n: usize, rank: usize, rng: &mut R) -> CMatrix {
    let q = random_unitary(n, rng);
    let b = q.columns(0, rank.min(n));
    &b * b.adjoint()
}

fn pick_rank<R: Rng>(dim: usize, rank: Option<usize>, rng: &mut R) -> usize {
    rank.unwrap_or_else(|| rng.random_range(0..=dim)).min(dim)
}

/// Haar unitary `U` and a random projection `P`; the rank is drawn
/// uniformly from `0..=dim` when not given.
pub fn random_bcl<R: Rng>(dim: usize, rank: Option<usize>, rng: &mut R) -> BCLData {
    let r = pick_rank(dim, rank, rng);
    let u = random_unitary(dim, rng);
    let p = random_projection(dim, r, rng);
    BCLData::new_unchecked(u, p)
}

/// An instance with `UP = PU`: `U` is block diagonal on `ran P ⊕ ker P`.
pub fn random_doubly_commuting_bcl<R: Rng>(dim: usize, rank: Option<usize>, rng: &mut R) -> BCLData {
    let r = pick_rank(dim, rank, rng);
    let q = random_unitary(dim, rng);
    let mut block = zeros(dim, dim);
    block.view_mut((0, 0), (r, r)).copy_from(&random_unitary(r, rng));
    block
        .view_mut((r, r), (dim - r, dim - r))
        .copy_from(&random_unitary(dim - r, rng));
    let mut d = zeros(dim, dim);
    for i in 0..r {
        d[(i, i)] = c(1.0, 0.0);
    }
    let u = &q * block * q.adjoint();
    let p = &q * d * q.adjoint();
    BCLData::new_unchecked(u, p)
}

/// A random phase `e^{iθ}`.
/// Gaussian combination of the basis of `s`.
pub fn random_vector_in<R: Rng>(s: &Subspace, rng: &mut R) -> CVector {
    let g = gaussian_matrix(s.dim(), 1, rng);
    (s.basis() * g).column(0).into_owned()
}

pub fn random_phase<R: Rng>(rng: &mut R) -> C64 {
    C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
}

/// Random diagonal unitary pair in a random basis: a commuting unitary pair.
pub fn random_commuting_unitaries<R: Rng>(n: usize, rng: &mut R) -> (CMatrix, CMatrix) {
    let q = random_unitary(n, rng);
    let mut d1 = identity(n);
    let mut d2 = identity(n);
    for i in 0..n {
        d1[(i, i)] = random_phase(rng);
        d2[(i, i)] = random_phase(rng);
    }
    (&q * d1 * q.adjoint(), &q * d2 * q.adjoint())
}
