//! Seeded random matrices for tests and generated workloads.

use rand::Rng;
use rand_distr::StandardNormal;

use super::decomp::orthonormalize;
use super::matrix::{CMatrix, C64};

/// Standard complex Gaussian, `E|z|² = 1`.
fn gaussian_pair<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    (0..n).map(|_| gaussian_pair(rng)).collect()
}

pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian_pair(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    random_matrix(n, n, rng).hermitian_part()
}

/// Haar-like unitary from Gram-Schmidt on a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    loop {
        let cols = random_matrix(n, n, rng).columns();
        let q = orthonormalize(&cols, 1e-6).expect("equal lengths");
        if q.len() == n {
            return CMatrix::from_columns(n, &q).expect("square");
        }
    }
}

/// Full-rank density matrix `B B† / Tr(B B†)` plus a small identity shift.
pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let b = random_matrix(n, n, rng);
    let m = &b.matmul(&b.adjoint()) + &CMatrix::identity(n).scale_real(0.05);
    let tr = m.trace().re;
    m.scale_real(1.0 / tr)
}
