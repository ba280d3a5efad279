//! Antilinear operators on C^n stored by their conjugation-action matrix.
//!
//! An [`AntilinearOp`] with matrix `K` acts as `x ↦ K·conj(x)`. The rules
//! used throughout:
//!
//! ```text
//! (K1 ∘ K2)(x)  = K1 conj(K2) x          antilinear ∘ antilinear is linear
//! (L ∘ K)(x)    = (L K) conj(x)          linear ∘ antilinear
//! (K ∘ L)(x)    = (K conj(L)) conj(x)    antilinear ∘ linear
//! adjoint: ⟨x, K y⟩ = ⟨y, K* x⟩  ⇒  K* = Kᵀ
//! ```

use crate::error::{Error, Result};

use super::decomp::hermitian_eig;
use super::matrix::{CMatrix, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct AntilinearOp {
    k: CMatrix,
}

impl AntilinearOp {
    pub fn new(k: CMatrix) -> Result<Self> {
        k.check_square()?;
        k.check_finite()?;
        Ok(Self { k })
    }

    /// Entrywise complex conjugation on C^n.
    pub fn conjugation(n: usize) -> Self {
        Self {
            k: CMatrix::identity(n),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.k
    }

    pub fn dim(&self) -> usize {
        self.k.rows()
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let cx: Vec<C64> = x.iter().map(|z| z.conj()).collect();
        self.k.mul_vec(&cx)
    }

    /// `self ∘ other`, a linear map.
    pub fn compose(&self, other: &AntilinearOp) -> CMatrix {
        self.k.matmul(&other.k.conj())
    }

    /// `self ∘ self`
    pub fn square(&self) -> CMatrix {
        self.compose(self)
    }

    /// `linear ∘ self`
    pub fn after_linear(&self, linear: &CMatrix) -> AntilinearOp {
        AntilinearOp {
            k: linear.matmul(&self.k),
        }
    }

    /// `self ∘ linear`
    pub fn before_linear(&self, linear: &CMatrix) -> AntilinearOp {
        AntilinearOp {
            k: self.k.matmul(&linear.conj()),
        }
    }

    pub fn adjoint(&self) -> AntilinearOp {
        AntilinearOp {
            k: self.k.transpose(),
        }
    }

    /// Deviation of `self* ∘ self` from the identity.
    pub fn antiunitarity_defect(&self) -> f64 {
        let n = self.dim();
        self.adjoint()
            .compose(self)
            .max_abs_diff(&CMatrix::identity(n))
    }

    /// Conjugates a linear operator: `x ↦ self(X(self(x)))`, which is linear
    /// with matrix `K conj(X) conj(K)`.
    pub fn sandwich(&self, x: &CMatrix) -> CMatrix {
        self.k.matmul(&x.conj()).matmul(&self.k.conj())
    }
}

/// Polar decomposition `S = J ∘ Δ^{1/2}` of an invertible antilinear map.
///
/// `Δ = S* S` has matrix `Kᵀ conj(K)`, and `J = S Δ^{-1/2}` has
/// conjugation-action matrix `K conj(Δ^{-1/2})`.
pub fn polar_antilinear(s: &AntilinearOp) -> Result<(AntilinearOp, CMatrix)> {
    let k = s.matrix();
    let delta = k.transpose().matmul(&k.conj()).hermitian_part();
    let eig = hermitian_eig(&delta)?;
    let scale = eig.max().max(f64::MIN_POSITIVE);
    if eig.min() <= 1e-14 * scale {
        return Err(Error::Singular(format!(
            "antilinear operator is not invertible (min eigenvalue of S*S {:.3e})",
            eig.min()
        )));
    }
    let delta_inv_sqrt = eig.apply_fn(|x| 1.0 / x.sqrt());
    let j = AntilinearOp {
        k: k.matmul(&delta_inv_sqrt.conj()),
    };
    Ok((j, delta))
}

/// `Δ^{1/2}` through the eigendecomposition.
pub fn positive_sqrt(delta: &CMatrix) -> Result<CMatrix> {
    Ok(hermitian_eig(delta)?.apply_fn(|x| x.max(0.0).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::matrix::{norm, vec_sub};
    use crate::numerics::random::random_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn polar_residual(s: &AntilinearOp, j: &AntilinearOp, delta: &CMatrix) -> f64 {
        let root = positive_sqrt(delta).unwrap();
        let n = s.dim();
        (0..n)
            .map(|i| {
                let e: Vec<C64> = (0..n)
                    .map(|k| if k == i { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
                    .collect();
                norm(&vec_sub(&s.apply(&e), &j.apply(&root.mul_vec(&e))))
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn composition_rules_match_pointwise_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = AntilinearOp::new(random_matrix(3, 3, &mut rng)).unwrap();
        let b = AntilinearOp::new(random_matrix(3, 3, &mut rng)).unwrap();
        let l = random_matrix(3, 3, &mut rng);
        let x = crate::numerics::random::random_vector(3, &mut rng);
        let lhs = a.apply(&b.apply(&x));
        assert!(norm(&vec_sub(&lhs, &a.compose(&b).mul_vec(&x))) < 1e-12);
        let lhs = l.mul_vec(&a.apply(&x));
        assert!(norm(&vec_sub(&lhs, &a.after_linear(&l).apply(&x))) < 1e-12);
        let lhs = a.apply(&l.mul_vec(&x));
        assert!(norm(&vec_sub(&lhs, &a.before_linear(&l).apply(&x))) < 1e-12);
    }

    #[test]
    fn adjoint_satisfies_defining_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = AntilinearOp::new(random_matrix(4, 4, &mut rng)).unwrap();
        let x = crate::numerics::random::random_vector(4, &mut rng);
        let y = crate::numerics::random::random_vector(4, &mut rng);
        // ⟨x, A y⟩ = ⟨y, A* x⟩
        let lhs = crate::numerics::matrix::dot(&x, &a.apply(&y));
        let rhs = crate::numerics::matrix::dot(&y, &a.adjoint().apply(&x));
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn identity_k_is_plain_conjugation() {
        let s = AntilinearOp::conjugation(3);
        let (j, delta) = polar_antilinear(&s).unwrap();
        assert!(j.matrix().max_abs_diff(&CMatrix::identity(3)) < 1e-14);
        assert!(delta.max_abs_diff(&CMatrix::identity(3)) < 1e-14);
    }

    #[test]
    fn weighted_swap_has_delta_two_and_half() {
        let r2 = 2f64.sqrt();
        let k = CMatrix::from_real(2, 2, &[0.0, r2, 1.0 / r2, 0.0]).unwrap();
        let s = AntilinearOp::new(k).unwrap();
        assert!(s.square().max_abs_diff(&CMatrix::identity(2)) < 1e-14);
        let (j, delta) = polar_antilinear(&s).unwrap();
        let eig = hermitian_eig(&delta).unwrap();
        assert!((eig.values[0] - 0.5).abs() < 1e-12);
        assert!((eig.values[1] - 2.0).abs() < 1e-12);
        assert!(j.square().max_abs_diff(&CMatrix::identity(2)) < 1e-9);
        assert!(j.antiunitarity_defect() < 1e-12);
        assert!(polar_residual(&s, &j, &delta) < 1e-9);
    }

    #[test]
    fn random_invertible_polar() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = AntilinearOp::new(random_matrix(5, 5, &mut rng)).unwrap();
        let (j, delta) = polar_antilinear(&s).unwrap();
        assert!(j.antiunitarity_defect() < 1e-9);
        assert!(hermitian_eig(&delta).unwrap().min() > 0.0);
        assert!(polar_residual(&s, &j, &delta) < 1e-9);
    }

    #[test]
    fn singular_rejected() {
        let s = AntilinearOp::new(CMatrix::diag_real(&[1.0, 0.0])).unwrap();
        assert!(matches!(polar_antilinear(&s), Err(Error::Singular(_))));
    }
}
