//! Concrete unital *-subalgebras of B(C^d).
//!
//! An algebra is stored as a basis that is orthonormal for the trace inner
//! product `⟨x, y⟩ = Tr(x† y)`, always starting with `1/√d`. Membership is
//! decided by projection residuals, and all coordinate maps are taken with
//! respect to this basis.

use crate::error::{dim_mismatch, Error, Result};
use rand::Rng;

use crate::numerics::random::random_unitary;
use crate::numerics::{dot, norm, null_space, CMatrix, C64, RANK_TOL, ZERO};
use crate::report::ValidationReport;
use crate::system::GroupAction;

/// Candidates whose unit-normalized residual is below this are dependent.
const SPAN_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixAlgebra {
    d: usize,
    basis: Vec<CMatrix>,
}

fn to_matrix(d: usize, v: Vec<C64>) -> CMatrix {
    CMatrix::from_vec(d, d, v).expect("length d*d")
}

fn unit_vec(m: &CMatrix) -> Option<Vec<C64>> {
    let n = m.frobenius_norm();
    (n > 0.0).then(|| m.data().iter().map(|z| z / n).collect())
}

/// Appends the normalized residual of `v` to `basis` if it is independent.
fn extend_basis(basis: &mut Vec<Vec<C64>>, v: Vec<C64>) -> bool {
    let mut w = v;
    for _ in 0..2 {
        for b in basis.iter() {
            let c = dot(b, &w);
            crate::numerics::axpy(-c, b, &mut w);
        }
    }
    let n = norm(&w);
    if n > SPAN_TOL {
        basis.push(w.into_iter().map(|z| z / n).collect());
        true
    } else {
        false
    }
}

impl MatrixAlgebra {
    /// Smallest unital *-subalgebra of `M_d` containing `gens`.
    ///
    /// Words in the generators and their adjoints are accumulated by left
    /// multiplication until the span stops growing.
    pub fn from_generators(gens: &[CMatrix], d: usize) -> Result<Self> {
        for g in gens {
            if g.shape() != (d, d) {
                return Err(dim_mismatch(format!("{d}x{d}"), format!("{}x{}", g.rows(), g.cols())));
            }
            g.check_finite()?;
        }
        let mut letters = Vec::with_capacity(2 * gens.len());
        for g in gens {
            if g.frobenius_norm() == 0.0 {
                continue;
            }
            let g = g.scale_real(1.0 / g.frobenius_norm());
            letters.push(g.adjoint());
            letters.push(g);
        }

        let mut basis: Vec<Vec<C64>> = Vec::new();
        extend_basis(&mut basis, unit_vec(&CMatrix::identity(d)).unwrap_or_default());
        let mut frontier = 0;
        while frontier < basis.len() {
            let b = to_matrix(d, basis[frontier].clone());
            frontier += 1;
            for l in &letters {
                // Letters and basis elements have unit norm, so a tiny product is a zero product.
                let p = l.matmul(&b);
                if p.frobenius_norm() <= SPAN_TOL {
                    continue;
                }
                if let Some(v) = unit_vec(&p) {
                    extend_basis(&mut basis, v);
                }
            }
        }
        Ok(Self {
            d,
            basis: basis.into_iter().map(|v| to_matrix(d, v)).collect(),
        })
    }

    /// Orthonormalizes `1` followed by `elements`. No closure is taken, so
    /// the caller must supply a spanning set of a unital *-algebra.
    pub fn from_spanning_set(d: usize, elements: &[CMatrix]) -> Result<Self> {
        let mut basis: Vec<Vec<C64>> = Vec::new();
        extend_basis(&mut basis, unit_vec(&CMatrix::identity(d)).unwrap_or_default());
        for e in elements {
            if e.shape() != (d, d) {
                return Err(dim_mismatch(format!("{d}x{d}"), format!("{}x{}", e.rows(), e.cols())));
            }
            if let Some(v) = unit_vec(e) {
                extend_basis(&mut basis, v);
            }
        }
        Ok(Self {
            d,
            basis: basis.into_iter().map(|v| to_matrix(d, v)).collect(),
        })
    }

    pub fn scalars(d: usize) -> Self {
        Self::from_spanning_set(d, &[]).expect("no elements")
    }

    pub fn full(d: usize) -> Self {
        let units: Vec<CMatrix> = (0..d)
            .flat_map(|i| (0..d).map(move |j| CMatrix::unit(d, i, j)))
            .collect();
        Self::from_spanning_set(d, &units).expect("square units")
    }

    pub fn diagonal(d: usize) -> Self {
        let units: Vec<CMatrix> = (0..d).map(|i| CMatrix::unit(d, i, i)).collect();
        Self::from_spanning_set(d, &units).expect("square units")
    }

    pub fn hilbert_dim(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    /// Coordinates `⟨b_i, x⟩` of the orthogonal projection of `x`.
    pub fn coords(&self, x: &CMatrix) -> Vec<C64> {
        self.basis.iter().map(|b| dot(b.data(), x.data())).collect()
    }

    pub fn element(&self, coords: &[C64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.d, self.d);
        for (b, &c) in self.basis.iter().zip(coords) {
            if c == ZERO {
                continue;
            }
            for (o, z) in out.data_mut().iter_mut().zip(b.data()) {
                *o += c * z;
            }
        }
        out
    }

    pub fn project(&self, x: &CMatrix) -> CMatrix {
        self.element(&self.coords(x))
    }

    /// Frobenius norm of `x - P(x)`.
    pub fn residual(&self, x: &CMatrix) -> f64 {
        (x - &self.project(x)).frobenius_norm()
    }

    /// Coordinates of `x`, failing when `x` is not in the span.
    pub fn coords_checked(&self, x: &CMatrix, tol: f64) -> Result<Vec<C64>> {
        if x.shape() != (self.d, self.d) {
            return Err(dim_mismatch(format!("{}x{}", self.d, self.d), format!("{}x{}", x.rows(), x.cols())));
        }
        let r = self.residual(x);
        if r > tol * (1.0 + x.frobenius_norm()) {
            return Err(Error::NotInAlgebra { residual: r });
        }
        Ok(self.coords(x))
    }

    pub fn identity_coords(&self) -> Vec<C64> {
        self.coords(&CMatrix::identity(self.d))
    }

    /// Matrix of `y ↦ x y` in basis coordinates.
    pub fn left_multiplication(&self, x: &CMatrix) -> CMatrix {
        let cols: Vec<Vec<C64>> = self.basis.iter().map(|b| self.coords(&x.matmul(b))).collect();
        CMatrix::from_columns(self.dim(), &cols).expect("coords have length dim")
    }

    /// `A*` with `coords(a†) = A* conj(coords(a))`; column `j` is `coords(b_j†)`.
    pub fn adjoint_matrix(&self) -> CMatrix {
        let cols: Vec<Vec<C64>> = self.basis.iter().map(|b| self.coords(&b.adjoint())).collect();
        CMatrix::from_columns(self.dim(), &cols).expect("coords have length dim")
    }

    /// `coords(a†)` for an element given by coordinates.
    pub fn adjoint_coords(&self, coords: &[C64]) -> Vec<C64> {
        self.coords(&self.element(coords).adjoint())
    }

    /// Structure table `Γ[p][q] = coords(b_p† b_q)`.
    pub fn star_products(&self) -> Vec<Vec<Vec<C64>>> {
        self.basis
            .iter()
            .map(|bp| {
                let bp_adj = bp.adjoint();
                self.basis.iter().map(|bq| self.coords(&bp_adj.matmul(bq))).collect()
            })
            .collect()
    }

    /// Largest residual of `other`'s basis projected into `self`.
    pub fn containment_residual(&self, other: &MatrixAlgebra) -> f64 {
        other
            .basis
            .iter()
            .map(|b| self.residual(b))
            .fold(0.0, f64::max)
    }

    /// Mutual projection residual; zero iff the spans agree.
    pub fn span_distance(&self, other: &MatrixAlgebra) -> f64 {
        if self.d != other.d {
            return f64::INFINITY;
        }
        self.containment_residual(other)
            .max(other.containment_residual(self))
    }

    /// Identity, adjoint and product closure of the span.
    pub fn closure_report(&self, tol: f64) -> ValidationReport {
        let mut report = ValidationReport::new();
        report.push("algebra identity", self.residual(&CMatrix::identity(self.d)), tol);
        let adj = self
            .basis
            .iter()
            .map(|b| self.residual(&b.adjoint()))
            .fold(0.0, f64::max);
        report.push("algebra adjoint closure", adj, tol);
        let mut prod: f64 = 0.0;
        for bi in &self.basis {
            for bj in &self.basis {
                prod = prod.max(self.residual(&bi.matmul(bj)));
            }
        }
        report.push("algebra product closure", prod, tol);
        let mut ortho: f64 = 0.0;
        for (i, bi) in self.basis.iter().enumerate() {
            for (j, bj) in self.basis.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                ortho = ortho.max((dot(bi.data(), bj.data()) - target).norm());
            }
        }
        report.push("algebra basis orthonormality", ortho, tol);
        report
    }
}

pub fn algebra_from_generators(gens: &[CMatrix], d: usize) -> Result<MatrixAlgebra> {
    MatrixAlgebra::from_generators(gens, d)
}

/// `{X : X b = b X for every basis element b}` as a null-space solve.
pub fn commutant(a: &MatrixAlgebra) -> Result<MatrixAlgebra> {
    let d = a.hilbert_dim();
    let n = d * d;
    // Rows: vec(X b - b X) for each basis element; unknowns vec(X), row-major.
    let mut sys = CMatrix::zeros(a.dim() * n, n);
    for (k, b) in a.basis().iter().enumerate() {
        let off = k * n;
        for i in 0..d {
            for j in 0..d {
                let row = off + i * d + j;
                for m in 0..d {
                    sys[(row, i * d + m)] += b[(m, j)];
                    sys[(row, m * d + j)] -= b[(i, m)];
                }
            }
        }
    }
    let null = null_space(&sys, RANK_TOL)?;
    let elems: Vec<CMatrix> = null.into_iter().map(|v| to_matrix(d, v)).collect();
    MatrixAlgebra::from_spanning_set(d, &elems)
}

/// `{a ∈ A : α_g(a) = a}` over the generators of the acting group.
pub fn fixed_point_algebra(a: &MatrixAlgebra, action: &GroupAction) -> Result<MatrixAlgebra> {
    let dim = a.dim();
    if action.dim() != dim {
        return Err(Error::InvalidAction(format!(
            "action acts on a {}-dimensional algebra, expected {dim}",
            action.dim()
        )));
    }
    let gens = action.generator_maps();
    if gens.is_empty() {
        return Ok(a.clone());
    }
    let mut stacked = CMatrix::zeros(dim * gens.len(), dim);
    for (k, t) in gens.iter().enumerate() {
        for i in 0..dim {
            for j in 0..dim {
                let delta = if i == j { 1.0 } else { 0.0 };
                stacked[(k * dim + i, j)] = t[(i, j)] - delta;
            }
        }
    }
    let null = null_space(&stacked, RANK_TOL)?;
    let elems: Vec<CMatrix> = null.iter().map(|c| a.element(c)).collect();
    MatrixAlgebra::from_spanning_set(a.hilbert_dim(), &elems)
}

/// `U (⊕_k M_{n_k} ⊗ 1_{m_k}) U†` for `blocks = [(n_k, m_k), …]` and a random unitary `U`.
pub fn random_multimatrix<R: Rng + ?Sized>(blocks: &[(usize, usize)], rng: &mut R) -> Result<MatrixAlgebra> {
    let d: usize = blocks.iter().map(|&(n, m)| n * m).sum();
    if d == 0 || blocks.iter().any(|&(n, m)| n == 0 || m == 0) {
        return Err(Error::InvalidArgument("blocks must be non-empty".into()));
    }
    let u = random_unitary(d, rng);
    let mut gens = Vec::new();
    let mut offset = 0;
    for &(n, m) in blocks {
        for i in 0..n {
            for j in 0..n {
                let mut e = CMatrix::zeros(d, d);
                for r in 0..m {
                    e[(offset + i * m + r, offset + j * m + r)] = C64::new(1.0, 0.0);
                }
                gens.push(u.matmul(&e).matmul(&u.adjoint()));
            }
        }
        offset += n * m;
    }
    MatrixAlgebra::from_generators(&gens, d)
}

pub fn is_trivial(a: &MatrixAlgebra) -> bool {
    a.dim() == 1
}

/// Pauli matrices `(X, Y, Z)`.
pub fn pauli() -> (CMatrix, CMatrix, CMatrix) {
    let x = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).expect("2x2");
    let y = CMatrix::from_vec(
        2,
        2,
        vec![ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO],
    )
    .expect("2x2");
    let z = CMatrix::diag_real(&[1.0, -1.0]);
    (x, y, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::DEFAULT_TOL;
    use crate::system::{FiniteGroup, GroupAction};
    use rand::SeedableRng;

    #[test]
    fn empty_generators_give_scalars() {
        let a = algebra_from_generators(&[], 2).unwrap();
        assert_eq!(a.dim(), 1);
        assert!(is_trivial(&a));
    }

    #[test]
    fn single_projection_gives_diagonal() {
        let a = algebra_from_generators(&[CMatrix::unit(2, 0, 0)], 2).unwrap();
        assert_eq!(a.dim(), 2);
        assert!(a.span_distance(&MatrixAlgebra::diagonal(2)) < 1e-12);
        assert!(!is_trivial(&a));
    }

    #[test]
    fn rotated_matrix_units_close_without_noise_directions() {
        // Products like E12 E12 vanish only up to rounding after a rotation.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for blocks in [vec![(2, 2)], vec![(2, 1), (1, 2)], vec![(1, 1), (2, 2)]] {
            let a = random_multimatrix(&blocks, &mut rng).unwrap();
            let want: usize = blocks.iter().map(|&(n, _)| n * n).sum();
            assert_eq!(a.dim(), want, "{blocks:?}");
        }
    }

    #[test]
    fn trivially_acting_automorphism_fixes_everything() {
        // Ad(Z) is the identity on the diagonal only up to rounding.
        let a = MatrixAlgebra::diagonal(2);
        let z = CMatrix::diag_real(&[1.0, -1.0]);
        let act = GroupAction::finite_from_unitaries(FiniteGroup::cyclic(2), &a, &[(1, z)]).unwrap();
        assert_eq!(fixed_point_algebra(&a, &act).unwrap().dim(), 2);
    }

    #[test]
    fn paulis_generate_full_matrix_algebra() {
        let (x, _, z) = pauli();
        let a = algebra_from_generators(&[x, z], 2).unwrap();
        assert_eq!(a.dim(), 4);
        assert!(a.closure_report(DEFAULT_TOL).passed());
    }

    #[test]
    fn mismatched_generator_rejected() {
        let r = algebra_from_generators(&[CMatrix::identity(2), CMatrix::identity(3)], 2);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn commutant_examples() {
        assert_eq!(commutant(&MatrixAlgebra::scalars(3)).unwrap().dim(), 9);
        assert_eq!(commutant(&MatrixAlgebra::full(2)).unwrap().dim(), 1);
        let diag = MatrixAlgebra::diagonal(2);
        let c = commutant(&diag).unwrap();
        assert_eq!(c.dim(), 2);
        assert!(c.span_distance(&diag) < 1e-12);
    }

    #[test]
    fn commutant_of_amplified_block() {
        // M_2 ⊗ 1_2 on C^4 has commutant 1_2 ⊗ M_2.
        let (x, _, z) = pauli();
        let one = CMatrix::identity(2);
        let a = algebra_from_generators(&[x.kron(&one), z.kron(&one)], 4).unwrap();
        let c = commutant(&a).unwrap();
        assert_eq!(c.dim(), 4);
        let expect = algebra_from_generators(&[one.kron(&x), one.kron(&z)], 4).unwrap();
        assert!(c.span_distance(&expect) < 1e-10);
        assert!(commutant(&c).unwrap().span_distance(&a) < 1e-8);
    }

    #[test]
    fn fixed_points_of_z2_conjugation() {
        let a = MatrixAlgebra::full(2);
        let (_, _, z) = pauli();
        let action = GroupAction::finite_from_unitaries(FiniteGroup::cyclic(2), &a, &[(1, z)]).unwrap();
        let f = fixed_point_algebra(&a, &action).unwrap();
        assert_eq!(f.dim(), 2);
        assert!(f.span_distance(&MatrixAlgebra::diagonal(2)) < 1e-10);
    }

    #[test]
    fn pauli_twirl_fixed_points_are_scalars() {
        let a = MatrixAlgebra::full(2);
        let (x, _, z) = pauli();
        let g = FiniteGroup::klein_four();
        let action = GroupAction::finite_from_unitaries(g, &a, &[(1, x), (2, z)]).unwrap();
        let f = fixed_point_algebra(&a, &action).unwrap();
        assert!(is_trivial(&f));
    }

    #[test]
    fn identity_action_fixes_everything() {
        let a = MatrixAlgebra::full(2);
        let action = GroupAction::identity(FiniteGroup::cyclic(3).into(), a.dim());
        assert_eq!(fixed_point_algebra(&a, &action).unwrap().dim(), 4);
    }
}
