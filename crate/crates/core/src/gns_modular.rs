//! GNS representation of `(A, μ)` and its Tomita-Takesaki data.
//!
//! The GNS space is `C^n` with `n = dim(A)` for faithful `μ`. The algebra
//! basis is Gram-Schmidt orthonormalized under `⟨a, a'⟩_μ = μ(a† a')` in
//! input order, which is the Cholesky factorization `G = R† R` of the Gram
//! matrix; then `γ(a) = R·coords(a)` and `π(x) = R L_x R⁻¹` with `L_x` the
//! left multiplication matrix in basis coordinates.

use crate::algebra::{commutant, MatrixAlgebra};
use crate::error::{Error, Result};
use crate::numerics::{
    cholesky_upper, hermitian_eig, norm, orthonormalize, polar_antilinear, positive_sqrt, vec_sub,
    AntilinearOp, CMatrix, C64, DEFAULT_TOL,
};
use crate::report::ValidationReport;
use crate::system::{FAITHFUL_TOL, Group, GroupAction, QState};

/// Span-equality tolerance for `j(π(A)) = π(A)'`.
pub const TOMITA_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct GnsData {
    algebra: MatrixAlgebra,
    r: CMatrix,
    r_inv: CMatrix,
    pi_basis: Vec<CMatrix>,
    omega: Vec<C64>,
}

impl GnsData {
    pub fn gns_dim(&self) -> usize {
        self.r.rows()
    }

    pub fn algebra(&self) -> &MatrixAlgebra {
        &self.algebra
    }

    /// Cyclic vector `Ω = γ(1)`.
    pub fn omega(&self) -> &[C64] {
        &self.omega
    }

    pub fn gamma_coords(&self, coords: &[C64]) -> Vec<C64> {
        self.r.mul_vec(coords)
    }

    /// `γ(x)` for `x` in the algebra.
    pub fn gamma(&self, x: &CMatrix) -> Vec<C64> {
        self.gamma_coords(&self.algebra.coords(x))
    }

    /// Coordinate change from algebra coordinates into the GNS space.
    pub fn gamma_matrix(&self) -> &CMatrix {
        &self.r
    }

    pub fn gamma_inverse(&self) -> &CMatrix {
        &self.r_inv
    }

    /// `π(b_i)` for each algebra basis element.
    pub fn pi_basis(&self) -> &[CMatrix] {
        &self.pi_basis
    }

    pub fn pi_coords(&self, coords: &[C64]) -> CMatrix {
        let n = self.gns_dim();
        let mut out = CMatrix::zeros(n, n);
        for (p, &c) in self.pi_basis.iter().zip(coords) {
            out = &out + &p.scale(c);
        }
        out
    }

    pub fn pi(&self, x: &CMatrix) -> CMatrix {
        self.pi_coords(&self.algebra.coords(x))
    }

    /// Transports a coordinate map on the algebra to `R T R⁻¹` on the GNS space.
    pub fn transport(&self, map: &CMatrix) -> CMatrix {
        self.r.matmul(map).matmul(&self.r_inv)
    }

    /// `M = π(A)` as an algebra on the GNS space.
    pub fn represented_algebra(&self) -> Result<MatrixAlgebra> {
        MatrixAlgebra::from_spanning_set(self.gns_dim(), &self.pi_basis)
    }

    pub fn report(&self, state: &QState, tol: f64) -> ValidationReport {
        let mut report = ValidationReport::new();
        let basis = self.algebra.basis();
        let gammas: Vec<Vec<C64>> = basis.iter().map(|b| self.gamma(b)).collect();
        let mut inner: f64 = 0.0;
        for (i, bi) in basis.iter().enumerate() {
            for (j, bj) in basis.iter().enumerate() {
                let lhs = crate::numerics::dot(&gammas[i], &gammas[j]);
                let rhs = state.eval(&bi.adjoint().matmul(bj));
                inner = inner.max((lhs - rhs).norm());
            }
        }
        report.push("gns inner product", inner, tol);

        let (mut hom, mut star): (f64, f64) = (0.0, 0.0);
        for (i, bi) in basis.iter().enumerate() {
            star = star.max(self.pi(&bi.adjoint()).max_abs_diff(&self.pi_basis[i].adjoint()));
            for (j, bj) in basis.iter().enumerate() {
                let lhs = self.pi_basis[i].matmul(&self.pi_basis[j]);
                hom = hom.max(lhs.max_abs_diff(&self.pi(&bi.matmul(bj))));
            }
        }
        report.push("gns pi multiplicative", hom, tol);
        report.push("gns pi *-preserving", star, tol);
        let one = self.pi(&CMatrix::identity(self.algebra.hilbert_dim()));
        report.push("gns pi unital", one.max_abs_diff(&CMatrix::identity(self.gns_dim())), tol);

        let mut cyc: f64 = 0.0;
        for (p, g) in self.pi_basis.iter().zip(&gammas) {
            cyc = cyc.max(norm(&vec_sub(&p.mul_vec(&self.omega), g)));
        }
        report.push("gns pi(a) omega = gamma(a)", cyc, tol);
        let span = orthonormalize(&gammas, tol).map(|v| v.len()).unwrap_or(0);
        report.push_with_detail(
            "gns omega cyclic",
            span == self.gns_dim(),
            (self.gns_dim() - span.min(self.gns_dim())) as f64,
            format!("span dimension {span} of {}", self.gns_dim()),
        );
        // Separating: a ↦ π(a)Ω is injective on the algebra.
        let sep = hermitian_eig(&self.r.adjoint().matmul(&self.r))
            .map(|e| e.min())
            .unwrap_or(0.0);
        report.push_with_detail(
            "gns omega separating",
            sep > FAITHFUL_TOL,
            sep,
            "min eigenvalue of the map a -> pi(a) omega, squared",
        );
        report
    }
}

/// GNS construction for a faithful state.
pub fn gns(algebra: &MatrixAlgebra, state: &QState) -> Result<GnsData> {
    if state.dim() != algebra.hilbert_dim() {
        return Err(crate::error::dim_mismatch(algebra.hilbert_dim(), state.dim()));
    }
    let gram = state.gram(algebra).hermitian_part();
    let min_eig = hermitian_eig(&gram)?.min();
    if min_eig <= FAITHFUL_TOL {
        return Err(Error::NotFaithful { min_eig });
    }
    let r = cholesky_upper(&gram)?;
    let r_inv = r.inverse()?;
    let pi_basis = algebra
        .basis()
        .iter()
        .map(|b| r.matmul(&algebra.left_multiplication(b)).matmul(&r_inv))
        .collect();
    let omega = r.mul_vec(&algebra.identity_coords());
    Ok(GnsData {
        algebra: algebra.clone(),
        r,
        r_inv,
        pi_basis,
        omega,
    })
}

#[derive(Clone, Debug)]
pub struct ModularData {
    pub s: AntilinearOp,
    pub delta: CMatrix,
    pub j: AntilinearOp,
    group: Group,
    /// Finite: `U_g` per element. Integers: `[U, U⁻¹]`.
    unitaries: Vec<CMatrix>,
}

impl ModularData {
    /// `U_g` for a finite-group element, or `U^n` for Z.
    pub fn unitary(&self, g: i64) -> CMatrix {
        match &self.group {
            Group::Finite(_) => self.unitaries[g as usize].clone(),
            Group::Integers => {
                let base = if g >= 0 { &self.unitaries[0] } else { &self.unitaries[1] };
                let mut out = CMatrix::identity(base.rows());
                for _ in 0..g.unsigned_abs() {
                    out = base.matmul(&out);
                }
                out
            }
        }
    }

    pub fn generator_unitaries(&self) -> Vec<CMatrix> {
        match &self.group {
            Group::Finite(g) => g.generators().iter().map(|&s| self.unitaries[s].clone()).collect(),
            Group::Integers => vec![self.unitaries[0].clone()],
        }
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    /// `j(x) = J x† J`, linear with matrix `K xᵀ conj(K)`.
    pub fn j_map(&self, x: &CMatrix) -> CMatrix {
        j_map(self, x)
    }

    /// `J X J` for a linear operator `X`.
    pub fn conjugate_by_j(&self, x: &CMatrix) -> CMatrix {
        self.j.sandwich(x)
    }
}

pub fn j_map(m: &ModularData, x: &CMatrix) -> CMatrix {
    let k = m.j.matrix();
    k.matmul(&x.transpose()).matmul(&k.conj())
}

/// `S: γ(a) ↦ γ(a†)`, its polar decomposition and the unitaries `U_g`.
pub fn modular(g: &GnsData, action: &GroupAction) -> Result<ModularData> {
    let algebra = g.algebra();
    if action.dim() != algebra.dim() {
        return Err(Error::InvalidAction(format!(
            "action acts on {} coordinates, algebra has {}",
            action.dim(),
            algebra.dim()
        )));
    }
    // coords(a†) = A* conj(c), so S = R A* conj(R⁻¹) conj(·).
    let k = g
        .gamma_matrix()
        .matmul(&algebra.adjoint_matrix())
        .matmul(&g.gamma_inverse().conj());
    let s = AntilinearOp::new(k)?;
    let (j, delta) = polar_antilinear(&s)?;
    let unitaries = match action.group() {
        Group::Finite(fg) => (0..fg.order())
            .map(|e| g.transport(action.element_map(e).expect("finite element")))
            .collect(),
        Group::Integers => vec![g.transport(&action.power(1)), g.transport(&action.power(-1))],
    };
    Ok(ModularData {
        s,
        delta,
        j,
        group: action.group().clone(),
        unitaries,
    })
}

fn basis_vector(n: usize, i: usize) -> Vec<C64> {
    (0..n)
        .map(|k| if k == i { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
        .collect()
}

/// Checks every modular invariant, including Tomita's `j(M) = M'`.
pub fn modular_report(g: &GnsData, m: &ModularData, action: &GroupAction, tol: f64) -> ValidationReport {
    let mut report = ValidationReport::new();
    let n = g.gns_dim();
    let algebra = g.algebra();
    let omega = g.omega();
    let id = CMatrix::identity(n);

    let mut s_res: f64 = 0.0;
    for b in algebra.basis() {
        let lhs = m.s.apply(&g.gamma(b));
        s_res = s_res.max(norm(&vec_sub(&lhs, &g.gamma(&b.adjoint()))));
    }
    report.push("modular S gamma(a) = gamma(a*)", s_res, tol);
    report.push("modular J^2 = 1", m.j.square().max_abs_diff(&id), tol);
    report.push("modular J antiunitary", m.j.antiunitarity_defect(), tol);
    report.push("modular J omega = omega", norm(&vec_sub(&m.j.apply(omega), omega)), tol);
    report.push(
        "modular delta omega = omega",
        norm(&vec_sub(&m.delta.mul_vec(omega), omega)),
        tol,
    );
    let dmin = hermitian_eig(&m.delta).map(|e| e.min()).unwrap_or(0.0);
    report.push_with_detail("modular delta positive", dmin > 0.0, dmin, "min eigenvalue");
    let polar = match positive_sqrt(&m.delta) {
        Ok(root) => (0..n)
            .map(|i| {
                let e = basis_vector(n, i);
                norm(&vec_sub(&m.s.apply(&e), &m.j.apply(&root.mul_vec(&e))))
            })
            .fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    };
    report.push("modular S = J delta^1/2", polar, tol);

    // j is an anti-*-isomorphism
    let pis = g.pi_basis();
    let js: Vec<CMatrix> = pis.iter().map(|p| m.j_map(p)).collect();
    let mut anti: f64 = 0.0;
    for (i, pi_i) in pis.iter().enumerate() {
        anti = anti.max(m.j_map(&pi_i.adjoint()).max_abs_diff(&js[i].adjoint()));
        anti = anti.max(m.j_map(&js[i]).max_abs_diff(pi_i));
        for (j, pi_j) in pis.iter().enumerate() {
            let lhs = m.j_map(&pi_i.matmul(pi_j));
            anti = anti.max(lhs.max_abs_diff(&js[j].matmul(&js[i])));
        }
    }
    report.push("modular j anti-*-isomorphism", anti, tol);

    let tomita = g
        .represented_algebra()
        .and_then(|ma| {
            let mc = commutant(&ma)?;
            let jm = MatrixAlgebra::from_spanning_set(n, &js)?;
            Ok(jm.span_distance(&mc))
        })
        .unwrap_or(f64::INFINITY);
    report.push("modular j(M) = M'", tomita, TOMITA_TOL.max(tol));

    let maps: Vec<(CMatrix, CMatrix)> = match action.group() {
        Group::Finite(fg) => (0..fg.order())
            .map(|e| (action.element_map(e).expect("element").clone(), m.unitary(e as i64)))
            .collect(),
        Group::Integers => (-crate::system::Z_HORIZON..=crate::system::Z_HORIZON)
            .map(|k| (action.power(k), m.unitary(k)))
            .collect(),
    };
    let (mut fix, mut cov, mut unit, mut comm): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for (t, u) in &maps {
        fix = fix.max(norm(&vec_sub(&u.mul_vec(omega), omega)));
        unit = unit.max(u.adjoint().matmul(u).max_abs_diff(&id));
        let ua = u.adjoint();
        for (k, p) in pis.iter().enumerate() {
            let lhs = u.matmul(p).matmul(&ua);
            let image = g.pi_coords(&t.mul_vec(&basis_vector(algebra.dim(), k)));
            cov = cov.max(lhs.max_abs_diff(&image));
        }
        // U J = J U  ⇔  U K = K conj(U)
        let k = m.j.matrix();
        comm = comm.max(u.matmul(k).max_abs_diff(&k.matmul(&u.conj())));
    }
    report.push("modular U_g omega = omega", fix, tol);
    report.push("modular U_g unitary", unit, tol);
    report.push("modular U_g pi(a) U_g* = pi(alpha_g(a))", cov, tol);
    report.push("modular U_g J = J U_g", comm, tol);
    if let Group::Finite(fg) = action.group() {
        let mut rep: f64 = 0.0;
        for a in 0..fg.order() {
            for b in 0..fg.order() {
                let lhs = m.unitary(a as i64).matmul(&m.unitary(b as i64));
                rep = rep.max(lhs.max_abs_diff(&m.unitary(fg.mul(a, b) as i64)));
            }
        }
        report.push("modular U representation", rep, tol);
    }
    report
}

/// Convenience: GNS and modular data of a dynamical system.
pub fn standard_form(sys: &crate::system::DynamicalSystem) -> Result<(GnsData, ModularData)> {
    let g = gns(&sys.algebra, &sys.state)?;
    let m = modular(&g, &sys.action)?;
    Ok((g, m))
}

pub fn default_modular_report(sys: &crate::system::DynamicalSystem) -> Result<ValidationReport> {
    let (g, m) = standard_form(sys)?;
    let mut r = g.report(&sys.state, DEFAULT_TOL);
    r.extend(modular_report(&g, &m, &sys.action, DEFAULT_TOL));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::pauli;
    use crate::system::{identity_system, DynamicalSystem, FiniteGroup};

    #[test]
    fn scalar_algebra_gns() {
        let g = gns(&MatrixAlgebra::scalars(1), &QState::maximally_mixed(1)).unwrap();
        assert_eq!(g.gns_dim(), 1);
        assert!((g.omega()[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn tracial_m2_has_trivial_delta() {
        let sys = identity_system(MatrixAlgebra::full(2), QState::maximally_mixed(2)).unwrap();
        let (g, m) = standard_form(&sys).unwrap();
        assert_eq!(g.gns_dim(), 4);
        assert!(m.delta.max_abs_diff(&CMatrix::identity(4)) < 1e-12);
        for b in sys.algebra.basis() {
            let lhs = m.j.apply(&g.gamma(b));
            assert!(norm(&vec_sub(&lhs, &g.gamma(&b.adjoint()))) < 1e-12);
        }
        let r = default_modular_report(&sys).unwrap();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn biased_diag_gram_entry() {
        let state = QState::new(CMatrix::diag_real(&[0.7, 0.3])).unwrap();
        let g = gns(&MatrixAlgebra::diagonal(2), &state).unwrap();
        assert_eq!(g.gns_dim(), 2);
        let v = g.gamma(&CMatrix::unit(2, 0, 0));
        assert!((crate::numerics::dot(&v, &v).re - 0.7).abs() < 1e-12);
    }

    /// Brute force: the modular operator of Tr(ρ·) on M_2 acts on matrix
    /// units as `Δ(E_ij) = (p_i / p_j) E_ij`, so its spectrum is the set of
    /// ratios.
    #[test]
    fn biased_m2_delta_spectrum_is_ratios() {
        let p = [2.0 / 3.0, 1.0 / 3.0];
        let state = QState::new(CMatrix::diag_real(&p)).unwrap();
        let sys = identity_system(MatrixAlgebra::full(2), state).unwrap();
        let (_, m) = standard_form(&sys).unwrap();
        let eig = hermitian_eig(&m.delta).unwrap();
        let mut expect: Vec<f64> = p.iter().flat_map(|a| p.iter().map(move |b| a / b)).collect();
        expect.sort_by(f64::total_cmp);
        for (got, want) in eig.values.iter().zip(&expect) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
        assert!(default_modular_report(&sys).unwrap().passed());
    }

    #[test]
    fn j_of_left_multiplication_commutes_with_algebra() {
        let sys = identity_system(MatrixAlgebra::full(2), QState::maximally_mixed(2)).unwrap();
        let (g, m) = standard_form(&sys).unwrap();
        let je11 = m.j_map(&g.pi(&CMatrix::unit(2, 0, 0)));
        for p in g.pi_basis() {
            assert!(p.commutator(&je11).max_abs() < 1e-12);
        }
        assert!(m.j_map(&CMatrix::identity(4)).max_abs_diff(&CMatrix::identity(4)) < 1e-12);
    }

    #[test]
    fn j_is_involutive_on_random_operators() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let state = QState::new(crate::numerics::random::random_density(2, &mut rng)).unwrap();
        let sys = identity_system(MatrixAlgebra::full(2), state).unwrap();
        let (_, m) = standard_form(&sys).unwrap();
        let x = crate::numerics::random::random_matrix(4, 4, &mut rng);
        assert!(m.j_map(&m.j_map(&x)).max_abs_diff(&x) < 1e-10);
    }

    #[test]
    fn covariant_unitaries_commute_with_j() {
        let a = MatrixAlgebra::full(2);
        let (x, _, z) = pauli();
        let action = GroupAction::finite_from_unitaries(FiniteGroup::klein_four(), &a, &[(1, x), (2, z)]).unwrap();
        let sys = DynamicalSystem::new(a, QState::maximally_mixed(2), action).unwrap();
        let r = default_modular_report(&sys).unwrap();
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn non_faithful_state_rejected() {
        let pure = QState::new(CMatrix::diag_real(&[1.0, 0.0])).unwrap();
        assert!(matches!(gns(&MatrixAlgebra::full(2), &pure), Err(Error::NotFaithful { .. })));
    }
}
