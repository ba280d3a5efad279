//! The mirror of a factor inside the commutant, and the joining it induces.
//!
//! For a factor `h: F → A`, the anti-isomorphism `σ = j∘π∘h` carries `F`
//! onto a subalgebra `B` of `π(A)'`. With `ν(b) = ⟨Ω, bΩ⟩` and
//! `β_g = Ad(J U_g J)`, the pair `(A, B)` is joined by
//! `ω(a ⊗ b) = ⟨Ω, π(a) b Ω⟩`.

use crate::algebra::{is_trivial, MatrixAlgebra};
use crate::error::{Error, Result};
use crate::gns_modular::{standard_form, GnsData, ModularData};
use crate::joining::{verify_joining, JoiningFunctional};
use crate::numerics::{dot, CMatrix, C64, DEFAULT_TOL};
use crate::report::ValidationReport;
use crate::system::{
    fixed_point_factor, is_ergodic, validate_factor, DynamicalSystem, Factor, Group, GroupAction, QState,
};

pub const PRODUCT_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct MirrorData {
    pub b_sys: DynamicalSystem,
    pub factor: Factor,
    pub gns: GnsData,
    pub modular: ModularData,
    /// `σ(f_k)` for each basis element of `F`, as operators on the GNS space.
    pub sigma_images: Vec<CMatrix>,
}

impl MirrorData {
    /// `σ(x)` for `x ∈ F`.
    pub fn sigma(&self, x: &CMatrix) -> CMatrix {
        let coords = self.factor.source.algebra.coords(x);
        let n = self.gns.gns_dim();
        let mut out = CMatrix::zeros(n, n);
        for (img, c) in self.sigma_images.iter().zip(coords) {
            out = &out + &img.scale(c);
        }
        out
    }

    /// `π⁻¹(y)` in `A`-coordinates for `y ∈ π(A)`, read off from `yΩ = γ(x)`.
    fn pi_inverse_coords(&self, y: &CMatrix) -> Vec<C64> {
        self.gns.gamma_inverse().mul_vec(&y.mul_vec(self.gns.omega()))
    }

    /// Checks of the mirror construction.
    pub fn report(&self, tol: f64) -> ValidationReport {
        let mut report = ValidationReport::new();
        let fsys = &self.factor.source;
        let fb = fsys.algebra.basis();

        let mut comm: f64 = 0.0;
        for s in &self.sigma_images {
            for p in self.gns.pi_basis() {
                comm = comm.max(s.commutator(p).max_abs());
            }
        }
        report.push("mirror B in commutant", comm, tol);

        let (mut anti, mut star, mut lam): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for (i, x) in fb.iter().enumerate() {
            star = star.max(self.sigma(&x.adjoint()).max_abs_diff(&self.sigma_images[i].adjoint()));
            lam = lam.max((self.b_sys.state.eval(&self.sigma_images[i]) - fsys.state.eval(x)).norm());
            for (j, y) in fb.iter().enumerate() {
                let lhs = self.sigma(&x.matmul(y));
                anti = anti.max(lhs.max_abs_diff(&self.sigma_images[j].matmul(&self.sigma_images[i])));
            }
        }
        report.push("mirror sigma anti-multiplicative", anti, tol);
        report.push("mirror sigma *-preserving", star, tol);
        report.push("mirror nu o sigma = lambda", lam, tol);

        let bsys = &self.b_sys;
        let asys = &self.factor.target;
        let (mut inter, mut beta): (f64, f64) = (0.0, 0.0);
        for ((_, tb), ((_, tf), (_, ta))) in bsys
            .action
            .check_maps()
            .into_iter()
            .zip(fsys.action.check_maps().into_iter().zip(asys.action.check_maps()))
        {
            for (i, x) in fb.iter().enumerate() {
                let lhs = GroupAction::apply(&bsys.algebra, &tb, &self.sigma_images[i]);
                let rhs = self.sigma(&GroupAction::apply(&fsys.algebra, &tf, x));
                inter = inter.max(lhs.max_abs_diff(&rhs));
            }
            // β_g = j∘π∘α_g∘π⁻¹∘j
            for b in bsys.algebra.basis() {
                let lhs = GroupAction::apply(&bsys.algebra, &tb, b);
                let c = self.pi_inverse_coords(&self.modular.j_map(b));
                let moved = self.gns.pi_coords(&ta.mul_vec(&c));
                beta = beta.max(lhs.max_abs_diff(&self.modular.j_map(&moved)));
            }
        }
        report.push("mirror beta o sigma = sigma o phi", inter, tol);
        report.push("mirror beta = j pi alpha pi^-1 j", beta, tol);
        if fsys.is_identity_system() {
            report.push_flag("mirror B identity system", bsys.is_identity_system());
        }
        report
    }
}

fn require_passed(report: ValidationReport) -> Result<()> {
    match report.first_failure() {
        Some(c) => Err(Error::InvalidFactor(format!("{} (residual {:.3e})", c.name, c.residual))),
        None => Ok(()),
    }
}

/// Builds `(B, ν, β)` and `σ` for a factor of `asys`.
pub fn mirror_system(asys: &DynamicalSystem, f: &Factor) -> Result<MirrorData> {
    if f.target != *asys {
        return Err(Error::InvalidFactor("factor target is not the given system".into()));
    }
    require_passed(validate_factor(f))?;
    let (gns, modular) = standard_form(asys)?;
    let n = gns.gns_dim();
    let sigma_images: Vec<CMatrix> = f
        .source
        .algebra
        .basis()
        .iter()
        .map(|x| modular.j_map(&gns.pi(&f.embed(x))))
        .collect();
    let b = MatrixAlgebra::from_spanning_set(n, &sigma_images)?;
    let omega = gns.omega();
    let rho = CMatrix::from_fn(n, n, |i, j| omega[i] * omega[j].conj());
    let nu = QState::new(rho)?;

    let action = match asys.action.group() {
        Group::Finite(g) => {
            let given: Vec<(usize, CMatrix)> = g
                .generators()
                .iter()
                .map(|&s| (s, modular.conjugate_by_j(&modular.unitary(s as i64))))
                .collect();
            GroupAction::finite_from_unitaries(g.clone(), &b, &given)?
        }
        Group::Integers => GroupAction::integers_from_unitary(&b, &modular.conjugate_by_j(&modular.unitary(1)))?,
    };
    let b_sys = DynamicalSystem::new(b, nu, action)?;
    Ok(MirrorData {
        b_sys,
        factor: f.clone(),
        gns,
        modular,
        sigma_images,
    })
}

/// `ω(a_p ⊗ b_r) = ⟨Ω, π(a_p) b_r Ω⟩`
pub fn mirror_joining(asys: &DynamicalSystem, md: &MirrorData) -> Result<JoiningFunctional> {
    let omega = md.gns.omega();
    let b_omega: Vec<Vec<C64>> = md.b_sys.algebra.basis().iter().map(|b| b.mul_vec(omega)).collect();
    let pis: Vec<CMatrix> = asys.algebra.basis().iter().map(|a| md.gns.pi(a)).collect();
    JoiningFunctional::new(CMatrix::from_fn(pis.len(), b_omega.len(), |p, r| {
        dot(omega, &pis[p].mul_vec(&b_omega[r]))
    }))
}

pub fn is_product(w: &JoiningFunctional, asys: &DynamicalSystem, bsys: &DynamicalSystem) -> bool {
    w.product_deviation(asys, bsys).0 <= PRODUCT_TOL
}

/// `|ω(x ⊗ y) − μ(x)ν(y)|`
pub fn deviation_at(
    w: &JoiningFunctional,
    asys: &DynamicalSystem,
    bsys: &DynamicalSystem,
    x: &CMatrix,
    y: &CMatrix,
) -> f64 {
    (w.eval(asys, bsys, x, y) - asys.state.eval(x) * bsys.state.eval(y)).norm()
}

/// A probe pair `(h(x), σ(x))` for a matrix unit `x = E_ij` of `F`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitProbe {
    pub i: usize,
    pub j: usize,
    pub deviation: f64,
}

#[derive(Clone, Debug)]
pub enum Witness {
    Ergodic,
    NonProduct {
        mirror: Box<MirrorData>,
        joining: JoiningFunctional,
        /// Largest deviation over the product basis and where it occurs.
        basis_deviation: (f64, usize, usize),
        /// Largest deviation over matrix units of `F`, if any lie in `F`.
        unit_probe: Option<UnitProbe>,
    },
}

/// Either the ergodic verdict, or an identity system with a non-product
/// joining built from the fixed point factor.
pub fn nondisjointness_witness(asys: &DynamicalSystem) -> Result<Witness> {
    if is_ergodic(asys)? {
        return Ok(Witness::Ergodic);
    }
    let f = fixed_point_factor(asys)?;
    let md = mirror_system(asys, &f)?;
    let joining = mirror_joining(asys, &md)?;
    let basis_deviation = joining.product_deviation(asys, &md.b_sys);
    let unit_probe = best_unit_probe(asys, &md, &joining);
    Ok(Witness::NonProduct {
        mirror: Box::new(md),
        joining,
        basis_deviation,
        unit_probe,
    })
}

fn best_unit_probe(asys: &DynamicalSystem, md: &MirrorData, w: &JoiningFunctional) -> Option<UnitProbe> {
    let fa = &md.factor.source.algebra;
    let d = fa.hilbert_dim();
    let mut best: Option<UnitProbe> = None;
    for i in 0..d {
        for j in 0..d {
            let e = CMatrix::unit(d, i, j);
            if fa.residual(&e) > DEFAULT_TOL {
                continue;
            }
            let dev = deviation_at(w, asys, &md.b_sys, &md.factor.embed(&e), &md.sigma(&e));
            if best.as_ref().is_none_or(|b| dev > b.deviation + 1e-12) {
                best = Some(UnitProbe { i, j, deviation: dev });
            }
        }
    }
    best
}

/// Joining checks, mirror checks and the product verdict in one report.
pub fn witness_report(asys: &DynamicalSystem, md: &MirrorData, w: &JoiningFunctional) -> ValidationReport {
    let mut report = md.report(DEFAULT_TOL);
    report.extend(verify_joining(w, asys, &md.b_sys));
    let trivial = is_trivial(&md.factor.source.algebra);
    report.push_flag(
        "mirror product iff factor trivial",
        is_product(w, asys, &md.b_sys) == trivial,
    );
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::pauli;
    use crate::system::{identity_system, validate_system, FiniteGroup};

    fn ad_diag() -> DynamicalSystem {
        let a = MatrixAlgebra::full(2);
        let z = pauli().2;
        let act = GroupAction::finite_from_unitaries(FiniteGroup::cyclic(2), &a, &[(1, z)]).unwrap();
        DynamicalSystem::new(a, QState::maximally_mixed(2), act).unwrap()
    }

    #[test]
    fn ad_diag_mirror_matches_standard_form() {
        let a = ad_diag();
        let f = fixed_point_factor(&a).unwrap();
        let md = mirror_system(&a, &f).unwrap();
        assert!(validate_system(&md.b_sys).passed());
        assert_eq!(md.b_sys.algebra.dim(), 2);
        assert!(md.b_sys.is_identity_system());
        assert!(md.report(1e-9).passed(), "{}", md.report(1e-9));
        // Ω = (e_1⊗e_1 + e_2⊗e_2)/√2 up to the GNS coordinates:
        // ν(σ(E_11)) = 1/2 and ω(E_11 ⊗ σ(E_11)) = 1/2.
        let e11 = CMatrix::unit(2, 0, 0);
        let s = md.sigma(&e11);
        assert!((md.b_sys.state.eval(&s) - C64::new(0.5, 0.0)).norm() < 1e-12);
        let w = mirror_joining(&a, &md).unwrap();
        assert!((w.eval(&a, &md.b_sys, &e11, &s) - C64::new(0.5, 0.0)).norm() < 1e-12);
        assert!((deviation_at(&w, &a, &md.b_sys, &e11, &s) - 0.25).abs() < 1e-12);
        assert!(verify_joining(&w, &a, &md.b_sys).passed());
        assert!(!is_product(&w, &a, &md.b_sys));
    }

    #[test]
    fn trivial_factor_gives_product() {
        let a = ad_diag();
        let scal = MatrixAlgebra::scalars(2);
        let src = DynamicalSystem::new(
            scal.clone(),
            QState::maximally_mixed(2),
            GroupAction::identity(a.action.group().clone(), 1),
        )
        .unwrap();
        let h = CMatrix::from_columns(a.algebra.dim(), &[a.algebra.coords(&scal.basis()[0])]).unwrap();
        let f = Factor::new(src, a.clone(), h).unwrap();
        let md = mirror_system(&a, &f).unwrap();
        assert_eq!(md.b_sys.algebra.dim(), 1);
        let w = mirror_joining(&a, &md).unwrap();
        assert!(is_product(&w, &a, &md.b_sys));
        assert!(witness_report(&a, &md, &w).passed());
    }

    #[test]
    fn pauli_twirl_is_ergodic() {
        let a = MatrixAlgebra::full(2);
        let (x, _, z) = pauli();
        let act = GroupAction::finite_from_unitaries(FiniteGroup::klein_four(), &a, &[(1, x), (2, z)]).unwrap();
        let sys = DynamicalSystem::new(a, QState::maximally_mixed(2), act).unwrap();
        assert!(matches!(nondisjointness_witness(&sys).unwrap(), Witness::Ergodic));
    }

    #[test]
    fn identity_system_witness_is_maximal_overlap() {
        let sys = identity_system(MatrixAlgebra::full(2), QState::maximally_mixed(2)).unwrap();
        match nondisjointness_witness(&sys).unwrap() {
            Witness::NonProduct { mirror, joining, unit_probe, .. } => {
                assert_eq!(mirror.b_sys.algebra.dim(), 4);
                assert!(witness_report(&sys, &mirror, &joining).passed());
                let e11 = CMatrix::unit(2, 0, 0);
                let dev = deviation_at(&joining, &sys, &mirror.b_sys, &e11, &mirror.sigma(&e11));
                assert!(dev > 0.1);
                assert!(unit_probe.unwrap().deviation >= dev - 1e-12);
            }
            Witness::Ergodic => panic!("identity system on M_2 is not ergodic"),
        }
    }

    #[test]
    fn ad_diag_witness_probe() {
        match nondisjointness_witness(&ad_diag()).unwrap() {
            Witness::NonProduct { unit_probe, .. } => {
                let p = unit_probe.unwrap();
                assert_eq!((p.i, p.j), (0, 0));
                assert!((p.deviation - 0.25).abs() < 1e-8);
            }
            Witness::Ergodic => panic!("ad_diag is not ergodic"),
        }
    }
}
