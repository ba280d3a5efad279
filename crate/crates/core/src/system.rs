//! Dynamical systems `(A, μ, α)`: states, group actions, ergodicity and
//! factors.

use std::collections::VecDeque;

use crate::algebra::{fixed_point_algebra, is_trivial, MatrixAlgebra};
use crate::error::{dim_mismatch, Error, Result};
use crate::numerics::{hermitian_eig, svd, CMatrix, C64, DEFAULT_TOL, RANK_TOL};
use crate::report::ValidationReport;

/// Powers `-N..=N` checked for Z actions.
pub const Z_HORIZON: i64 = 16;

/// Strict positivity threshold for the Gram matrix of a faithful state.
pub const FAITHFUL_TOL: f64 = 1e-10;

/// Finite group given by its multiplication table on `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    generators: Vec<usize>,
}

impl FiniteGroup {
    /// Accepts any square table; the group axioms are checked by
    /// [`FiniteGroup::axioms_report`].
    pub fn new(table: Vec<Vec<usize>>, generators: Vec<usize>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty multiplication table".into()));
        }
        if let Some(row) = table.iter().find(|r| r.len() != n) {
            return Err(Error::InvalidGroup(format!(
                "multiplication table row has {} entries, expected {n}",
                row.len()
            )));
        }
        if let Some(&g) = generators.iter().find(|&&g| g >= n) {
            return Err(Error::InvalidGroup(format!("generator {g} out of range")));
        }
        Ok(Self { table, generators })
    }

    pub fn trivial() -> Self {
        Self {
            table: vec![vec![0]],
            generators: Vec::new(),
        }
    }

    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
        let generators = if n > 1 { vec![1] } else { Vec::new() };
        Self { table, generators }
    }

    /// Z_2 × Z_2 with elements `{e, x, z, xz}` multiplied by XOR.
    pub fn klein_four() -> Self {
        let table = (0..4).map(|i| (0..4).map(|j| i ^ j).collect()).collect();
        Self {
            table,
            generators: vec![1, 2],
        }
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.table[g][h]
    }

    pub fn identity(&self) -> Option<usize> {
        let n = self.order();
        (0..n).find(|&e| (0..n).all(|g| self.table[e][g] == g && self.table[g][e] == g))
    }

    /// Closure, associativity, identity, inverses and generation, each
    /// reported separately. Closure failures are reported under
    /// associativity since the product is then undefined.
    pub fn axioms_report(&self) -> ValidationReport {
        let n = self.order();
        let mut report = ValidationReport::new();
        let closed = self.table.iter().flatten().all(|&x| x < n);
        let mut bad_triples = 0usize;
        if closed {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if self.table[self.table[a][b]][c] != self.table[a][self.table[b][c]] {
                            bad_triples += 1;
                        }
                    }
                }
            }
        }
        if closed {
            report.push("group associativity", bad_triples as f64, 0.0);
        } else {
            report.push_with_detail(
                "group associativity",
                false,
                f64::INFINITY,
                "multiplication table is not closed",
            );
        }
        let identity = if closed { self.identity() } else { None };
        report.push_flag("group identity", identity.is_some());
        let inverses = identity.is_some_and(|e| {
            (0..n).all(|g| (0..n).any(|h| self.table[g][h] == e && self.table[h][g] == e))
        });
        report.push_flag("group inverses", inverses);
        let generated = closed && identity.is_some() && self.reachable().len() == n;
        report.push_flag("group generation", generated);
        report
    }

    /// Elements reachable from the identity by right multiplication with
    /// generators, each with the (parent, generator) that reached it.
    fn reachable(&self) -> Vec<(usize, Option<(usize, usize)>)> {
        let Some(e) = self.identity() else {
            return Vec::new();
        };
        let mut seen = vec![false; self.order()];
        let mut order = vec![(e, None)];
        seen[e] = true;
        let mut queue = VecDeque::from([e]);
        while let Some(g) = queue.pop_front() {
            for &s in &self.generators {
                let gs = self.table[g][s];
                if !seen[gs] {
                    seen[gs] = true;
                    order.push((gs, Some((g, s))));
                    queue.push_back(gs);
                }
            }
        }
        order
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Group {
    Finite(FiniteGroup),
    /// The integers, acting through powers of one automorphism.
    Integers,
}

impl From<FiniteGroup> for Group {
    fn from(g: FiniteGroup) -> Self {
        Group::Finite(g)
    }
}

/// Coordinate matrix of `a ↦ u a u†` on `algebra`.
pub fn inner_automorphism(algebra: &MatrixAlgebra, u: &CMatrix) -> Result<CMatrix> {
    let d = algebra.hilbert_dim();
    if u.shape() != (d, d) {
        return Err(dim_mismatch(format!("{d}x{d}"), format!("{}x{}", u.rows(), u.cols())));
    }
    u.check_finite()?;
    let ua = u.adjoint();
    let cols: Vec<Vec<C64>> = algebra
        .basis()
        .iter()
        .map(|b| algebra.coords(&u.matmul(b).matmul(&ua)))
        .collect();
    CMatrix::from_columns(algebra.dim(), &cols)
}

/// A representation of a group by linear maps on algebra coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupAction {
    group: Group,
    dim: usize,
    /// Finite: one map per element. Integers: `[generator, inverse]`.
    maps: Vec<CMatrix>,
    /// Unitaries the action was built from, keyed by element (Integers: key 1).
    unitaries: Vec<(usize, CMatrix)>,
}

impl GroupAction {
    pub fn identity(group: Group, dim: usize) -> Self {
        let count = match &group {
            Group::Finite(g) => g.order(),
            Group::Integers => 2,
        };
        Self {
            group,
            dim,
            maps: vec![CMatrix::identity(dim); count],
            unitaries: Vec::new(),
        }
    }

    /// Finite action from explicitly given element maps; every other element
    /// is derived through the multiplication table.
    pub fn finite_from_maps(group: FiniteGroup, dim: usize, given: &[(usize, CMatrix)]) -> Result<Self> {
        let axioms = group.axioms_report();
        if let Some(fail) = axioms.first_failure() {
            return Err(Error::InvalidGroup(fail.name.clone()));
        }
        let n = group.order();
        let mut maps: Vec<Option<CMatrix>> = vec![None; n];
        for (g, m) in given {
            if *g >= n {
                return Err(Error::InvalidAction(format!("element {g} out of range")));
            }
            if m.shape() != (dim, dim) {
                return Err(dim_mismatch(format!("{dim}x{dim}"), format!("{}x{}", m.rows(), m.cols())));
            }
            m.check_finite()?;
            maps[*g] = Some(m.clone());
        }
        for &s in group.generators() {
            if maps[s].is_none() {
                return Err(Error::InvalidAction(format!("no map given for generator {s}")));
            }
        }
        let e = group.identity().expect("axioms checked");
        if maps[e].is_none() {
            maps[e] = Some(CMatrix::identity(dim));
        }
        for (g, parent) in group.reachable() {
            if maps[g].is_some() {
                continue;
            }
            let (p, s) = parent.expect("non-identity elements have a parent");
            let derived = maps[p].as_ref().expect("parents come first").matmul(maps[s].as_ref().expect("generator"));
            maps[g] = Some(derived);
        }
        Ok(Self {
            group: Group::Finite(group),
            dim,
            maps: maps.into_iter().map(|m| m.expect("all elements reached")).collect(),
            unitaries: Vec::new(),
        })
    }

    /// Finite action by inner automorphisms `Ad(u_g)`.
    pub fn finite_from_unitaries(
        group: FiniteGroup,
        algebra: &MatrixAlgebra,
        unitaries: &[(usize, CMatrix)],
    ) -> Result<Self> {
        let maps = unitaries
            .iter()
            .map(|(g, u)| Ok((*g, inner_automorphism(algebra, u)?)))
            .collect::<Result<Vec<_>>>()?;
        let mut action = Self::finite_from_maps(group, algebra.dim(), &maps)?;
        action.unitaries = unitaries.to_vec();
        Ok(action)
    }

    /// Z action generated by one invertible map.
    pub fn integers_from_map(generator: CMatrix) -> Result<Self> {
        generator.check_square()?;
        let inverse = generator
            .inverse()
            .map_err(|_| Error::InvalidAction("generating map is not bijective".into()))?;
        Ok(Self {
            group: Group::Integers,
            dim: generator.rows(),
            maps: vec![generator, inverse],
            unitaries: Vec::new(),
        })
    }

    pub fn integers_from_unitary(algebra: &MatrixAlgebra, u: &CMatrix) -> Result<Self> {
        let mut action = Self::integers_from_map(inner_automorphism(algebra, u)?)?;
        action.unitaries = vec![(1, u.clone())];
        Ok(action)
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn unitaries(&self) -> &[(usize, CMatrix)] {
        &self.unitaries
    }

    /// Maps of the group generators; invariance under these is invariance
    /// under the whole group.
    pub fn generator_maps(&self) -> Vec<&CMatrix> {
        match &self.group {
            Group::Finite(g) => g.generators().iter().map(|&s| &self.maps[s]).collect(),
            Group::Integers => vec![&self.maps[0]],
        }
    }

    /// Map of a finite-group element.
    pub fn element_map(&self, g: usize) -> Option<&CMatrix> {
        match &self.group {
            Group::Finite(_) => self.maps.get(g),
            Group::Integers => None,
        }
    }

    /// `α^n` for Z actions, or `α_g` for `g = n` in a finite group.
    pub fn power(&self, n: i64) -> CMatrix {
        match &self.group {
            Group::Finite(_) => self.maps[n as usize].clone(),
            Group::Integers => {
                let base = if n >= 0 { &self.maps[0] } else { &self.maps[1] };
                let mut out = CMatrix::identity(self.dim);
                for _ in 0..n.unsigned_abs() {
                    out = base.matmul(&out);
                }
                out
            }
        }
    }

    /// Every element for finite groups; powers `-Z_HORIZON..=Z_HORIZON` for Z.
    pub fn check_maps(&self) -> Vec<(String, CMatrix)> {
        match &self.group {
            Group::Finite(_) => self
                .maps
                .iter()
                .enumerate()
                .map(|(g, m)| (format!("g={g}"), m.clone()))
                .collect(),
            Group::Integers => (-Z_HORIZON..=Z_HORIZON)
                .map(|n| (format!("n={n}"), self.power(n)))
                .collect(),
        }
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        let id = CMatrix::identity(self.dim);
        self.maps.iter().all(|m| m.max_abs_diff(&id) <= tol)
    }

    /// Same group as `other`: equal tables and generators, or both Z.
    pub fn same_group(&self, other: &GroupAction) -> bool {
        self.group == other.group
    }

    /// Applies a coordinate map to an algebra element.
    pub fn apply(algebra: &MatrixAlgebra, map: &CMatrix, x: &CMatrix) -> CMatrix {
        algebra.element(&map.mul_vec(&algebra.coords(x)))
    }

    /// Automorphism and representation checks on `algebra`.
    pub fn report(&self, algebra: &MatrixAlgebra, tol: f64) -> ValidationReport {
        let mut report = ValidationReport::new();
        if self.dim != algebra.dim() {
            report.push_with_detail(
                "action dimension",
                false,
                f64::INFINITY,
                format!("action on {} coordinates, algebra has {}", self.dim, algebra.dim()),
            );
            return report;
        }
        let maps = self.check_maps();
        let one = algebra.identity_coords();
        let basis = algebra.basis();
        let (mut unital, mut star, mut mult, mut bij): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
        for (_, t) in &maps {
            let img1 = t.mul_vec(&one);
            unital = unital.max(crate::numerics::norm(&crate::numerics::vec_sub(&img1, &one)));
            let images: Vec<CMatrix> = basis.iter().map(|b| Self::apply(algebra, t, b)).collect();
            for (b, img) in basis.iter().zip(&images) {
                let lhs = Self::apply(algebra, t, &b.adjoint());
                star = star.max((&lhs - &img.adjoint()).frobenius_norm());
            }
            for (i, bi) in basis.iter().enumerate() {
                for (j, bj) in basis.iter().enumerate() {
                    let lhs = Self::apply(algebra, t, &bi.matmul(bj));
                    mult = mult.max((&lhs - &images[i].matmul(&images[j])).frobenius_norm());
                }
            }
            let s = svd(t).map(|s| s.singular_values).unwrap_or_default();
            let smin = s.iter().copied().fold(f64::INFINITY, f64::min);
            let smax = s.iter().copied().fold(0.0, f64::max);
            let defect = if smax == 0.0 { f64::INFINITY } else { (RANK_TOL * smax - smin).max(0.0) };
            bij = bij.max(defect);
        }
        report.push("action unital", unital, tol);
        report.push("action *-preserving", star, tol);
        report.push("action multiplicative", mult, tol);
        report.push("action bijective", bij, 0.0);

        let rep = match &self.group {
            Group::Finite(g) => {
                let mut worst: f64 = 0.0;
                for a in 0..g.order() {
                    for b in 0..g.order() {
                        let lhs = self.maps[a].matmul(&self.maps[b]);
                        worst = worst.max(lhs.max_abs_diff(&self.maps[g.mul(a, b)]));
                    }
                }
                worst
            }
            Group::Integers => self.maps[0]
                .matmul(&self.maps[1])
                .max_abs_diff(&CMatrix::identity(self.dim)),
        };
        report.push("action representation", rep, tol);
        report
    }
}

/// Normal state `a ↦ Tr(ρ a)` given by a density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct QState {
    rho: CMatrix,
}

impl QState {
    pub fn new(rho: CMatrix) -> Result<Self> {
        rho.check_square()?;
        rho.check_finite()?;
        Ok(Self { rho })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            rho: CMatrix::identity(d).scale_real(1.0 / d as f64),
        }
    }

    pub fn rho(&self) -> &CMatrix {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.rows()
    }

    pub fn eval(&self, a: &CMatrix) -> C64 {
        let d = self.dim();
        let mut s = C64::new(0.0, 0.0);
        for i in 0..d {
            for k in 0..d {
                s += self.rho[(i, k)] * a[(k, i)];
            }
        }
        s
    }

    /// `[μ(b_i† b_j)]` over the algebra basis.
    pub fn gram(&self, algebra: &MatrixAlgebra) -> CMatrix {
        let basis = algebra.basis();
        CMatrix::from_fn(basis.len(), basis.len(), |i, j| {
            self.eval(&basis[i].adjoint().matmul(&basis[j]))
        })
    }

    pub fn min_gram_eigenvalue(&self, algebra: &MatrixAlgebra) -> f64 {
        hermitian_eig(&self.gram(algebra)).map(|e| e.min()).unwrap_or(f64::NEG_INFINITY)
    }

    pub fn is_faithful_on(&self, algebra: &MatrixAlgebra) -> bool {
        self.min_gram_eigenvalue(algebra) > FAITHFUL_TOL
    }

    pub fn report(&self, algebra: &MatrixAlgebra, tol: f64) -> ValidationReport {
        let mut report = ValidationReport::new();
        if self.dim() != algebra.hilbert_dim() {
            report.push_with_detail(
                "state dimension",
                false,
                f64::INFINITY,
                format!("density is {0}x{0}, algebra acts on C^{1}", self.dim(), algebra.hilbert_dim()),
            );
            return report;
        }
        report.push("state hermitian", self.rho.hermitian_defect(), tol);
        let min_eig = hermitian_eig(&self.rho).map(|e| e.min()).unwrap_or(f64::NEG_INFINITY);
        report.push("state positivity", (-min_eig).max(0.0), tol);
        report.push("state normalization", (self.rho.trace() - C64::new(1.0, 0.0)).norm(), tol);
        let g = self.min_gram_eigenvalue(algebra);
        report.push_with_detail(
            "state faithfulness",
            g > FAITHFUL_TOL,
            g,
            "min eigenvalue of the Gram matrix over the algebra basis",
        );
        report
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DynamicalSystem {
    pub algebra: MatrixAlgebra,
    pub state: QState,
    pub action: GroupAction,
}

impl DynamicalSystem {
    pub fn new(algebra: MatrixAlgebra, state: QState, action: GroupAction) -> Result<Self> {
        if state.dim() != algebra.hilbert_dim() {
            return Err(dim_mismatch(algebra.hilbert_dim(), state.dim()));
        }
        if action.dim() != algebra.dim() {
            return Err(dim_mismatch(algebra.dim(), action.dim()));
        }
        Ok(Self {
            algebra,
            state,
            action,
        })
    }

    /// `μ(b)` for every basis element.
    pub fn state_on_basis(&self) -> Vec<C64> {
        self.algebra.basis().iter().map(|b| self.state.eval(b)).collect()
    }

    /// Same algebra and state with the identity action of `group`.
    pub fn with_identity_action(&self, group: Group) -> Self {
        Self {
            algebra: self.algebra.clone(),
            state: self.state.clone(),
            action: GroupAction::identity(group, self.algebra.dim()),
        }
    }

    pub fn is_identity_system(&self) -> bool {
        self.action.is_identity(DEFAULT_TOL)
    }
}

pub fn validate_system(sys: &DynamicalSystem) -> ValidationReport {
    validate_system_with_tol(sys, DEFAULT_TOL)
}

pub fn validate_system_with_tol(sys: &DynamicalSystem, tol: f64) -> ValidationReport {
    let mut report = sys.algebra.closure_report(tol);
    report.extend(sys.state.report(&sys.algebra, tol));
    if let Group::Finite(g) = sys.action.group() {
        report.extend(g.axioms_report());
    }
    report.extend(sys.action.report(&sys.algebra, tol));

    let mu = sys.state_on_basis();
    let mut inv: f64 = 0.0;
    for (_, t) in sys.action.check_maps() {
        for (j, b) in sys.algebra.basis().iter().enumerate() {
            let img = GroupAction::apply(&sys.algebra, &t, b);
            inv = inv.max((sys.state.eval(&img) - mu[j]).norm());
        }
    }
    report.push("state invariance", inv, tol);
    report
}

fn require_valid(sys: &DynamicalSystem) -> Result<()> {
    let report = validate_system(sys);
    match report.first_failure() {
        Some(c) => Err(Error::InvalidArgument(format!(
            "invalid dynamical system: {} (residual {:.3e})",
            c.name, c.residual
        ))),
        None => Ok(()),
    }
}

/// The fixed point algebra `A_α` of a validated system.
pub fn fixed_points(sys: &DynamicalSystem) -> Result<MatrixAlgebra> {
    fixed_point_algebra(&sys.algebra, &sys.action)
}

pub fn is_ergodic(sys: &DynamicalSystem) -> Result<bool> {
    require_valid(sys)?;
    Ok(is_trivial(&fixed_points(sys)?))
}

/// `(A, μ, id)` over the trivial group.
pub fn identity_system(algebra: MatrixAlgebra, state: QState) -> Result<DynamicalSystem> {
    if state.dim() != algebra.hilbert_dim() {
        return Err(dim_mismatch(algebra.hilbert_dim(), state.dim()));
    }
    let g = state.min_gram_eigenvalue(&algebra);
    if g <= FAITHFUL_TOL {
        return Err(Error::NotFaithful { min_eig: g });
    }
    let action = GroupAction::identity(FiniteGroup::trivial().into(), algebra.dim());
    DynamicalSystem::new(algebra, state, action)
}

/// An embedding `h: F → A` of one system into another.
#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    pub source: DynamicalSystem,
    pub target: DynamicalSystem,
    /// `dim(A) x dim(F)` coordinate matrix of `h`.
    pub h: CMatrix,
}

impl Factor {
    pub fn new(source: DynamicalSystem, target: DynamicalSystem, h: CMatrix) -> Result<Self> {
        if h.shape() != (target.algebra.dim(), source.algebra.dim()) {
            return Err(dim_mismatch(
                format!("{}x{}", target.algebra.dim(), source.algebra.dim()),
                format!("{}x{}", h.rows(), h.cols()),
            ));
        }
        if !source.action.same_group(&target.action) {
            return Err(Error::GroupMismatch);
        }
        Ok(Self { source, target, h })
    }

    /// `h(x)` as a matrix in the target algebra.
    pub fn embed(&self, x: &CMatrix) -> CMatrix {
        self.target
            .algebra
            .element(&self.h.mul_vec(&self.source.algebra.coords(x)))
    }
}

/// `A_α` with the restricted state and identity action, included in `A`.
pub fn fixed_point_factor(sys: &DynamicalSystem) -> Result<Factor> {
    let fixed = fixed_points(sys)?;
    let h_cols: Vec<Vec<C64>> = fixed.basis().iter().map(|b| sys.algebra.coords(b)).collect();
    let h = CMatrix::from_columns(sys.algebra.dim(), &h_cols)?;
    let action = GroupAction::identity(sys.action.group().clone(), fixed.dim());
    let source = DynamicalSystem::new(fixed, sys.state.clone(), action)?;
    Factor::new(source, sys.clone(), h)
}

pub fn validate_factor(f: &Factor) -> ValidationReport {
    validate_factor_with_tol(f, DEFAULT_TOL)
}

pub fn validate_factor_with_tol(f: &Factor, tol: f64) -> ValidationReport {
    let mut report = ValidationReport::new();
    let fa = &f.source.algebra;
    let rank = svd(&f.h).map(|s| s.rank(RANK_TOL)).unwrap_or(0);
    report.push_with_detail(
        "factor injective",
        rank == fa.dim(),
        (fa.dim() - rank.min(fa.dim())) as f64,
        format!("rank {rank} of {}", fa.dim()),
    );
    let one = CMatrix::identity(f.target.algebra.hilbert_dim());
    report.push(
        "factor unital",
        (&f.embed(&CMatrix::identity(fa.hilbert_dim())) - &one).frobenius_norm(),
        tol,
    );
    let images: Vec<CMatrix> = fa.basis().iter().map(|b| f.embed(b)).collect();
    let mut hom: f64 = 0.0;
    for (i, bi) in fa.basis().iter().enumerate() {
        hom = hom.max((&f.embed(&bi.adjoint()) - &images[i].adjoint()).frobenius_norm());
        for (j, bj) in fa.basis().iter().enumerate() {
            let lhs = f.embed(&bi.matmul(bj));
            hom = hom.max((&lhs - &images[i].matmul(&images[j])).frobenius_norm());
        }
    }
    report.push("factor *-homomorphism", hom, tol);
    let mut state: f64 = 0.0;
    for (b, img) in fa.basis().iter().zip(&images) {
        state = state.max((f.target.state.eval(img) - f.source.state.eval(b)).norm());
    }
    report.push("factor state intertwining", state, tol);
    let mut act: f64 = 0.0;
    if f.source.action.same_group(&f.target.action) {
        let src = f.source.action.check_maps();
        let dst = f.target.action.check_maps();
        for ((_, ts), (_, tt)) in src.iter().zip(&dst) {
            act = act.max(tt.matmul(&f.h).max_abs_diff(&f.h.matmul(ts)));
        }
        report.push("factor action intertwining", act, tol);
    } else {
        report.push_with_detail("factor action intertwining", false, f64::INFINITY, "different groups");
    }
    report
}
