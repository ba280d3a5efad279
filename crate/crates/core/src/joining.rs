//! Joinings as states on the algebraic tensor product `A ⊙ B`, and the
//! conditional expectation operator `P_ω` of their GNS representation.
//!
//! A functional is stored by its values `V[p][r] = ω(a_p ⊗ b_r)` on the
//! product of the two algebra bases. The product basis index of
//! `a_p ⊗ b_r` is `p·dim(B) + r`, matching [`CMatrix::kron`].

use crate::error::{Error, Result};
use crate::numerics::{
    dot, hermitian_eig, norm, orthonormalize, pseudo_inverse, svd, vec_sub, CMatrix, C64,
    DEFAULT_TOL, RANK_TOL,
};
use crate::report::ValidationReport;
use crate::system::{DynamicalSystem, GroupAction};

/// Gram matrices with an eigenvalue below `-POSITIVITY_TOL` are not states.
pub const POSITIVITY_TOL: f64 = 1e-8;
pub const INTERTWINING_TOL: f64 = 1e-8;
/// Principal-angle cosine cutoff for `H_μ ∩ H_ν`.
pub const ANGLE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct JoiningFunctional {
    values: CMatrix,
}

impl JoiningFunctional {
    pub fn new(values: CMatrix) -> Result<Self> {
        values.check_finite()?;
        Ok(Self { values })
    }

    pub fn values(&self) -> &CMatrix {
        &self.values
    }

    pub fn dims(&self) -> (usize, usize) {
        self.values.shape()
    }

    /// `ω(a_p ⊗ b_r)`
    pub fn value(&self, p: usize, r: usize) -> C64 {
        self.values[(p, r)]
    }

    /// Values as a vector over the product basis.
    pub fn as_vector(&self) -> Vec<C64> {
        self.values.data().to_vec()
    }

    pub fn from_vector(dim_a: usize, dim_b: usize, v: Vec<C64>) -> Result<Self> {
        Self::new(CMatrix::from_vec(dim_a, dim_b, v)?)
    }

    /// `ω(x ⊗ y) = coords(x)ᵀ V coords(y)`
    pub fn eval_coords(&self, x: &[C64], y: &[C64]) -> C64 {
        let vy = self.values.mul_vec(y);
        x.iter().zip(&vy).map(|(a, b)| a * b).sum()
    }

    pub fn eval(&self, a: &DynamicalSystem, b: &DynamicalSystem, x: &CMatrix, y: &CMatrix) -> C64 {
        self.eval_coords(&a.algebra.coords(x), &b.algebra.coords(y))
    }

    /// `G[(p,r),(q,s)] = ω(a_p† a_q ⊗ b_r† b_s)`
    pub fn gram(&self, a: &DynamicalSystem, b: &DynamicalSystem) -> CMatrix {
        gram_from_tables(&a.algebra.star_products(), &b.algebra.star_products(), &self.values)
    }

    /// `max |ω(a_p ⊗ b_r) − μ(a_p)ν(b_r)|` and where it is attained.
    pub fn product_deviation(&self, a: &DynamicalSystem, b: &DynamicalSystem) -> (f64, usize, usize) {
        let mu = a.state_on_basis();
        let nu = b.state_on_basis();
        let mut best = (0.0, 0, 0);
        for (p, m) in mu.iter().enumerate() {
            for (r, n) in nu.iter().enumerate() {
                let d = (self.values[(p, r)] - m * n).norm();
                if d > best.0 {
                    best = (d, p, r);
                }
            }
        }
        best
    }
}

pub(crate) fn gram_from_tables(ga: &[Vec<Vec<C64>>], gb: &[Vec<Vec<C64>>], v: &CMatrix) -> CMatrix {
    let (da, db) = (ga.len(), gb.len());
    let n = da * db;
    // W[r][s] = V Γ^B_{rs}, then G = Γ^A_{pq}ᵀ W[r][s].
    let w: Vec<Vec<Vec<C64>>> = (0..db)
        .map(|r| (0..db).map(|s| v.mul_vec(&gb[r][s])).collect())
        .collect();
    let mut g = CMatrix::zeros(n, n);
    for p in 0..da {
        for q in 0..da {
            let gpq = &ga[p][q];
            for r in 0..db {
                for s in 0..db {
                    g[(p * db + r, q * db + s)] = gpq.iter().zip(&w[r][s]).map(|(x, y)| x * y).sum();
                }
            }
        }
    }
    g
}

/// Pairs of generator maps `(α_g, β_g)`. A side whose action is the
/// identity is lifted to the other side's group.
pub fn generator_pairs(a: &GroupAction, b: &GroupAction) -> Result<Vec<(CMatrix, CMatrix)>> {
    if a.same_group(b) {
        return Ok(a
            .generator_maps()
            .into_iter()
            .zip(b.generator_maps())
            .map(|(x, y)| (x.clone(), y.clone()))
            .collect());
    }
    if b.is_identity(DEFAULT_TOL) {
        let id = CMatrix::identity(b.dim());
        return Ok(a.generator_maps().into_iter().map(|x| (x.clone(), id.clone())).collect());
    }
    if a.is_identity(DEFAULT_TOL) {
        let id = CMatrix::identity(a.dim());
        return Ok(b.generator_maps().into_iter().map(|y| (id.clone(), y.clone())).collect());
    }
    Err(Error::GroupMismatch)
}

pub fn product_joining(a: &DynamicalSystem, b: &DynamicalSystem) -> Result<JoiningFunctional> {
    generator_pairs(&a.action, &b.action)?;
    let mu = a.state_on_basis();
    let nu = b.state_on_basis();
    JoiningFunctional::new(CMatrix::from_fn(mu.len(), nu.len(), |p, r| mu[p] * nu[r]))
}

fn check_dims(w: &JoiningFunctional, a: &DynamicalSystem, b: &DynamicalSystem) -> Result<()> {
    let want = (a.algebra.dim(), b.algebra.dim());
    if w.dims() != want {
        return Err(crate::error::dim_mismatch(
            format!("{}x{}", want.0, want.1),
            format!("{}x{}", w.dims().0, w.dims().1),
        ));
    }
    Ok(())
}

/// Largest `|ω∘(α_g⊗β_g) − ω|` over generators and basis products.
pub fn invariance_residual(w: &JoiningFunctional, a: &DynamicalSystem, b: &DynamicalSystem) -> Result<f64> {
    check_dims(w, a, b)?;
    let mut res: f64 = 0.0;
    for (ta, tb) in generator_pairs(&a.action, &b.action)? {
        let moved = ta.transpose().matmul(w.values()).matmul(&tb);
        res = res.max(moved.max_abs_diff(w.values()));
    }
    Ok(res)
}

/// Largest marginal defect `(|ω(a⊗1) − μ(a)|, |ω(1⊗b) − ν(b)|)`.
pub fn marginal_residuals(w: &JoiningFunctional, a: &DynamicalSystem, b: &DynamicalSystem) -> (f64, f64) {
    let left = w.values().mul_vec(&b.algebra.identity_coords());
    let right = w.values().transpose().mul_vec(&a.algebra.identity_coords());
    let ra = left
        .iter()
        .zip(a.state_on_basis())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    let rb = right
        .iter()
        .zip(b.state_on_basis())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    (ra, rb)
}

pub fn verify_joining(w: &JoiningFunctional, a: &DynamicalSystem, b: &DynamicalSystem) -> ValidationReport {
    verify_joining_with_tol(w, a, b, DEFAULT_TOL)
}

pub fn verify_joining_with_tol(
    w: &JoiningFunctional,
    a: &DynamicalSystem,
    b: &DynamicalSystem,
    tol: f64,
) -> ValidationReport {
    let mut report = ValidationReport::new();
    if let Err(e) = check_dims(w, a, b) {
        report.push_with_detail("joining dimensions", false, f64::INFINITY, e.to_string());
        return report;
    }
    let v = w.values();
    let adj = a.algebra.adjoint_matrix().transpose().matmul(v).matmul(&b.algebra.adjoint_matrix());
    report.push("joining self-adjointness", adj.max_abs_diff(&v.conj()), tol);
    let one = w.eval_coords(&a.algebra.identity_coords(), &b.algebra.identity_coords());
    report.push("joining normalization", (one - C64::new(1.0, 0.0)).norm(), tol.min(1e-10));
    let gram = w.gram(a, b).hermitian_part();
    let min = hermitian_eig(&gram).map(|e| e.min()).unwrap_or(f64::NEG_INFINITY);
    report.push_with_detail(
        "joining positivity",
        min >= -POSITIVITY_TOL,
        (-min).max(0.0),
        format!("min Gram eigenvalue {min:.3e}"),
    );
    let (ra, rb) = marginal_residuals(w, a, b);
    report.push("joining marginal A", ra, tol);
    report.push("joining marginal B", rb, tol);
    match invariance_residual(w, a, b) {
        Ok(r) => {
            report.push("joining invariance", r, tol);
        }
        Err(e) => report.push_with_detail("joining invariance", false, f64::INFINITY, e.to_string()),
    }
    report
}

/// GNS data of `(A ⊙ B, ω)`. Vectors live in `H_ω = C^m` in the orthonormal
/// coordinates produced by Gram-Schmidt over the product basis.
#[derive(Clone, Debug)]
pub struct CondExpData {
    /// Columns `γ_ω(a_p ⊗ b_r)`, `m x dim(A)dim(B)`.
    pub gamma_omega: CMatrix,
    pub omega: Vec<C64>,
    /// Columns `γ_μ(a_p) = γ_ω(a_p ⊗ 1)`.
    pub gamma_mu: CMatrix,
    /// Columns `γ_ν(b_r) = γ_ω(1 ⊗ b_r)`.
    pub gamma_nu: CMatrix,
    /// Orthonormal frame of `H_μ` (columns).
    pub frame_mu: CMatrix,
    pub frame_nu: CMatrix,
    /// `P_ω: H_μ → H_ν` in frame coordinates.
    pub p_omega: CMatrix,
    /// Per generator, in frame coordinates of `H_μ` and `H_ν`.
    pub u: Vec<CMatrix>,
    pub v: Vec<CMatrix>,
    /// Per generator on `H_ω`; present only for invariant `ω`.
    pub w: Option<Vec<CMatrix>>,
    mu_gram: CMatrix,
    nu_gram: CMatrix,
}

impl CondExpData {
    pub fn h_omega_dim(&self) -> usize {
        self.gamma_omega.rows()
    }

    /// `γ_ω(t)` for coordinates over the product basis.
    pub fn gamma(&self, t: &[C64]) -> Vec<C64> {
        self.gamma_omega.mul_vec(t)
    }

    /// `P_ω γ_μ(a)` as a vector of `H_ω`.
    pub fn apply_p(&self, x: &[C64]) -> Vec<C64> {
        let coords = self.frame_mu.adjoint().mul_vec(x);
        self.frame_nu.mul_vec(&self.p_omega.mul_vec(&coords))
    }

    pub fn report(&self, tol: f64) -> ValidationReport {
        let mut report = ValidationReport::new();
        let (km, kn) = (self.frame_mu.cols(), self.frame_nu.cols());
        let mut inner: f64 = 0.0;
        for i in 0..km {
            let x = self.frame_mu.column(i);
            let px = self.apply_p(&x);
            for j in 0..kn {
                let y = self.frame_nu.column(j);
                inner = inner.max((dot(&px, &y) - dot(&x, &y)).norm());
            }
        }
        report.push("condexp <P x, y> = <x, y>", inner, tol);
        report.push(
            "condexp P omega = omega",
            norm(&vec_sub(&self.apply_p(&self.omega), &self.omega)),
            tol,
        );
        let ga = self.gamma_mu.adjoint().matmul(&self.gamma_mu);
        report.push("condexp gns consistency A", ga.max_abs_diff(&self.mu_gram), tol);
        let gb = self.gamma_nu.adjoint().matmul(&self.gamma_nu);
        report.push("condexp gns consistency B", gb.max_abs_diff(&self.nu_gram), tol);
        if let Some(ws) = &self.w {
            let (mut rmu, mut rnu): (f64, f64) = (0.0, 0.0);
            for ((w, u), v) in ws.iter().zip(&self.u).zip(&self.v) {
                rmu = rmu.max(w.matmul(&self.frame_mu).max_abs_diff(&self.frame_mu.matmul(u)));
                rnu = rnu.max(w.matmul(&self.frame_nu).max_abs_diff(&self.frame_nu.matmul(v)));
            }
            report.push("condexp W|H_mu = U", rmu, tol);
            report.push("condexp W|H_nu = V", rnu, tol);
        }
        report
    }
}

fn state_gram(sys: &DynamicalSystem) -> CMatrix {
    sys.state.gram(&sys.algebra)
}

fn columns_matrix(rows: usize, cols: &[Vec<C64>]) -> CMatrix {
    if cols.is_empty() {
        return CMatrix::zeros(rows, 0);
    }
    CMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

/// Coordinate map `T` transported to a frame: `F† Γ T Γ⁺ F`.
fn transported(gamma: &CMatrix, gamma_pinv: &CMatrix, frame: &CMatrix, t: &CMatrix) -> CMatrix {
    frame.adjoint().matmul(gamma).matmul(t).matmul(gamma_pinv).matmul(frame)
}

/// GNS representation of `ω` with the subspaces `H_μ`, `H_ν` and `P_ω`.
/// Invariance is not required; `W_g` is only built when it holds.
pub fn gns_of_functional(w: &JoiningFunctional, a: &DynamicalSystem, b: &DynamicalSystem) -> Result<CondExpData> {
    check_dims(w, a, b)?;
    let (da, db) = w.dims();
    let n = da * db;
    let gram = w.gram(a, b).hermitian_part();
    let eig = hermitian_eig(&gram)?;
    if eig.min() < -POSITIVITY_TOL {
        return Err(Error::NotPositive { min_eig: eig.min() });
    }
    // Null directions are cut on the ⟨t, t⟩ scale; a square root of rounding
    // noise would otherwise survive as a spurious dimension.
    let cut = DEFAULT_TOL * eig.max().max(1.0);
    let root = eig.apply_fn(|x| if x > cut { x.sqrt() } else { 0.0 });
    let features = root.columns();
    let q = orthonormalize(&features, DEFAULT_TOL)?;
    let m = q.len();
    let qm = columns_matrix(n, &q);
    let gamma_omega = qm.adjoint().matmul(&root);

    let one_a = a.algebra.identity_coords();
    let one_b = b.algebra.identity_coords();
    let embed_a = CMatrix::identity(da).kron(&columns_matrix(db, std::slice::from_ref(&one_b)));
    let embed_b = columns_matrix(da, std::slice::from_ref(&one_a)).kron(&CMatrix::identity(db));
    let gamma_mu = gamma_omega.matmul(&embed_a);
    let gamma_nu = gamma_omega.matmul(&embed_b);
    let omega = gamma_omega.mul_vec(&kron_vec(&one_a, &one_b));

    let frame_mu = columns_matrix(m, &orthonormalize(&gamma_mu.columns(), DEFAULT_TOL)?);
    let frame_nu = columns_matrix(m, &orthonormalize(&gamma_nu.columns(), DEFAULT_TOL)?);
    let p_omega = frame_nu.adjoint().matmul(&frame_mu);

    let pairs = generator_pairs(&a.action, &b.action)?;
    let mu_pinv = pseudo_inverse(&gamma_mu, RANK_TOL)?;
    let nu_pinv = pseudo_inverse(&gamma_nu, RANK_TOL)?;
    let u = pairs
        .iter()
        .map(|(ta, _)| transported(&gamma_mu, &mu_pinv, &frame_mu, ta))
        .collect();
    let v = pairs
        .iter()
        .map(|(_, tb)| transported(&gamma_nu, &nu_pinv, &frame_nu, tb))
        .collect();
    let w_ops = if invariance_residual(w, a, b)? <= DEFAULT_TOL {
        let pinv = pseudo_inverse(&gamma_omega, RANK_TOL)?;
        Some(
            pairs
                .iter()
                .map(|(ta, tb)| gamma_omega.matmul(&ta.kron(tb)).matmul(&pinv))
                .collect(),
        )
    } else {
        None
    };
    Ok(CondExpData {
        gamma_omega,
        omega,
        gamma_mu,
        gamma_nu,
        frame_mu,
        frame_nu,
        p_omega,
        u,
        v,
        w: w_ops,
        mu_gram: state_gram(a),
        nu_gram: state_gram(b),
    })
}

fn kron_vec(x: &[C64], y: &[C64]) -> Vec<C64> {
    x.iter().flat_map(|a| y.iter().map(move |b| a * b)).collect()
}

/// `max_g ‖P_ω U_g − V_g P_ω‖_F`
pub fn intertwining_residual(ce: &CondExpData) -> f64 {
    ce.u
        .iter()
        .zip(&ce.v)
        .map(|(u, v)| (&ce.p_omega.matmul(u) - &v.matmul(&ce.p_omega)).frobenius_norm())
        .fold(0.0, f64::max)
}

pub fn check_intertwining(ce: &CondExpData) -> bool {
    intertwining_residual(ce) <= INTERTWINING_TOL
}

/// Orthonormal frame of `H_μ ∩ H_ν`, the fixed space of `P_ω`, found from
/// principal angles between the two frames.
pub fn fixed_space_p(ce: &CondExpData) -> Result<Vec<Vec<C64>>> {
    let m = ce.frame_mu.adjoint().matmul(&ce.frame_nu);
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(Vec::new());
    }
    let dec = svd(&m)?;
    let kept: Vec<Vec<C64>> = dec
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s >= 1.0 - ANGLE_TOL)
        .map(|(k, _)| ce.frame_nu.mul_vec(&dec.v.column(k)))
        .collect();
    orthonormalize(&kept, DEFAULT_TOL)
}

/// Whether `frame` spans exactly `C·Ω`.
pub fn is_omega_line(frame: &[Vec<C64>], omega: &[C64]) -> bool {
    if frame.len() != 1 {
        return false;
    }
    let overlap = dot(&frame[0], omega).norm();
    (overlap - norm(omega)).abs() <= 1e-8
}
