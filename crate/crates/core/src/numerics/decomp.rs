//! Jacobi-family decompositions on dense complex matrices.

use crate::error::{dim_mismatch, Error, Result};

use super::matrix::{axpy, dot, norm, CMatrix, C64, ZERO};

const MAX_SWEEPS: usize = 100;
const EIG_THRESHOLD: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct HermitianEig {
    /// Ascending.
    pub values: Vec<f64>,
    /// Unitary; column `k` is the eigenvector for `values[k]`.
    pub vectors: CMatrix,
}

impl HermitianEig {
    pub fn reconstruct(&self) -> CMatrix {
        self.apply_fn(|x| x)
    }

    /// `V f(Λ) V†`
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let fvals: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        CMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| v[(i, k)] * v[(j, k)].conj() * fvals[k])
                .sum()
        })
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Complex 2x2 Jacobi rotation annihilating the `(p, q)` entry of the
/// Hermitian block `[[app, apq], [conj(apq), aqq]]`.
///
/// Returns `(c, s·e^{iφ})`; the rotation is
/// `W = [[c, s·e^{iφ}], [-s·e^{-iφ}, c]]`.
fn jacobi_rotation(app: f64, aqq: f64, apq: C64) -> (f64, C64) {
    let abs = apq.norm();
    let phase = apq / abs;
    let zeta = (aqq - app) / (2.0 * abs);
    let t = if zeta == 0.0 {
        1.0
    } else {
        zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, phase * (t * c))
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi.
///
/// The input is symmetrized as `(M + M†)/2` first.
pub fn hermitian_eig(m: &CMatrix) -> Result<HermitianEig> {
    m.check_square()?;
    m.check_finite()?;
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = CMatrix::identity(n);
    let threshold = EIG_THRESHOLD * a.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.norm() <= f64::MIN_POSITIVE {
                    continue;
                }
                let (c, se) = jacobi_rotation(a[(p, p)].re, a[(q, q)].re, apq);
                let se_conj = se.conj();
                // A <- A W
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * se_conj;
                    a[(k, q)] = akp * se + akq * c;
                }
                // A <- W† A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * se;
                    a[(q, k)] = apk * se_conj + aqk * c;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * se_conj;
                    v[(k, q)] = vkp * se + vkq * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEig { values, vectors })
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    if m.rows() == 0 {
        return Ok(0.0);
    }
    Ok(hermitian_eig(m)?.min())
}

/// Frobenius-nearest positive semidefinite matrix: eigenvalues clipped at zero.
pub fn project_psd(m: &CMatrix) -> Result<CMatrix> {
    let eig = hermitian_eig(m)?;
    Ok(eig.apply_fn(|x| x.max(0.0)))
}

/// Orthonormal basis of the span of `vectors` by twice-iterated modified
/// Gram-Schmidt. Vectors whose residual norm after projection is at most
/// `tol` are dropped. Input order is preserved.
pub fn orthonormalize(vectors: &[Vec<C64>], tol: f64) -> Result<Vec<Vec<C64>>> {
    if tol <= 0.0 {
        return Err(Error::InvalidArgument("orthonormalize tolerance must be positive".into()));
    }
    let Some(first) = vectors.first() else {
        return Ok(Vec::new());
    };
    let len = first.len();
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        if v.len() != len {
            return Err(dim_mismatch(len, v.len()));
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                axpy(-c, b, &mut w);
            }
        }
        let nrm = norm(&w);
        if nrm > tol {
            basis.push(w.into_iter().map(|z| z / nrm).collect());
        }
    }
    Ok(basis)
}

/// Singular value decomposition in the form `A V = [σ_1 u_1, …]`.
#[derive(Clone, Debug)]
pub struct Svd {
    pub singular_values: Vec<f64>,
    /// Unitary `n x n`; columns are right singular vectors.
    pub v: CMatrix,
}

impl Svd {
    pub fn max_singular_value(&self) -> f64 {
        self.singular_values.iter().copied().fold(0.0, f64::max)
    }

    /// Right singular vectors with σ ≤ `rel_tol`·σ_max.
    pub fn null_vectors(&self, rel_tol: f64) -> Vec<Vec<C64>> {
        let cut = rel_tol * self.max_singular_value();
        self.singular_values
            .iter()
            .enumerate()
            .filter(|(_, &s)| s <= cut)
            .map(|(j, _)| self.v.column(j))
            .collect()
    }

    pub fn rank(&self, rel_tol: f64) -> usize {
        let cut = rel_tol * self.max_singular_value();
        self.singular_values.iter().filter(|&&s| s > cut).count()
    }
}

/// Upper-triangular factor of a Householder QR (`min(m, n) x n`).
fn householder_r(a: &CMatrix) -> CMatrix {
    let (m, n) = a.shape();
    let mut r = a.clone();
    for k in 0..n.min(m) {
        let x: Vec<C64> = (k..m).map(|i| r[(i, k)]).collect();
        let xnorm = norm(&x);
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            x[0] / x[0].norm()
        };
        let mut v = x;
        v[0] += phase * xnorm;
        let vnorm = norm(&v);
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        for j in k..n {
            let s: C64 = (k..m).map(|i| v[i - k].conj() * r[(i, j)]).sum();
            for i in k..m {
                r[(i, j)] -= v[i - k] * (s * 2.0);
            }
        }
    }
    let rows = m.min(n);
    CMatrix::from_fn(rows, n, |i, j| if j >= i { r[(i, j)] } else { ZERO })
}

/// One-sided (Hestenes) Jacobi SVD. Tall inputs are first reduced by QR.
pub fn svd(a: &CMatrix) -> Result<Svd> {
    a.check_finite()?;
    let (m, n) = a.shape();
    let mut b = if m > n { householder_r(a) } else { a.clone() };
    let rows = b.rows();
    let mut v = CMatrix::identity(n);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = ZERO;
                for i in 0..rows {
                    let bp = b[(i, p)];
                    let bq = b[(i, q)];
                    alpha += bp.norm_sqr();
                    beta += bq.norm_sqr();
                    gamma += bp.conj() * bq;
                }
                if alpha == 0.0 || beta == 0.0 || gamma.norm() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let (c, se) = jacobi_rotation(alpha, beta, gamma);
                let se_conj = se.conj();
                for i in 0..rows {
                    let bp = b[(i, p)];
                    let bq = b[(i, q)];
                    b[(i, p)] = bp * c - bq * se_conj;
                    b[(i, q)] = bp * se + bq * c;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = vp * c - vq * se_conj;
                    v[(i, q)] = vp * se + vq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let singular_values = (0..n)
        .map(|j| (0..rows).map(|i| b[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    Ok(Svd { singular_values, v })
}

/// Orthonormal basis of `{x : A x = 0}` with cutoff `rel_tol`·max(σ_max, 1).
///
/// The floor of 1 treats a matrix that is zero up to rounding, such as
/// `T − 1` for an automorphism acting trivially, as zero rather than as
/// full rank.
pub fn null_space(a: &CMatrix, rel_tol: f64) -> Result<Vec<Vec<C64>>> {
    let dec = svd(a)?;
    let cut = rel_tol * dec.max_singular_value().max(1.0);
    Ok(dec
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cut)
        .map(|(j, _)| dec.v.column(j))
        .collect())
}

/// Moore-Penrose pseudo-inverse with relative singular value cutoff.
pub fn pseudo_inverse(a: &CMatrix, rel_tol: f64) -> Result<CMatrix> {
    let dec = svd(a)?;
    let cut = rel_tol * dec.max_singular_value();
    // A V = U Σ, so A⁺ = V Σ⁻² (A V)† restricted to σ > cut.
    let av = a.matmul(&dec.v);
    let (m, n) = a.shape();
    let mut out = CMatrix::zeros(n, m);
    for (k, &s) in dec.singular_values.iter().enumerate() {
        if s <= cut || s == 0.0 {
            continue;
        }
        let w = 1.0 / (s * s);
        for i in 0..n {
            let vik = dec.v[(i, k)] * w;
            for j in 0..m {
                out[(i, j)] += vik * av[(j, k)].conj();
            }
        }
    }
    Ok(out)
}

/// Minimum-norm least-squares solution of `A x = b`.
pub fn least_squares(a: &CMatrix, b: &[C64]) -> Result<Vec<C64>> {
    if a.rows() != b.len() {
        return Err(dim_mismatch(a.rows(), b.len()));
    }
    Ok(pseudo_inverse(a, 1e-12)?.mul_vec(b))
}

/// Upper-triangular `R` with `G = R† R` for Hermitian positive definite `G`.
pub fn cholesky_upper(g: &CMatrix) -> Result<CMatrix> {
    g.check_square()?;
    let n = g.rows();
    let mut r = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = g[(j, j)].re;
        for k in 0..j {
            d -= r[(k, j)].norm_sqr();
        }
        if d <= 0.0 {
            return Err(Error::Singular(format!("Cholesky pivot {j} is {d:.3e}")));
        }
        let rjj = d.sqrt();
        r[(j, j)] = C64::new(rjj, 0.0);
        for i in (j + 1)..n {
            let mut s = g[(j, i)];
            for k in 0..j {
                s -= r[(k, j)].conj() * r[(k, i)];
            }
            r[(j, i)] = s / rjj;
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::random::random_hermitian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_eigenvalues() {
        let eig = hermitian_eig(&CMatrix::identity(3)).unwrap();
        assert_eq!(eig.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_sorted_with_permutation_vectors() {
        let eig = hermitian_eig(&CMatrix::diag_real(&[2.0, 1.0])).unwrap();
        assert_eq!(eig.values, vec![1.0, 2.0]);
        assert!((eig.vectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((eig.vectors[(0, 1)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_hermitian(6, &mut rng);
        let eig = hermitian_eig(&m).unwrap();
        let err = eig.reconstruct().max_abs_diff(&m);
        assert!(err <= 1e-10 * (1.0 + m.frobenius_norm()), "{err}");
        let vtv = eig.vectors.adjoint().matmul(&eig.vectors);
        assert!(vtv.max_abs_diff(&CMatrix::identity(6)) < 1e-10);
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eig_rejects_bad_input() {
        assert!(matches!(
            hermitian_eig(&CMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
        let mut m = CMatrix::identity(2);
        m[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(hermitian_eig(&m), Err(Error::NonFinite)));
    }

    #[test]
    fn psd_projection_clips() {
        let p = project_psd(&CMatrix::diag_real(&[1.0, -1.0])).unwrap();
        assert!(p.max_abs_diff(&CMatrix::diag_real(&[1.0, 0.0])) < 1e-15);
    }

    #[test]
    fn psd_input_is_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(4, &mut rng);
        let psd = h.matmul(&h.adjoint());
        assert!(project_psd(&psd).unwrap().max_abs_diff(&psd) < 1e-10);
    }

    /// Grid-search oracle in dimension 2: no PSD matrix on a grid is closer
    /// to the input than the clipped projection.
    #[test]
    fn psd_projection_beats_grid_search() {
        let m = CMatrix::from_rows(&[
            vec![c(0.3), C64::new(0.8, 0.4)],
            vec![C64::new(0.8, -0.4), c(-0.6)],
        ])
        .unwrap();
        let proj = project_psd(&m).unwrap();
        let best = (&m - &proj).frobenius_norm();
        let steps = 40;
        let mut grid_best = f64::INFINITY;
        for ia in 0..=steps {
            let a = ia as f64 * 1.5 / steps as f64;
            for ib in 0..=steps {
                let b = ib as f64 * 1.5 / steps as f64;
                for ir in -steps..=steps {
                    let re = ir as f64 * 1.0 / steps as f64;
                    for ii in -steps..=steps {
                        let im = ii as f64 * 1.0 / steps as f64;
                        if re * re + im * im > a * b {
                            continue;
                        }
                        let x = CMatrix::from_rows(&[
                            vec![c(a), C64::new(re, im)],
                            vec![C64::new(re, -im), c(b)],
                        ])
                        .unwrap();
                        grid_best = grid_best.min((&m - &x).frobenius_norm());
                    }
                }
            }
        }
        assert!(best <= grid_best + 1e-12, "{best} vs {grid_best}");
        assert!(grid_best - best < 0.05);
    }

    #[test]
    fn orthonormalize_examples() {
        let out = orthonormalize(&[vec![c(1.0), c(0.0)], vec![c(0.0), c(2.0)]], 1e-9).unwrap();
        assert_eq!(out.len(), 2);
        assert!((out[1][1] - c(1.0)).norm() < 1e-15);
        let dup = orthonormalize(&[vec![c(1.0), c(0.0)], vec![c(1.0), c(0.0)]], 1e-9).unwrap();
        assert_eq!(dup, vec![vec![c(1.0), c(0.0)]]);
        assert!(orthonormalize(&[], 1e-9).unwrap().is_empty());
    }

    #[test]
    fn orthonormalize_rank_matches_gram_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let vecs: Vec<Vec<C64>> = (0..5)
            .map(|_| crate::numerics::random::random_vector(3, &mut rng))
            .collect();
        let gram = CMatrix::from_fn(5, 5, |i, j| dot(&vecs[i], &vecs[j]));
        let eig = hermitian_eig(&gram).unwrap();
        let rank = eig.values.iter().filter(|&&x| x > 1e-9 * eig.max()).count();
        let out = orthonormalize(&vecs, 1e-9).unwrap();
        assert_eq!(out.len(), rank);
        assert_eq!(out.len(), 3);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot(&out[i], &out[j]) - c(expect)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn svd_null_space_of_rank_deficient_matrix() {
        let a = CMatrix::from_real(4, 3, &[1., 2., 3., 2., 4., 6., 0., 1., 1., 1., 3., 4.]).unwrap();
        let ns = null_space(&a, 1e-9).unwrap();
        assert_eq!(ns.len(), 1);
        assert!(norm(&a.mul_vec(&ns[0])) < 1e-12);
    }

    #[test]
    fn pseudo_inverse_solves_consistent_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = crate::numerics::random::random_matrix(7, 4, &mut rng);
        let x = crate::numerics::random::random_vector(4, &mut rng);
        let b = a.mul_vec(&x);
        let sol = least_squares(&a, &b).unwrap();
        for (s, t) in sol.iter().zip(&x) {
            assert!((s - t).norm() < 1e-10);
        }
    }

    #[test]
    fn cholesky_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b = crate::numerics::random::random_matrix(4, 4, &mut rng);
        let g = &b.adjoint().matmul(&b) + &CMatrix::identity(4);
        let r = cholesky_upper(&g).unwrap();
        assert!(r.adjoint().matmul(&r).max_abs_diff(&g) < 1e-12);
    }
}
