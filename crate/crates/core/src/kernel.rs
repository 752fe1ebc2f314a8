//! Dense complex matrix utilities: Hermitian and PSD checks, Hermitian
//! eigendecomposition, numerical rank, PSD factorization and pseudo-inverses.
//!
//! Every routine is a deterministic function of its input. Tolerance
//! semantics are relative: a check against `eps` compares with
//! `eps * max(1, scale)` where `scale` is the natural size of the input.

use nalgebra::{DMatrix, DVector, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Numerical thresholds used across the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Eigenvalue floor for PSD acceptance.
    pub psd_eps: f64,
    /// Relative singular-value cutoff for rank decisions.
    pub rank_eps: f64,
    /// Bound on operator-identity residuals.
    pub residual_eps: f64,
    /// Grouping radius for joint eigenvalues.
    pub cluster_eps: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            psd_eps: 1e-10,
            rank_eps: 1e-10,
            residual_eps: 1e-9,
            cluster_eps: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("psd_eps", self.psd_eps),
            ("rank_eps", self.rank_eps),
            ("residual_eps", self.residual_eps),
            ("cluster_eps", self.cluster_eps),
        ];
        for (name, v) in fields {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("tolerance {name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Largest entry modulus; zero for an empty matrix.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

pub fn max_abs_vec(v: &CVector) -> f64 {
    v.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// Max-entry distance between two equally shaped matrices.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0_f64, |m, (x, y)| m.max((x - y).norm()))
}

pub fn all_finite(a: &CMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn require_square(a: &CMatrix, what: &str) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!(
            "{what}: expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

pub fn hermitian_check(a: &CMatrix, tol: &Tolerances) -> Result<bool> {
    require_square(a, "hermitian_check")?;
    let dev = max_abs_diff(a, &a.adjoint());
    Ok(dev <= tol.residual_eps * max_abs(a).max(1.0))
}

pub fn unitary_residual(u: &CMatrix) -> f64 {
    let n = u.nrows();
    max_abs_diff(&(u.adjoint() * u), &CMatrix::identity(n, n))
}

pub fn unitary_check(u: &CMatrix, tol: &Tolerances) -> Result<bool> {
    require_square(u, "unitary_check")?;
    Ok(unitary_residual(u) <= tol.residual_eps)
}

/// `‖AB − BA‖_max`.
pub fn commutator_residual(a: &CMatrix, b: &CMatrix) -> f64 {
    max_abs_diff(&(a * b), &(b * a))
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending. Column `k` of
/// `vectors` belongs to `values[k]`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.vectors.nrows();
        let mut scaled = self.vectors.clone();
        for (k, &lam) in self.values.iter().enumerate() {
            scaled.column_mut(k).scale_mut(lam);
        }
        debug_assert_eq!(scaled.nrows(), n);
        scaled * self.vectors.adjoint()
    }
}

/// Hermitian eigendecomposition of the Hermitian part `(A + A*)/2`.
pub fn hermitian_eigen(a: &CMatrix) -> HermitianEigen {
    let n = a.nrows();
    if n == 0 {
        return HermitianEigen { values: Vec::new(), vectors: CMatrix::zeros(0, 0) };
    }
    let sym = (a + a.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    HermitianEigen { values, vectors }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdCheck {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
}

pub fn psd_check(a: &CMatrix, tol: &Tolerances) -> Result<PsdCheck> {
    if !hermitian_check(a, tol)? {
        return Err(Error::Domain("psd_check requires a Hermitian matrix".into()));
    }
    if a.nrows() == 0 {
        return Ok(PsdCheck { is_psd: true, min_eigenvalue: 0.0 });
    }
    let eig = hermitian_eigen(a);
    let min = eig.values[0];
    let max = *eig.values.last().unwrap();
    Ok(PsdCheck { is_psd: min >= -tol.psd_eps * max.max(1.0), min_eigenvalue: min })
}

/// Singular values in descending order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut sv = svd(a).s;
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

pub fn numerical_rank(a: &CMatrix, tol: &Tolerances) -> usize {
    let sv = singular_values(a);
    let Some(&top) = sv.first() else { return 0 };
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol.rank_eps * top).count()
}

/// Factor a PSD matrix as `W = C C*` with `C` of full column rank.
pub fn psd_factor(w: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let check = psd_check(w, tol)?;
    if !check.is_psd {
        return Err(Error::Domain(format!(
            "psd_factor: matrix is not PSD (smallest eigenvalue {:e})",
            check.min_eigenvalue
        )));
    }
    let n = w.nrows();
    let eig = hermitian_eigen(w);
    let scale = eig.values.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
    let keep: Vec<usize> = if scale == 0.0 {
        Vec::new()
    } else {
        // Largest eigenvalues first so the factor is ordered by weight.
        (0..n).rev().filter(|&k| eig.values[k] > tol.rank_eps * scale).collect()
    };
    let mut c = CMatrix::zeros(n, keep.len());
    for (dst, &k) in keep.iter().enumerate() {
        let s = eig.values[k].max(0.0).sqrt();
        c.set_column(dst, &eig.vectors.column(k).scale(s));
    }
    Ok(c)
}

struct Svd {
    u: CMatrix,
    s: Vec<f64>,
    v_t: CMatrix,
}

/// Thin SVD. nalgebra's bidiagonal SVD is tried first on the tall
/// orientation and accepted only if it reproduces `a`; otherwise the factors
/// come from the Hermitian dilation `[[0, A], [A*, 0]]`, whose eigenvalues
/// are `±σ_k` and whose `+σ_k` eigenvectors are `(u_k, v_k)/√2`.
fn svd(a: &CMatrix) -> Svd {
    let (m, n) = a.shape();
    let wide = m < n;
    let b = if wide { a.adjoint() } else { a.clone() };
    let scale = max_abs(&b).max(f64::MIN_POSITIVE);
    for eps in [f64::EPSILON, 8.0 * f64::EPSILON] {
        let Some(f) = SVD::try_new(b.clone(), true, true, eps, 10_000) else { continue };
        let (Some(u), Some(v_t)) = (f.u, f.v_t) else { continue };
        let s: Vec<f64> = f.singular_values.iter().copied().collect();
        let mut us = u.clone();
        for (k, &sk) in s.iter().enumerate() {
            us.column_mut(k).scale_mut(sk);
        }
        if max_abs_diff(&(us * &v_t), &b) > 1e-12 * scale {
            continue;
        }
        return if wide { Svd { u: v_t.adjoint(), s, v_t: u.adjoint() } } else { Svd { u, s, v_t } };
    }
    dilation_svd(a)
}

fn dilation_svd(a: &CMatrix) -> Svd {
    let (m, n) = a.shape();
    let r = m.min(n);
    let mut h = CMatrix::zeros(m + n, m + n);
    h.view_mut((0, m), (m, n)).copy_from(a);
    h.view_mut((m, 0), (n, m)).copy_from(&a.adjoint());
    let eig = hermitian_eigen(&h);
    let mut u = CMatrix::zeros(m, r);
    let mut v = CMatrix::zeros(n, r);
    let mut s = Vec::with_capacity(r);
    for k in 0..r {
        let j = m + n - 1 - k;
        s.push(eig.values[j].max(0.0));
        let z = eig.vectors.column(j);
        let top = z.rows(0, m).into_owned();
        let bottom = z.rows(m, n).into_owned();
        let (nu, nv) = (top.norm(), bottom.norm());
        if nu > 0.0 {
            u.set_column(k, &top.unscale(nu));
        }
        if nv > 0.0 {
            v.set_column(k, &bottom.unscale(nv));
        }
    }
    Svd { u, s, v_t: v.adjoint() }
}

/// Moore–Penrose pseudo-inverse; singular values at or below
/// `rel_cutoff * σ_max` are treated as zero.
pub fn pinv(a: &CMatrix, rel_cutoff: f64) -> CMatrix {
    let (m, n) = a.shape();
    if a.is_empty() {
        return CMatrix::zeros(n, m);
    }
    let f = svd(a);
    let top = f.s.iter().fold(0.0_f64, |x, &s| x.max(s));
    let mut out = CMatrix::zeros(n, m);
    if top == 0.0 {
        return out;
    }
    for (k, &s) in f.s.iter().enumerate() {
        if s > rel_cutoff * top {
            let vk = f.v_t.row(k).adjoint();
            let uk = f.u.column(k).adjoint();
            out += (vk * uk).unscale(s);
        }
    }
    out
}

/// 2-norm condition number (infinite for singular or empty input).
pub fn condition_number(a: &CMatrix) -> f64 {
    let sv = singular_values(a);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Inverse of a square matrix together with its condition number.
pub fn inverse_with_condition(a: &CMatrix) -> Result<(CMatrix, f64)> {
    require_square(a, "inverse")?;
    let cond = condition_number(a);
    let inv = a
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Domain("matrix is singular".into()))?;
    Ok((inv, cond))
}

/// Orthonormal basis of the column space (left singular vectors above the
/// relative cutoff).
pub fn range_basis(a: &CMatrix, rel_cutoff: f64) -> CMatrix {
    let m = a.nrows();
    if a.is_empty() {
        return CMatrix::zeros(m, 0);
    }
    let Svd { u, s: sv, .. } = svd(a);
    let top = sv.iter().fold(0.0_f64, |x, &s| x.max(s));
    if top == 0.0 {
        return CMatrix::zeros(m, 0);
    }
    let mut idx: Vec<usize> = (0..sv.len()).filter(|&k| sv[k] > rel_cutoff * top).collect();
    idx.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let mut basis = CMatrix::zeros(m, idx.len());
    for (dst, &k) in idx.iter().enumerate() {
        basis.set_column(dst, &u.column(k));
    }
    basis
}

/// Equilibrated copy of a PSD Gram matrix: `G_pq / sqrt(G_pp G_qq)`, with
/// rows and columns of zero-diagonal entries zeroed. Rank is unchanged in
/// exact arithmetic while the spread of the spectrum shrinks considerably.
pub fn equilibrate_gram(g: &CMatrix) -> CMatrix {
    let n = g.nrows();
    let scale: Vec<f64> = (0..n)
        .map(|p| {
            let d = g[(p, p)].re;
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    CMatrix::from_fn(n, n, |p, q| g[(p, q)] * (scale[p] * scale[q]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn real(rows: &[&[f64]]) -> CMatrix {
        CMatrix::from_fn(rows.len(), rows[0].len(), |i, j| c64(rows[i][j], 0.0))
    }

    fn random_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> CMatrix {
        CMatrix::from_fn(m, n, |_, _| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn hermitian_examples() {
        let tol = Tolerances::default();
        assert!(hermitian_check(&CMatrix::identity(3, 3), &tol).unwrap());
        assert!(!hermitian_check(&real(&[&[0.0, 1.0], &[-1.0, 0.0]]), &tol).unwrap());
        let a = CMatrix::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(0.0, 1.0), c64(0.0, -1.0), c64(2.0, 0.0)]);
        assert!(hermitian_check(&a, &tol).unwrap());
        assert!(matches!(hermitian_check(&CMatrix::zeros(2, 3), &tol), Err(Error::Dimension(_))));
    }

    #[test]
    fn psd_examples() {
        let tol = Tolerances::default();
        let r = psd_check(&real(&[&[1.0, 0.0], &[0.0, 0.0]]), &tol).unwrap();
        assert!(r.is_psd);
        assert_eq!(r.min_eigenvalue, 0.0);
        let r = psd_check(&real(&[&[1.0, 0.0], &[0.0, -1.0]]), &tol).unwrap();
        assert!(!r.is_psd);
        assert!((r.min_eigenvalue + 1.0).abs() < 1e-14);
        let r = psd_check(&real(&[&[1.0, 1.0], &[1.0, 1.0]]), &tol).unwrap();
        assert!(r.is_psd);
        assert!(r.min_eigenvalue.abs() < 1e-14);
        let bad = real(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        assert!(matches!(psd_check(&bad, &tol), Err(Error::Domain(_))));
    }

    #[test]
    fn rank_examples() {
        let tol = Tolerances { rank_eps: 1e-12, ..Tolerances::default() };
        assert_eq!(numerical_rank(&CMatrix::zeros(2, 2), &tol), 0);
        assert_eq!(numerical_rank(&real(&[&[1.0; 3], &[1.0; 3], &[1.0; 3]]), &tol), 1);
        assert_eq!(numerical_rank(&real(&[&[1.0, 0.0], &[0.0, 1e-30]]), &tol), 1);
    }

    #[test]
    fn factor_examples() {
        let tol = Tolerances::default();
        let c = psd_factor(&real(&[&[4.0, 0.0], &[0.0, 0.0]]), &tol).unwrap();
        assert_eq!(c.ncols(), 1);
        assert!((c[(0, 0)].norm() - 2.0).abs() < 1e-14);
        assert!(c[(1, 0)].norm() < 1e-14);

        let c = psd_factor(&CMatrix::identity(3, 3), &tol).unwrap();
        assert_eq!(c.ncols(), 3);
        assert!(unitary_residual(&c) < 1e-14);

        let ones = real(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let c = psd_factor(&ones, &tol).unwrap();
        assert_eq!(c.ncols(), 1);
        assert!(max_abs_diff(&(&c * c.adjoint()), &ones) < 1e-14);

        assert!(psd_factor(&real(&[&[1.0, 0.0], &[0.0, -1.0]]), &tol).is_err());
    }

    #[test]
    fn eigen_residuals_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let tol = Tolerances::default();
        for _ in 0..200 {
            let n = rng.random_range(1..=10);
            let b = random_matrix(&mut rng, n, n);
            let a = &b + b.adjoint();
            let eig = hermitian_eigen(&a);
            let scale = max_abs(&a).max(1.0);
            assert!(max_abs_diff(&eig.reconstruct(), &a) <= tol.residual_eps * scale);
            assert!(unitary_residual(&eig.vectors) <= tol.residual_eps);
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn factor_reconstructs_random_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let tol = Tolerances::default();
        for _ in 0..1000 {
            let n = rng.random_range(1..=8);
            let r = rng.random_range(1..=n);
            let b = random_matrix(&mut rng, n, r);
            let w = &b * b.adjoint();
            let c = psd_factor(&w, &tol).unwrap();
            assert!(max_abs_diff(&(&c * c.adjoint()), &w) <= tol.residual_eps * max_abs(&w).max(1.0));
            assert_eq!(numerical_rank(&c, &tol), c.ncols());
        }
    }

    #[test]
    fn pinv_solves_full_rank_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let a = random_matrix(&mut rng, 6, 4);
            let p = pinv(&a, 1e-12);
            assert!(max_abs_diff(&(&p * &a), &CMatrix::identity(4, 4)) < 1e-10);
        }
    }

    #[test]
    fn dilation_svd_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for (m, n) in [(3, 7), (7, 3), (5, 5), (1, 4)] {
            let b = random_matrix(&mut rng, m, 2.min(n));
            let a = &b * random_matrix(&mut rng, 2.min(n), n);
            let f = dilation_svd(&a);
            let mut us = f.u.clone();
            for (k, &s) in f.s.iter().enumerate() {
                us.column_mut(k).scale_mut(s);
            }
            assert!(max_abs_diff(&(us * &f.v_t), &a) < 1e-12);
            assert!(f.s.windows(2).all(|w| w[0] >= w[1]));
            let p = pinv(&a, 1e-10);
            assert!(max_abs_diff(&(&a * &p * &a), &a) < 1e-12);
        }
    }

    #[test]
    fn pinv_of_wide_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in [10, 40, 91] {
            let a = random_matrix(&mut rng, 6, n);
            let p = pinv(&a, 1e-12);
            assert!(max_abs_diff(&(&a * &p), &CMatrix::identity(6, 6)) < 1e-12);
        }
    }

    #[test]
    fn equilibration_preserves_rank() {
        let tol = Tolerances::default();
        let b = CMatrix::from_fn(4, 2, |i, j| c64(((i + 1) as f64).powi(j as i32 + 1) * 100.0_f64.powi(j as i32), 0.0));
        let g = &b * b.adjoint();
        let e = equilibrate_gram(&g);
        assert_eq!(numerical_rank(&e, &tol), 2);
        for p in 0..4 {
            assert!((e[(p, p)].re - 1.0).abs() < 1e-14);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn rank_of_product_matches_columns(seed in any::<u64>(), n in 2usize..8, r in 1usize..8) {
            let r = r.min(n);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // Factor with condition number at most 1e6: orthonormal columns
            // times a diagonal in [1e-6, 1]. The Gram squares that to 1e12, so
            // the cutoff has to sit below 1e-12 and above round-off.
            let q = range_basis(&random_matrix(&mut rng, n, r), 1e-12);
            prop_assume!(q.ncols() == r);
            let mut c = q.clone();
            for k in 0..r {
                let s = 10f64.powf(rng.random_range(-6.0..=0.0));
                c.column_mut(k).scale_mut(s);
            }
            let tol = Tolerances { rank_eps: 1e-13, ..Tolerances::default() };
            prop_assert_eq!(numerical_rank(&(&c * c.adjoint()), &tol), r);
        }
    }
}
