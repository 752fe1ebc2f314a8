//! Hilbert space generated by positive moment data.
//!
//! A PSD Gram matrix `G` over an index set is factored as `G = Q Λ Q*`;
//! keeping the eigenpairs above the rank cutoff gives vectors
//! `v_p ∈ ℂ^D` with `(v_p, v_q) = G_pq`, where `(a, b) = Σ a_k conj(b_k)`.
//! The factorization is taken of the diagonally equilibrated Gram matrix,
//! which leaves the space unchanged and keeps rank decisions in line with
//! the density test. Dependent indices are kept: operators defined on the index set are
//! recovered by least squares over the span of their domain vectors, and the
//! consistency residual of that fit is always reported.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{equilibrate_gram, hermitian_eigen, max_abs, max_abs_diff, pinv, psd_check, CMatrix, CVector, Tolerances};
use crate::moments::{block_hankel, devinatz_gram, MatrixMomentSequence, StripMomentTable};
use crate::polynomials::strip_index_window;

/// `(a, b) = Σ a_k conj(b_k)`, linear in the first argument.
#[inline]
pub fn inner(a: &CVector, b: &CVector) -> Complex64 {
    b.dotc(a)
}

#[derive(Debug, Clone, PartialEq)]
pub enum IndexScheme {
    /// `x_k`, `0 ≤ k < (window + 1) N`; `k = mN + s` stands for `x^m ē_s`.
    Flat { dim: usize, window: usize },
    /// `x_{m,n}` for `m ≤ m_max`, `|n| ≤ n_max`, lexicographic order.
    Strip { m_max: usize, n_max: usize },
    /// No structure beyond positions.
    Plain,
}

#[derive(Debug, Clone)]
pub struct GnsSpace {
    gram: CMatrix,
    vectors: CMatrix,
    scheme: IndexScheme,
}

impl GnsSpace {
    pub fn from_gram(gram: CMatrix, scheme: IndexScheme, tol: &Tolerances) -> Result<Self> {
        let check = psd_check(&gram, tol)?;
        if !check.is_psd {
            return Err(Error::Positivity(check.min_eigenvalue));
        }
        // Factor the equilibrated Gram and undo the diagonal scaling on the
        // columns; the rank decision then matches the density test.
        let eig = hermitian_eigen(&equilibrate_gram(&gram));
        let top = eig.values.last().copied().unwrap_or(0.0).max(0.0);
        let keep: Vec<usize> = (0..eig.values.len())
            .rev()
            .filter(|&k| top > 0.0 && eig.values[k] > tol.rank_eps * top)
            .collect();
        let count = gram.nrows();
        let norms: Vec<f64> = (0..count).map(|p| gram[(p, p)].re.max(0.0).sqrt()).collect();
        let mut vectors = CMatrix::zeros(keep.len(), count);
        for (row, &k) in keep.iter().enumerate() {
            let s = eig.values[k].sqrt();
            for p in 0..count {
                vectors[(row, p)] = eig.vectors[(p, k)] * (s * norms[p]);
            }
        }
        Ok(GnsSpace { gram, vectors, scheme })
    }

    /// Dimension `D` of the space.
    pub fn rank(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn len(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.ncols() == 0
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    pub fn scheme(&self) -> &IndexScheme {
        &self.scheme
    }

    /// `D × P` matrix whose column `p` is `v_p`.
    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn vector(&self, p: usize) -> CVector {
        self.vectors.column(p).into_owned()
    }

    /// `max(1, max_p ‖v_p‖)`, the reference size for relative residuals.
    pub fn scale(&self) -> f64 {
        (0..self.gram.nrows()).map(|p| self.gram[(p, p)].re.max(0.0).sqrt()).fold(1.0, f64::max)
    }

    /// `max |(v_p, v_q) − G_pq| / max(1, ‖G‖_max)`.
    pub fn gram_residual(&self) -> f64 {
        let reproduced = self.vectors.transpose() * self.vectors.conjugate();
        max_abs_diff(&reproduced, &self.gram) / max_abs(&self.gram).max(1.0)
    }

    pub fn flat_index(&self, k: usize) -> Option<usize> {
        match self.scheme {
            IndexScheme::Flat { dim, window } if k < (window + 1) * dim => Some(k),
            _ => None,
        }
    }

    pub fn pair_index(&self, m: usize, n: i64) -> Option<usize> {
        match self.scheme {
            IndexScheme::Strip { m_max, n_max } if m <= m_max && n.unsigned_abs() as usize <= n_max => {
                Some(m * (2 * n_max + 1) + (n + n_max as i64) as usize)
            }
            _ => None,
        }
    }

    /// Least-squares operator with `T v_src ≈ v_dst` for every pair.
    pub fn operator_from_pairs(&self, pairs: &[(usize, usize)], antilinear: bool, tol: &Tolerances) -> Result<PartialOperator> {
        if pairs.is_empty() {
            return Err(Error::Window("operator has an empty domain".into()));
        }
        let src_cols: Vec<CVector> = pairs
            .iter()
            .map(|&(s, _)| if antilinear { self.vector(s).conjugate() } else { self.vector(s) })
            .collect();
        let dst_cols: Vec<CVector> = pairs.iter().map(|&(_, d)| self.vector(d)).collect();
        let src = CMatrix::from_columns(&src_cols);
        let dst = CMatrix::from_columns(&dst_cols);
        let matrix = if self.rank() == 0 {
            CMatrix::zeros(0, 0)
        } else {
            &dst * pinv(&src, tol.rank_eps)
        };
        let fitted = &matrix * &src;
        let consistency = if self.rank() == 0 { 0.0 } else { max_abs_diff(&fitted, &dst) / self.scale() };
        Ok(PartialOperator {
            matrix,
            domain: pairs.iter().map(|p| p.0).collect(),
            antilinear,
            consistency_residual: consistency,
        })
    }
}

/// An operator known on a subset of the distinguished vectors. Antilinear
/// operators act as `v ↦ matrix · conj(v)`.
#[derive(Debug, Clone)]
pub struct PartialOperator {
    pub matrix: CMatrix,
    pub domain: Vec<usize>,
    pub antilinear: bool,
    /// `max_p ‖T v_p − v_{target(p)}‖ / scale`.
    pub consistency_residual: f64,
}

impl PartialOperator {
    pub fn apply(&self, v: &CVector) -> CVector {
        if self.antilinear {
            &self.matrix * v.conjugate()
        } else {
            &self.matrix * v
        }
    }

    /// `max |(T v_p, v_q) − (v_p, T v_q)|` over domain pairs, relative to
    /// `max(1, ‖G‖_max)`.
    pub fn symmetry_residual(&self, space: &GnsSpace) -> f64 {
        let mut worst = 0.0_f64;
        for &p in &self.domain {
            let tp = self.apply(&space.vector(p));
            for &q in &self.domain {
                let tq = self.apply(&space.vector(q));
                let d = inner(&tp, &space.vector(q)) - inner(&space.vector(p), &tq);
                worst = worst.max(d.norm());
            }
        }
        worst / max_abs(space.gram()).max(1.0)
    }

    /// `max |(T v_p, T v_q) − (v_p, v_q)|` over domain pairs (relative).
    pub fn isometry_residual(&self, space: &GnsSpace) -> f64 {
        self.pairwise_form_residual(space, false)
    }

    /// `max |(T v_p, T v_q) − conj (v_p, v_q)|` over domain pairs (relative).
    pub fn conjugation_residual(&self, space: &GnsSpace) -> f64 {
        self.pairwise_form_residual(space, true)
    }

    fn pairwise_form_residual(&self, space: &GnsSpace, conjugate: bool) -> f64 {
        let images: Vec<CVector> = self.domain.iter().map(|&p| self.apply(&space.vector(p))).collect();
        let mut worst = 0.0_f64;
        for (i, &p) in self.domain.iter().enumerate() {
            for (j, &q) in self.domain.iter().enumerate() {
                let g = space.gram()[(p, q)];
                let want = if conjugate { g.conj() } else { g };
                worst = worst.max((inner(&images[i], &images[j]) - want).norm());
            }
        }
        worst / max_abs(space.gram()).max(1.0)
    }
}

/// Space spanned by `x_0, …, x_{(n+1)N−1}` with Gram matrix `Γ_n`.
pub fn build_gns_hamburger(seq: &MatrixMomentSequence, n: usize, tol: &Tolerances) -> Result<GnsSpace> {
    let gamma = block_hankel(seq, n)?;
    GnsSpace::from_gram(gamma, IndexScheme::Flat { dim: seq.dim(), window: n }, tol)
}

/// `x_k ↦ x_{k+N}`.
pub fn shift_operator(space: &GnsSpace, tol: &Tolerances) -> Result<PartialOperator> {
    let IndexScheme::Flat { dim, window } = *space.scheme() else {
        return Err(Error::Window("shift operator needs a flat index scheme".into()));
    };
    let total = (window + 1) * dim;
    let pairs: Vec<(usize, usize)> = (0..total).filter(|k| k + dim < total).map(|k| (k, k + dim)).collect();
    space.operator_from_pairs(&pairs, false, tol)
}

/// The strip space with its three structural operators.
#[derive(Debug, Clone)]
pub struct StripGns {
    pub space: GnsSpace,
    /// `x_{m,n} ↦ x_{m+1,n}`.
    pub a0: PartialOperator,
    /// `x_{m,n} ↦ x_{m,n+1}`.
    pub b0: PartialOperator,
    /// `x_{m,n} ↦ x_{m,−n}`, antilinear.
    pub j0: PartialOperator,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripGnsResiduals {
    pub gram: f64,
    pub a0_consistency: f64,
    pub b0_consistency: f64,
    pub j0_consistency: f64,
    pub a0_symmetry: f64,
    pub b0_isometry: f64,
    pub j0_conjugation: f64,
    /// `max ‖A₀B₀ v − B₀A₀ v‖ / scale` over the common domain.
    pub commutation: f64,
}

impl StripGnsResiduals {
    pub fn max(&self) -> f64 {
        [
            self.gram,
            self.a0_consistency,
            self.b0_consistency,
            self.j0_consistency,
            self.a0_symmetry,
            self.b0_isometry,
            self.j0_conjugation,
            self.commutation,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

impl StripGns {
    pub fn residuals(&self) -> StripGnsResiduals {
        let IndexScheme::Strip { m_max, n_max } = *self.space.scheme() else { unreachable!() };
        let n_max = n_max as i64;
        let mut commutation = 0.0_f64;
        for m in 0..m_max {
            for n in -n_max..n_max {
                let p = self.space.pair_index(m, n).unwrap();
                let v = self.space.vector(p);
                let ab = self.a0.apply(&self.b0.apply(&v));
                let ba = self.b0.apply(&self.a0.apply(&v));
                commutation = commutation.max(crate::kernel::max_abs_vec(&(ab - ba)));
            }
        }
        StripGnsResiduals {
            gram: self.space.gram_residual(),
            a0_consistency: self.a0.consistency_residual,
            b0_consistency: self.b0.consistency_residual,
            j0_consistency: self.j0.consistency_residual,
            a0_symmetry: self.a0.symmetry_residual(&self.space),
            b0_isometry: self.b0.isometry_residual(&self.space),
            j0_conjugation: self.j0.conjugation_residual(&self.space),
            commutation: commutation / self.space.scale(),
        }
    }
}

/// Space spanned by `x_{m,n}`, `m ≤ m_max`, `|n| ≤ n_max`, with
/// `(x_{m,n}, x_{k,l}) = s_{m+k, n−l}`.
pub fn build_gns_strip(table: &StripMomentTable, m_max: usize, n_max: usize, tol: &Tolerances) -> Result<StripGns> {
    if m_max == 0 || n_max == 0 {
        return Err(Error::Window(format!(
            "strip window ({m_max}, {n_max}) leaves no room for the shifts; both caps must be at least 1"
        )));
    }
    let gram = devinatz_gram(table, m_max, n_max)?;
    let space = GnsSpace::from_gram(gram, IndexScheme::Strip { m_max, n_max }, tol)?;
    let idx = strip_index_window(m_max, n_max);
    let at = |m: usize, n: i64| space.pair_index(m, n).unwrap();
    let n_cap = n_max as i64;
    let a_pairs: Vec<_> = idx.iter().filter(|&&(m, _)| m < m_max).map(|&(m, n)| (at(m, n), at(m + 1, n))).collect();
    let b_pairs: Vec<_> = idx.iter().filter(|&&(_, n)| n < n_cap).map(|&(m, n)| (at(m, n), at(m, n + 1))).collect();
    let j_pairs: Vec<_> = idx.iter().map(|&(m, n)| (at(m, n), at(m, -n))).collect();
    let a0 = space.operator_from_pairs(&a_pairs, false, tol)?;
    let b0 = space.operator_from_pairs(&b_pairs, false, tol)?;
    let j0 = space.operator_from_pairs(&j_pairs, true, tol)?;
    Ok(StripGns { space, a0, b0, j0 })
}

/// Linear map `U` with `U e_p = v_p`, where the columns `e_p` of `coords`
/// are the images of the same index family in another realization (for
/// instance the coordinate model of `L²(M)`). Both Gram matrices agree
/// exactly when `U` is well defined and isometric.
#[derive(Debug, Clone)]
pub struct GramMatching {
    pub map: CMatrix,
    /// `max ‖U e_p − v_p‖ / scale`.
    pub well_definedness: f64,
    /// `‖U*U − I‖_max`.
    pub isometry: f64,
    /// `‖UU* − I‖_max`; zero only when `U` is onto.
    pub co_isometry: f64,
}

pub fn gram_matching(space: &GnsSpace, coords: &CMatrix, tol: &Tolerances) -> Result<GramMatching> {
    if coords.ncols() != space.len() {
        return Err(Error::Dimension(format!(
            "{} coordinate columns for {} distinguished vectors",
            coords.ncols(),
            space.len()
        )));
    }
    let map = space.vectors() * pinv(coords, tol.rank_eps);
    let well = max_abs_diff(&(&map * coords), space.vectors()) / space.scale();
    let (d_out, d_in) = map.shape();
    let isometry = max_abs_diff(&(map.adjoint() * &map), &CMatrix::identity(d_in, d_in));
    let co_isometry = max_abs_diff(&(&map * map.adjoint()), &CMatrix::identity(d_out, d_out));
    Ok(GramMatching { map, well_definedness: well, isometry, co_isometry })
}

/// `max ‖T^r v_s − v_{rN+s}‖ / scale` over the flat window.
pub fn flat_power_residual(space: &GnsSpace, op: &CMatrix) -> f64 {
    let IndexScheme::Flat { dim, window } = *space.scheme() else { return f64::INFINITY };
    let mut worst = 0.0_f64;
    for s in 0..dim {
        let mut v = space.vector(s);
        for r in 1..=window {
            v = op * v;
            let target = space.vector(r * dim + s);
            worst = worst.max(crate::kernel::max_abs_vec(&(&v - target)));
        }
    }
    worst / space.scale()
}

/// `max ‖T^r v_{m,n} − v_{m+r,n}‖ / scale` over the strip window.
pub fn strip_power_residual(space: &GnsSpace, op: &CMatrix) -> f64 {
    let IndexScheme::Strip { m_max, n_max } = *space.scheme() else { return f64::INFINITY };
    let mut worst = 0.0_f64;
    for n in -(n_max as i64)..=(n_max as i64) {
        for m in 0..=m_max {
            let mut v = space.vector(space.pair_index(m, n).unwrap());
            for r in 1..=(m_max - m) {
                v = op * v;
                let target = space.vector(space.pair_index(m + r, n).unwrap());
                worst = worst.max(crate::kernel::max_abs_vec(&(&v - target)));
            }
        }
    }
    worst / space.scale()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{c64, hermitian_eigen};
    use crate::measures::{MatrixAtomicMeasure, StripAtomicMeasure};
    use crate::moments::{matrix_moments, strip_moments};
    use std::f64::consts::PI;

    fn diag(v: &[f64]) -> CMatrix {
        CMatrix::from_fn(v.len(), v.len(), |i, j| if i == j { c64(v[i], 0.0) } else { c64(0.0, 0.0) })
    }

    fn mm(dim: usize, atoms: Vec<(f64, CMatrix)>) -> MatrixAtomicMeasure {
        MatrixAtomicMeasure::new(dim, atoms, &Tolerances::default()).unwrap()
    }

    #[test]
    fn identity_gram_gives_orthonormal_vectors() {
        let tol = Tolerances::default();
        let g = GnsSpace::from_gram(CMatrix::identity(3, 3), IndexScheme::Plain, &tol).unwrap();
        assert_eq!(g.rank(), 3);
        for p in 0..3 {
            for q in 0..3 {
                let want = if p == q { 1.0 } else { 0.0 };
                assert!((inner(&g.vector(p), &g.vector(q)) - c64(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn single_atom_collapses_to_one_dimension() {
        let tol = Tolerances::default();
        let seq = matrix_moments(&mm(1, vec![(1.0, diag(&[1.0]))]), 4);
        let g = build_gns_hamburger(&seq, 2, &tol).unwrap();
        assert_eq!(g.gram(), &CMatrix::from_element(3, 3, c64(1.0, 0.0)));
        assert_eq!(g.rank(), 1);
        assert!(max_abs_diff(&g.vectors().columns(0, 1).into_owned(), &g.vectors().columns(2, 1).into_owned()) < 1e-14);
    }

    #[test]
    fn two_atom_window_one_has_rank_two() {
        let tol = Tolerances::default();
        let m = mm(2, vec![(1.0, diag(&[1.0, 0.0])), (-1.0, diag(&[0.0, 1.0]))]);
        let g = build_gns_hamburger(&matrix_moments(&m, 2), 1, &tol).unwrap();
        assert_eq!(g.rank(), 2);
        assert!(g.gram_residual() < 1e-14);
    }

    #[test]
    fn non_positive_gram_rejected() {
        let tol = Tolerances::default();
        let r = GnsSpace::from_gram(diag(&[1.0, -1.0]), IndexScheme::Plain, &tol);
        assert!(matches!(r, Err(Error::Positivity(_))));
    }

    #[test]
    fn shift_examples() {
        let tol = Tolerances::default();
        let seq = matrix_moments(&mm(1, vec![(2.0, diag(&[1.0]))]), 6);
        let g = build_gns_hamburger(&seq, 3, &tol).unwrap();
        let a = shift_operator(&g, &tol).unwrap();
        assert_eq!(a.matrix.shape(), (1, 1));
        assert!((a.matrix[(0, 0)] - c64(2.0, 0.0)).norm() < 1e-12);
        assert!(a.consistency_residual < 1e-12);

        let seq = matrix_moments(&mm(1, vec![(1.0, diag(&[1.0])), (-1.0, diag(&[1.0]))]), 6);
        let g = build_gns_hamburger(&seq, 3, &tol).unwrap();
        let a = shift_operator(&g, &tol).unwrap();
        let eig = hermitian_eigen(&a.matrix);
        assert!((eig.values[0] + 1.0).abs() < 1e-12 && (eig.values[1] - 1.0).abs() < 1e-12);
        let lhs = inner(&a.apply(&g.vector(0)), &g.vector(1));
        let rhs = inner(&g.vector(0), &a.apply(&g.vector(1)));
        assert!((lhs - rhs).norm() < 1e-10);
        assert!(a.symmetry_residual(&g) < 1e-10);
    }

    #[test]
    fn shift_needs_nonempty_domain() {
        let tol = Tolerances::default();
        let seq = matrix_moments(&mm(1, vec![(2.0, diag(&[1.0]))]), 0);
        let g = build_gns_hamburger(&seq, 0, &tol).unwrap();
        assert!(matches!(shift_operator(&g, &tol), Err(Error::Window(_))));
    }

    #[test]
    fn strip_examples() {
        let tol = Tolerances::default();
        let s = StripAtomicMeasure::new(vec![(0.0, 0.0, 1.0)], &tol).unwrap();
        let g = build_gns_strip(&strip_moments(&s, 2, 2), 1, 1, &tol).unwrap();
        assert_eq!(g.space.rank(), 1);
        assert!((g.b0.matrix[(0, 0)] - c64(1.0, 0.0)).norm() < 1e-12);
        assert!(g.a0.matrix[(0, 0)].norm() < 1e-12);

        let s = StripAtomicMeasure::new(vec![(1.0, PI / 2.0, 1.0)], &tol).unwrap();
        let g = build_gns_strip(&strip_moments(&s, 4, 4), 2, 2, &tol).unwrap();
        assert_eq!(g.space.rank(), 1);
        assert!((g.b0.matrix[(0, 0)] - c64(0.0, 1.0)).norm() < 1e-12);
        assert!((g.a0.matrix[(0, 0)] - c64(1.0, 0.0)).norm() < 1e-12);
        assert!(g.residuals().max() < 1e-12);
    }

    #[test]
    fn b0_preserves_norms() {
        let tol = Tolerances::default();
        let s = StripAtomicMeasure::new(vec![(0.5, 0.1, 1.0), (-1.0, 2.0, 0.7), (0.5, -1.5, 1.3)], &tol).unwrap();
        let t = strip_moments(&s, 6, 6);
        let g = build_gns_strip(&t, 3, 3, &tol).unwrap();
        for &p in &g.b0.domain {
            let v = g.space.vector(p);
            let bv = g.b0.apply(&v);
            let (m, _) = strip_index_window(3, 3)[p];
            let want = t.get(2 * m, 0).unwrap().re;
            assert!((inner(&bv, &bv).re - want).abs() < 1e-9 * want.max(1.0));
            assert!((inner(&v, &v).re - want).abs() < 1e-9 * want.max(1.0));
        }
        assert!(g.residuals().max() < 1e-9);
    }

    #[test]
    fn strip_window_errors() {
        let tol = Tolerances::default();
        let s = StripAtomicMeasure::new(vec![(0.0, 0.0, 1.0)], &tol).unwrap();
        assert!(matches!(build_gns_strip(&strip_moments(&s, 2, 2), 0, 1, &tol), Err(Error::Window(_))));
        assert!(matches!(build_gns_strip(&strip_moments(&s, 1, 2), 1, 1, &tol), Err(Error::Window(_))));
    }
}
