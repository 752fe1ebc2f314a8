//! Geometry of `L²(M)` and `L²(σ)` for atomic measures.
//!
//! For an atomic measure the space `L²(M)` is realized concretely as
//! `⊕_j ℂ^{r_j}`: factor every weight as `W_j = C_j C_j*` (with `C_j` of
//! full column rank `r_j`) and send a function `f` to the concatenation of
//! the rows `f(u_j) C_j`. Inner products in `L²(M)` become plain dot
//! products, and multiplication by a coordinate (`X_j`) or by `e^{iφ_k}`
//! (`W_k`) becomes a diagonal matrix.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{equilibrate_gram, numerical_rank, psd_factor, CMatrix, CVector, Tolerances};
use crate::measures::{JointAtomicMeasure, JointPoint, Measure, MatrixAtomicMeasure, StripAtomicMeasure};
use crate::polynomials::{monomial_family_strip, monomial_family_vector, PowerTrigPolynomial, VectorPolynomial};

/// A measure together with the polynomial type it integrates.
pub trait PolynomialSpace {
    type Poly;

    fn inner_product(&self, f: &Self::Poly, g: &Self::Poly) -> Result<Complex64>;
}

/// `(f, g) = Σ_j f(t_j) W_j g(t_j)*`.
pub fn inner_product_vector(f: &VectorPolynomial, g: &VectorPolynomial, m: &MatrixAtomicMeasure) -> Result<Complex64> {
    if f.dim() != m.dim() || g.dim() != m.dim() {
        return Err(Error::Dimension(format!(
            "polynomial dimensions ({}, {}) do not match measure dimension {}",
            f.dim(),
            g.dim(),
            m.dim()
        )));
    }
    Ok(m.atoms()
        .iter()
        .map(|a| {
            let fv = f.eval(a.position);
            let gv = g.eval(a.position).conjugate();
            (fv.transpose() * &a.weight * gv)[(0, 0)]
        })
        .sum())
}

/// `(p, q) = Σ_j p(x_j, φ_j) conj(q(x_j, φ_j)) w_j`.
pub fn inner_product_strip(p: &PowerTrigPolynomial, q: &PowerTrigPolynomial, sigma: &StripAtomicMeasure) -> Complex64 {
    sigma
        .atoms()
        .iter()
        .map(|a| p.eval(a.x, a.phi) * q.eval(a.x, a.phi).conj() * a.mass)
        .sum()
}

impl PolynomialSpace for MatrixAtomicMeasure {
    type Poly = VectorPolynomial;

    fn inner_product(&self, f: &VectorPolynomial, g: &VectorPolynomial) -> Result<Complex64> {
        inner_product_vector(f, g, self)
    }
}

impl PolynomialSpace for StripAtomicMeasure {
    type Poly = PowerTrigPolynomial;

    fn inner_product(&self, p: &PowerTrigPolynomial, q: &PowerTrigPolynomial) -> Result<Complex64> {
        Ok(inner_product_strip(p, q, self))
    }
}

/// `G_pq = (family_p, family_q)`.
pub fn gram_matrix<S: PolynomialSpace>(family: &[S::Poly], space: &S) -> Result<CMatrix> {
    if family.is_empty() {
        return Err(Error::Dimension("Gram matrix of an empty family".into()));
    }
    let n = family.len();
    let mut g = CMatrix::zeros(n, n);
    for p in 0..n {
        for q in p..n {
            let v = space.inner_product(&family[p], &family[q])?;
            g[(p, q)] = v;
            g[(q, p)] = v.conj();
        }
    }
    for p in 0..n {
        g[(p, p)].im = 0.0;
    }
    Ok(g)
}

/// Coordinate model `⊕_j ℂ^{r_j}` of `L²(M)`.
#[derive(Debug, Clone)]
pub struct L2Model {
    measure: JointAtomicMeasure,
    factors: Vec<CMatrix>,
    offsets: Vec<usize>,
    dim: usize,
}

impl L2Model {
    pub fn new(measure: JointAtomicMeasure, tol: &Tolerances) -> Result<Self> {
        let factors = measure
            .atoms
            .iter()
            .map(|a| psd_factor(&a.weight, tol))
            .collect::<Result<Vec<_>>>()?;
        let mut offsets = Vec::with_capacity(factors.len());
        let mut dim = 0;
        for c in &factors {
            offsets.push(dim);
            dim += c.ncols();
        }
        Ok(L2Model { measure, factors, offsets, dim })
    }

    pub fn from_matrix(m: &MatrixAtomicMeasure, tol: &Tolerances) -> Result<Self> {
        L2Model::new(m.to_joint(), tol)
    }

    pub fn from_strip(s: &StripAtomicMeasure, tol: &Tolerances) -> Result<Self> {
        L2Model::new(s.to_joint(), tol)
    }

    /// Total dimension `D = Σ r_j`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn measure(&self) -> &JointAtomicMeasure {
        &self.measure
    }

    pub fn factor(&self, atom: usize) -> &CMatrix {
        &self.factors[atom]
    }

    /// Coordinate range of atom `j`'s block.
    pub fn block(&self, atom: usize) -> std::ops::Range<usize> {
        self.offsets[atom]..self.offsets[atom] + self.factors[atom].ncols()
    }

    /// Embed a function given by its values `u ↦ f(u) ∈ ℂ_N` at the atoms.
    pub fn embed_with<F: Fn(&JointPoint) -> CVector>(&self, f: F) -> CVector {
        let mut out = CVector::zeros(self.dim);
        for (j, atom) in self.measure.atoms.iter().enumerate() {
            let value = f(&atom.point);
            assert_eq!(value.len(), self.measure.dim, "function value has wrong length");
            let block = self.factors[j].transpose() * value;
            out.rows_mut(self.offsets[j], block.len()).copy_from(&block);
        }
        out
    }

    pub fn embed_vector(&self, p: &VectorPolynomial) -> CVector {
        self.embed_with(|u| p.eval(u.x[0]))
    }

    pub fn embed_strip(&self, p: &PowerTrigPolynomial) -> CVector {
        self.embed_with(|u| CVector::from_element(1, p.eval(u.x[0], u.phi[0])))
    }

    /// Embedding of `χ_{u_j} ē_s`.
    pub fn embed_indicator(&self, atom: usize, s: usize) -> CVector {
        let mut out = CVector::zeros(self.dim);
        let c = &self.factors[atom];
        for k in 0..c.ncols() {
            out[self.offsets[atom] + k] = c[(s, k)];
        }
        out
    }

    /// Columns are the embeddings of `family`.
    pub fn embed_family_vector(&self, family: &[VectorPolynomial]) -> CMatrix {
        let cols: Vec<CVector> = family.iter().map(|p| self.embed_vector(p)).collect();
        CMatrix::from_columns(&cols)
    }

    pub fn embed_family_strip(&self, family: &[PowerTrigPolynomial]) -> CMatrix {
        let cols: Vec<CVector> = family.iter().map(|p| self.embed_strip(p)).collect();
        CMatrix::from_columns(&cols)
    }

    fn diagonal_by_atom<F: Fn(&JointPoint) -> Complex64>(&self, value: F) -> CMatrix {
        let mut d = CMatrix::zeros(self.dim, self.dim);
        for (j, atom) in self.measure.atoms.iter().enumerate() {
            let v = value(&atom.point);
            for k in self.block(j) {
                d[(k, k)] = v;
            }
        }
        d
    }

    /// Multiplication by the real coordinate `x_j` (0-based `j`).
    pub fn multiplication_x(&self, j: usize) -> CMatrix {
        self.diagonal_by_atom(|u| Complex64::new(u.x[j], 0.0))
    }

    /// Multiplication by `e^{iφ_k}` (0-based `k`).
    pub fn multiplication_w(&self, k: usize) -> CMatrix {
        self.diagonal_by_atom(|u| Complex64::from_polar(1.0, u.phi[k]))
    }
}

/// Multiplication by the independent variable on `L²(M)`, `M` on the line.
pub fn multiplication_matrix_x(model: &L2Model) -> CMatrix {
    model.multiplication_x(0)
}

/// Multiplication by `e^{iφ}` on `L²(σ)`, `σ` on the strip.
pub fn multiplication_matrix_w(model: &L2Model) -> CMatrix {
    model.multiplication_w(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SaturationWindow {
    pub m_max: usize,
    pub n_max: usize,
}

/// Outcome of the polynomial density test. `dense` holds exactly when the
/// closure of the polynomials has the dimension of the whole space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub space_dim: usize,
    pub span_dim: usize,
    pub saturation_degree: Option<usize>,
    pub dense: bool,
    /// Strip measures only: smallest `m` cap, then smallest `n` cap at that
    /// `m`, whose monomial window already reaches `span_dim`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub saturation_window: Option<SaturationWindow>,
}

fn gram_rank(g: &CMatrix, tol: &Tolerances) -> usize {
    numerical_rank(&equilibrate_gram(g), tol)
}

/// Grow the cap `c_0, c_0 + step, …` until two consecutive ranks agree;
/// returns the final cap and rank.
fn stabilize<F: FnMut(usize) -> Result<usize>>(start: usize, step: usize, mut rank_at: F) -> Result<(usize, usize)> {
    let mut cap = start;
    let mut rank = rank_at(cap)?;
    loop {
        let next = rank_at(cap + step)?;
        if next == rank {
            return Ok((cap, rank));
        }
        cap += step;
        rank = next;
    }
}

fn smallest_cap<F: FnMut(usize) -> Result<usize>>(upper: usize, target: usize, mut rank_at: F) -> Result<usize> {
    for d in 0..=upper {
        if rank_at(d)? >= target {
            return Ok(d);
        }
    }
    Ok(upper)
}

/// Density test for a matrix measure on the line. Ranks are taken of the
/// diagonally equilibrated Gram matrix of `{x^k ē_s}`.
pub fn density_test_matrix(m: &MatrixAtomicMeasure, tol: &Tolerances) -> Result<DensityReport> {
    let k = m.len();
    let mut rank_at = |cap: usize| -> Result<usize> {
        let g = gram_matrix(&monomial_family_vector(m.dim(), cap), m)?;
        Ok(gram_rank(&g, tol))
    };
    let (cap, span_dim) = stabilize(k - 1, k, &mut rank_at)?;
    let saturation = smallest_cap(cap, span_dim, &mut rank_at)?;
    let space_dim = m.l2_dimension(tol);
    Ok(DensityReport {
        space_dim,
        span_dim,
        saturation_degree: Some(saturation),
        dense: span_dim == space_dim,
        saturation_window: None,
    })
}

/// Density test for a strip measure; `m` and `n` caps grow together.
pub fn density_test_strip(sigma: &StripAtomicMeasure, tol: &Tolerances) -> Result<DensityReport> {
    let k = sigma.len();
    let rank_window = |m_cap: usize, n_cap: usize| -> Result<usize> {
        let g = gram_matrix(&monomial_family_strip(m_cap, n_cap), sigma)?;
        Ok(gram_rank(&g, tol))
    };
    let (cap, span_dim) = stabilize(k - 1, k, |c| rank_window(c, c))?;
    let saturation = smallest_cap(cap, span_dim, |c| rank_window(c, c))?;
    let m_sat = smallest_cap(cap, span_dim, |m| rank_window(m, cap))?;
    let n_sat = smallest_cap(cap, span_dim, |n| rank_window(m_sat, n))?;
    let space_dim = k;
    Ok(DensityReport {
        space_dim,
        span_dim,
        saturation_degree: Some(saturation),
        dense: span_dim == space_dim,
        saturation_window: Some(SaturationWindow { m_max: m_sat, n_max: n_sat }),
    })
}

pub fn density_test(measure: &Measure, tol: &Tolerances) -> Result<DensityReport> {
    match measure {
        Measure::Matrix(m) => density_test_matrix(m, tol),
        Measure::Strip(s) => density_test_strip(s, tol),
    }
}
