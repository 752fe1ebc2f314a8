//! Power moments `S_n = Σ_j t_j^n W_j` with their block Hankel matrices, and
//! mixed strip moments `s_{m,n} = Σ_j x_j^m e^{inφ_j} w_j` with the Gram
//! matrix of the associated positive form.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::{matrix_from_json, matrix_to_json, JsonComplex, JsonMatrix};
use crate::kernel::{c64, hermitian_check, CMatrix, Tolerances};
use crate::measures::{MatrixAtomicMeasure, StripAtomicMeasure};
use crate::polynomials::strip_index_window;

/// `S_0, …, S_{n_max}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixMomentSequence {
    dim: usize,
    moments: Vec<CMatrix>,
}

impl MatrixMomentSequence {
    pub fn new(dim: usize, moments: Vec<CMatrix>, tol: &Tolerances) -> Result<Self> {
        if moments.is_empty() {
            return Err(Error::Window("moment sequence is empty".into()));
        }
        for (n, s) in moments.iter().enumerate() {
            if s.nrows() != dim || s.ncols() != dim {
                return Err(Error::Dimension(format!("S_{n} is {}x{}, expected {dim}x{dim}", s.nrows(), s.ncols())));
            }
            if !hermitian_check(s, tol)? {
                return Err(Error::Domain(format!("S_{n} is not Hermitian")));
            }
        }
        Ok(MatrixMomentSequence { dim, moments })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Highest available index.
    pub fn n_max(&self) -> usize {
        self.moments.len() - 1
    }

    pub fn get(&self, n: usize) -> Option<&CMatrix> {
        self.moments.get(n)
    }

    pub fn moments(&self) -> &[CMatrix] {
        &self.moments
    }
}

pub fn matrix_moments(m: &MatrixAtomicMeasure, n_max: usize) -> MatrixMomentSequence {
    let dim = m.dim();
    let mut moments = vec![CMatrix::zeros(dim, dim); n_max + 1];
    // Atoms are already in ascending position order; keep that summation order.
    for atom in m.atoms() {
        let mut power = 1.0;
        for s in moments.iter_mut() {
            *s += atom.weight.scale(power);
            power *= atom.position;
        }
    }
    MatrixMomentSequence { dim, moments }
}

/// `Γ_n = (S_{k+l})_{k,l=0}^n`, flat index `(k, s) ↦ kN + s`.
pub fn block_hankel(seq: &MatrixMomentSequence, n: usize) -> Result<CMatrix> {
    if seq.n_max() < 2 * n {
        return Err(Error::Window(format!(
            "block Hankel of order {n} needs S_0..S_{}, only S_0..S_{} available",
            2 * n,
            seq.n_max()
        )));
    }
    let d = seq.dim;
    let size = (n + 1) * d;
    Ok(CMatrix::from_fn(size, size, |p, q| {
        let (k, r) = (p / d, p % d);
        let (l, s) = (q / d, q % d);
        seq.moments[k + l][(r, s)]
    }))
}

/// `s_{m,n}` for `0 ≤ m ≤ m_max`, `|n| ≤ n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct StripMomentTable {
    m_max: usize,
    n_max: usize,
    values: Vec<Complex64>,
}

impl StripMomentTable {
    fn slot(&self, m: usize, n: i64) -> Option<usize> {
        if m > self.m_max || n.unsigned_abs() as usize > self.n_max {
            return None;
        }
        let width = 2 * self.n_max + 1;
        Some(m * width + (n + self.n_max as i64) as usize)
    }

    /// Build from raw values in lexicographic `(m, n)` order.
    pub fn from_values(m_max: usize, n_max: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != (m_max + 1) * (2 * n_max + 1) {
            return Err(Error::Dimension(format!(
                "moment table for window ({m_max}, {n_max}) needs {} values, got {}",
                (m_max + 1) * (2 * n_max + 1),
                values.len()
            )));
        }
        Ok(StripMomentTable { m_max, n_max, values })
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn get(&self, m: usize, n: i64) -> Option<Complex64> {
        self.slot(m, n).map(|i| self.values[i])
    }

    pub fn set(&mut self, m: usize, n: i64, value: Complex64) -> Result<()> {
        let i = self
            .slot(m, n)
            .ok_or_else(|| Error::Window(format!("({m}, {n}) outside moment window")))?;
        self.values[i] = value;
        Ok(())
    }

    /// `max |s_{m,−n} − conj(s_{m,n})|`.
    pub fn conjugate_symmetry_residual(&self) -> f64 {
        strip_index_window(self.m_max, self.n_max)
            .into_iter()
            .map(|(m, n)| (self.get(m, -n).unwrap() - self.get(m, n).unwrap().conj()).norm())
            .fold(0.0, f64::max)
    }
}

pub fn strip_moments(sigma: &StripAtomicMeasure, m_max: usize, n_max: usize) -> StripMomentTable {
    let window = strip_index_window(m_max, n_max);
    let values = window
        .iter()
        .map(|&(m, n)| {
            sigma
                .atoms()
                .iter()
                .map(|a| Complex64::from_polar(a.x.powi(m as i32) * a.mass, n as f64 * a.phi))
                .sum()
        })
        .collect();
    StripMomentTable { m_max, n_max, values }
}

/// Matrix of the form `Σ α_{m,n} conj(α_{k,l}) s_{m+k, n−l}` over the index
/// window `m ≤ m_cap`, `|n| ≤ n_cap` (lexicographic order).
pub fn devinatz_gram(table: &StripMomentTable, m_cap: usize, n_cap: usize) -> Result<CMatrix> {
    if table.m_max < 2 * m_cap || table.n_max < 2 * n_cap {
        return Err(Error::Window(format!(
            "Gram over ({m_cap}, {n_cap}) needs moments up to ({}, {}), table has ({}, {})",
            2 * m_cap,
            2 * n_cap,
            table.m_max,
            table.n_max
        )));
    }
    let idx = strip_index_window(m_cap, n_cap);
    Ok(CMatrix::from_fn(idx.len(), idx.len(), |p, q| {
        let (m, n) = idx[p];
        let (k, l) = idx[q];
        table.get(m + k, n - l).unwrap()
    }))
}

// ---- JSON ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripMomentJson {
    pub m: usize,
    pub n: i64,
    pub s: JsonComplex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum MomentsJson {
    #[serde(rename = "matrix_moments")]
    Matrix {
        #[serde(rename = "N")]
        n: usize,
        moments: Vec<JsonMatrix>,
    },
    #[serde(rename = "strip_moments")]
    Strip { m_max: usize, n_max: usize, values: Vec<StripMomentJson> },
}

impl From<&MatrixMomentSequence> for MomentsJson {
    fn from(s: &MatrixMomentSequence) -> Self {
        MomentsJson::Matrix { n: s.dim, moments: s.moments.iter().map(matrix_to_json).collect() }
    }
}

impl From<&StripMomentTable> for MomentsJson {
    fn from(t: &StripMomentTable) -> Self {
        MomentsJson::Strip {
            m_max: t.m_max,
            n_max: t.n_max,
            values: strip_index_window(t.m_max, t.n_max)
                .into_iter()
                .map(|(m, n)| StripMomentJson { m, n, s: t.get(m, n).unwrap().into() })
                .collect(),
        }
    }
}

impl MomentsJson {
    pub fn to_matrix_sequence(&self, tol: &Tolerances) -> Result<MatrixMomentSequence> {
        match self {
            MomentsJson::Matrix { n, moments } => {
                let ms = moments.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
                MatrixMomentSequence::new(*n, ms, tol)
            }
            _ => Err(Error::Parse("expected matrix_moments".into())),
        }
    }

    pub fn to_strip_table(&self) -> Result<StripMomentTable> {
        match self {
            MomentsJson::Strip { m_max, n_max, values } => {
                let mut t = StripMomentTable::from_values(
                    *m_max,
                    *n_max,
                    vec![c64(0.0, 0.0); (m_max + 1) * (2 * n_max + 1)],
                )?;
                if values.len() != t.values.len() {
                    return Err(Error::Parse("strip moment table is incomplete".into()));
                }
                for v in values {
                    t.set(v.m, v.n, v.s.into())?;
                }
                Ok(t)
            }
            _ => Err(Error::Parse("expected strip_moments".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{hermitian_eigen, max_abs_diff, numerical_rank, psd_check};
    use std::f64::consts::PI;

    fn diag(v: &[f64]) -> CMatrix {
        CMatrix::from_fn(v.len(), v.len(), |i, j| if i == j { c64(v[i], 0.0) } else { c64(0.0, 0.0) })
    }

    fn two_atoms() -> MatrixAtomicMeasure {
        MatrixAtomicMeasure::new(
            2,
            vec![(1.0, diag(&[1.0, 0.0])), (-1.0, diag(&[0.0, 1.0]))],
            &Tolerances::default(),
        )
        .unwrap()
    }

    #[test]
    fn matrix_moment_examples() {
        let tol = Tolerances::default();
        let m = MatrixAtomicMeasure::new(2, vec![(0.0, CMatrix::identity(2, 2))], &tol).unwrap();
        let s = matrix_moments(&m, 2);
        assert_eq!(s.get(0).unwrap(), &CMatrix::identity(2, 2));
        assert_eq!(s.get(1).unwrap(), &CMatrix::zeros(2, 2));
        assert_eq!(s.get(2).unwrap(), &CMatrix::zeros(2, 2));

        let s = matrix_moments(&two_atoms(), 2);
        assert_eq!(s.get(0).unwrap(), &CMatrix::identity(2, 2));
        assert_eq!(s.get(1).unwrap(), &diag(&[1.0, -1.0]));
        assert_eq!(s.get(2).unwrap(), &CMatrix::identity(2, 2));

        let m = MatrixAtomicMeasure::new(1, vec![(2.0, diag(&[1.0]))], &tol).unwrap();
        assert_eq!(matrix_moments(&m, 3).get(3).unwrap(), &diag(&[8.0]));
    }

    #[test]
    fn block_hankel_examples() {
        let tol = Tolerances::default();
        let seq = MatrixMomentSequence::new(
            2,
            vec![CMatrix::identity(2, 2), CMatrix::zeros(2, 2), CMatrix::zeros(2, 2)],
            &tol,
        )
        .unwrap();
        assert_eq!(block_hankel(&seq, 1).unwrap(), diag(&[1.0, 1.0, 0.0, 0.0]));

        let g = block_hankel(&matrix_moments(&two_atoms(), 2), 1).unwrap();
        let expected = CMatrix::from_row_slice(
            4,
            4,
            &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, -1.0, 1.0, 0.0, 1.0, 0.0, 0.0, -1.0, 0.0, 1.0].map(|v| c64(v, 0.0)),
        );
        assert_eq!(g, expected);
        let eig = hermitian_eigen(&g);
        for (got, want) in eig.values.iter().zip([0.0, 0.0, 2.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(psd_check(&g, &tol).unwrap().is_psd);
        assert_eq!(numerical_rank(&g, &tol), 2);

        let m = MatrixAtomicMeasure::new(1, vec![(2.0, diag(&[1.0]))], &tol).unwrap();
        let g = block_hankel(&matrix_moments(&m, 2), 1).unwrap();
        assert_eq!(g, CMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0].map(|v| c64(v, 0.0))));
        assert_eq!(numerical_rank(&g, &tol), 1);
    }

    #[test]
    fn block_hankel_window_error() {
        let s = matrix_moments(&two_atoms(), 3);
        assert!(matches!(block_hankel(&s, 2), Err(Error::Window(_))));
    }

    #[test]
    fn strip_moment_examples() {
        let tol = Tolerances::default();
        let s = strip_moments(&StripAtomicMeasure::new(vec![(0.0, 0.0, 1.0)], &tol).unwrap(), 3, 3);
        for (m, n) in strip_index_window(3, 3) {
            let want = if m == 0 { 1.0 } else { 0.0 };
            assert_eq!(s.get(m, n).unwrap(), c64(want, 0.0));
        }

        let s = strip_moments(&StripAtomicMeasure::new(vec![(1.0, PI / 2.0, 1.0)], &tol).unwrap(), 2, 4);
        let i = c64(0.0, 1.0);
        for (m, n) in strip_index_window(2, 4) {
            assert!((s.get(m, n).unwrap() - i.powi(n as i32)).norm() < 1e-14);
        }

        let phi0 = 0.7;
        let s = strip_moments(&StripAtomicMeasure::new(vec![(1.0, phi0, 1.0), (1.0, -phi0, 1.0)], &tol).unwrap(), 2, 3);
        for (m, n) in strip_index_window(2, 3) {
            let v = s.get(m, n).unwrap();
            assert!((v.re - 2.0 * (n as f64 * phi0).cos()).abs() < 1e-14);
            assert!(v.im.abs() < 1e-14);
        }
        assert!(s.conjugate_symmetry_residual() < 1e-14);
    }

    #[test]
    fn devinatz_gram_examples() {
        let tol = Tolerances::default();
        let t = strip_moments(&StripAtomicMeasure::new(vec![(0.0, 0.0, 1.0)], &tol).unwrap(), 0, 2);
        let g = devinatz_gram(&t, 0, 1).unwrap();
        assert_eq!(g, CMatrix::from_element(3, 3, c64(1.0, 0.0)));
        assert_eq!(numerical_rank(&g, &tol), 1);
        assert!(psd_check(&g, &tol).unwrap().is_psd);

        let t = strip_moments(&StripAtomicMeasure::new(vec![(0.3, 1.0, 2.5), (-1.0, 0.2, 0.5)], &tol).unwrap(), 0, 0);
        assert!((devinatz_gram(&t, 0, 0).unwrap()[(0, 0)] - c64(3.0, 0.0)).norm() < 1e-14);

        let mut t = strip_moments(&StripAtomicMeasure::new(vec![(0.0, 0.0, 1.0)], &tol).unwrap(), 0, 0);
        t.set(0, 0, c64(-1.0, 0.0)).unwrap();
        assert!(!psd_check(&devinatz_gram(&t, 0, 0).unwrap(), &tol).unwrap().is_psd);

        assert!(matches!(devinatz_gram(&t, 1, 0), Err(Error::Window(_))));
    }

    #[test]
    fn moments_json_round_trip() {
        let tol = Tolerances::default();
        let seq = matrix_moments(&two_atoms(), 4);
        let j = MomentsJson::from(&seq);
        let back: MomentsJson = serde_json::from_str(&serde_json::to_string(&j).unwrap()).unwrap();
        assert_eq!(back.to_matrix_sequence(&tol).unwrap(), seq);
        let t = strip_moments(&StripAtomicMeasure::new(vec![(0.5, 1.0, 1.0)], &tol).unwrap(), 2, 2);
        let j = MomentsJson::from(&t);
        let back: MomentsJson = serde_json::from_str(&serde_json::to_string(&j).unwrap()).unwrap();
        let t2 = back.to_strip_table().unwrap();
        assert!(max_abs_diff(
            &CMatrix::from_column_slice(t.values.len(), 1, &t.values),
            &CMatrix::from_column_slice(t2.values.len(), 1, &t2.values)
        ) == 0.0);
    }
}
