//! Finitely atomic measures: PSD-matrix-valued measures on the real line,
//! nonnegative scalar measures on the strip `ℝ × [−π, π)`, and matrix-valued
//! measures on the joint spectral domain `ℝ^r × [−π, π)^l`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::{matrix_from_json, matrix_to_json, JsonMatrix};
use crate::kernel::{c64, hermitian_check, max_abs, numerical_rank, psd_check, CMatrix, Tolerances};

/// Wrap an angle into the half-open interval `[−π, π)`.
pub fn wrap_angle(phi: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut w = phi - two_pi * ((phi + PI) / two_pi).floor();
    if w >= PI {
        w -= two_pi;
    }
    if w < -PI {
        w = -PI;
    }
    w
}

/// Distance on the circle, in `[0, π]`.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixAtom {
    pub position: f64,
    pub weight: CMatrix,
}

/// `M = Σ_j W_j δ_{t_j}` with `W_j` PSD, positions strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixAtomicMeasure {
    dim: usize,
    atoms: Vec<MatrixAtom>,
}

fn validate_weight(weight: &CMatrix, dim: usize, idx: usize, tol: &Tolerances) -> Result<()> {
    if weight.nrows() != dim || weight.ncols() != dim {
        return Err(Error::Dimension(format!(
            "atom {idx}: weight is {}x{}, expected {dim}x{dim}",
            weight.nrows(),
            weight.ncols()
        )));
    }
    if !crate::kernel::all_finite(weight) {
        return Err(Error::InvalidMeasure(format!("atom {idx}: non-finite weight")));
    }
    if !hermitian_check(weight, tol)? {
        return Err(Error::InvalidMeasure(format!("atom {idx}: weight is not Hermitian")));
    }
    let check = psd_check(weight, tol)?;
    if !check.is_psd {
        return Err(Error::InvalidMeasure(format!(
            "atom {idx}: weight is not PSD (smallest eigenvalue {:e})",
            check.min_eigenvalue
        )));
    }
    Ok(())
}

impl MatrixAtomicMeasure {
    /// Atoms may be given in any order; they are stored by ascending position.
    pub fn new(dim: usize, atoms: Vec<(f64, CMatrix)>, tol: &Tolerances) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMeasure("dimension must be at least 1".into()));
        }
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("measure needs at least one atom".into()));
        }
        for (idx, (t, w)) in atoms.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::InvalidMeasure(format!("atom {idx}: non-finite position")));
            }
            validate_weight(w, dim, idx, tol)?;
        }
        let mut atoms: Vec<MatrixAtom> =
            atoms.into_iter().map(|(position, weight)| MatrixAtom { position, weight }).collect();
        atoms.sort_by(|a, b| a.position.total_cmp(&b.position));
        if let Some(w) = atoms.windows(2).find(|w| w[0].position == w[1].position) {
            return Err(Error::InvalidMeasure(format!("duplicate atom position {}", w[0].position)));
        }
        if atoms.iter().all(|a| max_abs(&a.weight) == 0.0) {
            return Err(Error::InvalidMeasure("all weights are zero".into()));
        }
        // Store exactly Hermitian weights.
        for a in &mut atoms {
            a.weight = (&a.weight + a.weight.adjoint()).scale(0.5);
        }
        Ok(MatrixAtomicMeasure { dim, atoms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[MatrixAtom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `τ_M = Σ_k m_kk`: one atom per position carrying `trace(W_j)`.
    pub fn trace_measure(&self) -> ScalarAtomicMeasure {
        ScalarAtomicMeasure {
            atoms: self.atoms.iter().map(|a| (a.position, a.weight.trace().re)).collect(),
        }
    }

    /// Density `dM/dτ_M` at atom `j`, i.e. `W_j / trace(W_j)`.
    pub fn radon_nikodym(&self, j: usize) -> Result<CMatrix> {
        let atom = self
            .atoms
            .get(j)
            .ok_or_else(|| Error::Domain(format!("atom index {j} out of range")))?;
        let tr = atom.weight.trace().re;
        if tr <= 0.0 {
            return Err(Error::DegenerateAtom(j));
        }
        Ok(atom.weight.unscale(tr))
    }

    /// Dimension of `L²(M)`, `Σ_j rank(W_j)`.
    pub fn l2_dimension(&self, tol: &Tolerances) -> usize {
        self.atoms.iter().map(|a| numerical_rank(&a.weight, tol)).sum()
    }

    pub fn to_joint(&self) -> JointAtomicMeasure {
        JointAtomicMeasure {
            order: (1, 0),
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|a| JointAtom {
                    point: JointPoint { x: vec![a.position], phi: Vec::new() },
                    weight: a.weight.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripAtom {
    pub x: f64,
    pub phi: f64,
    pub mass: f64,
}

/// `σ = Σ_j w_j δ_{(x_j, φ_j)}` on the strip, `w_j > 0`, angles in `[−π, π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StripAtomicMeasure {
    atoms: Vec<StripAtom>,
}

impl StripAtomicMeasure {
    pub fn new(atoms: Vec<(f64, f64, f64)>, tol: &Tolerances) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("measure needs at least one atom".into()));
        }
        let mut out = Vec::with_capacity(atoms.len());
        for (idx, &(x, phi, w)) in atoms.iter().enumerate() {
            if !x.is_finite() || !phi.is_finite() || !w.is_finite() {
                return Err(Error::InvalidMeasure(format!("atom {idx}: non-finite value")));
            }
            if w <= 0.0 {
                return Err(Error::InvalidMeasure(format!("atom {idx}: mass {w} is not positive")));
            }
            out.push(StripAtom { x, phi: wrap_angle(phi), mass: w });
        }
        for i in 0..out.len() {
            for j in (i + 1)..out.len() {
                if (out[i].x - out[j].x).abs() <= tol.cluster_eps
                    && angular_distance(out[i].phi, out[j].phi) <= tol.cluster_eps
                {
                    return Err(Error::InvalidMeasure(format!("atoms {i} and {j} coincide")));
                }
            }
        }
        out.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.phi.total_cmp(&b.phi)));
        Ok(StripAtomicMeasure { atoms: out })
    }

    pub fn atoms(&self) -> &[StripAtom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    pub fn to_joint(&self) -> JointAtomicMeasure {
        JointAtomicMeasure {
            order: (1, 1),
            dim: 1,
            atoms: self
                .atoms
                .iter()
                .map(|a| JointAtom {
                    point: JointPoint { x: vec![a.x], phi: vec![a.phi] },
                    weight: CMatrix::from_element(1, 1, c64(a.mass, 0.0)),
                })
                .collect(),
        }
    }
}

/// Scalar atomic measure; used for the trace measure `τ_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarAtomicMeasure {
    pub atoms: Vec<(f64, f64)>,
}

impl ScalarAtomicMeasure {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }
}

/// A point `u = (x, φ)` of `ℝ^r × [−π, π)^l`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPoint {
    pub x: Vec<f64>,
    pub phi: Vec<f64>,
}

impl JointPoint {
    /// Sup-metric distance, angular coordinates compared on the circle.
    pub fn distance(&self, other: &JointPoint) -> f64 {
        let dx = self.x.iter().zip(&other.x).map(|(a, b)| (a - b).abs());
        let dp = self.phi.iter().zip(&other.phi).map(|(a, b)| angular_distance(*a, *b));
        dx.chain(dp).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointAtom {
    pub point: JointPoint,
    pub weight: CMatrix,
}

/// PSD-matrix-valued atomic measure on `ℝ^r × [−π, π)^l`. This is the
/// common representation behind `L²(M)` for every measure type.
#[derive(Debug, Clone, PartialEq)]
pub struct JointAtomicMeasure {
    pub order: (usize, usize),
    pub dim: usize,
    pub atoms: Vec<JointAtom>,
}

impl JointAtomicMeasure {
    pub fn l2_dimension(&self, tol: &Tolerances) -> usize {
        self.atoms.iter().map(|a| numerical_rank(&a.weight, tol)).sum()
    }

    /// Sum of all weights, i.e. `M(D_{r,l})`.
    pub fn total_weight(&self) -> CMatrix {
        self.atoms
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, a| acc + &a.weight)
    }

    /// Reinterpret an order-(1, 0) measure as a measure on the real line.
    pub fn to_matrix_measure(&self, tol: &Tolerances) -> Result<MatrixAtomicMeasure> {
        if self.order != (1, 0) {
            return Err(Error::Domain(format!("order {:?} is not (1, 0)", self.order)));
        }
        MatrixAtomicMeasure::new(
            self.dim,
            self.atoms.iter().map(|a| (a.point.x[0], a.weight.clone())).collect(),
            tol,
        )
    }

    /// Reinterpret an order-(1, 1) scalar measure as a strip measure,
    /// dropping atoms whose mass is not positive.
    pub fn to_strip_measure(&self, tol: &Tolerances) -> Result<StripAtomicMeasure> {
        if self.order != (1, 1) || self.dim != 1 {
            return Err(Error::Domain("only scalar order-(1, 1) measures live on the strip".into()));
        }
        StripAtomicMeasure::new(
            self.atoms
                .iter()
                .filter(|a| a.weight[(0, 0)].re > 0.0)
                .map(|a| (a.point.x[0], a.point.phi[0], a.weight[(0, 0)].re))
                .collect(),
            tol,
        )
    }
}

// ---- JSON ----

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixAtomJson {
    pub t: f64,
    #[serde(rename = "W")]
    pub w: JsonMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StripAtomJson {
    pub x: f64,
    pub phi: f64,
    pub w: f64,
}

/// `{"kind":"matrix_atomic",...}` or `{"kind":"strip_atomic",...}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum MeasureJson {
    #[serde(rename = "matrix_atomic")]
    Matrix {
        #[serde(rename = "N")]
        n: usize,
        atoms: Vec<MatrixAtomJson>,
    },
    #[serde(rename = "strip_atomic")]
    Strip { atoms: Vec<StripAtomJson> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Matrix(MatrixAtomicMeasure),
    Strip(StripAtomicMeasure),
}

impl MeasureJson {
    /// Structural problems (ragged matrices) are parse errors; everything
    /// else is reported by the measure constructors.
    pub fn into_measure(self, tol: &Tolerances) -> Result<Measure> {
        match self {
            MeasureJson::Matrix { n, atoms } => {
                let atoms = atoms
                    .iter()
                    .map(|a| Ok((a.t, matrix_from_json(&a.w)?)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Measure::Matrix(MatrixAtomicMeasure::new(n, atoms, tol)?))
            }
            MeasureJson::Strip { atoms } => Ok(Measure::Strip(StripAtomicMeasure::new(
                atoms.iter().map(|a| (a.x, a.phi, a.w)).collect(),
                tol,
            )?)),
        }
    }
}

impl From<&MatrixAtomicMeasure> for MeasureJson {
    fn from(m: &MatrixAtomicMeasure) -> Self {
        MeasureJson::Matrix {
            n: m.dim,
            atoms: m
                .atoms
                .iter()
                .map(|a| MatrixAtomJson { t: a.position, w: matrix_to_json(&a.weight) })
                .collect(),
        }
    }
}

impl From<&StripAtomicMeasure> for MeasureJson {
    fn from(m: &StripAtomicMeasure) -> Self {
        MeasureJson::Strip {
            atoms: m.atoms.iter().map(|a| StripAtomJson { x: a.x, phi: a.phi, w: a.mass }).collect(),
        }
    }
}
