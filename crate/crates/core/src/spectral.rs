//! Commuting families of Hermitian and unitary matrices, their joint
//! spectral measure and the unitary model onto `L²(M)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::{matrix_from_json, matrix_to_json, vector_from_json, vector_to_json, JsonComplex, JsonMatrix};
use crate::kernel::{
    c64, commutator_residual, hermitian_eigen, max_abs, max_abs_diff, max_abs_vec, pinv, range_basis,
    unitary_residual, CMatrix, CVector, Tolerances,
};
use crate::l2space::L2Model;
use crate::measures::{wrap_angle, JointAtom, JointAtomicMeasure, JointPoint};
use crate::random::{haar_unitary, random_complex_vector};

/// `S_1, …, S_r` Hermitian and `U_1, …, U_l` unitary, all commuting.
#[derive(Debug, Clone, PartialEq)]
pub struct SUSet {
    dim: usize,
    hermitian: Vec<CMatrix>,
    unitary: Vec<CMatrix>,
}

impl SUSet {
    pub fn new(hermitian: Vec<CMatrix>, unitary: Vec<CMatrix>, tol: &Tolerances) -> Result<Self> {
        let Some(first) = hermitian.first().or(unitary.first()) else {
            return Err(Error::Dimension("an SU-set needs at least one operator".into()));
        };
        let dim = first.nrows();
        for a in hermitian.iter().chain(&unitary) {
            if a.shape() != (dim, dim) {
                return Err(Error::Dimension(format!("operator of shape {:?} in a {dim}-dimensional set", a.shape())));
            }
            if !crate::kernel::all_finite(a) {
                return Err(Error::Domain("operator has non-finite entries".into()));
            }
        }
        for (j, s) in hermitian.iter().enumerate() {
            let dev = max_abs_diff(s, &s.adjoint());
            if dev > tol.residual_eps * max_abs(s).max(1.0) {
                return Err(Error::NotCommuting(format!("S_{} is not Hermitian (deviation {dev:e})", j + 1)));
            }
        }
        for (k, u) in unitary.iter().enumerate() {
            let dev = unitary_residual(u);
            if dev > tol.residual_eps {
                return Err(Error::NotCommuting(format!("U_{} is not unitary (residual {dev:e})", k + 1)));
            }
        }
        let all: Vec<&CMatrix> = hermitian.iter().chain(&unitary).collect();
        for a in 0..all.len() {
            for b in a + 1..all.len() {
                let dev = commutator_residual(all[a], all[b]);
                let scale = max_abs(all[a]).max(1.0) * max_abs(all[b]).max(1.0);
                if dev > tol.residual_eps * scale {
                    return Err(Error::NotCommuting(format!("operators {a} and {b} do not commute (residual {dev:e})")));
                }
            }
        }
        Ok(SUSet { dim, hermitian, unitary })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(r, l)`.
    pub fn order(&self) -> (usize, usize) {
        (self.hermitian.len(), self.unitary.len())
    }

    pub fn hermitian(&self) -> &[CMatrix] {
        &self.hermitian
    }

    pub fn unitary(&self) -> &[CMatrix] {
        &self.unitary
    }

    /// Hermitian generators of the same commutative algebra: every `S_j`
    /// and the real and imaginary parts of every `U_k`.
    fn hermitian_generators(&self) -> Vec<CMatrix> {
        let half = c64(0.5, 0.0);
        let mut out = self.hermitian.clone();
        for u in &self.unitary {
            let ua = u.adjoint();
            out.push((u + &ua) * half);
            out.push((u - &ua) * c64(0.0, -0.5));
        }
        out
    }
}

/// Joint spectral points with orthonormal bases of the corresponding
/// eigenspaces; the projection of point `p` is `Q_p Q_p*`.
#[derive(Debug, Clone)]
pub struct JointSpectralMeasure {
    pub order: (usize, usize),
    pub points: Vec<JointPoint>,
    pub bases: Vec<CMatrix>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralResiduals {
    pub idempotency: f64,
    pub orthogonality: f64,
    pub resolution_of_identity: f64,
    pub reconstruction: f64,
}

impl SpectralResiduals {
    pub fn max(&self) -> f64 {
        self.idempotency.max(self.orthogonality).max(self.resolution_of_identity).max(self.reconstruction)
    }
}

impl JointSpectralMeasure {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn projection(&self, p: usize) -> CMatrix {
        &self.bases[p] * self.bases[p].adjoint()
    }

    pub fn residuals(&self, set: &SUSet) -> SpectralResiduals {
        let n = set.dim();
        let projections: Vec<CMatrix> = (0..self.len()).map(|p| self.projection(p)).collect();
        let mut idem = 0.0_f64;
        let mut orth = 0.0_f64;
        let mut total = CMatrix::zeros(n, n);
        for (p, pp) in projections.iter().enumerate() {
            idem = idem.max(max_abs_diff(&(pp * pp), pp)).max(max_abs_diff(pp, &pp.adjoint()));
            for pq in &projections[p + 1..] {
                orth = orth.max(max_abs(&(pp * pq)));
            }
            total += pp;
        }
        let mut recon = 0.0_f64;
        for (j, s) in set.hermitian.iter().enumerate() {
            let sum = projections
                .iter()
                .zip(&self.points)
                .fold(CMatrix::zeros(n, n), |acc, (pp, u)| acc + pp * c64(u.x[j], 0.0));
            recon = recon.max(max_abs_diff(&sum, s));
        }
        for (k, un) in set.unitary.iter().enumerate() {
            let sum = projections
                .iter()
                .zip(&self.points)
                .fold(CMatrix::zeros(n, n), |acc, (pp, u)| acc + pp * Complex64::from_polar(1.0, u.phi[k]));
            recon = recon.max(max_abs_diff(&sum, un));
        }
        SpectralResiduals {
            idempotency: idem,
            orthogonality: orth,
            resolution_of_identity: max_abs_diff(&total, &CMatrix::identity(n, n)),
            reconstruction: recon,
        }
    }
}

/// Split sorted eigenvalues into runs whose consecutive gaps are at most
/// `eps`.
fn cluster_sorted(values: &[f64], eps: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k] - values[k - 1] > eps {
            out.push(start..k);
            start = k;
        }
    }
    out
}

/// Simultaneous diagonalization by successive refinement: each Hermitian
/// generator is compressed to every current eigenspace and splits it along
/// its own eigenvalue clusters.
pub fn joint_spectral_decomposition(set: &SUSet, tol: &Tolerances) -> JointSpectralMeasure {
    let n = set.dim();
    let mut spaces = vec![CMatrix::identity(n, n)];
    for h in set.hermitian_generators() {
        let scale = max_abs(&h).max(1.0);
        let mut next = Vec::with_capacity(spaces.len());
        for q in spaces {
            let compressed = q.adjoint() * &h * &q;
            let eig = hermitian_eigen(&compressed);
            for run in cluster_sorted(&eig.values, tol.cluster_eps * scale) {
                next.push(&q * eig.vectors.columns(run.start, run.len()));
            }
        }
        spaces = next;
    }

    let (r, l) = set.order();
    let rayleigh = |q: &CMatrix, a: &CMatrix| (q.adjoint() * a * q).trace() / c64(q.ncols() as f64, 0.0);
    let mut found: Vec<(JointPoint, CMatrix)> = Vec::new();
    for q in spaces {
        let point = JointPoint {
            x: set.hermitian.iter().map(|s| rayleigh(&q, s).re).collect(),
            phi: set.unitary.iter().map(|u| wrap_angle(rayleigh(&q, u).arg())).collect(),
        };
        match found.iter_mut().find(|(u, _)| u.distance(&point) <= tol.cluster_eps) {
            Some((_, basis)) => {
                let merged = CMatrix::from_columns(
                    &basis.column_iter().chain(q.column_iter()).map(|c| c.into_owned()).collect::<Vec<_>>(),
                );
                *basis = range_basis(&merged, tol.rank_eps);
            }
            None => found.push((point, q)),
        }
    }
    found.sort_by(|(a, _), (b, _)| {
        a.x.iter()
            .chain(&a.phi)
            .zip(b.x.iter().chain(&b.phi))
            .map(|(s, t)| s.total_cmp(t))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let (points, bases) = found.into_iter().unzip();
    JointSpectralMeasure { order: (r, l), points, bases }
}

/// Largest joint eigenspace dimension.
pub fn spectral_multiplicity(set: &SUSet, tol: &Tolerances) -> usize {
    joint_spectral_decomposition(set, tol).bases.iter().map(|q| q.ncols()).max().unwrap_or(0)
}

/// Vectors `x_0, …, x_{N−1}`, stored as the columns of an `n × N` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicFamily {
    vectors: CMatrix,
}

impl CyclicFamily {
    pub fn new(vectors: Vec<CVector>) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return Err(Error::Dimension("a family needs at least one vector".into()));
        };
        if vectors.iter().any(|v| v.len() != first.len()) {
            return Err(Error::Dimension("family vectors have different lengths".into()));
        }
        Ok(CyclicFamily { vectors: CMatrix::from_columns(&vectors) })
    }

    pub fn len(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.ncols() == 0
    }

    pub fn vector(&self, i: usize) -> CVector {
        self.vectors.column(i).into_owned()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.vectors
    }
}

/// The family is cyclic when its components reach all of every joint
/// eigenspace: `rank(Q_p* F) = dim P_p` for each point `p`.
pub fn cyclicity_check(set: &SUSet, family: &CyclicFamily, tol: &Tolerances) -> Result<bool> {
    if family.vectors.nrows() != set.dim() {
        return Err(Error::Dimension(format!(
            "family vectors have length {}, operators act on dimension {}",
            family.vectors.nrows(),
            set.dim()
        )));
    }
    let e = joint_spectral_decomposition(set, tol);
    Ok(e.bases.iter().all(|q| {
        let coords = q.adjoint() * &family.vectors;
        crate::kernel::numerical_rank(&coords, tol) == q.ncols()
    }))
}

/// Atoms at the joint points with weights `((P_p x_i, x_j))_{i,j}`.
///
/// Cyclicity is read off the spectral measure: the cyclic subspace of the
/// family is `⊕_p P_p span{x_i}`, so the family is cyclic exactly when each
/// `P_p F` has the rank of `P_p`.
pub fn extract_matrix_measure(e: &JointSpectralMeasure, family: &CyclicFamily, tol: &Tolerances) -> Result<JointAtomicMeasure> {
    let n_fam = family.len();
    let mut atoms = Vec::with_capacity(e.len());
    for (p, point) in e.points.iter().enumerate() {
        let q = &e.bases[p];
        let coords = q.adjoint() * &family.vectors;
        let rank = crate::kernel::numerical_rank(&coords, tol);
        if rank < q.ncols() {
            return Err(Error::NonCyclic(format!(
                "joint eigenspace {p} has dimension {} but the family reaches only {rank} of it",
                q.ncols()
            )));
        }
        // (P x_i, x_j) = (Q*x_i, Q*x_j) = Σ_k c[k,i] conj(c[k,j]).
        let mut w = coords.transpose() * coords.conjugate();
        for i in 0..n_fam {
            w[(i, i)].im = 0.0;
        }
        atoms.push(JointAtom { point: point.clone(), weight: w });
    }
    Ok(JointAtomicMeasure { order: e.order, dim: n_fam, atoms })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResiduals {
    /// `‖V*V − I‖_max`.
    pub unitarity_left: f64,
    /// `‖VV* − I‖_max`.
    pub unitarity_right: f64,
    /// `‖V⁻¹S_jV − X_j‖_max` for each `j`.
    pub hermitian_intertwining: Vec<f64>,
    /// `‖V⁻¹U_kV − W_k‖_max` for each `k`.
    pub unitary_intertwining: Vec<f64>,
    /// `max_s ‖V ē_s − x_s‖ / max(1, max_s ‖x_s‖)`.
    pub cyclic_vectors: f64,
    /// Fit residual of the blockwise definition of `V`.
    pub well_definedness: f64,
}

impl ModelResiduals {
    pub fn max(&self) -> f64 {
        self.hermitian_intertwining
            .iter()
            .chain(&self.unitary_intertwining)
            .copied()
            .chain([self.unitarity_left, self.unitarity_right, self.cyclic_vectors, self.well_definedness])
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct UnitaryModel {
    pub spectral: JointSpectralMeasure,
    pub model: L2Model,
    /// `n × D` matrix of `V` in the coordinate basis of the model.
    pub v: CMatrix,
    pub residuals: ModelResiduals,
}

/// The unitary `V : L²(M) → ℂ^n` sending `χ_{u_p} ē_s` to `P_p x_s`,
/// together with its residual report.
pub fn model_unitary(set: &SUSet, family: &CyclicFamily, tol: &Tolerances) -> Result<UnitaryModel> {
    let n = set.dim();
    if family.vectors.nrows() != n {
        return Err(Error::Dimension(format!("family vectors have length {}, expected {n}", family.vectors.nrows())));
    }
    let spectral = joint_spectral_decomposition(set, tol);
    let measure = extract_matrix_measure(&spectral, family, tol)?;
    let model = L2Model::new(measure, tol)?;
    if model.dim() != n {
        return Err(Error::NonCyclic(format!("L²(M) has dimension {} but the space has dimension {n}", model.dim())));
    }
    let fam_scale = (0..family.len()).map(|i| family.vector(i).norm()).fold(1.0, f64::max);

    let mut v = CMatrix::zeros(n, n);
    let mut fit = 0.0_f64;
    for p in 0..spectral.len() {
        let y = spectral.projection(p) * &family.vectors;
        let ct = model.factor(p).transpose();
        let block = &y * pinv(&ct, tol.rank_eps);
        fit = fit.max(max_abs_diff(&(&block * &ct), &y));
        let range = model.block(p);
        v.columns_mut(range.start, range.len()).copy_from(&block);
    }
    let well_definedness = fit / fam_scale;
    if well_definedness > tol.residual_eps {
        return Err(Error::WellDefinedness(well_definedness));
    }

    let id = CMatrix::identity(n, n);
    let v_inv = v
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NonCyclic("model map is singular".into()))?;
    let hermitian_intertwining = set
        .hermitian
        .iter()
        .enumerate()
        .map(|(j, s)| max_abs_diff(&(&v_inv * s * &v), &model.multiplication_x(j)))
        .collect();
    let unitary_intertwining = set
        .unitary
        .iter()
        .enumerate()
        .map(|(k, u)| max_abs_diff(&(&v_inv * u * &v), &model.multiplication_w(k)))
        .collect();
    let cyclic_vectors = (0..family.len())
        .map(|s| {
            let e_s = model.embed_with(|_| CVector::from_fn(family.len(), |i, _| c64(if i == s { 1.0 } else { 0.0 }, 0.0)));
            max_abs_vec(&(&v * e_s - family.vector(s)))
        })
        .fold(0.0, f64::max)
        / fam_scale;
    let residuals = ModelResiduals {
        unitarity_left: max_abs_diff(&(v.adjoint() * &v), &id),
        unitarity_right: max_abs_diff(&(&v * v.adjoint()), &id),
        hermitian_intertwining,
        unitary_intertwining,
        cyclic_vectors,
        well_definedness,
    };
    Ok(UnitaryModel { spectral, model, v, residuals })
}

/// Atomwise values `((E({x}) F({φ}) x, x))` for every pair of eigenvalues
/// of the single operators `S` and `U`, computed from their separate
/// spectral decompositions.
pub fn product_spectral_measure(s: &CMatrix, u: &CMatrix, x: &CVector, tol: &Tolerances) -> Result<Vec<(f64, f64, f64)>> {
    let es = joint_spectral_decomposition(&SUSet::new(vec![s.clone()], vec![], tol)?, tol);
    let fu = joint_spectral_decomposition(&SUSet::new(vec![], vec![u.clone()], tol)?, tol);
    let mut out = Vec::with_capacity(es.len() * fu.len());
    for p in 0..es.len() {
        let ep = es.projection(p);
        for q in 0..fu.len() {
            let fq = fu.projection(q);
            let mass = crate::gns::inner(&(&ep * (&fq * x)), x);
            out.push((es.points[p].x[0], fu.points[q].phi[0], mass.re));
        }
    }
    Ok(out)
}

/// Random commuting SU-set together with a cyclic family of minimal size.
#[derive(Debug, Clone)]
pub struct RandomSuSet {
    pub set: SUSet,
    pub family: CyclicFamily,
    pub multiplicities: Vec<usize>,
}

const REAL_GRID: i32 = 8;
const ANGLE_GRID: i32 = 16;

fn grid_point<R: Rng + ?Sized>(rng: &mut R, order: (usize, usize)) -> Vec<i32> {
    let mut t: Vec<i32> = (0..order.0).map(|_| rng.random_range(-REAL_GRID..=REAL_GRID)).collect();
    t.extend((0..order.1).map(|_| rng.random_range(-ANGLE_GRID / 2..ANGLE_GRID / 2)));
    t
}

/// Seeded instance with a random multiplicity pattern: half of the
/// instances have simple joint spectrum, the rest repeat joint tuples.
pub fn random_su_set(n: usize, order: (usize, usize), seed: u64) -> Result<RandomSuSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if n == 0 {
        return Err(Error::Dimension("dimension must be at least 1".into()));
    }
    let capacity = (2 * REAL_GRID as usize + 1).pow(order.0 as u32) * (ANGLE_GRID as usize).pow(order.1 as u32);
    let distinct = if rng.random_bool(0.5) { n } else { rng.random_range(1..=n) };
    let distinct = distinct.min(capacity);
    let mut mult = vec![1usize; distinct];
    for _ in distinct..n {
        mult[rng.random_range(0..distinct)] += 1;
    }
    random_su_set_from(&mut rng, &mult, order)
}

/// Seeded instance whose joint eigenspaces have the given dimensions.
pub fn random_su_set_with_multiplicities(multiplicities: &[usize], order: (usize, usize), seed: u64) -> Result<RandomSuSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_su_set_from(&mut rng, multiplicities, order)
}

fn random_su_set_from(rng: &mut ChaCha8Rng, mult: &[usize], order: (usize, usize)) -> Result<RandomSuSet> {
    let tol = Tolerances::default();
    if order.0 + order.1 == 0 {
        return Err(Error::Dimension("order (r, l) needs r + l >= 1".into()));
    }
    if mult.is_empty() || mult.contains(&0) {
        return Err(Error::Dimension("multiplicities must be positive".into()));
    }
    let n: usize = mult.iter().sum();
    let capacity = (2 * REAL_GRID as usize + 1).pow(order.0 as u32) * (ANGLE_GRID as usize).pow(order.1 as u32);
    if mult.len() > capacity {
        return Err(Error::Dimension(format!("{} distinct joint points requested, grid holds {capacity}", mult.len())));
    }
    let mut tuples: Vec<Vec<i32>> = Vec::with_capacity(mult.len());
    while tuples.len() < mult.len() {
        let t = grid_point(rng, order);
        if !tuples.contains(&t) {
            tuples.push(t);
        }
    }
    let diag_entries: Vec<&Vec<i32>> = tuples.iter().zip(mult).flat_map(|(t, &m)| std::iter::repeat_n(t, m)).collect();
    let q = haar_unitary(rng, n);
    let conj = |d: Vec<Complex64>| {
        let dm = CMatrix::from_diagonal(&CVector::from_vec(d));
        let m = &q * dm * q.adjoint();
        m
    };
    let hermitian: Vec<CMatrix> = (0..order.0)
        .map(|j| {
            let mut s = conj(diag_entries.iter().map(|t| c64(t[j] as f64 * 0.25, 0.0)).collect());
            s = (&s + s.adjoint()) * c64(0.5, 0.0);
            s
        })
        .collect();
    let unitary: Vec<CMatrix> = (0..order.1)
        .map(|k| conj(diag_entries.iter().map(|t| Complex64::from_polar(1.0, 2.0 * PI * t[order.0 + k] as f64 / ANGLE_GRID as f64)).collect()))
        .collect();
    let set = SUSet::new(hermitian, unitary, &tol)?;
    let d = *mult.iter().max().unwrap();

    // Gaussian families are cyclic almost surely; the loop also rejects
    // draws whose projections onto some eigenspace are badly conditioned.
    let offsets: Vec<usize> = mult.iter().scan(0, |acc, &m| { let o = *acc; *acc += m; Some(o) }).collect();
    loop {
        let vectors: Vec<CVector> = (0..d).map(|_| random_complex_vector(rng, n)).collect();
        let family = CyclicFamily::new(vectors)?;
        let coords = q.adjoint() * family.matrix();
        let conditioned = mult.iter().zip(&offsets).all(|(&m, &o)| {
            let block = coords.rows(o, m).into_owned();
            let sv = crate::kernel::singular_values(&block);
            sv.last().copied().unwrap_or(0.0) >= 1e-3 * sv.first().copied().unwrap_or(0.0)
        });
        if conditioned && cyclicity_check(&set, &family, &tol)? {
            return Ok(RandomSuSet { set, family, multiplicities: mult.to_vec() });
        }
    }
}

/// JSON shape of an SU-set, optionally with a family of vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename = "su_set")]
pub struct SuSetJson {
    pub n: usize,
    #[serde(default)]
    pub hermitian: Vec<JsonMatrix>,
    #[serde(default)]
    pub unitary: Vec<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Vec<Vec<JsonComplex>>>,
}

impl SuSetJson {
    pub fn from_parts(set: &SUSet, family: Option<&CyclicFamily>) -> Self {
        SuSetJson {
            n: set.dim(),
            hermitian: set.hermitian.iter().map(matrix_to_json).collect(),
            unitary: set.unitary.iter().map(matrix_to_json).collect(),
            family: family.map(|f| (0..f.len()).map(|i| vector_to_json(&f.vector(i))).collect()),
        }
    }

    /// Matrices are parsed first (parse errors), then validated as an
    /// SU-set.
    pub fn into_parts(self, tol: &Tolerances) -> Result<(SUSet, Option<CyclicFamily>)> {
        let hermitian = self.hermitian.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
        let unitary = self.unitary.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
        let family = match &self.family {
            Some(vs) => Some(CyclicFamily::new(vs.iter().map(|v| vector_from_json(v)).collect())?),
            None => None,
        };
        let set = SUSet::new(hermitian, unitary, tol)?;
        if set.dim() != self.n {
            return Err(Error::Dimension(format!("declared n = {} but operators are {}×{}", self.n, set.dim(), set.dim())));
        }
        Ok((set, family))
    }
}
