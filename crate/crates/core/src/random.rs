//! Seeded instance generators for measures and unitary matrices.
//!
//! Generated instances are deliberately well conditioned: atoms are kept a
//! minimum distance apart and nonzero weight eigenvalues stay in a fixed
//! band, so that rank decisions are unambiguous in double precision.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::kernel::{c64, CMatrix, Tolerances};
use crate::measures::{MatrixAtomicMeasure, StripAtomicMeasure};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureParams {
    pub max_atoms: usize,
    pub max_dim: usize,
    /// Atom coordinates are drawn from `[-position_bound, position_bound]`.
    pub position_bound: f64,
    pub min_gap: f64,
    /// Nonzero weight eigenvalues are drawn from this band.
    pub eigen_band: (f64, f64),
}

impl Default for MeasureParams {
    fn default() -> Self {
        MeasureParams { max_atoms: 6, max_dim: 4, position_bound: 1.5, min_gap: 0.3, eigen_band: (0.5, 2.0) }
    }
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the
/// phases of `diag(R)` moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(re, im)
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

pub fn random_complex_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> crate::kernel::CVector {
    crate::kernel::CVector::from_fn(n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(re, im)
    })
}

/// PSD `N×N` weight of the given rank with eigenvalues in `band`.
pub fn random_psd_weight<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize, band: (f64, f64)) -> CMatrix {
    let q = haar_unitary(rng, n);
    let mut d = CMatrix::zeros(n, n);
    for k in 0..rank.min(n) {
        d[(k, k)] = c64(rng.random_range(band.0..=band.1), 0.0);
    }
    &q * d * q.adjoint()
}

fn separated_positions<R: Rng + ?Sized>(rng: &mut R, count: usize, bound: f64, gap: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(count);
    while out.len() < count {
        let t = rng.random_range(-bound..=bound);
        if out.iter().all(|s| (s - t).abs() >= gap) {
            out.push(t);
        }
    }
    out
}

pub fn random_matrix_measure<R: Rng + ?Sized>(rng: &mut R, params: &MeasureParams) -> MatrixAtomicMeasure {
    let k = rng.random_range(1..=params.max_atoms);
    let n = rng.random_range(1..=params.max_dim);
    random_matrix_measure_with(rng, k, n, params)
}

/// `atoms` atoms of dimension `dim`; about half the weights are rank deficient.
pub fn random_matrix_measure_with<R: Rng + ?Sized>(
    rng: &mut R,
    atoms: usize,
    dim: usize,
    params: &MeasureParams,
) -> MatrixAtomicMeasure {
    let positions = separated_positions(rng, atoms, params.position_bound, params.min_gap);
    let atoms = positions
        .into_iter()
        .map(|t| {
            let rank = if rng.random_bool(0.5) { dim } else { rng.random_range(1..=dim) };
            (t, random_psd_weight(rng, dim, rank, params.eigen_band))
        })
        .collect();
    MatrixAtomicMeasure::new(dim, atoms, &Tolerances::default()).expect("generator produces valid measures")
}

pub fn random_strip_measure<R: Rng + ?Sized>(rng: &mut R, params: &MeasureParams) -> StripAtomicMeasure {
    let k = rng.random_range(1..=params.max_atoms);
    random_strip_measure_with(rng, k, params)
}

/// Roughly a third of the atoms share an `x` coordinate with an earlier
/// atom and differ only in angle.
pub fn random_strip_measure_with<R: Rng + ?Sized>(rng: &mut R, atoms: usize, params: &MeasureParams) -> StripAtomicMeasure {
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(atoms);
    while pts.len() < atoms {
        let x = if !pts.is_empty() && rng.random_bool(0.35) {
            pts[rng.random_range(0..pts.len())].0
        } else {
            rng.random_range(-params.position_bound..=params.position_bound)
        };
        let phi = rng.random_range(-PI..PI);
        let far = pts.iter().all(|&(y, psi)| {
            (x - y).abs() >= params.min_gap || crate::measures::angular_distance(phi, psi) >= params.min_gap
        });
        let x_ok = pts.iter().all(|&(y, _)| y == x || (x - y).abs() >= params.min_gap);
        if far && x_ok {
            pts.push((x, phi));
        }
    }
    let atoms = pts
        .into_iter()
        .map(|(x, phi)| (x, phi, rng.random_range(params.eigen_band.0..=params.eigen_band.1)))
        .collect();
    StripAtomicMeasure::new(atoms, &Tolerances::default()).expect("generator produces valid measures")
}
