//! Resolvents of the multiplication operator seen through moment data.
//!
//! The entries `(D_λ x_p, x_q)` are computed directly from the measure and
//! transported onto the Hilbert space built from the moments. For a
//! canonical solution `D_λ⁻¹ + λ` must be one λ-independent self-adjoint
//! operator, namely the image of multiplication by the variable.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gns::{build_gns_hamburger, build_gns_strip, flat_power_residual, gram_matching, strip_power_residual, GnsSpace};
use crate::json::JsonComplex;
use crate::kernel::{c64, condition_number, max_abs, max_abs_diff, pinv, CMatrix, Tolerances};
use crate::l2space::L2Model;
use crate::measures::{MatrixAtomicMeasure, StripAtomicMeasure};
use crate::moments::{matrix_moments, strip_moments};
use crate::polynomials::{monomial_family_strip, monomial_family_vector, strip_index_window};

/// Condition numbers above this are reported as near-singular.
pub const CONDITION_LIMIT: f64 = 1e12;

fn check_lambda(lambda: Complex64) -> Result<()> {
    if !lambda.re.is_finite() || !lambda.im.is_finite() {
        return Err(Error::Domain(format!("λ = {lambda} is not finite")));
    }
    if lambda.im <= 0.0 {
        return Err(Error::Domain(format!("λ = {lambda} is not in the open upper half-plane")));
    }
    Ok(())
}

/// Entry `((k, r), (l, s))` is `Σ_j t_j^{k+l} (W_j)_{rs} / (t_j − λ)`,
/// flat index `kN + r`.
pub fn resolvent_entries_hamburger(m: &MatrixAtomicMeasure, lambda: Complex64, window: usize) -> Result<CMatrix> {
    check_lambda(lambda)?;
    let n = m.dim();
    let size = (window + 1) * n;
    let mut out = CMatrix::zeros(size, size);
    for atom in m.atoms() {
        let t = atom.position;
        let pole = c64(1.0, 0.0) / (c64(t, 0.0) - lambda);
        for k in 0..=window {
            for l in 0..=window {
                let f = pole * t.powi((k + l) as i32);
                for r in 0..n {
                    for s in 0..n {
                        out[(k * n + r, l * n + s)] += f * atom.weight[(r, s)];
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Entry `((m, n), (m′, n′))` is
/// `Σ_j x_j^{m+m′} e^{i(n−n′)φ_j} w_j / (x_j − λ)`, lexicographic order.
pub fn resolvent_entries_strip(sigma: &StripAtomicMeasure, lambda: Complex64, m_max: usize, n_max: usize) -> Result<CMatrix> {
    check_lambda(lambda)?;
    let idx = strip_index_window(m_max, n_max);
    let mut out = CMatrix::zeros(idx.len(), idx.len());
    for atom in sigma.atoms() {
        let pole = c64(atom.mass, 0.0) / (c64(atom.x, 0.0) - lambda);
        for (p, &(m1, n1)) in idx.iter().enumerate() {
            for (q, &(m2, n2)) in idx.iter().enumerate() {
                let phase = Complex64::from_polar(1.0, (n1 - n2) as f64 * atom.phi);
                out[(p, q)] += pole * phase * atom.x.powi((m1 + m2) as i32);
            }
        }
    }
    Ok(out)
}

/// Operator on the space with `(D v_p, v_q) = R_pq`, i.e. `V* D V = Rᵀ`.
pub fn transport(space: &GnsSpace, entries: &CMatrix, tol: &Tolerances) -> CMatrix {
    let vp = pinv(space.vectors(), tol.rank_eps);
    vp.adjoint() * entries.transpose() * vp
}

fn chain_residual(space: &GnsSpace, d: &CMatrix, entries: &CMatrix) -> f64 {
    let v = space.vectors();
    max_abs_diff(&(v.adjoint() * d * v), &entries.transpose()) / max_abs(entries).max(1.0)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CanonicalResiduals {
    /// `max ‖(D_λ⁻¹ + λ) − (D_μ⁻¹ + μ)‖` over pairs in the λ-set.
    pub lambda_independence: f64,
    /// `max ‖T_λ − T_λ*‖` with `T_λ = D_λ⁻¹ + λ`.
    pub hermitian: f64,
    /// `max ‖T_λ − Â‖`, `Â` the image of multiplication by the variable.
    pub multiplication: f64,
    /// `max ‖D_λ − D_μ − (λ − μ) D_λ D_μ‖`.
    pub resolvent_identity: f64,
    /// `max |(D_λ v_p, v_q) − R_pq|` relative to the largest entry.
    pub entry_chain: f64,
    /// `max ‖Â^r v − v_shifted‖` over the window.
    pub shift_power: f64,
    /// Well-definedness and unitarity of the map onto the coordinate model.
    pub model_map: f64,
    /// Strip only: `max ‖D_λ B − B D_λ‖`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commutation_b: Option<f64>,
}

impl CanonicalResiduals {
    pub fn max(&self) -> f64 {
        [
            self.lambda_independence,
            self.hermitian,
            self.multiplication,
            self.resolvent_identity,
            self.entry_chain,
            self.shift_power,
            self.model_map,
            self.commutation_b.unwrap_or(0.0),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalReport {
    pub canonical: bool,
    pub max_residual: f64,
    pub lambda_set: Vec<JsonComplex>,
    pub flags: Vec<String>,
    pub space_dim: usize,
    pub condition_numbers: Vec<f64>,
    pub residuals: CanonicalResiduals,
}

pub fn default_lambdas() -> Vec<Complex64> {
    vec![c64(0.0, 1.0), c64(0.0, 2.0), c64(1.0, 1.0)]
}

struct Transported {
    space: GnsSpace,
    a_hat: CMatrix,
    model_map: f64,
}

/// `Â = U X U*` for the Gram-matching map `U` from the coordinate model.
fn transported_multiplication(space: GnsSpace, coords: &CMatrix, op: &CMatrix, tol: &Tolerances) -> Result<(Transported, CMatrix)> {
    let gm = gram_matching(&space, coords, tol)?;
    let a_hat = &gm.map * op * gm.map.adjoint();
    let model_map = gm.well_definedness.max(gm.isometry).max(gm.co_isometry);
    Ok((Transported { space, a_hat, model_map }, gm.map))
}

fn verify(
    t: Transported,
    entries: &[CMatrix],
    lambdas: &[Complex64],
    extra_unitary: Option<&CMatrix>,
    shift_power: f64,
    tol: &Tolerances,
) -> CanonicalReport {
    let dim = t.space.rank();
    let id = CMatrix::identity(dim, dim);
    let scale = max_abs(&t.a_hat).max(1.0);
    let mut flags = Vec::new();
    let mut res = CanonicalResiduals { shift_power, model_map: t.model_map, ..Default::default() };
    let mut conds = Vec::with_capacity(lambdas.len());
    let mut ds: Vec<CMatrix> = Vec::with_capacity(lambdas.len());
    let mut ts: Vec<Option<CMatrix>> = Vec::with_capacity(lambdas.len());

    for (lambda, r) in lambdas.iter().zip(entries) {
        let d = transport(&t.space, r, tol);
        res.entry_chain = res.entry_chain.max(chain_residual(&t.space, &d, r));
        let cond = condition_number(&d);
        conds.push(if cond.is_finite() { cond } else { f64::MAX });
        let inverse = if cond > CONDITION_LIMIT { None } else { d.clone().try_inverse() };
        match inverse {
            Some(inv) => {
                let tl = inv + &id * *lambda;
                res.hermitian = res.hermitian.max(max_abs_diff(&tl, &tl.adjoint()) / scale);
                res.multiplication = res.multiplication.max(max_abs_diff(&tl, &t.a_hat) / scale);
                ts.push(Some(tl));
            }
            None => {
                flags.push(format!("near_singular: D_λ at λ = {lambda} has condition number {cond:e}"));
                ts.push(None);
            }
        }
        if let Some(b) = extra_unitary {
            let c = &d * b - b * &d;
            let v = res.commutation_b.unwrap_or(0.0).max(max_abs(&c));
            res.commutation_b = Some(v);
        }
        ds.push(d);
    }
    for i in 0..lambdas.len() {
        for j in i + 1..lambdas.len() {
            if let (Some(a), Some(b)) = (&ts[i], &ts[j]) {
                res.lambda_independence = res.lambda_independence.max(max_abs_diff(a, b) / scale);
            }
            let lhs = &ds[i] - &ds[j];
            let rhs = &ds[i] * &ds[j] * (lambdas[i] - lambdas[j]);
            res.resolvent_identity = res.resolvent_identity.max(max_abs_diff(&lhs, &rhs));
        }
    }
    let max_residual = res.max();
    if max_residual > tol.residual_eps {
        flags.push(format!("residual {max_residual:e} exceeds tolerance {:e}", tol.residual_eps));
    }
    CanonicalReport {
        canonical: flags.is_empty(),
        max_residual,
        lambda_set: lambdas.iter().map(|&l| l.into()).collect(),
        flags,
        space_dim: dim,
        condition_numbers: conds,
        residuals: res,
    }
}

fn require_lambdas(lambdas: &[Complex64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::Domain("the λ-set is empty".into()));
    }
    lambdas.iter().try_for_each(|&l| check_lambda(l))
}

/// Window `n` defaults to the number of atoms.
pub fn verify_canonical_hamburger(m: &MatrixAtomicMeasure, lambdas: &[Complex64], window: Option<usize>, tol: &Tolerances) -> Result<CanonicalReport> {
    require_lambdas(lambdas)?;
    let n = window.unwrap_or(m.len());
    let space = build_gns_hamburger(&matrix_moments(m, 2 * n), n, tol)?;
    let model = L2Model::from_matrix(m, tol)?;
    let coords = model.embed_family_vector(&monomial_family_vector(m.dim(), n));
    let (t, _) = transported_multiplication(space, &coords, &model.multiplication_x(0), tol)?;
    let shift = flat_power_residual(&t.space, &t.a_hat);
    let entries = lambdas
        .iter()
        .map(|&l| resolvent_entries_hamburger(m, l, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(verify(t, &entries, lambdas, None, shift, tol))
}

/// Window defaults to `(K, K)` for `K` atoms.
pub fn verify_canonical_strip(sigma: &StripAtomicMeasure, lambdas: &[Complex64], window: Option<(usize, usize)>, tol: &Tolerances) -> Result<CanonicalReport> {
    require_lambdas(lambdas)?;
    let (mw, nw) = window.unwrap_or((sigma.len(), sigma.len()));
    let gns = build_gns_strip(&strip_moments(sigma, 2 * mw, 2 * nw), mw, nw, tol)?;
    let model = L2Model::from_strip(sigma, tol)?;
    let coords = model.embed_family_strip(&monomial_family_strip(mw, nw));
    let (t, map) = transported_multiplication(gns.space.clone(), &coords, &model.multiplication_x(0), tol)?;
    let b = &map * model.multiplication_w(0) * map.adjoint();
    let structural = gns.residuals().max();
    let b_match = max_abs_diff(&b, &gns.b0.matrix);
    let shift = strip_power_residual(&t.space, &t.a_hat);
    let entries = lambdas
        .iter()
        .map(|&l| resolvent_entries_strip(sigma, l, mw, nw))
        .collect::<Result<Vec<_>>>()?;
    let mut report = verify(t, &entries, lambdas, Some(&gns.b0.matrix), shift, tol);
    if structural.max(b_match) > tol.residual_eps {
        report.flags.push(format!("strip operators A₀, B₀, J₀ residual {:e}", structural.max(b_match)));
        report.canonical = false;
    }
    report.max_residual = report.max_residual.max(structural).max(b_match);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CayleyReport {
    pub max_deviation: f64,
    pub k_range: (i32, i32),
    pub n_range: (i32, i32),
    pub window: (usize, usize),
    /// `‖C C⁻¹ − I‖_max` for the computed inverse.
    pub inverse_residual: f64,
    /// `max_j ||(x_j + i)/(x_j − i)| − 1|`.
    pub unimodularity: f64,
}

/// Compares `((I + 2i D_i)^k x_{0,n}, x_{0,0})` with
/// `Σ_j ((x_j + i)/(x_j − i))^k e^{inφ_j} w_j`. The window defaults to
/// `(K, max(K, |n|))` for `K` atoms.
pub fn cayley_power_check(
    sigma: &StripAtomicMeasure,
    k_range: (i32, i32),
    n_range: (i32, i32),
    window: Option<(usize, usize)>,
    tol: &Tolerances,
) -> Result<CayleyReport> {
    let n_need = n_range.0.unsigned_abs().max(n_range.1.unsigned_abs()) as usize;
    let k_atoms = sigma.len();
    let (mw, nw) = window.unwrap_or((k_atoms, k_atoms.max(n_need)));
    if nw < n_need {
        return Err(Error::Window(format!("window n_max = {nw} cannot hold x_(0,n) for |n| = {n_need}")));
    }
    let i = c64(0.0, 1.0);
    let gns = build_gns_strip(&strip_moments(sigma, 2 * mw, 2 * nw), mw, nw, tol)?;
    let space = &gns.space;
    let d = transport(space, &resolvent_entries_strip(sigma, i, mw, nw)?, tol);
    let dim = space.rank();
    let c = CMatrix::identity(dim, dim) + d * (i * 2.0);
    let c_inv = c.clone().try_inverse().ok_or_else(|| Error::Domain("I + 2iD_i is singular".into()))?;
    let inverse_residual = max_abs_diff(&(&c * &c_inv), &CMatrix::identity(dim, dim));
    let cayley: Vec<Complex64> = sigma.atoms().iter().map(|a| (c64(a.x, 0.0) + i) / (c64(a.x, 0.0) - i)).collect();
    let unimodularity = cayley.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);

    let x00 = space.vector(space.pair_index(0, 0).unwrap());
    let mut worst = 0.0_f64;
    for n in n_range.0..=n_range.1 {
        let x0n = space.vector(space.pair_index(0, n as i64).unwrap());
        for k in k_range.0..=k_range.1 {
            let step = if k >= 0 { &c } else { &c_inv };
            let mut v = x0n.clone();
            for _ in 0..k.unsigned_abs() {
                v = step * v;
            }
            let lhs = crate::gns::inner(&v, &x00);
            let rhs: Complex64 = sigma
                .atoms()
                .iter()
                .zip(&cayley)
                .map(|(a, z)| z.powi(k) * Complex64::from_polar(a.mass, n as f64 * a.phi))
                .sum();
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(CayleyReport { max_deviation: worst, k_range, n_range, window: (mw, nw), inverse_residual, unimodularity })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_matrix_measure, random_strip_measure, MeasureParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn one_atom(t: f64) -> MatrixAtomicMeasure {
        MatrixAtomicMeasure::new(1, vec![(t, CMatrix::identity(1, 1))], &Tolerances::default()).unwrap()
    }

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-13
    }

    #[test]
    fn hamburger_entries() {
        let i = c64(0.0, 1.0);
        let r = resolvent_entries_hamburger(&one_atom(2.0), i, 1).unwrap();
        assert!(close(r[(0, 0)], c64(0.4, 0.2)));
        assert!(close(r[(0, 1)], c64(2.0, 0.0) / c64(2.0, -1.0)));
        let two = MatrixAtomicMeasure::new(
            1,
            vec![(1.0, CMatrix::identity(1, 1)), (-1.0, CMatrix::identity(1, 1))],
            &Tolerances::default(),
        )
        .unwrap();
        assert!(close(resolvent_entries_hamburger(&two, i, 0).unwrap()[(0, 0)], i));
        assert!(matches!(resolvent_entries_hamburger(&two, c64(1.0, 0.0), 0), Err(Error::Domain(_))));
        assert!(matches!(resolvent_entries_hamburger(&two, c64(0.0, -1.0), 0), Err(Error::Domain(_))));
    }

    #[test]
    fn strip_entries() {
        let tol = Tolerances::default();
        let i = c64(0.0, 1.0);
        let s = StripAtomicMeasure::new(vec![(0.0, 0.0, 1.0)], &tol).unwrap();
        assert!(close(resolvent_entries_strip(&s, i, 0, 0).unwrap()[(0, 0)], i));
        let s = StripAtomicMeasure::new(vec![(1.0, PI / 2.0, 1.0)], &tol).unwrap();
        let r = resolvent_entries_strip(&s, i, 0, 1).unwrap();
        // index of (0, 1) is 2, of (0, 0) is 1
        assert!(close(r[(2, 1)], i * c64(1.0, 1.0) / 2.0));
    }

    #[test]
    fn strip_entries_conjugate_pattern() {
        let s = random_strip_measure(&mut ChaCha8Rng::seed_from_u64(7), &MeasureParams::default());
        let lam = c64(0.3, 1.0);
        let r = resolvent_entries_strip(&s, lam, 2, 2).unwrap();
        let idx = strip_index_window(2, 2);
        for (p, &(m1, n1)) in idx.iter().enumerate() {
            for (q, &(m2, n2)) in idx.iter().enumerate() {
                let direct: Complex64 = s
                    .atoms()
                    .iter()
                    .map(|a| {
                        let pole = c64(a.mass, 0.0) / (c64(a.x, 0.0) - lam.conj());
                        pole * Complex64::from_polar(1.0, (n2 - n1) as f64 * a.phi) * a.x.powi((m1 + m2) as i32)
                    })
                    .sum();
                assert!((r[(p, q)] - direct.conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn single_atom_canonical() {
        let tol = Tolerances::default();
        let rep = verify_canonical_hamburger(&one_atom(2.0), &[c64(0.0, 1.0), c64(0.0, 2.0)], None, &tol).unwrap();
        assert!(rep.canonical, "{rep:?}");
        assert_eq!(rep.space_dim, 1);
        let s = StripAtomicMeasure::new(vec![(1.0, PI / 2.0, 1.0)], &tol).unwrap();
        let rep = verify_canonical_strip(&s, &default_lambdas(), None, &tol).unwrap();
        assert!(rep.canonical, "{rep:?}");
    }

    #[test]
    fn transported_inverse_shift_single_atom() {
        let tol = Tolerances::default();
        let m = one_atom(2.0);
        let space = build_gns_hamburger(&matrix_moments(&m, 2), 1, &tol).unwrap();
        for lam in [c64(0.0, 1.0), c64(0.0, 2.0)] {
            let d = transport(&space, &resolvent_entries_hamburger(&m, lam, 1).unwrap(), &tol);
            let t = d.try_inverse().unwrap() + CMatrix::identity(1, 1) * lam;
            assert!((t[(0, 0)] - c64(2.0, 0.0)).norm() < 1e-12);
        }
        let s = StripAtomicMeasure::new(vec![(1.0, PI / 2.0, 1.0)], &tol).unwrap();
        let gns = build_gns_strip(&strip_moments(&s, 2, 2), 1, 1, &tol).unwrap();
        let d = transport(&gns.space, &resolvent_entries_strip(&s, c64(0.0, 1.0), 1, 1).unwrap(), &tol);
        let t = d.try_inverse().unwrap() + CMatrix::identity(1, 1) * c64(0.0, 1.0);
        assert!((t[(0, 0)] - c64(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rejects_bad_lambda() {
        let tol = Tolerances::default();
        let r = verify_canonical_hamburger(&one_atom(0.0), &[c64(1.0, 0.0)], None, &tol);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn cayley_examples() {
        let tol = Tolerances::default();
        let s = StripAtomicMeasure::new(vec![(1.0, PI / 2.0, 1.0)], &tol).unwrap();
        let rep = cayley_power_check(&s, (-3, 3), (-3, 3), None, &tol).unwrap();
        assert!(rep.max_deviation < 1e-12, "{rep:?}");
        let s = StripAtomicMeasure::new(vec![(0.0, 0.0, 1.0)], &tol).unwrap();
        let gns = build_gns_strip(&strip_moments(&s, 2, 2), 1, 1, &tol).unwrap();
        let d = transport(&gns.space, &resolvent_entries_strip(&s, c64(0.0, 1.0), 1, 1).unwrap(), &tol);
        let c = CMatrix::identity(1, 1) + d * c64(0.0, 2.0);
        assert!((c[(0, 0)] + c64(1.0, 0.0)).norm() < 1e-12);
        assert!(matches!(cayley_power_check(&s, (0, 1), (-3, 3), Some((1, 2)), &tol), Err(Error::Window(_))));
    }

    #[test]
    fn random_matrix_measures_are_canonical() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut worst = 0.0_f64;
        for _ in 0..40 {
            let m = random_matrix_measure(&mut rng, &MeasureParams::default());
            let rep = verify_canonical_hamburger(&m, &default_lambdas(), None, &tol).unwrap();
            worst = worst.max(rep.max_residual);
            assert!(rep.canonical, "{rep:?}");
        }
        eprintln!("worst hamburger residual {worst:e}");
    }

    #[test]
    fn random_strip_measures_are_canonical() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut worst = 0.0_f64;
        let mut worst_cayley = 0.0_f64;
        for _ in 0..40 {
            let s = random_strip_measure(&mut rng, &MeasureParams::default());
            let rep = verify_canonical_strip(&s, &default_lambdas(), None, &tol).unwrap();
            worst = worst.max(rep.max_residual);
            assert!(rep.canonical, "{rep:?}");
            let c = cayley_power_check(&s, (-3, 3), (-3, 3), None, &tol).unwrap();
            worst_cayley = worst_cayley.max(c.max_deviation);
            assert!(c.max_deviation <= 1e-8, "{c:?}");
        }
        eprintln!("worst strip residual {worst:e}, cayley {worst_cayley:e}");
    }
}
