//! Density of polynomials in L² for random measures: the span of monomials
//! saturates at the dimension of the space.

use polydensity::kernel::Tolerances;
use polydensity::l2space::{density_test_matrix, density_test_strip};
use polydensity::random::{random_matrix_measure, random_strip_measure, MeasureParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> polydensity::Result<()> {
    let tol = Tolerances::default();
    let params = MeasureParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    for _ in 0..4 {
        let m = random_matrix_measure(&mut rng, &params);
        let r = density_test_matrix(&m, &tol)?;
        println!(
            "matrix  K={} n={}: dim L² = {:2}, span = {:2}, saturation degree {:?}, dense {}",
            m.len(),
            m.dim(),
            r.space_dim,
            r.span_dim,
            r.saturation_degree,
            r.dense
        );
    }
    for _ in 0..4 {
        let s = random_strip_measure(&mut rng, &params);
        let r = density_test_strip(&s, &tol)?;
        println!(
            "strip   K={}: dim L² = {:2}, span = {:2}, window {:?}, dense {}",
            s.len(),
            r.space_dim,
            r.span_dim,
            r.saturation_window.map(|w| (w.m_max, w.n_max)),
            r.dense
        );
    }
    Ok(())
}
