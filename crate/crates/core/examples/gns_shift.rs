//! GNS space of a block Hankel form and the shift `x_k ↦ x_{k+1}`, which is
//! symmetric and reproduces every moment through its powers.

use polydensity::gns::{build_gns_hamburger, flat_power_residual, shift_operator};
use polydensity::kernel::{hermitian_eigen, Tolerances};
use polydensity::moments::matrix_moments;
use polydensity::random::{random_matrix_measure_with, MeasureParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> polydensity::Result<()> {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let m = random_matrix_measure_with(&mut rng, 3, 2, &MeasureParams::default());

    let seq = matrix_moments(&m, 2 * m.len());
    let space = build_gns_hamburger(&seq, m.len(), &tol)?;
    println!("GNS rank {} from {} vectors, Gram residual {:.2e}", space.rank(), space.len(), space.gram_residual());

    let shift = shift_operator(&space, &tol)?;
    println!("consistency {:.2e}, symmetry {:.2e}", shift.consistency_residual, shift.symmetry_residual(&space));
    println!("moment reproduction {:.2e}", flat_power_residual(&space, &shift.matrix));

    let eig = hermitian_eigen(&shift.matrix);
    let mut atoms: Vec<f64> = m.atoms().iter().map(|a| a.position).collect();
    atoms.sort_by(f64::total_cmp);
    println!("shift spectrum {:.6?}", eig.values);
    println!("atom positions {atoms:.6?}");
    Ok(())
}
