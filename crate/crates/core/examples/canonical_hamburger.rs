//! Resolvent entries of a matrix measure transported into the GNS space:
//! the resulting operators are independent of λ and form the resolvent of a
//! self-adjoint extension of the shift.

use polydensity::kernel::Tolerances;
use polydensity::random::{random_matrix_measure_with, MeasureParams};
use polydensity::resolvents::{default_lambdas, verify_canonical_hamburger};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> polydensity::Result<()> {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let m = random_matrix_measure_with(&mut rng, 4, 2, &MeasureParams::default());

    let rep = verify_canonical_hamburger(&m, &default_lambdas(), None, &tol)?;
    println!("space dim {}, canonical {}, max residual {:.2e}", rep.space_dim, rep.canonical, rep.max_residual);
    println!("{}", serde_json::to_string_pretty(&rep.residuals).expect("residuals serialize"));
    Ok(())
}
