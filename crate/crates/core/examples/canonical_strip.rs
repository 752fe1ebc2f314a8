//! Canonical check for a measure on the strip, followed by the Cayley power
//! identity relating `(I + 2i D_i)^k` to moments of `((x + i)/(x − i))^k e^{inφ}`.

use polydensity::kernel::Tolerances;
use polydensity::random::{random_strip_measure_with, MeasureParams};
use polydensity::resolvents::{cayley_power_check, default_lambdas, verify_canonical_strip};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> polydensity::Result<()> {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let sigma = random_strip_measure_with(&mut rng, 4, &MeasureParams::default());
    for a in sigma.atoms() {
        println!("atom x = {:+.3}, φ = {:+.3}, mass {:.3}", a.x, a.phi, a.mass);
    }

    let rep = verify_canonical_strip(&sigma, &default_lambdas(), None, &tol)?;
    println!("canonical {}, max residual {:.2e}, flags {:?}", rep.canonical, rep.max_residual, rep.flags);

    let cayley = cayley_power_check(&sigma, (-3, 3), (-2, 2), None, &tol)?;
    println!(
        "Cayley powers k ∈ {:?}, n ∈ {:?}: max deviation {:.2e} (window {:?})",
        cayley.k_range, cayley.n_range, cayley.max_deviation, cayley.window
    );
    Ok(())
}
