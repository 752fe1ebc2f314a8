//! Joint spectral decomposition of a random commuting set of Hermitian and
//! unitary matrices, and its unitary model as multiplication operators.

use polydensity::kernel::Tolerances;
use polydensity::spectral::{
    cyclicity_check, joint_spectral_decomposition, model_unitary, random_su_set_with_multiplicities, spectral_multiplicity,
};

fn main() -> polydensity::Result<()> {
    let tol = Tolerances::default();
    let g = random_su_set_with_multiplicities(&[1, 2, 1, 3], (1, 1), 5)?;
    let set = &g.set;

    let e = joint_spectral_decomposition(set, &tol);
    println!("dimension {}, {} joint points, multiplicity {}", set.dim(), e.len(), spectral_multiplicity(set, &tol));
    for (p, q) in e.points.iter().zip(&e.bases) {
        println!("  x = {:+.3?}  φ = {:+.4?}  dim {}", p.x, p.phi, q.ncols());
    }
    println!("projection residuals {:.2e}", e.residuals(set).max());

    println!("family of {} vectors cyclic: {}", g.family.len(), cyclicity_check(set, &g.family, &tol)?);
    let model = model_unitary(set, &g.family, &tol)?;
    let r = &model.residuals;
    println!(
        "V*V − I {:.2e}, VV* − I {:.2e}, intertwining {:.2e}, max {:.2e}",
        r.unitarity_left,
        r.unitarity_right,
        r.hermitian_intertwining.iter().chain(&r.unitary_intertwining).fold(0.0_f64, |a, &b| a.max(b)),
        r.max()
    );
    Ok(())
}
