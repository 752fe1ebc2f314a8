//! Moments of a two-atom matrix measure and of a strip measure, with the
//! positivity of the associated Hankel and Devinatz forms.

use polydensity::kernel::{c64, hermitian_eigen, CMatrix, Tolerances};
use polydensity::measures::{MatrixAtomicMeasure, StripAtomicMeasure};
use polydensity::moments::{block_hankel, devinatz_gram, matrix_moments, strip_moments};

fn main() -> polydensity::Result<()> {
    let tol = Tolerances::default();

    let w0 = CMatrix::from_row_slice(2, 2, &[c64(2.0, 0.0), c64(0.0, 1.0), c64(0.0, -1.0), c64(1.0, 0.0)]);
    let w1 = CMatrix::from_diagonal_element(2, 2, c64(1.0, 0.0));
    let m = MatrixAtomicMeasure::new(2, vec![(-1.0, w0), (0.5, w1)], &tol)?;

    let seq = matrix_moments(&m, 4);
    for (k, s) in seq.moments().iter().enumerate() {
        println!("S_{k} = {s:.4}");
    }
    let hankel = block_hankel(&seq, 2)?;
    let eig = hermitian_eigen(&hankel);
    println!("Γ_2 eigenvalues: {:.3?}", eig.values);

    let sigma = StripAtomicMeasure::new(vec![(0.0, 0.0, 1.0), (1.0, std::f64::consts::FRAC_PI_2, 0.5)], &tol)?;
    let table = strip_moments(&sigma, 2, 2);
    for m in 0..=2 {
        let row: Vec<String> = (-2..=2).map(|n| format!("{:.3}", table.get(m, n).unwrap())).collect();
        println!("s_{{{m},·}} = [{}]", row.join(", "));
    }
    let g = devinatz_gram(&table, 1, 1)?;
    println!("Devinatz Gram min eigenvalue: {:.3e}", hermitian_eigen(&g).values[0]);
    Ok(())
}
