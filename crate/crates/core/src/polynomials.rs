//! Vector-valued polynomials `p(x) = (p_0(x), …, p_{N−1}(x))` and
//! power-trigonometric polynomials `Σ α_{m,n} x^m e^{inφ}`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::kernel::{c64, CVector};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Component `s` holds the coefficients of `p_s`, constant term first.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorPolynomial {
    components: Vec<Vec<Complex64>>,
}

impl VectorPolynomial {
    pub fn new(components: Vec<Vec<Complex64>>) -> Self {
        let mut p = VectorPolynomial { components };
        p.canonicalize();
        p
    }

    pub fn zero(dim: usize) -> Self {
        VectorPolynomial { components: vec![Vec::new(); dim] }
    }

    /// `x^k ē_s` in dimension `dim`.
    pub fn monomial(dim: usize, degree: usize, s: usize) -> Self {
        assert!(s < dim, "component {s} out of range for dimension {dim}");
        let mut components = vec![Vec::new(); dim];
        components[s] = vec![ZERO; degree + 1];
        components[s][degree] = ONE;
        VectorPolynomial { components }
    }

    fn canonicalize(&mut self) {
        for c in &mut self.components {
            while c.last() == Some(&ZERO) {
                c.pop();
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.components
    }

    /// `None` stands for the zero polynomial (degree −∞).
    pub fn degree(&self) -> Option<usize> {
        self.components.iter().filter_map(|c| c.len().checked_sub(1)).max()
    }

    /// Row vector `(p_0(t), …, p_{N−1}(t))`, each component by Horner.
    pub fn eval(&self, t: f64) -> CVector {
        let t = c64(t, 0.0);
        CVector::from_iterator(
            self.dim(),
            self.components.iter().map(|c| c.iter().rev().fold(ZERO, |acc, &a| acc * t + a)),
        )
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        VectorPolynomial::new(
            self.components.iter().map(|c| c.iter().map(|&a| a * alpha).collect()).collect(),
        )
    }
}

impl Add for &VectorPolynomial {
    type Output = VectorPolynomial;

    fn add(self, rhs: &VectorPolynomial) -> VectorPolynomial {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in polynomial sum");
        let components = self
            .components
            .iter()
            .zip(&rhs.components)
            .map(|(a, b)| {
                let len = a.len().max(b.len());
                (0..len)
                    .map(|k| a.get(k).copied().unwrap_or(ZERO) + b.get(k).copied().unwrap_or(ZERO))
                    .collect()
            })
            .collect();
        VectorPolynomial::new(components)
    }
}

/// `{x^k ē_s}` for `k ≤ max_degree`, ordered by the flat index `kN + s`.
pub fn monomial_family_vector(dim: usize, max_degree: usize) -> Vec<VectorPolynomial> {
    (0..=max_degree)
        .flat_map(|k| (0..dim).map(move |s| VectorPolynomial::monomial(dim, k, s)))
        .collect()
}

/// Finitely supported `(m, n) ↦ α_{m,n}`; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PowerTrigPolynomial {
    terms: BTreeMap<(u32, i32), Complex64>,
}

impl PowerTrigPolynomial {
    pub fn new(terms: impl IntoIterator<Item = ((u32, i32), Complex64)>) -> Self {
        let mut p = PowerTrigPolynomial::default();
        for (key, a) in terms {
            *p.terms.entry(key).or_insert(ZERO) += a;
        }
        p.canonicalize();
        p
    }

    /// `x^m e^{inφ}`.
    pub fn monomial(m: u32, n: i32) -> Self {
        PowerTrigPolynomial::new([((m, n), ONE)])
    }

    fn canonicalize(&mut self) {
        self.terms.retain(|_, a| *a != ZERO);
    }

    pub fn terms(&self) -> &BTreeMap<(u32, i32), Complex64> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Σ α_{m,n} x^m e^{inφ}` with `0⁰ = 1`.
    pub fn eval(&self, x: f64, phi: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&(m, n), &a)| a * x.powi(m as i32) * Complex64::from_polar(1.0, n as f64 * phi))
            .sum()
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        PowerTrigPolynomial::new(self.terms.iter().map(|(&k, &a)| (k, a * alpha)))
    }
}

impl Add for &PowerTrigPolynomial {
    type Output = PowerTrigPolynomial;

    fn add(self, rhs: &PowerTrigPolynomial) -> PowerTrigPolynomial {
        PowerTrigPolynomial::new(self.terms.iter().chain(rhs.terms.iter()).map(|(&k, &a)| (k, a)))
    }
}

impl Mul for &PowerTrigPolynomial {
    type Output = PowerTrigPolynomial;

    fn mul(self, rhs: &PowerTrigPolynomial) -> PowerTrigPolynomial {
        let mut out = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for (&(m1, n1), &a) in &self.terms {
            for (&(m2, n2), &b) in &rhs.terms {
                out.push(((m1 + m2, n1 + n2), a * b));
            }
        }
        PowerTrigPolynomial::new(out)
    }
}

/// `{x^m e^{inφ}}` for `m ≤ m_max`, `|n| ≤ n_max`, lexicographic in `(m, n)`.
pub fn monomial_family_strip(m_max: usize, n_max: usize) -> Vec<PowerTrigPolynomial> {
    strip_index_window(m_max, n_max)
        .into_iter()
        .map(|(m, n)| PowerTrigPolynomial::monomial(m as u32, n as i32))
        .collect()
}

/// Index pairs `(m, n)` of the strip window in the same order as
/// [`monomial_family_strip`].
pub fn strip_index_window(m_max: usize, n_max: usize) -> Vec<(usize, i64)> {
    let n_max = n_max as i64;
    (0..=m_max).flat_map(|m| (-n_max..=n_max).map(move |n| (m, n))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn cz(z: Complex64, w: Complex64) -> bool {
        (z - w).norm() < 1e-12
    }

    #[test]
    fn eval_vector_examples() {
        let p = VectorPolynomial::new(vec![vec![ONE], vec![ZERO, ONE]]);
        let v = p.eval(2.0);
        assert_eq!(v.as_slice(), &[c64(1.0, 0.0), c64(2.0, 0.0)]);

        let p = VectorPolynomial::new(vec![vec![ZERO, ZERO, ONE], vec![]]);
        assert_eq!(p.eval(-1.0).as_slice(), &[c64(1.0, 0.0), ZERO]);

        let z = VectorPolynomial::zero(3);
        assert_eq!(z.eval(7.5).as_slice(), &[ZERO; 3]);
        assert_eq!(z.degree(), None);
    }

    #[test]
    fn canonicalization_strips_trailing_zeros() {
        let p = VectorPolynomial::new(vec![vec![ONE, ZERO, ZERO], vec![ZERO]]);
        assert_eq!(p.components(), &[vec![ONE], vec![]]);
        assert_eq!(p.degree(), Some(0));
        let q = PowerTrigPolynomial::new([((0, 0), ONE), ((0, 0), -ONE), ((1, 2), ONE)]);
        assert_eq!(q.terms().len(), 1);
    }

    #[test]
    fn eval_strip_examples() {
        let one = PowerTrigPolynomial::monomial(0, 0);
        assert!(cz(one.eval(3.3, -1.2), ONE));
        assert!(cz(one.eval(0.0, 0.0), ONE));
        assert!(cz(PowerTrigPolynomial::monomial(1, 1).eval(2.0, PI / 2.0), c64(0.0, 2.0)));
        let p = &PowerTrigPolynomial::monomial(0, 1) + &PowerTrigPolynomial::monomial(0, -1);
        assert!(cz(p.eval(0.0, 0.0), c64(2.0, 0.0)));
    }

    #[test]
    fn monomial_family_vector_examples() {
        let fam = monomial_family_vector(2, 1);
        assert_eq!(
            fam,
            vec![
                VectorPolynomial::monomial(2, 0, 0),
                VectorPolynomial::monomial(2, 0, 1),
                VectorPolynomial::monomial(2, 1, 0),
                VectorPolynomial::monomial(2, 1, 1),
            ]
        );
        let fam = monomial_family_vector(1, 2);
        assert_eq!(fam.iter().map(|p| p.degree()).collect::<Vec<_>>(), vec![Some(0), Some(1), Some(2)]);
        assert_eq!(monomial_family_vector(3, 0).len(), 3);
    }

    #[test]
    fn monomial_family_strip_examples() {
        let fam = monomial_family_strip(0, 1);
        assert_eq!(
            fam,
            vec![
                PowerTrigPolynomial::monomial(0, -1),
                PowerTrigPolynomial::monomial(0, 0),
                PowerTrigPolynomial::monomial(0, 1)
            ]
        );
        assert_eq!(
            monomial_family_strip(1, 0),
            vec![PowerTrigPolynomial::monomial(0, 0), PowerTrigPolynomial::monomial(1, 0)]
        );
        assert_eq!(monomial_family_strip(0, 0), vec![PowerTrigPolynomial::monomial(0, 0)]);
    }

    fn coeff() -> impl Strategy<Value = Complex64> {
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| c64(a, b))
    }

    fn vector_poly(dim: usize) -> impl Strategy<Value = VectorPolynomial> {
        prop::collection::vec(prop::collection::vec(coeff(), 0..5), dim).prop_map(VectorPolynomial::new)
    }

    fn trig_poly() -> impl Strategy<Value = PowerTrigPolynomial> {
        prop::collection::vec(((0u32..4, -3i32..4), coeff()), 0..6).prop_map(PowerTrigPolynomial::new)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn vector_eval_is_linear(p in vector_poly(3), q in vector_poly(3), a in coeff(), b in coeff(), t in -2.0..2.0f64) {
            let lhs = (&p.scale(a) + &q.scale(b)).eval(t);
            let rhs = p.eval(t) * a + q.eval(t) * b;
            prop_assert!(crate::kernel::max_abs_vec(&(lhs - rhs)) <= 1e-9);
        }

        #[test]
        fn strip_eval_is_linear(p in trig_poly(), q in trig_poly(), a in coeff(), b in coeff(),
                                x in -2.0..2.0f64, phi in -4.0..4.0f64) {
            let lhs = (&p.scale(a) + &q.scale(b)).eval(x, phi);
            let rhs = p.eval(x, phi) * a + q.eval(x, phi) * b;
            prop_assert!((lhs - rhs).norm() <= 1e-9);
        }

        #[test]
        fn strip_eval_is_periodic(p in trig_poly(), x in -2.0..2.0f64, phi in -4.0..4.0f64) {
            let d = p.eval(x, phi + 2.0 * PI) - p.eval(x, phi);
            prop_assert!(d.norm() <= 1e-9);
        }

        #[test]
        fn family_sizes(n in 1usize..5, d in 0usize..6, m in 0usize..5, k in 0usize..5) {
            prop_assert_eq!(monomial_family_vector(n, d).len(), (d + 1) * n);
            prop_assert_eq!(monomial_family_strip(m, k).len(), (m + 1) * (2 * k + 1));
        }
    }
}
