//! Matrix exponential by scaling and squaring with diagonal Padé approximants.
//!
//! The degree is chosen from the 1-norm using the backward-error thresholds of
//! Higham (2005), so small steps (the common case inside the integrators) cost
//! only a handful of products.

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.539_398_330_063_23e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068;
const THETA_13: f64 = 5.371920351148152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

pub fn matrix_exponential(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.rows(), found: a.cols() });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = a.rows();
    let norm = a.norm_one();
    if norm == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }
    for (theta, coeffs) in [
        (THETA_3, &B3[..]),
        (THETA_5, &B5[..]),
        (THETA_7, &B7[..]),
        (THETA_9, &B9[..]),
    ] {
        if norm <= theta {
            return pade_low(a, coeffs);
        }
    }

    let squarings = if norm > THETA_13 { (norm / THETA_13).log2().ceil() as i32 } else { 0 };
    let scaled = a.scale_real(2f64.powi(-squarings));
    let mut r = pade_13(&scaled)?;
    for _ in 0..squarings {
        r = r.matmul(&r);
    }
    Ok(r)
}

/// Padé approximant of degree m = coeffs.len() − 1 ∈ {3, 5, 7, 9}.
fn pade_low(a: &ComplexMatrix, b: &[f64]) -> Result<ComplexMatrix> {
    let n = a.rows();
    let id = ComplexMatrix::identity(n);
    let a2 = a.matmul(a);
    let m = b.len() - 1;
    let mut powers = vec![id.clone(), a2.clone()];
    while powers.len() <= m / 2 {
        let next = powers.last().unwrap().matmul(&a2);
        powers.push(next);
    }
    let mut odd = ComplexMatrix::zeros(n, n);
    let mut even = ComplexMatrix::zeros(n, n);
    for (k, p) in powers.iter().enumerate() {
        if 2 * k < m {
            odd += &p.scale_real(b[2 * k + 1]);
        }
        if 2 * k <= m {
            even += &p.scale_real(b[2 * k]);
        }
    }
    let u = a.matmul(&odd);
    let p = &even + &u;
    let q = &even - &u;
    q.solve(&p)
}

fn pade_13(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let b = &B13;
    let n = a.rows();
    let id = ComplexMatrix::identity(n);
    let a2 = a.matmul(a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);

    let mut inner_u = a6.scale_real(b[13]);
    inner_u += &a4.scale_real(b[11]);
    inner_u += &a2.scale_real(b[9]);
    let mut u = a6.matmul(&inner_u);
    u += &a6.scale_real(b[7]);
    u += &a4.scale_real(b[5]);
    u += &a2.scale_real(b[3]);
    u += &id.scale_real(b[1]);
    let u = a.matmul(&u);

    let mut inner_v = a6.scale_real(b[12]);
    inner_v += &a4.scale_real(b[10]);
    inner_v += &a2.scale_real(b[8]);
    let mut v = a6.matmul(&inner_v);
    v += &a6.scale_real(b[6]);
    v += &a4.scale_real(b[4]);
    v += &a2.scale_real(b[2]);
    v += &id.scale_real(b[0]);

    let p = &v + &u;
    let q = &v - &u;
    q.solve(&p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Truncated power series with enough terms for ‖A‖ ≤ 1.
    fn series_exp(a: &ComplexMatrix, terms: usize) -> ComplexMatrix {
        let n = a.rows();
        let mut acc = ComplexMatrix::identity(n);
        let mut term = ComplexMatrix::identity(n);
        for k in 1..terms {
            term = term.matmul(a).scale_real(1.0 / k as f64);
            acc += &term;
        }
        acc
    }

    /// Series evaluated on A/2^s, then squared; independent of the Padé path.
    fn reference_exp(a: &ComplexMatrix) -> ComplexMatrix {
        let s = (a.norm_one().max(1.0)).log2().ceil() as i32 + 2;
        let mut r = series_exp(&a.scale_real(2f64.powi(-s)), 30);
        for _ in 0..s {
            r = r.matmul(&r);
        }
        r
    }

    #[test]
    fn zero_gives_identity() {
        let e = matrix_exponential(&ComplexMatrix::zeros(3, 3)).unwrap();
        assert_eq!(e, ComplexMatrix::identity(3));
    }

    #[test]
    fn rotation_generator() {
        let theta = 0.3_f64;
        let a = ComplexMatrix::from_real_rows(&[&[0.0, -theta], &[theta, 0.0]]);
        let e = matrix_exponential(&a).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[
            &[theta.cos(), -theta.sin()],
            &[theta.sin(), theta.cos()],
        ]);
        assert!(e.distance(&expected) < 1e-15);
        assert!(e.distance(&series_exp(&a, 40)) < 1e-13);
    }

    #[test]
    fn nilpotent_series_terminates() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let e = matrix_exponential(&a).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(e.distance(&expected) < 1e-15);
    }

    #[test]
    fn non_finite_is_rejected() {
        let mut a = ComplexMatrix::zeros(2, 2);
        a[(0, 1)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(matrix_exponential(&a), Err(Error::NonFinite)));
    }

    #[test]
    fn matches_reference_across_degrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for target in [1e-3, 0.1, 0.8, 1.9, 4.0, 10.0] {
            let g = ComplexMatrix::from_fn(6, 6, |_, _| {
                C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let a = g.scale_real(target / g.norm_one());
            let e = matrix_exponential(&a).unwrap();
            let r = reference_exp(&a);
            let rel = e.distance(&r) / r.frobenius_norm();
            assert!(rel <= 1e-12, "norm {target}: relative error {rel}");
        }
    }

    #[test]
    fn inverse_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for target in [0.5, 3.0, 10.0] {
            let g = ComplexMatrix::from_fn(4, 4, |_, _| {
                C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
            });
            let a = g.scale_real(target / g.norm_one());
            let prod = matrix_exponential(&a).unwrap().matmul(&matrix_exponential(&-&a).unwrap());
            assert!(prod.distance(&ComplexMatrix::identity(4)) <= 1e-10);
        }
    }
}
