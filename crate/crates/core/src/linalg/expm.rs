//! Matrix exponential by scaling and squaring with diagonal Padé approximants.
//!
//! The degree is picked from the induced 1-norm using the backward-error
//! bounds θ_m of Higham (2005). No eigendecomposition is involved, so the
//! routine is exact (to rounding) on defective matrices such as Jordan
//! blocks.

use faer::linalg::solvers::Solve;
use faer::Mat;

use super::{ComplexMatrix, C64};
use crate::error::Result;

const THETA_3: f64 = 1.495_585_217_958_292e-2;
const THETA_5: f64 = 2.539_398_330_063_23e-1;
const THETA_7: f64 = 9.504_178_996_162_932e-1;
const THETA_9: f64 = 2.097_847_961_257_068e0;
const THETA_13: f64 = 5.371_920_351_148_152e0;

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1512.0,
    56.0,
    1.0,
];
const PADE_9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE_13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Computes `e^A`.
///
/// Fails with an invalid-argument error on non-finite input.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.ensure_finite()?;
    let n = a.dim();
    let a = a.as_faer();
    let norm = one_norm(a);

    let small: [(&[f64], f64); 4] = [
        (&PADE_3, THETA_3),
        (&PADE_5, THETA_5),
        (&PADE_7, THETA_7),
        (&PADE_9, THETA_9),
    ];
    for (coeffs, theta) in small {
        if norm <= theta {
            let (u, v) = pade_low(a, coeffs);
            return Ok(ComplexMatrix::from_faer(solve_pade(&u, &v)));
        }
    }

    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = faer::Scale(C64::new(0.5f64.powi(squarings), 0.0)) * a;
    let (u, v) = pade_13(&scaled, n);
    let mut result = solve_pade(&u, &v);
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(ComplexMatrix::from_faer(result))
}

fn one_norm(a: &Mat<C64>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scaled_identity(n: usize, c: f64) -> Mat<C64> {
    Mat::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(c, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

fn axpy(acc: &mut Mat<C64>, c: f64, x: &Mat<C64>) {
    *acc += faer::Scale(C64::new(c, 0.0)) * x;
}

/// Odd/even parts `U`, `V` of the degree-m Padé numerator for m ≤ 9.
fn pade_low(a: &Mat<C64>, b: &[f64]) -> (Mat<C64>, Mat<C64>) {
    let n = a.nrows();
    let a2 = a * a;
    let mut odd = scaled_identity(n, b[1]);
    let mut even = scaled_identity(n, b[0]);
    let mut power = a2.clone();
    let mut k = 2;
    while k < b.len() {
        axpy(&mut even, b[k], &power);
        if k + 1 < b.len() {
            axpy(&mut odd, b[k + 1], &power);
        }
        k += 2;
        if k < b.len() {
            power = &power * &a2;
        }
    }
    (a * &odd, even)
}

fn pade_13(a: &Mat<C64>, n: usize) -> (Mat<C64>, Mat<C64>) {
    let b = &PADE_13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let mut inner_u = Mat::<C64>::zeros(n, n);
    axpy(&mut inner_u, b[13], &a6);
    axpy(&mut inner_u, b[11], &a4);
    axpy(&mut inner_u, b[9], &a2);
    let mut u = &a6 * &inner_u;
    axpy(&mut u, b[7], &a6);
    axpy(&mut u, b[5], &a4);
    axpy(&mut u, b[3], &a2);
    u += scaled_identity(n, b[1]);
    let u = a * &u;

    let mut inner_v = Mat::<C64>::zeros(n, n);
    axpy(&mut inner_v, b[12], &a6);
    axpy(&mut inner_v, b[10], &a4);
    axpy(&mut inner_v, b[8], &a2);
    let mut v = &a6 * &inner_v;
    axpy(&mut v, b[6], &a6);
    axpy(&mut v, b[4], &a4);
    axpy(&mut v, b[2], &a2);
    v += scaled_identity(n, b[0]);
    (u, v)
}

/// Solves `(V − U) X = V + U`.
fn solve_pade(u: &Mat<C64>, v: &Mat<C64>) -> Mat<C64> {
    let p = v + u;
    let q = v - u;
    q.partial_piv_lu().solve(&p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn exponential_of_zero_is_identity() {
        let e = expm(&ComplexMatrix::zeros(3)).unwrap();
        assert!(e.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn jordan_generator_truncates_after_first_order() {
        // -i λt J₂ with λt = 1
        let gen = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, -1.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let e = expm(&gen).unwrap();
        let expected = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, -1.0), c(1.0, 0.0)],
        ])
        .unwrap();
        assert!(e.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn quarter_rotation_about_x() {
        let half_pi = std::f64::consts::FRAC_PI_2;
        let gen = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(0.0, -half_pi)],
            vec![c(0.0, -half_pi), c(0.0, 0.0)],
        ])
        .unwrap();
        let e = expm(&gen).unwrap();
        let expected = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(0.0, -1.0)],
            vec![c(0.0, -1.0), c(0.0, 0.0)],
        ])
        .unwrap();
        assert!(e.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn every_pade_degree_matches_scalar_exponential() {
        // 1x1 inputs exercise each θ bracket and the squaring branch
        for &x in &[1e-3, 0.2, 0.9, 2.0, 5.0, 40.0, -30.0] {
            let e = expm(&ComplexMatrix::from_real_diagonal(&[x])).unwrap();
            let rel = (e.get(0, 0).re - x.exp()).abs() / x.exp();
            assert!(rel < 1e-13, "x = {x}: rel err {rel}");
        }
    }

    #[test]
    fn rejects_non_finite_input() {
        let mut m = ComplexMatrix::zeros(2);
        m.set(0, 1, c(f64::INFINITY, 0.0));
        assert!(expm(&m).is_err());
    }
}
