//! Small dense matrix helpers on top of `nalgebra` fixed-size types.

use nalgebra::{DMatrix, SMatrix};

/// Padé coefficients for the degree-13 diagonal approximant of `exp`.
const PADE13: [f64; 14] = [
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

/// Largest 1-norm for which the unscaled degree-13 approximant is accurate to
/// double precision (Higham 2005).
const THETA13: f64 = 5.371_920_351_148_152;

/// Maximum absolute column sum.
pub fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé approximant.
///
/// Returns `None` if the Padé denominator is singular, which only happens for
/// non-finite input.
pub fn expm<const N: usize>(a: &SMatrix<f64, N, N>) -> Option<SMatrix<f64, N, N>> {
    let e = expm_dyn(&to_dynamic(a))?;
    Some(SMatrix::from_column_slice(e.as_slice()))
}

/// [`expm`] on a dynamically sized square matrix.
pub fn expm_dyn(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    assert!(a.is_square(), "matrix exponential needs a square matrix");
    if a.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let n = a.nrows();
    let norm = norm1(a);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = a * 2f64.powi(-squarings);

    let b = &PADE13;
    let ident = DMatrix::<f64>::identity(n, n);
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &ident * b[1];
    let u = &scaled * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &ident * b[0];

    let mut result = (&v - &u).lu().solve(&(&v + &u))?;
    for _ in 0..squarings {
        result = &result * &result;
    }
    Some(result)
}

/// 2-norm condition number from the singular values.
pub fn condition_number<const N: usize>(m: &SMatrix<f64, N, N>) -> f64 {
    let sv = to_dynamic(m).singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn to_dynamic<const R: usize, const C: usize>(m: &SMatrix<f64, R, C>) -> DMatrix<f64> {
    DMatrix::from_column_slice(R, C, m.as_slice())
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_symmetric_eigenvalue<const N: usize>(m: &SMatrix<f64, N, N>) -> f64 {
    let d = to_dynamic(m);
    ((&d + d.transpose()) * 0.5).symmetric_eigenvalues().min()
}

/// Numerical rank with tolerance `rel_tol * sigma_max`.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = m.singular_values();
    let max = sv.max();
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix2, Matrix3};

    #[test]
    fn expm_of_zero_is_identity() {
        let z = Matrix3::<f64>::zeros();
        assert_eq!(expm(&z).unwrap(), Matrix3::identity());
    }

    #[test]
    fn expm_diagonal() {
        let a = Matrix2::new(-1.0, 0.0, 0.0, 2.0);
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] - (-1f64).exp()).abs() < 1e-15);
        assert!((e[(1, 1)] - 2f64.exp()).abs() < 1e-14);
        assert_eq!(e[(0, 1)], 0.0);
    }

    #[test]
    fn expm_rotation_generator() {
        // exp([[0, -w], [w, 0]]) is a rotation by w.
        let w = 30.0;
        let a = Matrix2::new(0.0, -w, w, 0.0);
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] - w.cos()).abs() < 1e-12);
        assert!((e[(1, 0)] - w.sin()).abs() < 1e-12);
    }

    #[test]
    fn expm_rejects_nan() {
        let a = Matrix2::new(f64::NAN, 0.0, 0.0, 0.0);
        assert!(expm(&a).is_none());
    }

    #[test]
    fn rank_of_rank_one() {
        let m = Matrix3::new(1.0, 2.0, 3.0, 2.0, 4.0, 6.0, -1.0, -2.0, -3.0);
        let m = DMatrix::from_column_slice(3, 3, m.as_slice());
        assert_eq!(numerical_rank(&m, 1e-8), 1);
        assert_eq!(numerical_rank(&DMatrix::zeros(4, 2), 1e-8), 0);
    }
}
