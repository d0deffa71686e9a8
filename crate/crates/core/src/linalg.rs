//! Small dense linear-algebra helpers shared across the crate.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative threshold below which a Hessian eigenvalue counts as zero.
pub const RANK_ZERO_REL: f64 = 1e-8;

/// Upper edge of the dead band: eigenvalues with relative magnitude in
/// `[RANK_ZERO_REL, RANK_AMBIG_REL)` are neither zero nor trustworthy.
pub const RANK_AMBIG_REL: f64 = 1e-6;

/// Eigen-decomposition of a symmetric matrix with rank bookkeeping.
pub struct SymmetricSpectrum {
    /// Eigenvalues sorted ascending by magnitude of nothing in particular;
    /// paired with `vectors` column-wise.
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    /// Indices of eigenvalues classified as zero.
    pub kernel: Vec<usize>,
    /// Indices of positive / negative eigenvalues.
    pub positive: Vec<usize>,
    pub negative: Vec<usize>,
}

/// Classifies the spectrum of a symmetric matrix under the rank tolerance.
/// Eigenvalues in the dead band raise [`Error::RankAmbiguity`].
pub fn classified_spectrum(matrix: &DMatrix<f64>) -> Result<SymmetricSpectrum> {
    let n = matrix.nrows();
    if n == 0 {
        return Ok(SymmetricSpectrum {
            values: vec![],
            vectors: DMatrix::zeros(0, 0),
            kernel: vec![],
            positive: vec![],
            negative: vec![],
        });
    }
    let eig = matrix.clone().symmetric_eigen();
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let radius = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = radius.max(1.0);
    let band_lo = RANK_ZERO_REL * scale;
    let band_hi = RANK_AMBIG_REL * scale;
    let mut kernel = vec![];
    let mut positive = vec![];
    let mut negative = vec![];
    for (i, v) in values.iter().enumerate() {
        let mag = v.abs();
        if mag < band_lo {
            kernel.push(i);
        } else if mag < band_hi {
            return Err(Error::RankAmbiguity {
                eigenvalue: *v,
                band_lo,
                band_hi,
            });
        } else if *v > 0.0 {
            positive.push(i);
        } else {
            negative.push(i);
        }
    }
    Ok(SymmetricSpectrum {
        values,
        vectors: eig.eigenvectors,
        kernel,
        positive,
        negative,
    })
}

/// Invertibility test under the rank tolerance; `Ok(false)` means confidently
/// singular, the dead band raises [`Error::RankAmbiguity`].
pub fn invertible_under_tolerance(matrix: &DMatrix<f64>) -> Result<bool> {
    if matrix.nrows() == 0 {
        return Ok(true);
    }
    let svd = matrix.clone().svd(false, false);
    let sigma_max = svd.singular_values.iter().fold(0.0f64, |m, s| m.max(*s));
    let sigma_min = svd.singular_values.iter().fold(f64::MAX, |m, s| m.min(*s));
    let scale = sigma_max.max(1.0);
    if sigma_min < RANK_ZERO_REL * scale {
        return Ok(false);
    }
    if sigma_min < RANK_AMBIG_REL * scale {
        return Err(Error::RankAmbiguity {
            eigenvalue: sigma_min,
            band_lo: RANK_ZERO_REL * scale,
            band_hi: RANK_AMBIG_REL * scale,
        });
    }
    Ok(true)
}

/// Condition estimate sigma_max / sigma_min of a square matrix.
pub fn condition_estimate(matrix: &DMatrix<f64>) -> f64 {
    let svd = matrix.clone().svd(false, false);
    let sigma_max = svd.singular_values.iter().fold(0.0f64, |m, s| m.max(*s));
    let sigma_min = svd.singular_values.iter().fold(f64::MAX, |m, s| m.min(*s));
    if sigma_min == 0.0 {
        f64::INFINITY
    } else {
        sigma_max / sigma_min
    }
}

/// In-place Gaussian elimination with partial pivoting. Overwrites `a`
/// (row-major, n×n) and `b`; the solution lands in `b`. Avoids allocation so
/// the integrator hot loop stays cheap.
pub fn solve_dense_inplace(a: &mut [f64], b: &mut [f64], n: usize) -> Result<()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col * n + col].abs();
        for row in col + 1..n {
            let mag = a[row * n + col].abs();
            if mag > best {
                best = mag;
                pivot = row;
            }
        }
        if best < 1e-300 {
            return Err(Error::SingularLinearPart { sigma_min: best });
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col * n + k] * b[k];
        }
        b[col] = acc / a[col * n + col];
    }
    Ok(())
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Tricomi initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Standard symplectic matrix J of size 2n, block form [[0, I], [-I, 0]].
pub fn standard_symplectic_matrix(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

/// Max-norm of `MᵀJM − J`; zero for exactly symplectic M.
pub fn symplectic_defect(m: &DMatrix<f64>) -> f64 {
    let two_n = m.nrows();
    debug_assert_eq!(two_n % 2, 0);
    let j = standard_symplectic_matrix(two_n / 2);
    let d = m.transpose() * &j * m - &j;
    d.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Solves `a x = b` by LU, with a library-grade error.
pub fn lu_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or(Error::SingularLinearPart { sigma_min: 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (nodes, weights) = gauss_legendre(32);
        // Degree 63 is integrated exactly; test x^10 on [-1, 1].
        let integral: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * x.powi(10))
            .sum();
        assert!((integral - 2.0 / 11.0).abs() < 1e-13);
        let total: f64 = weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-13);
    }

    #[test]
    fn dense_solver_matches_lu() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, -1.0, 0.5, -1.0, 2.0]);
        let b = DVector::from_column_slice(&[1.0, -2.0, 0.5]);
        let expect = lu_solve(&a, &b).unwrap();
        let mut a_flat: Vec<f64> = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)])
            .collect();
        let mut b_flat = vec![1.0, -2.0, 0.5];
        solve_dense_inplace(&mut a_flat, &mut b_flat, 3).unwrap();
        for i in 0..3 {
            assert!((b_flat[i] - expect[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn spectrum_dead_band_raises() {
        let m = DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, 1e-7]));
        assert!(matches!(
            classified_spectrum(&m),
            Err(Error::RankAmbiguity { .. })
        ));
        let m = DMatrix::from_diagonal(&DVector::from_column_slice(&[1.0, 1e-10]));
        let s = classified_spectrum(&m).unwrap();
        assert_eq!(s.kernel.len(), 1);
        assert_eq!(s.positive.len(), 1);
    }
}
