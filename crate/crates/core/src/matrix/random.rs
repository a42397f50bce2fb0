//! Seeded random ensembles: complex Gaussian matrices and Haar unitaries.

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::dense::{DenseMatrix, C64};

pub type LabRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian: real and imaginary parts iid `N(0, 1/2)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n).map(|_| complex_gaussian(rng)).collect()
}

pub fn real_gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DenseMatrix {
    // Row-major fill keeps streams stable if the backing layout changes.
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        data.push(complex_gaussian(rng));
    }
    DenseMatrix::wrap(Mat::from_fn(rows, cols, |i, j| data[i * cols + j]))
}

/// Haar-distributed unitary: QR of a Gaussian matrix with the phases of `diag(R)` divided out.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DenseMatrix {
    let g = gaussian_matrix(rng, n, n).into_inner();
    let qr = g.qr();
    let q = qr.compute_Q();
    let r = qr.R();
    let phases: Vec<C64> = (0..n)
        .map(|j| {
            let d = r[(j, j)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                C64::new(1.0, 0.0)
            }
        })
        .collect();
    DenseMatrix::wrap(Mat::from_fn(n, n, |i, j| q[(i, j)] * phases[j]))
}

/// Random unit vector of `l_2^n`.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    let v = gaussian_vector(rng, n);
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_is_unitary() {
        let mut rng = rng_from_seed(1);
        for n in [1, 3, 8] {
            let u = haar_unitary(&mut rng, n);
            assert!(u.unitarity_defect() < 1e-12);
        }
    }

    #[test]
    fn seeded_streams_repeat() {
        let a = gaussian_matrix(&mut rng_from_seed(9), 3, 4);
        let b = gaussian_matrix(&mut rng_from_seed(9), 3, 4);
        assert_eq!(a, b);
    }
}
