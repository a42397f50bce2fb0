use serde::Serialize;

use crate::error::{LabError, Result};
use crate::finite::{sign_isometry, ProjectivePlane};
use crate::matrix::{DenseMatrix, C64};

/// `Id / sqrt(n)`, the unit-norm invariant supported on the diagonal.
pub fn basis_i(n: usize) -> DenseMatrix {
    DenseMatrix::identity(n).scale_real(1.0 / (n as f64).sqrt())
}

/// All-ones matrix over `n`, the unit-norm invariant spread over every pair.
pub fn basis_e(n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |_, _| C64::new(1.0 / n as f64, 0.0))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Projection {
    pub lambda: C64,
    pub mu: C64,
    /// Distance from `Y` to `span{I, E}`.
    pub residual: f64,
}

/// Orthogonal projection of `Y` onto `span{I, E}` through the 2x2 Gram system.
pub fn invariant_projection(y: &DenseMatrix) -> Result<Projection> {
    if !y.is_square() || y.rows() < 2 {
        return Err(LabError::Shape(format!(
            "need a square matrix of size >= 2, got {}x{}",
            y.rows(),
            y.cols()
        )));
    }
    let n = y.rows();
    let (i, e) = (basis_i(n), basis_e(n));
    let g = i.hs_inner(&e)?.re;
    let det = 1.0 - g * g;
    assert!(det > 0.0, "Gram matrix of I and E is singular for n = {n}");
    let ci = i.hs_inner(y)?;
    let ce = e.hs_inner(y)?;
    let lambda = (ci - ce * g) / det;
    let mu = (ce - ci * g) / det;
    let residual = y.sub(&i.scale(lambda))?.sub(&e.scale(mu))?.frobenius();
    Ok(Projection {
        lambda,
        mu,
        residual,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MuBound {
    /// `||E - v E v||_2`, evaluated directly.
    pub sign_gap: f64,
    /// `(2 - 2 n^{-2})^{1/2}`.
    pub sign_gap_formula: f64,
    pub identity_holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `(2 - 2n^{-2})^{1/2} |mu| <= (2R + 1) delta_0`, after checking the left factor against `||E - vEv||_2`.
pub fn mu_bound_check(mu: C64, delta0: f64, r: f64, plane: &ProjectivePlane) -> Result<MuBound> {
    let n = plane.len();
    let e = basis_e(n);
    let v = sign_isometry(plane);
    let sign_gap = e.sub(&v.matmul(&e)?.matmul(&v)?)?.frobenius();
    let nf = n as f64;
    let sign_gap_formula = (2.0 - 2.0 / (nf * nf)).sqrt();
    let lhs = sign_gap_formula * mu.norm();
    let rhs = (2.0 * r + 1.0) * delta0;
    Ok(MuBound {
        sign_gap,
        sign_gap_formula,
        identity_holds: (sign_gap - sign_gap_formula).abs() <= 1e-12,
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-9 * rhs.max(1.0),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RankBound {
    pub bound: f64,
    /// `delta_1 >= 1/2` makes the bound non-positive: no obstruction at this defect level.
    pub vacuous: bool,
    pub actual: usize,
    pub consistent: bool,
}

/// `r >= (1 - delta_1^2 / (1 - delta_1)^2) n`.
pub fn rank_bound(delta1: f64, n: usize, actual: usize) -> RankBound {
    let bound = if delta1 >= 1.0 || !delta1.is_finite() {
        f64::NEG_INFINITY
    } else {
        (1.0 - delta1 * delta1 / ((1.0 - delta1) * (1.0 - delta1))) * n as f64
    };
    RankBound {
        bound,
        vacuous: bound <= 0.0,
        actual,
        consistent: actual as f64 >= bound - 1e-6,
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EckartYoung {
    /// `||M - lambda I||_2^2`.
    pub lhs: f64,
    /// `(1 - r/n) |lambda|^2`.
    pub rhs: f64,
    /// Best rank-`r` approximation error of `lambda I` from its singular values.
    pub tail: f64,
    pub holds: bool,
}

/// Compares `||M - lambda I||_2^2` with the best rank-`r` error of `lambda I`, where `r >= rank(M)`.
pub fn eckart_young_check(m: &DenseMatrix, lambda: C64, r: usize) -> Result<EckartYoung> {
    let n = m.rows();
    let li = basis_i(n).scale(lambda);
    let lhs = m.sub(&li)?.frobenius().powi(2);
    let sv = li.singular_values()?;
    let tail: f64 = sv.iter().skip(r).map(|s| s * s).sum();
    let rhs = (1.0 - r.min(n) as f64 / n as f64) * lambda.norm_sqr();
    Ok(EckartYoung {
        lhs,
        rhs,
        tail,
        holds: lhs >= tail - 1e-9 * tail.max(1.0) && (tail - rhs).abs() <= 1e-9 * rhs.max(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{gaussian_matrix, rng_from_seed};
    use rand::Rng;

    #[test]
    fn projection_of_basis_vectors() {
        let n = 7;
        let p = invariant_projection(&basis_i(n)).unwrap();
        assert!((p.lambda - 1.0).norm() < 1e-12 && p.mu.norm() < 1e-12 && p.residual < 1e-12);
        let p = invariant_projection(&basis_e(n)).unwrap();
        assert!(p.lambda.norm() < 1e-12 && (p.mu - 1.0).norm() < 1e-12 && p.residual < 1e-12);
    }

    #[test]
    fn projection_of_orthogonal_matrix() {
        // trace-free with zero entry sum
        let mut y = DenseMatrix::zeros(4, 4);
        y.set(0, 1, C64::new(1.0, 0.0));
        y.set(1, 0, C64::new(-1.0, 0.0));
        y.set(2, 2, C64::new(0.0, 2.0));
        y.set(3, 3, C64::new(0.0, -2.0));
        let p = invariant_projection(&y).unwrap();
        assert!(p.lambda.norm() < 1e-12 && p.mu.norm() < 1e-12);
        assert!((p.residual - y.frobenius()).abs() < 1e-12);
    }

    #[test]
    fn sign_gap_identity_for_small_planes() {
        for l in [2, 3, 5] {
            let plane = ProjectivePlane::build(l).unwrap();
            let mb = mu_bound_check(C64::new(0.0, 0.0), 0.0, 1.0, &plane).unwrap();
            assert!(mb.identity_holds && mb.holds);
            if l == 2 {
                assert!((mb.sign_gap - (2.0f64 - 2.0 / 49.0).sqrt()).abs() < 1e-12);
                assert!((mb.sign_gap - 1.3997).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn rank_bound_arithmetic() {
        let b = rank_bound(0.0, 7, 49);
        assert_eq!(b.bound, 7.0);
        assert!(b.consistent && !b.vacuous);
        let b = rank_bound(1.0 / 3.0, 7, 6);
        assert!((b.bound - 5.25).abs() < 1e-12);
        let b = rank_bound(0.5, 7, 1);
        assert!(b.vacuous && b.consistent);
        assert!(rank_bound(1.5, 7, 1).vacuous);
    }

    #[test]
    fn bound_decreases_with_defect() {
        let mut last = f64::INFINITY;
        for k in 0..100 {
            let b = rank_bound(k as f64 / 100.0, 13, 1).bound;
            assert!(b <= last);
            last = b;
        }
    }

    #[test]
    fn eckart_young_random_instances() {
        let mut rng = rng_from_seed(21);
        for _ in 0..50 {
            let n = rng.random_range(2..10);
            let r = rng.random_range(1..=n);
            let m = gaussian_matrix(&mut rng, n, r)
                .matmul(&gaussian_matrix(&mut rng, r, n))
                .unwrap();
            let lambda = C64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let ey = eckart_young_check(&m, lambda, r).unwrap();
            assert!(ey.holds, "{ey:?}");
        }
    }
}
