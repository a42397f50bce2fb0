//! Column-norm inequalities for pairs `x: l_p^M -> l_p^N`, `y: l_q^M -> l_q^N`.
//!
//! With `x_m`, `y_m` the `m`-th columns and `N` the row count:
//!
//! * variant (i):   `sum_m ||x_m||_q ||y_m||_p <= N ||x||_p ||y||_q`
//! * variant (ii):  `sum_m ||x_m||_p ||y_m||_q <= N ||x||_reg ||y||_reg`
//! * variant (iii): `sum_m ||x_m||_2 ||y_m||_2 <= N (||x|| ||x||_reg ||y|| ||y||_reg)^{1/2}`

use rand::Rng;
use serde::Serialize;

use super::dense::DenseMatrix;
use super::norms::{opnorm_exact, opnorm_value, regular_norm, vec_norm, NormIndex};
use super::random::gaussian_matrix;
use crate::error::{LabError, Result};

/// Relative slack for comparisons between exact-formula quantities.
pub const EXACT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    I,
    Ii,
    Iii,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::I, Variant::Ii, Variant::Iii];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl InequalityCheck {
    pub fn new(lhs: f64, rhs: f64, rel_tol: f64) -> Self {
        InequalityCheck {
            lhs,
            rhs,
            holds: lhs <= rhs * (1.0 + rel_tol) + f64::MIN_POSITIVE,
        }
    }
}

fn column_sum(x: &DenseMatrix, y: &DenseMatrix, px: NormIndex, py: NormIndex) -> f64 {
    (0..x.cols())
        .map(|m| vec_norm(&x.column(m), px) * vec_norm(&y.column(m), py))
        .sum()
}

fn check_shapes(x: &DenseMatrix, y: &DenseMatrix) -> Result<()> {
    if x.rows() != y.rows() || x.cols() != y.cols() {
        return Err(LabError::Shape(format!(
            "x is {}x{}, y is {}x{}",
            x.rows(),
            x.cols(),
            y.rows(),
            y.cols()
        )));
    }
    if x.is_empty() {
        return Err(LabError::EmptyMatrix);
    }
    Ok(())
}

pub fn column_inequality_check(
    x: &DenseMatrix,
    y: &DenseMatrix,
    p: NormIndex,
    variant: Variant,
) -> Result<InequalityCheck> {
    check_shapes(x, y)?;
    let q = p.dual();
    let n = x.rows() as f64;
    let (lhs, rhs) = match variant {
        Variant::I => (
            column_sum(x, y, q, p),
            n * opnorm_exact(x, p)? * opnorm_exact(y, q)?,
        ),
        Variant::Ii => {
            if !p.is_exact() {
                return Err(LabError::InexactP(p.value()));
            }
            (
                column_sum(x, y, p, q),
                n * regular_norm(x, p)? * regular_norm(y, q)?,
            )
        }
        Variant::Iii => {
            let prod = opnorm_exact(x, p)?
                * regular_norm(x, p)?
                * opnorm_exact(y, q)?
                * regular_norm(y, q)?;
            (
                column_sum(x, y, NormIndex::Two, NormIndex::Two),
                n * prod.sqrt(),
            )
        }
    };
    Ok(InequalityCheck::new(lhs, rhs, EXACT_REL_TOL))
}

/// `sum_m ||x_m||_2 ||y_m||_2 / (N ||x||_p ||y||_q)`.
///
/// For `p` outside `{1, 2, inf}` the operator norms are lower estimates, so the
/// ratio overestimates the true one.
pub fn column_ratio(x: &DenseMatrix, y: &DenseMatrix, p: NormIndex) -> Result<f64> {
    check_shapes(x, y)?;
    let lhs = column_sum(x, y, NormIndex::Two, NormIndex::Two);
    let denom = x.rows() as f64 * opnorm_value(x, p)? * opnorm_value(y, p.dual())?;
    Ok(if denom == 0.0 { 0.0 } else { lhs / denom })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioSearch {
    pub p: NormIndex,
    pub rows: usize,
    pub cols: usize,
    pub trials: usize,
    pub max_ratio: f64,
    pub argmax_trial: usize,
    pub exact_norms: bool,
}

/// Random search for large values of [`column_ratio`] over complex Gaussian pairs.
pub fn column_ratio_search<R: Rng + ?Sized>(
    rng: &mut R,
    p: NormIndex,
    trials: usize,
    rows: usize,
    cols: usize,
) -> Result<RatioSearch> {
    let mut best = 0.0f64;
    let mut arg = 0;
    for t in 0..trials {
        let x = gaussian_matrix(rng, rows, cols);
        let y = gaussian_matrix(rng, rows, cols);
        let r = column_ratio(&x, &y, p)?;
        if r > best {
            best = r;
            arg = t;
        }
    }
    Ok(RatioSearch {
        p,
        rows,
        cols,
        trials,
        max_ratio: best,
        argmax_trial: arg,
        exact_norms: p.is_exact(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::dense::C64;
    use crate::matrix::random::{gaussian_vector, rng_from_seed};

    const EXACT: [NormIndex; 3] = [NormIndex::One, NormIndex::Two, NormIndex::Inf];

    #[test]
    fn identity_is_equality_case() {
        let id = DenseMatrix::identity(5);
        let r = column_inequality_check(&id, &id, NormIndex::Two, Variant::I).unwrap();
        assert_eq!((r.lhs, r.rhs, r.holds), (5.0, 5.0, true));
    }

    #[test]
    fn permutations_give_equality_everywhere() {
        let perm = DenseMatrix::from_permutation(&[3, 0, 4, 1, 2]);
        for p in EXACT {
            for v in Variant::ALL {
                let r = column_inequality_check(&perm, &perm, p, v).unwrap();
                assert!(
                    (r.lhs - 5.0).abs() < 1e-12 && (r.rhs - 5.0).abs() < 1e-12,
                    "{p} {v:?}"
                );
                assert!(r.holds);
            }
        }
    }

    #[test]
    fn random_rectangular_pairs() {
        let mut rng = rng_from_seed(21);
        for _ in 0..100 {
            let x = gaussian_matrix(&mut rng, 6, 10);
            let y = gaussian_matrix(&mut rng, 6, 10);
            for p in EXACT {
                for v in Variant::ALL {
                    assert!(column_inequality_check(&x, &y, p, v).unwrap().holds);
                }
            }
        }
    }

    #[test]
    fn inexact_p_is_refused() {
        let id = DenseMatrix::identity(2);
        assert_eq!(
            column_inequality_check(&id, &id, NormIndex::General(1.5), Variant::I).unwrap_err(),
            LabError::InexactP(1.5)
        );
    }

    #[test]
    fn shape_mismatch() {
        let a = DenseMatrix::identity(2);
        let b = DenseMatrix::identity(3);
        assert!(matches!(
            column_inequality_check(&a, &b, NormIndex::One, Variant::I),
            Err(LabError::Shape(_))
        ));
    }

    #[test]
    fn holder_interpolation_of_l2() {
        let mut rng = rng_from_seed(4);
        for _ in 0..200 {
            let v: Vec<C64> = gaussian_vector(&mut rng, 7);
            for p in [NormIndex::One, NormIndex::Inf, NormIndex::General(3.0)] {
                let l2 = vec_norm(&v, NormIndex::Two);
                let bound = (vec_norm(&v, p) * vec_norm(&v, p.dual())).sqrt();
                assert!(l2 <= bound * (1.0 + EXACT_REL_TOL));
            }
        }
    }

    #[test]
    fn ratio_bounded_for_p_one_and_two() {
        let mut rng = rng_from_seed(8);
        for p in [NormIndex::One, NormIndex::Two] {
            let s = column_ratio_search(&mut rng, p, 200, 4, 9).unwrap();
            assert!(s.max_ratio <= 1.0 + EXACT_REL_TOL, "{p}: {}", s.max_ratio);
        }
        let sq = column_ratio_search(&mut rng, NormIndex::Inf, 200, 8, 8).unwrap();
        assert!(sq.max_ratio <= 1.0 + EXACT_REL_TOL);
    }
}
