//! Rank obstruction for approximate diagonals: slice, Mazur-map, project, bound.
//!
//! Every stage that the argument only needs as an upper bound is measured exactly where
//! possible. The commutator defect comes from slice `S_1` norms, and `delta_0` is never
//! smaller than the directly measured translate defect of the Mazur image, so a certified
//! bound can never exceed the true rank.

pub mod bound;
pub mod slice;
pub mod tensor;

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::expander::{kazhdan_constant, Representation};
use crate::finite::GeneratorSet;
use crate::matrix::{DenseMatrix, NormIndex, C64};
use crate::mazur::{nc_mazur, MazurMap, ModulusOfContinuity};

pub use bound::{
    basis_e, basis_i, eckart_young_check, invariant_projection, mu_bound_check, rank_bound,
    EckartYoung, MuBound, Projection, RankBound,
};
pub use slice::{
    select_slice, slice, slice_defect, slice_mass, translate, BlockSlices, SigmaPlus, SliceMass,
    SliceMatrix,
};
pub use tensor::{
    exact_diagonal, exact_diagonal_pairs, orbit_sample, perturbed_diagonal, prod_check,
    random_rank_one, rank_one_identity, truncated_diagonal, BlockLayout, TensorDecomposition,
    PROD_TOL,
};

#[derive(Debug, Clone, Serialize)]
pub struct PrimeRecord {
    pub l: u64,
    pub n: usize,
    pub sigma_plus: usize,
    pub m_l: usize,
    pub slice_mass: f64,
    pub slice_mass_ok: bool,
    /// Measured `sum_m ||T_l(m) - g.T_l(m)||_1 / |Lambda_l|` for each `g` in `Sigma+`.
    pub eps_slice: Vec<f64>,
    pub eps: f64,
    /// `max_g ||S_l - g.S_l||_1` at the selected slice.
    pub delta_slice: f64,
    /// `delta_slice <= eps |Sigma+|`.
    pub pigeonhole_ok: bool,
    pub slice_rank: usize,
    /// Empirical modulus envelope at `delta_slice`.
    pub delta0_envelope: f64,
    /// Closed-form modulus at `delta_slice`, for comparison.
    pub delta0_theory: f64,
    /// `max_g ||phi(S_l) - g.phi(S_l)||_2`, measured.
    pub delta0_measured: f64,
    pub delta0: f64,
    pub kappa: f64,
    pub r_eff: f64,
    pub delta1: f64,
    pub lambda: C64,
    pub mu: C64,
    pub projection_residual: f64,
    /// `||phi(S_l) - X|| <= R_eff max_{g in Sigma} ||phi(S_l) - g.phi(S_l)||`.
    pub kazhdan_ok: bool,
    pub mu_check: MuBound,
    /// `||phi(S_l) - lambda I||`, measured.
    pub lambda_gap: f64,
    pub lambda_ok: bool,
    pub rank_lower_bound: f64,
    pub vacuous: bool,
    pub actual_rank: usize,
    pub consistent: bool,
    /// Largest `eps` for which the closed-form modulus still gives a positive bound.
    pub eps_threshold: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrimeOutcome {
    pub l: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record: Option<PrimeRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub rank: usize,
    pub dim: usize,
    pub p: NormIndex,
    pub prod_defect: f64,
    pub projective_upper: f64,
    pub projective_upper_exact: bool,
    pub primes: Vec<PrimeOutcome>,
    /// No prime produced a bound above the rank, and no stage failed.
    pub consistent: bool,
}

impl PipelineReport {
    pub fn records(&self) -> impl Iterator<Item = &PrimeRecord> {
        self.primes.iter().filter_map(|p| p.record.as_ref())
    }

    /// Largest certified bound over all primes, if any prime succeeded.
    pub fn max_bound(&self) -> Option<f64> {
        self.records().map(|r| r.rank_lower_bound).reduce(f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("l,r,eps,delta0,delta1,lambda,mu,bound\n");
        for r in self.records() {
            let _ = writeln!(
                out,
                "{},{},{:e},{:e},{:e},{:e},{:e},{:e}",
                r.l,
                r.actual_rank,
                r.eps,
                r.delta0,
                r.delta1,
                r.lambda.norm(),
                r.mu.norm(),
                r.rank_lower_bound
            );
        }
        out
    }
}

fn hs_distance(a: &DenseMatrix, b: &DenseMatrix) -> Result<f64> {
    Ok(a.sub(b)?.frobenius())
}

/// Largest `t` with `theory(t) <= target`, by bisection on `[0, 2]`.
fn invert_theory(map: MazurMap, target: f64) -> f64 {
    if map.theory_bound(0.0) > target {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 2.0f64);
    if map.theory_bound(hi) <= target {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if map.theory_bound(mid) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn run_prime(
    t: &TensorDecomposition,
    l: u64,
    modulus: &ModulusOfContinuity,
) -> Result<PrimeRecord> {
    let layout = t.validate()?;
    let (plane, _) = layout.block(l)?;
    let n = plane.len();
    let block = BlockSlices::compute(t, l)?;
    let mass = block.mass();
    let eps_slice = block.eps_per_generator();
    let eps = eps_slice.iter().copied().fold(0.0, f64::max);
    let (m_l, delta_slice) = block.select()?;
    let s_l = block.slices[m_l].scale_real(1.0 / block.norms[m_l]);
    let sigma_plus = block.sigma.len();
    let slice_rank = s_l.rank(1e-10)?;

    let y = nc_mazur(&s_l)?;
    let translates: Vec<f64> = block
        .sigma
        .operators
        .iter()
        .map(|pi| hs_distance(&y, &translate(&y, pi)?))
        .collect::<Result<_>>()?;
    let delta0_measured = translates.iter().copied().fold(0.0, f64::max);
    let delta0_envelope = modulus.eval(delta_slice);
    let delta0_theory = MazurMap::NcForward.theory_bound(delta_slice);
    let delta0 = delta0_envelope.max(delta0_measured);

    let gens = GeneratorSet::elementary().reduce(plane.prime())?;
    let kz = kazhdan_constant(&Representation::permutation(plane, &gens)?.tensor_square())?;
    let r_eff = kz.r_eff.ok_or_else(|| {
        LabError::Precondition("tensor-square representation has no non-invariant part".into())
    })?;

    let proj = invariant_projection(&y)?;
    let group_translate = translates[..translates.len() - 1]
        .iter()
        .copied()
        .fold(0.0, f64::max);
    let kazhdan_ok = proj.residual <= r_eff * group_translate + 1e-9;
    let mu_check = mu_bound_check(proj.mu, delta0, r_eff, plane)?;
    let delta1 = (3.0 * r_eff + 1.0) * delta0;
    let lambda_gap = hs_distance(&y, &basis_i(n).scale(proj.lambda))?;
    let lambda_ok = proj.lambda.norm() >= 1.0 - delta1 - 1e-9;
    let rb = rank_bound(delta1, n, t.rank());
    let target = 1.0 / (2.0 * (3.0 * r_eff + 1.0));
    let eps_threshold = invert_theory(MazurMap::NcForward, target) / sigma_plus as f64;

    Ok(PrimeRecord {
        l,
        n,
        sigma_plus,
        m_l,
        slice_mass: mass.total,
        slice_mass_ok: mass.lower_bound_ok,
        eps,
        pigeonhole_ok: delta_slice <= eps * sigma_plus as f64 + 1e-9,
        eps_slice,
        delta_slice,
        slice_rank,
        delta0_envelope,
        delta0_theory,
        delta0_measured,
        delta0,
        kappa: kz.kappa,
        r_eff,
        delta1,
        lambda: proj.lambda,
        mu: proj.mu,
        projection_residual: proj.residual,
        kazhdan_ok,
        mu_check,
        lambda_gap,
        lambda_ok,
        rank_lower_bound: rb.bound,
        vacuous: rb.vacuous,
        actual_rank: t.rank(),
        consistent: rb.consistent,
        eps_threshold,
    })
}

/// Runs the full chain for each requested prime. A failure at one prime is recorded and
/// the others still run; a decomposition whose product is not `1` is rejected outright.
pub fn run_pipeline(
    t: &TensorDecomposition,
    primes: &[u64],
    modulus: &ModulusOfContinuity,
) -> Result<PipelineReport> {
    if modulus.map != MazurMap::NcForward {
        return Err(LabError::Precondition(
            "pipeline needs the modulus of the noncommutative Mazur map".into(),
        ));
    }
    let layout = t.validate()?;
    let prod_defect = prod_check(t)?;
    if prod_defect > PROD_TOL {
        return Err(LabError::Precondition(format!(
            "sum a_i b_i differs from 1 by {prod_defect:e}"
        )));
    }
    let (projective_upper, projective_upper_exact) = t.projective_upper()?;
    let primes = if primes.is_empty() {
        t.primes.clone()
    } else {
        primes.to_vec()
    };
    let outcomes: Vec<PrimeOutcome> = primes
        .iter()
        .map(|&l| match run_prime(t, l, modulus) {
            Ok(rec) => PrimeOutcome {
                l,
                record: Some(rec),
                error: None,
            },
            Err(e) => PrimeOutcome {
                l,
                record: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let consistent = outcomes
        .iter()
        .all(|o| o.record.as_ref().is_some_and(|r| r.consistent));
    Ok(PipelineReport {
        rank: t.rank(),
        dim: layout.dim(),
        p: t.p,
        prod_defect,
        projective_upper,
        projective_upper_exact,
        primes: outcomes,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::rng_from_seed;
    use crate::mazur::{default_grid, estimate_modulus};

    fn modulus() -> ModulusOfContinuity {
        estimate_modulus(
            &mut rng_from_seed(0),
            MazurMap::NcForward,
            300,
            (2, 6),
            &default_grid(4),
        )
        .unwrap()
    }

    #[test]
    fn exact_diagonal_end_to_end() {
        let t = exact_diagonal(&[2], NormIndex::Two).unwrap();
        let rep = run_pipeline(&t, &[2], &modulus()).unwrap();
        let r = rep.primes[0].record.as_ref().unwrap();
        assert_eq!(r.eps, 0.0);
        assert!(r.delta0 < 1e-12 && r.delta1 < 1e-10);
        assert!((r.lambda - 1.0).norm() < 1e-12 && r.mu.norm() < 1e-12);
        assert!((r.rank_lower_bound - 7.0).abs() < 1e-8);
        assert_eq!(r.actual_rank, 49);
        assert!(r.consistent && rep.consistent);
        assert!(rep
            .to_csv()
            .starts_with("l,r,eps,delta0,delta1,lambda,mu,bound\n2,49,"));
    }

    #[test]
    fn rank_one_identity_is_vacuous() {
        let t = rank_one_identity(&[2], NormIndex::Two).unwrap();
        let rep = run_pipeline(&t, &[], &modulus()).unwrap();
        let r = rep.primes[0].record.as_ref().unwrap();
        assert!(r.vacuous && r.consistent);
        assert!(r.delta1 >= 0.5);
    }

    #[test]
    fn bad_product_rejected() {
        let mut t = exact_diagonal(&[2], NormIndex::Two).unwrap();
        t.pairs.pop();
        assert!(matches!(
            run_pipeline(&t, &[2], &modulus()),
            Err(LabError::Precondition(_))
        ));
    }

    #[test]
    fn unknown_prime_recorded_not_fatal() {
        let t = exact_diagonal(&[2], NormIndex::Two).unwrap();
        let rep = run_pipeline(&t, &[2, 3], &modulus()).unwrap();
        assert!(rep.primes[0].record.is_some());
        assert!(rep.primes[1].error.is_some());
        assert!(!rep.consistent);
    }

    #[test]
    fn slice_covariance_under_conjugation() {
        let mut rng = rng_from_seed(4);
        let t = perturbed_diagonal(&mut rng, &[2, 3], NormIndex::Two, 0.2).unwrap();
        let layout = BlockLayout::new(&[2, 3]).unwrap();
        let gens = GeneratorSet::elementary();
        let (plane, off) = layout.block(3).unwrap();
        for m in &gens.elements[..4] {
            let perm = layout.permutation(m).unwrap();
            let x = DenseMatrix::from_permutation(&perm);
            let tg = t.conjugate_by(&x, &x.transpose()).unwrap();
            let g = crate::finite::GroupElement::from_int(m, plane.prime()).unwrap();
            let pi = DenseMatrix::from_permutation(&plane.permutation(&g).unwrap());
            for col in [0, 5, off, off + 4] {
                let lhs = slice(&tg, 3, col).unwrap().matrix;
                let rhs = translate(&slice(&t, 3, col).unwrap().matrix, &pi).unwrap();
                assert!(lhs.max_abs_diff(&rhs) < 1e-9);
            }
        }
    }

    #[test]
    fn threshold_inversion() {
        let t = invert_theory(MazurMap::NcForward, 0.1);
        assert!(MazurMap::NcForward.theory_bound(t) <= 0.1);
        assert!(MazurMap::NcForward.theory_bound(t * 1.001) > 0.1);
    }
}
