//! Polar decomposition, the noncommutative Mazur map `T = U|T| -> U|T|^{1/2}`
//! between the unit spheres of `S_1` and `S_2`, its inverse, the coordinatewise
//! Mazur map on `l_p`, and empirical moduli of continuity.

use std::fmt::Write as _;

use rand::Rng;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::matrix::columns::{InequalityCheck, EXACT_REL_TOL};
use crate::matrix::dense::{DenseMatrix, C64};
use crate::matrix::norms::{schatten_norm, vec_norm, NormIndex, SchattenOrder};
use crate::matrix::random::{gaussian_matrix, gaussian_vector};

/// Relative slack for quantities derived from singular value decompositions.
pub const SVD_REL_TOL: f64 = 1e-7;
/// Absolute slack below which SVD noise is indistinguishable from zero.
pub const SVD_ABS_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct PolarDecomposition {
    pub u: DenseMatrix,
    pub modulus: DenseMatrix,
}

fn require_square(t: &DenseMatrix) -> Result<()> {
    if !t.is_square() {
        return Err(LabError::Shape(format!(
            "expected a square matrix, got {}x{}",
            t.rows(),
            t.cols()
        )));
    }
    Ok(())
}

/// `T = W S V*` gives `|T| = V S V*` and `U = W V*`.
pub fn polar(t: &DenseMatrix) -> Result<PolarDecomposition> {
    require_square(t)?;
    let svd = t.svd()?;
    let v_adj = svd.v_adjoint();
    let u = DenseMatrix::wrap(svd.w.clone()).matmul(&v_adj)?;
    let s = DenseMatrix::from_real_diagonal(&svd.s);
    let modulus = v_adj.adjoint().matmul(&s)?.matmul(&v_adj)?;
    Ok(PolarDecomposition { u, modulus })
}

/// `phi(T) = W S^{1/2} V*`, independent of the choice of SVD.
pub fn nc_mazur(t: &DenseMatrix) -> Result<DenseMatrix> {
    require_square(t)?;
    Ok(t.svd()?.recompose(f64::sqrt))
}

/// `phi^{-1}(S) = W S^2 V*`, i.e. `S |S|`.
pub fn nc_mazur_inverse(s: &DenseMatrix) -> Result<DenseMatrix> {
    require_square(s)?;
    Ok(s.svd()?.recompose(|x| x * x))
}

/// Positive square root of a positive semidefinite matrix via its SVD.
fn psd_sqrt(a: &DenseMatrix) -> Result<DenseMatrix> {
    let svd = a.svd()?;
    // For PSD input W and V agree on the range; use V on both sides.
    let v_adj = svd.v_adjoint();
    let root: Vec<f64> = svd.s.iter().map(|x| x.sqrt()).collect();
    v_adj
        .adjoint()
        .matmul(&DenseMatrix::from_real_diagonal(&root))?
        .matmul(&v_adj)
}

/// `||phi(U T U*) - U phi(T) U*||_2` for a unitary `U`.
pub fn equivariance_check(t: &DenseMatrix, u: &DenseMatrix) -> Result<f64> {
    let defect = u.unitarity_defect();
    if defect > 1e-9 {
        return Err(LabError::NotUnitary(defect));
    }
    let conj = u.matmul(t)?.matmul(&u.adjoint())?;
    let lhs = nc_mazur(&conj)?;
    let rhs = u.matmul(&nc_mazur(t)?)?.matmul(&u.adjoint())?;
    Ok(lhs.sub(&rhs)?.frobenius())
}

#[derive(Debug, Clone, Serialize)]
pub struct MazurInequalities {
    pub eps: f64,
    /// `|| |S| - |T| ||_1 <= 2 eps^{1/2}`
    pub modulus_gap: InequalityCheck,
    /// `|| |S|^{1/2} - |T|^{1/2} ||_2 <= 2 eps^{1/4}`
    pub root_gap: InequalityCheck,
    /// `||phi(S) - phi(T)||_2^2 <= 2 eps + 4 eps^{1/2} + 4 eps^{1/4}`
    pub image_gap: InequalityCheck,
    /// `| ||phi(S) - phi(T)||_2^2 - (2 - 2 Re Tr(phi(T)* phi(S))) |`
    pub polarization_residual: f64,
}

impl MazurInequalities {
    pub fn all_hold(&self) -> bool {
        self.modulus_gap.holds && self.root_gap.holds && self.image_gap.holds
    }
}

fn svd_check(lhs: f64, rhs: f64) -> InequalityCheck {
    InequalityCheck {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + SVD_REL_TOL) + SVD_ABS_TOL,
    }
}

pub fn image_gap_bound(eps: f64) -> f64 {
    2.0 * eps + 4.0 * eps.sqrt() + 4.0 * eps.powf(0.25)
}

/// Checks the chain of estimates behind uniform continuity of `phi` for a pair on the `S_1` sphere.
pub fn mazur_inequality_suite(s: &DenseMatrix, t: &DenseMatrix) -> Result<MazurInequalities> {
    for m in [s, t] {
        require_square(m)?;
        let n1 = schatten_norm(m, SchattenOrder::One)?;
        if (n1 - 1.0).abs() > 1e-8 {
            return Err(LabError::OffSphere(n1));
        }
    }
    let eps = schatten_norm(&s.sub(t)?, SchattenOrder::One)?;
    let abs_s = polar(s)?.modulus;
    let abs_t = polar(t)?.modulus;
    let modulus_gap = svd_check(
        schatten_norm(&abs_s.sub(&abs_t)?, SchattenOrder::One)?,
        2.0 * eps.sqrt(),
    );
    let root_gap = svd_check(
        psd_sqrt(&abs_s)?.sub(&psd_sqrt(&abs_t)?)?.frobenius(),
        2.0 * eps.powf(0.25),
    );
    let ps = nc_mazur(s)?;
    let pt = nc_mazur(t)?;
    let gap_sq = ps.sub(&pt)?.frobenius().powi(2);
    let polar_form = 2.0 - 2.0 * pt.hs_inner(&ps)?.re;
    Ok(MazurInequalities {
        eps,
        modulus_gap,
        root_gap,
        image_gap: svd_check(gap_sq, image_gap_bound(eps)),
        polarization_residual: (gap_sq - polar_form).abs(),
    })
}

/// Coordinatewise Mazur map `v_i -> sgn(v_i) |v_i|^{p/q}` from `l_p` to `l_q`.
pub fn classical_mazur(v: &[C64], from_p: f64, to_q: f64) -> Vec<C64> {
    let e = from_p / to_q;
    v.iter()
        .map(|z| {
            let r = z.norm();
            if r == 0.0 {
                C64::new(0.0, 0.0)
            } else {
                (z / r) * r.powf(e)
            }
        })
        .collect()
}

/// The maps whose moduli of continuity can be estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MazurMap {
    /// `S_1` sphere to `S_2` sphere.
    NcForward,
    /// `S_2` sphere to `S_1` sphere.
    NcInverse,
    /// `l_2` ball to `l_1` ball.
    Classical2To1,
    /// `l_1` ball to `l_2` ball.
    Classical1To2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Inverse,
}

impl MazurMap {
    pub const ALL: [MazurMap; 4] = [
        MazurMap::NcForward,
        MazurMap::NcInverse,
        MazurMap::Classical2To1,
        MazurMap::Classical1To2,
    ];

    pub fn direction(self) -> Direction {
        match self {
            MazurMap::NcForward | MazurMap::Classical2To1 => Direction::Forward,
            MazurMap::NcInverse | MazurMap::Classical1To2 => Direction::Inverse,
        }
    }

    /// Closed-form upper bound on the modulus at `t`.
    pub fn theory_bound(self, t: f64) -> f64 {
        let b = match self {
            MazurMap::NcForward => image_gap_bound(t).sqrt(),
            MazurMap::NcInverse => 3.0 * t,
            MazurMap::Classical2To1 => 2.0 * t,
            MazurMap::Classical1To2 => (2.0 * t).sqrt(),
        };
        b.min(OUTPUT_DIAMETER)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulusPoint {
    pub t: f64,
    pub envelope: f64,
}

/// Empirical modulus of continuity: `envelope(t)` is the largest observed output
/// distance among sampled pairs at input distance at most `t`.
#[derive(Debug, Clone, Serialize)]
pub struct ModulusOfContinuity {
    pub map: MazurMap,
    pub direction: Direction,
    pub samples: usize,
    pub grid: Vec<ModulusPoint>,
}

/// Every map here sends a unit ball into a unit ball, so distances never exceed 2.
pub const OUTPUT_DIAMETER: f64 = 2.0;

impl ModulusOfContinuity {
    /// Step-function evaluation at the first grid point `>= t`; beyond the grid, the output diameter.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.grid
            .iter()
            .find(|pt| pt.t >= t)
            .map(|pt| pt.envelope)
            .unwrap_or(OUTPUT_DIAMETER)
    }

    pub fn is_monotone(&self) -> bool {
        self.grid.windows(2).all(|w| w[0].envelope <= w[1].envelope)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,envelope,theory_bound\n");
        for pt in &self.grid {
            let _ = writeln!(
                out,
                "{:e},{:e},{:e}",
                pt.t,
                pt.envelope,
                self.map.theory_bound(pt.t)
            );
        }
        out
    }
}

/// Geometric grid `0, 1e-8, ..., 2` with `per_decade` points per decade.
pub fn default_grid(per_decade: usize) -> Vec<f64> {
    let mut grid = vec![0.0];
    let lo = -8.0f64;
    let hi = 2f64.log10();
    let steps = ((hi - lo) * per_decade as f64).ceil() as usize;
    for k in 0..=steps {
        grid.push(10f64.powf(lo + (hi - lo) * k as f64 / steps as f64));
    }
    grid
}

fn normalize_s1(m: DenseMatrix) -> Result<DenseMatrix> {
    let n = schatten_norm(&m, SchattenOrder::One)?;
    Ok(m.scale_real(1.0 / n))
}

fn normalize_fro(m: DenseMatrix) -> DenseMatrix {
    let n = m.frobenius();
    m.scale_real(1.0 / n)
}

/// Random square matrix of random rank, normalized in `S_1`.
pub fn random_s1_sphere<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<DenseMatrix> {
    let rank = rng.random_range(1..=n);
    let a = gaussian_matrix(rng, n, rank);
    let b = gaussian_matrix(rng, rank, n);
    normalize_s1(a.matmul(&b)?)
}

fn scaled_vec(v: Vec<C64>, norm: f64, radius: f64) -> Vec<C64> {
    v.into_iter().map(|z| z * (radius / norm)).collect()
}

/// Sample pairs, measure input and output distances, and return the monotone envelope.
pub fn estimate_modulus<R: Rng + ?Sized>(
    rng: &mut R,
    map: MazurMap,
    samples: usize,
    dims: (usize, usize),
    grid: &[f64],
) -> Result<ModulusOfContinuity> {
    let mut observed: Vec<(f64, f64)> = Vec::with_capacity(samples);
    for _ in 0..samples {
        let n = rng.random_range(dims.0..=dims.1);
        let scale = 10f64.powf(rng.random_range(-8.0..0.5));
        let pair = match map {
            MazurMap::NcForward => {
                let a = random_s1_sphere(rng, n)?;
                let noise = gaussian_matrix(rng, n, n).scale_real(scale);
                let b = normalize_s1(a.add(&noise)?)?;
                let d_in = schatten_norm(&a.sub(&b)?, SchattenOrder::One)?;
                let d_out = nc_mazur(&a)?.sub(&nc_mazur(&b)?)?.frobenius();
                (d_in, d_out)
            }
            MazurMap::NcInverse => {
                let a = normalize_fro(random_s1_sphere(rng, n)?);
                let noise = gaussian_matrix(rng, n, n).scale_real(scale);
                let b = normalize_fro(a.add(&noise)?);
                let d_in = a.sub(&b)?.frobenius();
                let d_out = schatten_norm(
                    &nc_mazur_inverse(&a)?.sub(&nc_mazur_inverse(&b)?)?,
                    SchattenOrder::One,
                )?;
                (d_in, d_out)
            }
            MazurMap::Classical2To1 | MazurMap::Classical1To2 => {
                let (p, q) = if map == MazurMap::Classical2To1 {
                    (2.0, 1.0)
                } else {
                    (1.0, 2.0)
                };
                let pi = NormIndex::new(p)?;
                let qi = NormIndex::new(q)?;
                let a = gaussian_vector(rng, n);
                let an = vec_norm(&a, pi);
                let on_sphere = rng.random_bool(0.5);
                let ra = if on_sphere {
                    1.0
                } else {
                    rng.random_range(0.0..1.0)
                };
                let a = scaled_vec(a, an, ra);
                let noise = gaussian_vector(rng, n);
                let b: Vec<C64> = a.iter().zip(&noise).map(|(x, y)| x + y * scale).collect();
                let bn = vec_norm(&b, pi);
                let rb = if on_sphere { 1.0 } else { bn.min(1.0) };
                let b = scaled_vec(b, bn, rb);
                let diff: Vec<C64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
                let fa = classical_mazur(&a, p, q);
                let fb = classical_mazur(&b, p, q);
                let fdiff: Vec<C64> = fa.iter().zip(&fb).map(|(x, y)| x - y).collect();
                (vec_norm(&diff, pi), vec_norm(&fdiff, qi))
            }
        };
        observed.push(pair);
    }
    observed.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::with_capacity(grid.len());
    let mut running = 0.0f64;
    let mut k = 0;
    for &t in grid {
        while k < observed.len() && observed[k].0 <= t {
            running = running.max(observed[k].1);
            k += 1;
        }
        out.push(ModulusPoint {
            t,
            envelope: running,
        });
    }
    Ok(ModulusOfContinuity {
        map,
        direction: map.direction(),
        samples,
        grid: out,
    })
}

/// `| ||phi(T)||_2^2 - ||T||_1 |`, relative to `max(||T||_1, 1)`.
pub fn sphere_identity_residual(t: &DenseMatrix) -> Result<f64> {
    let lhs = nc_mazur(t)?.frobenius().powi(2);
    let rhs = schatten_norm(t, SchattenOrder::One)?;
    Ok((lhs - rhs).abs() / rhs.max(1.0))
}

pub fn round_trip_error(t: &DenseMatrix) -> Result<f64> {
    Ok(nc_mazur_inverse(&nc_mazur(t)?)?.sub(t)?.frobenius())
}

/// Relative residual of `||M(v)||_q^q = ||v||_p^p` for the coordinatewise map.
pub fn classical_norm_residual(v: &[C64], from_p: f64, to_q: f64) -> f64 {
    let img = classical_mazur(v, from_p, to_q);
    let lhs = vec_norm(&img, NormIndex::General(to_q)).powf(to_q);
    let rhs = vec_norm(v, NormIndex::General(from_p)).powf(from_p);
    (lhs - rhs).abs() / rhs.max(EXACT_REL_TOL)
}
