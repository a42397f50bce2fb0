use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::finite::{GeneratorSet, GroupElement, Prime, ProjectivePlane};
use crate::matrix::random::gaussian_matrix;
use crate::matrix::{opnorm, DenseMatrix, NormIndex, C64};

/// Tolerance on `||sum a_i b_i - 1||_2` for a decomposition to enter the pipeline.
pub const PROD_TOL: f64 = 1e-8;

/// The disjoint union of projective planes `Lambda_P`, laid out block by block.
#[derive(Debug, Clone)]
pub struct BlockLayout {
    planes: Vec<ProjectivePlane>,
    offsets: Vec<usize>,
    dim: usize,
}

impl BlockLayout {
    pub fn new(primes: &[u64]) -> Result<Self> {
        if primes.is_empty() {
            return Err(LabError::Precondition("need at least one prime".into()));
        }
        let mut planes: Vec<ProjectivePlane> = Vec::with_capacity(primes.len());
        let mut offsets = Vec::with_capacity(primes.len());
        let mut dim = 0;
        for &l in primes {
            if planes.iter().any(|p| p.prime().get() == l) {
                return Err(LabError::Precondition(format!("prime {l} listed twice")));
            }
            let plane = ProjectivePlane::build(l)?;
            offsets.push(dim);
            dim += plane.len();
            planes.push(plane);
        }
        Ok(BlockLayout {
            planes,
            offsets,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn primes(&self) -> Vec<u64> {
        self.planes.iter().map(|p| p.prime().get()).collect()
    }

    /// Plane and offset of the block for prime `l`.
    pub fn block(&self, l: u64) -> Result<(&ProjectivePlane, usize)> {
        self.planes
            .iter()
            .zip(&self.offsets)
            .find(|(p, _)| p.prime().get() == l)
            .map(|(p, &o)| (p, o))
            .ok_or_else(|| {
                LabError::Precondition(format!(
                    "prime {l} is not one of the blocks {:?}",
                    self.primes()
                ))
            })
    }

    /// Block-diagonal permutation of `Lambda_P` induced by an integer matrix.
    pub fn permutation(&self, m: &crate::finite::IntMatrix3) -> Result<Vec<usize>> {
        let mut perm = Vec::with_capacity(self.dim);
        for (plane, &off) in self.planes.iter().zip(&self.offsets) {
            let g = GroupElement::from_int(m, plane.prime())?;
            perm.extend(plane.permutation(&g)?.into_iter().map(|t| t + off));
        }
        Ok(perm)
    }
}

/// `T = sum_i a_i (x) b_i` acting on `l_p(Lambda_P)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensorDecomposition {
    pub pairs: Vec<(DenseMatrix, DenseMatrix)>,
    pub p: NormIndex,
    pub primes: Vec<u64>,
}

impl TensorDecomposition {
    /// Checks that every factor is square of the block dimension.
    pub fn new(
        pairs: Vec<(DenseMatrix, DenseMatrix)>,
        p: NormIndex,
        primes: Vec<u64>,
    ) -> Result<Self> {
        let t = TensorDecomposition { pairs, p, primes };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<BlockLayout> {
        let layout = BlockLayout::new(&self.primes)?;
        let d = layout.dim();
        for (i, (a, b)) in self.pairs.iter().enumerate() {
            for (name, m) in [("a", a), ("b", b)] {
                if m.rows() != d || m.cols() != d {
                    return Err(LabError::Shape(format!(
                        "{name}_{i} is {}x{}, expected {d}x{d}",
                        m.rows(),
                        m.cols()
                    )));
                }
            }
        }
        Ok(layout)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: TensorDecomposition =
            serde_json::from_str(text).map_err(|e| LabError::Parse(e.to_string()))?;
        t.validate()?;
        Ok(t)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("decomposition serializes")
    }

    pub fn rank(&self) -> usize {
        self.pairs.len()
    }

    pub fn dim(&self) -> usize {
        self.primes.iter().map(|&l| (l * l + l + 1) as usize).sum()
    }

    /// `sum_i a_i b_i`.
    pub fn product(&self) -> Result<DenseMatrix> {
        let d = self.dim();
        let mut acc = DenseMatrix::zeros(d, d);
        for (a, b) in &self.pairs {
            acc = acc.add(&a.matmul(b)?)?;
        }
        Ok(acc)
    }

    /// `sum_i ||a_i|| ||b_i||` in the operator norm of `l_p`, an upper bound for the projective norm.
    pub fn projective_upper(&self) -> Result<(f64, bool)> {
        let mut total = 0.0;
        for (a, b) in &self.pairs {
            total += opnorm(a, self.p)?.value * opnorm(b, self.p)?.value;
        }
        Ok((total, self.p.is_exact()))
    }

    /// `x T x^{-1} = sum x a_i (x) b_i x^{-1}`.
    pub fn conjugate_by(
        &self,
        x: &DenseMatrix,
        x_inv: &DenseMatrix,
    ) -> Result<TensorDecomposition> {
        let pairs = self
            .pairs
            .iter()
            .map(|(a, b)| Ok((x.matmul(a)?, b.matmul(x_inv)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(TensorDecomposition {
            pairs,
            p: self.p,
            primes: self.primes.clone(),
        })
    }

    /// Replaces every `a_i` by `P^{-1} a_i` with `P = sum a_i b_i`, so the product becomes `1`.
    pub fn renormalize(&mut self) -> Result<()> {
        let inv = self.product()?.inverse()?;
        for (a, _) in &mut self.pairs {
            *a = inv.matmul(a)?;
        }
        Ok(())
    }
}

/// `||sum a_i b_i - 1||_2`.
pub fn prod_check(t: &TensorDecomposition) -> Result<f64> {
    t.validate()?;
    let d = t.dim();
    Ok(t.product()?.sub(&DenseMatrix::identity(d))?.frobenius())
}

fn unit(d: usize, i: usize, j: usize, c: f64) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(d, d);
    m.set(i, j, C64::new(c, 0.0));
    m
}

/// `(1/n) sum_{s,t} e_st (x) e_ts` on an `n`-dimensional space: product `1`, commutes with every matrix.
pub fn exact_diagonal_pairs(n: usize) -> Vec<(DenseMatrix, DenseMatrix)> {
    let c = 1.0 / n as f64;
    let mut pairs = Vec::with_capacity(n * n);
    for s in 0..n {
        for t in 0..n {
            pairs.push((unit(n, s, t, c), unit(n, t, s, 1.0)));
        }
    }
    pairs
}

pub fn exact_diagonal(primes: &[u64], p: NormIndex) -> Result<TensorDecomposition> {
    let d = BlockLayout::new(primes)?.dim();
    TensorDecomposition::new(exact_diagonal_pairs(d), p, primes.to_vec())
}

/// `1 (x) 1`.
pub fn rank_one_identity(primes: &[u64], p: NormIndex) -> Result<TensorDecomposition> {
    let d = BlockLayout::new(primes)?.dim();
    TensorDecomposition::new(
        vec![(DenseMatrix::identity(d), DenseMatrix::identity(d))],
        p,
        primes.to_vec(),
    )
}

/// Exact diagonal with each pair `(e_st, e_ts)` kept with probability `keep` (the pair `s = t`
/// always kept), renormalized to product `1`.
pub fn truncated_diagonal<R: Rng + ?Sized>(
    rng: &mut R,
    primes: &[u64],
    p: NormIndex,
    keep: f64,
) -> Result<TensorDecomposition> {
    if !(keep > 0.0 && keep <= 1.0) {
        return Err(LabError::Precondition(format!(
            "keep fraction {keep} outside (0, 1]"
        )));
    }
    let d = BlockLayout::new(primes)?.dim();
    let mut pairs = Vec::new();
    for s in 0..d {
        for t in 0..d {
            if s == t || rng.random_bool(keep) {
                pairs.push((unit(d, s, t, 1.0), unit(d, t, s, 1.0)));
            }
        }
    }
    let mut t = TensorDecomposition::new(pairs, p, primes.to_vec())?;
    t.renormalize()?;
    Ok(t)
}

/// Exact diagonal with Gaussian noise of size `eta` on both factors, renormalized to product `1`.
pub fn perturbed_diagonal<R: Rng + ?Sized>(
    rng: &mut R,
    primes: &[u64],
    p: NormIndex,
    eta: f64,
) -> Result<TensorDecomposition> {
    let d = BlockLayout::new(primes)?.dim();
    let pairs = exact_diagonal_pairs(d)
        .into_iter()
        .map(|(a, b)| {
            let na = gaussian_matrix(rng, d, d).scale_real(eta / d as f64);
            let nb = gaussian_matrix(rng, d, d).scale_real(eta);
            Ok((a.add(&na)?, b.add(&nb)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = TensorDecomposition::new(pairs, p, primes.to_vec())?;
    t.renormalize()?;
    Ok(t)
}

/// `(1/k) sum_j P(w_j)^{-1} (x) P(w_j)` for `k` random words `w_j` in the elementary generators.
///
/// Averaging over the whole group gives an exactly invariant diagonal; few words give a
/// low-rank candidate with positive commutator defect.
pub fn orbit_sample<R: Rng + ?Sized>(
    rng: &mut R,
    primes: &[u64],
    p: NormIndex,
    k: usize,
    word_len: usize,
) -> Result<TensorDecomposition> {
    if k == 0 {
        return Err(LabError::Precondition("need at least one word".into()));
    }
    let layout = BlockLayout::new(primes)?;
    let gens = GeneratorSet::elementary();
    let perms: Vec<Vec<usize>> = gens
        .elements
        .iter()
        .map(|m| layout.permutation(m))
        .collect::<Result<_>>()?;
    let d = layout.dim();
    let mut pairs = Vec::with_capacity(k);
    for _ in 0..k {
        let mut w: Vec<usize> = (0..d).collect();
        for _ in 0..word_len {
            let g = &perms[rng.random_range(0..perms.len())];
            w = w.iter().map(|&s| g[s]).collect();
        }
        let pm = DenseMatrix::from_permutation(&w);
        pairs.push((pm.transpose().scale_real(1.0 / k as f64), pm));
    }
    TensorDecomposition::new(pairs, p, primes.to_vec())
}

/// `b^{-1} (x) b` for a random invertible `b`.
pub fn random_rank_one<R: Rng + ?Sized>(
    rng: &mut R,
    primes: &[u64],
    p: NormIndex,
) -> Result<TensorDecomposition> {
    let d = BlockLayout::new(primes)?.dim();
    let b = gaussian_matrix(rng, d, d);
    let inv = b.inverse()?;
    TensorDecomposition::new(vec![(inv, b)], p, primes.to_vec())
}

/// Validated prime list, each at most the default ceiling.
pub fn check_primes(primes: &[u64]) -> Result<()> {
    for &l in primes {
        Prime::new(l)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::rng_from_seed;

    #[test]
    fn exact_diagonal_has_unit_product_and_commutes() {
        let t = exact_diagonal(&[2], NormIndex::Two).unwrap();
        assert_eq!(t.rank(), 49);
        assert!(prod_check(&t).unwrap() < 1e-14);
        let single = exact_diagonal_pairs(1);
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].0.get(0, 0), C64::new(1.0, 0.0));
    }

    #[test]
    fn rank_one_identity_product() {
        let t = rank_one_identity(&[2, 3], NormIndex::One).unwrap();
        assert_eq!((t.rank(), t.dim()), (1, 20));
        assert_eq!(prod_check(&t).unwrap(), 0.0);
    }

    #[test]
    fn random_pairs_fail_product() {
        let mut rng = rng_from_seed(1);
        let pairs = (0..3)
            .map(|_| {
                (
                    gaussian_matrix(&mut rng, 7, 7),
                    gaussian_matrix(&mut rng, 7, 7),
                )
            })
            .collect();
        let t = TensorDecomposition::new(pairs, NormIndex::Two, vec![2]).unwrap();
        assert!(prod_check(&t).unwrap() > 1.0);
    }

    #[test]
    fn renormalized_candidates_have_unit_product() {
        let mut rng = rng_from_seed(2);
        for t in [
            truncated_diagonal(&mut rng, &[2], NormIndex::Two, 0.5).unwrap(),
            perturbed_diagonal(&mut rng, &[2], NormIndex::Two, 0.1).unwrap(),
            orbit_sample(&mut rng, &[2, 3], NormIndex::Two, 3, 10).unwrap(),
            random_rank_one(&mut rng, &[2], NormIndex::Two).unwrap(),
        ] {
            assert!(
                prod_check(&t).unwrap() < PROD_TOL,
                "{}",
                prod_check(&t).unwrap()
            );
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        let err = TensorDecomposition::new(
            vec![(DenseMatrix::identity(3), DenseMatrix::identity(7))],
            NormIndex::Two,
            vec![2],
        )
        .unwrap_err();
        assert!(matches!(err, LabError::Shape(_)));
    }

    #[test]
    fn json_round_trip() {
        let t = rank_one_identity(&[2], NormIndex::Inf).unwrap();
        let back = TensorDecomposition::from_json(&t.to_json()).unwrap();
        assert_eq!(back.p, NormIndex::Inf);
        assert_eq!(back.rank(), 1);
        assert!(matches!(
            TensorDecomposition::from_json("{\"pairs\": 3}"),
            Err(LabError::Parse(_))
        ));
    }

    #[test]
    fn block_permutation_is_block_diagonal() {
        let layout = BlockLayout::new(&[2, 3]).unwrap();
        let perm = layout
            .permutation(&GeneratorSet::elementary().elements[0])
            .unwrap();
        assert!(perm[..7].iter().all(|&t| t < 7));
        assert!(perm[7..].iter().all(|&t| (7..20).contains(&t)));
    }
}
