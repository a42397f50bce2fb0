//! Finite-image representations, orbit averaging and spectral Kazhdan constants.

use std::collections::{HashSet, VecDeque};

use faer::Mat;
use rand::Rng;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::finite::{GroupElement, ProjectivePlane, Quotient, DEFAULT_CLOSURE_CAP};
use crate::matrix::random::unit_vector;
use crate::matrix::{vec_norm, DenseMatrix, NormIndex, C64};

/// Eigenvalues of the averaged Laplacian below this count as invariant directions.
pub const INVARIANT_TOL: f64 = 1e-8;

/// Largest `||pi(h) eta - eta||` accepted for an exactly invariant vector.
pub const INVARIANCE_TOL: f64 = 1e-9;

/// Entry grid used to recognise equal dense matrices during closure.
const KEY_SCALE: f64 = 1e8;

/// One operator of a representation. Permutations follow `P e_s = e_{perm[s]}`.
#[derive(Debug, Clone, PartialEq)]
pub enum Operator {
    Perm(Vec<usize>),
    Dense(DenseMatrix),
}

impl Operator {
    pub fn dim(&self) -> usize {
        match self {
            Operator::Perm(p) => p.len(),
            Operator::Dense(m) => m.rows(),
        }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        match self {
            Operator::Perm(p) => {
                let mut out = vec![C64::new(0.0, 0.0); v.len()];
                for (s, &t) in p.iter().enumerate() {
                    out[t] = v[s];
                }
                out
            }
            Operator::Dense(m) => m.apply(v),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            Operator::Perm(p) => DenseMatrix::from_permutation(p),
            Operator::Dense(m) => m.clone(),
        }
    }

    /// `self * other`.
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        match (self, other) {
            (Operator::Perm(a), Operator::Perm(b)) => {
                Ok(Operator::Perm(b.iter().map(|&s| a[s]).collect()))
            }
            _ => Ok(Operator::Dense(self.to_dense().matmul(&other.to_dense())?)),
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            Operator::Perm(_) => true,
            Operator::Dense(m) => m.is_real(),
        }
    }

    /// Operator norm on `l_2`.
    pub fn norm(&self) -> Result<f64> {
        match self {
            Operator::Perm(_) => Ok(1.0),
            Operator::Dense(m) => Ok(m.singular_values()?[0]),
        }
    }

    pub fn unitarity_defect(&self) -> f64 {
        match self {
            Operator::Perm(_) => 0.0,
            Operator::Dense(m) => m.unitarity_defect(),
        }
    }

    fn key(&self) -> Vec<i64> {
        match self {
            Operator::Perm(p) => p.iter().map(|&s| s as i64).collect(),
            Operator::Dense(m) => {
                let mut key = vec![-1];
                for i in 0..m.rows() {
                    for j in 0..m.cols() {
                        let z = m.get(i, j);
                        key.push((z.re * KEY_SCALE).round() as i64);
                        key.push((z.im * KEY_SCALE).round() as i64);
                    }
                }
                key
            }
        }
    }
}

/// Images of a generating set under a finite-dimensional representation.
#[derive(Debug, Clone)]
pub struct Representation {
    dim: usize,
    generators: Vec<Operator>,
}

impl Representation {
    pub fn new(generators: Vec<Operator>) -> Result<Self> {
        let dim = generators
            .first()
            .ok_or_else(|| {
                LabError::Precondition("representation needs at least one generator".into())
            })?
            .dim();
        for op in &generators {
            if let Operator::Dense(m) = op {
                if !m.is_square() {
                    return Err(LabError::Shape(format!(
                        "{}x{} generator is not square",
                        m.rows(),
                        m.cols()
                    )));
                }
            }
            if op.dim() != dim {
                return Err(LabError::Shape(format!(
                    "generator of dimension {} in a {dim}-dimensional representation",
                    op.dim()
                )));
            }
        }
        Ok(Representation { dim, generators })
    }

    pub fn from_matrices(mats: Vec<DenseMatrix>) -> Result<Self> {
        Self::new(mats.into_iter().map(Operator::Dense).collect())
    }

    /// Every generator acts as the identity.
    pub fn trivial(dim: usize, count: usize) -> Result<Self> {
        Self::new(vec![Operator::Perm((0..dim).collect()); count])
    }

    /// Permutation representation on `l_2` of the plane.
    pub fn permutation(plane: &ProjectivePlane, gens: &[GroupElement]) -> Result<Self> {
        let ops = gens
            .iter()
            .map(|g| Ok(Operator::Perm(plane.permutation(g)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ops)
    }

    /// Permutation representation for the reduced generators of a quotient.
    pub fn from_quotient(plane: &ProjectivePlane, quotient: &Quotient) -> Result<Self> {
        Self::permutation(plane, &quotient.generators)
    }

    /// `pi (x) pi`, indexed by `s * dim + t` as in a Kronecker product.
    pub fn tensor_square(&self) -> Representation {
        let n = self.dim;
        let generators = self
            .generators
            .iter()
            .map(|op| match op {
                Operator::Perm(p) => {
                    Operator::Perm((0..n * n).map(|i| p[i / n] * n + p[i % n]).collect())
                }
                Operator::Dense(m) => Operator::Dense(m.kron(m)),
            })
            .collect();
        Representation {
            dim: n * n,
            generators,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Operator] {
        &self.generators
    }

    pub fn is_real(&self) -> bool {
        self.generators.iter().all(Operator::is_real)
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.generators
            .iter()
            .map(Operator::unitarity_defect)
            .fold(0.0, f64::max)
    }

    /// `max_h ||pi(h) xi - xi||`.
    pub fn displacement(&self, xi: &[C64]) -> f64 {
        self.generators
            .iter()
            .map(|op| {
                let moved = op.apply(xi);
                let d: Vec<C64> = moved.iter().zip(xi).map(|(a, b)| a - b).collect();
                vec_norm(&d, NormIndex::Two)
            })
            .fold(0.0, f64::max)
    }

    /// All elements of the image group, identity first, by breadth-first closure.
    pub fn enumerate_image(&self, cap: usize) -> Result<Vec<Operator>> {
        let identity = Operator::Perm((0..self.dim).collect());
        let mut seen: HashSet<Vec<i64>> = HashSet::new();
        seen.insert(identity.key());
        seen.insert(Operator::Dense(DenseMatrix::identity(self.dim)).key());
        let mut elements = vec![identity];
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for gen in &self.generators {
                let next = elements[i].compose(gen)?;
                if seen.insert(next.key()) {
                    if elements.len() >= cap {
                        return Err(LabError::ClosureCap {
                            cap,
                            reached: elements.len(),
                        });
                    }
                    queue.push_back(elements.len());
                    elements.push(next);
                }
            }
        }
        Ok(elements)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantReport {
    pub eta: Vec<C64>,
    pub orbit_size: usize,
    /// `max_g ||pi(g) eta - eta||` over every enumerated group element.
    pub defect: f64,
    pub distance: f64,
    pub displacement: f64,
    pub max_norm: f64,
    /// `R max_g ||pi(g)||^2 max_h ||pi(h) xi - xi||`, when a constant `R` was supplied.
    pub bound: Option<f64>,
    pub holds: Option<bool>,
}

/// Orbit average `eta` of `xi`, its invariance defect, and the distance bound for a given `R`.
pub fn invariant_vector(
    rep: &Representation,
    xi: &[C64],
    r: Option<f64>,
    cap: usize,
) -> Result<InvariantReport> {
    if xi.len() != rep.dim() {
        return Err(LabError::Shape(format!(
            "vector of length {} for a {}-dimensional representation",
            xi.len(),
            rep.dim()
        )));
    }
    let image = rep.enumerate_image(cap)?;
    orbit_average(rep, &image, xi, r)
}

/// [`invariant_vector`] over an already enumerated image group.
pub fn orbit_average(
    rep: &Representation,
    image: &[Operator],
    xi: &[C64],
    r: Option<f64>,
) -> Result<InvariantReport> {
    if xi.len() != rep.dim() {
        return Err(LabError::Shape(format!(
            "vector of length {} for a {}-dimensional representation",
            xi.len(),
            rep.dim()
        )));
    }
    let mut eta = vec![C64::new(0.0, 0.0); xi.len()];
    for g in image {
        for (a, b) in eta.iter_mut().zip(g.apply(xi)) {
            *a += b;
        }
    }
    let count = image.len() as f64;
    eta.iter_mut().for_each(|a| *a /= count);

    let mut defect = 0.0f64;
    let mut max_norm = 0.0f64;
    for g in image {
        let moved = g.apply(&eta);
        let d: Vec<C64> = moved.iter().zip(&eta).map(|(a, b)| a - b).collect();
        defect = defect.max(vec_norm(&d, NormIndex::Two));
        max_norm = max_norm.max(g.norm()?);
    }
    let diff: Vec<C64> = xi.iter().zip(&eta).map(|(a, b)| a - b).collect();
    let distance = vec_norm(&diff, NormIndex::Two);
    let displacement = rep.displacement(xi);
    let bound = r.map(|r| r * max_norm * max_norm * displacement);
    let holds = bound.map(|b| distance <= b + 1e-9 * b.max(1.0));
    Ok(InvariantReport {
        eta,
        orbit_size: image.len(),
        defect,
        distance,
        displacement,
        max_norm,
        bound,
        holds,
    })
}

/// Convenience wrapper with the default closure cap.
pub fn invariant_vector_default(
    rep: &Representation,
    xi: &[C64],
    r: Option<f64>,
) -> Result<InvariantReport> {
    invariant_vector(rep, xi, r, DEFAULT_CLOSURE_CAP)
}

#[derive(Debug, Clone, Serialize)]
pub struct KazhdanReport {
    pub dim: usize,
    pub invariant_dim: usize,
    /// Square root of the smallest nonzero eigenvalue of the averaged Laplacian; 0 if every vector is invariant.
    pub kappa: f64,
    /// `1 / kappa`.
    pub r_eff: Option<f64>,
    pub all_invariant: bool,
    #[serde(skip)]
    pub invariant_basis: DenseMatrix,
}

/// `(1/|S|) sum_g (2I - pi(g) - pi(g)*)` as a real matrix; only valid for real representations.
fn laplacian_real(rep: &Representation) -> Mat<f64> {
    let n = rep.dim();
    let mut l = Mat::<f64>::zeros(n, n);
    for op in rep.generators() {
        for i in 0..n {
            l[(i, i)] += 2.0;
        }
        match op {
            Operator::Perm(p) => {
                for (s, &t) in p.iter().enumerate() {
                    l[(t, s)] -= 1.0;
                    l[(s, t)] -= 1.0;
                }
            }
            Operator::Dense(m) => {
                for i in 0..n {
                    for j in 0..n {
                        let v = m.get(i, j).re;
                        l[(i, j)] -= v;
                        l[(j, i)] -= v;
                    }
                }
            }
        }
    }
    let c = 1.0 / rep.generators().len() as f64;
    l * faer::Scale(c)
}

fn laplacian_complex(rep: &Representation) -> Result<DenseMatrix> {
    let n = rep.dim();
    let mut l = DenseMatrix::zeros(n, n);
    for op in rep.generators() {
        let m = op.to_dense();
        l = l.add(
            &DenseMatrix::identity(n)
                .scale_real(2.0)
                .sub(&m)?
                .sub(&m.adjoint())?,
        )?;
    }
    Ok(l.scale_real(1.0 / rep.generators().len() as f64))
}

/// Spectral Kazhdan constant of a unitary representation for its generators.
pub fn kazhdan_constant(rep: &Representation) -> Result<KazhdanReport> {
    let defect = rep.unitarity_defect();
    if defect > INVARIANCE_TOL {
        return Err(LabError::NotUnitary(defect));
    }
    let n = rep.dim();
    let (values, vectors): (Vec<f64>, DenseMatrix) = if rep.is_real() {
        let eig = laplacian_real(rep)
            .self_adjoint_eigen(faer::Side::Lower)
            .map_err(|_| LabError::EigenFailure)?;
        let vals = eig.S().column_vector().iter().copied().collect();
        let u = eig.U();
        (
            vals,
            DenseMatrix::from_fn(n, n, |i, j| C64::new(u[(i, j)], 0.0)),
        )
    } else {
        let eig = laplacian_complex(rep)?.hermitian_eigen()?;
        let v = DenseMatrix::from_inner(eig.vectors)?;
        (eig.values, v)
    };
    let invariant: Vec<usize> = (0..n).filter(|&i| values[i] <= INVARIANT_TOL).collect();
    let invariant_basis =
        DenseMatrix::from_fn(n, invariant.len(), |i, j| vectors.get(i, invariant[j]));
    let smallest = values.iter().copied().find(|&v| v > INVARIANT_TOL);
    let kappa = smallest.map_or(0.0, f64::sqrt);
    Ok(KazhdanReport {
        dim: n,
        invariant_dim: invariant.len(),
        kappa,
        r_eff: smallest.map(|v| 1.0 / v.sqrt()),
        all_invariant: smallest.is_none(),
        invariant_basis,
    })
}

impl KazhdanReport {
    /// Orthogonal projection onto the invariant subspace.
    pub fn project(&self, xi: &[C64]) -> Vec<C64> {
        let b = &self.invariant_basis;
        let coeffs: Vec<C64> = (0..b.cols())
            .map(|j| (0..b.rows()).map(|i| b.get(i, j).conj() * xi[i]).sum())
            .collect();
        (0..b.rows())
            .map(|i| {
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, c)| b.get(i, j) * c)
                    .sum()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SamplingCheck {
    pub trials: usize,
    /// Largest `||xi - P xi|| / (R_eff max_h ||pi(h) xi - xi||)` seen.
    pub max_ratio: f64,
    pub holds: bool,
}

/// Checks `||xi - P xi|| <= R_eff max_h ||pi(h) xi - xi||` on random unit vectors.
pub fn verify_kazhdan<R: Rng + ?Sized>(
    rng: &mut R,
    rep: &Representation,
    report: &KazhdanReport,
    trials: usize,
) -> Result<SamplingCheck> {
    let r_eff = report.r_eff.ok_or_else(|| {
        LabError::Precondition("every vector is invariant; no constant to check".into())
    })?;
    let mut max_ratio = 0.0f64;
    for _ in 0..trials {
        let xi = unit_vector(rng, rep.dim());
        let eta = report.project(&xi);
        let diff: Vec<C64> = xi.iter().zip(&eta).map(|(a, b)| a - b).collect();
        let dist = vec_norm(&diff, NormIndex::Two);
        let disp = rep.displacement(&xi);
        let ratio = if disp > 0.0 {
            dist / (r_eff * disp)
        } else if dist < INVARIANCE_TOL {
            0.0
        } else {
            f64::INFINITY
        };
        max_ratio = max_ratio.max(ratio);
    }
    Ok(SamplingCheck {
        trials,
        max_ratio,
        holds: max_ratio <= 1.0 + 1e-9,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::{enumerate_quotient, GeneratorSet, Prime};
    use crate::matrix::rng_from_seed;

    fn rep(l: u64) -> (ProjectivePlane, Representation) {
        let plane = ProjectivePlane::build(l).unwrap();
        let q = enumerate_quotient(
            Prime::new(l).unwrap(),
            &GeneratorSet::elementary(),
            DEFAULT_CLOSURE_CAP,
        )
        .unwrap();
        let r = Representation::from_quotient(&plane, &q).unwrap();
        (plane, r)
    }

    #[test]
    fn tensor_square_of_perm_matches_kron() {
        let (_, r) = rep(2);
        let sq = r.tensor_square();
        for (a, b) in r.generators().iter().zip(sq.generators()) {
            let k = a.to_dense().kron(&a.to_dense());
            assert!(k.max_abs_diff(&b.to_dense()) < 1e-15);
        }
    }

    #[test]
    fn image_of_permutation_rep_is_whole_group() {
        let (_, r) = rep(2);
        assert_eq!(r.enumerate_image(DEFAULT_CLOSURE_CAP).unwrap().len(), 168);
        assert!(matches!(
            r.enumerate_image(10),
            Err(LabError::ClosureCap { cap: 10, .. })
        ));
    }

    #[test]
    fn dense_and_perm_closures_agree() {
        let (_, r) = rep(2);
        let dense =
            Representation::from_matrices(r.generators().iter().map(Operator::to_dense).collect())
                .unwrap();
        assert_eq!(
            dense.enumerate_image(DEFAULT_CLOSURE_CAP).unwrap().len(),
            168
        );
    }

    #[test]
    fn orbit_average_is_constant() {
        let (_, r) = rep(2);
        let mut rng = rng_from_seed(3);
        let xi = unit_vector(&mut rng, 7);
        let mean: C64 = xi.iter().sum::<C64>() / 7.0;
        let out = invariant_vector_default(&r, &xi, None).unwrap();
        assert!(out.eta.iter().all(|z| (z - mean).norm() < 1e-12));
        assert!(out.defect <= INVARIANCE_TOL);
        let ones = vec![C64::new(1.0, 0.0); 7];
        let fixed = invariant_vector_default(&r, &ones, None).unwrap();
        assert!(fixed.distance < 1e-12 && fixed.defect == 0.0);
    }

    #[test]
    fn trivial_representation_is_flagged() {
        let r = Representation::trivial(4, 3).unwrap();
        let k = kazhdan_constant(&r).unwrap();
        assert!(k.all_invariant);
        assert_eq!((k.kappa, k.invariant_dim, k.r_eff), (0.0, 4, None));
    }

    #[test]
    fn tensor_square_has_two_invariants() {
        for l in [2, 3] {
            let (_, r) = rep(l);
            let k = kazhdan_constant(&r.tensor_square()).unwrap();
            assert_eq!(k.invariant_dim, 2, "l = {l}");
            assert!(k.kappa > 0.0);
        }
    }

    #[test]
    fn complex_path_agrees_with_real_path() {
        let (_, r) = rep(2);
        let dense = Representation::from_matrices(
            r.generators()
                .iter()
                .map(|op| op.to_dense().scale(C64::new(0.0, 1.0)))
                .collect(),
        )
        .unwrap();
        // multiplying by i changes the spectrum; compare the untouched one through the complex route instead
        let plain =
            Representation::from_matrices(r.generators().iter().map(Operator::to_dense).collect())
                .unwrap();
        let a = kazhdan_constant(&r).unwrap();
        let b = laplacian_complex(&plain)
            .unwrap()
            .hermitian_eigen()
            .unwrap();
        let smallest = b
            .values
            .iter()
            .copied()
            .find(|&v| v > INVARIANT_TOL)
            .unwrap();
        assert!((a.kappa - smallest.sqrt()).abs() < 1e-10);
        assert!(!dense.is_real());
        assert_eq!(kazhdan_constant(&dense).unwrap().invariant_dim, 0);
    }

    #[test]
    fn sampled_constant_holds() {
        let (_, r) = rep(2);
        let k = kazhdan_constant(&r).unwrap();
        assert_eq!(k.invariant_dim, 1);
        let check = verify_kazhdan(&mut rng_from_seed(11), &r, &k, 100).unwrap();
        assert!(check.holds, "{check:?}");
    }

    #[test]
    fn non_unitary_rejected() {
        let r =
            Representation::from_matrices(vec![DenseMatrix::identity(2).scale_real(2.0)]).unwrap();
        assert!(matches!(kazhdan_constant(&r), Err(LabError::NotUnitary(_))));
    }
}
