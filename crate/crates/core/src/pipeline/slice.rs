use serde::Serialize;

use super::tensor::{BlockLayout, TensorDecomposition};
use crate::error::{LabError, Result};
use crate::finite::{sign_isometry, GeneratorSet, GeneratorTag, ProjectivePlane};
use crate::matrix::{schatten_norm, DenseMatrix, SchattenOrder, C64};

/// Slices with `S_1` norm at most this fraction of the largest are treated as zero.
pub const ZERO_SLICE_REL: f64 = 1e-12;

/// The slice `T_l(m)` as a `|Lambda_l| x |Lambda_l|` matrix.
///
/// With `xi_i = P_l a_i e_m` and `eta_i` the block-`l` part of row `m` of `b_i`, the slice is
/// `sum_i eta_i xi_i^T`, so its trace is `sum_i <xi_i, eta_i>`.
#[derive(Debug, Clone, Serialize)]
pub struct SliceMatrix {
    pub l: u64,
    pub m: usize,
    pub matrix: DenseMatrix,
}

pub fn slice(t: &TensorDecomposition, l: u64, m: usize) -> Result<SliceMatrix> {
    let layout = t.validate()?;
    slice_in(t, &layout, l, m)
}

fn slice_in(
    t: &TensorDecomposition,
    layout: &BlockLayout,
    l: u64,
    m: usize,
) -> Result<SliceMatrix> {
    let d = layout.dim();
    if m >= d {
        return Err(LabError::IndexOutOfRange { index: m, len: d });
    }
    let (plane, off) = layout.block(l)?;
    let n = plane.len();
    let mut acc = vec![C64::new(0.0, 0.0); n * n];
    for (a, b) in &t.pairs {
        let eta: Vec<C64> = (0..n).map(|s| b.get(m, off + s)).collect();
        let xi: Vec<C64> = (0..n).map(|s| a.get(off + s, m)).collect();
        if xi.iter().all(|z| *z == C64::new(0.0, 0.0)) {
            continue;
        }
        for s in 0..n {
            if eta[s] == C64::new(0.0, 0.0) {
                continue;
            }
            for u in 0..n {
                acc[s * n + u] += eta[s] * xi[u];
            }
        }
    }
    Ok(SliceMatrix {
        l,
        m,
        matrix: DenseMatrix::new(n, n, acc)?,
    })
}

/// `Sigma+` acting on one block: the reduced elementary generators, then the sign isometry.
#[derive(Debug, Clone)]
pub struct SigmaPlus {
    pub tags: Vec<GeneratorTag>,
    pub operators: Vec<DenseMatrix>,
}

impl SigmaPlus {
    pub fn for_plane(plane: &ProjectivePlane) -> Result<Self> {
        let gens = GeneratorSet::elementary();
        let tags = gens.plus_tags(plane.prime())?;
        let mut operators: Vec<DenseMatrix> = gens
            .reduce(plane.prime())?
            .iter()
            .map(|g| Ok(DenseMatrix::from_permutation(&plane.permutation(g)?)))
            .collect::<Result<_>>()?;
        operators.push(sign_isometry(plane));
        Ok(SigmaPlus { tags, operators })
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn operator(&self, tag: GeneratorTag) -> Result<&DenseMatrix> {
        self.tags
            .iter()
            .position(|&t| t == tag)
            .map(|i| &self.operators[i])
            .ok_or(match tag {
                GeneratorTag::Matrix(i) => LabError::UnknownGenerator(i),
                GeneratorTag::Sign => LabError::UnknownGenerator(usize::MAX),
            })
    }
}

/// `(pi (x) pi)` applied to a slice: `M -> pi M pi^T`.
pub fn translate(m: &DenseMatrix, pi: &DenseMatrix) -> Result<DenseMatrix> {
    pi.matmul(m)?.matmul(&pi.transpose())
}

/// `||M - pi M pi^T||_{S_1}`.
pub fn translate_defect(m: &DenseMatrix, pi: &DenseMatrix) -> Result<f64> {
    if m.frobenius() == 0.0 {
        return Ok(0.0);
    }
    schatten_norm(&m.sub(&translate(m, pi)?)?, SchattenOrder::One)
}

pub fn slice_defect(t: &TensorDecomposition, l: u64, m: usize, g: GeneratorTag) -> Result<f64> {
    let layout = t.validate()?;
    let (plane, _) = layout.block(l)?;
    let sigma = SigmaPlus::for_plane(plane)?;
    let s = slice_in(t, &layout, l, m)?;
    translate_defect(&s.matrix, sigma.operator(g)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct SliceMass {
    pub total: f64,
    pub lower_bound_ok: bool,
    /// `sum_m Tr T_l(m)`, which equals `|Lambda_l|` when the product is `1`.
    pub trace_pairing: C64,
}

/// All slices of one block with their norms and translate defects.
#[derive(Debug, Clone)]
pub struct BlockSlices {
    pub l: u64,
    pub n: usize,
    pub slices: Vec<DenseMatrix>,
    pub norms: Vec<f64>,
    /// `defects[m][g]` for `g` in `Sigma+` order.
    pub defects: Vec<Vec<f64>>,
    pub sigma: SigmaPlus,
}

impl BlockSlices {
    pub fn compute(t: &TensorDecomposition, l: u64) -> Result<Self> {
        let layout = t.validate()?;
        let (plane, _) = layout.block(l)?;
        let sigma = SigmaPlus::for_plane(plane)?;
        let mut slices = Vec::with_capacity(layout.dim());
        let mut norms = Vec::with_capacity(layout.dim());
        let mut defects = Vec::with_capacity(layout.dim());
        for m in 0..layout.dim() {
            let s = slice_in(t, &layout, l, m)?.matrix;
            let nrm = if s.frobenius() == 0.0 {
                0.0
            } else {
                schatten_norm(&s, SchattenOrder::One)?
            };
            defects.push(
                sigma
                    .operators
                    .iter()
                    .map(|pi| translate_defect(&s, pi))
                    .collect::<Result<Vec<_>>>()?,
            );
            norms.push(nrm);
            slices.push(s);
        }
        Ok(BlockSlices {
            l,
            n: plane.len(),
            slices,
            norms,
            defects,
            sigma,
        })
    }

    pub fn mass(&self) -> SliceMass {
        let total: f64 = self.norms.iter().sum();
        SliceMass {
            total,
            lower_bound_ok: total >= self.n as f64 * (1.0 - 1e-8),
            trace_pairing: self.slices.iter().map(|s| s.trace()).sum(),
        }
    }

    /// Measured commutator defect per element of `Sigma+`: `sum_m defect / |Lambda_l|`.
    pub fn eps_per_generator(&self) -> Vec<f64> {
        (0..self.sigma.len())
            .map(|g| self.defects.iter().map(|d| d[g]).sum::<f64>() / self.n as f64)
            .collect()
    }

    /// Index minimizing `max_g defect(m, g) / ||T_l(m)||_1`, and that ratio.
    pub fn select(&self) -> Result<(usize, f64)> {
        let top = self.norms.iter().copied().fold(0.0, f64::max);
        if top == 0.0 {
            return Err(LabError::Precondition(format!(
                "every slice of block l = {} is zero",
                self.l
            )));
        }
        let mut best: Option<(usize, f64)> = None;
        for (m, (&nrm, d)) in self.norms.iter().zip(&self.defects).enumerate() {
            if nrm <= ZERO_SLICE_REL * top {
                continue;
            }
            let ratio = d.iter().copied().fold(0.0, f64::max) / nrm;
            if best.is_none_or(|(_, r)| ratio < r) {
                best = Some((m, ratio));
            }
        }
        best.ok_or_else(|| LabError::Precondition("no nonzero slice".into()))
    }
}

/// Selected index `m_l`, the `S_1`-normalized slice and the achieved defect ratio.
pub fn select_slice(t: &TensorDecomposition, l: u64) -> Result<(usize, DenseMatrix, f64)> {
    let block = BlockSlices::compute(t, l)?;
    let (m, ratio) = block.select()?;
    let s = block.slices[m].scale_real(1.0 / block.norms[m]);
    Ok((m, s, ratio))
}

pub fn slice_mass(t: &TensorDecomposition, l: u64) -> Result<SliceMass> {
    Ok(BlockSlices::compute(t, l)?.mass())
}
