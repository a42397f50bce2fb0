use std::fmt::Write as _;

use faer::Mat;
use serde::Serialize;

use super::graph::Graph;
use crate::error::{LabError, Result};

/// Largest vertex count accepted by [`cheeger_exact`].
pub const MAX_EXACT_VERTICES: usize = 24;

/// Tolerance for the audit `lambda_1 = k`.
pub const TOP_EIGEN_TOL: f64 = 1e-9;

/// Exact expansion constant by enumerating every nonempty subset of at most `n/2` vertices.
///
/// Subsets are visited in Gray-code order so each step updates the boundary size in `O(1)`.
pub fn cheeger_exact(g: &Graph) -> Result<f64> {
    let n = g.n();
    if n > MAX_EXACT_VERTICES {
        return Err(LabError::GraphTooLarge {
            n,
            max: MAX_EXACT_VERTICES,
        });
    }
    if n < 2 {
        return Err(LabError::Graph(
            "expansion constant needs at least two vertices".into(),
        ));
    }
    let nbr: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &u| m | (1 << u)))
        .collect();
    let k = g.k() as i64;
    let half = n / 2;
    let mut mask = 0u32;
    let mut size = 0usize;
    let mut boundary = 0i64;
    let mut best = f64::INFINITY;
    for step in 1u64..(1u64 << n) {
        let v = step.trailing_zeros() as usize;
        let bit = 1u32 << v;
        let inside = (nbr[v] & mask).count_ones() as i64;
        if mask & bit == 0 {
            boundary += k - 2 * inside;
            size += 1;
        } else {
            boundary -= k - 2 * inside;
            size -= 1;
        }
        mask ^= bit;
        if size <= half {
            let ratio = boundary as f64 / size as f64;
            if ratio < best {
                best = ratio;
            }
        }
    }
    Ok(best)
}

/// Number of edges leaving `subset`.
pub fn boundary_size(g: &Graph, subset: &[bool]) -> usize {
    g.edges().filter(|&(u, v)| subset[u] != subset[v]).count()
}

pub(crate) fn adjacency(g: &Graph) -> Mat<f64> {
    let mut a = Mat::<f64>::zeros(g.n(), g.n());
    for (u, v) in g.edges() {
        a[(u, v)] = 1.0;
        a[(v, u)] = 1.0;
    }
    a
}

/// Adjacency eigenvalues in descending order.
pub fn adjacency_spectrum(g: &Graph) -> Result<Vec<f64>> {
    let mut vals = adjacency(g)
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|_| LabError::EigenFailure)?;
    vals.sort_by(|a, b| b.total_cmp(a));
    Ok(vals)
}

fn spectral_bounds(k: f64, lambda2: f64) -> (f64, f64) {
    let gap = k - lambda2;
    (gap / 2.0, (2.0 * k * gap).max(0.0).sqrt())
}

/// Spectral Cheeger bounds `((k - lambda_2)/2, sqrt(2k(k - lambda_2)))`.
pub fn cheeger_spectral(g: &Graph) -> Result<(f64, f64)> {
    Ok(SpectralReport::compute(g, false)?.bounds())
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub n: usize,
    pub k: usize,
    pub eigenvalues: Vec<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub gap: f64,
    pub cheeger_lower: f64,
    pub cheeger_upper: f64,
    pub cheeger_exact: Option<f64>,
}

impl SpectralReport {
    /// Fails on a disconnected graph (`lambda_2 = k`) or if `lambda_1` misses `k`.
    /// With `with_exact`, small graphs also get the enumerated constant.
    pub fn compute(g: &Graph, with_exact: bool) -> Result<Self> {
        g.require_connected()?;
        if g.n() < 2 {
            return Err(LabError::Graph(
                "spectral gap needs at least two vertices".into(),
            ));
        }
        let eigenvalues = adjacency_spectrum(g)?;
        let k = g.k() as f64;
        let (lambda1, lambda2) = (eigenvalues[0], eigenvalues[1]);
        if (lambda1 - k).abs() > TOP_EIGEN_TOL * k.max(1.0) {
            return Err(LabError::Graph(format!(
                "top eigenvalue {lambda1} differs from degree {k}"
            )));
        }
        let (cheeger_lower, cheeger_upper) = spectral_bounds(k, lambda2);
        let cheeger_exact = if with_exact && g.n() <= MAX_EXACT_VERTICES {
            Some(cheeger_exact(g)?)
        } else {
            None
        };
        Ok(SpectralReport {
            n: g.n(),
            k: g.k(),
            eigenvalues,
            lambda1,
            lambda2,
            gap: k - lambda2,
            cheeger_lower,
            cheeger_upper,
            cheeger_exact,
        })
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.cheeger_lower, self.cheeger_upper)
    }

    /// `lower <= exact <= upper`, vacuously true without an exact value.
    pub fn sandwich_holds(&self) -> bool {
        const SLACK: f64 = 1e-9;
        self.cheeger_exact
            .is_none_or(|h| self.cheeger_lower <= h + SLACK && h <= self.cheeger_upper + SLACK)
    }

    /// Best available expansion constant: exact if computed, spectral lower bound otherwise.
    pub fn expansion(&self) -> Expansion {
        match self.cheeger_exact {
            Some(h) => Expansion::exact(h),
            None => Expansion::lower_bound(self.cheeger_lower),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,eigenvalue\n");
        for (i, v) in self.eigenvalues.iter().enumerate() {
            let _ = writeln!(out, "{i},{v:.12e}");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionKind {
    Exact,
    /// A lower bound only widens the concentration bounds.
    SpectralLower,
}

/// An expansion constant together with where it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Expansion {
    pub h: f64,
    pub kind: ExpansionKind,
}

impl Expansion {
    pub fn exact(h: f64) -> Self {
        Expansion {
            h,
            kind: ExpansionKind::Exact,
        }
    }

    pub fn lower_bound(h: f64) -> Self {
        Expansion {
            h,
            kind: ExpansionKind::SpectralLower,
        }
    }

    /// Exact for small graphs, spectral lower bound otherwise.
    pub fn best_for(g: &Graph) -> Result<Self> {
        if g.n() <= MAX_EXACT_VERTICES {
            g.require_connected()?;
            Ok(Self::exact(cheeger_exact(g)?))
        } else {
            Ok(Self::lower_bound(cheeger_spectral(g)?.0))
        }
    }

    pub(crate) fn require_positive(self) -> Result<f64> {
        if self.h > 0.0 && self.h.is_finite() {
            Ok(self.h)
        } else {
            Err(LabError::Precondition(format!(
                "expansion constant must be positive, got {}",
                self.h
            )))
        }
    }
}
