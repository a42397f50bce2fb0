//! Co-area inequality and concentration of Lipschitz maps on expanders.

use serde::Serialize;

use super::cheeger::Expansion;
use super::graph::Graph;
use crate::error::{LabError, Result};
use crate::finite::{perm_matrix, ProjectivePlane, Quotient};
use crate::matrix::{vec_norm, NormIndex, C64};
use crate::mazur::{classical_mazur, MazurMap, ModulusOfContinuity};

const REL_SLACK: f64 = 1e-9;

fn le(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + REL_SLACK * rhs.abs().max(1.0)
}

fn check_len(g: &Graph, len: usize) -> Result<()> {
    if len != g.n() {
        return Err(LabError::Shape(format!(
            "{len} values for a graph on {} vertices",
            g.n()
        )));
    }
    Ok(())
}

fn check_nonneg(values: &[f64]) -> Result<()> {
    if let Some(i) = values.iter().position(|&v| !(v >= 0.0 && v.is_finite())) {
        return Err(LabError::Precondition(format!(
            "value at vertex {i} is {} (need finite and >= 0)",
            values[i]
        )));
    }
    Ok(())
}

/// Largest difference of a scalar function across an edge.
pub fn scalar_lip(g: &Graph, f: &[f64]) -> f64 {
    g.edges()
        .map(|(u, v)| (f[u] - f[v]).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoareaCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub expansion: Expansion,
}

/// `sum_{edges} |g(s) - g(t)| >= h sum_s g(s)` for `g >= 0` supported on at most half the vertices.
pub fn coarea_check(g: &Graph, values: &[f64], h: Expansion) -> Result<CoareaCheck> {
    check_len(g, values.len())?;
    check_nonneg(values)?;
    let support = values.iter().filter(|&&v| v > 0.0).count();
    if 2 * support > g.n() {
        return Err(LabError::Precondition(format!(
            "support has {support} vertices, more than half of {}",
            g.n()
        )));
    }
    let lhs: f64 = g.edges().map(|(u, v)| (values[u] - values[v]).abs()).sum();
    let rhs = h.h * values.iter().sum::<f64>();
    Ok(CoareaCheck {
        lhs,
        rhs,
        holds: le(rhs, lhs),
        expansion: h,
    })
}

/// Vectors attached to the vertices of a graph, with the norm they are measured in.
#[derive(Debug, Clone, Serialize)]
pub struct BanachPointCloud {
    points: Vec<Vec<C64>>,
    space: NormIndex,
    lip: f64,
}

impl BanachPointCloud {
    pub fn new(g: &Graph, points: Vec<Vec<C64>>, space: NormIndex) -> Result<Self> {
        if points.is_empty() {
            return Err(LabError::Precondition("empty point cloud".into()));
        }
        check_len(g, points.len())?;
        let dim = points[0].len();
        if points.iter().any(|p| p.len() != dim) {
            return Err(LabError::Shape("points have different dimensions".into()));
        }
        if points
            .iter()
            .flatten()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(LabError::Precondition(
                "point cloud has non-finite coordinates".into(),
            ));
        }
        let lip = g
            .edges()
            .map(|(u, v)| distance(&points[u], &points[v], space))
            .fold(0.0, f64::max);
        Ok(BanachPointCloud { points, space, lip })
    }

    /// Real scalar function viewed as a one-dimensional cloud.
    pub fn from_scalars(g: &Graph, f: &[f64], space: NormIndex) -> Result<Self> {
        Self::new(
            g,
            f.iter().map(|&x| vec![C64::new(x, 0.0)]).collect(),
            space,
        )
    }

    pub fn points(&self) -> &[Vec<C64>] {
        &self.points
    }

    pub fn space(&self) -> NormIndex {
        self.space
    }

    pub fn lip(&self) -> f64 {
        self.lip
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// Accumulated relative to the first point, so a constant cloud has its mean exactly.
    pub fn mean(&self) -> Vec<C64> {
        let n = self.points.len() as f64;
        let base = &self.points[0];
        let mut m = vec![C64::new(0.0, 0.0); self.dim()];
        for p in &self.points {
            for ((a, b), c) in m.iter_mut().zip(p).zip(base) {
                *a += b - c;
            }
        }
        m.iter_mut().zip(base).for_each(|(a, c)| *a = *a / n + c);
        m
    }

    /// `(1/n) sum_s ||f(s) - m||`.
    pub fn mean_deviation(&self) -> f64 {
        let m = self.mean();
        self.points
            .iter()
            .map(|p| distance(p, &m, self.space))
            .sum::<f64>()
            / self.points.len() as f64
    }

    pub fn max_norm(&self) -> f64 {
        self.points
            .iter()
            .map(|p| vec_norm(p, self.space))
            .fold(0.0, f64::max)
    }
}

fn distance(a: &[C64], b: &[C64], p: NormIndex) -> f64 {
    let d: Vec<C64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    vec_norm(&d, p)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConcentrationCheck {
    pub mean_dev: f64,
    pub lip: f64,
    pub bound: f64,
    pub holds: bool,
    pub expansion: Expansion,
}

/// `(1/n) sum ||f(s) - m||_1 <= 2 (k/h) Lip(f)` for a cloud in `l_1`.
pub fn concentration_l1(
    g: &Graph,
    cloud: &BanachPointCloud,
    h: Expansion,
) -> Result<ConcentrationCheck> {
    if cloud.space() != NormIndex::One {
        return Err(LabError::Precondition(format!(
            "cloud lives in l_{}, expected l_1",
            cloud.space()
        )));
    }
    check_len(g, cloud.points().len())?;
    let hv = h.require_positive()?;
    let mean_dev = cloud.mean_deviation();
    let bound = 2.0 * g.k() as f64 / hv * cloud.lip();
    Ok(ConcentrationCheck {
        mean_dev,
        lip: cloud.lip(),
        bound,
        holds: le(mean_dev, bound),
        expansion: h,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MedianCheck {
    pub mean: f64,
    pub r0: f64,
    pub lip: f64,
    pub bound: f64,
    pub holds: bool,
    pub expansion: Expansion,
}

/// `(1/n) sum f(s) <= R_0 + (k/2h) Lip(f)` when `f <= R_0` on at least half the vertices.
pub fn concentration_median(g: &Graph, f: &[f64], r0: f64, h: Expansion) -> Result<MedianCheck> {
    check_len(g, f.len())?;
    check_nonneg(f)?;
    let below = f.iter().filter(|&&v| v <= r0).count();
    if 2 * below < g.n() {
        return Err(LabError::Precondition(format!(
            "only {below} of {} vertices satisfy f <= {r0}",
            g.n()
        )));
    }
    let hv = h.require_positive()?;
    let lip = scalar_lip(g, f);
    let mean = f.iter().sum::<f64>() / f.len() as f64;
    let bound = r0 + g.k() as f64 / (2.0 * hv) * lip;
    Ok(MedianCheck {
        mean,
        r0,
        lip,
        bound,
        holds: le(mean, bound),
        expansion: h,
    })
}

/// Smallest upper median, the natural `R_0` for [`concentration_median`].
pub fn median_anchor(f: &[f64]) -> f64 {
    let mut s = f.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    s[(s.len() - 1) / 2]
}

/// Doublings tried above `10 k/h` when searching for the concentration radius.
pub const RADIUS_DOUBLINGS: u32 = 80;

/// Smallest `R = 10 (k/h) 2^j` with `omega_inv(16 (k/h) omega_fwd(5/R)) <= 1/9`, if any.
pub fn search_radius(
    k: f64,
    h: f64,
    omega_fwd: impl Fn(f64) -> f64,
    omega_inv: impl Fn(f64) -> f64,
) -> Option<f64> {
    let base = 10.0 * k / h;
    (0..=RADIUS_DOUBLINGS)
        .map(|j| base * 2f64.powi(j as i32))
        .find(|&r| omega_inv(16.0 * k / h * omega_fwd(5.0 / r)) <= 1.0 / 9.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusStatus {
    Certified,
    /// No grid radius satisfied the condition with the measured moduli.
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct BanachReport {
    pub status: RadiusStatus,
    /// Radius from the measured moduli.
    pub r: Option<f64>,
    /// Radius from the closed-form moduli, for comparison.
    pub r_theory: Option<f64>,
    pub mean_dev: f64,
    pub lip: f64,
    pub holds: Option<bool>,
    /// The cloud pushed into `l_1` and checked there.
    pub embedded: ConcentrationCheck,
    /// `2 (1/n) sum_s omega_inv(||g(s) - g(s*)||_1)` with `s*` nearest to the `l_1` mean.
    pub pulled_back_bound: f64,
    /// The direct deviation does not exceed the pulled-back bound.
    pub consistent: bool,
    pub expansion: Expansion,
}

/// Concentration of an `l_2`-ball cloud, with the radius certified from the moduli of the
/// `2 -> 1` Mazur embedding and its inverse.
pub fn concentration_banach(
    g: &Graph,
    cloud: &BanachPointCloud,
    h: Expansion,
    forward: &ModulusOfContinuity,
    inverse: &ModulusOfContinuity,
) -> Result<BanachReport> {
    if cloud.space() != NormIndex::Two {
        return Err(LabError::Precondition(format!(
            "cloud lives in l_{}, expected l_2",
            cloud.space()
        )));
    }
    if forward.map != MazurMap::Classical2To1 || inverse.map != MazurMap::Classical1To2 {
        return Err(LabError::Precondition(
            "moduli must be for the classical 2->1 map and its inverse".into(),
        ));
    }
    let radius = cloud.max_norm();
    if radius > 1.0 + REL_SLACK {
        return Err(LabError::Precondition(format!(
            "cloud leaves the unit ball (max norm {radius})"
        )));
    }
    check_len(g, cloud.points().len())?;
    let hv = h.require_positive()?;
    let k = g.k() as f64;

    let r = search_radius(k, hv, |t| forward.eval(t), |t| inverse.eval(t));
    let r_theory = search_radius(
        k,
        hv,
        |t| MazurMap::Classical2To1.theory_bound(t),
        |t| MazurMap::Classical1To2.theory_bound(t),
    );
    let mean_dev = cloud.mean_deviation();
    let lip = cloud.lip();
    let holds = r.map(|r| le(mean_dev, r * lip));

    let images: Vec<Vec<C64>> = cloud
        .points()
        .iter()
        .map(|p| classical_mazur(p, 2.0, 1.0))
        .collect();
    let embedded_cloud = BanachPointCloud::new(g, images, NormIndex::One)?;
    let embedded = concentration_l1(g, &embedded_cloud, h)?;

    let m = embedded_cloud.mean();
    let pts = embedded_cloud.points();
    let star = (0..pts.len())
        .min_by(|&a, &b| {
            distance(&pts[a], &m, NormIndex::One).total_cmp(&distance(&pts[b], &m, NormIndex::One))
        })
        .unwrap_or(0);
    let omega = |t: f64| inverse.eval(t).max(MazurMap::Classical1To2.theory_bound(t));
    let pulled_back_bound = 2.0
        * pts
            .iter()
            .map(|p| omega(distance(p, &pts[star], NormIndex::One)))
            .sum::<f64>()
        / pts.len() as f64;

    Ok(BanachReport {
        status: if r.is_some() {
            RadiusStatus::Certified
        } else {
            RadiusStatus::Inconclusive
        },
        r,
        r_theory,
        mean_dev,
        lip,
        holds,
        embedded,
        pulled_back_bound,
        consistent: le(mean_dev, pulled_back_bound),
        expansion: h,
    })
}

/// Orbit cloud `g -> P(g) xi` indexed like the quotient's elements.
pub fn orbit_cloud(
    quotient: &Quotient,
    plane: &ProjectivePlane,
    xi: &[C64],
) -> Result<Vec<Vec<C64>>> {
    if xi.len() != plane.len() {
        return Err(LabError::Shape(format!(
            "vector of length {} for a plane of {} points",
            xi.len(),
            plane.len()
        )));
    }
    quotient
        .elements
        .iter()
        .map(|g| Ok(perm_matrix(g, plane)?.apply(xi)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expander::cheeger::cheeger_exact;

    fn exact(g: &Graph) -> Expansion {
        Expansion::exact(cheeger_exact(g).unwrap())
    }

    #[test]
    fn coarea_single_vertex_k4() {
        let g = Graph::complete(4);
        let c = coarea_check(&g, &[1.0, 0.0, 0.0, 0.0], exact(&g)).unwrap();
        assert_eq!((c.lhs, c.rhs), (3.0, 2.0));
        assert!(c.holds);
        let z = coarea_check(&g, &[0.0; 4], exact(&g)).unwrap();
        assert_eq!((z.lhs, z.rhs), (0.0, 0.0));
        assert!(z.holds);
    }

    #[test]
    fn coarea_rejects_large_support_and_negatives() {
        let g = Graph::complete(4);
        assert!(coarea_check(&g, &[1.0, 1.0, 1.0, 0.0], exact(&g)).is_err());
        assert!(coarea_check(&g, &[-1.0, 0.0, 0.0, 0.0], exact(&g)).is_err());
    }

    #[test]
    fn cycle_distance_function() {
        let g = Graph::cycle(6);
        let f: Vec<f64> = g
            .distances_from(0)
            .into_iter()
            .map(|d| d.unwrap() as f64)
            .collect();
        let cloud = BanachPointCloud::from_scalars(&g, &f, NormIndex::One).unwrap();
        let c = concentration_l1(&g, &cloud, exact(&g)).unwrap();
        assert!((c.bound - 6.0).abs() < 1e-12);
        // mean 1.5, deviations 1.5,0.5,0.5,1.5,0.5,0.5
        assert!((c.mean_dev - 5.0 / 6.0).abs() < 1e-12);
        assert!(c.holds);
    }

    #[test]
    fn constant_map_has_no_deviation() {
        let g = Graph::petersen();
        let cloud =
            BanachPointCloud::new(&g, vec![vec![C64::new(2.0, -1.0); 3]; 10], NormIndex::One)
                .unwrap();
        let c = concentration_l1(&g, &cloud, exact(&g)).unwrap();
        assert_eq!((c.mean_dev, c.lip, c.bound), (0.0, 0.0, 0.0));
        assert!(c.holds);
    }

    #[test]
    fn median_form() {
        let g = Graph::cycle(6);
        let c = concentration_median(&g, &[3.0; 6], 3.0, exact(&g)).unwrap();
        assert!(c.holds && c.bound == 3.0);
        let f = [0.0, 0.0, 0.0, 1.0, 2.0, 1.0];
        let c = concentration_median(&g, &f, 0.0, exact(&g)).unwrap();
        assert!(c.holds);
        assert!(concentration_median(&g, &[5.0, 5.0, 5.0, 5.0, 0.0, 0.0], 0.0, exact(&g)).is_err());
    }

    #[test]
    fn radius_search_with_closed_form_moduli() {
        let r = search_radius(
            3.0,
            1.0,
            |t| MazurMap::Classical2To1.theory_bound(t),
            |t| MazurMap::Classical1To2.theory_bound(t),
        )
        .unwrap();
        // sqrt(2 * 48 * 2 * 5 / R) <= 1/9  <=>  R >= 960 * 81
        assert!((960.0 * 81.0..2.0 * 960.0 * 81.0).contains(&r));
        assert!(search_radius(3.0, 1.0, |_| 1.0, |_| 1.0).is_none());
    }
}
