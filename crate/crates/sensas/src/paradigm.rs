//! Desk-scale fixtures: a one-group slab diffusion problem discretized by
//! central differences, and the canonical scalar problem whose closed form
//! anchors every method test.

use ndarray::{arr1, arr2, Array1};

use crate::error::{Error, Result};
use crate::model::{
    build_affine_quadratic_problem, AffineQuadraticProblem, ParameterVector, Problem,
};

/// One homogeneous material region of the slab, spanning a fraction of the
/// domain from left to right in listing order.
#[derive(Debug, Clone, Copy)]
pub struct Region {
    /// Fraction of the slab length covered by this region; fractions of all
    /// regions must sum to one.
    pub span_fraction: f64,
    /// Diffusion coefficient (cm), strictly positive.
    pub diffusion: f64,
    /// Absorption coefficient (1/cm), nonnegative.
    pub absorption: f64,
    /// Volumetric source (1/cm^3/s).
    pub source: f64,
}

/// Detector span (as fractions of the slab) and response coefficient.
#[derive(Debug, Clone, Copy)]
pub struct Detector {
    pub lo_fraction: f64,
    pub hi_fraction: f64,
    /// Detector coefficient (1/cm).
    pub coefficient: f64,
}

/// Which scalar response the slab problem carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseKind {
    /// Detector reading `Sigma_d * dx * sum(u_i)` over detector nodes;
    /// linear in the state.
    LinearDetector,
    /// `1/2 * dx * sum(u_i^2)` over all nodes; quadratic in the state, so
    /// the second-order state block of the response is `dx * I`.
    QuadraticNorm,
}

/// Slab geometry, materials, detector, and response choice.
#[derive(Debug, Clone)]
pub struct SlabConfig {
    /// Slab length (cm).
    pub length: f64,
    /// Number of interior mesh nodes.
    pub cells: usize,
    pub regions: Vec<Region>,
    pub detector: Detector,
    pub response_kind: ResponseKind,
}

impl SlabConfig {
    fn validate(&self) -> Result<()> {
        if self.length.is_nan() || self.length <= 0.0 || !self.length.is_finite() {
            return Err(Error::InvalidConfig {
                field: "length",
                reason: format!("must be positive and finite, got {}", self.length),
            });
        }
        if self.cells < 3 {
            return Err(Error::InvalidConfig {
                field: "cells",
                reason: format!("need at least 3 interior nodes, got {}", self.cells),
            });
        }
        if self.regions.is_empty() {
            return Err(Error::InvalidConfig {
                field: "regions",
                reason: "at least one region is required".into(),
            });
        }
        let mut total = 0.0;
        for (r, region) in self.regions.iter().enumerate() {
            if region.span_fraction.is_nan() || region.span_fraction <= 0.0 {
                return Err(Error::InvalidConfig {
                    field: "regions",
                    reason: format!("region {} span fraction must be positive", r + 1),
                });
            }
            if region.diffusion.is_nan() || region.diffusion <= 0.0 || !region.diffusion.is_finite() {
                return Err(Error::InvalidConfig {
                    field: "regions",
                    reason: format!("region {} diffusion coefficient must be positive", r + 1),
                });
            }
            if region.absorption.is_nan() || region.absorption < 0.0 || !region.absorption.is_finite() {
                return Err(Error::InvalidConfig {
                    field: "regions",
                    reason: format!("region {} absorption must be nonnegative", r + 1),
                });
            }
            if !region.source.is_finite() {
                return Err(Error::InvalidConfig {
                    field: "regions",
                    reason: format!("region {} source must be finite", r + 1),
                });
            }
            total += region.span_fraction;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig {
                field: "regions",
                reason: format!("span fractions must partition the slab, sum is {total}"),
            });
        }
        let det = &self.detector;
        if !(det.lo_fraction >= 0.0 && det.lo_fraction < det.hi_fraction && det.hi_fraction <= 1.0)
        {
            return Err(Error::InvalidConfig {
                field: "detector",
                reason: format!(
                    "span must satisfy 0 <= lo < hi <= 1, got [{}, {}]",
                    det.lo_fraction, det.hi_fraction
                ),
            });
        }
        if !det.coefficient.is_finite() {
            return Err(Error::InvalidConfig {
                field: "detector",
                reason: "coefficient must be finite".into(),
            });
        }
        Ok(())
    }

    /// Region index containing the given fraction of the slab.
    fn region_at(&self, fraction: f64) -> usize {
        let mut cum = 0.0;
        for (r, region) in self.regions.iter().enumerate() {
            cum += region.span_fraction;
            if fraction < cum {
                return r;
            }
        }
        self.regions.len() - 1
    }
}

/// Assemble the slab's problem data and nominal parameters:
/// `-d/dx(D du/dx) + Sigma_a u = S` with zero boundary values eliminated
/// into the matrix, central differences on `cells` interior nodes with
/// spacing `dx = length / (cells + 1)`.
///
/// The parameters are, in order, the region diffusion coefficients, the
/// region absorptions, and the region sources, so the operator is affine
/// in all of them and the exact first derivatives are the assembled
/// indicator stencils. Each mesh interval takes the diffusion coefficient
/// of the region at its midpoint (for piecewise-constant materials aligned
/// with the mesh this is the conservative interface treatment); each node
/// takes the absorption and source of the region at its position. The mesh
/// weight `dx` is folded into the response coefficients so plain dot
/// products realize the mesh inner product.
pub fn slab_affine_parts(cfg: &SlabConfig) -> Result<(AffineQuadraticProblem, ParameterVector)> {
    cfg.validate()?;
    let n = cfg.cells;
    let n_regions = cfg.regions.len();
    let n_alpha = 3 * n_regions;
    let dx = cfg.length / (n as f64 + 1.0);
    let w = 1.0 / (dx * dx);

    let mut data = AffineQuadraticProblem::zeros(n, n_alpha);

    // Diffusion stencil per region: intervals t = 0..=n connect node t-1
    // with node t (boundary values are zero and eliminated).
    for t in 0..=n {
        let midpoint_fraction = (t as f64 + 0.5) / (n as f64 + 1.0);
        let r = cfg.region_at(midpoint_fraction);
        let block = data
            .l1
            .entry(r)
            .or_insert_with(|| ndarray::Array2::zeros((n, n)));
        let left = t.checked_sub(1);
        let right = if t < n { Some(t) } else { None };
        if let Some(i) = left {
            block[[i, i]] += w;
        }
        if let Some(i) = right {
            block[[i, i]] += w;
        }
        if let (Some(i), Some(j)) = (left, right) {
            block[[i, j]] -= w;
            block[[j, i]] -= w;
        }
    }

    // Absorption and source per node.
    for i in 0..n {
        let fraction = (i as f64 + 1.0) / (n as f64 + 1.0);
        let r = cfg.region_at(fraction);
        let absorption = data
            .l1
            .entry(n_regions + r)
            .or_insert_with(|| ndarray::Array2::zeros((n, n)));
        absorption[[i, i]] += 1.0;
        let source = data
            .q1
            .entry(2 * n_regions + r)
            .or_insert_with(|| Array1::zeros(n));
        source[i] += 1.0;
    }

    match cfg.response_kind {
        ResponseKind::LinearDetector => {
            for i in 0..n {
                let fraction = (i as f64 + 1.0) / (n as f64 + 1.0);
                if fraction >= cfg.detector.lo_fraction && fraction <= cfg.detector.hi_fraction {
                    data.c[i] = cfg.detector.coefficient * dx;
                }
            }
        }
        ResponseKind::QuadraticNorm => {
            for i in 0..n {
                data.m[[i, i]] = dx;
            }
        }
    }

    let mut alpha0 = Array1::zeros(n_alpha);
    let mut names = Vec::with_capacity(n_alpha);
    for (r, region) in cfg.regions.iter().enumerate() {
        alpha0[r] = region.diffusion;
        names.push(format!("D_{}", r + 1));
    }
    for (r, region) in cfg.regions.iter().enumerate() {
        alpha0[n_regions + r] = region.absorption;
        names.push(format!("Sigma_a_{}", r + 1));
    }
    for (r, region) in cfg.regions.iter().enumerate() {
        alpha0[2 * n_regions + r] = region.source;
        names.push(format!("S_{}", r + 1));
    }
    let alpha0 = ParameterVector::new(alpha0)?.with_names(names)?;
    Ok((data, alpha0))
}

/// Build the slab problem ready for analysis.
pub fn build_slab_diffusion(cfg: &SlabConfig) -> Result<Problem> {
    let (data, alpha0) = slab_affine_parts(cfg)?;
    build_affine_quadratic_problem(data, alpha0)
}

/// The uniform reference slab: 10 cm, 50 interior nodes, one region with
/// `D = 1`, `Sigma_a = 0.1`, `S = 1`, detector over the whole slab with
/// unit coefficient.
pub fn uniform_slab_config(response_kind: ResponseKind) -> SlabConfig {
    SlabConfig {
        length: 10.0,
        cells: 50,
        regions: vec![Region {
            span_fraction: 1.0,
            diffusion: 1.0,
            absorption: 0.1,
            source: 1.0,
        }],
        detector: Detector {
            lo_fraction: 0.0,
            hi_fraction: 1.0,
            coefficient: 1.0,
        },
        response_kind,
    }
}

/// Problem data of the canonical scalar fixture: `L = [alpha_1]`,
/// `Q = [alpha_2]`, `R = u_1`, so `R = alpha_2 / alpha_1` in closed form.
pub fn scalar_fixture_parts() -> (AffineQuadraticProblem, ParameterVector) {
    let mut data = AffineQuadraticProblem::zeros(1, 2);
    data.l1.insert(0, arr2(&[[1.0]]));
    data.q1.insert(1, arr1(&[1.0]));
    data.c = arr1(&[1.0]);
    let alpha0 = ParameterVector::new(arr1(&[2.0, 4.0])).unwrap();
    (data, alpha0)
}

/// The canonical scalar fixture at its nominal point `(2, 4)`.
pub fn build_scalar_fixture() -> Problem {
    let (data, alpha0) = scalar_fixture_parts();
    build_affine_quadratic_problem(data, alpha0).expect("scalar fixture is well formed")
}
