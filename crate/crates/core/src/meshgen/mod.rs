//! Non-uniform rectilinear grid generation for FDTD solvers.
//!
//! Cell sizes are given as fractions of the shortest excitation wavelength:
//! `max_cell_model` bounds cells touching the model, `max_cell_space` bounds
//! the surrounding free space and PML, and `min_cell_global` sets the floor
//! below which lines are merged. Each axis is built independently:
//!
//! 1. project shape vertices onto the axis (the anchors),
//! 2. cluster anchors closer than `lambda_min / res_fraction` into fan centres,
//! 3. place graded refinement fans around each centre,
//! 4. merge lines closer than the floor, never dropping an anchor,
//! 5. fill remaining gaps up to the local maximum cell size,
//! 6. pad with a quarter-midband-wavelength free-space gap and PML cells.
//!
//! The timestep bound is then taken from the smallest cell on each axis.

mod axis;
pub mod export;

use std::ops::RangeInclusive;

use rayon::prelude::*;
use thiserror::Error;

use crate::scene::{axis_vertex_coords, dfs_shapes, scene_bbox, Axis, SceneError, SceneNode};

pub use axis::{add_boundary_and_pml, cluster_anchors, fill_gaps, merge_lines, refine_axis};

/// Vacuum speed of light (m/s).
pub const C0: f64 = 299_792_458.0;

/// Allowed number of PML cells per domain end.
pub const PML_CELLS: RangeInclusive<u32> = 4..=50;

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("excitation must be DC-free: f_min = {0} Hz gives an unbounded quarter-wavelength boundary gap")]
    DcExcitation(f64),
    #[error("invalid excitation band: f_min = {f_min} Hz, f_max = {f_max} Hz")]
    InvalidBand { f_min: f64, f_max: f64 },
    #[error("pml_n = {0} is outside [4, 50]")]
    PmlCellsOutOfRange(u32),
    #[error("invalid mesh parameter: {0}")]
    InvalidParameter(String),
    #[error("cell edge lengths must be positive and finite")]
    NonPositiveEdge,
    #[error(transparent)]
    Scene(#[from] SceneError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshWarning {
    /// `max_cell_model <= max_cell_space`: the model is meshed no finer than
    /// the surrounding free space.
    ModelNotFinerThanSpace { max_cell_model: f64, max_cell_space: f64 },
    /// The merge floor exceeds half a maximum cell, so gap filling may produce
    /// cells below the floor.
    FloorAboveHalfCell { min_cell_global: f64, max_cell: f64 },
}

impl std::fmt::Display for MeshWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeshWarning::ModelNotFinerThanSpace {
                max_cell_model,
                max_cell_space,
            } => write!(
                f,
                "max_cell_model ({max_cell_model}) should exceed max_cell_space ({max_cell_space})"
            ),
            MeshWarning::FloorAboveHalfCell {
                min_cell_global,
                max_cell,
            } => write!(
                f,
                "min_cell_global ({min_cell_global}) is below twice the cell fraction {max_cell}; \
                 the minimum cell size cannot be guaranteed"
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcitationSpec {
    pub f_min: f64,
    pub f_max: f64,
    /// Propagation speed (m/s).
    pub c: f64,
}

impl ExcitationSpec {
    pub fn new(f_min: f64, f_max: f64) -> Self {
        Self { f_min, f_max, c: C0 }
    }

    pub fn single(f: f64) -> Self {
        Self::new(f, f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshParams {
    pub max_cell_model: f64,
    pub max_cell_space: f64,
    pub min_cell_global: f64,
    /// Refinement lines placed on each side of a fan centre, per axis.
    pub n: [u32; 3],
    /// Anchor clustering tolerance as a wavelength fraction, per axis.
    pub res_fraction: [f64; 3],
    pub pml_n: u32,
    pub grading_ratio: f64,
}

impl MeshParams {
    pub fn new(max_cell_model: f64, max_cell_space: f64, min_cell_global: f64) -> Self {
        Self {
            max_cell_model,
            max_cell_space,
            min_cell_global,
            n: [3; 3],
            res_fraction: [6.0; 3],
            pml_n: 8,
            grading_ratio: 2.0,
        }
    }

    pub fn model_cell(&self, lambda_min: f64) -> f64 {
        lambda_min / self.max_cell_model
    }

    pub fn space_cell(&self, lambda_min: f64) -> f64 {
        lambda_min / self.max_cell_space
    }

    pub fn eps_merge(&self, lambda_min: f64) -> f64 {
        lambda_min / self.min_cell_global
    }

    /// Rejects unusable parameters and reports questionable ones.
    pub fn validate(&self) -> Result<Vec<MeshWarning>, MeshError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(MeshError::InvalidParameter(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        positive("max_cell_model", self.max_cell_model)?;
        positive("max_cell_space", self.max_cell_space)?;
        positive("min_cell_global", self.min_cell_global)?;
        for v in self.res_fraction {
            positive("res_fraction", v)?;
        }
        if !(self.grading_ratio > 1.0 && self.grading_ratio.is_finite()) {
            return Err(MeshError::InvalidParameter(format!(
                "grading_ratio must be greater than 1, got {}",
                self.grading_ratio
            )));
        }
        if !PML_CELLS.contains(&self.pml_n) {
            return Err(MeshError::PmlCellsOutOfRange(self.pml_n));
        }
        let coarsest = self.max_cell_model.max(self.max_cell_space);
        if self.min_cell_global < coarsest {
            return Err(MeshError::InvalidParameter(format!(
                "min_cell_global ({}) must not be below max_cell_model or max_cell_space ({coarsest})",
                self.min_cell_global
            )));
        }

        let mut warnings = Vec::new();
        if self.max_cell_model <= self.max_cell_space {
            warnings.push(MeshWarning::ModelNotFinerThanSpace {
                max_cell_model: self.max_cell_model,
                max_cell_space: self.max_cell_space,
            });
        }
        if self.min_cell_global < 2.0 * coarsest {
            warnings.push(MeshWarning::FloorAboveHalfCell {
                min_cell_global: self.min_cell_global,
                max_cell: coarsest,
            });
        }
        Ok(warnings)
    }
}

/// Mesh lines along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisMesh {
    /// Strictly increasing line coordinates (m).
    pub lines: Vec<f64>,
    /// Extent of the scene on this axis (m).
    pub model_interval: (f64, f64),
}

impl AxisMesh {
    pub fn cell_count(&self) -> usize {
        self.lines.len().saturating_sub(1)
    }

    pub fn cells(&self) -> impl Iterator<Item = f64> + '_ {
        self.lines.windows(2).map(|w| w[1] - w[0])
    }

    pub fn min_cell(&self) -> f64 {
        self.cells().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub x: AxisMesh,
    pub y: AxisMesh,
    pub z: AxisMesh,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_mid_quarter: f64,
    /// CFL timestep bound (s).
    pub dt_max: f64,
    pub c: f64,
    pub warnings: Vec<MeshWarning>,
}

impl Grid {
    pub fn axis(&self, axis: Axis) -> &AxisMesh {
        match axis {
            Axis::X => &self.x,
            Axis::Y => &self.y,
            Axis::Z => &self.z,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellCounts {
    pub nx: u64,
    pub ny: u64,
    pub nz: u64,
    pub total: u64,
}

impl CellCounts {
    pub fn new(nx: u64, ny: u64, nz: u64) -> Self {
        Self {
            nx,
            ny,
            nz,
            total: nx * ny * nz,
        }
    }
}

/// Shortest and longest excitation wavelengths.
pub fn wavelengths(exc: &ExcitationSpec) -> Result<(f64, f64), MeshError> {
    if !(exc.f_min > 0.0) {
        return Err(MeshError::DcExcitation(exc.f_min));
    }
    if !(exc.f_max >= exc.f_min && exc.f_max.is_finite()) {
        return Err(MeshError::InvalidBand {
            f_min: exc.f_min,
            f_max: exc.f_max,
        });
    }
    if !(exc.c > 0.0 && exc.c.is_finite()) {
        return Err(MeshError::InvalidParameter(format!(
            "propagation speed must be positive, got {}",
            exc.c
        )));
    }
    Ok((exc.c / exc.f_max, exc.c / exc.f_min))
}

/// Quarter of the midband wavelength, `lmin * lmax / (2 (lmin + lmax))`.
pub fn boundary_gap(lambda_min: f64, lambda_max: f64) -> f64 {
    lambda_min * lambda_max / (2.0 * (lambda_min + lambda_max))
}

/// Largest stable FDTD timestep for the given minimum cell edges.
pub fn cfl_timestep(dx_min: f64, dy_min: f64, dz_min: f64, c: f64) -> Result<f64, MeshError> {
    if ![dx_min, dy_min, dz_min].iter().all(|&d| d > 0.0 && !d.is_nan()) {
        return Err(MeshError::NonPositiveEdge);
    }
    let inv = 1.0 / (dx_min * dx_min) + 1.0 / (dy_min * dy_min) + 1.0 / (dz_min * dz_min);
    Ok(1.0 / (c * inv.sqrt()))
}

pub fn cell_counts(grid: &Grid) -> CellCounts {
    CellCounts::new(
        grid.x.cell_count() as u64,
        grid.y.cell_count() as u64,
        grid.z.cell_count() as u64,
    )
}

/// Generates the grid for a scene. Axes are built in parallel; the result
/// does not depend on scheduling.
pub fn generate(
    scene_root: &SceneNode,
    exc: &ExcitationSpec,
    params: &MeshParams,
) -> Result<Grid, MeshError> {
    let warnings = params.validate()?;
    let (lambda_min, lambda_max) = wavelengths(exc)?;
    let shapes = dfs_shapes(scene_root);
    let bbox = scene_bbox(shapes.iter().copied())?;
    let gap = boundary_gap(lambda_min, lambda_max);

    let build = |axis: Axis| -> Result<AxisMesh, MeshError> {
        let anchors = axis_vertex_coords(shapes.iter().copied(), axis);
        let model_interval = bbox.interval(axis);
        build_axis(&anchors, model_interval, axis, lambda_min, gap, params)
    };
    let mut axes = Axis::ALL
        .par_iter()
        .map(|&a| build(a))
        .collect::<Result<Vec<_>, _>>()?;
    let z = axes.pop().expect("three axes");
    let y = axes.pop().expect("three axes");
    let x = axes.pop().expect("three axes");

    let dt_max = cfl_timestep(x.min_cell(), y.min_cell(), z.min_cell(), exc.c)?;
    Ok(Grid {
        x,
        y,
        z,
        lambda_min,
        lambda_max,
        lambda_mid_quarter: gap,
        dt_max,
        c: exc.c,
        warnings,
    })
}

/// Runs the per-axis pipeline on pre-computed anchors.
pub fn build_axis(
    anchors: &[f64],
    model_interval: (f64, f64),
    axis: Axis,
    lambda_min: f64,
    gap: f64,
    params: &MeshParams,
) -> Result<AxisMesh, MeshError> {
    let eps = params.eps_merge(lambda_min);
    let tolerance = lambda_min / params.res_fraction[axis.index()];
    let centers = cluster_anchors(anchors, tolerance, eps);

    let mut lines = refine_axis(&centers, params, axis, lambda_min);
    lines.extend_from_slice(anchors);
    lines.sort_by(f64::total_cmp);
    lines.dedup();

    let lines = merge_lines(&lines, anchors, eps);
    let lines = fill_gaps(&lines, model_interval, lambda_min, params);
    let lines = add_boundary_and_pml(
        &lines,
        model_interval,
        gap,
        params.pml_n,
        params.space_cell(lambda_min),
    )?;
    Ok(AxisMesh {
        lines,
        model_interval,
    })
}
