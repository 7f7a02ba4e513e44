//! Voronoi coverage on the shared grid: partition, cell moments, the
//! centroid-seeking controller and the locational cost.
//!
//! All integrals use midpoint quadrature on [`Grid`] cell centers.

use rayon::prelude::*;
use thiserror::Error;

use crate::density::WeightField;
use crate::field::{Grid, Point2};

#[derive(Debug, Error, PartialEq)]
pub enum CoverageError {
    #[error("at least one defender is required")]
    NoDefenders,
    #[error("defender {0} has a non-finite position")]
    NonFinite(usize),
    #[error("cell of defender {0} carries no weight")]
    DegenerateCell(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefenderState {
    /// 1-based jersey slot.
    pub id: usize,
    pub position: Point2,
}

/// Velocity command for a single-integrator defender.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlInput(pub Point2);

impl ControlInput {
    pub fn norm(self) -> f64 {
        self.0.norm()
    }
}

/// Owner of every grid cell, as an index into the defender slice.
#[derive(Debug, Clone, PartialEq)]
pub struct VoronoiPartition {
    pub grid: Grid,
    pub owner: Vec<usize>,
    pub defenders: usize,
}

fn nearest(q: Point2, positions: &[Point2]) -> usize {
    let mut best = 0;
    let mut best_d = q.distance_sq(positions[0]);
    for (i, p) in positions.iter().enumerate().skip(1) {
        let d = q.distance_sq(*p);
        // strict comparison keeps the lowest index on ties
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

pub fn assign_voronoi(
    defenders: &[DefenderState],
    grid: &Grid,
) -> Result<VoronoiPartition, CoverageError> {
    if defenders.is_empty() {
        return Err(CoverageError::NoDefenders);
    }
    if let Some(k) = defenders.iter().position(|d| !d.position.is_finite()) {
        return Err(CoverageError::NonFinite(k));
    }
    let positions: Vec<Point2> = defenders.iter().map(|d| d.position).collect();
    let owner = (0..grid.len())
        .into_par_iter()
        .map(|k| nearest(grid.center(k), &positions))
        .collect();
    Ok(VoronoiPartition {
        grid: grid.clone(),
        owner,
        defenders: defenders.len(),
    })
}

/// Mass and first moment of one Voronoi cell.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellMoments {
    pub mass: f64,
    pub moment: Point2,
}

impl CellMoments {
    pub fn centroid(&self) -> Option<Point2> {
        (self.mass > 0.0).then(|| Point2::new(self.moment.x / self.mass, self.moment.y / self.mass))
    }
}

/// Moments of every cell in one sequential pass (fixed summation order).
pub fn cell_moments(partition: &VoronoiPartition, field: &WeightField) -> Vec<CellMoments> {
    let grid = &partition.grid;
    let area = grid.cell_area();
    let mut out = vec![CellMoments::default(); partition.defenders];
    for (k, (&owner, &phi)) in partition.owner.iter().zip(&field.values).enumerate() {
        if phi == 0.0 {
            continue;
        }
        let w = phi * area;
        let m = &mut out[owner];
        m.mass += w;
        m.moment += grid.center(k) * w;
    }
    out
}

pub fn cell_mass(partition: &VoronoiPartition, field: &WeightField, i: usize) -> f64 {
    cell_moments(partition, field)[i].mass
}

pub fn cell_centroid(
    partition: &VoronoiPartition,
    field: &WeightField,
    i: usize,
) -> Result<Point2, CoverageError> {
    cell_moments(partition, field)[i]
        .centroid()
        .ok_or(CoverageError::DegenerateCell(i))
}

/// Centroid of each cell, falling back to the defender's own position when
/// the cell is weightless.
pub fn centroids_or_self(
    defenders: &[DefenderState],
    partition: &VoronoiPartition,
    field: &WeightField,
) -> Vec<Point2> {
    cell_moments(partition, field)
        .iter()
        .zip(defenders)
        .map(|(m, d)| m.centroid().unwrap_or(d.position))
        .collect()
}

pub fn nominal_input(defender: &DefenderState, centroid: Point2, k: f64) -> ControlInput {
    ControlInput((defender.position - centroid) * -k)
}

/// Locational cost with the partition held fixed.
pub fn coverage_cost_for_partition(
    positions: &[Point2],
    partition: &VoronoiPartition,
    field: &WeightField,
) -> f64 {
    let grid = &partition.grid;
    let area = grid.cell_area();
    let mut per_cell = vec![0.0; positions.len()];
    for (k, (&owner, &phi)) in partition.owner.iter().zip(&field.values).enumerate() {
        if phi != 0.0 {
            per_cell[owner] += grid.center(k).distance_sq(positions[owner]) * phi * area;
        }
    }
    per_cell.iter().sum()
}

pub fn coverage_cost(
    defenders: &[DefenderState],
    field: &WeightField,
    grid: &Grid,
) -> Result<f64, CoverageError> {
    let partition = assign_voronoi(defenders, grid)?;
    let positions: Vec<Point2> = defenders.iter().map(|d| d.position).collect();
    Ok(coverage_cost_for_partition(&positions, &partition, field))
}
