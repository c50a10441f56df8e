//! Static obstacle world: box obstacles, voxel occupancy, exact distance field.

mod edt;

use serde::{Deserialize, Serialize};

pub use edt::{edt, squared_edt};

use crate::error::WorldError;
use crate::steer::FlatState;

/// Axis-aligned box given by its minimum corner and extents.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub origin: [f64; 3],
    pub size: [f64; 3],
}

impl Aabb {
    pub fn new(origin: [f64; 3], size: [f64; 3]) -> Result<Self, WorldError> {
        if size.iter().all(|&s| s > 0.0 && s.is_finite()) {
            Ok(Self { origin, size })
        } else {
            Err(WorldError::InvalidObstacle(size))
        }
    }

    pub fn max_corner(&self) -> [f64; 3] {
        std::array::from_fn(|i| self.origin[i] + self.size[i])
    }

    pub fn contains(&self, p: &[f64; 3]) -> bool {
        let hi = self.max_corner();
        (0..3).all(|i| p[i] >= self.origin[i] && p[i] <= hi[i])
    }

    /// Euclidean distance from `p` to the closed box (0 inside).
    pub fn distance(&self, p: &[f64; 3]) -> f64 {
        let hi = self.max_corner();
        (0..3)
            .map(|i| {
                let d = (self.origin[i] - p[i]).max(p[i] - hi[i]).max(0.0);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Ambient box of the payload workspace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Workspace {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl Default for Workspace {
    fn default() -> Self {
        Self {
            lo: [0.0; 3],
            hi: [3.0, 1.2, 1.0],
        }
    }
}

impl Workspace {
    pub fn validate(&self) -> Result<(), WorldError> {
        if (0..3).all(|i| self.lo[i] < self.hi[i]) {
            Ok(())
        } else {
            Err(WorldError::DegenerateWorkspace(
                "lo must be below hi on every axis",
            ))
        }
    }

    pub fn contains(&self, p: &[f64; 3]) -> bool {
        (0..3).all(|i| p[i] >= self.lo[i] && p[i] <= self.hi[i])
    }
}

/// Regular voxel lattice anchored at the workspace minimum corner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridGeometry {
    pub lo: [f64; 3],
    pub resolution: f64,
    pub dims: [usize; 3],
}

impl GridGeometry {
    pub fn new(ws: &Workspace, resolution: f64) -> Result<Self, WorldError> {
        ws.validate()?;
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(WorldError::DegenerateWorkspace(
                "resolution must be positive",
            ));
        }
        let dims = std::array::from_fn(|i| {
            let cells = (ws.hi[i] - ws.lo[i]) / resolution;
            ((cells - 1e-9).ceil() as usize).max(1)
        });
        Ok(Self {
            lo: ws.lo,
            resolution,
            dims,
        })
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Upper corner of the covered region (may exceed the workspace by < 1 voxel).
    pub fn hi(&self) -> [f64; 3] {
        std::array::from_fn(|i| self.lo[i] + self.dims[i] as f64 * self.resolution)
    }

    /// Linear index; x varies fastest.
    pub fn index(&self, ijk: [usize; 3]) -> usize {
        ijk[0] + self.dims[0] * (ijk[1] + self.dims[1] * ijk[2])
    }

    pub fn center(&self, ijk: [usize; 3]) -> [f64; 3] {
        std::array::from_fn(|i| self.lo[i] + (ijk[i] as f64 + 0.5) * self.resolution)
    }

    /// Voxel containing `p`, or `None` outside the grid.
    pub fn voxel_of(&self, p: &[f64; 3]) -> Option<[usize; 3]> {
        let mut ijk = [0; 3];
        for i in 0..3 {
            let f = (p[i] - self.lo[i]) / self.resolution;
            if !(f >= 0.0) || f > self.dims[i] as f64 {
                return None;
            }
            ijk[i] = (f.floor() as usize).min(self.dims[i] - 1);
        }
        Some(ijk)
    }
}

/// Boolean occupancy per voxel.
#[derive(Clone, Debug, PartialEq)]
pub struct VoxelGrid {
    pub geometry: GridGeometry,
    pub occupancy: Vec<bool>,
}

impl VoxelGrid {
    pub fn empty(geometry: GridGeometry) -> Self {
        Self {
            occupancy: vec![false; geometry.len()],
            geometry,
        }
    }

    pub fn is_occupied(&self, ijk: [usize; 3]) -> bool {
        self.occupancy[self.geometry.index(ijk)]
    }

    pub fn set(&mut self, ijk: [usize; 3], value: bool) {
        let i = self.geometry.index(ijk);
        self.occupancy[i] = value;
    }

    pub fn occupied_count(&self) -> usize {
        self.occupancy.iter().filter(|&&o| o).count()
    }
}

/// Mark every voxel whose cell overlaps an obstacle with positive volume.
///
/// Every obstacle point therefore lies in a closed occupied cell; for boxes
/// whose faces sit on voxel faces this equals the center-inside rule.
pub fn rasterize(
    obstacles: &[Aabb],
    ws: &Workspace,
    resolution: f64,
) -> Result<VoxelGrid, WorldError> {
    let geometry = GridGeometry::new(ws, resolution)?;
    let mut grid = VoxelGrid::empty(geometry);
    let res = geometry.resolution;
    // Tolerance for faces that coincide with voxel faces up to rounding.
    let eps = 1e-9;
    for ob in obstacles {
        let hi = ob.max_corner();
        let mut range = [(0usize, 0usize); 3];
        let mut empty = false;
        for i in 0..3 {
            let a = (ob.origin[i] - geometry.lo[i]) / res;
            let b = (hi[i] - geometry.lo[i]) / res;
            let first = (a + eps).floor().max(0.0);
            let last = ((b - eps).ceil()).min(geometry.dims[i] as f64);
            if last <= first {
                empty = true;
                break;
            }
            range[i] = (first as usize, last as usize);
        }
        if empty {
            continue;
        }
        for k in range[2].0..range[2].1 {
            for j in range[1].0..range[1].1 {
                for i in range[0].0..range[0].1 {
                    grid.set([i, j, k], true);
                }
            }
        }
    }
    Ok(grid)
}

/// Exact Euclidean distance from each voxel center to the nearest occupied
/// voxel center; `f64::INFINITY` when the grid has no occupied voxel.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceField {
    pub geometry: GridGeometry,
    pub distance: Vec<f64>,
}

impl DistanceField {
    pub fn at(&self, ijk: [usize; 3]) -> f64 {
        self.distance[self.geometry.index(ijk)]
    }

    /// Conservative clearance at an arbitrary point.
    ///
    /// Nearest-voxel distance minus one voxel diagonal: half a diagonal
    /// accounts for the query offset from its voxel center, the other half
    /// for obstacle surface points lying off the occupied centers.
    pub fn clearance(&self, p: &[f64; 3]) -> Result<f64, WorldError> {
        let ijk = self
            .geometry
            .voxel_of(p)
            .ok_or(WorldError::OutOfWorkspace(*p))?;
        let d = self.at(ijk);
        Ok((d - self.geometry.resolution * 3f64.sqrt()).max(0.0))
    }
}

/// Free-function form of [`DistanceField::clearance`].
pub fn clearance(field: &DistanceField, p: &[f64; 3]) -> Result<f64, WorldError> {
    field.clearance(p)
}

/// Collision check of a sampled payload path against the inflated obstacles.
///
/// Every sample must keep `clearance >= radius + margin`. Between consecutive
/// samples the chord is accepted when it stays inside the free ball of the
/// first endpoint; otherwise it is bisected until it does or its length
/// drops below the voxel resolution.
pub fn edge_collision_free(
    field: &DistanceField,
    samples: &[(f64, FlatState)],
    payload_radius: f64,
    margin: f64,
) -> bool {
    let positions: Vec<[f64; 3]> = samples.iter().map(|(_, x)| x.position()).collect();
    path_collision_free(field, &positions, payload_radius + margin)
}

/// [`edge_collision_free`] on bare positions with a combined standoff.
pub fn path_collision_free(field: &DistanceField, positions: &[[f64; 3]], standoff: f64) -> bool {
    let mut prev: Option<([f64; 3], f64)> = None;
    for p in positions {
        let c = match field.clearance(p) {
            Ok(c) if c >= standoff => c,
            _ => return false,
        };
        if let Some((q, cq)) = prev {
            if !segment_free(field, q, cq, *p, c, standoff, 0) {
                return false;
            }
        }
        prev = Some((*p, c));
    }
    true
}

fn segment_free(
    field: &DistanceField,
    a: [f64; 3],
    ca: f64,
    b: [f64; 3],
    cb: f64,
    standoff: f64,
    depth: u32,
) -> bool {
    let len = dist(&a, &b);
    if len <= ca.max(cb) - standoff || len < field.geometry.resolution || depth > 40 {
        return true;
    }
    let mid = std::array::from_fn(|i| 0.5 * (a[i] + b[i]));
    let cm = match field.clearance(&mid) {
        Ok(c) if c >= standoff => c,
        _ => return false,
    };
    segment_free(field, a, ca, mid, cm, standoff, depth + 1)
        && segment_free(field, mid, cm, b, cb, standoff, depth + 1)
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario_one() -> Vec<Aabb> {
        vec![
            Aabb::new([1.5, 0.1, 0.0], [0.35, 0.75, 0.75]).unwrap(),
            Aabb::new([0.75, 0.5, 0.0], [0.35, 0.75, 0.75]).unwrap(),
        ]
    }

    #[test]
    fn grid_dimensions() {
        let g = GridGeometry::new(&Workspace::default(), 0.01).unwrap();
        assert_eq!(g.dims, [300, 120, 100]);
        assert!(GridGeometry::new(&Workspace::default(), 0.0).is_err());
        let bad = Workspace {
            lo: [0.0; 3],
            hi: [1.0, 0.0, 1.0],
        };
        assert!(matches!(
            rasterize(&[], &bad, 0.1),
            Err(WorldError::DegenerateWorkspace(_))
        ));
    }

    #[test]
    fn empty_and_full() {
        let ws = Workspace::default();
        assert_eq!(rasterize(&[], &ws, 0.05).unwrap().occupied_count(), 0);
        let all = Aabb::new([-1.0; 3], [10.0; 3]).unwrap();
        let grid = rasterize(&[all], &ws, 0.05).unwrap();
        assert_eq!(grid.occupied_count(), grid.geometry.len());
    }

    #[test]
    fn scenario_one_volume() {
        let ws = Workspace::default();
        let grid = rasterize(&scenario_one(), &ws, 0.01).unwrap();
        // Second box is clipped at y = 1.2: 0.35 x 0.70 x 0.75.
        let expected = (35 * 75 * 75) + (35 * 70 * 75);
        assert_eq!(grid.occupied_count(), expected);
    }

    #[test]
    fn clearance_at_occupied_center_is_zero() {
        let ws = Workspace::default();
        let grid = rasterize(&scenario_one(), &ws, 0.02).unwrap();
        let field = edt(&grid);
        let c = field.clearance(&[1.505, 0.305, 0.305]).unwrap();
        assert_eq!(c, 0.0);
        assert!(matches!(
            field.clearance(&[-0.1, 0.0, 0.0]),
            Err(WorldError::OutOfWorkspace(_))
        ));
        let far = field.clearance(&[2.9, 0.05, 0.95]).unwrap();
        let near = field.clearance(&[1.45, 0.3, 0.3]).unwrap();
        assert!(far > near);
    }

    #[test]
    fn straight_edge_through_box_collides() {
        let ws = Workspace::default();
        let field = edt(&rasterize(&scenario_one(), &ws, 0.01).unwrap());
        let samples: Vec<(f64, FlatState)> = (0..=10)
            .map(|k| {
                let x = 1.2 + 0.1 * k as f64;
                (k as f64, FlatState::at_rest([x, 0.4, 0.3]))
            })
            .collect();
        assert!(!edge_collision_free(&field, &samples, 0.05, 0.02));
        // Sparse samples straddling the box are caught by bisection.
        let sparse = vec![samples[0], samples[10]];
        assert!(!edge_collision_free(&field, &sparse, 0.05, 0.02));
    }

    #[test]
    fn empty_world_never_collides() {
        let field = edt(&rasterize(&[], &Workspace::default(), 0.05).unwrap());
        let samples = vec![
            (0.0, FlatState::at_rest([0.1, 0.1, 0.1])),
            (1.0, FlatState::at_rest([2.9, 1.1, 0.9])),
        ];
        assert!(edge_collision_free(&field, &samples, 0.05, 0.02));
    }

    #[test]
    fn grazing_edge_at_exact_standoff_is_free() {
        let ws = Workspace {
            lo: [0.0; 3],
            hi: [1.0; 3],
        };
        let ob = Aabb::new([0.0, 0.0, 0.0], [0.1, 1.0, 1.0]).unwrap();
        let field = edt(&rasterize(&[ob], &ws, 0.1).unwrap());
        let p = [0.45, 0.55, 0.55];
        let c = field.clearance(&p).unwrap();
        let samples = vec![
            (0.0, FlatState::at_rest(p)),
            (1.0, FlatState::at_rest([0.45, 0.65, 0.55])),
        ];
        assert!(edge_collision_free(&field, &samples, c, 0.0));
        assert!(!edge_collision_free(&field, &samples, c + 1e-9, 0.0));
    }
}
