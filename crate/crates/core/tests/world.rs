use flatplan::error::WorldError;
use flatplan::world::{
    edt, path_collision_free, rasterize, squared_edt, Aabb, GridGeometry, VoxelGrid, Workspace,
};
use proptest::prelude::*;

fn cube_ws(side: f64) -> Workspace {
    Workspace {
        lo: [0.0; 3],
        hi: [side; 3],
    }
}

fn brute_force(grid: &VoxelGrid) -> Vec<Option<u64>> {
    let d = grid.geometry.dims;
    let coords = |i: usize| {
        [
            (i % d[0]) as i64,
            ((i / d[0]) % d[1]) as i64,
            (i / (d[0] * d[1])) as i64,
        ]
    };
    let occupied: Vec<[i64; 3]> = (0..grid.occupancy.len())
        .filter(|&i| grid.occupancy[i])
        .map(coords)
        .collect();
    (0..grid.occupancy.len())
        .map(|i| {
            let c = coords(i);
            occupied
                .iter()
                .map(|o| (0..3).map(|k| ((o[k] - c[k]) * (o[k] - c[k])) as u64).sum())
                .min()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn edt_equals_brute_force(
        dims in prop::array::uniform3(1usize..9),
        bits in prop::collection::vec(prop::bool::weighted(0.1), 512),
    ) {
        let ws = Workspace { lo: [0.0; 3], hi: dims.map(|n| n as f64 * 0.1) };
        let mut grid = VoxelGrid::empty(GridGeometry::new(&ws, 0.1).unwrap());
        prop_assert_eq!(grid.geometry.dims, dims);
        for (o, b) in grid.occupancy.iter_mut().zip(&bits) {
            *o = *b;
        }
        prop_assert_eq!(squared_edt(&grid), brute_force(&grid));
    }

    #[test]
    fn clearance_never_overestimates(
        p in prop::array::uniform3(0.0..1.0f64),
        origin in prop::array::uniform3(0.1..0.6f64),
        size in prop::array::uniform3(0.02..0.3f64),
    ) {
        let ws = cube_ws(1.0);
        let obstacle = Aabb::new(origin, size).unwrap();
        let field = edt(&rasterize(&[obstacle], &ws, 0.025).unwrap());
        let c = field.clearance(&p).unwrap();
        prop_assert!(c <= obstacle.distance(&p) + 1e-12, "clearance {} > true {}", c, obstacle.distance(&p));
    }
}

#[test]
fn field_distances_are_scaled_roots() {
    let ws = cube_ws(1.0);
    let mut grid = VoxelGrid::empty(GridGeometry::new(&ws, 0.1).unwrap());
    grid.set([2, 3, 4], true);
    let field = edt(&grid);
    assert_eq!(field.at([2, 3, 4]), 0.0);
    assert_eq!(field.at([5, 7, 4]), 25.0f64.sqrt() * 0.1);
    assert_eq!(field.at([3, 4, 5]), 3.0f64.sqrt() * 0.1);
    assert_eq!(field.at([2, 3, 9]), 25.0f64.sqrt() * 0.1);
}

#[test]
fn empty_grid_is_infinitely_far() {
    let grid = VoxelGrid::empty(GridGeometry::new(&cube_ws(0.5), 0.1).unwrap());
    assert!(squared_edt(&grid).iter().all(Option::is_none));
    let field = edt(&grid);
    assert!(field.distance.iter().all(|d| d.is_infinite()));
    assert!(field.clearance(&[0.25, 0.25, 0.25]).unwrap().is_infinite());
}

#[test]
fn aligned_box_occupies_exactly_its_cells() {
    let ws = cube_ws(1.0);
    let b = Aabb::new([0.2, 0.3, 0.0], [0.2, 0.1, 0.5]).unwrap();
    let grid = rasterize(&[b], &ws, 0.1).unwrap();
    assert_eq!(grid.occupied_count(), 2 * 1 * 5);
    assert!(grid.is_occupied([2, 3, 0]) && grid.is_occupied([3, 3, 4]));
    assert!(!grid.is_occupied([4, 3, 0]) && !grid.is_occupied([2, 4, 0]));
}

#[test]
fn unaligned_box_marks_every_overlapped_cell() {
    let ws = cube_ws(1.0);
    let b = Aabb::new([0.15, 0.15, 0.15], [0.1, 0.01, 0.01]).unwrap();
    let grid = rasterize(&[b], &ws, 0.1).unwrap();
    assert_eq!(grid.occupied_count(), 2);
    assert!(grid.is_occupied([1, 1, 1]) && grid.is_occupied([2, 1, 1]));
}

#[test]
fn obstacles_outside_the_workspace_are_clipped() {
    let ws = cube_ws(1.0);
    let b = Aabb::new([0.9, 0.9, 0.9], [1.0, 1.0, 1.0]).unwrap();
    let grid = rasterize(&[b], &ws, 0.1).unwrap();
    assert_eq!(grid.occupied_count(), 1);
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(matches!(
        Aabb::new([0.0; 3], [0.1, 0.0, 0.1]),
        Err(WorldError::InvalidObstacle(_))
    ));
    let flat = Workspace {
        lo: [0.0; 3],
        hi: [1.0, 1.0, 0.0],
    };
    assert!(GridGeometry::new(&flat, 0.1).is_err());
    assert!(GridGeometry::new(&cube_ws(1.0), 0.0).is_err());
    let field = edt(&VoxelGrid::empty(
        GridGeometry::new(&cube_ws(1.0), 0.1).unwrap(),
    ));
    assert!(matches!(
        field.clearance(&[1.5, 0.5, 0.5]),
        Err(WorldError::OutOfWorkspace(_))
    ));
}

#[test]
fn paths_through_walls_collide() {
    let ws = Workspace {
        lo: [0.0; 3],
        hi: [2.0, 1.0, 1.0],
    };
    let wall = Aabb::new([0.95, 0.0, 0.0], [0.1, 1.0, 1.0]).unwrap();
    let field = edt(&rasterize(&[wall], &ws, 0.02).unwrap());
    // Endpoints far from the wall, no samples near it: the chord check
    // must still find the crossing.
    assert!(!path_collision_free(
        &field,
        &[[0.3, 0.5, 0.5], [1.7, 0.5, 0.5]],
        0.05
    ));
    assert!(path_collision_free(
        &field,
        &[[0.3, 0.2, 0.5], [0.3, 0.8, 0.5]],
        0.05
    ));
    assert!(!path_collision_free(&field, &[[0.85, 0.2, 0.5]], 0.1));
}
