//! Exact Euclidean distance transform.
//!
//! Separable lower-envelope algorithm (Meijster / Maurer family): one linear
//! pass per axis over squared integer distances, so the result is exact.

use super::{DistanceField, VoxelGrid};

/// Squared distance standing in for "no occupied voxel on this line".
const FAR: i64 = 1 << 50;

/// Squared distances in voxel units; `None` where no voxel is occupied.
pub fn squared_edt(grid: &VoxelGrid) -> Vec<Option<u64>> {
    let dims = grid.geometry.dims;
    let mut f: Vec<i64> = grid
        .occupancy
        .iter()
        .map(|&o| if o { 0 } else { FAR })
        .collect();
    let longest = *dims.iter().max().unwrap_or(&0);
    let mut line = vec![0i64; longest];
    let mut out = vec![0i64; longest];
    let mut scratch = Envelope::with_capacity(longest);

    for axis in 0..3 {
        let n = dims[axis];
        let stride = match axis {
            0 => 1,
            1 => dims[0],
            _ => dims[0] * dims[1],
        };
        let (a, b) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for u in 0..dims[b] {
            for v in 0..dims[a] {
                let mut ijk = [0usize; 3];
                ijk[a] = v;
                ijk[b] = u;
                let base = grid.geometry.index(ijk);
                for k in 0..n {
                    line[k] = f[base + k * stride];
                }
                scratch.transform(&line[..n], &mut out[..n]);
                for k in 0..n {
                    f[base + k * stride] = out[k];
                }
            }
        }
    }
    f.into_iter()
        .map(|d| if d >= FAR { None } else { Some(d as u64) })
        .collect()
}

/// Distance field of the grid in meters.
pub fn edt(grid: &VoxelGrid) -> DistanceField {
    let res = grid.geometry.resolution;
    let distance = squared_edt(grid)
        .into_iter()
        .map(|d| match d {
            Some(d2) => (d2 as f64).sqrt() * res,
            None => f64::INFINITY,
        })
        .collect();
    DistanceField {
        geometry: grid.geometry,
        distance,
    }
}

struct Envelope {
    site: Vec<usize>,
    start: Vec<i64>,
}

impl Envelope {
    fn with_capacity(n: usize) -> Self {
        Self {
            site: vec![0; n],
            start: vec![0; n],
        }
    }

    /// `out[x] = min_i (x - i)^2 + f[i]`.
    fn transform(&mut self, f: &[i64], out: &mut [i64]) {
        let n = f.len();
        if n == 0 {
            return;
        }
        let eval = |x: i64, i: usize| (x - i as i64).pow(2) + f[i];
        // First abscissa from which parabola `u` beats parabola `i` (i < u).
        let sep = |i: usize, u: usize| {
            let (i64_, u64_) = (i as i64, u as i64);
            (u64_ * u64_ - i64_ * i64_ + f[u] - f[i]).div_euclid(2 * (u64_ - i64_))
        };
        let mut q: isize = 0;
        self.site[0] = 0;
        self.start[0] = 0;
        for u in 1..n {
            while q >= 0 {
                let qi = q as usize;
                if eval(self.start[qi], self.site[qi]) > eval(self.start[qi], u) {
                    q -= 1;
                } else {
                    break;
                }
            }
            if q < 0 {
                q = 0;
                self.site[0] = u;
            } else {
                let w = 1 + sep(self.site[q as usize], u);
                if w < n as i64 {
                    q += 1;
                    self.site[q as usize] = u;
                    self.start[q as usize] = w;
                }
            }
        }
        for x in (0..n).rev() {
            let qi = q as usize;
            out[x] = eval(x as i64, self.site[qi]).min(FAR);
            if x as i64 == self.start[qi] {
                q -= 1;
            }
        }
    }
}
