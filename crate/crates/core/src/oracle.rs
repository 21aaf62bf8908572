//! Brute-force Euler characteristics of binary masks.
//!
//! Cells are counted straight from the mask: a vertex per set pixel, an edge
//! per axis-adjacent set pair, a square per unit square with four set
//! corners and a cube per unit cube with eight. Nothing here is shared with
//! the coefficient path.

use crate::grid::{Dims, EulerCurve, HardCurve, ScalarGrid, ThresholdSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    dims: Dims,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(dims: &Dims, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), dims.len(), "mask shape mismatch");
        BinaryMask {
            dims: dims.clone(),
            bits,
        }
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_set(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CellCounts {
    pub vertices: u64,
    pub edges: u64,
    pub faces: u64,
    pub cubes: u64,
}

impl CellCounts {
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices as i64 - self.edges as i64 + self.faces as i64 - self.cubes as i64
    }
}

pub fn sublevel_mask(grid: &ScalarGrid, tau: f64) -> BinaryMask {
    BinaryMask::new(grid.dims(), grid.values().iter().map(|&v| v <= tau).collect())
}

pub fn count_cells(mask: &BinaryMask) -> CellCounts {
    match *mask.dims.as_slice() {
        [rows, cols] => count_cells_2d(&mask.bits, rows, cols),
        [d0, d1, d2] => count_cells_3d(&mask.bits, d0, d1, d2),
        _ => unreachable!("Dims only admits 2 or 3 axes"),
    }
}

fn count_cells_2d(bits: &[bool], rows: usize, cols: usize) -> CellCounts {
    let at = |r: usize, c: usize| bits[r * cols + c];
    let mut n = CellCounts::default();
    for r in 0..rows {
        for c in 0..cols {
            if !at(r, c) {
                continue;
            }
            n.vertices += 1;
            let down = r + 1 < rows && at(r + 1, c);
            let right = c + 1 < cols && at(r, c + 1);
            n.edges += u64::from(down) + u64::from(right);
            if down && right && at(r + 1, c + 1) {
                n.faces += 1;
            }
        }
    }
    n
}

fn count_cells_3d(bits: &[bool], d0: usize, d1: usize, d2: usize) -> CellCounts {
    let at = |i: usize, j: usize, k: usize| {
        i < d0 && j < d1 && k < d2 && bits[(i * d1 + j) * d2 + k]
    };
    let mut n = CellCounts::default();
    for i in 0..d0 {
        for j in 0..d1 {
            for k in 0..d2 {
                if !at(i, j, k) {
                    continue;
                }
                n.vertices += 1;
                let (x, y, z) = (at(i + 1, j, k), at(i, j + 1, k), at(i, j, k + 1));
                n.edges += u64::from(x) + u64::from(y) + u64::from(z);
                let xy = x && y && at(i + 1, j + 1, k);
                let xz = x && z && at(i + 1, j, k + 1);
                let yz = y && z && at(i, j + 1, k + 1);
                n.faces += u64::from(xy) + u64::from(xz) + u64::from(yz);
                if xy && xz && yz && at(i + 1, j + 1, k + 1) {
                    n.cubes += 1;
                }
            }
        }
    }
    n
}

/// Euler characteristic of every sublevel set, each recomputed from scratch.
pub fn oracle_ecc(grid: &ScalarGrid, taus: &ThresholdSet) -> HardCurve {
    let values = taus
        .as_slice()
        .iter()
        .map(|&tau| count_cells(&sublevel_mask(grid, tau)).euler_characteristic())
        .collect();
    EulerCurve::new(taus, values).expect("one value per threshold")
}
