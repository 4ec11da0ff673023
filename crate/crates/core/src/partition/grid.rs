//! Rectangular partitioning: rotatable tiles (`spcv_tiles`) and square or
//! rows x cols blocks dealt into folds (`spcv_block`).
//!
//! Cells are numbered row-major from the top-left cell (largest y first). Cell
//! intervals are half-open `[lo, hi)` except the last row / column, which is closed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{partition, MethodSpec, Split};
use crate::error::{Error, Result};
use crate::geom::{rotate, BBox};
use crate::plan::{BlockOutline, BlockSet, Fold, Provenance, ResamplingPlan};
use crate::rng::{deal, rng_from};
use crate::task::Task;

#[derive(Debug, Clone, PartialEq)]
pub struct TileSpec {
    /// Grid as (rows, cols).
    pub nsplit: Option<(usize, usize)>,
    /// Tile side lengths (dx, dy).
    pub dsplit: Option<(f64, f64)>,
    /// Grid rotation in degrees, in [-90, 90).
    pub rotation: f64,
    pub min_n: Option<usize>,
    pub min_frac: Option<f64>,
}

impl TileSpec {
    pub fn nsplit(rows: usize, cols: usize) -> Self {
        TileSpec {
            nsplit: Some((rows, cols)),
            dsplit: None,
            rotation: 0.0,
            min_n: None,
            min_frac: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    Random,
    Systematic,
    Checkerboard,
}

impl Selection {
    pub fn as_str(self) -> &'static str {
        match self {
            Selection::Random => "random",
            Selection::Systematic => "systematic",
            Selection::Checkerboard => "checkerboard",
        }
    }
}

impl std::str::FromStr for Selection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Selection::Random),
            "systematic" => Ok(Selection::Systematic),
            "checkerboard" => Ok(Selection::Checkerboard),
            o => Err(Error::InvalidParameter(format!("unknown selection `{o}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpec {
    /// Side length of square blocks.
    pub range: Option<f64>,
    /// Grid as (rows, cols).
    pub rows_cols: Option<(usize, usize)>,
    pub folds: usize,
    pub selection: Selection,
}

/// A rectangular grid laid over (possibly rotated) coordinates.
#[derive(Debug, Clone)]
struct Grid {
    origin: [f64; 2],
    cell: [f64; 2],
    rows: usize,
    cols: usize,
    pivot: [f64; 2],
    rotation: f64,
}

impl Grid {
    fn axis_index(v: f64, lo: f64, size: f64, count: usize) -> usize {
        if size <= 0.0 {
            return 0;
        }
        let i = ((v - lo) / size).floor();
        if i < 0.0 {
            0
        } else {
            (i as usize).min(count - 1)
        }
    }

    /// (row from top, col) of a point given in the grid frame.
    fn cell_of(&self, p: [f64; 2]) -> (usize, usize) {
        let col = Self::axis_index(p[0], self.origin[0], self.cell[0], self.cols);
        let row_from_bottom = Self::axis_index(p[1], self.origin[1], self.cell[1], self.rows);
        (self.rows - 1 - row_from_bottom, col)
    }

    fn outline(&self, row: usize, col: usize) -> [[f64; 2]; 4] {
        let rb = self.rows - 1 - row;
        let x0 = self.origin[0] + col as f64 * self.cell[0];
        let y0 = self.origin[1] + rb as f64 * self.cell[1];
        let (x1, y1) = (x0 + self.cell[0], y0 + self.cell[1]);
        [[x0, y0], [x1, y0], [x1, y1], [x0, y1]].map(|c| rotate(c, self.pivot, self.rotation))
    }
}

/// Points in the grid frame: inverse-rotated around the bounding-box center.
fn grid_frame(coords: &[[f64; 2]], rotation: f64) -> (Vec<[f64; 2]>, [f64; 2]) {
    let pivot = BBox::of(coords).center();
    let pts = if rotation == 0.0 {
        coords.to_vec()
    } else {
        coords.iter().map(|&c| rotate(c, pivot, -rotation)).collect()
    };
    (pts, pivot)
}

fn validate_tiles(spec: &TileSpec, n: usize) -> Result<()> {
    if spec.nsplit.is_some() == spec.dsplit.is_some() {
        return Err(Error::InvalidParameter("give exactly one of nsplit or dsplit".into()));
    }
    if spec.min_n.is_some() && spec.min_frac.is_some() {
        return Err(Error::InvalidParameter("give at most one of min_n or min_frac".into()));
    }
    if !(-90.0..90.0).contains(&spec.rotation) {
        return Err(Error::InvalidParameter(format!("rotation {} outside [-90, 90)", spec.rotation)));
    }
    if let Some((r, c)) = spec.nsplit {
        if r == 0 || c == 0 {
            return Err(Error::InvalidParameter("nsplit entries must be positive".into()));
        }
    }
    if let Some((dx, dy)) = spec.dsplit {
        if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
            return Err(Error::InvalidParameter("dsplit entries must be positive".into()));
        }
    }
    if let Some(m) = spec.min_n {
        if m >= n {
            return Err(Error::InvalidParameter(format!("min_n = {m} must be below n = {n}")));
        }
    }
    if let Some(f) = spec.min_frac {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::InvalidParameter(format!("min_frac = {f} outside [0, 1]")));
        }
    }
    Ok(())
}

fn count_cells(size: f64, side: f64) -> usize {
    ((size / side).ceil() as usize).max(1)
}

struct Region {
    cells: Vec<usize>,
    count: usize,
}

impl Region {
    fn rep(&self) -> usize {
        *self.cells.iter().min().expect("region has cells")
    }
}

/// Merges regions below `threshold` observations into a neighbour until none is small.
///
/// The smallest region (ties: lowest cell index) goes first. It joins the region at the
/// smallest grid distance (4-neighbours when adjacent), preferring the larger count and
/// then the lower cell index.
fn merge_small(regions: &mut Vec<Region>, threshold: f64, cols: usize) {
    let rc = |c: usize| ((c / cols) as i64, (c % cols) as i64);
    loop {
        if regions.len() < 2 {
            return;
        }
        let small = regions
            .iter()
            .enumerate()
            .filter(|(_, r)| (r.count as f64) < threshold)
            .min_by_key(|(_, r)| (r.count, r.rep()))
            .map(|(i, _)| i);
        let Some(si) = small else { return };
        let gap = |a: &Region, b: &Region| {
            a.cells
                .iter()
                .flat_map(|&x| b.cells.iter().map(move |&y| (x, y)))
                .map(|(x, y)| {
                    let (r1, c1) = rc(x);
                    let (r2, c2) = rc(y);
                    (r1 - r2).abs() + (c1 - c2).abs()
                })
                .min()
                .unwrap_or(i64::MAX)
        };
        let target = (0..regions.len())
            .filter(|&j| j != si)
            .min_by_key(|&j| {
                (
                    gap(&regions[si], &regions[j]),
                    std::cmp::Reverse(regions[j].count),
                    regions[j].rep(),
                )
            })
            .expect("at least two regions");
        let absorbed = regions.remove(si);
        let ti = if target > si { target - 1 } else { target };
        regions[ti].cells.extend(absorbed.cells);
        regions[ti].count += absorbed.count;
    }
}

/// Tiles as blocks, after dropping empty tiles and merging small ones.
pub fn tile_blocks(task: &Task, spec: &TileSpec) -> Result<BlockSet> {
    let n = task.n();
    validate_tiles(spec, n)?;
    let (pts, pivot) = grid_frame(task.coords(), spec.rotation);
    let bb = BBox::of(&pts);
    let (rows, cols, cell) = match (spec.nsplit, spec.dsplit) {
        (Some((r, c)), _) => {
            if bb.width() == 0.0 && bb.height() == 0.0 && r * c > 1 {
                return Err(Error::Partition("all points coincide; cannot split into tiles".into()));
            }
            (r, c, [bb.width() / c as f64, bb.height() / r as f64])
        }
        (None, Some((dx, dy))) => (count_cells(bb.width(), dx), count_cells(bb.height(), dy), [dx, dy]),
        (None, None) => unreachable!("validated"),
    };
    let grid = Grid {
        origin: bb.min,
        cell,
        rows,
        cols,
        pivot,
        rotation: spec.rotation,
    };

    let cell_of: Vec<usize> = pts
        .iter()
        .map(|&p| {
            let (r, c) = grid.cell_of(p);
            r * cols + c
        })
        .collect();
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in &cell_of {
        *counts.entry(c).or_default() += 1;
    }
    let mut regions: Vec<Region> = counts
        .into_iter()
        .map(|(c, count)| Region { cells: vec![c], count })
        .collect();
    let threshold = match (spec.min_n, spec.min_frac) {
        (Some(m), _) => m as f64,
        (_, Some(f)) => f * n as f64,
        _ => 0.0,
    };
    merge_small(&mut regions, threshold, cols);
    regions.sort_by_key(Region::rep);

    let mut label_of_cell = BTreeMap::new();
    let mut outlines = Vec::new();
    for (b, r) in regions.iter_mut().enumerate() {
        r.cells.sort_unstable();
        for &c in &r.cells {
            label_of_cell.insert(c, b + 1);
            outlines.push(BlockOutline {
                block: b + 1,
                corners: grid.outline(c / cols, c % cols),
            });
        }
    }
    Ok(BlockSet {
        block_of: cell_of.iter().map(|c| label_of_cell[c]).collect(),
        n_z: regions.len(),
        provenance: Provenance::Geometric,
        geometry: Some(outlines),
    })
}

pub(super) fn tiles_split(task: &Task, spec: &TileSpec) -> Result<Split> {
    let blocks = tile_blocks(task, spec)?;
    if blocks.n_z < 2 {
        return Err(Error::Partition("fewer than two nonempty tiles".into()));
    }
    let folds = blocks
        .members()
        .into_iter()
        .map(|t| Fold::from_test(task.n(), t, Vec::new()))
        .collect();
    Ok(Split {
        folds,
        blocks: Some(blocks),
        overlapping: false,
    })
}

/// Nonempty blocks of a `spcv_block` grid with their grid positions.
#[derive(Debug, Clone)]
pub struct BlockGrid {
    pub blocks: BlockSet,
    pub rows: usize,
    pub cols: usize,
    /// (row from top, col) of each block, indexed by block label - 1.
    pub position: Vec<(usize, usize)>,
}

pub fn block_grid(task: &Task, spec: &BlockSpec) -> Result<BlockGrid> {
    let coords = task.coords();
    let bb = BBox::of(coords);
    let (rows, cols, cell) = match (spec.range, spec.rows_cols) {
        (Some(r), None) => {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::InvalidParameter(format!("range must be positive, got {r}")));
            }
            (count_cells(bb.height(), r), count_cells(bb.width(), r), [r, r])
        }
        (None, Some((r, c))) => {
            if r == 0 || c == 0 {
                return Err(Error::InvalidParameter("rows and cols must be positive".into()));
            }
            (r, c, [bb.width() / c as f64, bb.height() / r as f64])
        }
        _ => return Err(Error::InvalidParameter("give exactly one of range or rows_cols".into())),
    };
    let grid = Grid {
        origin: bb.min,
        cell,
        rows,
        cols,
        pivot: bb.center(),
        rotation: 0.0,
    };
    let cells: Vec<(usize, usize)> = coords.iter().map(|&p| grid.cell_of(p)).collect();
    let blocks = BlockSet::from_keys(&cells, Provenance::Geometric);
    let mut position = vec![(0, 0); blocks.n_z];
    for (&b, &rc) in blocks.block_of.iter().zip(&cells) {
        position[b - 1] = rc;
    }
    let geometry = position
        .iter()
        .enumerate()
        .map(|(b, &(r, c))| BlockOutline {
            block: b + 1,
            corners: grid.outline(r, c),
        })
        .collect();
    Ok(BlockGrid {
        blocks: BlockSet {
            geometry: Some(geometry),
            ..blocks
        },
        rows,
        cols,
        position,
    })
}

pub(super) fn block_split(task: &Task, spec: &BlockSpec, seed: u64) -> Result<Split> {
    let k = if spec.selection == Selection::Checkerboard { 2 } else { spec.folds };
    if k < 2 {
        return Err(Error::InvalidParameter(format!("folds must be at least 2, got {k}")));
    }
    let grid = block_grid(task, spec)?;
    let n_z = grid.blocks.n_z;
    if n_z < k {
        return Err(Error::Partition(format!("{n_z} nonempty blocks are fewer than {k} folds")));
    }
    let fold_of_block: Vec<usize> = match spec.selection {
        Selection::Random => {
            let piles = deal(&(0..n_z).collect::<Vec<_>>(), k, &mut rng_from(seed));
            let mut f = vec![0; n_z];
            for (fold, pile) in piles.iter().enumerate() {
                for &b in pile {
                    f[b] = fold;
                }
            }
            f
        }
        Selection::Systematic => (0..n_z).map(|b| b % k).collect(),
        Selection::Checkerboard => grid.position.iter().map(|&(r, c)| (r + c) % 2).collect(),
    };
    let mut tests = vec![Vec::new(); k];
    for (i, &b) in grid.blocks.block_of.iter().enumerate() {
        tests[fold_of_block[b - 1]].push(i);
    }
    Ok(Split {
        folds: tests.into_iter().map(|t| Fold::from_test(task.n(), t, Vec::new())).collect(),
        blocks: Some(grid.blocks),
        overlapping: false,
    })
}

/// Rectangular, optionally rotated tiles; each surviving tile is one fold.
pub fn spcv_tiles(task: &Task, spec: &TileSpec) -> Result<ResamplingPlan> {
    partition(task, &MethodSpec::Tiles(spec.clone()), 0)
}

/// Square or rows x cols blocks assigned to folds randomly, systematically or as a checkerboard.
pub fn spcv_block(task: &Task, spec: &BlockSpec, seed: u64) -> Result<ResamplingPlan> {
    partition(task, &MethodSpec::Block(spec.clone()), seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::task::{Response, TaskBuilder};

    fn task(coords: Vec<[f64; 2]>) -> Task {
        let n = coords.len();
        TaskBuilder::new("t", "y", Response::Numeric(vec![0.0; n]), coords)
            .build()
            .unwrap()
    }

    /// One point per listed cell of a `rows x cols` grid of unit cells, plus the two
    /// corners needed to pin the bounding box to the full grid.
    fn cells(rows: usize, cols: usize, keep: impl Fn(usize, usize) -> usize) -> Vec<[f64; 2]> {
        let mut pts = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                for _ in 0..keep(r, c) {
                    pts.push([c as f64 + 0.5, (rows - 1 - r) as f64 + 0.5]);
                }
            }
        }
        pts
    }

    #[test]
    fn full_grid_gives_twelve_tiles() {
        let mut pts = cells(3, 4, |_, _| 2);
        pts.push([0.0, 0.0]);
        pts.push([4.0, 3.0]);
        let p = spcv_tiles(&task(pts), &TileSpec::nsplit(3, 4)).unwrap();
        assert_eq!(p.k_per_repeat, 12);
    }

    #[test]
    fn empty_corner_tile_is_dropped() {
        // Bottom-left cell (row 2 from top, col 0) holds nothing.
        let mut pts = cells(3, 4, |r, c| usize::from(!(r == 2 && c == 0)) * 3);
        pts.push([0.0, 1.2]);
        pts.push([1.2, 0.0]);
        pts.push([4.0, 3.0]);
        let p = spcv_tiles(&task(pts), &TileSpec::nsplit(3, 4)).unwrap();
        assert_eq!(p.k_per_repeat, 11);
    }

    #[test]
    fn small_tile_joins_largest_neighbour() {
        // 2 x 3 grid. Counts (top row) 4 5 1 / (bottom row) 3 4 6.
        // Cell 2 (top-right) holds one point; its 4-neighbours are cell 1 (5) and cell 5 (6).
        let counts = [[4, 5, 1], [3, 4, 6]];
        let pts = cells(2, 3, |r, c| counts[r][c]);
        let mut spec = TileSpec::nsplit(2, 3);
        let before = spcv_tiles(&task(pts.clone()), &spec).unwrap().k_per_repeat;
        spec.min_n = Some(2);
        let t = task(pts.clone());
        let blocks = tile_blocks(&t, &spec).unwrap();
        assert_eq!(before, 6);
        assert_eq!(blocks.n_z, 5);
        let lonely = pts.iter().position(|p| p[0] > 2.0 && p[1] > 1.0).unwrap();
        let bottom_right = pts.iter().position(|p| p[0] > 2.0 && p[1] < 1.0).unwrap();
        assert_eq!(blocks.block_of[lonely], blocks.block_of[bottom_right]);
    }

    #[test]
    fn coincident_points_cannot_be_split() {
        let t = task(vec![[1.0, 1.0]; 4]);
        assert!(spcv_tiles(&t, &TileSpec::nsplit(2, 2)).is_err());
        let mut spec = TileSpec::nsplit(1, 2);
        spec.min_n = Some(4);
        assert!(spcv_tiles(&task(cells(1, 2, |_, _| 2)), &spec).is_err());
    }

    #[test]
    fn rotated_tiles_cover_every_point() {
        let pts: Vec<[f64; 2]> = (0..60).map(|i| [(i % 10) as f64 * 1.3, (i / 10) as f64 * 0.7]).collect();
        let spec = TileSpec {
            rotation: 30.0,
            ..TileSpec::nsplit(2, 2)
        };
        let t = task(pts);
        let b = tile_blocks(&t, &spec).unwrap();
        assert!(b.block_of.iter().all(|&l| (1..=b.n_z).contains(&l)));
        assert!(spcv_tiles(&t, &TileSpec { rotation: 90.0, ..spec }).is_err());
    }

    #[test]
    fn systematic_blocks_cycle_through_folds() {
        // 19 nonempty 1000 m blocks: a 4 x 5 grid missing its top-left cell.
        let pts: Vec<[f64; 2]> = cells(4, 5, |r, c| usize::from(!(r == 0 && c == 0)))
            .into_iter()
            .map(|[x, y]| [x * 1000.0, y * 1000.0])
            .collect();
        let t = task(pts);
        let spec = BlockSpec {
            range: None,
            rows_cols: Some((4, 5)),
            folds: 5,
            selection: Selection::Systematic,
        };
        let g = block_grid(&t, &spec).unwrap();
        assert_eq!(g.blocks.n_z, 19);
        let p = spcv_block(&t, &spec, 0).unwrap();
        let blocks_in = |f: &Fold| {
            let mut b: Vec<usize> = f.test.iter().map(|&i| g.blocks.block_of[i]).collect();
            b.dedup();
            b
        };
        assert_eq!(blocks_in(&p.folds[0]), vec![1, 6, 11, 16]);
    }

    #[test]
    fn checkerboard_has_two_folds() {
        let t = task(cells(3, 3, |_, _| 1));
        let spec = BlockSpec {
            range: None,
            rows_cols: Some((3, 3)),
            folds: 7,
            selection: Selection::Checkerboard,
        };
        let p = spcv_block(&t, &spec, 0).unwrap();
        assert_eq!(p.k_per_repeat, 2);
        assert_eq!(p.folds[0].test.len(), 5);
    }

    #[test]
    fn block_spec_errors() {
        let t = task(cells(2, 2, |_, _| 1));
        let mut spec = BlockSpec {
            range: Some(0.0),
            rows_cols: None,
            folds: 2,
            selection: Selection::Random,
        };
        assert!(spcv_block(&t, &spec, 0).is_err());
        spec.range = Some(0.6);
        spec.folds = 5;
        assert!(spcv_block(&t, &spec, 0).is_err(), "4 blocks < 5 folds");
        spec.folds = 2;
        assert!(spcv_block(&t, &spec, 0).is_ok());
    }
}
