//! Hierarchical square partition of the simulation area and hash-based
//! server election.
//!
//! The area is a square of side `cell_side * 2^levels`. Level-0 regions are
//! cells; every level-(i+1) region is made of the 2x2 block of level-i
//! regions below it, and the single level-`levels` region is the whole area.

use crate::geom::{Square, Vec2};
use crate::NodeId;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("position ({x}, {y}) lies outside the simulation area")]
    PositionOutOfArea { x: f64, y: f64 },
    #[error("level {level} out of range (hierarchy has levels 0..={max})")]
    LevelOutOfRange { level: u32, max: u32 },
    #[error("cannot elect a server in an empty region")]
    EmptyRegion,
    #[error("invalid grid geometry: {0}")]
    InvalidGeometry(String),
    #[error("cell diagonal {diagonal:.3} m exceeds radio range {range} m")]
    CellExceedsRadioRange { diagonal: f64, range: f64 },
}

/// Identifier of a region at a given level of the hierarchy.
///
/// `x` and `y` are grid coordinates at that level, both `< 2^(levels - level)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegionId {
    pub level: u32,
    pub x: u32,
    pub y: u32,
}

impl RegionId {
    pub const fn new(level: u32, x: u32, y: u32) -> Self {
        RegionId { level, x, y }
    }

    pub fn is_cell(&self) -> bool {
        self.level == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridHierarchy {
    origin: Vec2,
    cell_side: f64,
    levels: u32,
}

impl GridHierarchy {
    pub fn new(origin: Vec2, cell_side: f64, levels: u32) -> Result<Self, GridError> {
        if !(cell_side.is_finite() && cell_side > 0.0) {
            return Err(GridError::InvalidGeometry(format!(
                "cell side must be positive, got {cell_side}"
            )));
        }
        if levels == 0 || levels > 20 {
            return Err(GridError::InvalidGeometry(format!(
                "hierarchy needs between 1 and 20 levels, got {levels}"
            )));
        }
        Ok(GridHierarchy {
            origin,
            cell_side,
            levels,
        })
    }

    /// Builds the hierarchy for a square area whose side must be a power-of-two
    /// multiple (at least 2) of the cell side.
    pub fn for_area(origin: Vec2, side_length: f64, cell_side: f64) -> Result<Self, GridError> {
        let ratio = side_length / cell_side;
        let levels = ratio.log2().round();
        if !(ratio.is_finite() && levels >= 1.0 && (2f64.powf(levels) - ratio).abs() < 1e-9 * ratio)
        {
            return Err(GridError::InvalidGeometry(format!(
                "area side {side_length} is not cell side {cell_side} times a power of two >= 2"
            )));
        }
        GridHierarchy::new(origin, cell_side, levels as u32)
    }

    pub fn origin(&self) -> Vec2 {
        self.origin
    }

    pub fn cell_side(&self) -> f64 {
        self.cell_side
    }

    /// Number of levels `H` above level 0.
    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn side_length(&self) -> f64 {
        self.cell_side * self.regions_per_side(0) as f64
    }

    pub fn area(&self) -> Square {
        Square::new(self.origin, self.side_length())
    }

    /// Number of regions along one side at `level`.
    pub fn regions_per_side(&self, level: u32) -> u32 {
        1 << (self.levels - level.min(self.levels))
    }

    pub fn region_side(&self, level: u32) -> f64 {
        self.cell_side * f64::from(1u32 << level)
    }

    pub fn top(&self) -> RegionId {
        RegionId::new(self.levels, 0, 0)
    }

    /// Checks that any two points inside one cell are within `range` of each other.
    pub fn check_radio_range(&self, range: f64) -> Result<(), GridError> {
        let diagonal = self.cell_side * std::f64::consts::SQRT_2;
        if diagonal <= range {
            Ok(())
        } else {
            Err(GridError::CellExceedsRadioRange { diagonal, range })
        }
    }

    /// Level-0 cell containing `p`. Points on an interior cell edge belong to
    /// the higher-index cell; points on the max edge of the area belong to the
    /// last cell.
    pub fn cell_of(&self, p: Vec2) -> Result<RegionId, GridError> {
        if !(p.x.is_finite() && p.y.is_finite()) || !self.area().contains(p) {
            return Err(GridError::PositionOutOfArea { x: p.x, y: p.y });
        }
        let n = self.regions_per_side(0);
        let index = |v: f64| (((v / self.cell_side).floor()) as u32).min(n - 1);
        Ok(RegionId::new(
            0,
            index(p.x - self.origin.x),
            index(p.y - self.origin.y),
        ))
    }

    /// Ancestor of `region` at `level`; the identity when `level == region.level`.
    pub fn region_of(&self, region: RegionId, level: u32) -> Result<RegionId, GridError> {
        if level > self.levels || level < region.level {
            return Err(GridError::LevelOutOfRange {
                level,
                max: self.levels,
            });
        }
        let shift = level - region.level;
        Ok(RegionId::new(level, region.x >> shift, region.y >> shift))
    }

    pub fn region_containing(&self, p: Vec2, level: u32) -> Result<RegionId, GridError> {
        self.region_of(self.cell_of(p)?, level)
    }

    /// Largest level at which the regions of `from` and `to` differ, or `None`
    /// if both points are in the same cell.
    pub fn highest_crossed_level(&self, from: Vec2, to: Vec2) -> Result<Option<u32>, GridError> {
        let a = self.cell_of(from)?;
        let b = self.cell_of(to)?;
        Ok(self.crossed_level_between(a, b))
    }

    /// Same as [`highest_crossed_level`](Self::highest_crossed_level) but for two cells.
    pub fn crossed_level_between(&self, a: RegionId, b: RegionId) -> Option<u32> {
        if a == b {
            return None;
        }
        // Regions at level k coincide iff the coordinates agree after k shifts.
        let diff = (a.x ^ b.x) | (a.y ^ b.y);
        Some(31 - diff.leading_zeros())
    }

    pub fn parent(&self, region: RegionId) -> Option<RegionId> {
        (region.level < self.levels)
            .then(|| RegionId::new(region.level + 1, region.x >> 1, region.y >> 1))
    }

    /// The four sub-regions of a region at level >= 1, in (x, y) row-major order.
    pub fn children(&self, region: RegionId) -> Option<[RegionId; 4]> {
        if region.level == 0 {
            return None;
        }
        let (l, x, y) = (region.level - 1, region.x << 1, region.y << 1);
        Some([
            RegionId::new(l, x, y),
            RegionId::new(l, x + 1, y),
            RegionId::new(l, x, y + 1),
            RegionId::new(l, x + 1, y + 1),
        ])
    }

    /// All cells of `region`, ascending by linear cell index (`y * n + x`).
    pub fn cells_of(&self, region: RegionId) -> Vec<RegionId> {
        let span = 1u32 << region.level;
        let (x0, y0) = (region.x * span, region.y * span);
        let mut cells = Vec::with_capacity((span * span) as usize);
        for y in y0..y0 + span {
            for x in x0..x0 + span {
                cells.push(RegionId::new(0, x, y));
            }
        }
        cells
    }

    pub fn cell_index(&self, cell: RegionId) -> usize {
        (cell.y * self.regions_per_side(0) + cell.x) as usize
    }

    pub fn cell_count(&self) -> usize {
        let n = self.regions_per_side(0) as usize;
        n * n
    }

    pub fn bounds(&self, region: RegionId) -> Square {
        let side = self.region_side(region.level);
        Square::new(
            Vec2::new(
                self.origin.x + side * f64::from(region.x),
                self.origin.y + side * f64::from(region.y),
            ),
            side,
        )
    }

    pub fn center(&self, region: RegionId) -> Vec2 {
        let b = self.bounds(region);
        Vec2::new(b.origin.x + b.side / 2.0, b.origin.y + b.side / 2.0)
    }

    pub fn contains(&self, region: RegionId, p: Vec2) -> bool {
        self.region_containing(p, region.level)
            .map(|r| r == region)
            .unwrap_or(false)
    }
}

/// Elects the member at index `target mod |members|`.
///
/// `members` must be in canonical (ascending) order; the election is then a
/// pure function of the target identity and the membership set.
pub fn select_server<T: Copy + Ord>(target: NodeId, members: &[T]) -> Result<T, GridError> {
    debug_assert!(members.windows(2).all(|w| w[0] < w[1]), "members not sorted");
    if members.is_empty() {
        return Err(GridError::EmptyRegion);
    }
    Ok(members[target.0 as usize % members.len()])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridHierarchy {
        GridHierarchy::for_area(Vec2::ZERO, 1000.0, 125.0).unwrap()
    }

    #[test]
    fn default_geometry() {
        let g = grid();
        assert_eq!(g.levels(), 3);
        assert_eq!(g.side_length(), 1000.0);
        assert!(g.check_radio_range(250.0).is_ok());
        assert!(g.check_radio_range(170.0).is_err());
        assert!(GridHierarchy::for_area(Vec2::ZERO, 1000.0, 300.0).is_err());
        assert!(GridHierarchy::for_area(Vec2::ZERO, 125.0, 125.0).is_err());
    }

    #[test]
    fn cell_of_examples() {
        let g = grid();
        assert_eq!(g.cell_of(Vec2::new(0.0, 0.0)).unwrap(), RegionId::new(0, 0, 0));
        assert_eq!(g.cell_of(Vec2::new(130.0, 260.0)).unwrap(), RegionId::new(0, 1, 2));
        assert_eq!(g.cell_of(Vec2::new(1000.0, 1000.0)).unwrap(), RegionId::new(0, 7, 7));
        assert_eq!(g.cell_of(Vec2::new(125.0, 0.0)).unwrap(), RegionId::new(0, 1, 0));
        assert!(matches!(
            g.cell_of(Vec2::new(-0.1, 5.0)),
            Err(GridError::PositionOutOfArea { .. })
        ));
        assert!(g.cell_of(Vec2::new(5.0, 1000.5)).is_err());
        assert!(g.cell_of(Vec2::new(f64::NAN, 5.0)).is_err());
    }

    #[test]
    fn region_of_examples() {
        let g = grid();
        assert_eq!(g.region_of(RegionId::new(0, 1, 2), 1).unwrap(), RegionId::new(1, 0, 1));
        assert_eq!(g.region_of(RegionId::new(0, 7, 7), 3).unwrap(), RegionId::new(3, 0, 0));
        assert_eq!(g.region_of(RegionId::new(0, 3, 0), 0).unwrap(), RegionId::new(0, 3, 0));
        assert_eq!(
            g.region_of(RegionId::new(0, 3, 0), 4),
            Err(GridError::LevelOutOfRange { level: 4, max: 3 })
        );
    }

    #[test]
    fn crossed_level_examples() {
        let g = grid();
        let k = |a: (f64, f64), b: (f64, f64)| {
            g.highest_crossed_level(Vec2::new(a.0, a.1), Vec2::new(b.0, b.1)).unwrap()
        };
        assert_eq!(k((120.0, 10.0), (130.0, 10.0)), Some(0));
        assert_eq!(k((240.0, 10.0), (260.0, 10.0)), Some(1));
        assert_eq!(k((10.0, 10.0), (20.0, 10.0)), None);
        assert_eq!(k((499.0, 10.0), (501.0, 10.0)), Some(2));
        assert_eq!(k((10.0, 499.0), (10.0, 501.0)), Some(2));
        assert!(g.highest_crossed_level(Vec2::ZERO, Vec2::new(2000.0, 0.0)).is_err());
    }

    #[test]
    fn select_server_examples() {
        let members = [2u32, 3, 7, 11, 13].map(NodeId);
        assert_eq!(select_server(NodeId(7), &members), Ok(NodeId(7)));
        assert_eq!(select_server(NodeId(9), &[NodeId(4)]), Ok(NodeId(4)));
        assert_eq!(select_server::<NodeId>(NodeId(5), &[]), Err(GridError::EmptyRegion));
    }

    #[test]
    fn children_and_cells() {
        let g = grid();
        let top = g.top();
        let kids = g.children(top).unwrap();
        assert!(kids.iter().all(|c| g.parent(*c) == Some(top)));
        assert_eq!(g.cells_of(top).len(), 64);
        let cells = g.cells_of(RegionId::new(1, 1, 0));
        assert_eq!(
            cells,
            vec![
                RegionId::new(0, 2, 0),
                RegionId::new(0, 3, 0),
                RegionId::new(0, 2, 1),
                RegionId::new(0, 3, 1)
            ]
        );
        assert!(g.children(RegionId::new(0, 0, 0)).is_none());
        assert!(g.parent(top).is_none());
    }
}
