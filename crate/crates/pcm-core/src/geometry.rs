//! Unit-cell geometry, rasterized metal masks, and checkerboard layouts.
//!
//! A cell is a square patch of substrate-backed ground plane carrying a
//! single metallic ellipse whose major axis runs along one diagonal. The
//! `UNIT` cell orients the ellipse at +45° from +x, its `MIRROR` image at
//! −45°. Everything here is immutable after construction and all operations
//! are pure, so values can be shared freely across threads.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    /// FIT_ERROR: the rotated ellipse does not fit inside the cell.
    #[error(
        "FIT_ERROR: ellipse half-extent {extent_mm:.4} mm exceeds period/2 = {limit_mm:.4} mm"
    )]
    Fit { extent_mm: f64, limit_mm: f64 },
    /// AXIS_ERROR: minor axis longer than major axis.
    #[error("AXIS_ERROR: minor axis {minor_mm} mm exceeds major axis {major_mm} mm")]
    Axis { minor_mm: f64, major_mm: f64 },
    /// RESOLUTION_ERROR: sample pitch does not divide the period.
    #[error("RESOLUTION_ERROR: resolution {resolution_mm} mm does not divide period {period_mm} mm within 0.1%")]
    Resolution { resolution_mm: f64, period_mm: f64 },
    /// REGION_ERROR: a blanked region extends beyond the aperture.
    #[error("REGION_ERROR: antenna region exceeds the aperture extent")]
    Region,
    #[error("INVALID_VALUE: {0}")]
    Invalid(&'static str),
}

/// Dielectric material description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    /// Relative permittivity (≥ 1).
    pub eps_r: f64,
    /// Loss tangent (≥ 0).
    pub tan_delta: f64,
}

impl Material {
    pub fn new(name: impl Into<String>, eps_r: f64, tan_delta: f64) -> Result<Self, GeometryError> {
        if !(eps_r >= 1.0) {
            return Err(GeometryError::Invalid("eps_r must be >= 1"));
        }
        if !(tan_delta >= 0.0) {
            return Err(GeometryError::Invalid("tan_delta must be >= 0"));
        }
        Ok(Self {
            name: name.into(),
            eps_r,
            tan_delta,
        })
    }

    /// Lossless vacuum filler.
    pub fn air() -> Self {
        Self {
            name: "air".into(),
            eps_r: 1.0,
            tan_delta: 0.0,
        }
    }
}

/// Substrate stack: one dielectric layer over an optional ground plane.
///
/// The metal thickness is recorded for documentation but every model in this
/// crate collapses patterned metal to a zero-thickness sheet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackUp {
    pub substrate: Material,
    /// Substrate thickness (mm), > 0.
    pub h_mm: f64,
    /// Patterned-metal thickness (mm), metadata only.
    pub metal_thickness_mm: f64,
    /// Continuous ground plane present.
    pub ground: bool,
}

impl StackUp {
    pub fn new(
        substrate: Material,
        h_mm: f64,
        metal_thickness_mm: f64,
        ground: bool,
    ) -> Result<Self, GeometryError> {
        if !(h_mm > 0.0) {
            return Err(GeometryError::Invalid("substrate thickness must be > 0"));
        }
        if !(metal_thickness_mm >= 0.0) {
            return Err(GeometryError::Invalid("metal thickness must be >= 0"));
        }
        Ok(Self {
            substrate,
            h_mm,
            metal_thickness_mm,
            ground,
        })
    }
}

/// Orientation of the ellipse: `Unit` puts the major axis at +45° from +x,
/// `Mirror` at −45°.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Handedness {
    Unit,
    Mirror,
}

impl Handedness {
    pub fn orientation_deg(self) -> f64 {
        match self {
            Handedness::Unit => 45.0,
            Handedness::Mirror => -45.0,
        }
    }

    pub fn toggled(self) -> Self {
        match self {
            Handedness::Unit => Handedness::Mirror,
            Handedness::Mirror => Handedness::Unit,
        }
    }
}

/// One square unit cell with a centered, diagonally oriented ellipse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitCellGeometry {
    /// Cell pitch (mm).
    pub period_mm: f64,
    /// Full major-axis length of the ellipse (mm).
    pub major_axis_mm: f64,
    /// Full minor-axis length of the ellipse (mm).
    pub minor_axis_mm: f64,
    /// Major-axis angle from +x (degrees); fixed by the handedness.
    pub orientation_deg: f64,
    pub stack: StackUp,
    pub handedness: Handedness,
}

impl UnitCellGeometry {
    /// Half-extent along x (or y) of the 45°-rotated ellipse bounding box.
    pub fn bounding_half_extent_mm(&self) -> f64 {
        let a = self.major_axis_mm / 2.0;
        let b = self.minor_axis_mm / 2.0;
        ((a * a + b * b) / 2.0).sqrt()
    }

    /// True if the point (mm, cell-corner origin) lies inside or on the
    /// ellipse boundary.
    pub fn contains_point(&self, x_mm: f64, y_mm: f64) -> bool {
        let cx = self.period_mm / 2.0;
        let cy = self.period_mm / 2.0;
        let (dx, dy) = (x_mm - cx, y_mm - cy);
        let th = self.orientation_deg.to_radians();
        let (s, c) = th.sin_cos();
        // Rotate into the principal frame of the ellipse.
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        let a = self.major_axis_mm / 2.0;
        let b = self.minor_axis_mm / 2.0;
        (u / a) * (u / a) + (v / b) * (v / b) <= 1.0
    }
}

/// Builds and validates a unit cell.
///
/// `major_axis_mm` and `minor_axis_mm` are full axis lengths. The cell is
/// rejected when the minor axis exceeds the major axis or when the rotated
/// ellipse cannot fit inside the square cell.
pub fn build_unit_cell(
    period_mm: f64,
    major_axis_mm: f64,
    minor_axis_mm: f64,
    stack: StackUp,
    handedness: Handedness,
) -> Result<UnitCellGeometry, GeometryError> {
    if !(period_mm > 0.0 && major_axis_mm > 0.0 && minor_axis_mm > 0.0) {
        return Err(GeometryError::Invalid("all lengths must be positive"));
    }
    if minor_axis_mm > major_axis_mm {
        return Err(GeometryError::Axis {
            minor_mm: minor_axis_mm,
            major_mm: major_axis_mm,
        });
    }
    let cell = UnitCellGeometry {
        period_mm,
        major_axis_mm,
        minor_axis_mm,
        orientation_deg: handedness.orientation_deg(),
        stack,
        handedness,
    };
    let extent = cell.bounding_half_extent_mm();
    if extent > period_mm / 2.0 {
        return Err(GeometryError::Fit {
            extent_mm: extent,
            limit_mm: period_mm / 2.0,
        });
    }
    Ok(cell)
}

/// Reflects the cell about the x-axis: handedness toggles, the orientation
/// changes sign, all lengths stay put. Involutive.
pub fn mirror_unit(cell: &UnitCellGeometry) -> UnitCellGeometry {
    let mut out = cell.clone();
    out.handedness = cell.handedness.toggled();
    out.orientation_deg = -cell.orientation_deg;
    out
}

/// Boolean metal mask sampled on a square grid over one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchMask {
    /// Sample pitch (mm).
    pub resolution_mm: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `true` = metal. Sample (ix, iy) is centered at
    /// ((ix+1/2)·res, (iy+1/2)·res).
    pub cells: Vec<bool>,
}

impl PatchMask {
    pub fn get(&self, ix: usize, iy: usize) -> bool {
        self.cells[iy * self.nx + ix]
    }

    /// Total metal area implied by the mask (mm²).
    pub fn metal_area_mm2(&self) -> f64 {
        let n = self.cells.iter().filter(|&&m| m).count();
        n as f64 * self.resolution_mm * self.resolution_mm
    }

    /// Mask reflected about the x-axis (y index reversed).
    pub fn flipped_y(&self) -> PatchMask {
        let mut cells = vec![false; self.cells.len()];
        for iy in 0..self.ny {
            let src = (self.ny - 1 - iy) * self.nx;
            let dst = iy * self.nx;
            cells[dst..dst + self.nx].copy_from_slice(&self.cells[src..src + self.nx]);
        }
        PatchMask {
            cells,
            ..self.clone()
        }
    }
}

/// Samples the metal footprint of a cell on a grid of the given pitch.
///
/// A sample is metal iff its center lies inside or on the ellipse boundary.
pub fn rasterize(cell: &UnitCellGeometry, resolution_mm: f64) -> Result<PatchMask, GeometryError> {
    if !(resolution_mm > 0.0) {
        return Err(GeometryError::Invalid("resolution must be positive"));
    }
    let n_f = cell.period_mm / resolution_mm;
    let n = n_f.round() as usize;
    if n == 0 || (n_f - n as f64).abs() > 1e-3 * n_f {
        return Err(GeometryError::Resolution {
            resolution_mm,
            period_mm: cell.period_mm,
        });
    }
    let mut cells = vec![false; n * n];
    for iy in 0..n {
        let y = (iy as f64 + 0.5) * resolution_mm;
        for ix in 0..n {
            let x = (ix as f64 + 0.5) * resolution_mm;
            cells[iy * n + ix] = cell.contains_point(x, y);
        }
    }
    Ok(PatchMask {
        resolution_mm,
        nx: n,
        ny: n,
        cells,
    })
}

/// What a tile of the aperture carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TileKind {
    Unit,
    Mirror,
    Pec,
    Absent,
}

/// Axis-aligned rectangle in aperture coordinates (mm, corner origin).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_mm: f64,
    pub y_mm: f64,
    pub width_mm: f64,
    pub height_mm: f64,
}

/// A rectangular grid of tiles, each tile a block of identical unit cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApertureLayout {
    pub tiles_x: usize,
    pub tiles_y: usize,
    /// Row-major tile kinds, index = iy * tiles_x + ix.
    pub tiles: Vec<TileKind>,
    /// Tile size (mm) = cells_per_tile × unit-cell period.
    pub tile_pitch_mm: f64,
    /// Sub-cells per tile side.
    pub cells_per_tile: usize,
}

impl ApertureLayout {
    pub fn new(
        tiles_x: usize,
        tiles_y: usize,
        tiles: Vec<TileKind>,
        tile_pitch_mm: f64,
        cells_per_tile: usize,
    ) -> Result<Self, GeometryError> {
        if tiles_x == 0 || tiles_y == 0 || cells_per_tile == 0 {
            return Err(GeometryError::Invalid("tile grid dimensions must be >= 1"));
        }
        if tiles.len() != tiles_x * tiles_y {
            return Err(GeometryError::Invalid("tile grid size mismatch"));
        }
        if !(tile_pitch_mm > 0.0) {
            return Err(GeometryError::Invalid("tile pitch must be positive"));
        }
        Ok(Self {
            tiles_x,
            tiles_y,
            tiles,
            tile_pitch_mm,
            cells_per_tile,
        })
    }

    pub fn kind(&self, ix: usize, iy: usize) -> TileKind {
        self.tiles[iy * self.tiles_x + ix]
    }

    /// Overall aperture size (width, height) in mm.
    pub fn extent_mm(&self) -> (f64, f64) {
        (
            self.tiles_x as f64 * self.tile_pitch_mm,
            self.tiles_y as f64 * self.tile_pitch_mm,
        )
    }

    /// Unit-cell period implied by the tiling (mm).
    pub fn cell_period_mm(&self) -> f64 {
        self.tile_pitch_mm / self.cells_per_tile as f64
    }

    /// Tile counts as (unit, mirror, pec, absent).
    pub fn counts(&self) -> (usize, usize, usize, usize) {
        let mut c = (0, 0, 0, 0);
        for t in &self.tiles {
            match t {
                TileKind::Unit => c.0 += 1,
                TileKind::Mirror => c.1 += 1,
                TileKind::Pec => c.2 += 1,
                TileKind::Absent => c.3 += 1,
            }
        }
        c
    }
}

/// Builds the alternating unit/mirror tiling, optionally blanking tiles that
/// intersect a specular (PEC) region reserved for other hardware.
///
/// Tile (0,0) is `Unit` and neighbors alternate in both directions.
pub fn build_checkerboard(
    tiles_x: usize,
    tiles_y: usize,
    cells_per_tile: usize,
    cell: &UnitCellGeometry,
    antenna_region: Option<Rect>,
) -> Result<ApertureLayout, GeometryError> {
    if tiles_x == 0 || tiles_y == 0 || cells_per_tile == 0 {
        return Err(GeometryError::Invalid("tile grid dimensions must be >= 1"));
    }
    let pitch = cells_per_tile as f64 * cell.period_mm;
    let (w, h) = (tiles_x as f64 * pitch, tiles_y as f64 * pitch);
    if let Some(r) = antenna_region {
        if !(r.width_mm > 0.0 && r.height_mm > 0.0) {
            return Err(GeometryError::Invalid(
                "antenna region must have positive size",
            ));
        }
        if r.x_mm < 0.0
            || r.y_mm < 0.0
            || r.x_mm + r.width_mm > w + 1e-9
            || r.y_mm + r.height_mm > h + 1e-9
        {
            return Err(GeometryError::Region);
        }
    }
    let mut tiles = Vec::with_capacity(tiles_x * tiles_y);
    for iy in 0..tiles_y {
        for ix in 0..tiles_x {
            let mut kind = if (ix + iy) % 2 == 0 {
                TileKind::Unit
            } else {
                TileKind::Mirror
            };
            if let Some(r) = antenna_region {
                let (tx0, ty0) = (ix as f64 * pitch, iy as f64 * pitch);
                let overlap_x = (tx0 + pitch).min(r.x_mm + r.width_mm) - tx0.max(r.x_mm);
                let overlap_y = (ty0 + pitch).min(r.y_mm + r.height_mm) - ty0.max(r.y_mm);
                if overlap_x > 1e-9 && overlap_y > 1e-9 {
                    kind = TileKind::Pec;
                }
            }
            tiles.push(kind);
        }
    }
    ApertureLayout::new(tiles_x, tiles_y, tiles, pitch, cells_per_tile)
}
