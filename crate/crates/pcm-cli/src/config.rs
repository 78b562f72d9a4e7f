//! One-file JSON run configuration.
//!
//! Blocks are optional at parse time; each command checks that the blocks
//! it needs are present. Unknown keys anywhere are rejected.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use pcm_core::{
    build_checkerboard, build_unit_cell, ApertureLayout, DesignBounds, DesignVector, Handedness,
    Material, Rect, SolverConfig, StackUp, UnitCellGeometry,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryBlock {
    pub period_mm: f64,
    pub major_axis_mm: f64,
    pub minor_axis_mm: f64,
    #[serde(default = "default_handedness")]
    pub handedness: String,
}

fn default_handedness() -> String {
    "unit".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackBlock {
    pub eps_r: f64,
    #[serde(default)]
    pub tan_delta: f64,
    pub h_mm: f64,
    #[serde(default)]
    pub metal_thickness_mm: f64,
    #[serde(default = "default_true")]
    pub ground: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntennaRegionBlock {
    pub x_mm: f64,
    pub y_mm: f64,
    pub width_mm: f64,
    pub height_mm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutBlock {
    pub tiles_x: usize,
    pub tiles_y: usize,
    pub cells_per_tile: usize,
    #[serde(default)]
    pub antenna_region_mm: Option<AntennaRegionBlock>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub band_ghz: (f64, f64),
    pub n_freq: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsBlock {
    pub major_axis_mm: (f64, f64),
    pub minor_axis_mm: (f64, f64),
    pub period_mm: (f64, f64),
    pub h_mm: (f64, f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeBlock {
    pub bounds: BoundsBlock,
    pub band_ghz: (f64, f64),
    pub n_freq: usize,
    pub threshold: f64,
    pub budget: usize,
    #[serde(default = "default_engine")]
    pub engine: String,
    /// Optional explicit starting point; defaults to the bounds midpoint.
    #[serde(default)]
    pub start: Option<StartBlock>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartBlock {
    pub major_axis_mm: f64,
    pub minor_axis_mm: f64,
    pub period_mm: f64,
    pub h_mm: f64,
}

fn default_engine() -> String {
    "sheet_model".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub geometry: Option<GeometryBlock>,
    #[serde(default)]
    pub stack: Option<StackBlock>,
    #[serde(default)]
    pub solver: Option<SolverConfig>,
    #[serde(default)]
    pub layout: Option<LayoutBlock>,
    #[serde(default)]
    pub sweep: Option<SweepBlock>,
    #[serde(default)]
    pub optimize: Option<OptimizeBlock>,
    #[serde(default)]
    pub output_dir: Option<String>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let config: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("invalid config {}", path.display()))?;
        Ok(config)
    }

    pub fn stack(&self) -> Result<StackUp> {
        let block = self
            .stack
            .as_ref()
            .ok_or_else(|| anyhow!("config is missing the stack block"))?;
        let material = Material::new("substrate", block.eps_r, block.tan_delta)?;
        Ok(StackUp::new(
            material,
            block.h_mm,
            block.metal_thickness_mm,
            block.ground,
        )?)
    }

    pub fn cell(&self) -> Result<UnitCellGeometry> {
        let g = self
            .geometry
            .as_ref()
            .ok_or_else(|| anyhow!("config is missing the geometry block"))?;
        let handedness = match g.handedness.as_str() {
            "unit" => Handedness::Unit,
            "mirror" => Handedness::Mirror,
            other => bail!("unknown handedness {other:?} (expected \"unit\" or \"mirror\")"),
        };
        Ok(build_unit_cell(
            g.period_mm,
            g.major_axis_mm,
            g.minor_axis_mm,
            self.stack()?,
            handedness,
        )?)
    }

    pub fn solver(&self) -> Result<SolverConfig> {
        self.solver
            .clone()
            .ok_or_else(|| anyhow!("config is missing the solver block"))
    }

    pub fn layout(&self, cell: &UnitCellGeometry) -> Result<ApertureLayout> {
        let block = self
            .layout
            .as_ref()
            .ok_or_else(|| anyhow!("config is missing the layout block"))?;
        let region = block.antenna_region_mm.as_ref().map(|r| Rect {
            x_mm: r.x_mm,
            y_mm: r.y_mm,
            width_mm: r.width_mm,
            height_mm: r.height_mm,
        });
        Ok(build_checkerboard(
            block.tiles_x,
            block.tiles_y,
            block.cells_per_tile,
            cell,
            region,
        )?)
    }

    pub fn sweep(&self) -> Result<&SweepBlock> {
        self.sweep
            .as_ref()
            .ok_or_else(|| anyhow!("config is missing the sweep block"))
    }

    pub fn optimize_block(&self) -> Result<&OptimizeBlock> {
        self.optimize
            .as_ref()
            .ok_or_else(|| anyhow!("config is missing the optimize block"))
    }
}

impl OptimizeBlock {
    pub fn bounds(&self) -> DesignBounds {
        DesignBounds {
            major_axis_mm: self.bounds.major_axis_mm,
            minor_axis_mm: self.bounds.minor_axis_mm,
            period_mm: self.bounds.period_mm,
            h_mm: self.bounds.h_mm,
        }
    }

    pub fn start_vector(&self) -> Option<DesignVector> {
        self.start.as_ref().map(|s| DesignVector {
            major_axis_mm: s.major_axis_mm,
            minor_axis_mm: s.minor_axis_mm,
            period_mm: s.period_mm,
            h_mm: s.h_mm,
        })
    }
}
