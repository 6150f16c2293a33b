use super::shape::{sdf_gradient, sdf_union, RobotShape};
use super::DEFAULT_GRADIENT_STEP;
use crate::{Error, Result, Vec2};

pub const DEFAULT_GRID_MARGIN: f64 = 3.0;
pub const DEFAULT_GRID_RESOLUTION: f64 = 0.05;
pub const DEFAULT_CELL_BUDGET: u64 = 4_000_000;

const HEADER_BYTES: usize = 5 * 8;

/// Body-frame signed distances sampled on a regular lattice.
///
/// Node `(ix, iy)` sits at `origin + resolution * (ix, iy)` and is stored at
/// `values[iy * nx + ix]` (row-major, one row per y index).
#[derive(Debug, Clone, PartialEq)]
pub struct SdfGrid {
    resolution: f64,
    origin: Vec2,
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

impl SdfGrid {
    pub fn build(shape: &RobotShape, margin: f64, resolution: f64) -> Result<Self> {
        Self::build_with_budget(shape, margin, resolution, DEFAULT_CELL_BUDGET)
    }

    pub fn build_with_budget(
        shape: &RobotShape,
        margin: f64,
        resolution: f64,
        budget: u64,
    ) -> Result<Self> {
        if !(margin >= 0.0 && margin.is_finite()) {
            return Err(Error::Geometry(format!("grid margin must be >= 0, got {margin}")));
        }
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::Geometry(format!(
                "grid resolution must be > 0, got {resolution}"
            )));
        }
        let (lo, hi) = shape.bounds();
        let lo = lo - Vec2::repeat(margin);
        let hi = hi + Vec2::repeat(margin);
        let count = |span: f64| ((span / resolution - 1e-9).ceil() as u64 + 1).max(2);
        let (nx, ny) = (count(hi.x - lo.x), count(hi.y - lo.y));
        let cells = nx.saturating_mul(ny);
        if cells > budget {
            return Err(Error::GridBudget { cells, budget });
        }
        let (nx, ny) = (nx as usize, ny as usize);
        let mut values = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                let q = lo + resolution * Vec2::new(ix as f64, iy as f64);
                values.push(sdf_union(shape, &q));
            }
        }
        Ok(Self {
            resolution,
            origin: lo,
            nx,
            ny,
            values,
        })
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> Vec2 {
        self.origin
    }

    pub fn extents(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn node(&self, ix: usize, iy: usize) -> Vec2 {
        self.origin + self.resolution * Vec2::new(ix as f64, iy as f64)
    }

    pub fn value_at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }

    /// Upper corner of the sampled region.
    pub fn max_corner(&self) -> Vec2 {
        self.node(self.nx - 1, self.ny - 1)
    }

    pub fn contains(&self, q_b: &Vec2) -> bool {
        let hi = self.max_corner();
        q_b.x >= self.origin.x && q_b.y >= self.origin.y && q_b.x <= hi.x && q_b.y <= hi.y
    }

    /// Bilinear value and the gradient of the bilinear patch. Outside the
    /// sampled region, falls back to the analytic field.
    pub fn query(&self, shape: &RobotShape, q_b: &Vec2) -> (f64, Vec2) {
        if !self.contains(q_b) {
            return (
                sdf_union(shape, q_b),
                sdf_gradient(shape, q_b, DEFAULT_GRADIENT_STEP),
            );
        }
        let rel = (q_b - self.origin) / self.resolution;
        let ix = (rel.x.floor() as usize).min(self.nx - 2);
        let iy = (rel.y.floor() as usize).min(self.ny - 2);
        let fx = rel.x - ix as f64;
        let fy = rel.y - iy as f64;
        let v00 = self.value_at(ix, iy);
        let v10 = self.value_at(ix + 1, iy);
        let v01 = self.value_at(ix, iy + 1);
        let v11 = self.value_at(ix + 1, iy + 1);
        let value = (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) + fy * ((1.0 - fx) * v01 + fx * v11);
        let gx = ((1.0 - fy) * (v10 - v00) + fy * (v11 - v01)) / self.resolution;
        let gy = ((1.0 - fx) * (v01 - v00) + fx * (v11 - v10)) / self.resolution;
        (value, Vec2::new(gx, gy))
    }

    /// Little-endian layout: resolution, origin x, origin y (f64), nx, ny
    /// (u64), then the row-major values (f64).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_BYTES + 8 * self.values.len());
        out.extend_from_slice(&self.resolution.to_le_bytes());
        out.extend_from_slice(&self.origin.x.to_le_bytes());
        out.extend_from_slice(&self.origin.y.to_le_bytes());
        out.extend_from_slice(&(self.nx as u64).to_le_bytes());
        out.extend_from_slice(&(self.ny as u64).to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_BYTES {
            return Err(Error::GridCache(format!(
                "{} bytes is shorter than the {HEADER_BYTES}-byte header",
                bytes.len()
            )));
        }
        let word = |k: usize| -> [u8; 8] { bytes[8 * k..8 * k + 8].try_into().unwrap() };
        let resolution = f64::from_le_bytes(word(0));
        let origin = Vec2::new(f64::from_le_bytes(word(1)), f64::from_le_bytes(word(2)));
        let nx = u64::from_le_bytes(word(3));
        let ny = u64::from_le_bytes(word(4));
        if !(resolution > 0.0 && resolution.is_finite()) || nx < 2 || ny < 2 {
            return Err(Error::GridCache(format!(
                "bad header: resolution {resolution}, extents {nx}x{ny}"
            )));
        }
        let count = nx
            .checked_mul(ny)
            .filter(|c| *c <= DEFAULT_CELL_BUDGET)
            .ok_or_else(|| Error::GridCache(format!("extents {nx}x{ny} exceed the cell budget")))?
            as usize;
        let body = &bytes[HEADER_BYTES..];
        if body.len() != 8 * count {
            return Err(Error::GridCache(format!(
                "expected {} value bytes, found {}",
                8 * count,
                body.len()
            )));
        }
        let values = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self {
            resolution,
            origin,
            nx: nx as usize,
            ny: ny as usize,
            values,
        })
    }
}
