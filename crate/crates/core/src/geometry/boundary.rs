use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec2};

/// Obstacle outline in its own local frame (centered on the obstacle
/// position).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObstacleShape {
    Circle { radius: f64 },
    /// Simple polygon, vertices in order.
    Polygon { vertices: Vec<[f64; 2]> },
}

impl ObstacleShape {
    /// Axis-aligned square with side `side` centered on the local origin.
    pub fn square(side: f64) -> Self {
        let h = 0.5 * side;
        ObstacleShape::Polygon {
            vertices: vec![[-h, -h], [h, -h], [h, h], [-h, h]],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ObstacleShape::Circle { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::Geometry(format!(
                        "obstacle radius must be positive, got {radius}"
                    )));
                }
            }
            ObstacleShape::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::Geometry(format!(
                        "polygon needs at least 3 vertices, got {}",
                        vertices.len()
                    )));
                }
                if vertices.iter().flatten().any(|c| !c.is_finite()) {
                    return Err(Error::Geometry("polygon vertices must be finite".into()));
                }
                if self.perimeter() <= 0.0 {
                    return Err(Error::Geometry("polygon has zero perimeter".into()));
                }
            }
        }
        Ok(())
    }

    fn vertices(&self) -> Vec<Vec2> {
        match self {
            ObstacleShape::Polygon { vertices } => {
                vertices.iter().map(|v| Vec2::new(v[0], v[1])).collect()
            }
            ObstacleShape::Circle { .. } => Vec::new(),
        }
    }

    pub fn perimeter(&self) -> f64 {
        match self {
            ObstacleShape::Circle { radius } => TAU * radius,
            ObstacleShape::Polygon { .. } => {
                let v = self.vertices();
                (0..v.len()).map(|k| (v[(k + 1) % v.len()] - v[k]).norm()).sum()
            }
        }
    }

    /// Signed distance in the local frame, negative inside.
    pub fn sdf(&self, q: &Vec2) -> f64 {
        match self {
            ObstacleShape::Circle { radius } => q.norm() - radius,
            ObstacleShape::Polygon { .. } => {
                let v = self.vertices();
                let n = v.len();
                let mut dist = f64::INFINITY;
                let mut inside = false;
                for k in 0..n {
                    let a = v[k];
                    let b = v[(k + 1) % n];
                    let d = b - a;
                    let len2 = d.norm_squared();
                    let s = if len2 > 0.0 {
                        ((q - a).dot(&d) / len2).clamp(0.0, 1.0)
                    } else {
                        0.0
                    };
                    dist = dist.min((q - (a + s * d)).norm());
                    if (a.y > q.y) != (b.y > q.y) {
                        let x_cross = a.x + (q.y - a.y) * d.x / d.y;
                        if q.x < x_cross {
                            inside = !inside;
                        }
                    }
                }
                if inside {
                    -dist
                } else {
                    dist
                }
            }
        }
    }

    /// Closed outline for drawing (circles approximated by `arc_segments`).
    pub fn outline(&self, arc_segments: usize) -> Vec<Vec2> {
        match self {
            ObstacleShape::Circle { radius } => (0..arc_segments)
                .map(|k| {
                    let a = TAU * k as f64 / arc_segments as f64;
                    *radius * Vec2::new(a.cos(), a.sin())
                })
                .collect(),
            ObstacleShape::Polygon { .. } => self.vertices(),
        }
    }
}

/// Sampled boundary points of one obstacle.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionPointSet {
    pub obstacle_id: usize,
    pub points: Vec<Vec2>,
}

/// `m` points evenly spaced by arc length along the outline. Circles start at
/// angle 0; polygons start at vertex 0 and follow the vertex order.
pub fn sample_boundary(shape: &ObstacleShape, m: usize) -> Result<CollisionPointSet> {
    if m < 3 {
        return Err(Error::Geometry(format!("need at least 3 collision points, got {m}")));
    }
    shape.validate()?;
    let points = match shape {
        ObstacleShape::Circle { radius } => (0..m)
            .map(|k| {
                let a = TAU * k as f64 / m as f64;
                *radius * Vec2::new(a.cos(), a.sin())
            })
            .collect(),
        ObstacleShape::Polygon { .. } => {
            let v = shape.vertices();
            let n = v.len();
            let spacing = shape.perimeter() / m as f64;
            let mut points = Vec::with_capacity(m);
            let mut edge = 0;
            let mut edge_start = 0.0;
            for k in 0..m {
                let target = k as f64 * spacing;
                loop {
                    let len = (v[(edge + 1) % n] - v[edge]).norm();
                    if target <= edge_start + len || edge == n - 1 {
                        let a = v[edge];
                        let b = v[(edge + 1) % n];
                        let s = if len > 0.0 {
                            ((target - edge_start) / len).clamp(0.0, 1.0)
                        } else {
                            0.0
                        };
                        points.push(a + s * (b - a));
                        break;
                    }
                    edge_start += len;
                    edge += 1;
                }
            }
            points
        }
    };
    Ok(CollisionPointSet {
        obstacle_id: 0,
        points,
    })
}
