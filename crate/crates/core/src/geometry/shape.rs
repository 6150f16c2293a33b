use serde::{Deserialize, Serialize};

use super::pieces::{union_boundary, Piece};
use crate::{Error, Result, Vec2};

/// A convex building block of a robot footprint, positioned in the body frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Primitive {
    Circle {
        radius: f64,
        #[serde(default)]
        offset: [f64; 2],
    },
    /// Axis-aligned in the body frame.
    Rectangle {
        half_length: f64,
        half_width: f64,
        #[serde(default)]
        offset: [f64; 2],
    },
}

impl Primitive {
    pub fn circle(radius: f64, offset: Vec2) -> Result<Self> {
        let p = Primitive::Circle {
            radius,
            offset: [offset.x, offset.y],
        };
        p.validate()?;
        Ok(p)
    }

    pub fn rectangle(half_length: f64, half_width: f64, offset: Vec2) -> Result<Self> {
        let p = Primitive::Rectangle {
            half_length,
            half_width,
            offset: [offset.x, offset.y],
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Geometry(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match *self {
            Primitive::Circle { radius, .. } => positive("radius", radius)?,
            Primitive::Rectangle {
                half_length,
                half_width,
                ..
            } => {
                positive("half_length", half_length)?;
                positive("half_width", half_width)?;
            }
        }
        let o = self.offset();
        if !(o.x.is_finite() && o.y.is_finite()) {
            return Err(Error::Geometry("primitive offset must be finite".into()));
        }
        Ok(())
    }

    pub fn offset(&self) -> Vec2 {
        match *self {
            Primitive::Circle { offset, .. } | Primitive::Rectangle { offset, .. } => {
                Vec2::new(offset[0], offset[1])
            }
        }
    }

    /// Body-frame bounding box as `(min, max)`.
    pub fn bounds(&self) -> (Vec2, Vec2) {
        let o = self.offset();
        let half = match *self {
            Primitive::Circle { radius, .. } => Vec2::new(radius, radius),
            Primitive::Rectangle {
                half_length,
                half_width,
                ..
            } => Vec2::new(half_length, half_width),
        };
        (o - half, o + half)
    }

    pub fn contains(&self, q_b: &Vec2) -> bool {
        sdf_primitive(self, q_b) < 0.0
    }
}

/// Signed distance from `q_b` to a primitive, negative strictly inside.
pub fn sdf_primitive(prim: &Primitive, q_b: &Vec2) -> f64 {
    let d = q_b - prim.offset();
    match *prim {
        Primitive::Circle { radius, .. } => d.norm() - radius,
        Primitive::Rectangle {
            half_length,
            half_width,
            ..
        } => {
            let dx = d.x.abs() - half_length;
            let dy = d.y.abs() - half_width;
            let outside = dx.max(0.0).hypot(dy.max(0.0));
            outside + dx.max(dy).min(0.0)
        }
    }
}

/// A robot footprint: the union of one or more primitives.
///
/// The boundary of the union is precomputed at construction so that interior
/// distances measure the distance to the true union boundary rather than to
/// edges buried inside an overlapping primitive.
#[derive(Debug, Clone)]
pub struct RobotShape {
    primitives: Vec<Primitive>,
    boundary: Vec<Piece>,
}

impl RobotShape {
    pub fn new(primitives: Vec<Primitive>) -> Result<Self> {
        if primitives.is_empty() {
            return Err(Error::Geometry("robot shape needs at least one primitive".into()));
        }
        for p in &primitives {
            p.validate()?;
        }
        let boundary = union_boundary(&primitives);
        Ok(Self {
            primitives,
            boundary,
        })
    }

    pub fn single(primitive: Primitive) -> Result<Self> {
        Self::new(vec![primitive])
    }

    /// Two overlapping rectangles forming an L, with the body origin at the
    /// center of the long arm.
    pub fn l_shape() -> Self {
        Self::new(vec![
            Primitive::Rectangle {
                half_length: 1.0,
                half_width: 0.25,
                offset: [0.0, 0.0],
            },
            Primitive::Rectangle {
                half_length: 0.25,
                half_width: 1.0,
                offset: [-0.75, 0.75],
            },
        ])
        .expect("L-shape primitives are valid")
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    pub fn bounds(&self) -> (Vec2, Vec2) {
        self.primitives.iter().map(Primitive::bounds).fold(
            (Vec2::repeat(f64::INFINITY), Vec2::repeat(f64::NEG_INFINITY)),
            |(lo, hi), (a, b)| (lo.inf(&a), hi.sup(&b)),
        )
    }

    pub fn contains(&self, q_b: &Vec2) -> bool {
        self.primitives.iter().any(|p| p.contains(q_b))
    }

    /// Closed polylines approximating the outline of each primitive, for
    /// drawing.
    pub fn outlines(&self, arc_segments: usize) -> Vec<Vec<Vec2>> {
        self.primitives
            .iter()
            .map(|p| {
                let o = p.offset();
                match *p {
                    Primitive::Circle { radius, .. } => (0..arc_segments)
                        .map(|k| {
                            let a = std::f64::consts::TAU * k as f64 / arc_segments as f64;
                            o + radius * Vec2::new(a.cos(), a.sin())
                        })
                        .collect(),
                    Primitive::Rectangle {
                        half_length: l,
                        half_width: w,
                        ..
                    } => vec![
                        o + Vec2::new(-l, -w),
                        o + Vec2::new(l, -w),
                        o + Vec2::new(l, w),
                        o + Vec2::new(-l, w),
                    ],
                }
            })
            .collect()
    }
}

/// Signed distance to the union. Outside every primitive this is the minimum
/// of the member distances; inside, it is minus the distance to the union
/// boundary.
pub fn sdf_union(shape: &RobotShape, q_b: &Vec2) -> f64 {
    let min = shape
        .primitives
        .iter()
        .map(|p| sdf_primitive(p, q_b))
        .fold(f64::INFINITY, f64::min);
    if min >= 0.0 || shape.primitives.len() == 1 {
        return min;
    }
    let dist = shape
        .boundary
        .iter()
        .map(|piece| piece.distance(q_b))
        .fold(f64::INFINITY, f64::min);
    -dist
}

/// Central-difference gradient of [`sdf_union`] with step `delta`.
pub fn sdf_gradient(shape: &RobotShape, q_b: &Vec2, delta: f64) -> Vec2 {
    debug_assert!(delta > 0.0);
    let ex = Vec2::new(delta, 0.0);
    let ey = Vec2::new(0.0, delta);
    let gx = sdf_union(shape, &(q_b + ex)) - sdf_union(shape, &(q_b - ex));
    let gy = sdf_union(shape, &(q_b + ey)) - sdf_union(shape, &(q_b - ey));
    Vec2::new(gx, gy) / (2.0 * delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect() -> Primitive {
        Primitive::rectangle(1.0, 0.5, Vec2::zeros()).unwrap()
    }

    #[test]
    fn circle_center() {
        let c = Primitive::circle(1.0, Vec2::zeros()).unwrap();
        assert_eq!(sdf_primitive(&c, &Vec2::zeros()), -1.0);
    }

    #[test]
    fn rectangle_values() {
        assert_eq!(sdf_primitive(&rect(), &Vec2::zeros()), -0.5);
        let corner = sdf_primitive(&rect(), &Vec2::new(2.0, 1.5));
        assert!((corner - 2f64.sqrt()).abs() < 1e-12);
        let inner = sdf_primitive(&rect(), &Vec2::new(0.9, 0.1));
        assert!((inner + 0.1).abs() < 1e-12);
    }

    #[test]
    fn rectangle_is_symmetric() {
        let r = rect();
        let q = Vec2::new(1.3, 0.2);
        let mirrored = [Vec2::new(-1.3, 0.2), Vec2::new(1.3, -0.2), Vec2::new(-1.3, -0.2)];
        for m in mirrored {
            assert_eq!(sdf_primitive(&r, &q), sdf_primitive(&r, &m));
        }
    }

    #[test]
    fn invalid_primitives_rejected() {
        assert!(Primitive::circle(0.0, Vec2::zeros()).is_err());
        assert!(Primitive::rectangle(1.0, -0.1, Vec2::zeros()).is_err());
        assert!(Primitive::circle(f64::NAN, Vec2::zeros()).is_err());
        assert!(RobotShape::new(vec![]).is_err());
    }

    #[test]
    fn single_primitive_union_matches_primitive() {
        let shape = RobotShape::single(rect()).unwrap();
        for q in [Vec2::new(0.2, 0.1), Vec2::new(3.0, -2.0), Vec2::new(-0.99, 0.0)] {
            assert_eq!(sdf_union(&shape, &q), sdf_primitive(&rect(), &q));
        }
    }

    #[test]
    fn l_shape_values() {
        let l = RobotShape::l_shape();
        assert!((sdf_union(&l, &Vec2::zeros()) + 0.25).abs() < 1e-12);
        assert!((sdf_union(&l, &Vec2::new(5.0, 0.0)) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn l_shape_inner_corner_uses_union_boundary() {
        // Inside the overlap, the nearest union boundary point is the
        // reflex corner at (-0.5, 0.25); both member distances are 0.05.
        let l = RobotShape::l_shape();
        let h = sdf_union(&l, &Vec2::new(-0.55, 0.2));
        assert!((h + 0.05f64.hypot(0.05)).abs() < 1e-12, "h = {h}");
    }

    #[test]
    fn gradients_in_smooth_regions() {
        let c = RobotShape::single(Primitive::circle(1.0, Vec2::zeros()).unwrap()).unwrap();
        let g = sdf_gradient(&c, &Vec2::new(2.0, 0.0), 1e-4);
        assert!((g - Vec2::new(1.0, 0.0)).norm() < 1e-6);
        let r = RobotShape::single(rect()).unwrap();
        let g = sdf_gradient(&r, &Vec2::new(2.0, 0.0), 1e-4);
        assert!((g - Vec2::new(1.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn abutting_rectangles_have_no_interior_seam() {
        let shape = RobotShape::new(vec![
            Primitive::rectangle(0.5, 0.5, Vec2::new(-0.5, 0.0)).unwrap(),
            Primitive::rectangle(0.5, 0.5, Vec2::new(0.5, 0.0)).unwrap(),
        ])
        .unwrap();
        // The shared edge x = 0 is interior; the point is 0.5 from top/bottom.
        let h = sdf_union(&shape, &Vec2::new(0.01, 0.0));
        assert!((h + 0.5).abs() < 1e-12, "h = {h}");
    }
}
