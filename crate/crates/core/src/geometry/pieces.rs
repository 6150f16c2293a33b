//! Exact boundary of a union of primitives as clipped segments and arcs.

use std::f64::consts::TAU;

use super::shape::{sdf_primitive, Primitive};
use crate::Vec2;

const ON_CURVE_EPS: f64 = 1e-12;
const PROBE: f64 = 1e-7;
const MIN_SPAN: f64 = 1e-12;
const SHARED_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub(crate) enum Piece {
    Segment { a: Vec2, b: Vec2 },
    /// Counter-clockwise arc from angle `start` spanning `sweep` radians.
    Arc {
        center: Vec2,
        radius: f64,
        start: f64,
        sweep: f64,
    },
}

fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

fn wrap_tau(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl Piece {
    fn point_at(&self, s: f64) -> Vec2 {
        match *self {
            Piece::Segment { a, b } => a + s * (b - a),
            Piece::Arc {
                center,
                radius,
                start,
                sweep,
            } => {
                let ang = start + s * sweep;
                center + radius * Vec2::new(ang.cos(), ang.sin())
            }
        }
    }

    /// Outward normal of the owning primitive at parameter `s`.
    fn normal_at(&self, s: f64) -> Vec2 {
        match *self {
            Piece::Segment { a, b } => {
                let d = b - a;
                Vec2::new(d.y, -d.x).normalize()
            }
            Piece::Arc { start, sweep, .. } => {
                let ang = start + s * sweep;
                Vec2::new(ang.cos(), ang.sin())
            }
        }
    }

    fn sub(&self, s0: f64, s1: f64) -> Piece {
        match *self {
            Piece::Segment { .. } => Piece::Segment {
                a: self.point_at(s0),
                b: self.point_at(s1),
            },
            Piece::Arc {
                center,
                radius,
                start,
                sweep,
            } => Piece::Arc {
                center,
                radius,
                start: start + s0 * sweep,
                sweep: (s1 - s0) * sweep,
            },
        }
    }

    /// Parameter of a point known to lie (approximately) on this piece.
    fn param_of(&self, q: &Vec2) -> Option<f64> {
        match *self {
            Piece::Segment { a, b } => {
                let d = b - a;
                let len2 = d.norm_squared();
                let s = (q - a).dot(&d) / len2;
                let foot = a + s * d;
                let tol = ON_CURVE_EPS.max(1e-9 * len2.sqrt());
                if (-1e-12..=1.0 + 1e-12).contains(&s) && (q - foot).norm() <= tol {
                    Some(s.clamp(0.0, 1.0))
                } else {
                    None
                }
            }
            Piece::Arc {
                center,
                radius,
                start,
                sweep,
            } => {
                let r = q - center;
                if (r.norm() - radius).abs() > 1e-9 * radius.max(1.0) {
                    return None;
                }
                let rel = wrap_tau(r.y.atan2(r.x) - start);
                if rel <= sweep + 1e-12 {
                    Some((rel / sweep).clamp(0.0, 1.0))
                } else {
                    None
                }
            }
        }
    }

    pub(crate) fn distance(&self, q: &Vec2) -> f64 {
        match *self {
            Piece::Segment { a, b } => {
                let d = b - a;
                let s = ((q - a).dot(&d) / d.norm_squared()).clamp(0.0, 1.0);
                (q - (a + s * d)).norm()
            }
            Piece::Arc {
                center,
                radius,
                start,
                sweep,
            } => {
                let r = q - center;
                let rel = wrap_tau(r.y.atan2(r.x) - start);
                if sweep >= TAU || rel <= sweep {
                    (r.norm() - radius).abs()
                } else {
                    let e0 = self.point_at(0.0);
                    let e1 = self.point_at(1.0);
                    (q - e0).norm().min((q - e1).norm())
                }
            }
        }
    }
}

fn base_pieces(prim: &Primitive) -> Vec<Piece> {
    let o = prim.offset();
    match *prim {
        Primitive::Circle { radius, .. } => vec![Piece::Arc {
            center: o,
            radius,
            start: 0.0,
            sweep: TAU,
        }],
        Primitive::Rectangle {
            half_length: l,
            half_width: w,
            ..
        } => {
            let c = corners(o, l, w);
            (0..4)
                .map(|k| Piece::Segment {
                    a: c[k],
                    b: c[(k + 1) % 4],
                })
                .collect()
        }
    }
}

/// Counter-clockwise corners starting bottom-left.
fn corners(o: Vec2, l: f64, w: f64) -> [Vec2; 4] {
    [
        o + Vec2::new(-l, -w),
        o + Vec2::new(l, -w),
        o + Vec2::new(l, w),
        o + Vec2::new(-l, w),
    ]
}

fn line_circle(a: &Vec2, b: &Vec2, center: &Vec2, radius: f64) -> Vec<Vec2> {
    let d = b - a;
    let f = a - center;
    let qa = d.norm_squared();
    let qb = 2.0 * f.dot(&d);
    let qc = f.norm_squared() - radius * radius;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)]
        .into_iter()
        .filter(|t| (-1e-12..=1.0 + 1e-12).contains(t))
        .map(|t| a + t * d)
        .collect()
}

fn circle_circle(c1: &Vec2, r1: f64, c2: &Vec2, r2: f64) -> Vec<Vec2> {
    let d = c2 - c1;
    let dist = d.norm();
    if dist == 0.0 || dist > r1 + r2 || dist < (r1 - r2).abs() {
        return Vec::new();
    }
    let a = (r1 * r1 - r2 * r2 + dist * dist) / (2.0 * dist);
    let h = (r1 * r1 - a * a).max(0.0).sqrt();
    let mid = c1 + a * d / dist;
    let perp = Vec2::new(-d.y, d.x) / dist;
    vec![mid + h * perp, mid - h * perp]
}

fn intersections(p: &Piece, q: &Piece) -> Vec<Vec2> {
    match (*p, *q) {
        (Piece::Segment { a, b }, Piece::Segment { a: c, b: d }) => {
            let e = b - a;
            let f = d - c;
            let denom = cross(&e, &f);
            if denom.abs() < 1e-15 {
                return Vec::new();
            }
            let s = cross(&(c - a), &f) / denom;
            let t = cross(&(c - a), &e) / denom;
            if (0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&t) {
                vec![a + s * e]
            } else {
                Vec::new()
            }
        }
        (Piece::Segment { a, b }, Piece::Arc { center, radius, .. })
        | (Piece::Arc { center, radius, .. }, Piece::Segment { a, b }) => {
            line_circle(&a, &b, &center, radius)
        }
        (
            Piece::Arc {
                center: c1,
                radius: r1,
                ..
            },
            Piece::Arc {
                center: c2,
                radius: r2,
                ..
            },
        ) => circle_circle(&c1, r1, &c2, r2),
    }
}

/// Boundary of the union: every primitive boundary split at its crossings
/// with the others, keeping only the parts not covered by another primitive.
pub(crate) fn union_boundary(prims: &[Primitive]) -> Vec<Piece> {
    let bases: Vec<Vec<Piece>> = prims.iter().map(base_pieces).collect();
    let mut out = Vec::new();
    for (i, own) in bases.iter().enumerate() {
        for piece in own {
            let mut cuts = vec![0.0, 1.0];
            for (j, other) in bases.iter().enumerate() {
                if i == j {
                    continue;
                }
                for op in other {
                    for x in intersections(piece, op) {
                        cuts.extend(piece.param_of(&x));
                    }
                    if let Piece::Segment { a, .. } = op {
                        cuts.extend(piece.param_of(a));
                    }
                }
            }
            cuts.sort_by(f64::total_cmp);
            cuts.dedup_by(|a, b| (*a - *b).abs() < MIN_SPAN);
            for w in cuts.windows(2) {
                let (s0, s1) = (w[0], w[1]);
                if s1 - s0 < MIN_SPAN {
                    continue;
                }
                let mid = 0.5 * (s0 + s1);
                let probe = piece.point_at(mid) + PROBE * piece.normal_at(mid);
                let covered = prims
                    .iter()
                    .enumerate()
                    .any(|(j, pj)| j != i && sdf_primitive(pj, &probe) < 0.0);
                // Coincident with an earlier primitive's boundary on the same side.
                let shared = prims[..i].iter().any(|pj| {
                    sdf_primitive(pj, &piece.point_at(mid)).abs() < SHARED_EPS
                        && sdf_primitive(pj, &probe) > 0.0
                });
                if !covered && !shared {
                    out.push(piece.sub(s0, s1));
                }
            }
        }
    }
    out
}
