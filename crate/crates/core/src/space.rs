//! The product X = T x R with the l2 metric, its geodesics and its boundary.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{fmt_rational, min_quadratic, parse_rational, Rational, Scalar};
use crate::tree::{GTreePoint, TreeEnd};
use crate::word::Word;

#[derive(Debug, Clone, PartialEq)]
pub struct GSpacePoint<S> {
    pub tree: GTreePoint<S>,
    pub height: S,
}

pub type SpacePoint = GSpacePoint<Rational>;
pub type ApproxSpacePoint = GSpacePoint<f64>;

impl<S: Scalar> GSpacePoint<S> {
    pub fn new(tree: GTreePoint<S>, height: S) -> Self {
        GSpacePoint { tree, height }
    }

    pub fn vertex(w: Word, height: S) -> Self {
        GSpacePoint { tree: GTreePoint::vertex(w), height }
    }

    pub fn dist_sq(&self, other: &Self) -> S {
        let dt = self.tree.dist(&other.tree);
        let dh = self.height - other.height;
        dt * dt + dh * dh
    }

    pub fn dist(&self, other: &Self) -> f64 {
        self.dist_sq(other).to_f64().max(0.0).sqrt()
    }

    pub fn to_approx(&self) -> ApproxSpacePoint {
        GSpacePoint { tree: self.tree.to_approx(), height: self.height.to_f64() }
    }
}

impl SpacePoint {
    pub fn origin() -> SpacePoint {
        SpacePoint::vertex(Word::identity(), Rational::from_integer(0))
    }

    /// Parses `(<treepoint>, h=<rational>)`.
    pub fn parse(s: &str) -> Result<SpacePoint> {
        let bad = || Error::Parse(format!("invalid space point {s:?}"));
        let inner = s.trim().strip_prefix('(').and_then(|x| x.strip_suffix(')')).ok_or_else(bad)?;
        let (t, h) = inner.split_once(',').ok_or_else(bad)?;
        let h = h.trim();
        let h = h.strip_prefix("h=").unwrap_or(h);
        Ok(SpacePoint::new(crate::tree::TreePoint::parse(t)?, parse_rational(h)?))
    }
}

impl fmt::Display for SpacePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, h={})", self.tree, fmt_rational(&self.height))
    }
}

impl fmt::Display for ApproxSpacePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, h={})", self.tree, self.height)
    }
}

/// A point of the boundary in join coordinates.
///
/// `slope` is the height gained per unit of tree distance, so the join angle is `atan(slope)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BoundaryPoint {
    Directional { end: TreeEnd, slope: Rational },
    Pole { sign: i8 },
}

impl BoundaryPoint {
    pub fn directional(end: TreeEnd, slope: Rational) -> Self {
        BoundaryPoint::Directional { end, slope }
    }

    pub fn pole(positive: bool) -> Self {
        BoundaryPoint::Pole { sign: if positive { 1 } else { -1 } }
    }

    /// Join angle in radians.
    pub fn angle(&self) -> f64 {
        match self {
            BoundaryPoint::Directional { slope, .. } => slope.to_f64().atan(),
            BoundaryPoint::Pole { sign } => f64::from(*sign) * std::f64::consts::FRAC_PI_2,
        }
    }

    pub fn end(&self) -> Option<&TreeEnd> {
        match self {
            BoundaryPoint::Directional { end, .. } => Some(end),
            BoundaryPoint::Pole { .. } => None,
        }
    }

    pub fn slope(&self) -> Option<Rational> {
        match self {
            BoundaryPoint::Directional { slope, .. } => Some(*slope),
            BoundaryPoint::Pole { .. } => None,
        }
    }

    /// Parses `[<end>, slope=<rational>]`, `[<end>, <rational>]` or `[pole, +]`.
    pub fn parse(s: &str) -> Result<BoundaryPoint> {
        let bad = || Error::Parse(format!("invalid boundary point {s:?}"));
        let inner = s.trim().strip_prefix('[').and_then(|x| x.strip_suffix(']')).ok_or_else(bad)?;
        let (left, right) = inner.rsplit_once(',').ok_or_else(bad)?;
        let (left, right) = (left.trim(), right.trim());
        if left == "pole" {
            return match right {
                "+" | "+1" => Ok(BoundaryPoint::pole(true)),
                "-" | "-1" => Ok(BoundaryPoint::pole(false)),
                _ => Err(bad()),
            };
        }
        let slope = parse_rational(right.strip_prefix("slope=").unwrap_or(right))?;
        Ok(BoundaryPoint::directional(TreeEnd::parse(left)?, slope))
    }
}

impl fmt::Display for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryPoint::Directional { end, slope } => write!(f, "[{end}, slope={}]", fmt_rational(slope)),
            BoundaryPoint::Pole { sign } => write!(f, "[pole, {}]", if *sign > 0 { '+' } else { '-' }),
        }
    }
}

impl FromStr for BoundaryPoint {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BoundaryPoint::parse(s)
    }
}

impl Serialize for BoundaryPoint {
    fn serialize<Z: Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicSegment {
    pub p: SpacePoint,
    pub q: SpacePoint,
}

impl GeodesicSegment {
    pub fn new(p: SpacePoint, q: SpacePoint) -> Self {
        GeodesicSegment { p, q }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicRay {
    pub base: SpacePoint,
    pub target: BoundaryPoint,
}

impl GeodesicRay {
    pub fn new(base: SpacePoint, target: BoundaryPoint) -> Self {
        GeodesicRay { base, target }
    }
}

pub fn dist_sq(p: &SpacePoint, q: &SpacePoint) -> Rational {
    p.dist_sq(q)
}

pub fn dist(p: &SpacePoint, q: &SpacePoint) -> f64 {
    p.dist(q)
}

/// The point `seg(t)`, affine in both factors.
pub fn segment_eval(seg: &GeodesicSegment, t: Rational) -> Result<SpacePoint> {
    let one = Rational::from_integer(1);
    if t < Rational::from_integer(0) || t > one {
        return Err(Error::out_of_range(&t, &one));
    }
    Ok(segment_eval_generic(&seg.p, &seg.q, t))
}

pub fn segment_eval_generic<S: Scalar>(p: &GSpacePoint<S>, q: &GSpacePoint<S>, t: S) -> GSpacePoint<S> {
    let d = p.tree.dist(&q.tree);
    GSpacePoint {
        tree: p.tree.geodesic_eval_unchecked(&q.tree, t * d),
        height: p.height + t * (q.height - p.height),
    }
}

/// The point at arclength `s` from `p` towards `q`, clamped to the segment.
pub fn segment_eval_arclength(p: &ApproxSpacePoint, q: &ApproxSpacePoint, s: f64) -> ApproxSpacePoint {
    let len = p.dist(q);
    if len == 0.0 {
        return p.clone();
    }
    segment_eval_generic(p, q, (s / len).clamp(0.0, 1.0))
}

/// Exact ray point after advancing `tau` in the tree (or in height, for a pole).
pub fn ray_eval_tree_param(ray: &GeodesicRay, tau: Rational) -> SpacePoint {
    ray_eval_param_generic(&ray.base, &ray.target, tau)
}

pub fn ray_eval_param_generic<S: Scalar>(base: &GSpacePoint<S>, target: &BoundaryPoint, tau: S) -> GSpacePoint<S> {
    match target {
        BoundaryPoint::Directional { end, slope } => GSpacePoint {
            tree: base.tree.ray_eval(end, tau),
            height: base.height + S::from_rational(slope) * tau,
        },
        BoundaryPoint::Pole { sign } => GSpacePoint {
            tree: base.tree.clone(),
            height: base.height + S::from_int(i64::from(*sign)) * tau,
        },
    }
}

/// Tree parameter reached after arclength `s`.
pub fn arclength_to_tree_param(target: &BoundaryPoint, s: f64) -> f64 {
    match target {
        BoundaryPoint::Directional { slope, .. } => {
            let v = slope.to_f64();
            s / (1.0 + v * v).sqrt()
        }
        BoundaryPoint::Pole { .. } => s,
    }
}

/// The ray point at arclength `s`; floating point with absolute error far below [`crate::rational::ARC_TOL`].
pub fn ray_eval(ray: &GeodesicRay, s: f64) -> ApproxSpacePoint {
    ray_eval_approx(&ray.base.to_approx(), &ray.target, s)
}

pub fn ray_eval_approx(base: &ApproxSpacePoint, target: &BoundaryPoint, s: f64) -> ApproxSpacePoint {
    ray_eval_param_generic(base, target, arclength_to_tree_param(target, s))
}

/// Minimizes `(alpha + beta t)^2 + (gamma + eta t)^2` over `[lo, hi]`.
fn piece_min<S: Scalar>(alpha: S, beta: S, gamma: S, eta: S, lo: S, hi: Option<S>) -> (S, S) {
    let two = S::from_int(2);
    let a = beta * beta + eta * eta;
    let b = two * (alpha * beta + gamma * eta);
    let c = alpha * alpha + gamma * gamma;
    if a == S::zero() {
        return (c, lo);
    }
    min_quadratic(a, b, c, lo, hi)
}

fn better<S: Scalar>(a: (S, S), b: (S, S)) -> (S, S) {
    if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

/// `(d^2, t*)`: exact squared distance from `x` to `[p, q]` and the smallest minimizing
/// parameter `t* in [0, 1]`.
///
/// With tree parameter `s`, the tree distance is `delta + |s - s*|`, so `d^2` is a
/// quadratic on each side of `s*`.
pub fn point_segment_dist_sq<S: Scalar>(x: &GSpacePoint<S>, p: &GSpacePoint<S>, q: &GSpacePoint<S>) -> (S, S) {
    let zero = S::zero();
    let one = S::one();
    let d = p.tree.dist(&q.tree);
    let dh = q.height - p.height;
    let gamma = p.height - x.height;
    if d == zero {
        let delta = x.tree.dist(&p.tree);
        return piece_min(delta, zero, gamma, dh, zero, Some(one));
    }
    let (delta, s_star) = x.tree.project_to_geodesic(&p.tree, &q.tree);
    let t_star = s_star / d;
    // tree distance on [0, t*]: delta + s* - d t; on [t*, 1]: delta - s* + d t
    let left = piece_min(delta + s_star, -d, gamma, dh, zero, Some(t_star));
    let right = piece_min(delta - s_star, d, gamma, dh, t_star, Some(one));
    better(left, right)
}

pub fn dist_point_to_segment(x: &SpacePoint, seg: &GeodesicSegment) -> (Rational, Rational) {
    point_segment_dist_sq(x, &seg.p, &seg.q)
}

/// Exact test of `[p, q]` meeting the closed ball `B(center, radius)`.
pub fn segment_meets_ball(seg: &GeodesicSegment, center: &SpacePoint, radius: &Rational) -> bool {
    *radius >= Rational::from_integer(0) && dist_point_to_segment(center, seg).0 <= radius * radius
}

/// `(d^2, tau*)`: squared distance from `x` to the ray from `base` to `target`, with the
/// minimizing tree parameter (height parameter for poles).
pub fn point_ray_dist_sq<S: Scalar>(x: &GSpacePoint<S>, base: &GSpacePoint<S>, target: &BoundaryPoint) -> (S, S) {
    let zero = S::zero();
    let gamma = base.height - x.height;
    match target {
        BoundaryPoint::Pole { sign } => {
            let delta = x.tree.dist(&base.tree);
            piece_min(delta, zero, gamma, S::from_int(i64::from(*sign)), zero, None)
        }
        BoundaryPoint::Directional { end, slope } => {
            let v = S::from_rational(slope);
            let (delta, s_star) = x.tree.project_to_ray(&base.tree, end);
            let left = piece_min(delta + s_star, -S::one(), gamma, v, zero, Some(s_star));
            let right = piece_min(delta - s_star, S::one(), gamma, v, s_star, None);
            better(left, right)
        }
    }
}

/// Rays are asymptotic exactly when their join coordinates agree.
pub fn asymptotic(r1: &GeodesicRay, r2: &GeodesicRay) -> bool {
    r1.target == r2.target
}
