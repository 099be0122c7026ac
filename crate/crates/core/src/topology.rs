//! Cone-topology neighbourhoods, finite-sample Cauchy detection and limit extraction.

use serde::Serialize;

use crate::action::{act, ActionSpec};
use crate::error::{Error, Result};
use crate::rational::{simplest_in, Rational, Scalar, ARC_TOL};
use crate::space::{
    point_ray_dist_sq, point_segment_dist_sq, ray_eval_approx, segment_eval_arclength, ApproxSpacePoint,
    BoundaryPoint, SpacePoint,
};
use crate::tree::TreeEnd;
use crate::word::{GroupElement, Word};

/// A point of X or of its boundary, the two kinds of things a geodesic from the base can reach.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Point(SpacePoint),
    Boundary(BoundaryPoint),
}

impl From<SpacePoint> for Target {
    fn from(p: SpacePoint) -> Self {
        Target::Point(p)
    }
}

impl From<BoundaryPoint> for Target {
    fn from(b: BoundaryPoint) -> Self {
        Target::Boundary(b)
    }
}

/// `xi_x(s)`: the point at arclength `s` on the geodesic from `base` towards `x`
/// (a segment stops at its endpoint).
pub fn xi(x: &Target, base: &SpacePoint, s: f64) -> ApproxSpacePoint {
    let b = base.to_approx();
    match x {
        Target::Point(p) => segment_eval_arclength(&b, &p.to_approx(), s),
        Target::Boundary(alpha) => ray_eval_approx(&b, alpha, s),
    }
}

fn outside_ball(x: &Target, base: &SpacePoint, r: f64) -> bool {
    match x {
        Target::Point(p) => p.dist(base) > r,
        Target::Boundary(_) => true,
    }
}

/// Membership in `U(center; r, eps)`: `x` lies outside `B(base, r)` and the geodesics from
/// `base` to `center` and to `x` are closer than `eps` at arclength `r`.
pub fn in_u(center: &BoundaryPoint, r: f64, eps: f64, x: &Target, base: &SpacePoint) -> bool {
    in_u_general(&Target::Boundary(center.clone()), r, eps, x, base)
}

/// [`in_u`] with a center that may also be a point of X, as in the Cauchy-sequence sets.
pub fn in_u_general(center: &Target, r: f64, eps: f64, x: &Target, base: &SpacePoint) -> bool {
    if !outside_ball(x, base, r) {
        return false;
    }
    xi(center, base, r).dist(&xi(x, base, r)) < eps + ARC_TOL
}

/// Membership in `U'(center; r, eps)`: as [`in_u`], measured to the whole image of `xi_x`.
pub fn in_u_prime(center: &BoundaryPoint, r: f64, eps: f64, x: &Target, base: &SpacePoint) -> bool {
    if !outside_ball(x, base, r) {
        return false;
    }
    image_distance(&xi(&Target::Boundary(center.clone()), base, r), x, base) < eps + ARC_TOL
}

/// Distance from `p` to the image of the geodesic from `base` towards `x`.
pub fn image_distance(p: &ApproxSpacePoint, x: &Target, base: &SpacePoint) -> f64 {
    let b = base.to_approx();
    let d2 = match x {
        Target::Point(q) => point_segment_dist_sq(p, &b, &q.to_approx()).0,
        Target::Boundary(alpha) => point_ray_dist_sq(p, &b, alpha).0,
    };
    d2.max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CauchyWitness {
    pub r: f64,
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", content = "witness", rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Violated(CauchyWitness),
}

impl Verdict {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Verdict::Consistent)
    }
}

pub const DEFAULT_R_VALUES: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];

/// Searches, for each `r`, for an index `i0` after which every sample lies in
/// `U(x_{i0}; r, eps0)`. Only indices leaving a tail of at least `max(2, n/4)` samples are
/// candidates. A violation reports the center `i` and the first failing sample `j` of the
/// last candidate. Radii the sample never leaves are skipped: it carries no information there.
pub fn is_cauchy_sample(points: &[SpacePoint], eps0: f64, r_values: &[f64], base: &SpacePoint) -> Verdict {
    let n = points.len();
    if n < 2 {
        return Verdict::Consistent;
    }
    let min_tail = (n / 4).max(2).min(n);
    let targets: Vec<Target> = points.iter().cloned().map(Target::Point).collect();
    let reach = points[n - 1].dist(base);
    for &r in r_values.iter().filter(|&&r| r < reach) {
        let mut witness = None;
        let mut found = false;
        for i0 in 0..=(n - min_tail) {
            match (i0..n).find(|&i| !in_u_general(&targets[i0], r, eps0, &targets[i], base)) {
                None => {
                    found = true;
                    break;
                }
                Some(j) => witness = Some(CauchyWitness { r, i: i0, j }),
            }
        }
        if !found {
            return Verdict::Violated(witness.expect("at least one candidate"));
        }
    }
    Verdict::Consistent
}

/// The shortest eventually periodic end compatible with the finite word `w`: the word must
/// show at least two full periods after the prefix.
fn end_from_prefix(w: &Word) -> Option<TreeEnd> {
    let letters = w.letters();
    let n = letters.len();
    let mut best: Option<(usize, usize, usize)> = None;
    for p in 0..n {
        for c in 1..=((n - p) / 2) {
            let periodic = (p + c..n).all(|i| letters[i] == letters[i - c]);
            if !periodic {
                continue;
            }
            let key = (p + c, c, p);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
    }
    let (_, c, p) = best?;
    TreeEnd::new(&w.prefix(p), &Word::reduce(letters[p..p + c].iter().copied())).ok()
}

/// Slope of the affine law `h = q d + const` seen in the samples, recovered as the simplest
/// rational consistent with the scatter.
fn slope_from_samples(samples: &[(Rational, Rational)]) -> Option<Rational> {
    let (d0, h0) = samples[0];
    let (d1, h1) = *samples.last()?;
    let span = d1 - d0;
    if span <= Rational::from_integer(0) {
        return None;
    }
    let q = (h1 - h0) / span;
    let noise = samples.iter().map(|(d, h)| (*h - h0 - q * (*d - d0)).abs()).max()?;
    if noise == Rational::from_integer(0) {
        return Some(q);
    }
    let w = Rational::from_integer(2) * noise / span;
    Some(simplest_in(&(q - w), &(q + w)))
}

/// The boundary limit of a sampled point sequence, read off from its tail.
pub fn limit_of_points(points: &[SpacePoint], base: &SpacePoint) -> Result<BoundaryPoint> {
    let n = points.len();
    let radius_of = |k: usize| crate::rational::fmt_rational(&Rational::from_integer(k as i128));
    if n < 4 {
        return Err(Error::NotConvergent { radius: radius_of(0) });
    }
    let tail = &points[n / 2..];
    let tree_d: Vec<Rational> = tail.iter().map(|p| p.tree.dist(&base.tree)).collect();
    let head_max = points[..n / 2].iter().map(|p| p.tree.dist(&base.tree)).max().expect("n >= 4");
    let tail_max = *tree_d.iter().max().expect("nonempty tail");
    if tail_max <= head_max {
        // Tree part stalled: a pole if the heights of the tail's last quarter clear its first.
        let q = (tail.len() / 4).max(1);
        let early = &tail[..q];
        let late = &tail[tail.len() - q..];
        let hi = |s: &[SpacePoint]| s.iter().map(|p| p.height).max().expect("nonempty");
        let lo = |s: &[SpacePoint]| s.iter().map(|p| p.height).min().expect("nonempty");
        return if lo(late) > hi(early) {
            Ok(BoundaryPoint::pole(true))
        } else if hi(late) < lo(early) {
            Ok(BoundaryPoint::pole(false))
        } else {
            Err(Error::NotConvergent { radius: crate::rational::fmt_rational(&tail_max) })
        };
    }
    let mut common = tail[0].tree.anchor().clone();
    for p in &tail[1..] {
        common = common.prefix(common.common_prefix_len(p.tree.anchor()));
    }
    let end = end_from_prefix(&common).ok_or_else(|| Error::NotConvergent { radius: radius_of(common.len()) })?;
    let samples: Vec<(Rational, Rational)> =
        points[n / 4..].iter().map(|p| (p.tree.dist(&base.tree), p.height)).collect();
    let slope = slope_from_samples(&samples).ok_or_else(|| Error::NotConvergent { radius: radius_of(common.len()) })?;
    Ok(BoundaryPoint::directional(end, slope))
}

/// The boundary limit of `g_i . base`.
pub fn limit_of_orbit_sequence(seq: &[GroupElement], spec: &ActionSpec, base: &SpacePoint) -> Result<BoundaryPoint> {
    let points: Vec<SpacePoint> = seq.iter().map(|g| act(spec, g, base)).collect();
    limit_of_points(&points, base)
}
