//! Integer arithmetic for the point-to-segment distance between orbit points.
//!
//! Orbit points sit at tree vertices with heights in a lattice `Z / dn`, so after scaling
//! heights by `dn` every quantity in the piecewise-quadratic minimization is an integer and
//! the minimum is a fraction with small numerator and denominator.

use std::cmp::Ordering;

use crate::rational::Rational;

/// A nonnegative fraction `num / den` with `den > 0`, not necessarily reduced.
#[derive(Debug, Clone, Copy)]
pub struct Frac {
    pub num: i128,
    pub den: i128,
}

impl Frac {
    pub const ZERO: Frac = Frac { num: 0, den: 1 };

    pub fn from_rational(q: &Rational) -> Frac {
        Frac { num: *q.numer(), den: *q.denom() }
    }

    pub fn to_rational(self) -> Rational {
        Rational::new(self.num, self.den)
    }

    pub fn cmp_frac(&self, other: &Frac) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }

    pub fn le(&self, other: &Frac) -> bool {
        self.cmp_frac(other) != Ordering::Greater
    }
}

impl PartialEq for Frac {
    fn eq(&self, other: &Frac) -> bool {
        self.cmp_frac(other) == Ordering::Equal
    }
}

/// Minimum over `tau in [0, tau_max]` of `(k (a + tau))^2 + (b + m tau)^2`, `k > 0`.
fn piece(k: i128, a: i128, b: i128, m: i128, tau_max: i128) -> Frac {
    let k2 = k * k;
    let at = |tau: i128| {
        let x = k * (a + tau);
        let y = b + m * tau;
        Frac { num: x * x + y * y, den: 1 }
    };
    // vertex at tau* = -(k^2 a + m b) / (k^2 + m^2)
    let top = -(k2 * a + m * b);
    let bottom = k2 + m * m;
    if top <= 0 {
        at(0)
    } else if top >= tau_max * bottom {
        at(tau_max)
    } else {
        let cross = a * m - b;
        Frac { num: k2 * cross * cross, den: bottom }
    }
}

/// Squared distance from an orbit vertex to an orbit segment.
///
/// The segment runs over `d` tree edges; the point projects to tree parameter `s_star` at
/// tree distance `delta`. Heights are scaled by `dn`: `c0` is the segment start height minus
/// the point height and `dh` the height rise along the segment.
pub fn seg_dist_sq(d: i128, s_star: i128, delta: i128, dn: i128, c0: i128, dh: i128) -> Frac {
    if d == 0 {
        let c1 = c0 + dh;
        let h2 = if (c0 <= 0 && c1 >= 0) || (c0 >= 0 && c1 <= 0) { 0 } else { (c0 * c0).min(c1 * c1) };
        let t = dn * delta;
        return Frac { num: t * t + h2, den: dn * dn };
    }
    let k = dn * d;
    let b = c0 * d + dh * s_star;
    let ahead = piece(k, delta, b, dh, d - s_star);
    let behind = piece(k, delta, b, -dh, s_star);
    let best = if ahead.le(&behind) { ahead } else { behind };
    Frac { num: best.num, den: best.den * k * k }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use crate::space::{dist_point_to_segment, GeodesicSegment, SpacePoint};
    use crate::word::Word;
    use proptest::prelude::*;

    #[test]
    fn canonical_family() {
        // (a^i, 0) against [(e, 0), (a^i b^i, 2i)]: d = 2i, s* = i, delta = 0.
        for i in 1..=16 {
            let v = seg_dist_sq(2 * i, i, 0, 1, 0, 2 * i);
            assert_eq!(v.to_rational(), rat(i * i, 2));
        }
        assert_eq!(seg_dist_sq(0, 0, 1, 2, -3, 1).to_rational(), int(1) + rat(4, 4));
        assert_eq!(seg_dist_sq(0, 0, 0, 1, -3, 5).to_rational(), int(0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        /// Cross-check against the exact rational route on explicit tree geometry.
        #[test]
        fn matches_rational_route(
            d in 0i128..7, s_frac in 0i128..=6, delta in 0i128..3,
            dn in 1i128..4, h0 in -20i128..20, h1 in -20i128..20, hx in -20i128..20,
        ) {
            let s_star = if d == 0 { 0 } else { s_frac % (d + 1) };
            // Segment along a^d, point hanging off vertex a^s* by a b-branch of length delta.
            let p = SpacePoint::vertex(Word::identity(), rat(h0, dn));
            let q = SpacePoint::vertex(Word::parse(&"a".repeat(d as usize)).unwrap(), rat(h1, dn));
            let xw = format!("{}{}", "a".repeat(s_star as usize), "b".repeat(delta as usize));
            let x = SpacePoint::vertex(Word::parse(&xw).unwrap(), rat(hx, dn));
            let (want, _) = dist_point_to_segment(&x, &GeodesicSegment::new(p, q));
            let got = seg_dist_sq(d, s_star, delta, dn, h0 - hx, h1 - h0);
            prop_assert_eq!(got.to_rational(), want);
        }
    }
}
