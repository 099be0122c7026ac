//! The Cayley tree T of F2 with unit edges.
//!
//! A point is named by the vertex word at the far end of its edge (its anchor) and the
//! distance travelled along that edge from the parent vertex. Points of the tree are
//! generic over [`Scalar`] so that the same formulas serve exact rational work and the
//! floating-point arclength evaluations.

use std::fmt;

use crate::error::{Error, Result};
use crate::rational::{fmt_rational, parse_rational, Rational, Scalar};
use crate::word::{Letter, Word};

/// An end of T: the eventually periodic infinite reduced word `prefix . period^inf`.
///
/// Canonical: the period is cyclically reduced and primitive, the junction does not
/// cancel, and the prefix is as short as possible.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TreeEnd {
    prefix: Word,
    period: Word,
}

/// Length of the common initial segment of two ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PrefixLen {
    Finite(usize),
    Infinite,
}

fn primitive_root(c: &[Letter]) -> Vec<Letter> {
    let n = c.len();
    for d in 1..=n {
        if n.is_multiple_of(d) && (0..n).all(|i| c[i] == c[i % d]) {
            return c[..d].to_vec();
        }
    }
    c.to_vec()
}

impl TreeEnd {
    /// The end `prefix . period^inf` for arbitrary words, canonicalized.
    pub fn new(prefix: &Word, period: &Word) -> Result<TreeEnd> {
        let (u, c) = period.cyclic_reduce();
        if c.is_empty() {
            return Err(Error::EmptyPeriod);
        }
        let mut head: Vec<Letter> = prefix.mul(&u).letters().to_vec();
        let mut cyc = primitive_root(c.letters());
        while let Some(&last) = head.last() {
            if last == cyc[0].inverse() {
                head.pop();
                cyc.rotate_left(1);
            } else {
                break;
            }
        }
        while let Some(&last) = head.last() {
            if last == *cyc.last().unwrap() {
                head.pop();
                cyc.rotate_right(1);
            } else {
                break;
            }
        }
        Ok(TreeEnd { prefix: Word::from_reduced(head), period: Word::from_reduced(cyc) })
    }

    pub fn prefix(&self) -> &Word {
        &self.prefix
    }

    pub fn period(&self) -> &Word {
        &self.period
    }

    pub fn letter_at(&self, i: usize) -> Letter {
        let p = self.prefix.len();
        if i < p {
            self.prefix.letters()[i]
        } else {
            self.period.letters()[(i - p) % self.period.len()]
        }
    }

    /// The vertex at depth `n` along this end.
    pub fn prefix_word(&self, n: usize) -> Word {
        Word::from_reduced((0..n).map(|i| self.letter_at(i)).collect())
    }

    /// Image of the end under left multiplication by `w`.
    pub fn left_mul(&self, w: &Word) -> TreeEnd {
        TreeEnd::new(&w.mul(&self.prefix), &self.period).expect("period is nonempty")
    }

    /// Number of leading letters of `w` that agree with this end.
    pub fn agreement_with(&self, w: &Word) -> usize {
        w.letters().iter().enumerate().take_while(|(i, l)| **l == self.letter_at(*i)).count()
    }

    pub fn common_prefix_length(&self, other: &TreeEnd) -> PrefixLen {
        if self == other {
            return PrefixLen::Infinite;
        }
        // Distinct eventually periodic words differ before this bound.
        let bound = self.prefix.len() + other.prefix.len() + 2 * (self.period.len() + other.period.len()) + 1;
        let n = (0..bound).take_while(|&i| self.letter_at(i) == other.letter_at(i)).count();
        PrefixLen::Finite(n)
    }

    pub fn parse(s: &str) -> Result<TreeEnd> {
        let s = s.trim();
        let body = s
            .strip_suffix("^inf")
            .ok_or_else(|| Error::Parse(format!("tree end {s:?} must end in ^inf")))?;
        if let Some(open) = body.find('(') {
            let close = body
                .strip_suffix(')')
                .ok_or_else(|| Error::Parse(format!("unbalanced parentheses in {s:?}")))?;
            let prefix = Word::parse(&close[..open])?;
            let period = Word::parse(&close[open + 1..])?;
            TreeEnd::new(&prefix, &period)
        } else {
            TreeEnd::new(&Word::identity(), &Word::parse(body)?)
        }
    }
}

impl fmt::Display for TreeEnd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})^inf", self.prefix, self.period)
    }
}

/// A point of T: the vertex `anchor` when `offset = 0`, otherwise the point at distance
/// `offset` from the parent of `anchor` along the edge towards `anchor`.
#[derive(Debug, Clone, PartialEq)]
pub struct GTreePoint<S> {
    anchor: Word,
    offset: S,
}

pub type TreePoint = GTreePoint<Rational>;
pub type ApproxTreePoint = GTreePoint<f64>;

impl<S: Scalar> GTreePoint<S> {
    pub fn vertex(w: Word) -> Self {
        GTreePoint { anchor: w, offset: S::zero() }
    }

    pub fn new(anchor: Word, offset: S) -> Result<Self> {
        if offset < S::zero() || offset >= S::one() {
            return Err(Error::Parse(format!("offset {offset:?} outside [0, 1)")));
        }
        if anchor.is_empty() && offset != S::zero() {
            return Err(Error::Parse("the root has no incoming edge".into()));
        }
        Ok(GTreePoint { anchor, offset })
    }

    pub fn anchor(&self) -> &Word {
        &self.anchor
    }

    pub fn offset(&self) -> S {
        self.offset
    }

    pub fn is_vertex(&self) -> bool {
        self.offset == S::zero()
    }

    /// Distance from the identity vertex.
    pub fn depth(&self) -> S {
        let len = S::from_int(self.anchor.len() as i64);
        if self.is_vertex() {
            len
        } else {
            len - S::one() + self.offset
        }
    }

    /// The point at depth `t` on the root path to the vertex `w`; `t` is clamped to `[0, |w|]`.
    pub fn on_path(w: &Word, t: S) -> Self {
        let t = t.max_of(S::zero()).min_of(S::from_int(w.len() as i64));
        let k = t.ceil_int().max(0) as usize;
        let off = t - S::from_int(k as i64 - 1);
        if k == 0 || off >= S::one() {
            GTreePoint::vertex(w.prefix(k))
        } else {
            GTreePoint { anchor: w.prefix(k), offset: off }
        }
    }

    /// The point at depth `t` along an end.
    pub fn on_end(end: &TreeEnd, t: S) -> Self {
        let t = t.max_of(S::zero());
        let k = t.ceil_int().max(0) as usize;
        GTreePoint::on_path(&end.prefix_word(k), t)
    }

    /// Depth of the meeting point of the root paths of `self` and `other`.
    fn meet_depth(&self, other: &Self) -> S {
        let c = S::from_int(self.anchor.common_prefix_len(&other.anchor) as i64);
        self.depth().min_of(other.depth()).min_of(c)
    }

    pub fn dist(&self, other: &Self) -> S {
        let m = self.meet_depth(other);
        let two = S::from_int(2);
        self.depth() + other.depth() - two * m
    }

    /// The point at distance `s` from `self` on the geodesic to `other`.
    pub fn geodesic_eval(&self, other: &Self, s: S) -> Result<Self> {
        let d = self.dist(other);
        if s < S::zero() || s > d {
            return Err(Error::OutOfRange { value: format!("{s:?}"), max: format!("{d:?}") });
        }
        Ok(self.geodesic_eval_unchecked(other, s))
    }

    pub(crate) fn geodesic_eval_unchecked(&self, other: &Self, s: S) -> Self {
        let m = self.meet_depth(other);
        let up = self.depth() - m;
        if s <= up {
            GTreePoint::on_path(&self.anchor, self.depth() - s)
        } else {
            GTreePoint::on_path(&other.anchor, m + (s - up))
        }
    }

    /// Depth at which the ray from `self` towards `end` turns from climbing to descending.
    fn ray_turn_depth(&self, end: &TreeEnd) -> S {
        let c = S::from_int(end.agreement_with(&self.anchor) as i64);
        self.depth().min_of(c)
    }

    /// The point at distance `s` from `self` on the ray towards `end`.
    pub fn ray_eval(&self, end: &TreeEnd, s: S) -> Self {
        let m = self.ray_turn_depth(end);
        let up = self.depth() - m;
        if s <= up {
            GTreePoint::on_path(&self.anchor, self.depth() - s)
        } else {
            GTreePoint::on_end(end, m + (s - up))
        }
    }

    /// `(distance, parameter)` of the nearest point of the geodesic `[p, q]` to `self`.
    ///
    /// Along the geodesic the distance is `d + |s - s*|`.
    pub fn project_to_geodesic(&self, p: &Self, q: &Self) -> (S, S) {
        let two = S::from_int(2);
        let dpx = p.dist(self);
        let dpq = p.dist(q);
        let dqx = q.dist(self);
        let s_star = (dpx + dpq - dqx) / two;
        (dpx - s_star, s_star)
    }

    /// `(distance, parameter)` of the nearest point of the ray from `base` towards `end`.
    pub fn project_to_ray(&self, base: &Self, end: &TreeEnd) -> (S, S) {
        let far = base.depth() + self.depth() + S::from_int(2);
        let q = base.ray_eval(end, far);
        self.project_to_geodesic(base, &q)
    }

    /// Image under left multiplication by `w`.
    pub fn left_mul(&self, w: &Word) -> Self {
        if self.is_vertex() {
            return GTreePoint::vertex(w.mul(&self.anchor));
        }
        let mut parent = self.anchor.clone();
        
        parent = parent.prefix(parent.len() - 1);
        let far = w.mul(&self.anchor);
        let near = w.mul(&parent);
        if far.len() > near.len() {
            GTreePoint { anchor: far, offset: self.offset }
        } else {
            GTreePoint { anchor: near, offset: S::one() - self.offset }
        }
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(S) -> T) -> GTreePoint<T> {
        GTreePoint { anchor: self.anchor.clone(), offset: f(self.offset) }
    }

    pub fn to_approx(&self) -> ApproxTreePoint {
        self.map_scalar(|x| x.to_f64())
    }
}

impl TreePoint {
    pub fn parse(s: &str) -> Result<TreePoint> {
        let s = s.trim();
        match s.split_once('+') {
            Some((w, off)) => {
                let off = parse_rational(off)?;
                TreePoint::new(Word::parse(w)?, off)
            }
            None => Ok(TreePoint::vertex(Word::parse(s)?)),
        }
    }
}

impl fmt::Display for TreePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}", self.anchor, fmt_rational(&self.offset))
    }
}

impl fmt::Display for ApproxTreePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}", self.anchor, self.offset)
    }
}

/// Exact tree distance between two points.
pub fn tree_dist(p: &TreePoint, q: &TreePoint) -> Rational {
    p.dist(q)
}

pub fn tree_geodesic_eval(p: &TreePoint, q: &TreePoint, s: Rational) -> Result<TreePoint> {
    let d = p.dist(q);
    if s < Rational::from_integer(0) || s > d {
        return Err(Error::out_of_range(&s, &d));
    }
    Ok(p.geodesic_eval_unchecked(q, s))
}

pub fn tree_ray_eval(base: &TreePoint, end: &TreeEnd, s: Rational) -> TreePoint {
    base.ray_eval(end, s)
}

/// `(d, s*)`: exact distance from `x` to `[p, q]` and the parameter attaining it.
pub fn dist_point_to_tree_geodesic(x: &TreePoint, p: &TreePoint, q: &TreePoint) -> (Rational, Rational) {
    x.project_to_geodesic(p, q)
}

pub fn common_prefix_length(e1: &TreeEnd, e2: &TreeEnd) -> PrefixLen {
    e1.common_prefix_length(e2)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    fn v(s: &str) -> TreePoint {
        TreePoint::vertex(Word::parse(s).unwrap())
    }

    fn tp(s: &str) -> TreePoint {
        TreePoint::parse(s).unwrap()
    }

    fn end(s: &str) -> TreeEnd {
        TreeEnd::parse(s).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(tree_dist(&v(""), &v("ab")), int(2));
        assert_eq!(tree_dist(&v("a"), &v("b")), int(2));
        assert_eq!(tree_dist(&tp("a+1/2"), &v("a")), rat(1, 2));
        assert_eq!(tree_dist(&tp("ab+1/2"), &tp("aa+1/2")), int(1));
        assert_eq!(tree_dist(&tp("ab+1/2"), &tp("ab+1/4")), rat(1, 4));
    }

    #[test]
    fn vertex_distance_is_word_length_of_quotient() {
        let words = crate::word::words_up_to(3);
        for u in &words {
            for w in &words {
                let want = u.inverse().mul(w).len() as i128;
                assert_eq!(tree_dist(&TreePoint::vertex(u.clone()), &TreePoint::vertex(w.clone())), int(want));
            }
        }
    }

    #[test]
    fn geodesic_eval_examples() {
        assert_eq!(tree_geodesic_eval(&v(""), &v("aab"), int(2)).unwrap(), v("aa"));
        assert_eq!(tree_geodesic_eval(&v("a"), &v("b"), int(1)).unwrap(), v(""));
        assert_eq!(tree_geodesic_eval(&v(""), &v("ab"), rat(3, 2)).unwrap(), tp("ab+1/2"));
        assert!(matches!(tree_geodesic_eval(&v(""), &v("ab"), int(3)), Err(Error::OutOfRange { .. })));
        assert!(tree_geodesic_eval(&v(""), &v("ab"), int(-1)).is_err());
        assert_eq!(tree_geodesic_eval(&v("ab"), &v("B"), int(0)).unwrap(), v("ab"));
        assert_eq!(tree_geodesic_eval(&v("ab"), &v("B"), int(3)).unwrap(), v("B"));
    }

    #[test]
    fn ray_eval_examples() {
        assert_eq!(tree_ray_eval(&v(""), &end("a^inf"), int(3)), v("aaa"));
        assert_eq!(tree_ray_eval(&v("b"), &end("a^inf"), int(1)), v(""));
        // Oracle: expand the periodic word (ab)(ab)(a...
        let expanded: String = "ab".repeat(3).chars().take(5).collect();
        assert_eq!(tree_ray_eval(&v(""), &end("(ab)^inf"), int(5)), v(&expanded));
        assert_eq!(tree_ray_eval(&v(""), &end("a^inf"), rat(5, 2)), tp("aaa+1/2"));
        assert_eq!(tree_ray_eval(&v("aab"), &end("a^inf"), int(1)), v("aa"));
        assert_eq!(tree_ray_eval(&v("aab"), &end("a^inf"), int(2)), v("aaa"));
    }

    #[test]
    fn projection_examples() {
        assert_eq!(dist_point_to_tree_geodesic(&v("aa"), &v(""), &v("aab")), (int(0), int(2)));
        // b -> e -> a has length 2.
        assert_eq!(dist_point_to_tree_geodesic(&v("b"), &v("a"), &v("aa")), (int(2), int(0)));
        assert_eq!(dist_point_to_tree_geodesic(&v("ab"), &v(""), &v("aa")), (int(1), int(1)));
    }

    #[test]
    fn projection_matches_dense_sampling() {
        // Oracle: sample the geodesic on a 1/4 grid (contains every breakpoint) and take the minimum.
        let words = crate::word::words_up_to(2);
        for x in &words {
            for p in &words {
                for q in &words {
                    let (x, p, q) = (TreePoint::vertex(x.clone()), TreePoint::vertex(p.clone()), TreePoint::vertex(q.clone()));
                    let d = tree_dist(&p, &q);
                    let steps = (d * int(4)).to_integer();
                    let (best, arg) = (0..=steps)
                        .map(|k| {
                            let s = rat(k, 4);
                            (tree_dist(&x, &tree_geodesic_eval(&p, &q, s).unwrap()), s)
                        })
                        .min()
                        .unwrap();
                    assert_eq!(dist_point_to_tree_geodesic(&x, &p, &q), (best, arg));
                }
            }
        }
    }

    #[test]
    fn end_canonical_forms() {
        assert_eq!(end("(aa)^inf"), end("a^inf"));
        assert_eq!(end("a(a)^inf"), end("a^inf"));
        assert_eq!(end("A(a)^inf"), end("a^inf"));
        assert_eq!(end("ab(ab)^inf"), end("(ab)^inf"));
        assert_eq!(end("b(ab)^inf"), end("(ba)^inf"));
        assert_eq!(end("abA^inf").to_string(), "a(b)^inf");
        assert_eq!(end("a(b)^inf").to_string(), "a(b)^inf");
        assert_eq!(end("a^inf").left_mul(&Word::parse("A").unwrap()), end("a^inf"));
        assert_eq!(end("b^inf").left_mul(&Word::parse("a").unwrap()).to_string(), "a(b)^inf");
        assert!(TreeEnd::parse("(aA)^inf").is_err());
        assert!(TreeEnd::parse("ab").is_err());
    }

    #[test]
    fn common_prefix_examples() {
        let e3 = Word::parse("aaabbb").unwrap().power_end().unwrap();
        assert_eq!(common_prefix_length(&e3, &end("a^inf")), PrefixLen::Finite(3));
        assert_eq!(common_prefix_length(&end("a^inf"), &end("a^inf")), PrefixLen::Infinite);
        assert_eq!(common_prefix_length(&end("a^inf"), &end("b^inf")), PrefixLen::Finite(0));
    }

    #[test]
    fn ai_bi_ends_approach_a_infinity() {
        for i in 1..=20 {
            let g = Word::parse(&format!("{}{}", "a".repeat(i), "b".repeat(i))).unwrap();
            let e = g.power_end().unwrap();
            assert_eq!(common_prefix_length(&e, &end("a^inf")), PrefixLen::Finite(i));
        }
    }

    #[test]
    fn left_mul_of_edge_points_is_isometric() {
        let p = tp("ab+1/4");
        let a_inv = Word::parse("BA").unwrap();
        let moved = p.left_mul(&a_inv);
        assert_eq!(moved, tp("B+3/4"));
        assert_eq!(moved.depth(), rat(3, 4));
    }

    pub(crate) fn arb_tree_point() -> impl Strategy<Value = TreePoint> {
        (prop::collection::vec(0u8..4, 0..7), 0i128..4).prop_map(|(v, k)| {
            let w = Word::reduce(v.into_iter().map(|i| Letter::ALL[i as usize]));
            if w.is_empty() || k == 0 {
                TreePoint::vertex(w)
            } else {
                TreePoint::new(w, rat(k, 4)).unwrap()
            }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn metric_axioms(p in arb_tree_point(), q in arb_tree_point(), r in arb_tree_point()) {
            let zero = int(0);
            prop_assert!(tree_dist(&p, &q) >= zero);
            prop_assert_eq!(tree_dist(&p, &q), tree_dist(&q, &p));
            prop_assert_eq!(tree_dist(&p, &p), zero);
            prop_assert_eq!(tree_dist(&p, &q) == zero, p == q);
            prop_assert!(tree_dist(&p, &r) <= tree_dist(&p, &q) + tree_dist(&q, &r));
        }

        #[test]
        fn geodesics_are_unit_speed(p in arb_tree_point(), q in arb_tree_point(), a in 0i128..=64, b in 0i128..=64) {
            let d = tree_dist(&p, &q);
            let s1 = d * rat(a, 64);
            let s2 = d * rat(b, 64);
            let x = tree_geodesic_eval(&p, &q, s1).unwrap();
            let y = tree_geodesic_eval(&p, &q, s2).unwrap();
            prop_assert_eq!(tree_dist(&x, &y), (s1 - s2).abs());
            prop_assert_eq!(tree_dist(&p, &x), s1);
        }

        #[test]
        fn left_multiplication_is_an_isometry(p in arb_tree_point(), q in arb_tree_point(), w in arb_tree_point()) {
            let w = w.anchor().clone();
            prop_assert_eq!(p.left_mul(&w).dist(&q.left_mul(&w)), p.dist(&q));
        }
    }
}
