//! Condition (*) over finite balls of G.
//!
//! For every `g` in the ball, only elements `a` whose orbit point can come within `N` of the
//! X-side segment `[x0, g x0]` are generated: vertices within `N` of the tree path, with
//! heights near the segment. Each candidate is then decided exactly by [`crate::kernel`].

use std::collections::BTreeSet;

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::action::{act, covering_radius_sq, ActionSpec};
use crate::error::{Error, Result};
use crate::kernel::{seg_dist_sq, Frac};
use crate::rational::{fmt_rational, Rational};
use crate::report::ser_rational;
use crate::space::{dist_point_to_segment, GeodesicSegment, SpacePoint};
use crate::word::{words_up_to, GroupElement, Letter, Word};

pub const DEFAULT_WITNESS_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarWitness {
    pub g: GroupElement,
    pub a: GroupElement,
    #[serde(serialize_with = "ser_rational")]
    pub d_sq_x: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub d_sq_y: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarVerdict {
    pub holds_on_ball: bool,
    #[serde(rename = "L")]
    pub l: u32,
    #[serde(rename = "N", serialize_with = "ser_rational")]
    pub n: Rational,
    #[serde(rename = "M", serialize_with = "ser_rational")]
    pub m: Rational,
    #[serde(rename = "minimal_M_sq", serialize_with = "ser_rational")]
    pub minimal_m_sq: Rational,
    /// The pair attaining `minimal_M_sq`.
    pub extremal_pair: Option<StarWitness>,
    /// The first witnesses in canonical `(g, a)` order, at most the configured limit.
    pub witnesses: Vec<StarWitness>,
    pub witness_count: u64,
    pub worst_witness: Option<StarWitness>,
    pub group_elements: u64,
    pub candidates_examined: u64,
    pub pairs_meeting_x: u64,
}

/// Inputs of a ball scan.
#[derive(Debug, Clone)]
pub struct StarQuery<'a> {
    pub spec_x: &'a ActionSpec,
    pub spec_y: &'a ActionSpec,
    pub n: Rational,
    pub m: Option<Rational>,
    pub l: u32,
    pub base_x: &'a SpacePoint,
    pub base_y: &'a SpacePoint,
    pub witness_limit: usize,
}

/// Heights of one side scaled to integers.
#[derive(Debug, Clone, Copy)]
struct Side {
    dn: i128,
    zs: i128,
    wa: i128,
    wb: i128,
}

impl Side {
    fn new(spec: &ActionSpec) -> Side {
        let dn = [spec.z_shift, spec.weight_a, spec.weight_b].iter().fold(1i128, |acc, q| acc.lcm(q.denom()));
        let scale = |q: &Rational| (*q * Rational::from_integer(dn)).to_integer();
        Side { dn, zs: scale(&spec.z_shift), wa: scale(&spec.weight_a), wb: scale(&spec.weight_b) }
    }

    fn psi(&self, ea: i64, eb: i64) -> i128 {
        self.wa * ea as i128 + self.wb * eb as i128
    }

    fn shift(&self, ea: i64, eb: i64, z: i64) -> i128 {
        self.zs * z as i128 + self.psi(ea, eb)
    }
}

/// A vertex near the tree path: `P[..j] . branch` at tree distance `delta` from the path.
#[derive(Debug, Clone, Copy)]
struct Cand {
    j: usize,
    branch: usize,
    delta: i128,
    ea: i64,
    eb: i64,
    /// Word length of the group element whose orbit vertex this is.
    vlen: usize,
}

struct Branches {
    words: Vec<Word>,
    sums: Vec<(i64, i64)>,
}

impl Branches {
    fn new(depth: usize) -> Branches {
        let words: Vec<Word> = words_up_to(depth).into_iter().collect();
        let sums = words.iter().map(|w| w.exponent_sums()).collect();
        Branches { words, sums }
    }
}

#[derive(Default)]
struct Acc {
    best: Option<(Frac, GroupElement, GroupElement, Frac)>,
    witnesses: BTreeSet<(GroupElement, GroupElement)>,
    witness_count: u64,
    worst: Option<(Frac, GroupElement, GroupElement)>,
    group_elements: u64,
    examined: u64,
    meeting: u64,
}

fn better(new: &Frac, old: Option<&Frac>) -> bool {
    old.is_none_or(|o| new.cmp_frac(o) == std::cmp::Ordering::Greater)
}

impl Acc {
    fn merge(mut self, other: Acc, limit: usize) -> Acc {
        if let Some((v, g, a, x)) = other.best {
            if better(&v, self.best.as_ref().map(|b| &b.0)) {
                self.best = Some((v, g, a, x));
            }
        }
        if let Some((v, g, a)) = other.worst {
            if better(&v, self.worst.as_ref().map(|b| &b.0)) {
                self.worst = Some((v, g, a));
            }
        }
        self.witnesses.extend(other.witnesses);
        while self.witnesses.len() > limit {
            self.witnesses.pop_last();
        }
        self.witness_count += other.witness_count;
        self.group_elements += other.group_elements;
        self.examined += other.examined;
        self.meeting += other.meeting;
        self
    }
}

fn base_vertex(p: &SpacePoint, side: &str) -> Result<Word> {
    if !p.tree.is_vertex() {
        return Err(Error::InvalidConstants(format!("the {side} base point must be a tree vertex")));
    }
    Ok(p.tree.anchor().clone())
}

fn check_radius(spec: &ActionSpec, base: &SpacePoint, r: &Rational, name: &str) -> Result<()> {
    let cover = covering_radius_sq(spec, base)?;
    if *r <= Rational::from_integer(0) || *r * *r < cover {
        return Err(Error::InvalidConstants(format!(
            "{name} = {} is below the covering radius sqrt({}) ~ {:.6}",
            fmt_rational(r),
            fmt_rational(&cover),
            crate::rational::sqrt_f64(&cover)
        )));
    }
    Ok(())
}

/// Exact X- and Y-side squared distances for one pair, by the rational route.
pub fn pair_distances(
    spec_x: &ActionSpec,
    spec_y: &ActionSpec,
    g: &GroupElement,
    a: &GroupElement,
    base_x: &SpacePoint,
    base_y: &SpacePoint,
) -> (Rational, Rational) {
    let dx = dist_point_to_segment(
        &act(spec_x, a, base_x),
        &GeodesicSegment::new(base_x.clone(), act(spec_x, g, base_x)),
    )
    .0;
    let dy = dist_point_to_segment(
        &act(spec_y, a, base_y),
        &GeodesicSegment::new(base_y.clone(), act(spec_y, g, base_y)),
    )
    .0;
    (dx, dy)
}

/// Scans every `g, a` in `ball(L)`: wherever `[x0, g x0]` meets `B(a x0, N)`, measures
/// `d(a y0, [y0, g y0])^2`.
pub fn scan(q: &StarQuery) -> Result<StarVerdict> {
    if q.l < 1 {
        return Err(Error::InvalidConstants("L must be at least 1".into()));
    }
    check_radius(q.spec_x, q.base_x, &q.n, "N")?;
    if let Some(m) = &q.m {
        check_radius(q.spec_y, q.base_y, m, "M")?;
    }
    let bx = base_vertex(q.base_x, "X")?;
    let by = base_vertex(q.base_y, "Y")?;
    let (sx, sy) = (Side::new(q.spec_x), Side::new(q.spec_y));
    let l = q.l as usize;
    let n = q.n;
    let n_sq = Frac::from_rational(&(n * n));
    let m_sq = q.m.map(|m| Frac::from_rational(&(m * m)));
    let n_f = crate::rational::to_f64(&n);
    let depth = n.floor().to_integer() as usize;
    let branches = Branches::new(depth);
    let words = words_up_to(l);
    let shared_tree = bx == by;
    let bx_inv = bx.inverse();

    let work = |w: &Word, acc: &mut Acc| {
        let rel = bx_inv.mul(w).mul(&bx);
        let d = rel.len();
        let letters = rel.letters();
        let mut prefix_sums = vec![(0i64, 0i64); d + 1];
        for (i, l) in letters.iter().enumerate() {
            let (ea, eb) = l.exponents();
            prefix_sums[i + 1] = (prefix_sums[i].0 + ea, prefix_sums[i].1 + eb);
        }
        let mut cands = Vec::new();
        for j in 0..=d {
            let next = letters.get(j).copied();
            let back = if j > 0 { Some(letters[j - 1].inverse()) } else { None };
            for (bi, y) in branches.words.iter().enumerate() {
                if let Some(first) = y.first() {
                    if Some(first) == next || Some(first) == back {
                        continue;
                    }
                }
                let (ea, eb) = (prefix_sums[j].0 + branches.sums[bi].0, prefix_sums[j].1 + branches.sums[bi].1);
                let vlen = if bx.is_empty() {
                    j + y.len()
                } else {
                    bx.mul(&rel.prefix(j).mul(y)).mul(&bx_inv).len()
                };
                if vlen <= l {
                    cands.push(Cand { j, branch: bi, delta: y.len() as i128, ea, eb, vlen });
                }
            }
        }
        let (wa, wb) = w.exponent_sums();
        let zmax = (l - w.len()) as i64;
        for z in -zmax..=zmax {
            acc.group_elements += 1;
            let dh = sx.shift(wa, wb, z);
            let dnf = sx.dn as f64;
            for c in &cands {
                let slack = n_f - c.delta as f64;
                let (s_lo, s_hi) = if d == 0 {
                    (0.0, 1.0)
                } else {
                    ((c.j as f64 - slack).max(0.0) / d as f64, (c.j as f64 + slack).min(d as f64) / d as f64)
                };
                let (h_a, h_b) = (dh as f64 * s_lo, dh as f64 * s_hi);
                let pad = n_f * dnf + 1.0;
                let lo = h_a.min(h_b) - pad;
                let hi = h_a.max(h_b) + pad;
                let psi = sx.psi(c.ea, c.eb) as f64;
                let zs = sx.zs as f64;
                let room = (l - c.vlen) as i64;
                let za_lo = (((lo - psi) / zs).floor() as i64).max(-room);
                let za_hi = (((hi - psi) / zs).ceil() as i64).min(room);
                for za in za_lo..=za_hi {
                    acc.examined += 1;
                    let dx = seg_dist_sq(d as i128, c.j as i128, c.delta, sx.dn, -sx.shift(c.ea, c.eb, za), dh);
                    if !dx.le(&n_sq) {
                        continue;
                    }
                    acc.meeting += 1;
                    let dy_shift = sy.shift(wa, wb, z);
                    let a_shift = -sy.shift(c.ea, c.eb, za);
                    let dy = if shared_tree {
                        seg_dist_sq(d as i128, c.j as i128, c.delta, sy.dn, a_shift, dy_shift)
                    } else {
                        let g = GroupElement::new(w.clone(), z);
                        let a = GroupElement::new(cand_word(&bx, &rel, c, &branches), za);
                        let (_, dy) = pair_distances(q.spec_x, q.spec_y, &g, &a, q.base_x, q.base_y);
                        Frac::from_rational(&dy)
                    };
                    let new_best = better(&dy, acc.best.as_ref().map(|b| &b.0));
                    let is_witness = m_sq.is_some_and(|m| !dy.le(&m));
                    if !(new_best || is_witness) {
                        continue;
                    }
                    let g = GroupElement::new(w.clone(), z);
                    let a = GroupElement::new(cand_word(&bx, &rel, c, &branches), za);
                    if new_best {
                        acc.best = Some((dy, g.clone(), a.clone(), dx));
                    }
                    if is_witness {
                        acc.witness_count += 1;
                        if better(&dy, acc.worst.as_ref().map(|b| &b.0)) {
                            acc.worst = Some((dy, g.clone(), a.clone()));
                        }
                        acc.witnesses.insert((g, a));
                        if acc.witnesses.len() > q.witness_limit {
                            acc.witnesses.pop_last();
                        }
                    }
                }
            }
        }
    };

    let chunk = 256;
    let acc = words
        .par_chunks(chunk)
        .map(|ws| {
            let mut acc = Acc::default();
            for w in ws {
                work(w, &mut acc);
            }
            acc
        })
        .collect::<Vec<Acc>>()
        .into_iter()
        .fold(Acc::default(), |a, b| a.merge(b, q.witness_limit));

    let make = |g: GroupElement, a: GroupElement| {
        let (dx, dy) = pair_distances(q.spec_x, q.spec_y, &g, &a, q.base_x, q.base_y);
        StarWitness { g, a, d_sq_x: dx, d_sq_y: dy }
    };
    let minimal_m_sq = acc.best.as_ref().map(|b| b.0.to_rational()).unwrap_or_default();
    let extremal_pair = acc.best.map(|(_, g, a, _)| make(g, a));
    let witnesses: Vec<StarWitness> = acc.witnesses.into_iter().map(|(g, a)| make(g, a)).collect();
    let worst_witness = acc.worst.map(|(_, g, a)| make(g, a));
    Ok(StarVerdict {
        holds_on_ball: acc.witness_count == 0,
        l: q.l,
        n: q.n,
        m: q.m.unwrap_or(minimal_m_sq),
        minimal_m_sq,
        extremal_pair,
        witnesses,
        witness_count: acc.witness_count,
        worst_witness,
        group_elements: acc.group_elements,
        candidates_examined: acc.examined,
        pairs_meeting_x: acc.meeting,
    })
}

fn cand_word(bx: &Word, rel: &Word, c: &Cand, branches: &Branches) -> Word {
    let x = rel.prefix(c.j).mul(&branches.words[c.branch]);
    bx.mul(&x).mul(&bx.inverse())
}

pub fn check_condition_star(
    spec_x: &ActionSpec,
    spec_y: &ActionSpec,
    n: Rational,
    m: Rational,
    l: u32,
    base_x: &SpacePoint,
    base_y: &SpacePoint,
) -> Result<StarVerdict> {
    scan(&StarQuery { spec_x, spec_y, n, m: Some(m), l, base_x, base_y, witness_limit: DEFAULT_WITNESS_LIMIT })
}

/// The square of the smallest `M` for which (*) holds on `ball(L)`.
pub fn minimal_m_on_ball(
    spec_x: &ActionSpec,
    spec_y: &ActionSpec,
    n: Rational,
    l: u32,
    base_x: &SpacePoint,
    base_y: &SpacePoint,
) -> Result<Rational> {
    scan(&StarQuery { spec_x, spec_y, n, m: None, l, base_x, base_y, witness_limit: 0 }).map(|v| v.minimal_m_sq)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthRow {
    pub i: u32,
    pub g: GroupElement,
    pub a: GroupElement,
    #[serde(serialize_with = "ser_rational")]
    pub d_sq_x: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub d_sq_y: Rational,
}

/// `g_i = (a^i b^i, 0)` and `a_i = (a^i, 0)`.
pub fn canonical_family(i: u32) -> (GroupElement, GroupElement) {
    let a = Word::reduce(std::iter::repeat_n(Letter::A, i as usize));
    let b = Word::reduce(std::iter::repeat_n(Letter::B, i as usize));
    (GroupElement::new(a.mul(&b), 0), GroupElement::new(a, 0))
}

/// Distances along a one-parameter family of pairs, `i = 0..=i_max`.
pub fn witness_growth_scan(
    spec_x: &ActionSpec,
    spec_y: &ActionSpec,
    family: impl Fn(u32) -> (GroupElement, GroupElement),
    i_max: u32,
    base_x: &SpacePoint,
    base_y: &SpacePoint,
) -> Vec<GrowthRow> {
    (0..=i_max)
        .map(|i| {
            let (g, a) = family(i);
            let (dx, dy) = pair_distances(spec_x, spec_y, &g, &a, base_x, base_y);
            GrowthRow { i, g, a, d_sq_x: dx, d_sq_y: dy }
        })
        .collect()
}
