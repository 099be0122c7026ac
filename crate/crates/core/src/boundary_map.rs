//! The boundary map induced by the orbit map `g x0 -> g y0`, built from approximating
//! sequences, and the checks of the quantitative bounds used to construct it.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::action::{act, act_boundary, covering_radius_sq, orbit_limit, ActionSpec, ConstantsLedger};
use crate::error::{Error, Result};
use crate::rational::{fmt_rational, sqrt_f64, sqrt_le_affine, to_f64, Rational, ARC_TOL};
use crate::report::{ser_rational, Num};
use crate::space::{
    point_ray_dist_sq, point_segment_dist_sq, ray_eval_approx, ray_eval_param_generic, ApproxSpacePoint,
    BoundaryPoint, SpacePoint,
};
use crate::topology::{
    image_distance, in_u, in_u_general, in_u_prime, is_cauchy_sample, limit_of_points, xi, Target, Verdict,
    DEFAULT_R_VALUES,
};
use crate::tree::GTreePoint;
use crate::word::{words_up_to, GroupElement, Letter, Word};

pub const DEFAULT_K: usize = 24;

/// Grid for the quasi-isometry search: `lambda in [1, 8]`, `C in [0, 16]`, step `1/8`.
const GRID: i128 = 8;
const LAMBDA_MAX: i128 = 8;
const C_MAX: i128 = 16;

/// Everything the boundary map depends on besides the boundary point.
#[derive(Debug, Clone)]
pub struct MapSetup {
    pub spec_x: ActionSpec,
    pub spec_y: ActionSpec,
    pub base_x: SpacePoint,
    pub base_y: SpacePoint,
    /// Radius of the approximating sequences in X.
    pub n: Rational,
    /// Minimum sequence length; raised when the direction data needs more samples.
    pub k: usize,
    /// Cauchy threshold for image sequences; `None` uses twice the largest image step plus one.
    pub eps0: Option<f64>,
}

impl MapSetup {
    pub fn new(spec_x: ActionSpec, spec_y: ActionSpec, n: Rational) -> MapSetup {
        MapSetup {
            spec_x,
            spec_y,
            base_x: SpacePoint::origin(),
            base_y: SpacePoint::origin(),
            n,
            k: DEFAULT_K,
            eps0: None,
        }
    }

    /// The same data with X and Y exchanged, approximating in Y with radius `n_y`.
    pub fn reversed(&self, n_y: Rational) -> MapSetup {
        MapSetup {
            spec_x: self.spec_y.clone(),
            spec_y: self.spec_x.clone(),
            base_x: self.base_y.clone(),
            base_y: self.base_x.clone(),
            n: n_y,
            k: self.k,
            eps0: self.eps0,
        }
    }
}

// ---------------------------------------------------------------------------------------------
// Quasi-isometry constants

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QiEstimate {
    #[serde(serialize_with = "ser_rational")]
    pub lambda: Rational,
    #[serde(rename = "C", serialize_with = "ser_rational")]
    pub c: Rational,
    #[serde(rename = "L")]
    pub l: u32,
    /// Distinct `(d_X^2, d_Y^2)` values the estimate was verified on.
    pub distinct_pairs: usize,
}

fn for_each_word(max_len: usize, f: &mut impl FnMut(&Word)) {
    fn go(cur: &mut Vec<Letter>, left: usize, f: &mut impl FnMut(&Word)) {
        f(&Word::from_reduced(cur.clone()));
        if left == 0 {
            return;
        }
        for l in Letter::ALL {
            if cur.last().is_some_and(|p| p.inverse() == l) {
                continue;
            }
            cur.push(l);
            go(cur, left - 1, f);
            cur.pop();
        }
    }
    go(&mut Vec::new(), max_len, f);
}

/// Distinct exact `(d_X^2(x0, f x0), d_Y^2(y0, f y0))` over `f` in `ball(radius)`.
///
/// Both actions are isometric, so `d(g x0, h x0) = d(x0, g^-1 h x0)` and the pairs of
/// `ball(L)` are covered by `ball(2L)`.
pub fn orbit_distance_pairs(
    spec_x: &ActionSpec,
    spec_y: &ActionSpec,
    radius: u32,
    base_x: &SpacePoint,
    base_y: &SpacePoint,
) -> Vec<(Rational, Rational)> {
    let mut shapes = BTreeSet::new();
    for_each_word(radius as usize, &mut |w| {
        let tx = base_x.tree.left_mul(w).dist(&base_x.tree);
        let ty = base_y.tree.left_mul(w).dist(&base_y.tree);
        shapes.insert((w.len(), tx, ty, spec_x.psi(w), spec_y.psi(w)));
    });
    let mut pairs = BTreeSet::new();
    for (len, tx, ty, px, py) in shapes {
        let slack = (radius as usize - len) as i128;
        for z in -slack..=slack {
            let hx = px + spec_x.z_shift * z;
            let hy = py + spec_y.z_shift * z;
            pairs.insert((tx * tx + hx * hx, ty * ty + hy * hy));
        }
    }
    pairs.into_iter().collect()
}

/// Exact check of `(1/lambda) d_Y - C <= d_X <= lambda d_Y + C` on every pair.
pub fn qi_holds(pairs: &[(Rational, Rational)], lambda: &Rational, c: &Rational) -> bool {
    let lc = *lambda * *c;
    pairs.iter().all(|(dx2, dy2)| sqrt_le_affine(dx2, lambda, dy2, c) && sqrt_le_affine(dy2, lambda, dx2, &lc))
}

/// Quasi-isometry constants of `g x0 -> g y0` on `ball(L)`: the grid pair with the smallest
/// `lambda + C`, ties going to the smaller `lambda`.
pub fn qi_constants(
    spec_x: &ActionSpec,
    spec_y: &ActionSpec,
    l: u32,
    base_x: &SpacePoint,
    base_y: &SpacePoint,
) -> Result<QiEstimate> {
    if l < 2 {
        return Err(Error::InvalidConstants(format!("qi_constants needs L >= 2 (got {l})")));
    }
    let pairs = orbit_distance_pairs(spec_x, spec_y, 2 * l, base_x, base_y);
    let roots: Vec<(f64, f64)> = pairs.iter().map(|(a, b)| (sqrt_f64(a), sqrt_f64(b))).collect();
    let mut best: Option<(Rational, Rational)> = None;
    for i in 0..=(LAMBDA_MAX - 1) * GRID {
        let lambda = Rational::from_integer(1) + Rational::new(i, GRID);
        let lf = to_f64(&lambda);
        let need = roots.iter().map(|(dx, dy)| (dx - lf * dy).max(dy / lf - dx)).fold(0.0, f64::max);
        let mut j = (need * GRID as f64 - 1e-6).ceil().max(0.0) as i128;
        while j <= C_MAX * GRID && !qi_holds(&pairs, &lambda, &Rational::new(j, GRID)) {
            j += 1;
        }
        if j > C_MAX * GRID {
            continue;
        }
        let c = Rational::new(j, GRID);
        if best.as_ref().is_none_or(|(bl, bc)| lambda + c < *bl + *bc) {
            best = Some((lambda, c));
        }
    }
    let (lambda, c) = best.ok_or_else(|| {
        Error::InvalidConstants(format!("no (lambda, C) on the grid fits ball({l}); the orbit map is not a quasi-isometry there"))
    })?;
    Ok(QiEstimate { lambda, c, l, distinct_pairs: pairs.len() })
}

// ---------------------------------------------------------------------------------------------
// Approximating sequences and the map itself

/// Which qualifying orbit point an approximating sequence takes at each ray point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pick {
    Nearest,
    Farthest,
}

fn check_cover(spec: &ActionSpec, n: &Rational, base: &SpacePoint) -> Result<()> {
    let r2 = covering_radius_sq(spec, base)?;
    if *n * *n < r2 {
        return Err(Error::InvalidConstants(format!(
            "N = {} is below the covering radius sqrt({}) ~ {:.6}",
            fmt_rational(n),
            fmt_rational(&r2),
            sqrt_f64(&r2)
        )));
    }
    Ok(())
}

fn choose(
    spec: &ActionSpec,
    p: &ApproxSpacePoint,
    base: &SpacePoint,
    branches: &[Word],
    nf: f64,
    pick: Pick,
) -> Option<GroupElement> {
    let v0_inv = base.tree.anchor().inverse();
    let zs = to_f64(&spec.z_shift);
    let mut best: Option<(f64, GroupElement)> = None;
    for y in branches {
        let u = p.tree.anchor().mul(y);
        let dt = p.tree.dist(&GTreePoint::vertex(u.clone()));
        if dt > nf + ARC_TOL {
            continue;
        }
        let w = u.mul(&v0_inv);
        let shift = to_f64(&(base.height + spec.psi(&w)));
        let q = ((p.height - shift) / zs).floor() as i64;
        for z in [q, q + 1] {
            let dh = shift + z as f64 * zs - p.height;
            let d2 = dt * dt + dh * dh;
            if d2 > nf * nf + ARC_TOL {
                continue;
            }
            let g = GroupElement::new(w.clone(), z);
            let replace = match &best {
                None => true,
                Some((bd, bg)) => {
                    let strictly = match pick {
                        Pick::Nearest => d2 < bd - 1e-12,
                        Pick::Farthest => d2 > bd + 1e-12,
                    };
                    strictly || ((d2 - bd).abs() <= 1e-12 && g < *bg)
                }
            };
            if replace {
                best = Some((d2, g));
            }
        }
    }
    best.map(|(_, g)| g)
}

/// `g_1, ..., g_k` with `d_X(g_i x0, xi_alpha(i)) <= N`, each the nearest qualifying orbit
/// point (ties to the smaller group element).
pub fn approximating_sequence(
    alpha: &BoundaryPoint,
    spec_x: &ActionSpec,
    n: &Rational,
    k: usize,
    base_x: &SpacePoint,
) -> Result<Vec<GroupElement>> {
    approximating_sequence_with(alpha, spec_x, n, k, base_x, Pick::Nearest)
}

pub fn approximating_sequence_with(
    alpha: &BoundaryPoint,
    spec_x: &ActionSpec,
    n: &Rational,
    k: usize,
    base_x: &SpacePoint,
    pick: Pick,
) -> Result<Vec<GroupElement>> {
    check_cover(spec_x, n, base_x)?;
    let branches = words_up_to(n.ceil().to_integer() as usize + 1);
    let nf = to_f64(n);
    let b = base_x.to_approx();
    (1..=k)
        .map(|i| {
            let p = ray_eval_approx(&b, alpha, i as f64);
            choose(spec_x, &p, base_x, &branches, nf, pick).ok_or(Error::NoCover { n: fmt_rational(n), index: i })
        })
        .collect()
}

fn max_weight(spec: &ActionSpec) -> f64 {
    to_f64(&spec.weight_a).abs().max(to_f64(&spec.weight_b).abs())
}

/// Sequence length that lets the image direction stabilize: the tail must see the end's
/// prefix and two periods, and the height scatter must pin the slope to its denominator.
pub fn sequence_length(alpha: &BoundaryPoint, spec_x: &ActionSpec, spec_y: &ActionSpec, n: &Rational, k: usize) -> usize {
    let BoundaryPoint::Directional { end, slope } = alpha else {
        return k;
    };
    let v = to_f64(slope).abs();
    let s = (1.0 + v * v).sqrt();
    let nn = to_f64(&n.ceil());
    let (p, c) = (end.prefix().len() as f64, end.period().len() as f64);
    let rho = to_f64(&spec_y.z_shift) / to_f64(&spec_x.z_shift);
    let (wx, wy) = (max_weight(spec_x), max_weight(spec_y));
    let vy = rho * (v + wx) + wy;
    let noise = (nn + 1.0) * (rho * (1.0 + v) + vy + 1.0) + (c + nn) * (wy + rho * wx);
    let den = *slope.denom() as f64;
    // The tail's common prefix must reach 2|p| + 3|c| before no shorter period fits it.
    let depth = 2.0 * (2.0 * p + 3.0 * c + nn) + 8.0;
    let span = 4.0 * noise * den * den * 4.0 / 3.0;
    k.max((s * depth.max(span)).ceil() as usize)
}

pub fn image_points(seq: &[GroupElement], spec: &ActionSpec, base: &SpacePoint) -> Vec<SpacePoint> {
    seq.iter().map(|g| act(spec, g, base)).collect()
}

fn max_step(points: &[SpacePoint]) -> f64 {
    points.windows(2).map(|w| w[0].dist(&w[1])).fold(0.0, f64::max)
}

/// Cauchy test and limit of a sampled sequence.
pub fn sequence_limit(points: &[SpacePoint], base: &SpacePoint, eps0: Option<f64>) -> Result<(BoundaryPoint, Verdict)> {
    let eps0 = eps0.unwrap_or_else(|| 2.0 * max_step(points) + 1.0);
    let verdict = is_cauchy_sample(points, eps0, &DEFAULT_R_VALUES, base);
    if let Verdict::Violated(w) = verdict {
        return Err(Error::NotCauchy { r: w.r, i: w.i, j: w.j });
    }
    Ok((limit_of_points(points, base)?, verdict))
}

/// A group element whose powers converge to `alpha` in X: `p c^m p^-1` shifted in the
/// centre so that the height gain per period matches the slope.
pub fn analytic_element(alpha: &BoundaryPoint, spec_x: &ActionSpec) -> Option<GroupElement> {
    let g = match alpha {
        BoundaryPoint::Pole { sign } => GroupElement::new(Word::identity(), i64::from(*sign)),
        BoundaryPoint::Directional { end, slope } => {
            let (p, c) = (end.prefix(), end.period());
            let q = (*slope * Rational::from_integer(c.len() as i128) - spec_x.psi(c)) / spec_x.z_shift;
            let m = *q.denom();
            let z = i64::try_from((q * Rational::from_integer(m)).to_integer()).ok()?;
            let w = p.mul(&c.pow(u32::try_from(m).ok()?)).mul(&p.inverse());
            GroupElement::new(w, z)
        }
    };
    (orbit_limit(spec_x, &g, &SpacePoint::origin()).ok()? == *alpha).then_some(g)
}

/// The orbit limit in Y of [`analytic_element`].
pub fn analytic_image(alpha: &BoundaryPoint, spec_x: &ActionSpec, spec_y: &ActionSpec) -> Option<BoundaryPoint> {
    orbit_limit(spec_y, &analytic_element(alpha, spec_x)?, &SpacePoint::origin()).ok()
}

/// Closed-form image slope: `(zs_Y / zs_X)(v - psi_X(c)/|c|) + psi_Y(c)/|c|`.
pub fn expected_slope(alpha: &BoundaryPoint, spec_x: &ActionSpec, spec_y: &ActionSpec) -> Option<Rational> {
    let BoundaryPoint::Directional { end, slope } = alpha else {
        return None;
    };
    let c = end.period();
    let len = Rational::from_integer(c.len() as i128);
    Some(spec_y.z_shift / spec_x.z_shift * (*slope - spec_x.psi(c) / len) + spec_y.psi(c) / len)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhibarResult {
    pub input: BoundaryPoint,
    pub sequence: Vec<GroupElement>,
    pub output: BoundaryPoint,
    pub analytic_crosscheck: Option<BoundaryPoint>,
    pub verdict: Verdict,
    /// Outcome of a condition (*) check covering the sequence; `None` when unverified.
    pub star_condition: Option<bool>,
}

/// `phibar(alpha)`: the limit in Y of `g_i y0` for an approximating sequence `g_i x0 -> alpha`,
/// cross-checked against the orbit limit of [`analytic_element`].
pub fn phibar(alpha: &BoundaryPoint, setup: &MapSetup) -> Result<PhibarResult> {
    let k = sequence_length(alpha, &setup.spec_x, &setup.spec_y, &setup.n, setup.k);
    let sequence = approximating_sequence(alpha, &setup.spec_x, &setup.n, k, &setup.base_x)?;
    let points = image_points(&sequence, &setup.spec_y, &setup.base_y);
    let (output, verdict) = sequence_limit(&points, &setup.base_y, setup.eps0)?;
    let analytic = analytic_image(alpha, &setup.spec_x, &setup.spec_y);
    if let Some(a) = &analytic {
        if *a != output {
            return Err(Error::CrosscheckMismatch { sequence: output.to_string(), analytic: a.to_string() });
        }
    }
    Ok(PhibarResult { input: alpha.clone(), sequence, output, analytic_crosscheck: analytic, verdict, star_condition: None })
}

// ---------------------------------------------------------------------------------------------
// Bounds along one approximating sequence

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub item: u8,
    pub statement: &'static str,
    #[serde(serialize_with = "ser_rational")]
    pub bound: Rational,
    /// Largest squared distance met.
    #[serde(serialize_with = "ser_rational")]
    pub worst_sq: Rational,
    /// `bound^2 - worst_sq`.
    #[serde(serialize_with = "ser_rational")]
    pub margin_sq: Rational,
    pub cases: usize,
    pub holds: bool,
}

fn bound_check(item: u8, statement: &'static str, bound: Rational, values: Vec<Rational>) -> BoundCheck {
    let worst_sq = values.iter().copied().max().unwrap_or_else(|| Rational::from_integer(0));
    let margin_sq = bound * bound - worst_sq;
    BoundCheck { item, statement, bound, worst_sq, margin_sq, cases: values.len(), holds: margin_sq >= Rational::from_integer(0) }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma25Report {
    pub alpha: BoundaryPoint,
    pub image: BoundaryPoint,
    pub i_max: usize,
    pub ledger: ConstantsLedger,
    pub items: Vec<BoundCheck>,
    pub all_hold: bool,
}

/// The six bounds on `g_1, ..., g_{i_max}`, all in exact arithmetic. Bound (6) is tested at
/// tree parameters `j/4` up to the projection of `g_{i_max} y0` onto the image ray.
pub fn lemma_2_5_suite(result: &PhibarResult, ledger: &ConstantsLedger, setup: &MapSetup, i_max: usize) -> Result<Lemma25Report> {
    ledger.verify()?;
    let i_max = i_max.min(result.sequence.len());
    let seq = &result.sequence[..i_max];
    let xs = image_points(seq, &setup.spec_x, &setup.base_x);
    let ys = image_points(seq, &setup.spec_y, &setup.base_y);
    let (x0, y0, image) = (&setup.base_x, &setup.base_y, &result.output);
    let pairs: Vec<(usize, usize)> = (0..i_max).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
    let one = Rational::from_integer(1);

    let seg_x = pairs.iter().map(|&(i, j)| point_segment_dist_sq(&xs[i], x0, &xs[j]).0).collect();
    let seg_y = pairs.iter().map(|&(i, j)| point_segment_dist_sq(&ys[i], y0, &ys[j]).0).collect();
    let to_ray = ys.iter().map(|y| point_ray_dist_sq(y, y0, image).0).collect();
    let step_x = xs.windows(2).map(|w| w[0].dist_sq(&w[1])).collect();
    let step_y = ys.windows(2).map(|w| w[0].dist_sq(&w[1])).collect();
    let cover = match ys.last() {
        None => Vec::new(),
        Some(last) => {
            let tau_max = point_ray_dist_sq(last, y0, image).1;
            let steps = (tau_max * Rational::from_integer(4)).floor().to_integer();
            (0..=steps)
                .map(|j| {
                    let p = ray_eval_param_generic(y0, image, Rational::new(j, 4));
                    ys.iter().map(|y| p.dist_sq(y)).min().expect("nonempty")
                })
                .collect()
        }
    };

    let items = vec![
        bound_check(1, "d_X(g_i x0, [x0, g_j x0]) <= N~ for i < j", ledger.n_tilde, seg_x),
        bound_check(2, "d_Y(g_i y0, [y0, g_j y0]) <= M~ for i < j", ledger.m_tilde, seg_y),
        bound_check(3, "d_Y(g_i y0, Im xi_phibar(alpha)) <= M~ + 1", ledger.m_tilde + one, to_ray),
        bound_check(4, "d_X(g_i x0, g_{i+1} x0) <= 2N + 1", ledger.step_bound_x(), step_x),
        bound_check(5, "d_Y(g_i y0, g_{i+1} y0) <= lambda(2N+1) + C", ledger.step_bound_y(), step_y),
        bound_check(6, "Im xi_phibar(alpha) covered by B(g_i y0, 3(M~+1) + lambda(2N+1) + C)", ledger.cover_bound_y(), cover),
    ];
    let all_hold = items.iter().all(|c| c.holds);
    Ok(Lemma25Report { alpha: result.input.clone(), image: image.clone(), i_max, ledger: ledger.clone(), items, all_hold })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadRow {
    #[serde(rename = "R", serialize_with = "ser_rational")]
    pub r_y: Rational,
    /// `lambda(R + C + M) + N`.
    #[serde(rename = "r", serialize_with = "ser_rational")]
    pub r_x: Rational,
    pub samples: usize,
    pub i0: Option<usize>,
    pub spread: Num,
    #[serde(serialize_with = "ser_rational")]
    pub m_prime: Rational,
    pub holds: bool,
}

/// Cauchy transfer: once the X-side sample stays in `U(g_{i0} x0; r, 1)`, the Y-side
/// directions at `R` stay within `M'` of `xi_{g_{i0} y0}(R)`.
pub fn transfer_spread(alpha: &BoundaryPoint, setup: &MapSetup, ledger: &ConstantsLedger, r_values: &[Rational]) -> Result<Vec<SpreadRow>> {
    ledger.verify()?;
    r_values
        .iter()
        .map(|r_y| {
            let r_x = ledger.transfer_radius(*r_y);
            let (rf, big_r) = (to_f64(&r_x), to_f64(r_y));
            let k = sequence_length(alpha, &setup.spec_x, &setup.spec_y, &setup.n, setup.k).max(2 * rf.ceil() as usize + 8);
            let seq = approximating_sequence(alpha, &setup.spec_x, &setup.n, k, &setup.base_x)?;
            let tx: Vec<Target> = image_points(&seq, &setup.spec_x, &setup.base_x).into_iter().map(Target::Point).collect();
            let ys = image_points(&seq, &setup.spec_y, &setup.base_y);
            let ty: Vec<Target> = ys.iter().cloned().map(Target::Point).collect();
            let min_tail = (k / 4).max(2);
            let i0 = (0..=k - min_tail).find(|&i0| (i0..k).all(|i| in_u_general(&tx[i0], rf, 1.0, &tx[i], &setup.base_x)));
            let (spread, far) = match i0 {
                None => (f64::INFINITY, false),
                Some(i0) => {
                    let c = xi(&ty[i0], &setup.base_y, big_r);
                    let spread = (i0..k).map(|i| c.dist(&xi(&ty[i], &setup.base_y, big_r))).fold(0.0, f64::max);
                    let far = ys[i0..].iter().all(|y| y.dist(&setup.base_y) >= big_r - ARC_TOL);
                    (spread, far)
                }
            };
            let holds = far && spread <= to_f64(&ledger.m_prime) + ARC_TOL;
            Ok(SpreadRow { r_y: *r_y, r_x, samples: k, i0, spread: Num::approx(spread), m_prime: ledger.m_prime, holds })
        })
        .collect()
}

// ---------------------------------------------------------------------------------------------
// Probes

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WellDefinedReport {
    pub alpha: BoundaryPoint,
    pub nearest: BoundaryPoint,
    pub farthest: BoundaryPoint,
    pub interleaved: BoundaryPoint,
    pub with_powers: Option<BoundaryPoint>,
    pub consistent: bool,
}

fn merge_by_distance(a: &[GroupElement], b: &[GroupElement], spec: &ActionSpec, base: &SpacePoint) -> Vec<GroupElement> {
    let mut all: Vec<(Rational, usize, GroupElement)> = a
        .iter()
        .chain(b)
        .enumerate()
        .map(|(i, g)| (act(spec, g, base).dist_sq(base), i, g.clone()))
        .collect();
    all.sort();
    all.into_iter().map(|(_, _, g)| g).collect()
}

/// Two independent approximating sequences (nearest and farthest qualifying points), their
/// alternation, and the merge with powers of [`analytic_element`] all give the same image.
pub fn well_definedness_check(alpha: &BoundaryPoint, setup: &MapSetup) -> Result<WellDefinedReport> {
    let k = sequence_length(alpha, &setup.spec_x, &setup.spec_y, &setup.n, setup.k);
    let near = approximating_sequence_with(alpha, &setup.spec_x, &setup.n, k, &setup.base_x, Pick::Nearest)?;
    let far = approximating_sequence_with(alpha, &setup.spec_x, &setup.n, k, &setup.base_x, Pick::Farthest)?;
    let limit = |seq: &[GroupElement]| {
        sequence_limit(&image_points(seq, &setup.spec_y, &setup.base_y), &setup.base_y, setup.eps0).map(|r| r.0)
    };
    let alternating: Vec<GroupElement> = near.iter().zip(&far).flat_map(|(g, h)| [g.clone(), h.clone()]).collect();
    let with_powers = match analytic_element(alpha, &setup.spec_x) {
        None => None,
        Some(e) => {
            let reach = act(&setup.spec_x, near.last().expect("k >= 1"), &setup.base_x).dist_sq(&setup.base_x);
            let mut powers = Vec::new();
            let mut p = e.clone();
            while act(&setup.spec_x, &p, &setup.base_x).dist_sq(&setup.base_x) <= reach {
                powers.push(p.clone());
                p = p.mul(&e);
            }
            Some(limit(&merge_by_distance(&near, &powers, &setup.spec_x, &setup.base_x))?)
        }
    };
    let nearest = limit(&near)?;
    let farthest = limit(&far)?;
    let interleaved = limit(&alternating)?;
    let consistent = nearest == farthest && nearest == interleaved && with_powers.as_ref().is_none_or(|w| *w == nearest);
    Ok(WellDefinedReport { alpha: alpha.clone(), nearest, farthest, interleaved, with_powers, consistent })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivarianceReport {
    pub g: GroupElement,
    pub alpha: BoundaryPoint,
    /// `phibar(g alpha)`.
    pub lhs: BoundaryPoint,
    /// `g phibar(alpha)`.
    pub rhs: BoundaryPoint,
    pub equal: bool,
}

pub fn equivariance_check(g: &GroupElement, alpha: &BoundaryPoint, setup: &MapSetup) -> Result<EquivarianceReport> {
    let lhs = phibar(&act_boundary(&setup.spec_x, g, alpha), setup)?.output;
    let rhs = act_boundary(&setup.spec_y, g, &phibar(alpha, setup)?.output);
    let equal = lhs == rhs;
    Ok(EquivarianceReport { g: g.clone(), alpha: alpha.clone(), lhs, rhs, equal })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurjectivityRow {
    pub target: BoundaryPoint,
    pub preimage: Option<BoundaryPoint>,
    pub image: Option<BoundaryPoint>,
    pub hit: bool,
    pub note: Option<String>,
}

/// For each target in `∂Y`, approximate it by `g_i y0`, read the limit of `g_i x0` off the
/// sample and map it back with [`phibar`]. `n_y` is the approximation radius in Y.
pub fn surjectivity_probe(setup: &MapSetup, n_y: &Rational, targets: &[BoundaryPoint]) -> Vec<SurjectivityRow> {
    targets
        .par_iter()
        .map(|target| {
            let preimage = (|| {
                let k = sequence_length(target, &setup.spec_y, &setup.spec_x, n_y, setup.k);
                let seq = approximating_sequence(target, &setup.spec_y, n_y, k, &setup.base_y)?;
                sequence_limit(&image_points(&seq, &setup.spec_x, &setup.base_x), &setup.base_x, setup.eps0).map(|r| r.0)
            })();
            let preimage = match preimage {
                Ok(p) => p,
                Err(e) => {
                    return SurjectivityRow { target: target.clone(), preimage: None, image: None, hit: false, note: Some(e.to_string()) }
                }
            };
            match phibar(&preimage, setup) {
                Ok(r) => SurjectivityRow {
                    target: target.clone(),
                    hit: r.output == *target,
                    preimage: Some(preimage),
                    image: Some(r.output),
                    note: None,
                },
                Err(e) => SurjectivityRow { target: target.clone(), preimage: Some(preimage), image: None, hit: false, note: Some(e.to_string()) },
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InjectivityReport {
    pub alpha: BoundaryPoint,
    pub alpha_prime: BoundaryPoint,
    pub image: BoundaryPoint,
    pub image_prime: BoundaryPoint,
    pub distinct: bool,
    /// Ray parameter in X where the separation was measured.
    pub r0: usize,
    /// `d_X(xi_alpha(r0), Im xi_alpha')`.
    pub t: Num,
    /// `(t - 2N)/lambda - C - (4(M~+1) + lambda(2N+1) + C)`.
    pub lower_bound: Num,
    /// Distance in Y from the image ray point near `g_{r0} y0` to the other image ray.
    pub observed: Num,
    pub bound_holds: bool,
}

/// Distinct points have distinct images, and the image rays separate at least as fast as
/// the divergence bound predicts.
pub fn injectivity_probe(alpha: &BoundaryPoint, alpha_prime: &BoundaryPoint, setup: &MapSetup, ledger: &ConstantsLedger) -> Result<InjectivityReport> {
    if alpha == alpha_prime {
        return Err(Error::ProbeFailure(format!("injectivity probe needs distinct points, got {alpha} twice")));
    }
    let image = phibar(alpha, setup)?.output;
    let image_prime = phibar(alpha_prime, setup)?.output;
    let (lambda, c, n) = (to_f64(&ledger.lambda), to_f64(&ledger.c), to_f64(&ledger.n));
    let slack = 4.0 * (to_f64(&ledger.m_tilde) + 1.0) + to_f64(&ledger.step_bound_y());
    let bound = |t: f64| (t - 2.0 * n) / lambda - c - slack;
    let other_x = Target::Boundary(alpha_prime.clone());
    let sep = |r0: usize| image_distance(&xi(&Target::Boundary(alpha.clone()), &setup.base_x, r0 as f64), &other_x, &setup.base_x);
    let mut r0 = setup.k.max(1);
    while bound(sep(r0)) <= 0.0 && r0 < 4096 {
        r0 *= 2;
    }
    let (t, lower) = (sep(r0), bound(sep(r0)));
    let seq = approximating_sequence(alpha, &setup.spec_x, &setup.n, r0, &setup.base_x)?;
    let gy = act(&setup.spec_y, &seq[r0 - 1], &setup.base_y);
    let tau = point_ray_dist_sq(&gy, &setup.base_y, &image).1;
    let p = ray_eval_param_generic(&setup.base_y, &image, tau);
    let observed = image_distance(&p.to_approx(), &Target::Boundary(image_prime.clone()), &setup.base_y);
    Ok(InjectivityReport {
        alpha: alpha.clone(),
        alpha_prime: alpha_prime.clone(),
        distinct: image != image_prime,
        image,
        image_prime,
        r0,
        t: Num::approx(t),
        lower_bound: Num::approx(lower),
        observed: Num::approx(observed),
        bound_holds: lower <= 0.0 || observed > lower - ARC_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuitySample {
    pub beta: BoundaryPoint,
    pub image: BoundaryPoint,
    /// `d_Y(xi_phibar(alpha)(r_bar), Im xi_phibar(beta))`.
    pub distance: Num,
    /// `c_bar - distance`.
    pub margin: Num,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub alpha: BoundaryPoint,
    pub image: BoundaryPoint,
    #[serde(serialize_with = "ser_rational")]
    pub r_bar: Rational,
    /// `lambda(r_bar + C + M~ + 1) + N + 1`.
    #[serde(serialize_with = "ser_rational")]
    pub r: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub c_bar: Rational,
    pub c_bar_from_ledger: bool,
    pub samples: Vec<ContinuitySample>,
    /// Candidates rejected because they were not in `U(alpha; r, 1)`.
    pub skipped: usize,
    pub passed: bool,
}

impl ContinuityReport {
    /// `Err(ProbeFailure)` naming every violating `beta`.
    pub fn check(&self) -> Result<()> {
        let bad: Vec<String> = self
            .samples
            .iter()
            .filter(|s| !s.holds)
            .map(|s| format!("{} -> {} (distance {} > c_bar {})", s.beta, s.image, s.distance.value, fmt_rational(&self.c_bar)))
            .collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::ProbeFailure(format!("continuity at {} with r_bar = {}: {}", self.alpha, fmt_rational(&self.r_bar), bad.join("; "))))
        }
    }
}

/// Boundary points agreeing with `alpha` far enough out to lie in `U(alpha; r, 1)`: the same
/// slope with the end branching off past depth `r`, or for a pole, steep slopes past `r`.
pub fn continuity_neighbors(alpha: &BoundaryPoint, r: f64, count: usize) -> Vec<BoundaryPoint> {
    let mut out: Vec<BoundaryPoint> = Vec::new();
    let mut depth = r.ceil().max(0.0) as usize + 1;
    while out.len() < count {
        match alpha {
            BoundaryPoint::Directional { end, slope } => {
                let w = end.prefix_word(depth);
                let next = end.letter_at(depth);
                for l in Letter::ALL {
                    if l == next || w.last() == Some(l.inverse()) {
                        continue;
                    }
                    let mut periods = vec![Word::reduce([l])];
                    periods.extend(Letter::ALL.iter().filter(|&&m| m != l && m != l.inverse()).map(|&m| Word::reduce([l, m])));
                    for c in periods {
                        if let Ok(e) = crate::tree::TreeEnd::new(&w, &c) {
                            out.push(BoundaryPoint::directional(e, *slope));
                        }
                    }
                }
            }
            BoundaryPoint::Pole { sign } => {
                for l in Letter::ALL {
                    let e = Word::reduce([l]).power_end().expect("nontrivial");
                    out.push(BoundaryPoint::directional(e, Rational::from_integer(i128::from(*sign) * depth as i128)));
                }
            }
        }
        depth += 1;
    }
    let mut seen = BTreeSet::new();
    out.retain(|b| b != alpha && seen.insert(b.to_string()));
    out.truncate(count);
    out
}

/// Points `[(w_j l^j)^inf, slope]` for `j = depth, depth + 1, ...`, where `w_j` is the first
/// `j` letters of the end of `alpha` and `l` turns off it. For `[a^inf, v]` this is
/// `[(a^j b^j)^inf, v]`. Empty for poles.
pub fn continuity_family(alpha: &BoundaryPoint, depth: usize, count: usize) -> Vec<BoundaryPoint> {
    let BoundaryPoint::Directional { end, slope } = alpha else {
        return Vec::new();
    };
    (depth.max(1)..depth.max(1) + count)
        .filter_map(|j| {
            let w = end.prefix_word(j);
            let next = end.letter_at(j);
            let (first, last) = (w.first()?, w.last()?);
            let l = Letter::ALL.into_iter().find(|&l| l != next && l != last.inverse() && l != first.inverse())?;
            let period = w.mul(&Word::reduce(std::iter::repeat_n(l, j)));
            Some(BoundaryPoint::directional(period.power_end().ok()?, *slope))
        })
        .collect()
}

/// Continuity at `alpha`: with `r` from `r_bar` by the ledger formula, every sampled
/// `beta in U(alpha; r, 1)` must map into `U'(phibar(alpha); r_bar, c_bar)`.
pub fn continuity_probe(
    alpha: &BoundaryPoint,
    setup: &MapSetup,
    ledger: &ConstantsLedger,
    r_bar: &Rational,
    samples: usize,
    c_bar_override: Option<Rational>,
) -> Result<ContinuityReport> {
    let r = ledger.continuity_radius(*r_bar);
    let betas = continuity_neighbors(alpha, to_f64(&r), samples);
    continuity_probe_on(alpha, &betas, setup, ledger, r_bar, c_bar_override)
}

/// [`continuity_probe`] on an explicit list of candidates.
pub fn continuity_probe_on(
    alpha: &BoundaryPoint,
    betas: &[BoundaryPoint],
    setup: &MapSetup,
    ledger: &ConstantsLedger,
    r_bar: &Rational,
    c_bar_override: Option<Rational>,
) -> Result<ContinuityReport> {
    ledger.verify()?;
    let r = ledger.continuity_radius(*r_bar);
    let c_bar = c_bar_override.unwrap_or(ledger.c_bar);
    let (rf, rbf, cf) = (to_f64(&r), to_f64(r_bar), to_f64(&c_bar));
    let image = phibar(alpha, setup)?.output;
    let inside: Vec<&BoundaryPoint> =
        betas.iter().filter(|b| in_u(alpha, rf, 1.0, &Target::Boundary((*b).clone()), &setup.base_x)).collect();
    let skipped = betas.len() - inside.len();
    let center = xi(&Target::Boundary(image.clone()), &setup.base_y, rbf);
    let samples = inside
        .par_iter()
        .map(|beta| {
            let img = phibar(beta, setup)?.output;
            let target = Target::Boundary(img.clone());
            let distance = image_distance(&center, &target, &setup.base_y);
            let holds = in_u_prime(&image, rbf, cf, &target, &setup.base_y);
            Ok(ContinuitySample { beta: (*beta).clone(), image: img, distance: Num::approx(distance), margin: Num::approx(cf - distance), holds })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = samples.iter().all(|s| s.holds);
    Ok(ContinuityReport {
        alpha: alpha.clone(),
        image,
        r_bar: *r_bar,
        r,
        c_bar,
        c_bar_from_ledger: c_bar_override.is_none(),
        samples,
        skipped,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use crate::star::minimal_m_on_ball;

    fn bp(s: &str) -> BoundaryPoint {
        BoundaryPoint::parse(s).unwrap()
    }

    fn g(s: &str) -> GroupElement {
        GroupElement::parse(s).unwrap()
    }

    fn setup(x: &str, y: &str) -> MapSetup {
        MapSetup::new(ActionSpec::preset(x).unwrap(), ActionSpec::preset(y).unwrap(), int(1))
    }

    /// Brute-force oracle: `ball(2L)` elements one by one, float roots, on a finer grid.
    fn qi_oracle(x: &str, y: &str, l: u32, lambda: Rational, c: Rational) -> bool {
        let (sx, sy) = (ActionSpec::preset(x).unwrap(), ActionSpec::preset(y).unwrap());
        let o = SpacePoint::origin();
        let (lf, cf) = (to_f64(&lambda), to_f64(&c));
        crate::word::ball(2 * l).iter().all(|f| {
            let dx = act(&sx, f, &o).dist(&o);
            let dy = act(&sy, f, &o).dist(&o);
            dy / lf - cf <= dx + 1e-9 && dx <= lf * dy + cf + 1e-9
        })
    }

    #[test]
    fn qi_identity_and_scaled() {
        let o = SpacePoint::origin();
        for name in ["dot", "star", "scaled2"] {
            let s = ActionSpec::preset(name).unwrap();
            let q = qi_constants(&s, &s, 3, &o, &o).unwrap();
            assert_eq!((q.lambda, q.c), (int(1), int(0)));
        }
        let q = qi_constants(&ActionSpec::dot(), &ActionSpec::scaled2(), 4, &o, &o).unwrap();
        assert_eq!((q.lambda, q.c), (int(2), int(0)));
        assert!(qi_oracle("dot", "scaled2", 4, q.lambda, q.c));
        // Nothing with a smaller lambda + C passes.
        assert!(!qi_oracle("dot", "scaled2", 4, rat(15, 8), int(0)));
        assert!(!qi_oracle("dot", "scaled2", 4, int(1), rat(7, 8)));
    }

    #[test]
    fn qi_dot_star_l6() {
        let o = SpacePoint::origin();
        let q = qi_constants(&ActionSpec::dot(), &ActionSpec::star(), 6, &o, &o).unwrap();
        assert!(q.lambda <= int(3) && q.c <= int(1), "{q:?}");
        assert!(qi_oracle("dot", "star", 6, q.lambda, q.c));
    }

    #[test]
    fn approximating_examples() {
        let o = SpacePoint::origin();
        let dot = ActionSpec::dot();
        let seq = approximating_sequence(&bp("[a^inf, 0]"), &dot, &int(1), 6, &o).unwrap();
        assert_eq!(seq, (1..=6).map(|i| GroupElement::new(Word::parse(&"a".repeat(i)).unwrap(), 0)).collect::<Vec<_>>());
        let seq = approximating_sequence(&bp("[pole, +]"), &dot, &int(1), 5, &o).unwrap();
        assert_eq!(seq, (1..=5).map(|i| GroupElement::new(Word::identity(), i)).collect::<Vec<_>>());
        // Diagonal ray: brute-force the nearest orbit point over a generous window.
        let alpha = bp("[(ab)^inf, 1]");
        let seq = approximating_sequence(&alpha, &dot, &int(1), 12, &o).unwrap();
        for (i, gi) in seq.iter().enumerate() {
            let p = ray_eval_approx(&o.to_approx(), &alpha, (i + 1) as f64);
            let best = words_up_to(10)
                .into_iter()
                .flat_map(|w| (-2..=12).map(move |z| GroupElement::new(w.clone(), z)))
                .map(|h| {
                    let d = act(&dot, &h, &o).to_approx().dist(&p);
                    (d, h)
                })
                .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)))
                .unwrap();
            assert_eq!(*gi, best.1, "i = {}", i + 1);
            assert!(best.0 <= 1.0);
        }
    }

    #[test]
    fn approximating_rejects_small_n() {
        let err = approximating_sequence(&bp("[a^inf, 0]"), &ActionSpec::dot(), &rat(1, 2), 4, &SpacePoint::origin());
        assert!(matches!(err, Err(Error::InvalidConstants(_))));
    }

    #[test]
    fn phibar_identity_and_scaled() {
        for name in ["dot", "star", "scaled2"] {
            let s = setup(name, name);
            let s = MapSetup { n: int(2), ..s };
            for a in ["[a^inf, 0]", "[(ab)^inf, 1]", "[pole, -]", "[b(a)^inf, -1/2]"] {
                assert_eq!(phibar(&bp(a), &s).unwrap().output, bp(a), "{name} {a}");
            }
        }
        let s = setup("dot", "scaled2");
        assert_eq!(phibar(&bp("[a^inf, 1]"), &s).unwrap().output, bp("[a^inf, 2]"));
        assert_eq!(phibar(&bp("[pole, +]"), &s).unwrap().output, bp("[pole, +]"));
    }

    #[test]
    fn phibar_dot_star_family() {
        let s = setup("dot", "star");
        assert_eq!(phibar(&bp("[a^inf, 0]"), &s).unwrap().output, bp("[a^inf, 0]"));
        for k in 1..=3 {
            let w = format!("{}{}", "a".repeat(k), "b".repeat(k));
            let alpha = bp(&format!("[({w})^inf, 0]"));
            let r = phibar(&alpha, &s).unwrap();
            assert_eq!(r.output, bp(&format!("[({w})^inf, 1]")));
            assert_eq!(r.analytic_crosscheck, Some(r.output.clone()));
        }
    }

    #[test]
    fn analytic_element_powers_converge() {
        let dot = ActionSpec::dot();
        for a in ["[a^inf, 1/2]", "[ab(a)^inf, -2]", "[(aB)^inf, 3/2]", "[pole, +]"] {
            let alpha = bp(a);
            let e = analytic_element(&alpha, &dot).unwrap();
            let seq: Vec<GroupElement> = (1..=40).map(|m| e.pow(m)).collect();
            let lim = crate::topology::limit_of_orbit_sequence(&seq, &dot, &SpacePoint::origin()).unwrap();
            assert_eq!(lim, alpha);
        }
    }

    #[test]
    fn expected_slope_matches_orbit_limits() {
        let specs = [ActionSpec::dot(), ActionSpec::star(), ActionSpec::scaled2(), ActionSpec::new(rat(1, 2), int(-1), rat(3, 2)).unwrap()];
        for sx in &specs {
            for sy in &specs {
                for a in ["[a^inf, 0]", "[(ab)^inf, 1]", "[b(aab)^inf, -1/3]"] {
                    let alpha = bp(a);
                    let e = analytic_element(&alpha, sx).unwrap();
                    let want = orbit_limit(sy, &e, &SpacePoint::origin()).unwrap();
                    assert_eq!(want.slope(), expected_slope(&alpha, sx, sy));
                }
            }
        }
    }

    fn scaled_ledger() -> ConstantsLedger {
        let o = SpacePoint::origin();
        let q = qi_constants(&ActionSpec::dot(), &ActionSpec::scaled2(), 6, &o, &o).unwrap();
        let m2 = minimal_m_on_ball(&ActionSpec::dot(), &ActionSpec::scaled2(), int(1), 6, &o, &o).unwrap();
        ConstantsLedger::new(int(1), crate::rational::sqrt_ceil_grid(&m2, 8), q.lambda, q.c).unwrap()
    }

    #[test]
    fn lemma_suite_scaled() {
        let s = setup("dot", "scaled2");
        let ledger = scaled_ledger();
        for a in ["[a^inf, 0]", "[(ab)^inf, 1]", "[pole, +]"] {
            let r = phibar(&bp(a), &s).unwrap();
            let rep = lemma_2_5_suite(&r, &ledger, &s, 12).unwrap();
            assert!(rep.all_hold, "{rep:?}");
            assert_eq!(rep.items.len(), 6);
        }
    }

    #[test]
    fn lemma_item_four_oracle() {
        // (a^i, 0) steps are exactly 1 apart.
        let s = setup("dot", "scaled2");
        let r = phibar(&bp("[a^inf, 0]"), &s).unwrap();
        let rep = lemma_2_5_suite(&r, &scaled_ledger(), &s, 12).unwrap();
        assert_eq!(rep.items[3].worst_sq, int(1));
        assert_eq!(rep.items[0].worst_sq, int(0));
    }

    #[test]
    fn spread_bound_scaled() {
        let s = setup("dot", "scaled2");
        let ledger = scaled_ledger();
        let rows = transfer_spread(&bp("[ab(a)^inf, 1]"), &s, &ledger, &[int(1), int(2), int(4), int(8)]).unwrap();
        assert!(rows.iter().all(|r| r.holds), "{rows:?}");
    }

    #[test]
    fn well_defined_and_equivariant() {
        let s = setup("dot", "scaled2");
        for a in ["[a^inf, 1]", "[(abAB)^inf, 0]", "[pole, -]"] {
            let rep = well_definedness_check(&bp(a), &s).unwrap();
            assert!(rep.consistent, "{rep:?}");
        }
        let rep = equivariance_check(&g("a:0"), &bp("[b^inf, 0]"), &s).unwrap();
        assert!(rep.equal);
        assert_eq!(rep.lhs, bp("[a(b)^inf, 0]"));
        let rep = equivariance_check(&g(":1"), &bp("[a^inf, 1]"), &s).unwrap();
        assert_eq!((rep.lhs.clone(), rep.equal), (bp("[a^inf, 2]"), true));
    }

    #[test]
    fn surjectivity_scaled() {
        let s = setup("dot", "scaled2");
        let rows = surjectivity_probe(&s, &rat(9, 8), &[bp("[a^inf, 2]"), bp("[pole, +]"), bp("[(ab)^inf, 0]")]);
        assert!(rows.iter().all(|r| r.hit), "{rows:?}");
        assert_eq!(rows[0].preimage, Some(bp("[a^inf, 1]")));
    }

    #[test]
    fn injectivity_scaled() {
        let s = setup("dot", "scaled2");
        let ledger = scaled_ledger();
        let rep = injectivity_probe(&bp("[a^inf, 0]"), &bp("[a^inf, 1]"), &s, &ledger).unwrap();
        assert!(rep.distinct && rep.bound_holds, "{rep:?}");
        assert_eq!(rep.image_prime, bp("[a^inf, 2]"));
        let rep = injectivity_probe(&bp("[pole, +]"), &bp("[pole, -]"), &s, &ledger).unwrap();
        assert!(rep.distinct && rep.bound_holds);
    }

    #[test]
    fn continuity_scaled_passes() {
        let s = setup("dot", "scaled2");
        let ledger = scaled_ledger();
        let rep = continuity_probe(&bp("[a^inf, 0]"), &s, &ledger, &int(4), 6, None).unwrap();
        assert!(rep.passed && rep.skipped == 0 && rep.samples.len() == 6, "{rep:?}");
    }

    #[test]
    fn continuity_dot_star_fails_on_family() {
        let s = setup("dot", "star");
        let ledger = ConstantsLedger::new(int(1), int(1), int(1), int(0)).unwrap();
        let r_bar = int(2);
        let r = to_f64(&ledger.continuity_radius(r_bar)).ceil() as usize;
        let betas: Vec<BoundaryPoint> = (r + 1..=r + 2)
            .map(|k| bp(&format!("[({}{})^inf, 0]", "a".repeat(k), "b".repeat(k))))
            .collect();
        let rep = continuity_probe_on(&bp("[a^inf, 0]"), &betas, &s, &ledger, &r_bar, Some(int(1))).unwrap();
        assert_eq!(rep.skipped, 0);
        assert!(!rep.passed);
        // Oracle: the image rays climb at slope 1 from y0, so the distance is r_bar / sqrt(2).
        for smp in &rep.samples {
            let d: f64 = smp.distance.value.parse().unwrap();
            assert!((d - 2f64.sqrt()).abs() < 1e-9, "{d}");
        }
        assert!(rep.check().is_err());
    }

    #[test]
    fn family_turns_off_the_end() {
        let alpha = BoundaryPoint::parse("[a^inf,0]").unwrap();
        let fam = continuity_family(&alpha, 2, 3);
        let names: Vec<String> = fam.iter().map(|b| b.to_string()).collect();
        assert_eq!(names, ["[(aabb)^inf, slope=0/1]", "[(aaabbb)^inf, slope=0/1]", "[(aaaabbbb)^inf, slope=0/1]"]);
        assert!(continuity_family(&BoundaryPoint::pole(true), 2, 3).is_empty());
    }

    #[test]
    fn neighbors_lie_in_u() {
        let o = SpacePoint::origin();
        for a in ["[a^inf, 0]", "[(ab)^inf, 1]", "[pole, +]"] {
            let alpha = bp(a);
            let ns = continuity_neighbors(&alpha, 10.0, 8);
            assert_eq!(ns.len(), 8);
            for b in ns {
                assert!(in_u(&alpha, 10.0, 1.0, &Target::Boundary(b.clone()), &o), "{a} {b}");
            }
        }
    }
}
