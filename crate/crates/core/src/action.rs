//! Weighted-height actions of G = F2 x Z on T x R and the constants of the boundary-map proofs.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::sync::{Mutex, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{fmt_rational, parse_rational, sqrt_f64, Rational};
use crate::space::{BoundaryPoint, GSpacePoint, SpacePoint};
use crate::word::{GroupElement, Letter, Word};

/// `(w, n) . (t, r) = (w t, r + n z_shift + psi(w))` with `psi(a) = weight_a`, `psi(b) = weight_b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActionSpec {
    pub weight_a: Rational,
    pub weight_b: Rational,
    pub z_shift: Rational,
}

pub const PRESETS: [&str; 3] = ["dot", "star", "scaled2"];

impl ActionSpec {
    pub fn new(weight_a: Rational, weight_b: Rational, z_shift: Rational) -> Result<ActionSpec> {
        if z_shift <= Rational::from_integer(0) {
            return Err(Error::UnsupportedSpec(format!("z_shift {} must be positive", fmt_rational(&z_shift))));
        }
        Ok(ActionSpec { weight_a, weight_b, z_shift })
    }

    fn from_ints(a: i128, b: i128, z: i128) -> ActionSpec {
        ActionSpec {
            weight_a: Rational::from_integer(a),
            weight_b: Rational::from_integer(b),
            z_shift: Rational::from_integer(z),
        }
    }

    pub fn dot() -> ActionSpec {
        ActionSpec::from_ints(0, 0, 1)
    }

    pub fn star() -> ActionSpec {
        ActionSpec::from_ints(0, 2, 1)
    }

    /// The dot action with the central factor translating by 2.
    pub fn scaled2() -> ActionSpec {
        ActionSpec::from_ints(0, 0, 2)
    }

    pub fn preset(name: &str) -> Option<ActionSpec> {
        match name {
            "dot" => Some(ActionSpec::dot()),
            "star" => Some(ActionSpec::star()),
            "scaled2" => Some(ActionSpec::scaled2()),
            _ => None,
        }
    }

    /// Parses a flat `key = value` file with keys `weight_a`, `weight_b`, `z_shift`.
    pub fn from_config_str(text: &str) -> Result<ActionSpec> {
        let (mut wa, mut wb, mut zs) = (None, None, None);
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .or_else(|| line.split_once(':'))
                .ok_or_else(|| Error::Config(format!("expected key = value, got {line:?}")))?;
            let v = parse_rational(v.trim().trim_matches('"'))?;
            match k.trim() {
                "weight_a" => wa = Some(v),
                "weight_b" => wb = Some(v),
                "z_shift" => zs = Some(v),
                other => return Err(Error::Config(format!("unknown key {other:?}"))),
            }
        }
        let get = |x: Option<Rational>, k: &str| x.ok_or_else(|| Error::Config(format!("missing key {k}")));
        ActionSpec::new(get(wa, "weight_a")?, get(wb, "weight_b")?, get(zs, "z_shift")?)
    }

    /// A preset name or a path to a config file.
    pub fn resolve(name_or_path: &str) -> Result<ActionSpec> {
        if let Some(spec) = ActionSpec::preset(name_or_path) {
            return Ok(spec);
        }
        let path = Path::new(name_or_path);
        if !path.exists() {
            return Err(Error::Config(format!(
                "{name_or_path:?} is neither a preset ({}) nor a readable file",
                PRESETS.join(", ")
            )));
        }
        ActionSpec::from_config_str(&std::fs::read_to_string(path)?)
    }

    pub fn psi_letter(&self, l: Letter) -> Rational {
        let (ea, eb) = l.exponents();
        self.weight_a * Rational::from_integer(ea as i128) + self.weight_b * Rational::from_integer(eb as i128)
    }

    /// The height homomorphism on F2.
    pub fn psi(&self, w: &Word) -> Rational {
        let (ea, eb) = w.exponent_sums();
        self.weight_a * Rational::from_integer(ea as i128) + self.weight_b * Rational::from_integer(eb as i128)
    }

    /// Height displacement of `g`.
    pub fn height_shift(&self, g: &GroupElement) -> Rational {
        Rational::from_integer(g.z as i128) * self.z_shift + self.psi(&g.word)
    }

    pub fn name(&self) -> String {
        PRESETS
            .iter()
            .find(|p| ActionSpec::preset(p).as_ref() == Some(self))
            .map(|p| p.to_string())
            .unwrap_or_else(|| self.to_string())
    }
}

impl fmt::Display for ActionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(weight_a={}, weight_b={}, z_shift={})",
            fmt_rational(&self.weight_a),
            fmt_rational(&self.weight_b),
            fmt_rational(&self.z_shift)
        )
    }
}

pub fn act(spec: &ActionSpec, g: &GroupElement, p: &SpacePoint) -> SpacePoint {
    GSpacePoint { tree: p.tree.left_mul(&g.word), height: p.height + spec.height_shift(g) }
}

pub fn act_boundary(_spec: &ActionSpec, g: &GroupElement, alpha: &BoundaryPoint) -> BoundaryPoint {
    match alpha {
        BoundaryPoint::Directional { end, slope } => BoundaryPoint::directional(end.left_mul(&g.word), *slope),
        BoundaryPoint::Pole { .. } => alpha.clone(),
    }
}

/// The limit of `g^n . base`; independent of the base point.
pub fn orbit_limit(spec: &ActionSpec, g: &GroupElement, _base: &SpacePoint) -> Result<BoundaryPoint> {
    let (u, c) = g.word.cyclic_reduce();
    if c.is_empty() {
        let shift = Rational::from_integer(g.z as i128) * spec.z_shift;
        return match shift.numer().signum() {
            0 => Err(Error::NoLimit),
            s => Ok(BoundaryPoint::pole(s > 0)),
        };
    }
    // g^n moves |c| tree units per step while the height moves by the full shift.
    let slope = spec.height_shift(&GroupElement::new(c.clone(), g.z)) / Rational::from_integer(c.len() as i128);
    Ok(BoundaryPoint::directional(crate::tree::TreeEnd::new(&u, &c)?, slope))
}

fn rem(x: Rational, m: Rational) -> Rational {
    x - m * (x / m).floor()
}

/// Orbit height residues (mod z_shift) of the vertices at each distance `0..=depth` from `e`
/// whose geodesic from `e` avoids the first letter `avoid`.
fn column_residues(spec: &ActionSpec, avoid: Option<Letter>, start: Rational, depth: usize) -> Vec<BTreeSet<Rational>> {
    let zs = spec.z_shift;
    let mut columns = vec![BTreeSet::from([rem(start, zs)])];
    let mut frontier: BTreeSet<(Option<Letter>, Rational)> = BTreeSet::from([(None, rem(start, zs))]);
    for _ in 0..depth {
        let mut next = BTreeSet::new();
        for (last, r) in &frontier {
            for l in Letter::ALL {
                let blocked = match last {
                    None => Some(l) == avoid,
                    Some(p) => l == p.inverse(),
                };
                if !blocked {
                    next.insert((Some(l), rem(*r + spec.psi_letter(l), zs)));
                }
            }
        }
        columns.push(next.iter().map(|(_, r)| *r).collect());
        frontier = next;
    }
    columns
}

fn circumcenter(p: (Rational, Rational), q: (Rational, Rational), r: (Rational, Rational)) -> Option<(Rational, Rational)> {
    let two = Rational::from_integer(2);
    let (bx, by) = (q.0 - p.0, q.1 - p.1);
    let (cx, cy) = (r.0 - p.0, r.1 - p.1);
    let d = two * (bx * cy - by * cx);
    if d == Rational::from_integer(0) {
        return None;
    }
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    Some((p.0 + (cy * b2 - by * c2) / d, p.1 + (bx * c2 - cx * b2) / d))
}

/// Exact square of the covering radius of `G . base`.
///
/// Every point of X lies on an edge `e -- l` up to the action, and the tree distances from
/// it to orbit vertices unfold into planar distances to columns of heights at `x = -k`
/// (vertices behind `e`) and `x = 1 + k` (vertices beyond `l`). The radius is the largest
/// empty circle centred in the strip `0 <= x <= 1`.
pub fn covering_radius_sq(spec: &ActionSpec, base: &SpacePoint) -> Result<Rational> {
    static CACHE: OnceLock<Mutex<HashMap<ActionSpec, Rational>>> = OnceLock::new();
    if !base.tree.is_vertex() {
        return Err(Error::UnsupportedSpec("covering radius needs a vertex base point".into()));
    }
    let cache = CACHE.get_or_init(Default::default);
    if let Some(r) = cache.lock().expect("cache lock").get(spec) {
        return Ok(*r);
    }
    let r = covering_radius_sq_uncached(spec)?;
    cache.lock().expect("cache lock").insert(spec.clone(), r);
    Ok(r)
}

fn covering_radius_sq_uncached(spec: &ActionSpec) -> Result<Rational> {
    if spec.z_shift <= Rational::from_integer(0) {
        return Err(Error::UnsupportedSpec("z_shift must be positive".into()));
    }
    let zs = spec.z_shift;
    let zero = Rational::from_integer(0);
    let one = Rational::from_integer(1);
    let two = Rational::from_integer(2);
    // Column 0 alone is within sqrt(1 + zs^2/4) of the strip, so farther columns never matter.
    let reach = one + zs / two;
    let depth = (reach.ceil().to_integer() as usize) + 1;
    let mut best = zero;
    for l in [Letter::A, Letter::B] {
        let mut pts: Vec<(Rational, Rational)> = Vec::new();
        let near = column_residues(spec, Some(l), zero, depth);
        let far = column_residues(spec, Some(l.inverse()), spec.psi_letter(l), depth);
        let window = reach / zs;
        let jlo = -window.ceil().to_integer() - 1;
        let jhi = window.ceil().to_integer() + 2;
        let mut add = |x: Rational, r: Rational| {
            for j in jlo..=jhi {
                let y = r + zs * Rational::from_integer(j);
                if x >= -reach && x <= one + reach && y >= -reach && y <= zs + reach {
                    pts.push((x, y));
                }
            }
        };
        for (k, col) in near.iter().enumerate() {
            for r in col {
                add(-Rational::from_integer(k as i128), *r);
            }
        }
        for (k, col) in far.iter().enumerate() {
            for r in col {
                add(one + Rational::from_integer(k as i128), *r);
            }
        }
        let nearest = |c: (Rational, Rational)| {
            pts.iter()
                .map(|p| (p.0 - c.0) * (p.0 - c.0) + (p.1 - c.1) * (p.1 - c.1))
                .min()
                .expect("nonempty")
        };
        let in_window = |c: &(Rational, Rational)| c.0 >= zero && c.0 <= one && c.1 >= zero && c.1 <= zs;
        let mut candidates = Vec::new();
        let n = pts.len();
        for i in 0..n {
            for j in i + 1..n {
                let (p, q) = (pts[i], pts[j]);
                // Bisector of p, q meets x = x0 at a single height unless p, q share a height.
                if p.1 != q.1 {
                    for x0 in [zero, one] {
                        let y = ((q.0 - p.0) * (q.0 + p.0 - two * x0) + (q.1 - p.1) * (q.1 + p.1)) / (two * (q.1 - p.1));
                        candidates.push((x0, y));
                    }
                }
                for r in &pts[j + 1..] {
                    if let Some(c) = circumcenter(p, q, *r) {
                        if in_window(&c) {
                            candidates.push(c);
                        }
                    }
                }
            }
        }
        for c in candidates.into_iter().filter(in_window) {
            let d = nearest(c);
            if d > best {
                best = d;
            }
        }
    }
    Ok(best)
}

/// The smallest `N` with `G B(base, N) = X`.
pub fn covering_radius(spec: &ActionSpec, base: &SpacePoint) -> Result<f64> {
    covering_radius_sq(spec, base).map(|r2| sqrt_f64(&r2))
}

/// The named constants of the boundary-map proofs, with the derived ones recomputed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsLedger {
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub n: Rational,
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub m: Rational,
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub lambda: Rational,
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub c: Rational,
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub n_tilde: Rational,
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub m_tilde: Rational,
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub m_prime: Rational,
    #[serde(serialize_with = "crate::report::ser_rational")]
    pub c_bar: Rational,
}

impl ConstantsLedger {
    pub fn new(n: Rational, m: Rational, lambda: Rational, c: Rational) -> Result<ConstantsLedger> {
        let zero = Rational::from_integer(0);
        if n < zero || m < zero || c < zero || lambda < Rational::from_integer(1) {
            return Err(Error::InvalidConstants(format!(
                "need N, M, C >= 0 and lambda >= 1 (got N={}, M={}, lambda={}, C={})",
                fmt_rational(&n),
                fmt_rational(&m),
                fmt_rational(&lambda),
                fmt_rational(&c)
            )));
        }
        let two = Rational::from_integer(2);
        let one = Rational::from_integer(1);
        let n_tilde = two * n;
        let m_tilde = lambda * (n + n_tilde) + c + m;
        let m_prime = lambda * (two * n + one) + two * m + c;
        let c_bar = lambda * (two * n + Rational::from_integer(3)) + c + two * (m_tilde + one);
        let ledger = ConstantsLedger { n, m, lambda, c, n_tilde, m_tilde, m_prime, c_bar };
        ledger.verify()?;
        Ok(ledger)
    }

    /// Recomputes every derived constant from `N, M, lambda, C`.
    pub fn verify(&self) -> Result<()> {
        let one = Rational::from_integer(1);
        let two = Rational::from_integer(2);
        let checks = [
            ("N~ = 2N", self.n_tilde == two * self.n),
            ("M~ = lambda(N + N~) + C + M", self.m_tilde == self.lambda * (self.n + self.n_tilde) + self.c + self.m),
            ("M' = lambda(2N+1) + 2M + C", self.m_prime == self.lambda * (two * self.n + one) + two * self.m + self.c),
            (
                "c_bar = lambda(2N+3) + C + 2(M~+1)",
                self.c_bar == self.lambda * (two * self.n + Rational::from_integer(3)) + self.c + two * (self.m_tilde + one),
            ),
        ];
        match checks.iter().find(|(_, ok)| !ok) {
            Some((name, _)) => Err(Error::InvalidConstants(format!("ledger violates {name}"))),
            None => Ok(()),
        }
    }

    /// Bound (4): consecutive approximating points in X.
    pub fn step_bound_x(&self) -> Rational {
        Rational::from_integer(2) * self.n + Rational::from_integer(1)
    }

    /// Bound (5): consecutive image points in Y.
    pub fn step_bound_y(&self) -> Rational {
        self.lambda * self.step_bound_x() + self.c
    }

    /// Bound (6): ray points of the image boundary point against the image sequence.
    pub fn cover_bound_y(&self) -> Rational {
        Rational::from_integer(3) * (self.m_tilde + Rational::from_integer(1)) + self.step_bound_y()
    }

    /// Radius `r` in X that the continuity argument pairs with `r_bar` in Y.
    pub fn continuity_radius(&self, r_bar: Rational) -> Rational {
        self.lambda * (r_bar + self.c + self.m_tilde + Rational::from_integer(1)) + self.n + Rational::from_integer(1)
    }

    /// Radius in X used by the Cauchy-transfer argument for a Y-side radius `r_y`.
    pub fn transfer_radius(&self, r_y: Rational) -> Rational {
        self.lambda * (r_y + self.c + self.m) + self.n
    }

    /// Lower bound on the distance between the image rays at X-separation `t`.
    pub fn divergence_lower_bound(&self, t: Rational) -> Rational {
        let four = Rational::from_integer(4);
        (t - Rational::from_integer(2) * self.n) / self.lambda
            - self.c
            - (four * (self.m_tilde + Rational::from_integer(1)) + self.step_bound_y())
    }
}
