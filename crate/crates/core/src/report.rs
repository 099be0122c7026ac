//! Run configuration, the commands behind the CLI, and JSON/CSV rendering.

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};
use serde_json::{json, Value};

use crate::action::{covering_radius_sq, orbit_limit, ActionSpec, ConstantsLedger};
use crate::boundary_map::{
    continuity_family, continuity_neighbors, continuity_probe_on, equivariance_check, expected_slope, injectivity_probe,
    lemma_2_5_suite, phibar, qi_constants, surjectivity_probe, transfer_spread, well_definedness_check, MapSetup,
    QiEstimate,
};
use crate::error::{Error, Result};
use crate::rational::{fmt_rational, parse_rational, sqrt_ceil_grid, to_f64, Rational};
use crate::space::{dist_point_to_segment, BoundaryPoint, GeodesicSegment, SpacePoint};
use crate::star::{canonical_family, check_condition_star, minimal_m_on_ball, witness_growth_scan, StarVerdict};
use crate::tree::{PrefixLen, TreeEnd};
use crate::word::{GroupElement, Letter, Word};

/// A numeric field tagged with whether it is exact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Num {
    pub value: String,
    pub exact: bool,
}

impl Num {
    pub fn exact(q: &Rational) -> Num {
        Num { value: fmt_rational(q), exact: true }
    }

    pub fn approx(x: f64) -> Num {
        Num { value: format!("{x}"), exact: false }
    }
}

pub fn ser_rational<S: Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    Num::exact(q).serialize(s)
}

/// Grid on which "auto" radii are rounded up.
const AUTO_GRID: i128 = 8;

/// A constant given explicitly or left to be derived.
#[derive(Debug, Clone, PartialEq)]
pub enum Setting {
    Auto,
    Value(Rational),
}

impl Setting {
    pub fn parse(s: &str) -> Result<Setting> {
        match s.trim() {
            "auto" => Ok(Setting::Auto),
            v => parse_rational(v).map(Setting::Value),
        }
    }

    fn label(&self) -> String {
        match self {
            Setting::Auto => "auto".into(),
            Setting::Value(q) => fmt_rational(q),
        }
    }
}

/// Whether the requested checks are expected to pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    Pass,
    Fail,
}

pub const PROBE_KINDS: [&str; 5] = ["continuity", "equivariance", "injectivity", "surjectivity", "well-defined"];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec_x: String,
    pub spec_y: String,
    /// Ball radius for condition (*).
    pub l: u32,
    pub n: Setting,
    pub m: Setting,
    pub lambda: Setting,
    pub c: Setting,
    /// Ball radius for the quasi-isometry estimate.
    pub qi_l: u32,
    pub k: usize,
    pub i_max: u32,
    pub seed: u64,
    /// Number of sampled boundary points (and random pairs) per probe.
    pub samples: usize,
    pub probes: Vec<String>,
    /// Continuity radii; empty means [`default_r_bars`].
    pub r_bar: Vec<Rational>,
    pub c_bar: Option<Rational>,
    /// Boundary points to use instead of sampled ones.
    pub alpha: Vec<String>,
    pub expect: Expect,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            spec_x: "dot".into(),
            spec_y: "scaled2".into(),
            l: 8,
            n: Setting::Auto,
            m: Setting::Auto,
            lambda: Setting::Auto,
            c: Setting::Auto,
            qi_l: 6,
            k: crate::boundary_map::DEFAULT_K,
            i_max: 12,
            seed: 0,
            samples: 6,
            probes: PROBE_KINDS.iter().map(|s| s.to_string()).collect(),
            r_bar: Vec::new(),
            c_bar: None,
            alpha: Vec::new(),
            expect: Expect::Pass,
            output: None,
        }
    }
}

fn parse_int<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("{key}: expected an integer, got {v:?}")))
}

impl RunConfig {
    /// Sets one key. Lists are comma separated, except `alpha`, which is `;` separated.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim().trim_matches('"');
        match key.trim() {
            "spec_x" => self.spec_x = v.into(),
            "spec_y" => self.spec_y = v.into(),
            "L" => self.l = parse_int(key, v)?,
            "N" => self.n = Setting::parse(v)?,
            "M" => self.m = Setting::parse(v)?,
            "lambda" => self.lambda = Setting::parse(v)?,
            "C" => self.c = Setting::parse(v)?,
            "qi_L" => self.qi_l = parse_int(key, v)?,
            "k" => self.k = parse_int(key, v)?,
            "i_max" => self.i_max = parse_int(key, v)?,
            "seed" => self.seed = parse_int(key, v)?,
            "samples" => self.samples = parse_int(key, v)?,
            "probes" => {
                self.probes = v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
                if let Some(bad) = self.probes.iter().find(|p| !PROBE_KINDS.contains(&p.as_str())) {
                    return Err(Error::Config(format!("unknown probe {bad:?} (known: {})", PROBE_KINDS.join(", "))));
                }
            }
            "r_bar" => self.r_bar = v.split(',').filter(|s| !s.trim().is_empty()).map(parse_rational).collect::<Result<_>>()?,
            "c_bar" => self.c_bar = Some(parse_rational(v)?),
            "alpha" => self.alpha = v.split(';').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
            "expect" => {
                self.expect = match v {
                    "pass" => Expect::Pass,
                    "fail" => Expect::Fail,
                    _ => return Err(Error::Config(format!("expect: want pass or fail, got {v:?}"))),
                }
            }
            "output" => self.output = Some(PathBuf::from(v)),
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Parses a flat `key = value` file on top of the defaults.
    pub fn from_config_str(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Config(format!("expected key = value, got {line:?}")))?;
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn specs(&self) -> Result<(ActionSpec, ActionSpec)> {
        Ok((ActionSpec::resolve(&self.spec_x)?, ActionSpec::resolve(&self.spec_y)?))
    }

    fn echo(&self) -> Value {
        json!({
            "spec_x": self.spec_x,
            "spec_y": self.spec_y,
            "L": self.l,
            "N": self.n.label(),
            "M": self.m.label(),
            "lambda": self.lambda.label(),
            "C": self.c.label(),
            "qi_L": self.qi_l,
            "k": self.k,
            "i_max": self.i_max,
            "seed": self.seed,
            "samples": self.samples,
            "probes": self.probes,
            "r_bar": self.r_bar.iter().map(fmt_rational).collect::<Vec<_>>(),
            "c_bar": self.c_bar.as_ref().map(fmt_rational),
            "alpha": self.alpha,
            "expect": self.expect,
        })
    }
}

// ---------------------------------------------------------------------------------------------
// Constant resolution

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub value: Num,
    pub source: &'static str,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ResolvedConstants {
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<Resolved>,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<Resolved>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Resolved>,
    #[serde(rename = "C", skip_serializing_if = "Option::is_none")]
    pub c: Option<Resolved>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qi: Option<QiEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ledger: Option<ConstantsLedger>,
}

fn resolved(q: &Rational, auto: bool, note: Option<String>) -> Resolved {
    Resolved { value: Num::exact(q), source: if auto { "auto" } else { "config" }, note }
}

/// `N` for `spec`: the covering radius rounded up to the grid when "auto".
pub fn resolve_n(setting: &Setting, spec: &ActionSpec, base: &SpacePoint) -> Result<(Rational, Resolved)> {
    let r2 = covering_radius_sq(spec, base)?;
    let note = Some(format!("covering radius^2 = {}", fmt_rational(&r2)));
    Ok(match setting {
        Setting::Value(q) => (*q, resolved(q, false, note)),
        Setting::Auto => {
            let n = sqrt_ceil_grid(&r2, AUTO_GRID);
            (n, resolved(&n, true, note))
        }
    })
}

/// All four constants and the derived ledger. "auto" `M` is the smallest value on the grid
/// for which (*) holds on `ball(L)`; "auto" `lambda, C` come from the quasi-isometry estimate.
pub fn resolve_ledger(cfg: &RunConfig, spec_x: &ActionSpec, spec_y: &ActionSpec) -> Result<(ConstantsLedger, ResolvedConstants)> {
    let o = SpacePoint::origin();
    let (n, n_res) = resolve_n(&cfg.n, spec_x, &o)?;
    let (m, m_res) = match &cfg.m {
        Setting::Value(q) => (*q, resolved(q, false, None)),
        Setting::Auto => {
            let m2 = minimal_m_on_ball(spec_x, spec_y, n, cfg.l, &o, &o)?;
            let m = sqrt_ceil_grid(&m2, AUTO_GRID);
            (m, resolved(&m, true, Some(format!("minimal M^2 on ball({}) = {}", cfg.l, fmt_rational(&m2)))))
        }
    };
    let need_qi = cfg.lambda == Setting::Auto || cfg.c == Setting::Auto;
    let qi = if need_qi { Some(qi_constants(spec_x, spec_y, cfg.qi_l, &o, &o)?) } else { None };
    let pick = |s: &Setting, auto: Option<Rational>| match s {
        Setting::Value(q) => (*q, resolved(q, false, None)),
        Setting::Auto => {
            let q = auto.expect("qi computed");
            (q, resolved(&q, true, Some(format!("quasi-isometry estimate on ball({})", cfg.qi_l))))
        }
    };
    let (lambda, lambda_res) = pick(&cfg.lambda, qi.as_ref().map(|q| q.lambda));
    let (c, c_res) = pick(&cfg.c, qi.as_ref().map(|q| q.c));
    let ledger = ConstantsLedger::new(n, m, lambda, c)?;
    let echo = ResolvedConstants {
        n: Some(n_res),
        m: Some(m_res),
        lambda: Some(lambda_res),
        c: Some(c_res),
        qi,
        ledger: Some(ledger.clone()),
    };
    Ok((ledger, echo))
}

// ---------------------------------------------------------------------------------------------
// Sampling

fn random_word(rng: &mut ChaCha8Rng, len: usize) -> Word {
    let mut w = Word::identity();
    while w.len() < len {
        let l = Letter::ALL[rng.random_range(0..4)];
        if w.last() != Some(l.inverse()) {
            w.push(l);
        }
    }
    w
}

/// Distinct boundary points drawn from `seed`: short prefixes and periods, slopes with small
/// denominators, and both poles once `count` is at least 4.
pub fn sample_boundary_points(seed: u64, count: usize) -> Vec<BoundaryPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    if count >= 4 {
        for sign in [true, false] {
            let p = BoundaryPoint::pole(sign);
            seen.insert(p.to_string());
            out.push(p);
        }
    }
    while out.len() < count {
        let (plen, clen) = (rng.random_range(0..=3), rng.random_range(1..=3));
        let prefix = random_word(&mut rng, plen);
        let period = random_word(&mut rng, clen);
        let Ok(end) = TreeEnd::new(&prefix, &period) else { continue };
        let den: i128 = rng.random_range(1..=3);
        let num: i128 = rng.random_range(-2 * den..=2 * den);
        let p = BoundaryPoint::directional(end, Rational::new(num, den));
        if seen.insert(p.to_string()) {
            out.push(p);
        }
    }
    out
}

/// Random `(g, alpha)` pairs with `|g| <= max_norm`.
pub fn sample_pairs(seed: u64, count: usize, max_norm: u64) -> Vec<(GroupElement, BoundaryPoint)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let points = sample_boundary_points(seed, count.max(4));
    (0..count)
        .map(|i| {
            let len = rng.random_range(0..=max_norm) as usize;
            let word_len = rng.random_range(0..=len);
            let z = (len - word_len) as i64 * if rng.random_bool(0.5) { 1 } else { -1 };
            (GroupElement::new(random_word(&mut rng, word_len), z), points[i % points.len()].clone())
        })
        .collect()
}

fn parse_alphas(cfg: &RunConfig) -> Result<Vec<BoundaryPoint>> {
    if cfg.alpha.is_empty() {
        Ok(sample_boundary_points(cfg.seed, cfg.samples))
    } else {
        cfg.alpha.iter().map(|s| BoundaryPoint::parse(s)).collect()
    }
}

// ---------------------------------------------------------------------------------------------
// Commands

/// The outcome of one command: its JSON document, an optional CSV table, and whether every
/// requested check passed.
#[derive(Debug, Clone)]
pub struct CommandReport {
    pub json: Value,
    pub csv: Option<String>,
    pub passed: bool,
}

impl CommandReport {
    /// Pretty JSON; field order is fixed, so reruns are byte-identical.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.json).expect("serializable") + "\n"
    }

    /// 0 when the outcome matches the expectation, 2 otherwise.
    pub fn exit_code(&self, expect: Expect) -> i32 {
        if self.passed == (expect == Expect::Pass) {
            0
        } else {
            2
        }
    }
}

fn envelope(command: &str, cfg: &RunConfig, constants: Option<&ResolvedConstants>, result: Value, passed: bool) -> Value {
    json!({
        "command": command,
        "config": cfg.echo(),
        "constants": constants,
        "result": result,
        "passed": passed,
    })
}

/// One flattened check for CSV output.
#[derive(Debug, Clone, Serialize)]
struct CheckRow {
    subject: String,
    check: String,
    holds: bool,
    value: String,
}

/// `(subject, check, holds, value)`.
type CheckRows = Vec<(String, String, bool, String)>;

fn check_csv(rows: CheckRows) -> Result<String> {
    let rows: Vec<CheckRow> = rows.into_iter().map(|(subject, check, holds, value)| CheckRow { subject, check, holds, value }).collect();
    to_csv(&rows)
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?).map_err(|e| Error::Io(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitRow {
    pub i: u32,
    pub g: GroupElement,
    pub limit_g_x: BoundaryPoint,
    pub slope_g_x: String,
    pub angle_g_x: f64,
    pub limit_g_y: BoundaryPoint,
    pub slope_g_y: String,
    pub angle_g_y: f64,
    pub limit_a_x: BoundaryPoint,
    pub limit_a_y: BoundaryPoint,
    /// Common prefix length of the tree ends of `(a^i b^i)^inf` and `a^inf`.
    pub prefix_length: usize,
    /// Exact `d^2(a_i y0, [y0, g_i y0])` in Y.
    pub d_sq_segment_y: String,
}

/// Orbit limits of `g_i = (a^i b^i, 0)` and `a_i = (a^i, 0)` under both actions, `i = 1..i_max`.
pub fn limits_table(spec_x: &ActionSpec, spec_y: &ActionSpec, i_max: u32) -> Result<Vec<LimitRow>> {
    let o = SpacePoint::origin();
    let a_end = Word::reduce([Letter::A]).power_end()?;
    (1..=i_max)
        .map(|i| {
            let (g, a) = canonical_family(i);
            let gx = orbit_limit(spec_x, &g, &o)?;
            let gy = orbit_limit(spec_y, &g, &o)?;
            let prefix_length = match g.word.power_end()?.common_prefix_length(&a_end) {
                PrefixLen::Finite(n) => n,
                PrefixLen::Infinite => usize::MAX,
            };
            let seg = GeodesicSegment::new(o.clone(), crate::action::act(spec_y, &g, &o));
            let (d2, _) = dist_point_to_segment(&crate::action::act(spec_y, &a, &o), &seg);
            let slope = |b: &BoundaryPoint| b.slope().map(|s| fmt_rational(&s)).unwrap_or_else(|| "pole".into());
            Ok(LimitRow {
                i,
                slope_g_x: slope(&gx),
                angle_g_x: gx.angle(),
                slope_g_y: slope(&gy),
                angle_g_y: gy.angle(),
                limit_a_x: orbit_limit(spec_x, &a, &o)?,
                limit_a_y: orbit_limit(spec_y, &a, &o)?,
                limit_g_x: gx,
                limit_g_y: gy,
                g,
                prefix_length,
                d_sq_segment_y: fmt_rational(&d2),
            })
        })
        .collect()
}

pub fn cmd_limits(cfg: &RunConfig) -> Result<CommandReport> {
    let (sx, sy) = cfg.specs()?;
    let rows = limits_table(&sx, &sy, cfg.i_max)?;
    let csv = Some(to_csv(&rows)?);
    let result = json!({ "rows": rows });
    Ok(CommandReport { json: envelope("limits", cfg, None, result, true), csv, passed: true })
}

fn verdict_csv(v: &StarVerdict) -> Result<String> {
    #[derive(Serialize)]
    struct Row {
        g: String,
        a: String,
        d_sq_x: String,
        d_sq_y: String,
    }
    let rows: Vec<Row> = v
        .witnesses
        .iter()
        .map(|w| Row { g: w.g.to_string(), a: w.a.to_string(), d_sq_x: fmt_rational(&w.d_sq_x), d_sq_y: fmt_rational(&w.d_sq_y) })
        .collect();
    to_csv(&rows)
}

/// Condition (*) on `ball(L)`. With "auto" `M`, `M` is the grid value just above the
/// minimal one, so the interesting output is `minimal_M_sq`.
pub fn cmd_check_star(cfg: &RunConfig) -> Result<CommandReport> {
    let (sx, sy) = cfg.specs()?;
    let o = SpacePoint::origin();
    let (n, n_res) = resolve_n(&cfg.n, &sx, &o)?;
    let (m, m_res) = match &cfg.m {
        Setting::Value(q) => (*q, resolved(q, false, None)),
        Setting::Auto => {
            let m2 = minimal_m_on_ball(&sx, &sy, n, cfg.l, &o, &o)?;
            let m = sqrt_ceil_grid(&m2, AUTO_GRID);
            (m, resolved(&m, true, Some(format!("minimal M^2 on ball({}) = {}", cfg.l, fmt_rational(&m2)))))
        }
    };
    let verdict = check_condition_star(&sx, &sy, n, m, cfg.l, &o, &o)?;
    let constants = ResolvedConstants { n: Some(n_res), m: Some(m_res), ..Default::default() };
    let csv = Some(verdict_csv(&verdict)?);
    let passed = verdict.holds_on_ball;
    let (n2, m2) = (n * n, m * m);
    // The pairs (a^i b^i, a^i) that fit in the ball, flagged when they violate (*).
    let family: Vec<Value> = witness_growth_scan(&sx, &sy, canonical_family, cfg.l / 2, &o, &o)
        .into_iter()
        .skip(1)
        .map(|r| {
            let witness = r.d_sq_x <= n2 && r.d_sq_y > m2;
            json!({ "i": r.i, "g": r.g, "a": r.a, "d_sq_x": Num::exact(&r.d_sq_x), "d_sq_y": Num::exact(&r.d_sq_y), "witness": witness })
        })
        .collect();
    let mut result = serde_json::to_value(&verdict).expect("serializable");
    result["canonical_family"] = json!(family);
    Ok(CommandReport { json: envelope("check-star", cfg, Some(&constants), result, passed), csv, passed })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhibarRow {
    pub alpha: BoundaryPoint,
    pub image: Option<BoundaryPoint>,
    pub expected_slope: Option<String>,
    pub sequence_length: usize,
    pub consistent: bool,
    pub error: Option<String>,
}

fn phibar_rows(alphas: &[BoundaryPoint], setup: &MapSetup) -> Vec<PhibarRow> {
    use rayon::prelude::*;
    alphas
        .par_iter()
        .map(|alpha| {
            let expected = expected_slope(alpha, &setup.spec_x, &setup.spec_y).map(|s| fmt_rational(&s));
            match phibar(alpha, setup) {
                Ok(r) => PhibarRow {
                    alpha: alpha.clone(),
                    consistent: r.verdict.is_consistent(),
                    sequence_length: r.sequence.len(),
                    image: Some(r.output),
                    expected_slope: expected,
                    error: None,
                },
                Err(e) => PhibarRow {
                    alpha: alpha.clone(),
                    image: None,
                    expected_slope: expected,
                    sequence_length: 0,
                    consistent: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

fn setup_for(cfg: &RunConfig, sx: ActionSpec, sy: ActionSpec, n: Rational) -> MapSetup {
    let mut setup = MapSetup::new(sx, sy, n);
    setup.k = cfg.k;
    setup
}

/// `phibar` on the configured (or sampled) boundary points, each cross-checked against the
/// orbit limit of an element fixing it.
pub fn cmd_phibar(cfg: &RunConfig) -> Result<CommandReport> {
    let (sx, sy) = cfg.specs()?;
    let (n, n_res) = resolve_n(&cfg.n, &sx, &SpacePoint::origin())?;
    let alphas = parse_alphas(cfg)?;
    let setup = setup_for(cfg, sx, sy, n);
    let rows = phibar_rows(&alphas, &setup);
    let passed = rows.iter().all(|r| r.error.is_none() && r.consistent);
    let csv = Some(to_csv(&rows)?);
    let constants = ResolvedConstants { n: Some(n_res), ..Default::default() };
    Ok(CommandReport { json: envelope("phibar", cfg, Some(&constants), json!({ "rows": rows }), passed), csv, passed })
}

fn error_entry(alpha: &BoundaryPoint, e: &Error) -> Value {
    json!({ "alpha": alpha, "error": e.to_string() })
}

/// The per-sequence bounds (`suite = "lemma25"`), the transfer spread (`"spread"`), or both.
pub fn cmd_bounds(cfg: &RunConfig, suite: &str) -> Result<CommandReport> {
    if !["lemma25", "spread", "all"].contains(&suite) {
        return Err(Error::Config(format!("unknown suite {suite:?} (known: lemma25, spread, all)")));
    }
    let (sx, sy) = cfg.specs()?;
    let (ledger, constants) = resolve_ledger(cfg, &sx, &sy)?;
    let setup = setup_for(cfg, sx, sy, ledger.n);
    let alphas = parse_alphas(cfg)?;
    let radii: Vec<Rational> = [1, 2, 4, 8].map(Rational::from_integer).to_vec();
    let mut passed = true;
    let mut entries = Vec::new();
    let mut csv_rows = Vec::new();
    for alpha in &alphas {
        let mut entry = serde_json::Map::new();
        entry.insert("alpha".into(), json!(alpha));
        if suite != "spread" {
            match phibar(alpha, &setup).and_then(|r| lemma_2_5_suite(&r, &ledger, &setup, cfg.i_max as usize)) {
                Ok(rep) => {
                    passed &= rep.all_hold;
                    for item in &rep.items {
                        csv_rows.push((alpha.to_string(), format!("lemma25.{}", item.item), item.holds, fmt_rational(&item.margin_sq)));
                    }
                    entry.insert("lemma25".into(), serde_json::to_value(&rep).expect("serializable"));
                }
                Err(e) => {
                    passed = false;
                    entry.insert("lemma25".into(), error_entry(alpha, &e));
                }
            }
        }
        if suite != "lemma25" {
            match transfer_spread(alpha, &setup, &ledger, &radii) {
                Ok(rows) => {
                    passed &= rows.iter().all(|r| r.holds);
                    for r in &rows {
                        csv_rows.push((alpha.to_string(), format!("spread.R={}", fmt_rational(&r.r_y)), r.holds, r.spread.value.clone()));
                    }
                    entry.insert("spread".into(), serde_json::to_value(&rows).expect("serializable"));
                }
                Err(e) => {
                    passed = false;
                    entry.insert("spread".into(), error_entry(alpha, &e));
                }
            }
        }
        entries.push(Value::Object(entry));
    }
    let csv = Some(check_csv(csv_rows)?);
    let result = json!({ "suite": suite, "entries": entries });
    Ok(CommandReport { json: envelope("bounds", cfg, Some(&constants), result, passed), csv, passed })
}

/// Default continuity radii: 2, 4 and the first integer past `sqrt(2) c_bar`, where the image
/// of a point with a different slope must leave `U'(phibar(alpha); r_bar, c_bar)`. Poles get
/// only the first two: their neighbours need slopes near `r`.
pub fn default_r_bars(c_bar: &Rational) -> Vec<Rational> {
    let far = (std::f64::consts::SQRT_2 * to_f64(c_bar)).ceil() as i128 + 1;
    let mut v: Vec<Rational> = [2, 4, far].map(Rational::from_integer).to_vec();
    v.sort();
    v.dedup();
    v
}

fn run_probe(kind: &str, cfg: &RunConfig, setup: &MapSetup, ledger: &ConstantsLedger, alphas: &[BoundaryPoint]) -> Result<(Value, bool, CheckRows)> {
    let mut csv = Vec::new();
    match kind {
        "continuity" => {
            let c_bar = cfg.c_bar.unwrap_or(ledger.c_bar);
            let mut reports = Vec::new();
            let mut passed = true;
            for alpha in alphas {
                let r_bars = if !cfg.r_bar.is_empty() {
                    cfg.r_bar.clone()
                } else if alpha.end().is_some() {
                    default_r_bars(&c_bar)
                } else {
                    [2, 4].map(Rational::from_integer).to_vec()
                };
                for r_bar in &r_bars {
                    let r = ledger.continuity_radius(*r_bar);
                    let depth = to_f64(&r).ceil() as usize + 1;
                    let mut betas = continuity_neighbors(alpha, to_f64(&r), cfg.samples);
                    betas.extend(continuity_family(alpha, depth, 2));
                    match continuity_probe_on(alpha, &betas, setup, ledger, r_bar, cfg.c_bar) {
                        Ok(rep) => {
                            passed &= rep.passed;
                            csv.push((alpha.to_string(), format!("continuity.r_bar={}", fmt_rational(r_bar)), rep.passed, rep.samples.len().to_string()));
                            reports.push(serde_json::to_value(&rep).expect("serializable"));
                        }
                        Err(e) => {
                            passed = false;
                            reports.push(error_entry(alpha, &e));
                        }
                    }
                }
            }
            Ok((json!(reports), passed, csv))
        }
        "equivariance" => {
            let pairs = sample_pairs(cfg.seed, cfg.samples.max(1), 4);
            let mut out = Vec::new();
            let mut passed = true;
            for (g, alpha) in &pairs {
                match equivariance_check(g, alpha, setup) {
                    Ok(rep) => {
                        passed &= rep.equal;
                        csv.push((alpha.to_string(), format!("equivariance.g={g}"), rep.equal, rep.lhs.to_string()));
                        out.push(serde_json::to_value(&rep).expect("serializable"));
                    }
                    Err(e) => {
                        passed = false;
                        out.push(error_entry(alpha, &e));
                    }
                }
            }
            Ok((json!(out), passed, csv))
        }
        "injectivity" => {
            let mut out = Vec::new();
            let mut passed = true;
            for w in alphas.windows(2) {
                match injectivity_probe(&w[0], &w[1], setup, ledger) {
                    Ok(rep) => {
                        let ok = rep.distinct && rep.bound_holds;
                        passed &= ok;
                        csv.push((w[0].to_string(), format!("injectivity.vs={}", w[1]), ok, rep.observed.value.clone()));
                        out.push(serde_json::to_value(&rep).expect("serializable"));
                    }
                    Err(e) => {
                        passed = false;
                        out.push(error_entry(&w[0], &e));
                    }
                }
            }
            Ok((json!(out), passed, csv))
        }
        "surjectivity" => {
            let (n_y, _) = resolve_n(&Setting::Auto, &setup.spec_y, &setup.base_y)?;
            let rows = surjectivity_probe(setup, &n_y, alphas);
            let passed = rows.iter().all(|r| r.hit);
            for r in &rows {
                csv.push((r.target.to_string(), "surjectivity".into(), r.hit, r.note.clone().unwrap_or_default()));
            }
            Ok((json!({ "N_y": Num::exact(&n_y), "rows": rows }), passed, csv))
        }
        "well-defined" => {
            let mut out = Vec::new();
            let mut passed = true;
            for alpha in alphas {
                match well_definedness_check(alpha, setup) {
                    Ok(rep) => {
                        passed &= rep.consistent;
                        csv.push((alpha.to_string(), "well-defined".into(), rep.consistent, rep.nearest.to_string()));
                        out.push(serde_json::to_value(&rep).expect("serializable"));
                    }
                    Err(e) => {
                        passed = false;
                        out.push(error_entry(alpha, &e));
                    }
                }
            }
            Ok((json!(out), passed, csv))
        }
        other => Err(Error::Config(format!("unknown probe {other:?} (known: {})", PROBE_KINDS.join(", ")))),
    }
}

/// The probes in `kinds` on the configured (or sampled) boundary points.
pub fn cmd_probe(cfg: &RunConfig, kinds: &[String]) -> Result<CommandReport> {
    let (sx, sy) = cfg.specs()?;
    let (ledger, constants) = resolve_ledger(cfg, &sx, &sy)?;
    let setup = setup_for(cfg, sx, sy, ledger.n);
    let alphas = parse_alphas(cfg)?;
    let mut results = serde_json::Map::new();
    let mut csv_rows = Vec::new();
    let mut passed = true;
    for kind in kinds {
        let (value, ok, rows) = run_probe(kind, cfg, &setup, &ledger, &alphas)?;
        passed &= ok;
        csv_rows.extend(rows);
        results.insert(kind.clone(), json!({ "passed": ok, "details": value }));
    }
    let csv = Some(check_csv(csv_rows)?);
    Ok(CommandReport { json: envelope("probe", cfg, Some(&constants), Value::Object(results), passed), csv, passed })
}

/// Limits table, condition (*) with the resolved constants, `phibar`, both bound suites and
/// the configured probes, in one document.
pub fn cmd_report(cfg: &RunConfig) -> Result<CommandReport> {
    let (sx, sy) = cfg.specs()?;
    let (ledger, constants) = resolve_ledger(cfg, &sx, &sy)?;
    let mut fixed = cfg.clone();
    fixed.n = Setting::Value(ledger.n);
    fixed.m = Setting::Value(ledger.m);
    fixed.lambda = Setting::Value(ledger.lambda);
    fixed.c = Setting::Value(ledger.c);
    let parts = [
        ("limits", cmd_limits(&fixed)?),
        ("check_star", cmd_check_star(&fixed)?),
        ("phibar", cmd_phibar(&fixed)?),
        ("bounds", cmd_bounds(&fixed, "all")?),
        ("probe", cmd_probe(&fixed, &fixed.probes)?),
    ];
    let passed = parts.iter().all(|(_, p)| p.passed);
    let mut sections = serde_json::Map::new();
    let mut csv_rows = Vec::new();
    for (name, p) in parts {
        csv_rows.push((cfg.spec_x.clone() + "->" + &cfg.spec_y, name.to_string(), p.passed, String::new()));
        sections.insert(name.into(), json!({ "passed": p.passed, "result": p.json["result"] }));
    }
    let csv = Some(check_csv(csv_rows)?);
    Ok(CommandReport { json: envelope("report", cfg, Some(&constants), Value::Object(sections), passed), csv, passed })
}

/// Exit status for an error: 1 for usage and configuration problems, 2 for failed checks.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Config(_) | Error::Io(_) | Error::InvalidConstants(_) | Error::UnsupportedSpec(_) | Error::OutOfRange { .. } => 1,
        _ => 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_keys_and_errors() {
        let cfg = RunConfig::from_config_str("# run\nspec_x = star\nN = auto\nM = 3/2\nprobes = continuity, injectivity\nalpha = [a^inf,0]; [pole,-]\nr_bar = 2,4\n").unwrap();
        assert_eq!(cfg.spec_x, "star");
        assert_eq!(cfg.n, Setting::Auto);
        assert_eq!(cfg.m, Setting::Value(Rational::new(3, 2)));
        assert_eq!(cfg.probes, vec!["continuity", "injectivity"]);
        assert_eq!(cfg.alpha.len(), 2);
        assert_eq!(cfg.r_bar, vec![Rational::from_integer(2), Rational::from_integer(4)]);
        assert!(RunConfig::from_config_str("probes = sideways").is_err());
        assert!(RunConfig::from_config_str("colour = red").is_err());
        assert!(RunConfig::from_config_str("L = eight").is_err());
    }

    #[test]
    fn samples_are_deterministic_and_distinct() {
        let a = sample_boundary_points(3, 12);
        assert_eq!(a, sample_boundary_points(3, 12));
        assert_ne!(a, sample_boundary_points(4, 12));
        let names: BTreeSet<String> = a.iter().map(|p| p.to_string()).collect();
        assert_eq!(names.len(), 12);
        assert!(a.contains(&BoundaryPoint::pole(true)) && a.contains(&BoundaryPoint::pole(false)));
        assert!(sample_pairs(3, 30, 4).iter().all(|(g, _)| g.norm() <= 4));
    }

    #[test]
    fn auto_n_rounds_the_covering_radius_up() {
        // covering radius^2 = 1/2 for dot, 5/4 for scaled2
        let o = SpacePoint::origin();
        assert_eq!(resolve_n(&Setting::Auto, &ActionSpec::dot(), &o).unwrap().0, Rational::new(3, 4));
        assert_eq!(resolve_n(&Setting::Auto, &ActionSpec::scaled2(), &o).unwrap().0, Rational::new(9, 8));
    }

    #[test]
    fn far_radius_exceeds_sqrt2_c_bar() {
        let v = default_r_bars(&Rational::new(91, 4));
        assert_eq!(v, vec![Rational::from_integer(2), Rational::from_integer(4), Rational::from_integer(34)]);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(error_exit_code(&Error::Config("x".into())), 1);
        assert_eq!(error_exit_code(&Error::NotCauchy { r: 1.0, i: 0, j: 1 }), 2);
        let r = CommandReport { json: Value::Null, csv: None, passed: false };
        assert_eq!(r.exit_code(Expect::Fail), 0);
        assert_eq!(r.exit_code(Expect::Pass), 2);
    }
}
