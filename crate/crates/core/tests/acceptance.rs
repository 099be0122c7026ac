//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

use std::time::{Duration, Instant};

use num_traits::Signed;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cat0_boundary::action::{act, act_boundary, orbit_limit, ActionSpec, ConstantsLedger};
use cat0_boundary::boundary_map::{
    continuity_probe, equivariance_check, lemma_2_5_suite, phibar, qi_constants, transfer_spread, well_definedness_check,
    MapSetup,
};
use cat0_boundary::rational::{to_f64, Rational};
use cat0_boundary::report::{resolve_ledger, sample_boundary_points, sample_pairs, RunConfig};
use cat0_boundary::space::{
    dist_point_to_segment, segment_eval, segment_eval_generic, BoundaryPoint, GeodesicSegment, GSpacePoint, SpacePoint,
};
use cat0_boundary::star::{check_condition_star, minimal_m_on_ball};
use cat0_boundary::tree::{common_prefix_length, PrefixLen, TreeEnd, TreePoint};
use cat0_boundary::word::{ball, GroupElement, Letter, Word};

type Outcome = std::result::Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn q(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

fn int(n: i128) -> Rational {
    Rational::from_integer(n)
}

fn o() -> SpacePoint {
    SpacePoint::origin()
}

fn power(l: Letter, i: u32) -> Word {
    Word::reduce(std::iter::repeat_n(l, i as usize))
}

fn g_i(i: u32) -> GroupElement {
    GroupElement::new(power(Letter::A, i).mul(&power(Letter::B, i)), 0)
}

fn a_i(i: u32) -> GroupElement {
    GroupElement::new(power(Letter::A, i), 0)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Outcome {
    ensure(elapsed.as_secs_f64() < limit_s, || format!("took {:.2} s, limit {limit_s} s", elapsed.as_secs_f64()))
}

// -------------------------------------------------------------------------------------------

fn limits() -> Outcome {
    let start = Instant::now();
    let (dot, star) = (ActionSpec::dot(), ActionSpec::star());
    let a_end = TreeEnd::new(&Word::identity(), &power(Letter::A, 1)).map_err(|e| e.to_string())?;
    for i in 1..=10 {
        let ls = orbit_limit(&star, &g_i(i), &o()).map_err(|e| e.to_string())?;
        let ld = orbit_limit(&dot, &g_i(i), &o()).map_err(|e| e.to_string())?;
        let la = orbit_limit(&star, &a_i(i), &o()).map_err(|e| e.to_string())?;
        ensure(ls.slope() == Some(int(1)), || format!("star slope at i={i}: {ls}"))?;
        ensure((ls.angle() - std::f64::consts::FRAC_PI_4).abs() < 1e-15, || format!("star angle at i={i}"))?;
        ensure(ld.slope() == Some(int(0)), || format!("dot slope at i={i}: {ld}"))?;
        ensure(la == BoundaryPoint::directional(a_end.clone(), int(0)), || format!("star limit of a^{i}: {la}"))?;
    }
    within(start.elapsed(), 1.0)
}

fn convergence() -> Outcome {
    let start = Instant::now();
    let a_end = TreeEnd::new(&Word::identity(), &power(Letter::A, 1)).map_err(|e| e.to_string())?;
    for i in 1..=20u32 {
        let e = g_i(i).word.power_end().map_err(|e| e.to_string())?;
        // oracle: compare the spelled-out letters
        let spelled: Vec<Letter> = (0..4 * i as usize).map(|k| e.letter_at(k)).collect();
        let oracle = spelled.iter().take_while(|&&l| l == Letter::A).count();
        let got = common_prefix_length(&e, &a_end);
        ensure(got == PrefixLen::Finite(i as usize) && oracle == i as usize, || format!("i={i}: {got:?}, oracle {oracle}"))?;
    }
    within(start.elapsed(), 1.0)
}

fn non_extension_witness() -> Outcome {
    let start = Instant::now();
    let star = ActionSpec::star();
    let mut prev = int(-1);
    for i in 1..=16u32 {
        let seg = GeodesicSegment::new(o(), act(&star, &g_i(i), &o()));
        let x = act(&star, &a_i(i), &o());
        let (d2, _) = dist_point_to_segment(&x, &seg);
        // oracle: along the segment the tree distance to a^i is |s - i| at height s, s in [0, 2i]
        let ii = int(i as i128);
        let oracle = (0..=8 * i as i128)
            .map(|j| {
                let s = q(j, 4);
                (s - ii) * (s - ii) + s * s
            })
            .min()
            .expect("nonempty");
        ensure(d2 == oracle && d2 == q((i * i) as i128, 2), || format!("i={i}: d^2 = {d2}, oracle {oracle}"))?;
        ensure(d2 > prev, || format!("not increasing at i={i}"))?;
        prev = d2;
    }
    within(start.elapsed(), 5.0)
}

fn condition_star() -> Outcome {
    let (dot, star, scaled2) = (ActionSpec::dot(), ActionSpec::star(), ActionSpec::scaled2());
    let one = int(1);
    let start = Instant::now();
    let v = check_condition_star(&dot, &dot, one, one, 8, &o(), &o()).map_err(|e| e.to_string())?;
    ensure(v.holds_on_ball, || "dot->dot fails on ball(8)".into())?;
    let v = check_condition_star(&dot, &scaled2, one, int(3), 8, &o(), &o()).map_err(|e| e.to_string())?;
    ensure(v.holds_on_ball, || format!("dot->scaled2 with M = 3 fails: {} witnesses", v.witness_count))?;
    let m8 = minimal_m_on_ball(&dot, &star, one, 8, &o(), &o()).map_err(|e| e.to_string())?;
    let l8_time = start.elapsed();
    let m4 = minimal_m_on_ball(&dot, &star, one, 4, &o(), &o()).map_err(|e| e.to_string())?;
    let m12 = minimal_m_on_ball(&dot, &star, one, 12, &o(), &o()).map_err(|e| e.to_string())?;
    // oracle: (a^i b^i, a^i) lies in ball(2i), has X-distance 0 and Y-distance^2 i^2/2
    for (l, m) in [(4u32, m4), (8, m8), (12, m12)] {
        let i = (l / 2) as i128;
        ensure(m >= q(i * i, 2), || format!("minimal M^2 on ball({l}) = {m} < {}", q(i * i, 2)))?;
    }
    ensure(m4 < m8 && m8 < m12, || format!("minimal M^2 not increasing: {m4}, {m8}, {m12}"))?;
    println!("    minimal M^2 (dot->star, N=1): L=4 {m4}, L=8 {m8}, L=12 {m12}");
    within(l8_time, 60.0)
}

fn phibar_suite() -> Outcome {
    let start = Instant::now();
    let (dot, scaled2) = (ActionSpec::dot(), ActionSpec::scaled2());
    let n = q(3, 4);
    let same = MapSetup::new(dot.clone(), dot.clone(), n);
    for alpha in sample_boundary_points(11, 20) {
        let r = phibar(&alpha, &same).map_err(|e| format!("identity at {alpha}: {e}"))?;
        ensure(r.output == alpha, || format!("identity moved {alpha} to {}", r.output))?;
    }
    let scaled = MapSetup::new(dot, scaled2, n);
    let mut points = sample_boundary_points(12, 40);
    points.retain(|p| p.end().is_some());
    points.truncate(20);
    points.extend([BoundaryPoint::pole(true), BoundaryPoint::pole(false)]);
    ensure(points.len() == 22, || "not enough sampled directional points".into())?;
    for alpha in &points {
        let r = phibar(alpha, &scaled).map_err(|e| format!("scaled at {alpha}: {e}"))?;
        // oracle: heights double, tree ends stay
        let expected = match alpha {
            BoundaryPoint::Directional { end, slope } => BoundaryPoint::directional(end.clone(), *slope * int(2)),
            pole => pole.clone(),
        };
        ensure(r.output == expected, || format!("{alpha} -> {}, expected {expected}", r.output))?;
        ensure(r.analytic_crosscheck.as_ref() == Some(&expected), || format!("no cross-check at {alpha}"))?;
    }
    for alpha in sample_boundary_points(13, 10) {
        let w = well_definedness_check(&alpha, &scaled).map_err(|e| format!("well-definedness at {alpha}: {e}"))?;
        ensure(w.consistent, || format!("sequences disagree at {alpha}: {w:?}"))?;
    }
    within(start.elapsed(), 30.0)
}

fn proof_bounds() -> Outcome {
    let start = Instant::now();
    let cfg = RunConfig { spec_x: "dot".into(), spec_y: "scaled2".into(), l: 6, qi_l: 6, ..RunConfig::default() };
    let (sx, sy) = (ActionSpec::dot(), ActionSpec::scaled2());
    let (ledger, _) = resolve_ledger(&cfg, &sx, &sy).map_err(|e| e.to_string())?;
    let qi = qi_constants(&sx, &sy, 6, &o(), &o()).map_err(|e| e.to_string())?;
    ensure(qi.lambda == ledger.lambda && qi.c == ledger.c, || "ledger does not use the qi estimate".into())?;
    // oracle: the estimate on random pairs of ball(6), in floating point
    let elems = ball(6);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (lf, cf) = (to_f64(&qi.lambda), to_f64(&qi.c));
    for _ in 0..20_000 {
        let g = &elems[rng.random_range(0..elems.len())];
        let h = &elems[rng.random_range(0..elems.len())];
        let dx = act(&sx, g, &o()).dist(&act(&sx, h, &o()));
        let dy = act(&sy, g, &o()).dist(&act(&sy, h, &o()));
        ensure(dy / lf - cf <= dx + 1e-9 && dx <= lf * dy + cf + 1e-9, || format!("qi fails on {g}, {h}"))?;
    }
    // oracle: the derived constants from their formulas
    let (n, m, l, c) = (ledger.n, ledger.m, ledger.lambda, ledger.c);
    let mt = l * (n + int(2) * n) + c + m;
    let again = ConstantsLedger {
        n,
        m,
        lambda: l,
        c,
        n_tilde: int(2) * n,
        m_tilde: mt,
        m_prime: l * (int(2) * n + int(1)) + int(2) * m + c,
        c_bar: l * (int(2) * n + int(3)) + c + int(2) * (mt + int(1)),
    };
    ensure(again == ledger, || format!("ledger mismatch: {ledger:?}"))?;
    let mut setup = MapSetup::new(sx, sy, ledger.n);
    setup.k = 24;
    let mut alphas = sample_boundary_points(14, 6);
    alphas.push(BoundaryPoint::parse("[a^inf,0]").map_err(|e| e.to_string())?);
    for alpha in &alphas {
        let r = phibar(alpha, &setup).map_err(|e| e.to_string())?;
        let rep = lemma_2_5_suite(&r, &ledger, &setup, 12).map_err(|e| e.to_string())?;
        for item in &rep.items {
            ensure(item.holds && !item.margin_sq.is_negative(), || format!("{alpha}: item {} fails, margin^2 {}", item.item, item.margin_sq))?;
        }
        let rows = transfer_spread(alpha, &setup, &ledger, &[int(1), int(2), int(4), int(8)]).map_err(|e| e.to_string())?;
        for row in &rows {
            ensure(row.holds, || format!("{alpha}: spread {} > M' at R = {}", row.spread.value, row.r_y))?;
        }
        for r_bar in [int(2), int(4)] {
            let rep = continuity_probe(alpha, &setup, &ledger, &r_bar, 8, None).map_err(|e| e.to_string())?;
            ensure(rep.passed && !rep.samples.is_empty(), || format!("continuity at {alpha}, r_bar = {r_bar}"))?;
        }
    }
    println!(
        "    ledger: N={} M={} lambda={} C={} c_bar={}",
        ledger.n, ledger.m, ledger.lambda, ledger.c, ledger.c_bar
    );
    within(start.elapsed(), 60.0)
}

fn equivariance() -> Outcome {
    let start = Instant::now();
    let setup = MapSetup::new(ActionSpec::dot(), ActionSpec::scaled2(), q(3, 4));
    let pairs = sample_pairs(7, 50, 4);
    ensure(pairs.len() == 50 && pairs.iter().all(|(g, _)| g.norm() <= 4), || "bad sample".into())?;
    for (g, alpha) in &pairs {
        let rep = equivariance_check(g, alpha, &setup).map_err(|e| format!("{g} . {alpha}: {e}"))?;
        // oracle: g moves the end, heights double
        let expected = match act_boundary(&setup.spec_x, g, alpha) {
            BoundaryPoint::Directional { end, slope } => BoundaryPoint::directional(end, slope * int(2)),
            pole => pole,
        };
        ensure(rep.equal && rep.lhs == expected, || format!("{g} . {alpha}: {} vs {}", rep.lhs, rep.rhs))?;
    }
    within(start.elapsed(), 10.0)
}

// -------------------------------------------------------------------------------------------

fn random_word(rng: &mut ChaCha8Rng, max: usize) -> Word {
    let len = rng.random_range(0..=max);
    Word::reduce((0..len).map(|_| Letter::ALL[rng.random_range(0..4)]))
}

fn random_point(rng: &mut ChaCha8Rng) -> SpacePoint {
    let w = random_word(rng, 5);
    let tree = if w.is_empty() || rng.random_bool(0.4) {
        TreePoint::vertex(w)
    } else {
        TreePoint::new(w, q(rng.random_range(1..4), 4)).expect("offset in range")
    };
    SpacePoint::new(tree, q(rng.random_range(-24..=24), rng.random_range(1..=4)))
}

fn random_element(rng: &mut ChaCha8Rng) -> GroupElement {
    GroupElement::new(random_word(rng, 4), rng.random_range(-3..=3))
}

/// `sqrt(a) <= sqrt(b) + sqrt(c)`, exactly.
fn sqrt_triangle(a: Rational, b: Rational, c: Rational) -> bool {
    let lhs = a - b - c;
    !lhs.is_positive() || lhs * lhs <= int(4) * b * c
}

fn properties() -> Outcome {
    const CASES: usize = 500;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let specs = [ActionSpec::dot(), ActionSpec::star(), ActionSpec::scaled2()];
    let start = Instant::now();
    // metric axioms
    for _ in 0..CASES {
        let (p, x, r) = (random_point(&mut rng), random_point(&mut rng), random_point(&mut rng));
        ensure(p.dist_sq(&p) == int(0), || format!("d(p, p) != 0 at {p}"))?;
        ensure(p.dist_sq(&x) == x.dist_sq(&p), || format!("asymmetric at {p}, {x}"))?;
        ensure(p == x || p.dist_sq(&x).is_positive(), || format!("d = 0 for distinct {p}, {x}"))?;
        ensure(sqrt_triangle(p.dist_sq(&r), p.dist_sq(&x), x.dist_sq(&r)), || format!("triangle fails at {p}, {x}, {r}"))?;
    }
    // CAT(0): d(x, m)^2 <= d(x, p)^2 / 2 + d(x, q)^2 / 2 - d(p, q)^2 / 4 at the midpoint m
    for _ in 0..CASES {
        let (p, qq, x) = (random_point(&mut rng), random_point(&mut rng), random_point(&mut rng));
        let mid = segment_eval(&GeodesicSegment::new(p.clone(), qq.clone()), q(1, 2)).map_err(|e| e.to_string())?;
        let rhs = x.dist_sq(&p) / int(2) + x.dist_sq(&qq) / int(2) - p.dist_sq(&qq) / int(4);
        ensure(x.dist_sq(&mid) <= rhs, || format!("convexity fails at {p}, {qq}, {x}"))?;
    }
    // isometries and the homomorphism law
    for _ in 0..CASES {
        let spec = &specs[rng.random_range(0..3)];
        let (g, h) = (random_element(&mut rng), random_element(&mut rng));
        let (p, x) = (random_point(&mut rng), random_point(&mut rng));
        ensure(act(spec, &g, &act(spec, &h, &p)) == act(spec, &g.mul(&h), &p), || format!("g(hp) != (gh)p for {g}, {h}"))?;
        ensure(act(spec, &g, &p).dist_sq(&act(spec, &g, &x)) == p.dist_sq(&x), || format!("{g} is not an isometry"))?;
        ensure(act(spec, &GroupElement::identity(), &p) == p, || "identity moves a point".into())?;
        if let Ok(limit) = orbit_limit(spec, &h, &o()) {
            let conj = g.mul(&h).mul(&g.inverse());
            let moved = orbit_limit(spec, &conj, &o()).map_err(|e| e.to_string())?;
            ensure(moved == act_boundary(spec, &g, &limit), || format!("limit of {g}{h}{g}^-1 is not g . limit"))?;
        }
    }
    // point-to-segment distance against a ternary search along the segment
    for _ in 0..CASES {
        let (p, qq, x) = (random_point(&mut rng), random_point(&mut rng), random_point(&mut rng));
        let seg = GeodesicSegment::new(p.clone(), qq.clone());
        let (d2, t_star) = dist_point_to_segment(&x, &seg);
        let at = segment_eval(&seg, t_star).map_err(|e| e.to_string())?;
        ensure(at.dist_sq(&x) == d2, || format!("minimizer does not attain d^2 at {x}, [{p}, {qq}]"))?;
        let (pa, qa, xa) = (p.to_approx(), qq.to_approx(), x.to_approx());
        let f = |t: f64| xa.dist_sq(&segment_eval_generic(&pa, &qa, t));
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
            if f(m1) <= f(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let brute = f(0.5 * (lo + hi)).min(f(0.0)).min(f(1.0));
        let exact = to_f64(&d2);
        ensure((brute - exact).abs() <= 1e-9 * (1.0 + exact), || format!("d^2 {exact} vs search {brute} at {x}, [{p}, {qq}]"))?;
        for k in 0..=16 {
            let y: GSpacePoint<Rational> = segment_eval(&seg, q(k, 16)).map_err(|e| e.to_string())?;
            ensure(y.dist_sq(&x) >= d2, || format!("segment point closer than d^2 at {x}"))?;
        }
    }
    println!("    {CASES} cases each: metric axioms, CAT(0) midpoint inequality, isometry laws, point-to-segment");
    within(start.elapsed(), 60.0)
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 limits of (a^i b^i, 0) and (a^i, 0)", limits),
        ("2 common prefixes of (a^i b^i)^inf and a^inf", convergence),
        ("3 non-extension witness d^2 = i^2/2", non_extension_witness),
        ("4 condition (*) verdicts", condition_star),
        ("5 boundary map construction", phibar_suite),
        ("6 proof bounds with ledger constants", proof_bounds),
        ("7 equivariance on 50 random pairs", equivariance),
        ("8 property suites", properties),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => println!("PASS  {name}  ({secs:.2} s)"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {name}  ({secs:.2} s): {msg}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
