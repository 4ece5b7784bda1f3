//! Acceptance checks, one printed line per criterion.
//!
//! Run with `cargo test --test acceptance`. A criterion that fails for a
//! recorded, unresolvable reason is printed as `FAIL (known)` and does not
//! fail the process; any other failure does.

mod common;

use common::oracle;
use picoforge::diag::Severity;
use picoforge::emit::{emit, Format, RenderOptions};
use picoforge::fixnum::{parse_length, sp_div, sp_pyth, Sp};
use picoforge::geom::{
    append_arc, corner_arc, dash_pattern, frame, grid, head_dims, interp_curve, polyline, ArrowParams, CurveKind, Path,
    Seg, V2,
};
use picoforge::scene::{node_bounds, LayerKind, Node, Paint};
use picoforge::state::{resolve_arrows, ArrowKind, CapKind, State, ARROW_TABLE};
use picoforge::syntax::{parse, print, Role};
use picoforge::{compile, golden, CompileOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::path::PathBuf;

enum Outcome {
    Pass(String),
    Fail(String),
    /// Fails for a documented reason that cannot be fixed here.
    Known(String),
}

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

fn corpus() -> Vec<(String, String)> {
    golden::sources(&corpus_dir())
        .expect("corpus directory")
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&p).unwrap())
        })
        .collect()
}

fn pt(s: &str) -> Sp {
    parse_length(s, Sp::pt(1)).unwrap()
}

// ---------------------------------------------------------------- 1

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let lim = 1i32 << 24;
    let (mut div_bad, mut pyth_bad, mut bound_bad) = (0, 0, 0);
    let mut worst = (0.0f64, 0i32, 0i32);
    let n = 100_000;
    for _ in 0..n {
        let a: i32 = rng.gen_range(-lim..=lim);
        let b: i32 = rng.gen_range(-lim..=lim);
        if sp_div(Sp(a), Sp(b)).ok().map(|s| s.raw()) != oracle::sim_divide(a as i64, b as i64) {
            div_bad += 1;
        }
        let p = sp_pyth(Sp(a), Sp(b)).raw() as i64;
        if Some(p) != oracle::sim_pyth(a as i64, b as i64) {
            pyth_bad += 1;
        }
        let exact = (a as f64).hypot(b as f64);
        let err = (p as f64 - exact).abs();
        if err > (655.0f64).max(0.002 * exact) {
            bound_bad += 1;
            let rel = err / exact;
            if rel > worst.0 {
                worst = (rel, a, b);
            }
        }
    }
    let third = sp_div(Sp::pt(1), Sp::pt(3)).map(|s| s.raw());
    let detail = format!(
        "{n} pairs: sp_div mismatches {div_bad}, sp_pyth mismatches {pyth_bad}; sp_div(1pt,3pt) = {third:?}; \
         pyth outside max(655sp, 0.2%): {bound_bad} (worst {:.3}% at a={}, b={})",
        worst.0 * 100.0,
        worst.1,
        worst.2
    );
    if div_bad != 0 || pyth_bad != 0 || third != Ok(21845) {
        Outcome::Fail(detail)
    } else if bound_bad != 0 {
        Outcome::Known(format!("{detail}; the exact simulation itself exceeds the bound"))
    } else {
        Outcome::Pass(detail)
    }
}

// ---------------------------------------------------------------- 2

const DEFAULTS: &[(&str, &str)] = &[
    ("unit", "28.45274pt"),
    ("xunit", "28.45274pt"),
    ("yunit", "28.45274pt"),
    ("runit", "28.45274pt"),
    ("linewidth", "0.8pt"),
    ("linecolor", "black"),
    ("fillcolor", "white"),
    ("bordercolor", "white"),
    ("doublecolor", "white"),
    ("shadowcolor", "darkgray"),
    ("hatchcolor", "black"),
    ("gridcolor", "black"),
    ("subgridcolor", "gray"),
    ("gridlabelcolor", "black"),
    ("linestyle", "solid"),
    ("dash", "5.0pt 3.0pt 0.0pt 0.0pt"),
    ("dashadjust", "true"),
    ("dotsep", "3.0pt"),
    ("linecap", "0"),
    ("fillstyle", "none"),
    ("hatchwidth", "0.8pt"),
    ("hatchsep", "4.0pt"),
    ("hatchangle", "45"),
    ("hatchwidthinc", "0.0pt"),
    ("hatchsepinc", "0.0pt"),
    ("arrows", "(None, None)"),
    ("arrowsize", "1.5pt 2"),
    ("arrowlength", "1.4"),
    ("arrowinset", "0.4"),
    ("arrowscale", "1 1"),
    ("tbarsize", "2.0pt 5"),
    ("bracketlength", "0.15"),
    ("rbracketlength", "0.15"),
    ("dotsize", "2.0pt 2"),
    ("dotstyle", "*"),
    ("dotscale", "1 1"),
    ("dotangle", "0"),
    ("linearc", "0.0pt"),
    ("framearc", "0"),
    ("cornersize", "relative"),
    ("dimen", "0.5"),
    ("border", "0.0pt"),
    ("doubleline", "false"),
    ("doublesep", "1.25\\pslinewidth"),
    ("shadow", "false"),
    ("shadowsize", "3.0pt"),
    ("shadowangle", "-45"),
    ("showpoints", "false"),
    ("curvature", "1 0.1 0"),
    ("gridwidth", "0.8pt"),
    ("subgridwidth", "0.4pt"),
    ("subgriddiv", "5"),
    ("griddots", "0"),
    ("subgriddots", "0"),
    ("gridlabels", "10.0pt"),
    ("framesep", "3.0pt"),
    ("boxsep", "true"),
    ("labelsep", "5.0pt"),
    ("radius", "7.11319pt"),
    ("arcsepA", "0.0pt"),
    ("arcsepB", "0.0pt"),
    ("origin", "0.0pt 0.0pt"),
    ("swapaxes", "false"),
    ("liftpen", "0"),
    ("linetype", "2"),
    ("ref", "0.5 0.5"),
    ("rot", ""),
    ("refangle", "0"),
    ("shift", "0.0pt"),
    ("gangle", "0"),
    ("trimode", "U"),
    ("showgrid", "false"),
];

fn criterion_2() -> Outcome {
    let snap = State::new().snapshot();
    let mut bad = Vec::new();
    for (k, want) in DEFAULTS {
        match snap.iter().find(|(sk, _)| sk == k) {
            Some((_, got)) if got == want => {}
            Some((_, got)) => bad.push(format!("{k}: {got} != {want}")),
            None => bad.push(format!("{k}: missing")),
        }
    }
    for (k, _) in &snap {
        if !DEFAULTS.iter().any(|(d, _)| d == k) {
            bad.push(format!("{k}: not in the documented table"));
        }
    }
    if bad.is_empty() {
        Outcome::Pass(format!("{} keys equal the documented defaults", DEFAULTS.len()))
    } else {
        Outcome::Fail(bad.join("; "))
    }
}

// ---------------------------------------------------------------- 3

fn criterion_3() -> Outcome {
    use ArrowKind::*;
    let expected: &[(&str, ArrowKind)] = &[
        ("<", Head { double: false }),
        ("<<", Head { double: true }),
        (">", RevHead { double: false }),
        (">>", RevHead { double: true }),
        ("(", RoundBracket { out: false }),
        ("[", Bracket { out: false }),
        (")", RoundBracket { out: true }),
        ("]", Bracket { out: true }),
        ("|>", TBarHead),
        ("|<*", HeadTBar { centered: true }),
        ("|<", HeadTBar { centered: false }),
    ];
    let symmetric: &[(&str, ArrowKind)] = &[
        ("|", TBar { centered: false }),
        ("|*", TBar { centered: true }),
        ("o", Dot { open: true, tangent: true }),
        ("oo", Dot { open: true, tangent: false }),
        ("*", Dot { open: false, tangent: true }),
        ("**", Dot { open: false, tangent: false }),
        ("c", Cap(CapKind::Round)),
        ("cc", Cap(CapKind::RoundIn)),
        ("C", Cap(CapKind::Square)),
    ];
    let mut bad = Vec::new();
    if ARROW_TABLE.len() != expected.len() {
        bad.push(format!("table has {} entries", ARROW_TABLE.len()));
    }
    for (tok, kind) in expected {
        let got = resolve_arrows(&format!("{tok}-"));
        if got != Ok((*kind, None)) {
            bad.push(format!("{tok}-: {got:?}"));
        }
    }
    for (tok, kind) in symmetric {
        let got = resolve_arrows(&format!("{tok}-{tok}"));
        if got != Ok((*kind, *kind)) {
            bad.push(format!("{tok}-{tok}: {got:?}"));
        }
    }
    let c = compile("\\psline{x-y}(0,0)(1,1)", &CompileOptions::default());
    if !c.diagnostics.iter().any(|d| d.message.contains("Bad arrows specification")) {
        bad.push("x-y gave no Bad arrows specification".into());
    }
    let st = State::new();
    let p = ArrowParams {
        clw: st.p.linewidth,
        arrowsize: st.p.arrowsize,
        arrowlength: st.p.arrowlength,
        arrowinset: st.p.arrowinset,
        arrowscale: st.p.arrowscale,
        tbarsize: st.p.tbarsize,
        bracketlength: st.p.bracketlength,
        rbracketlength: st.p.rbracketlength,
        dotsize: st.p.dotsize,
    };
    let (w, l, a) = head_dims(&p);
    for (name, got, want) in [("W", w, pt("3.1pt")), ("L", l, pt("4.34pt")), ("inset", a, pt("1.736pt"))] {
        if (got.raw() - want.raw()).abs() > 1 {
            bad.push(format!("{name} = {got} (want {want})"));
        }
    }
    if bad.is_empty() {
        Outcome::Pass(format!(
            "{} table pairs, {} symmetric kinds, x-y diagnosed, W={w} L={l} inset={a}",
            expected.len(),
            symmetric.len()
        ))
    } else {
        Outcome::Fail(bad.join("; "))
    }
}

// ---------------------------------------------------------------- 4

fn cubics(p: &Path) -> Vec<[(f64, f64); 4]> {
    let mut out = Vec::new();
    let mut cur = (0.0, 0.0);
    for s in &p.segs {
        match s {
            Seg::Move(a) | Seg::Line(a) => cur = (a.f().x, a.f().y),
            Seg::Cubic(a, b, c) => {
                let q = [cur, (a.f().x, a.f().y), (b.f().x, b.f().y), (c.f().x, c.f().y)];
                cur = q[3];
                out.push(q);
            }
            Seg::Close => {}
        }
    }
    out
}

fn unit(v: (f64, f64)) -> (f64, f64) {
    let n = v.0.hypot(v.1);
    (v.0 / n, v.1 / n)
}

/// Worst `1 - cos` between a line and the adjoining arc at each junction.
fn tangency_deviation(p: &Path) -> f64 {
    let pts: Vec<(Seg, (f64, f64))> = p
        .segs
        .iter()
        .scan((0.0, 0.0), |cur, s| {
            let before = *cur;
            match s {
                Seg::Move(a) | Seg::Line(a) => *cur = (a.f().x, a.f().y),
                Seg::Cubic(_, _, c) => *cur = (c.f().x, c.f().y),
                Seg::Close => {}
            }
            Some((*s, before))
        })
        .collect();
    let mut worst: f64 = 0.0;
    for w in pts.windows(2) {
        let ((s0, from0), (s1, from1)) = (w[0], w[1]);
        let dir = match (s0, s1) {
            (Seg::Line(a), Seg::Cubic(c1, _, _)) => {
                let a = (a.f().x, a.f().y);
                let line = (a.0 - from0.0, a.1 - from0.1);
                let arc = (c1.f().x - from1.0, c1.f().y - from1.1);
                Some((line, arc))
            }
            (Seg::Cubic(_, c2, e), Seg::Line(b)) => {
                let e = (e.f().x, e.f().y);
                let arc = (e.0 - c2.f().x, e.1 - c2.f().y);
                let line = (b.f().x - e.0, b.f().y - e.1);
                Some((arc, line))
            }
            _ => None,
        };
        if let Some((u, v)) = dir {
            if u.0.hypot(u.1) < 1e-6 || v.0.hypot(v.1) < 1e-6 {
                continue;
            }
            let (u, v) = (unit(u), unit(v));
            worst = worst.max((1.0 - (u.0 * v.0 + u.1 * v.1)).abs());
        }
    }
    worst
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    let mut bad = Vec::new();

    // linearc tangency, on the float corner geometry
    let mut tan_worst: f64 = 0.0;
    let mut corners = 0;
    for _ in 0..10_000 {
        let [a, b, c] = [(); 3].map(|_| V2::new(rng.gen_range(0.0..200.0), rng.gen_range(0.0..200.0)));
        let Some((t1, t2, ctr, r)) = corner_arc(a, b, c, rng.gen_range(0.5..40.0)) else {
            continue;
        };
        corners += 1;
        for (t, line) in [(t1, b.sub(a)), (t2, c.sub(b))] {
            let rad = t.sub(ctr);
            let tangent = V2::new(-rad.y, rad.x);
            let cos = tangent.dot(line) / (tangent.len() * line.len());
            tan_worst = tan_worst.max(1.0 - cos.abs());
            if (rad.len() - r).abs() > 1e-9 * r.max(1.0) {
                tan_worst = f64::INFINITY;
            }
        }
    }
    if tan_worst >= 1e-9 {
        bad.push(format!("linearc tangency 1-cos = {tan_worst:e}"));
    }
    // Same check on emitted paths, after rounding to sp (informational).
    let mut rounded_worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.gen_range(3..7);
        let pts: Vec<V2> = (0..n).map(|_| V2::new(rng.gen_range(0.0..200.0), rng.gen_range(0.0..200.0))).collect();
        let p = polyline(&pts, rng.gen_range(1.0..15.0), rng.gen_bool(0.5));
        rounded_worst = rounded_worst.max(tangency_deviation(&p));
    }

    // frame outer edge, with even linewidths in sp
    let mut frame_bad = 0;
    for _ in 0..1000 {
        let x0: i64 = rng.gen_range(-(1 << 22)..(1 << 22));
        let y0: i64 = rng.gen_range(-(1 << 22)..(1 << 22));
        let w: i64 = rng.gen_range(1 << 18..1 << 22);
        let h: i64 = rng.gen_range(1 << 18..1 << 22);
        let lw: i64 = 2 * rng.gen_range(1..1 << 15);
        let f = |v: i64| Sp(v as i32).to_pt();
        let p = frame(V2::new(f(x0), f(y0)), V2::new(f(x0 + w), f(y0 + h)), (0.0, false), 0.5, f(lw)).unwrap();
        let b = p.bbox().unwrap();
        let outer = (b.x0.raw() - lw / 2, b.y0.raw() - lw / 2, b.x1.raw() + lw / 2, b.y1.raw() + lw / 2);
        if outer != (x0, y0, x0 + w, y0 + h) {
            frame_bad += 1;
        }
    }
    if frame_bad > 0 {
        bad.push(format!("frame outer edge off on {frame_bad}/1000"));
    }

    // Bezier arcs
    let mut arc_worst: f64 = 0.0;
    for _ in 0..500 {
        let r = rng.gen_range(5.0..300.0);
        let c = V2::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
        let a0 = rng.gen_range(-360.0..360.0);
        let a1 = a0 + rng.gen_range(1.0..359.0);
        let mut p = Path::new();
        append_arc(&mut p, c, r, r, a0, a1, rng.gen_bool(0.5));
        for q in cubics(&p) {
            arc_worst = arc_worst.max(oracle::cubic_radial_error(q, c.x, c.y, r) / r);
        }
    }
    if arc_worst >= 3e-4 {
        bad.push(format!("arc radial error {arc_worst:e}·r"));
    }

    // arcsep worked case
    let (a0, _) = picoforge::geom::arc_with_arcsep(10.0, 0.0, 90.0, 2.0, 0.0, true);
    if (a0 - 5.72957).abs() > 1e-4 {
        bad.push(format!("arcsep shift {a0}"));
    }

    // grid counts
    let mut grid_bad = 0;
    for _ in 0..20 {
        let span = |rng: &mut ChaCha8Rng| rng.gen_range(0..=12) * if rng.gen_bool(0.5) { 1 } else { -1 };
        let (nx, ny) = (span(&mut rng), span(&mut rng));
        for div in [0, 1, 2, 5, 10] {
            let g = grid((0, 0), (nx, ny), (0, 0), 10.0, 10.0, div, false);
            if (g.main.len() as i64, g.sub.len() as i64) != oracle::grid_counts(nx, ny, div) {
                grid_bad += 1;
            }
        }
    }
    if grid_bad > 0 {
        bad.push(format!("grid counts off in {grid_bad}/100"));
    }

    // interp_curve interpolation and collinearity
    let sp = 1.0 / 65536.0;
    let (mut interp_worst, mut col_worst): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let n = rng.gen_range(2..8);
        let pts: Vec<V2> =
            (0..n).map(|_| V2::new(rng.gen_range(-100.0..100.0), rng.gen_range(-100.0..100.0))).collect();
        let p = interp_curve(&pts, (1.0, 0.1, 0.0), CurveKind::Open);
        let ends: Vec<V2> = p
            .segs
            .iter()
            .filter_map(|s| match s {
                Seg::Move(a) | Seg::Line(a) | Seg::Cubic(_, _, a) => Some(a.f()),
                Seg::Close => None,
            })
            .collect();
        for (q, e) in pts.iter().zip(&ends) {
            interp_worst = interp_worst.max(q.sub(*e).len());
        }
        if ends.len() != pts.len() {
            interp_worst = f64::INFINITY;
        }
        // collinear set
        let o = V2::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
        let d = V2::polar(1.0, rng.gen_range(0.0..360.0));
        let mut ts: Vec<f64> = (0..rng.gen_range(3..8)).map(|_| rng.gen_range(-100.0..100.0)).collect();
        ts.sort_by(f64::total_cmp);
        let line: Vec<V2> = ts.iter().map(|t| o.add(d.mul(*t))).collect();
        let p = interp_curve(&line, (rng.gen_range(0.0..2.0), rng.gen_range(0.0..1.0), 0.0), CurveKind::Open);
        for q in p.points() {
            col_worst = col_worst.max(q.f().sub(o).cross(d).abs());
        }
    }
    if interp_worst > sp {
        bad.push(format!("interp_curve misses a point by {interp_worst:e}pt"));
    }
    if col_worst > sp {
        bad.push(format!("collinear deviation {col_worst:e}pt"));
    }

    if bad.is_empty() {
        Outcome::Pass(format!(
            "tangency {tan_worst:.1e} over {corners} corners ({rounded_worst:.1e} after sp rounding), frames exact, arc error {arc_worst:.1e}·r, arcsep {a0:.5}°, grid 100/100, \
             interpolation {:.2}sp, collinear {:.2}sp",
            interp_worst / sp,
            col_worst / sp
        ))
    } else {
        Outcome::Fail(bad.join("; "))
    }
}

// ---------------------------------------------------------------- 5

fn first_decorated(nodes: &[Node]) -> Option<&Node> {
    for n in nodes {
        match n {
            Node::Decorated { .. } => return Some(n),
            Node::Group { children, .. } | Node::ClipGroup { children, .. } => {
                if let Some(d) = first_decorated(children) {
                    return Some(d);
                }
            }
            _ => {}
        }
    }
    None
}

fn box_frame_extent(cmd: &str) -> (f64, f64) {
    let c = compile(&format!("\\{cmd}{{\\pstbox(20pt,10pt,0pt){{}}}}"), &CompileOptions::default());
    let b = node_bounds(first_decorated(&c.scene.nodes).unwrap()).unwrap();
    ((b.x1 - b.x0).to_pt() / 2.0, (b.y1 - b.y0).to_pt() / 2.0)
}

/// `(e, f)` of the rput translation, i.e. minus the reference point.
fn placed(cmd: &str, r: &str) -> (Sp, Sp) {
    let c = compile(&format!("\\rput[{r}](0,0){{\\{cmd}{{\\pstbox(20pt,10pt,0pt){{}}}}}}"), &CompileOptions::default());
    match &c.scene.nodes[0] {
        Node::Group { transform, .. } => (Sp::from_pt_f64(transform.e), Sp::from_pt_f64(transform.f)),
        other => panic!("unexpected {other:?}"),
    }
}

fn criterion_5() -> Outcome {
    let mut bad = Vec::new();
    let (rc, _) = box_frame_extent("pscirclebox");
    if (rc - 14.98).abs() > 0.02 {
        bad.push(format!("circlebox r = {rc:.4}"));
    }
    let (ox, oy) = box_frame_extent("psovalbox");
    if (ox - 17.94).abs() > 0.02 || (oy - 10.87).abs() > 0.02 {
        bad.push(format!("ovalbox ({ox:.4}, {oy:.4})"));
    }
    // [tr] places the top right corner: e = -(w + 2m), f = -(h + m).
    let m = pt("3.8pt");
    let (e, f) = placed("psframebox", "tr");
    if e != -(Sp::pt(20) + m + m) || f != -(Sp::pt(10) + m) {
        bad.push(format!("framebox margin: e={e} f={f}"));
    }
    // [br]: e = -w, f = +d; growth relative to the plain frame.
    let (fe, ff) = placed("psframebox", "br");
    let (se, sf) = placed("psshadowbox", "br");
    let grow_w = fe - se;
    let grow_d = sf - ff;
    // TeX evaluates `.7071\dimen` with the factor read to 46341/65536.
    let tex = Sp(46341 * 3);
    #[allow(clippy::approx_constant)]
    let real = 0.7071 * 3.0 * 65536.0;
    if (grow_w.raw() - tex.raw()).abs() > 1 || (grow_d.raw() - tex.raw()).abs() > 1 {
        bad.push(format!("shadowbox growth ({}, {}) sp", grow_w.raw(), grow_d.raw()));
    }
    if bad.is_empty() {
        Outcome::Pass(format!(
            "circle r={rc:.4}pt, oval ({ox:.4},{oy:.4})pt, margin {m} exact, shadow growth {}sp \
             (TeX .7071·3pt = {}sp; real product {real}sp)",
            grow_w.raw(),
            tex.raw()
        ))
    } else {
        Outcome::Fail(bad.join("; "))
    }
}

// ---------------------------------------------------------------- 6

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let mut bad = 0;
    for _ in 0..1000 {
        let len = rng.gen_range(1 << 10..1 << 26);
        let dash = [(); 4].map(|_| Sp(rng.gen_range(0..1 << 20)));
        let dash = if dash.iter().all(|d| d.raw() == 0) { [Sp::pt(1), Sp::ZERO, Sp::ZERO, Sp::ZERO] } else { dash };
        let p = dash_pattern(Sp(len), dash, true, 0, None).unwrap();
        // period = sum(entries)/denom sp, so n·period = len reads exactly:
        if p.count < 1 || p.entries.iter().sum::<i64>() * p.count != len as i64 * p.denom {
            bad += 1;
        }
    }
    let c = compile("\\psline[linestyle=dotted,dashadjust=false](0,0)(3,0)", &CompileOptions::default());
    let mut dotted = None;
    c.scene.walk(&mut |n| {
        if let Node::Decorated { layers, .. } = n {
            for l in layers {
                for p in &l.paints {
                    if let Paint::Stroke { style, .. } = p {
                        dotted = style.dash.clone();
                    }
                }
            }
        }
    });
    let want = vec![0, (pt("3pt") + pt("0.8pt")).raw()];
    let dotted_ok = dotted.as_ref().is_some_and(|d| d.entries == want && d.denom == 1);
    if bad == 0 && dotted_ok {
        Outcome::Pass(format!("1000/1000 adjusted patterns exact; dotted = {want:?} sp"))
    } else {
        Outcome::Fail(format!("{bad} adjusted mismatches; dotted = {dotted:?}"))
    }
}

// ---------------------------------------------------------------- 7

fn criterion_7() -> Outcome {
    let files = corpus();
    let (mut nodes, mut bad) = (0, Vec::new());
    for (name, src) in &files {
        let c = compile(src, &CompileOptions::default());
        c.scene.walk(&mut |n| {
            if let Node::Decorated { layers, starred } = n {
                nodes += 1;
                let kinds: Vec<LayerKind> = layers.iter().map(|l| l.kind).collect();
                if kinds.windows(2).any(|w| w[0] >= w[1]) {
                    bad.push(format!("{name}: order {kinds:?}"));
                }
                if *starred && kinds.contains(&LayerKind::Stroke) {
                    bad.push(format!("{name}: starred object with a stroke layer"));
                }
            }
        });
    }
    if files.len() < 40 {
        bad.push(format!("only {} corpus files", files.len()));
    }
    if bad.is_empty() {
        Outcome::Pass(format!("{nodes} decorated nodes in {} files in canonical order", files.len()))
    } else {
        Outcome::Fail(bad.join("; "))
    }
}

// ---------------------------------------------------------------- 8

const OBJECT_COMMANDS: &[&str] = &[
    "psline",
    "qline",
    "pspolygon",
    "psframe",
    "psdiamond",
    "pstriangle",
    "psellipse",
    "pscircle",
    "qdisk",
    "psCircle",
    "psdot",
    "psdots",
    "pswedge",
    "psarc",
    "psarcn",
    "psellipticarc",
    "psellipticarcn",
    "psellipticwedge",
    "psbezier",
    "pscbezier",
    "parabola",
    "pscurve",
    "psecurve",
    "psccurve",
    "psgrid",
    "pscustom",
];

const FILL_STYLES: &[&str] =
    &["none", "solid", "eofill", "vlines", "vlines*", "hlines", "hlines*", "crosshatch", "crosshatch*"];

fn coverage(files: &[(String, String)]) -> Vec<String> {
    let mut cmds = BTreeSet::new();
    let mut arrows = BTreeSet::new();
    let mut fills = BTreeSet::new();
    let mut uputs = BTreeSet::new();
    let mut liftpens = BTreeSet::new();
    let (mut multirput, mut star_pic) = (false, false);
    let arrow_of = |spec: &str, set: &mut BTreeSet<String>| {
        if let Ok((a, b)) = resolve_arrows(spec) {
            set.insert(format!("{a:?}"));
            set.insert(format!("{b:?}"));
        }
    };
    for (_, src) in files {
        let (ast, _) = parse(src);
        ast.walk(&mut |c| {
            cmds.insert(c.name.clone());
            if c.name == "multirput" {
                multirput = true;
            }
            if c.name == "pspicture" && c.starred {
                star_pic = true;
            }
            if let Some(a) = c.arrow_spec() {
                arrow_of(a, &mut arrows);
            }
            if c.name == "uput" {
                if let Some(r) = c.text(Role::RefAngle) {
                    uputs.insert(r.trim().to_string());
                }
            }
            if let Some(p) = c.params() {
                for kv in p.split(',') {
                    if let Some((k, v)) = kv.split_once('=') {
                        match k.trim() {
                            "fillstyle" => {
                                fills.insert(v.trim().to_string());
                            }
                            "arrows" => arrow_of(v, &mut arrows),
                            "liftpen" if c.name == "pscustom" => {
                                liftpens.insert(v.trim().to_string());
                            }
                            _ => {}
                        }
                    }
                }
            }
        });
    }
    let mut missing = Vec::new();
    for c in OBJECT_COMMANDS {
        if !cmds.contains(*c) {
            missing.push(format!("\\{c}"));
        }
    }
    for f in FILL_STYLES {
        if *f != "none" && !fills.contains(*f) {
            missing.push(format!("fillstyle={f}"));
        }
    }
    let kinds =
        [">", ">>", "<", "<<", "|", "|*", "]", "[", ")", "(", "oo", "o", "**", "*", "c", "cc", "C", ">|", ">|*", "<|"];
    for k in kinds {
        let kind = picoforge::state::arrow_kind(k).unwrap();
        if !arrows.contains(&format!("{kind:?}")) {
            missing.push(format!("arrow {k}"));
        }
    }
    for d in ["r", "ur", "u", "ul", "l", "dl", "d", "dr"] {
        if !uputs.contains(d) {
            missing.push(format!("uput[{d}]"));
        }
    }
    for l in ["0", "1", "2"] {
        if !liftpens.contains(l) {
            missing.push(format!("liftpen={l}"));
        }
    }
    if !multirput {
        missing.push("multirput".into());
    }
    if !star_pic {
        missing.push("pspicture*".into());
    }
    missing
}

fn criterion_8() -> Outcome {
    let files = corpus();
    let mut bad = Vec::new();
    for (name, src) in &files {
        let (ast, _) = parse(src);
        let (again, _) = parse(&print(&ast));
        if !ast.same_structure(&again) {
            bad.push(format!("{name}: print/parse differs"));
        }
        let c = compile(src, &CompileOptions::default());
        for format in [Format::Svg, Format::Eps] {
            let opts = RenderOptions { format, ..RenderOptions::default() };
            if emit(&c.scene, &opts) != emit(&c.scene, &opts) {
                bad.push(format!("{name}: {format:?} not deterministic"));
            }
        }
    }
    let entries = golden::run(&corpus_dir(), false).expect("golden run");
    let failed: Vec<String> = entries.iter().filter(|e| !e.ok()).map(|e| e.line()).collect();
    bad.extend(failed);
    bad.extend(coverage(&files).into_iter().map(|m| format!("corpus lacks {m}")));
    if files.len() < 40 {
        bad.push(format!("only {} corpus files", files.len()));
    }
    if bad.is_empty() {
        Outcome::Pass(format!(
            "{} files round-trip, emit deterministic, {} golden outputs byte-exact, coverage complete",
            files.len(),
            entries.len()
        ))
    } else {
        Outcome::Fail(bad.join("; "))
    }
}

// ---------------------------------------------------------------- 9

fn criterion_9() -> Outcome {
    let cases = [
        ("\\psset{linewidth=abc}", "Bad number"),
        ("\\psset{frobnicate=1}", "Graphics parameter `frobnicate' not defined"),
        ("\\psset{style=nosuch}", "Custom style `nosuch' undefined"),
        ("\\psset{linetype=-4}", "linetype must be greater than -3"),
        ("\\psscaleboxto(0,0){\\pstbox(1,1,0){x}}", "dimensions cannot both be zero"),
    ];
    let mut bad = Vec::new();
    for (src, text) in cases {
        let c = compile(src, &CompileOptions::default());
        if !c.diagnostics.iter().any(|d| d.message.contains(text)) {
            let got: Vec<_> = c.diagnostics.iter().map(|d| d.message.clone()).collect();
            bad.push(format!("{src}: want {text:?}, got {got:?}"));
        }
    }
    let err = compile(cases[4].0, &CompileOptions::default());
    if !err.diagnostics.iter().any(|d| d.severity == Severity::Error) {
        bad.push("zero scale target is not an error".into());
    }
    if bad.is_empty() {
        Outcome::Pass("all five texts appear verbatim".into())
    } else {
        Outcome::Fail(bad.join("; "))
    }
}

type Check = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Check; 9] = [
        ("fixed-point differential", criterion_1),
        ("defaults snapshot", criterion_2),
        ("arrow table and head size", criterion_3),
        ("geometry properties", criterion_4),
        ("box frame numerics", criterion_5),
        ("dash reconstruction", criterion_6),
        ("decoration order", criterion_7),
        ("round trip, determinism, golden corpus", criterion_8),
        ("diagnostic texts", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Outcome::Pass(d) => println!("criterion {} ({name}): PASS: {d}", i + 1),
            Outcome::Known(d) => println!("criterion {} ({name}): FAIL (known): {d}", i + 1),
            Outcome::Fail(d) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL: {d}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
