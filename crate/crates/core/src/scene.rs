//! Evaluation of a parsed document into a paint-ordered scene.

use crate::diag::{Diagnostics, Reporter, Span};
use crate::fixnum::{parse_number, sp_div, sp_pyth, Sp};
use crate::geom::{
    append_arc, apply_arrows, arc_with_arcsep, diamond, dot_geometry, ellipse, ellipse_arc, elliptic_wedge,
    exact_sin_cos, frame, grid, hatch_for, interp_curve, parabola, polyline, shadow_offset, triangle, wedge, Affine,
    ArrowGeometry, ArrowParams, BBox, CurveKind, DashPattern, DotGeometry, HatchLine, Path, Pt, Seg, V2,
};
use crate::state::{parse_ref, parse_refangle, parse_rot, ArrowKind, ColorRef, FillOp, LineStyle, Rot, State};
use crate::syntax::{Ast, Cmd, Node as AstNode, RawCoord, Role, Text, BOX_COMMANDS};
use std::collections::HashMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rgb {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl Rgb {
    pub const BLACK: Rgb = Rgb { r: 0.0, g: 0.0, b: 0.0 };

    pub fn of(c: &ColorRef) -> Rgb {
        let (r, g, b) = c.to_rgb();
        Rgb { r, g, b }
    }

    /// `#rrggbb`
    pub fn hex(&self) -> String {
        let ch = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
        format!("#{:02x}{:02x}{:02x}", ch(self.r), ch(self.g), ch(self.b))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrokeStyle {
    pub width: Sp,
    pub color: Rgb,
    /// 0 butt, 1 round, 2 square.
    pub cap: u8,
    pub dash: Option<DashPattern>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Paint {
    Fill {
        path: Path,
        color: Rgb,
        even_odd: bool,
    },
    Stroke {
        path: Path,
        style: StrokeStyle,
    },
    /// Hatch lines already cut to `region`.
    Hatch {
        region: Path,
        lines: Vec<HatchLine>,
        color: Rgb,
    },
}

/// Layer kinds in their canonical paint order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LayerKind {
    Shadow,
    Border,
    Fill,
    Stroke,
    DoubleInner,
    ArrowRepeat,
    ShowPoints,
}

impl LayerKind {
    pub fn name(self) -> &'static str {
        match self {
            LayerKind::Shadow => "shadow",
            LayerKind::Border => "border",
            LayerKind::Fill => "fill",
            LayerKind::Stroke => "stroke",
            LayerKind::DoubleInner => "double-inner",
            LayerKind::ArrowRepeat => "arrow-repeat",
            LayerKind::ShowPoints => "showpoints",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub kind: LayerKind,
    pub paints: Vec<Paint>,
}

/// A measured text box. `transform` maps box space (origin at the left end
/// of the baseline) into the parent.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelNode {
    pub text: String,
    pub size: Sp,
    pub width: Sp,
    pub height: Sp,
    pub depth: Sp,
    pub color: Rgb,
    pub transform: Affine,
    /// Extents came from `\pstbox`, not from the measurer.
    pub placeholder: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Decorated { layers: Vec<Layer>, starred: bool },
    DotBatch { centers: Vec<V2>, dot: DotGeometry, color: Rgb, fill: Rgb, width: Sp },
    Label(LabelNode),
    ClipGroup { clip: Path, children: Vec<Node> },
    Group { transform: Affine, children: Vec<Node> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub bbox: BBox,
    pub baseline: Sp,
    pub nodes: Vec<Node>,
}

impl Scene {
    /// Every node, depth first, parents before children.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Node)) {
        fn go<'a>(ns: &'a [Node], f: &mut dyn FnMut(&'a Node)) {
            for n in ns {
                f(n);
                match n {
                    Node::ClipGroup { children, .. } | Node::Group { children, .. } => go(children, f),
                    _ => {}
                }
            }
        }
        go(&self.nodes, f);
    }
}

/// Text metrics provider.
pub trait Measure {
    /// `(width, height, depth)` of `text` at `size`.
    fn measure(&self, text: &str, size: Sp) -> (Sp, Sp, Sp);
}

/// 0.6·size per character, height 0.7·size, depth 0.2·size.
#[derive(Debug, Clone, Copy, Default)]
pub struct DefaultMeasure;

impl Measure for DefaultMeasure {
    fn measure(&self, text: &str, size: Sp) -> (Sp, Sp, Sp) {
        let n = text.chars().count() as f64;
        (size.scale(0.6 * n), size.scale(0.7), size.scale(0.2))
    }
}

pub const LABEL_SIZE: Sp = Sp::pt(10);

#[derive(Debug, Clone, Copy, Default)]
pub struct EvalOptions {
    /// Raw PostScript and unsupported constructs become errors.
    pub strict: bool,
}

pub fn eval(ast: &Ast, initial: &State, diags: &mut Diagnostics) -> Scene {
    eval_with(ast, initial, diags, &DefaultMeasure, EvalOptions::default())
}

pub fn eval_with(
    ast: &Ast,
    initial: &State,
    diags: &mut Diagnostics,
    measure: &dyn Measure,
    opts: EvalOptions,
) -> Scene {
    let mut ev = Ev {
        diags,
        measure,
        opts,
        acc_rot: 0.0,
        aliases: HashMap::new(),
        picture: None,
        in_multips: false,
        in_clip_def: false,
    };
    let mut st = initial.clone();
    let mut hb = Hbox::default();
    let mut bbox: Option<BBox> = None;
    let mut baseline = Sp::ZERO;
    for item in &ast.items {
        match item {
            AstNode::Cmd(c) if c.name == "pspicture" => {
                let (bb, bl, nodes) = ev.picture(c, &st);
                if bbox.is_none() {
                    baseline = bl;
                }
                bbox = Some(bbox.map_or(bb, |b| b.union(bb)));
                hb.nodes.extend(nodes);
            }
            AstNode::Cmd(c) => ev.command(c, &mut st, &mut hb),
            AstNode::Text(t) => ev.text(t, &mut hb),
        }
    }
    let bbox = bbox.or_else(|| bounds_of(&hb.nodes)).unwrap_or(BBox {
        x0: Sp::ZERO,
        y0: Sp::ZERO,
        x1: Sp::ZERO,
        y1: Sp::ZERO,
    });
    Scene { bbox, baseline, nodes: hb.nodes }
}

// ---------------------------------------------------------------- boxes

#[derive(Debug, Default)]
struct Hbox {
    w: Sp,
    h: Sp,
    d: Sp,
    nodes: Vec<Node>,
}

impl Hbox {
    /// Zero-size material at the current point.
    fn place(&mut self, nodes: Vec<Node>) {
        let x = self.w.to_pt();
        self.nodes.extend(shifted(nodes, x, 0.0));
    }

    fn append(&mut self, b: Hbox) {
        let x = self.w.to_pt();
        self.nodes.extend(shifted(b.nodes, x, 0.0));
        self.w = self.w + b.w;
        self.h = self.h.max(b.h);
        self.d = self.d.max(b.d);
    }
}

fn transformed(nodes: Vec<Node>, m: Affine) -> Vec<Node> {
    if nodes.is_empty() || m.is_identity() {
        nodes
    } else {
        vec![Node::Group { transform: m, children: nodes }]
    }
}

fn shifted(nodes: Vec<Node>, dx: f64, dy: f64) -> Vec<Node> {
    transformed(nodes, Affine::translate(dx, dy))
}

/// Multiply a dimension by a decimal constant the way TeX does.
fn kmul(c: &str, v: Sp) -> Sp {
    parse_number(c).ok().and_then(|n| n.times_dimen(v).ok()).unwrap_or(Sp::ZERO)
}

fn half(v: Sp) -> Sp {
    v.div_int(2)
}

fn v2(x: Sp, y: Sp) -> V2 {
    V2::new(x.to_pt(), y.to_pt())
}

/// Strip TeX markup from label source.
pub fn label_text(raw: &str) -> String {
    let mut out = String::new();
    let mut it = raw.chars().peekable();
    while let Some(c) = it.next() {
        match c {
            '{' | '}' | '$' => {}
            '~' => out.push(' '),
            '\\' => match it.peek() {
                Some(n) if n.is_ascii_alphabetic() => {
                    while it.peek().is_some_and(|n| n.is_ascii_alphabetic()) {
                        it.next();
                    }
                    if it.peek() == Some(&' ') {
                        it.next();
                    }
                }
                Some('\\') => {
                    it.next();
                    out.push(' ');
                }
                Some(_) => out.push(it.next().unwrap()),
                None => {}
            },
            c => out.push(c),
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

// ---------------------------------------------------------------- evaluator

const OBJECTS: &[&str] = &[
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
    "psdots",
    "psgrid",
    "pscustom",
];

const SPECIAL: &[&str] = &["psdots", "psdot", "psgrid", "pscustom", "qline", "qdisk"];

/// Per-object resolved state.
struct Obj {
    s: State,
    /// Double-line separation, read before the line width was widened.
    ds: Sp,
    starred: bool,
    repeat: bool,
}

struct Shape {
    path: Path,
    open: bool,
    linetype: i64,
    points: Vec<V2>,
    /// Control polygon drawn by showpoints (Bezier objects).
    polygon: Option<Vec<V2>>,
    showpoints: bool,
}

impl Shape {
    fn new(path: Path, open: bool, linetype: i64, points: Vec<V2>, showpoints: bool) -> Shape {
        Shape { path, open, linetype, points, polygon: None, showpoints }
    }
}

struct Custom {
    path: Path,
    ctm: Affine,
    gstack: Vec<(Path, Affine, State)>,
    mstack: Vec<Affine>,
    nodes: Vec<Node>,
}

struct Ev<'a> {
    diags: &'a mut Diagnostics,
    measure: &'a dyn Measure,
    opts: EvalOptions,
    /// Net rotation of the enclosing placements.
    acc_rot: f64,
    /// alias -> (base command, params)
    aliases: HashMap<String, (String, String)>,
    /// Corners of the current picture, for argument-less `\psgrid`.
    picture: Option<(Pt, Pt)>,
    in_multips: bool,
    in_clip_def: bool,
}

fn solid_star(s: &mut State) {
    s.p.linewidth = Sp::ZERO;
    s.p.doubleline = false;
    s.p.linestyle = LineStyle::None;
    s.p.fillstyle = vec![FillOp::Solid];
    s.p.fillstyle_name = "solid".into();
    s.p.fillcolor = s.p.linecolor.clone();
}

fn arrow_params(s: &State) -> ArrowParams {
    ArrowParams {
        clw: s.p.linewidth,
        arrowsize: s.p.arrowsize,
        arrowlength: s.p.arrowlength,
        arrowinset: s.p.arrowinset,
        arrowscale: s.p.arrowscale,
        tbarsize: s.p.tbarsize,
        bracketlength: s.p.bracketlength,
        rbracketlength: s.p.rbracketlength,
        dotsize: s.p.dotsize,
    }
}

fn arrow_type(s: &State) -> i64 {
    let b = if s.p.arrows.1 != ArrowKind::None { -2 } else { 0 };
    let a = if s.p.arrows.0 != ArrowKind::None { -1 } else { 0 };
    a + b
}

/// Origin then swapaxes, as applied before each object.
fn object_frame(s: &State) -> Affine {
    let t = Affine::translate(s.p.origin.0.to_pt(), s.p.origin.1.to_pt());
    if s.p.swapaxes {
        t.compose(Affine::swap())
    } else {
        t
    }
}

fn plain_dash(s: &State) -> Option<DashPattern> {
    let entries: Vec<i64> = s.p.dash.iter().map(|d| d.raw().abs()).collect();
    (entries.iter().sum::<i64>() > 0).then_some(DashPattern {
        entries,
        phase: 0,
        denom: 1,
        count: 1,
        round_caps: false,
    })
}

/// The stroke for the current line style, or None for `linestyle=none`.
fn line_style(path: &Path, s: &State, width: Sp, color: Rgb, linetype: i64) -> Option<StrokeStyle> {
    let len = || Sp::from_pt_f64(path.length());
    match s.p.linestyle {
        LineStyle::None => None,
        LineStyle::Solid => Some(StrokeStyle { width, color, cap: 0, dash: None }),
        LineStyle::Dashed => Some(StrokeStyle {
            width,
            color,
            cap: s.p.linecap,
            dash: crate::geom::dash_pattern(len(), s.p.dash, s.p.dashadjust, linetype, None),
        }),
        LineStyle::Dotted => Some(StrokeStyle {
            width,
            color,
            cap: 1,
            dash: crate::geom::dash_pattern(
                len(),
                s.p.dash,
                s.p.dashadjust,
                linetype,
                Some(s.p.dotsep + s.p.linewidth),
            ),
        }),
    }
}

fn fill_paints(path: &Path, s: &State) -> Vec<Paint> {
    let fillc = Rgb::of(&s.p.fillcolor);
    let mut out = Vec::new();
    for op in &s.p.fillstyle {
        match op {
            FillOp::Solid => out.push(Paint::Fill { path: path.clone(), color: fillc, even_odd: false }),
            FillOp::EoFill => out.push(Paint::Fill { path: path.clone(), color: fillc, even_odd: true }),
            FillOp::VLines | FillOp::HLines => {
                let lines = hatch_for(
                    *op,
                    path,
                    s.p.hatchangle,
                    s.p.hatchsep.to_pt(),
                    s.p.hatchwidth.to_pt(),
                    s.p.hatchsepinc.to_pt(),
                    s.p.hatchwidthinc.to_pt(),
                );
                out.push(Paint::Hatch { region: path.clone(), lines, color: Rgb::of(&s.p.hatchcolor) });
            }
        }
    }
    out
}

fn arrow_paints(g: &ArrowGeometry, lw: Sp, line: Rgb, fill: Rgb) -> Vec<Paint> {
    let mut out = Vec::new();
    if !g.outline.is_empty() {
        out.push(Paint::Fill { path: g.outline.clone(), color: line, even_odd: false });
    }
    if !g.strokes.is_empty() {
        out.push(Paint::Stroke {
            path: g.strokes.clone(),
            style: StrokeStyle { width: lw, color: line, cap: g.stroke_cap, dash: None },
        });
    }
    if !g.inner.is_empty() {
        out.push(Paint::Fill { path: g.inner.clone(), color: fill, even_odd: false });
    }
    out
}

pub fn dot_paints(g: &DotGeometry, lw: Sp, line: Rgb, fill: Rgb) -> Vec<Paint> {
    let mut out = Vec::new();
    if !g.fill.is_empty() {
        out.push(Paint::Fill { path: g.fill.clone(), color: line, even_odd: false });
    }
    if !g.inner.is_empty() {
        out.push(Paint::Fill { path: g.inner.clone(), color: fill, even_odd: false });
    }
    if !g.stroke.is_empty() {
        out.push(Paint::Stroke {
            path: g.stroke.clone(),
            style: StrokeStyle { width: lw, color: line, cap: 0, dash: None },
        });
    }
    out
}

fn push_layer(layers: &mut Vec<Layer>, kind: LayerKind, paints: Vec<Paint>) {
    if !paints.is_empty() {
        layers.push(Layer { kind, paints });
    }
}

/// The point on an ellipse seen at angle `a` from the center, as a
/// parametric angle.
fn ellipse_param(a: f64, rx: f64, ry: f64) -> f64 {
    if rx == ry {
        return a;
    }
    let (s, c) = exact_sin_cos(a);
    let t = (rx * s).atan2(ry * c).to_degrees();
    let mut d = (t - a) % 360.0;
    if d > 180.0 {
        d -= 360.0;
    } else if d < -180.0 {
        d += 360.0;
    }
    a + d
}

fn rect_path(x0: f64, y0: f64, x1: f64, y1: f64) -> Path {
    polyline(&[V2::new(x0, y0), V2::new(x1, y0), V2::new(x1, y1), V2::new(x0, y1)], 0.0, true)
}

impl<'a> Ev<'a> {
    fn rep(&mut self, span: Span) -> Reporter<'_> {
        Reporter::new(&mut *self.diags, span)
    }

    fn base(&self, name: &str) -> String {
        self.aliases.get(name).map_or_else(|| name.to_string(), |(b, _)| b.clone())
    }

    fn unsupported(&mut self, span: Span, msg: String) {
        if self.opts.strict {
            self.diags.error(span, msg);
        } else {
            self.diags.warning(span, msg);
        }
    }

    fn run(&mut self, ast: &Ast, st: &mut State, hb: &mut Hbox) {
        for item in &ast.items {
            match item {
                AstNode::Text(t) => self.text(t, hb),
                AstNode::Cmd(c) => self.command(c, st, hb),
            }
        }
    }

    /// Typeset a body into a box, inside its own group.
    fn hbox(&mut self, body: Option<&Ast>, st: &State) -> Hbox {
        let mut hb = Hbox::default();
        if let Some(b) = body {
            let mut s = st.clone();
            self.run(b, &mut s, &mut hb);
        }
        hb
    }

    fn text(&mut self, t: &Text, hb: &mut Hbox) {
        let text = label_text(&t.text);
        if text.is_empty() {
            return;
        }
        let (w, h, d) = self.measure.measure(&text, LABEL_SIZE);
        let node = LabelNode {
            text,
            size: LABEL_SIZE,
            width: w,
            height: h,
            depth: d,
            color: Rgb::BLACK,
            transform: Affine::IDENTITY,
            placeholder: false,
        };
        hb.append(Hbox { w, h, d, nodes: vec![Node::Label(node)] });
    }

    fn command(&mut self, c: &Cmd, st: &mut State, hb: &mut Hbox) {
        let base = self.base(&c.name);
        let span = c.span;
        let sc = c.scalars();
        match base.as_str() {
            "psset" => {
                let raw = sc.first().copied().unwrap_or("");
                st.apply_raw(raw, &mut self.rep(span));
            }
            "newpsstyle" => st.define_style(sc[0], sc[1]),
            "newgray" | "newrgbcolor" | "newhsbcolor" | "newcmykcolor" => {
                let model = match base.as_str() {
                    "newgray" => "gray",
                    "newrgbcolor" => "rgb",
                    "newhsbcolor" => "hsb",
                    _ => "cmyk",
                };
                st.define_color(sc[0], model, sc[1], &mut self.rep(span));
            }
            "newpsobject" => {
                let target = sc[1].trim();
                let (b, mut par) = self.aliases.get(target).cloned().unwrap_or((target.to_string(), String::new()));
                if !par.is_empty() && !sc[2].trim().is_empty() {
                    par.push(',');
                }
                par.push_str(sc[2]);
                self.aliases.insert(sc[0].trim().to_string(), (b, par));
            }
            "SpecialCoor" => st.mode.special_coor = true,
            "NormalCoor" => st.mode.special_coor = false,
            "Polar" => st.mode.polar = true,
            "Cartesian" => {
                st.mode.polar = false;
                if let Some(RawCoord::Cartesian(x, y)) = c.coords().first() {
                    let mut rep = Reporter::new(&mut *self.diags, span);
                    st.set("xunit", x, &mut rep);
                    st.set("yunit", y, &mut rep);
                }
            }
            "degrees" => {
                let n = c.text(Role::Opt).map(|t| crate::state::checknum(t, &mut self.rep(span)));
                st.mode.angle_unit = match n {
                    Some(n) if n != 360.0 && n != 0.0 => crate::state::AngleUnit::Divided(n),
                    _ => crate::state::AngleUnit::Degrees,
                };
            }
            "radians" => st.mode.angle_unit = crate::state::AngleUnit::Radians,
            "pspicture" => {
                let (_, _, nodes) = self.picture(c, st);
                hb.place(nodes);
            }
            "psclip" => {
                let nodes = self.clip(c, st);
                hb.place(nodes);
            }
            "multips" => {
                let nodes = self.multips(c, st);
                hb.place(nodes);
            }
            "rput" | "uput" | "Rput" | "multirput" | "psscalebox" | "psscaleboxto" | "rotateleft" | "rotateright"
            | "rotatedown" | "pstbox" => {
                let b = self.boxed(c, &base, st);
                hb.append(b);
            }
            b if BOX_COMMANDS.contains(&b) => {
                let b = self.frame_box(c, &base, st);
                hb.append(b);
            }
            b if OBJECTS.contains(&b) => {
                let (nodes, _) = self.object(c, &base, st);
                hb.place(nodes);
            }
            other => self.unsupported(span, format!("command `\\{other}' is not supported here")),
        }
    }

    fn object_state(&mut self, c: &Cmd, st: &State) -> Obj {
        let mut s = st.clone();
        // Custom parameters (liftpen) are read inside the custom context.
        s.in_custom = s.in_custom || self.base(&c.name) == "pscustom";
        let mut rep = Reporter::new(&mut *self.diags, c.span);
        if let Some((_, p)) = self.aliases.get(&c.name) {
            s.apply_raw(p, &mut rep);
        }
        if let Some(p) = c.params() {
            s.apply_raw(p, &mut rep);
        }
        if let Some(a) = c.arrow_spec() {
            s.set("arrows", a, &mut rep);
        }
        if c.starred {
            solid_star(&mut s);
        }
        let ds = s.doublesep();
        if s.p.doubleline {
            s.p.linewidth = s.p.linewidth.times(2) + ds;
        }
        let repeat = s.p.border > Sp::ZERO || s.p.doubleline || s.p.shadow;
        Obj { s, ds, starred: c.starred, repeat }
    }

    fn points(&mut self, c: &Cmd, s: &State) -> Vec<V2> {
        let mut rep = Reporter::new(&mut *self.diags, c.span);
        c.coords()
            .iter()
            .map(|rc| {
                let (x, y) = s.resolve_coord(rc, &mut rep);
                v2(x, y)
            })
            .collect()
    }

    fn scalar_len(&mut self, c: &Cmd, s: &State, i: usize) -> Sp {
        let t = c.scalars().get(i).copied().unwrap_or("0").to_string();
        s.length(&t, &mut self.rep(c.span))
    }

    fn angle_args(&mut self, c: &Cmd, s: &State) -> Vec<f64> {
        let mut rep = Reporter::new(&mut *self.diags, c.span);
        c.angles().iter().map(|a| s.resolve_angle(a, &mut rep)).collect()
    }

    /// Evaluate one graphics object. Also returns its path in picture
    /// space for clipping.
    fn object(&mut self, c: &Cmd, base: &str, st: &State) -> (Vec<Node>, Option<Path>) {
        let o = self.object_state(c, st);
        let s = &o.s;
        let line = Rgb::of(&s.p.linecolor);
        match base {
            "qline" => {
                let pts = self.points(c, s);
                let mut p = Path::new();
                p.move_to(pts[0]);
                p.line_to(pts[1]);
                let style = StrokeStyle { width: s.p.linewidth, color: line, cap: 0, dash: None };
                let node = Node::Decorated {
                    layers: vec![Layer {
                        kind: LayerKind::Stroke,
                        paints: vec![Paint::Stroke { path: p.clone(), style }],
                    }],
                    starred: false,
                };
                (vec![node], Some(p))
            }
            "qdisk" => {
                let pts = self.points(c, s);
                let r = self.scalar_len(c, s, 0).to_pt();
                let p = ellipse(pts[0], r, r);
                let node = Node::Decorated {
                    layers: vec![Layer {
                        kind: LayerKind::Fill,
                        paints: vec![Paint::Fill { path: p.clone(), color: line, even_odd: false }],
                    }],
                    starred: false,
                };
                (vec![node], Some(p))
            }
            "psdots" | "psdot" => (self.dots(c, &o), None),
            "psgrid" => (self.psgrid(c, s), None),
            "pscustom" => self.custom(c, o),
            _ => match self.shape(c, base, s, None, false) {
                Ok(sh) => {
                    let m = object_frame(s);
                    let clip = sh.path.transform(&m);
                    let node = self.decorate(&sh, &o);
                    (transformed(vec![node], m), Some(clip))
                }
                Err(e) => {
                    self.diags.warning(c.span, e);
                    (Vec::new(), None)
                }
            },
        }
    }

    /// Build the geometry of a path object. `pen` is the current point
    /// inside `\pscustom`; `lead` prepends it to point lists.
    fn shape(&mut self, c: &Cmd, base: &str, s: &State, pen: Option<V2>, lead: bool) -> Result<Shape, String> {
        let mut pts = self.points(c, s);
        let lw = s.p.linewidth.to_pt();
        let k = s.p.dimen.k();
        let at = arrow_type(s);
        let linearc = s.p.linearc.to_pt();
        let prepend = |pts: &mut Vec<V2>| {
            if lead {
                if let Some(p) = pen {
                    pts.insert(0, p);
                }
            }
        };
        let sh = match base {
            "psline" => {
                prepend(&mut pts);
                Shape::new(polyline(&pts, linearc, false), true, at, pts, true)
            }
            "pspolygon" => Shape::new(polyline(&pts, linearc, true), false, 1, pts, true),
            "psframe" => {
                let corner = if s.p.cornersize_absolute { (linearc, false) } else { (s.p.framearc, true) };
                let corner = if corner.0 <= 0.0 { (0.0, false) } else { corner };
                Shape::new(frame(pts[0], pts[1], corner, k, lw)?, false, 2, Vec::new(), false)
            }
            "psdiamond" => {
                let p = diamond(pts[0], pts[1].x.abs(), pts[1].y.abs(), s.p.gangle, linearc, k, lw)?;
                Shape::new(p, false, 4, Vec::new(), false)
            }
            "pstriangle" => {
                let (w, h) = (pts[1].x.abs(), pts[1].y);
                let g = if h < 0.0 { s.p.gangle + 180.0 } else { s.p.gangle };
                let p = triangle(pts[0], w, h.abs(), g, linearc, k, lw)?;
                Shape::new(p, false, 2, Vec::new(), false)
            }
            "psellipse" => {
                let (rx, ry) = (pts[1].x.abs() - k * lw, pts[1].y.abs() - k * lw);
                if rx <= 0.0 || ry <= 0.0 {
                    return Err("ellipse radii must be positive".into());
                }
                Shape::new(ellipse(pts[0], rx, ry), false, 2, Vec::new(), false)
            }
            "pscircle" | "psCircle" => {
                let r = if base == "pscircle" { self.scalar_len(c, s, 0) } else { s.p.radius };
                let r = r.to_pt().abs() - k * lw;
                if r <= 0.0 {
                    return Err("circle radius must be positive".into());
                }
                Shape::new(ellipse(pts[0], r, r), false, 4, Vec::new(), false)
            }
            "pswedge" => {
                let r = self.scalar_len(c, s, 0).to_pt();
                let a = self.angle_args(c, s);
                Shape::new(wedge(pts[0], r, a[0], a[1], k, lw)?, false, 1, Vec::new(), false)
            }
            "psarc" | "psarcn" => {
                let ccw = base == "psarc";
                let r = self.scalar_len(c, s, 0).to_pt();
                let a = self.angle_args(c, s);
                let (a0, a1) = arc_with_arcsep(r, a[0], a[1], s.p.arcsep_a.to_pt(), s.p.arcsep_b.to_pt(), ccw);
                let mut p = Path::new();
                append_arc(&mut p, pts[0], r, r, a0, a1, ccw);
                Shape::new(p, true, at, Vec::new(), false)
            }
            "psellipticarc" | "psellipticarcn" => {
                let ccw = base == "psellipticarc";
                let (rx, ry) = (pts[1].x.abs(), pts[1].y.abs());
                let a = self.angle_args(c, s);
                let (t0, t1) = (ellipse_param(a[0], rx, ry), ellipse_param(a[1], rx, ry));
                Shape::new(ellipse_arc(pts[0], rx, ry, t0, t1, ccw, 0.0, lw)?, true, at, Vec::new(), false)
            }
            "psellipticwedge" => {
                let (rx, ry) = (pts[1].x.abs(), pts[1].y.abs());
                let a = self.angle_args(c, s);
                let (t0, t1) = (ellipse_param(a[0], rx, ry), ellipse_param(a[1], rx, ry));
                Shape::new(elliptic_wedge(pts[0], rx, ry, t0, t1, k, lw)?, false, 1, Vec::new(), false)
            }
            "psbezier" | "pscbezier" => {
                let closed = base == "pscbezier";
                if !closed && pts.len().is_multiple_of(3) {
                    pts.insert(0, pen.unwrap_or_default());
                }
                let mut ctrl = pts.clone();
                if closed && ctrl.len().is_multiple_of(3) {
                    ctrl.push(ctrl[0]);
                }
                let mut p = Path::new();
                p.move_to(ctrl[0]);
                for t in ctrl[1..].chunks_exact(3) {
                    p.curve_to(t[0], t[1], t[2]);
                }
                if closed {
                    p.close();
                }
                let mut sh = Shape::new(p, !closed, if closed { 1 } else { at }, pts, true);
                sh.polygon = Some(ctrl);
                sh
            }
            "parabola" => {
                let (p, _) = parabola(pts[0], pts[1]);
                Shape::new(p, true, at, pts, true)
            }
            "pscurve" | "psecurve" => {
                prepend(&mut pts);
                let kind = if base == "pscurve" { CurveKind::Open } else { CurveKind::EndClipped };
                Shape::new(interp_curve(&pts, s.p.curvature, kind), true, at, pts, true)
            }
            "psccurve" => Shape::new(interp_curve(&pts, s.p.curvature, CurveKind::Closed), false, 1, pts, true),
            other => return Err(format!("`\\{other}' is not a path object")),
        };
        Ok(sh)
    }

    /// Wrap a shape in its canonical layers.
    fn decorate(&self, sh: &Shape, o: &Obj) -> Node {
        let s = &o.s;
        let lw = s.p.linewidth;
        let line = Rgb::of(&s.p.linecolor);
        let fillc = Rgb::of(&s.p.fillcolor);
        let arrowed = sh.open && s.p.arrows != (ArrowKind::None, ArrowKind::None);
        let (path, heads) = if arrowed {
            apply_arrows(&sh.path, s.p.arrows.0, s.p.arrows.1, &arrow_params(s))
        } else {
            (sh.path.clone(), Vec::new())
        };
        let heads: Vec<Paint> = heads.iter().flat_map(|g| arrow_paints(g, lw, line, fillc)).collect();
        let main = line_style(&path, s, lw, line, sh.linetype);
        let has_fill = !s.p.fillstyle.is_empty();
        let mut layers = Vec::new();

        if s.p.shadow {
            let (dx, dy) = shadow_offset(s.p.shadowsize, s.p.shadowangle);
            let m = Affine::translate(dx.to_pt(), dy.to_pt());
            let sp = path.transform(&m);
            let sc = Rgb::of(&s.p.shadowcolor);
            let recolor = |st: &StrokeStyle, c: Rgb| StrokeStyle { color: c, ..st.clone() };
            let mut paints = Vec::new();
            if !sh.open || has_fill {
                paints.push(Paint::Fill { path: sp.clone(), color: sc, even_odd: false });
            }
            if let Some(st) = &main {
                paints.push(Paint::Stroke { path: sp, style: recolor(st, sc) });
            }
            if sh.open {
                for g in &heads {
                    if let Some(p) = shadow_paint(g, &m, sc) {
                        paints.push(p);
                    }
                }
            }
            if !sh.open || has_fill {
                paints.push(Paint::Fill { path: path.clone(), color: fillc, even_odd: false });
            }
            if !sh.open {
                if let Some(st) = &main {
                    paints.push(Paint::Stroke { path: path.clone(), style: recolor(st, fillc) });
                }
            }
            push_layer(&mut layers, LayerKind::Shadow, paints);
        }
        if s.p.border > Sp::ZERO {
            if let Some(st) = &main {
                let width = s.p.border.times(2) + lw;
                let style = StrokeStyle { width, color: Rgb::of(&s.p.bordercolor), ..st.clone() };
                push_layer(&mut layers, LayerKind::Border, vec![Paint::Stroke { path: path.clone(), style }]);
            }
        }
        let mut fills = fill_paints(&path, s);
        let mut strokes = Vec::new();
        if let Some(st) = &main {
            strokes.push(Paint::Stroke { path: path.clone(), style: st.clone() });
        }
        // Without a stroke (starred objects) the heads are plain fills.
        if main.is_none() && o.starred {
            fills.extend(heads.iter().cloned());
        } else {
            strokes.extend(heads.iter().cloned());
        }
        push_layer(&mut layers, LayerKind::Fill, fills);
        push_layer(&mut layers, LayerKind::Stroke, strokes);
        if s.p.doubleline {
            if let Some(st) = &main {
                let style = StrokeStyle { width: o.ds, color: Rgb::of(&s.p.doublecolor), ..st.clone() };
                push_layer(&mut layers, LayerKind::DoubleInner, vec![Paint::Stroke { path: path.clone(), style }]);
            }
        }
        if o.repeat && sh.open {
            push_layer(&mut layers, LayerKind::ArrowRepeat, heads.clone());
        }
        if s.p.showpoints && sh.showpoints {
            let mut paints = Vec::new();
            if let Some(poly) = &sh.polygon {
                let style = StrokeStyle { width: lw.div_int(2), color: line, cap: 0, dash: plain_dash(s) };
                paints.push(Paint::Stroke { path: polyline(poly, 0.0, false), style });
            }
            if let Some(dot) = dot_geometry(&s.p.dotstyle, s.p.dotsize, lw, s.p.tbarsize, s.p.dotscale, s.p.dotangle) {
                let n = sh.points.len();
                for (i, p) in sh.points.iter().enumerate() {
                    let skip = sh.open
                        && ((i == 0 && s.p.arrows.0 != ArrowKind::None)
                            || (i + 1 == n && s.p.arrows.1 != ArrowKind::None));
                    if !skip {
                        let g = dot.transform(&Affine::translate(p.x, p.y));
                        paints.extend(dot_paints(&g, lw, line, fillc));
                    }
                }
            }
            push_layer(&mut layers, LayerKind::ShowPoints, paints);
        }
        Node::Decorated { layers, starred: o.starred }
    }

    fn dots(&mut self, c: &Cmd, o: &Obj) -> Vec<Node> {
        let s = &o.s;
        let pts = self.points(c, s);
        let lw = s.p.linewidth;
        let dot = match dot_geometry(&s.p.dotstyle, s.p.dotsize, lw, s.p.tbarsize, s.p.dotscale, s.p.dotangle) {
            Some(d) => d,
            None => {
                self.diags.warning(c.span, format!("unknown dot style `{}'", s.p.dotstyle));
                return Vec::new();
            }
        };
        let node = Node::DotBatch {
            centers: pts,
            dot,
            color: Rgb::of(&s.p.linecolor),
            fill: Rgb::of(&s.p.fillcolor),
            width: lw,
        };
        transformed(vec![node], object_frame(s))
    }

    fn psgrid(&mut self, c: &Cmd, s: &State) -> Vec<Node> {
        let mut rep = Reporter::new(&mut *self.diags, c.span);
        let cs: Vec<Pt> = c
            .coords()
            .iter()
            .map(|rc| {
                let (x, y) = s.resolve_coord(rc, &mut rep);
                Pt::new(x, y)
            })
            .collect();
        let zero = Pt::new(Sp::ZERO, Sp::ZERO);
        let (o, a, b) = match cs.len() {
            0 => match self.picture {
                Some((a, b)) => (a, a, b),
                None => {
                    self.diags.warning(c.span, "\\psgrid without coordinates outside a pspicture draws nothing");
                    return Vec::new();
                }
            },
            1 => (zero, zero, cs[0]),
            2 => (cs[0], cs[0], cs[1]),
            _ => (cs[0], cs[1], cs[2]),
        };
        let mut nodes = self.grid_nodes(s, o, a, b);
        nodes = transformed(nodes, object_frame(s));
        nodes
    }

    fn grid_nodes(&mut self, s: &State, o: Pt, a: Pt, b: Pt) -> Vec<Node> {
        let (xu, yu) = (s.p.units.xunit, s.p.units.yunit);
        let iu = |v: Sp, u: Sp| {
            if u.raw() == 0 {
                0
            } else {
                (v.raw() as f64 / u.raw() as f64).round() as i64
            }
        };
        let g = grid(
            (iu(a.x, xu), iu(a.y, yu)),
            (iu(b.x, xu), iu(b.y, yu)),
            (iu(o.x, xu), iu(o.y, yu)),
            xu.to_pt(),
            yu.to_pt(),
            s.p.subgriddiv,
            s.p.gridlabels > Sp::ZERO,
        );
        let mut nodes = Vec::new();
        let div = s.p.subgriddiv.max(1);
        let mut lines = |set: &[(V2, V2)], width: Sp, color: Rgb, dots: i64, per: i64| {
            for vertical in [true, false] {
                let mut p = Path::new();
                for (u, v) in set.iter().filter(|(u, v)| (u.x == v.x) == vertical) {
                    p.move_to(*u);
                    p.line_to(*v);
                }
                if p.is_empty() {
                    continue;
                }
                let unit = if vertical { yu } else { xu };
                let dash = (dots > 0).then(|| DashPattern {
                    entries: vec![0, (unit.raw().abs() / (dots * per)).max(1)],
                    phase: 0,
                    denom: 1,
                    count: 1,
                    round_caps: true,
                });
                let cap = if dash.is_some() { 1 } else { 0 };
                let style = StrokeStyle { width, color, cap, dash };
                nodes.push(Node::Decorated {
                    layers: vec![Layer { kind: LayerKind::Stroke, paints: vec![Paint::Stroke { path: p, style }] }],
                    starred: false,
                });
            }
        };
        if s.p.subgridwidth > Sp::ZERO {
            lines(&g.sub, s.p.subgridwidth, Rgb::of(&s.p.subgridcolor), s.p.subgriddots, div);
        }
        lines(&g.main, s.p.gridwidth, Rgb::of(&s.p.gridcolor), s.p.griddots, 1);
        let size = s.p.gridlabels;
        let gap = size.div_int(2).to_pt();
        for l in &g.labels {
            let (w, h, d) = self.measure.measure(&l.text, size);
            let (x, y) = if l.on_x {
                (l.at.x - w.to_pt() / 2.0, l.at.y - gap - h.to_pt())
            } else {
                (l.at.x - gap - w.to_pt(), l.at.y - (h.to_pt() - d.to_pt()) / 2.0)
            };
            nodes.push(Node::Label(LabelNode {
                text: l.text.clone(),
                size,
                width: w,
                height: h,
                depth: d,
                color: Rgb::of(&s.p.gridlabelcolor),
                transform: Affine::translate(x, y),
                placeholder: false,
            }));
        }
        nodes
    }

    // ------------------------------------------------------------ pscustom

    fn custom(&mut self, c: &Cmd, o: Obj) -> (Vec<Node>, Option<Path>) {
        let mut cs = o.s.clone();
        cs.in_custom = true;
        cs.p.showpoints = false;
        let mut cu = Custom {
            path: Path::new(),
            ctm: object_frame(&o.s),
            gstack: Vec::new(),
            mstack: Vec::new(),
            nodes: Vec::new(),
        };
        if let Some(body) = c.body() {
            for item in &body.items {
                if let AstNode::Cmd(sub) = item {
                    self.custom_item(sub, &mut cs, &mut cu);
                }
            }
        }
        if !cu.gstack.is_empty() {
            self.diags.error(c.span, "unbalanced \\gsave in \\pscustom");
        }
        let s = &cs;
        let line = Rgb::of(&s.p.linecolor);
        let mut layers = Vec::new();
        push_layer(&mut layers, LayerKind::Fill, fill_paints(&cu.path, s));
        if let Some(st) = line_style(&cu.path, s, s.p.linewidth, line, s.p.linetype) {
            push_layer(&mut layers, LayerKind::Stroke, vec![Paint::Stroke { path: cu.path.clone(), style: st }]);
        }
        let mut nodes = cu.nodes;
        nodes.push(Node::Decorated { layers, starred: o.starred });
        (nodes, Some(cu.path))
    }

    fn custom_item(&mut self, c: &Cmd, cs: &mut State, cu: &mut Custom) {
        let base = self.base(&c.name);
        let span = c.span;
        let lin = |m: &Affine, v: V2| V2::new(m.a * v.x + m.c * v.y, m.b * v.x + m.d * v.y);
        let cp = |cu: &Custom| cu.path.current_point().map(|p| p.f());
        match base.as_str() {
            "newpath" => cu.path = Path::new(),
            "moveto" => {
                let p = self.points(c, cs)[0];
                cu.path.move_to(cu.ctm.apply(p));
            }
            "lineto" => {
                let p = cu.ctm.apply(self.points(c, cs)[0]);
                if cp(cu).is_some() {
                    cu.path.line_to(p);
                } else {
                    cu.path.move_to(p);
                }
            }
            "rlineto" => {
                let v = lin(&cu.ctm, self.points(c, cs)[0]);
                match cp(cu) {
                    Some(q) => cu.path.line_to(q.add(v)),
                    None => self.diags.error(span, "\\rlineto needs a current point"),
                }
            }
            "curveto" | "rcurveto" => {
                let pts = self.points(c, cs);
                let q = cp(cu);
                let (a, b, e) = if base == "curveto" {
                    (cu.ctm.apply(pts[0]), cu.ctm.apply(pts[1]), cu.ctm.apply(pts[2]))
                } else {
                    let Some(q) = q else {
                        self.diags.error(span, "\\rcurveto needs a current point");
                        return;
                    };
                    (q.add(lin(&cu.ctm, pts[0])), q.add(lin(&cu.ctm, pts[1])), q.add(lin(&cu.ctm, pts[2])))
                };
                if q.is_none() {
                    cu.path.move_to(a);
                }
                cu.path.curve_to(a, b, e);
            }
            "closepath" => cu.path.close(),
            "gsave" => cu.gstack.push((cu.path.clone(), cu.ctm, cs.clone())),
            "grestore" => match cu.gstack.pop() {
                Some((p, m, s)) => {
                    cu.path = p;
                    cu.ctm = m;
                    *cs = s;
                }
                None => self.diags.error(span, "\\grestore without a matching \\gsave"),
            },
            "translate" => {
                let p = self.points(c, cs)[0];
                cu.ctm = cu.ctm.compose(Affine::translate(p.x, p.y));
            }
            "rotate" => {
                let a = self.angle_args(c, cs)[0];
                cu.ctm = cu.ctm.compose(Affine::rotate(a));
            }
            "scale" => {
                let t = c.scalars()[0].to_string();
                let mut rep = Reporter::new(&mut *self.diags, span);
                let parts: Vec<f64> = t.split_whitespace().map(|x| crate::state::checknum(x, &mut rep)).collect();
                let sx = parts.first().copied().unwrap_or(1.0);
                let sy = parts.get(1).copied().unwrap_or(sx);
                cu.ctm = cu.ctm.compose(Affine::scale(sx, sy));
            }
            "swapaxes" => cu.ctm = cu.ctm.compose(Affine::swap()),
            "msave" => cu.mstack.push(cu.ctm),
            "mrestore" => match cu.mstack.pop() {
                Some(m) => cu.ctm = m,
                None => self.diags.error(span, "\\mrestore without a matching \\msave"),
            },
            "movepath" => {
                let v = lin(&cu.ctm, self.points(c, cs)[0]);
                cu.path = cu.path.transform(&Affine::translate(v.x, v.y));
            }
            "stroke" | "fill" | "openshadow" | "closedshadow" => {
                let mut s = cs.clone();
                if let Some(p) = c.params() {
                    s.apply_raw(p, &mut self.rep(span));
                }
                if c.starred {
                    solid_star(&mut s);
                }
                let line = Rgb::of(&s.p.linecolor);
                let (kind, paints) = match base.as_str() {
                    "stroke" => (
                        LayerKind::Stroke,
                        line_style(&cu.path, &s, s.p.linewidth, line, s.p.linetype)
                            .map(|st| vec![Paint::Stroke { path: cu.path.clone(), style: st }])
                            .unwrap_or_default(),
                    ),
                    "fill" => (LayerKind::Fill, fill_paints(&cu.path, &s)),
                    _ => {
                        let (dx, dy) = shadow_offset(s.p.shadowsize, s.p.shadowangle);
                        let sp = cu.path.transform(&Affine::translate(dx.to_pt(), dy.to_pt()));
                        let sc = Rgb::of(&s.p.shadowcolor);
                        let mut v = Vec::new();
                        if base == "closedshadow" || !s.p.fillstyle.is_empty() {
                            v.push(Paint::Fill { path: sp.clone(), color: sc, even_odd: false });
                        }
                        if let Some(st) = line_style(&sp, &s, s.p.linewidth, sc, s.p.linetype) {
                            v.push(Paint::Stroke { path: sp, style: st });
                        }
                        (LayerKind::Shadow, v)
                    }
                };
                if !paints.is_empty() {
                    cu.nodes.push(Node::Decorated { layers: vec![Layer { kind, paints }], starred: false });
                }
            }
            "code" | "coor" | "rcoor" | "dim" | "setcolor" => {
                self.unsupported(span, format!("raw PostScript (`\\{base}') is not supported"));
            }
            "arrows" => {
                let v = c.scalars()[0].to_string();
                cs.set("arrows", &v, &mut self.rep(span));
            }
            "psclip" => self.diags.error(span, "Misplaced \\psclip command"),
            "multips" => self.diags.error(span, "Misplaced \\multips command"),
            b if SPECIAL.contains(&b) => self.diags.error(span, "Misplaced special graphics object command"),
            b if OBJECTS.contains(&b) => self.custom_object(c, b, cs, cu),
            _ => {
                let mut hb = Hbox::default();
                self.command(c, cs, &mut hb);
                cu.nodes.extend(hb.nodes);
            }
        }
    }

    /// A path object inside `\pscustom`: construct only, into the shared path.
    fn custom_object(&mut self, c: &Cmd, base: &str, cs: &State, cu: &mut Custom) {
        let mut s = cs.clone();
        {
            let mut rep = Reporter::new(&mut *self.diags, c.span);
            if let Some((_, p)) = self.aliases.get(&c.name) {
                s.apply_raw(p, &mut rep);
            }
            if let Some(p) = c.params() {
                s.apply_raw(p, &mut rep);
            }
            if let Some(a) = c.arrow_spec() {
                s.set("arrows", a, &mut rep);
            }
        }
        let liftpen = s.p.liftpen;
        let inv = cu.ctm.invert().unwrap_or(Affine::IDENTITY);
        let cur = cu.path.current_point();
        let pen = cur.map(|p| inv.apply(p.f()));
        let sh = match self.shape(c, base, &s, pen, liftpen == 0) {
            Ok(sh) => sh,
            Err(e) => {
                self.diags.warning(c.span, e);
                return;
            }
        };
        let mut path = sh.path.clone();
        if sh.open && s.p.arrows != (ArrowKind::None, ArrowKind::None) {
            let (trimmed, heads) = apply_arrows(&sh.path, s.p.arrows.0, s.p.arrows.1, &arrow_params(&s));
            path = trimmed;
            let line = Rgb::of(&s.p.linecolor);
            let fill = Rgb::of(&s.p.fillcolor);
            let paints: Vec<Paint> =
                heads.iter().flat_map(|g| arrow_paints(&g.transform(&cu.ctm), s.p.linewidth, line, fill)).collect();
            if !paints.is_empty() {
                let kind = if s.p.linestyle == LineStyle::None { LayerKind::Fill } else { LayerKind::Stroke };
                cu.nodes.push(Node::Decorated { layers: vec![Layer { kind, paints }], starred: false });
            }
        }
        let mut path = path.transform(&cu.ctm);
        if liftpen < 2 {
            if let (Some(cp), Some(Seg::Move(first))) = (cur, path.segs.first().copied()) {
                if first == cp {
                    path.segs.remove(0);
                } else {
                    path.segs[0] = Seg::Line(first);
                }
            }
        }
        cu.path.segs.extend(path.segs);
    }

    // ------------------------------------------------------------ boxes

    fn boxed(&mut self, c: &Cmd, base: &str, st: &State) -> Hbox {
        match base {
            "rput" => self.rput(c, st),
            "uput" => self.uput(c, st),
            "Rput" => self.big_rput(c, st),
            "multirput" => self.multirput(c, st),
            "psscalebox" => self.scalebox(c, st),
            "psscaleboxto" => self.scaleboxto(c, st),
            "rotateleft" | "rotateright" | "rotatedown" => self.quarter_turn(c, base, st),
            _ => self.pstbox(c, st),
        }
    }

    fn pstbox(&mut self, c: &Cmd, st: &State) -> Hbox {
        let ext = c.text(Role::Extent).unwrap_or("0,0,0").to_string();
        let mut rep = Reporter::new(&mut *self.diags, c.span);
        let v: Vec<Sp> = ext.split(',').map(|t| st.length_with(t, Sp::pt(1), &mut rep).max(Sp::ZERO)).collect();
        let (w, h, d) = (v[0], v[1], v[2]);
        let mut text = String::new();
        if let Some(b) = c.body() {
            for n in &b.items {
                match n {
                    AstNode::Text(t) => text.push_str(&t.text),
                    AstNode::Cmd(cmd) => {
                        text.push('\\');
                        text.push_str(&cmd.name);
                    }
                }
                text.push(' ');
            }
        }
        let node = LabelNode {
            text: label_text(&text),
            size: LABEL_SIZE,
            width: w,
            height: h,
            depth: d,
            color: Rgb::BLACK,
            transform: Affine::IDENTITY,
            placeholder: true,
        };
        Hbox { w, h, d, nodes: vec![Node::Label(node)] }
    }

    fn placement_rot(&mut self, c: &Cmd, st: &State) -> Rot {
        match c.text(Role::Rot) {
            Some(t) => {
                let t = t.to_string();
                parse_rot(&t, st, &mut self.rep(c.span))
            }
            None => st.p.rot,
        }
    }

    /// Body evaluated under an added rotation.
    fn rotated_body(&mut self, c: &Cmd, st: &State, net: f64) -> Hbox {
        let saved = self.acc_rot;
        self.acc_rot += net;
        let hb = self.hbox(c.body(), st);
        self.acc_rot = saved;
        hb
    }

    /// The opaque background of starred placements.
    fn starbox(&self, b: &Hbox, st: &State) -> Node {
        let m = st.p.framesep.to_pt();
        let (w, h, d) = (b.w.to_pt(), b.h.to_pt(), b.d.to_pt());
        let path = rect_path(-m, -d - m, w + m, h + m);
        Node::Decorated {
            layers: vec![Layer {
                kind: LayerKind::Fill,
                paints: vec![Paint::Fill { path, color: Rgb::of(&st.p.fillcolor), even_odd: false }],
            }],
            starred: true,
        }
    }

    fn with_star(&self, c: &Cmd, b: Hbox, st: &State) -> Hbox {
        if !c.starred {
            return b;
        }
        let mut nodes = vec![self.starbox(&b, st)];
        nodes.extend(b.nodes);
        Hbox { nodes, ..b }
    }

    fn position(&mut self, c: &Cmd, st: &State, i: usize) -> V2 {
        let mut rep = Reporter::new(&mut *self.diags, c.span);
        match c.coords().get(i) {
            Some(rc) => {
                let (x, y) = st.resolve_coord(rc, &mut rep);
                v2(x, y)
            }
            None => V2::default(),
        }
    }

    /// Reference point of a box per `ref`.
    fn ref_point(b: &Hbox, r: crate::state::Ref) -> V2 {
        let x = b.w.scale(r.x);
        let y = match r.y {
            Some(yr) => (b.h + b.d).scale(yr) - b.d,
            None => Sp::ZERO,
        };
        v2(x, y)
    }

    fn rput(&mut self, c: &Cmd, st: &State) -> Hbox {
        let r = match c.text(Role::Ref) {
            Some(t) => {
                let t = t.to_string();
                parse_ref(&t, &mut self.rep(c.span))
            }
            None => st.p.ref_,
        };
        let net = self.placement_rot(c, st).resolve(self.acc_rot);
        let pos = self.position(c, st, 0);
        let b = self.rotated_body(c, st, net);
        let b = self.with_star(c, b, st);
        let rp = Self::ref_point(&b, r);
        let m = Affine::translate(pos.x, pos.y).compose(Affine::rotate(net)).compose(Affine::translate(-rp.x, -rp.y));
        Hbox { nodes: transformed(b.nodes, m), ..Hbox::default() }
    }

    fn big_rput(&mut self, c: &Cmd, st: &State) -> Hbox {
        let ls = match c.text(Role::LabelSep) {
            Some(t) => {
                let t = t.to_string();
                st.length(&t, &mut self.rep(c.span))
            }
            None => st.p.labelsep,
        };
        let r = match c.text(Role::Ref) {
            Some(t) => {
                let t = t.to_string();
                parse_ref(&t, &mut self.rep(c.span))
            }
            None => st.p.ref_,
        };
        let net = self.placement_rot(c, st).resolve(self.acc_rot);
        let pos = self.position(c, st, 0);
        let b = self.rotated_body(c, st, net);
        let b = self.with_star(c, b, st);
        let grown = Hbox { w: b.w + ls.times(2), h: b.h + ls, d: b.d + ls, nodes: shifted(b.nodes, ls.to_pt(), 0.0) };
        let rp = Self::ref_point(&grown, r);
        let m = Affine::translate(pos.x, pos.y).compose(Affine::rotate(net)).compose(Affine::translate(-rp.x, -rp.y));
        Hbox { nodes: transformed(grown.nodes, m), ..Hbox::default() }
    }

    fn uput(&mut self, c: &Cmd, st: &State) -> Hbox {
        let ls = match c.text(Role::LabelSep) {
            Some(t) => {
                let t = t.to_string();
                st.length(&t, &mut self.rep(c.span))
            }
            None => st.p.labelsep,
        };
        let ra = match c.text(Role::RefAngle) {
            Some(t) => {
                let t = t.to_string();
                parse_refangle(&t, st, &mut self.rep(c.span))
            }
            None => st.p.refangle,
        };
        let rot = self.placement_rot(c, st);
        let net = rot.resolve(self.acc_rot);
        let pos = self.position(c, st, 0);
        let b = self.rotated_body(c, st, net);
        let b = self.with_star(c, b, st);
        let origin = match ra.code {
            Some(code) if !rot.active => uput_named(&b, ls, code),
            _ => uput_angle(&b, ls, ra.angle - net),
        };
        let m =
            Affine::translate(pos.x, pos.y).compose(Affine::rotate(net)).compose(Affine::translate(origin.x, origin.y));
        Hbox { nodes: transformed(b.nodes, m), ..Hbox::default() }
    }

    fn multirput(&mut self, c: &Cmd, st: &State) -> Hbox {
        let r = match c.text(Role::Ref) {
            Some(t) => {
                let t = t.to_string();
                parse_ref(&t, &mut self.rep(c.span))
            }
            None => st.p.ref_,
        };
        let net = self.placement_rot(c, st).resolve(self.acc_rot);
        let base = self.position(c, st, 0);
        let delta = self.position(c, st, 1);
        let n = self.count(c);
        let b = self.rotated_body(c, st, net);
        let b = self.with_star(c, b, st);
        let rp = Self::ref_point(&b, r);
        let mut nodes = Vec::new();
        for k in 0..n {
            let p = base.add(delta.mul(k as f64));
            let m = Affine::translate(p.x, p.y).compose(Affine::rotate(net)).compose(Affine::translate(-rp.x, -rp.y));
            nodes.extend(transformed(b.nodes.clone(), m));
        }
        Hbox { nodes, ..Hbox::default() }
    }

    fn count(&mut self, c: &Cmd) -> i64 {
        let t = c.scalars().first().copied().unwrap_or("1").trim().to_string();
        match t.parse::<i64>() {
            Ok(n) if n >= 0 => n,
            _ => {
                self.diags.warning(c.span, format!("Missing number, treated as zero: `{t}'"));
                0
            }
        }
    }

    fn multips(&mut self, c: &Cmd, st: &State) -> Vec<Node> {
        if self.in_clip_def {
            self.diags.error(c.span, "Misplaced \\multips command");
            return Vec::new();
        }
        let net = self.placement_rot(c, st).resolve(self.acc_rot);
        let base = self.position(c, st, 0);
        let delta = self.position(c, st, 1);
        let n = self.count(c);
        let saved = (self.acc_rot, self.in_multips);
        self.acc_rot += net;
        self.in_multips = true;
        let body = self.hbox(c.body(), st);
        (self.acc_rot, self.in_multips) = saved;
        let mut nodes = Vec::new();
        for k in 0..n {
            let p = base.add(delta.mul(k as f64));
            let m = Affine::translate(p.x, p.y).compose(Affine::rotate(net));
            nodes.extend(transformed(body.nodes.clone(), m));
        }
        nodes
    }

    fn scale_factors(&mut self, c: &Cmd) -> (crate::fixnum::Num, crate::fixnum::Num) {
        let t = c.scalars().first().copied().unwrap_or("1").to_string();
        let mut it = t.split_whitespace();
        let read = |s: Option<&str>, ev: &mut Self| match s.map(parse_number) {
            Some(Ok(n)) => Some(n),
            Some(Err(e)) => {
                ev.diags.warning(c.span, e.to_string());
                None
            }
            None => None,
        };
        let sx = read(it.next(), self).unwrap_or_else(|| parse_number("1").unwrap());
        let sy = read(it.next(), self).unwrap_or(sx.clone());
        (sx, sy)
    }

    fn scaled(b: Hbox, sx: f64, sy: f64, times: impl Fn(bool, Sp) -> Sp) -> Hbox {
        let (h, d) =
            if sy < 0.0 { (-times(false, b.d), -times(false, b.h)) } else { (times(false, b.h), times(false, b.d)) };
        let dima = times(true, b.w);
        let m = Affine::translate((-dima).max(Sp::ZERO).to_pt(), 0.0).compose(Affine::scale(sx, sy));
        Hbox { w: dima.abs(), h, d, nodes: transformed(b.nodes, m) }
    }

    fn scalebox(&mut self, c: &Cmd, st: &State) -> Hbox {
        let (sx, sy) = self.scale_factors(c);
        let b = self.hbox(c.body(), st);
        let (fx, fy) = (sx.to_f64(), sy.to_f64());
        Self::scaled(b, fx, fy, |x, v| {
            let n = if x { &sx } else { &sy };
            n.times_dimen(v).unwrap_or(v)
        })
    }

    fn scaleboxto(&mut self, c: &Cmd, st: &State) -> Hbox {
        let target = {
            let mut rep = Reporter::new(&mut *self.diags, c.span);
            c.coords().first().map(|rc| st.resolve_coord(rc, &mut rep)).unwrap_or((Sp::ZERO, Sp::ZERO))
        };
        let b = self.hbox(c.body(), st);
        let one = Sp(65536);
        let div = |a: Sp, b: Sp| sp_div(a, b).unwrap_or(one);
        let (mut fx, mut fy) = (div(target.0, b.w), div(target.1, b.h + b.d));
        match (target.0 == Sp::ZERO, target.1 == Sp::ZERO) {
            (true, true) => {
                self.diags.error(c.span, "\\psscaleboxto dimensions cannot both be zero");
                fx = one;
                fy = one;
            }
            (true, false) => fx = fy,
            (false, true) => fy = fx,
            _ => {}
        }
        let mul = |f: Sp, v: Sp| Sp::saturate((f.raw() * v.raw()) / 65536);
        Self::scaled(b, fx.to_pt(), fy.to_pt(), |x, v| mul(if x { fx } else { fy }, v))
    }

    fn quarter_turn(&mut self, c: &Cmd, base: &str, st: &State) -> Hbox {
        let b = self.hbox(c.body(), st);
        let (w, h, d) = (b.w.to_pt(), b.h.to_pt(), b.d.to_pt());
        let (m, out) = match base {
            "rotateleft" => (Affine { a: 0.0, b: 1.0, c: -1.0, d: 0.0, e: h, f: 0.0 }, (b.h + b.d, b.w)),
            "rotateright" => (Affine { a: 0.0, b: -1.0, c: 1.0, d: 0.0, e: d, f: w }, (b.h + b.d, b.w)),
            _ => (Affine { a: -1.0, b: 0.0, c: 0.0, d: -1.0, e: w, f: h }, (b.w, b.h + b.d)),
        };
        Hbox { w: out.0, h: out.1, d: Sp::ZERO, nodes: transformed(b.nodes, m) }
    }

    /// `\psframebox` and friends.
    fn frame_box(&mut self, c: &Cmd, base: &str, st: &State) -> Hbox {
        let content = self.hbox(c.body(), st);
        let mut s = st.clone();
        {
            let mut rep = Reporter::new(&mut *self.diags, c.span);
            if let Some((_, p)) = self.aliases.get(&c.name) {
                s.apply_raw(p, &mut rep);
            }
            if let Some(p) = c.params() {
                s.apply_raw(p, &mut rep);
            }
        }
        match base {
            "psdblframebox" => s.p.doubleline = true,
            "psshadowbox" => {
                s.p.shadow = true;
                s.p.boxsep = true;
                s.p.shadowangle = -45.0;
            }
            _ => {}
        }
        if c.starred {
            s.p.linecolor = s.p.fillcolor.clone();
            solid_star(&mut s);
        }
        let ds = s.doublesep();
        if s.p.doubleline {
            s.p.linewidth = s.p.linewidth.times(2) + ds;
        }
        s.p.showpoints = false;
        let (w, h, d) = (content.w, content.h, content.d);
        let lw = s.p.linewidth;
        let fs = s.p.framesep;
        let lwf = lw.to_pt();
        let linearc = s.p.linearc.to_pt();
        // (outline, linetype, content x offset, width, height, depth)
        let built: Result<(Path, i64, Sp, Sp, Sp, Sp), String> = (|| match base {
            "pscirclebox" => {
                let dimb = half(h + d);
                let dima = kmul(".5", w);
                let dimc = sp_pyth(dima, dimb) + lw + fs;
                let dimb = dimb - dimc;
                let (cx, cy) = (w.to_pt() / 2.0, (h + d).to_pt() / 2.0 - d.to_pt());
                let r = (w.to_pt() / 2.0).hypot((h + d).to_pt() / 2.0) + fs.to_pt() + lwf / 2.0;
                Ok((ellipse(V2::new(cx, cy), r, r), 4, half(dimc.times(2) - w), dimc.times(2), h - dimb, d - dimb))
            }
            "psCirclebox" => {
                let r = s.p.radius;
                let cy = half(h - d);
                let rr = r.to_pt() - s.p.dimen.k() * lwf;
                if rr <= 0.0 {
                    return Err("circle radius must be positive".to_string());
                }
                let p = ellipse(V2::new(w.to_pt() / 2.0, cy.to_pt()), rr, rr);
                Ok((p, 4, r - half(w), r.times(2), (cy + r).max(h), (r - cy).max(d)))
            }
            "psovalbox" => {
                let mut dimc = lw + fs;
                let mut dimd = h + d;
                let dima = kmul(".5", w);
                let dimb = kmul(".5", dimd) - d;
                dimd = kmul(".707", dimd) + dimc;
                dimc = dimc + kmul(".707", w);
                let (rx, ry) = (dimc.to_pt() - lwf / 2.0, dimd.to_pt() - lwf / 2.0);
                if rx <= 0.0 || ry <= 0.0 {
                    return Err("oval radii must be positive".to_string());
                }
                let p = ellipse(v2(dima, dimb), rx, ry);
                Ok((p, 2, dimc - dima, dimc.times(2), dimd + dimb, dimd - dimb))
            }
            "psdiabox" => {
                let dimg = kmul(".707", lw) + kmul(".707", fs);
                let dima = half(w);
                let dimc = dima + dimg;
                let dimd0 = half(h + d);
                let dimb = dimd0 - d;
                let dimd = dimd0 + dimg;
                let p = diamond(v2(dima, dimb), dimc.times(2).to_pt(), dimd.times(2).to_pt(), 0.0, linearc, 0.5, lwf)?;
                Ok((p, 4, dimc.times(2) - dima, dimc.times(4), dimd.times(2) + dimb, dimd.times(2) - dimb))
            }
            "pstribox" => {
                let mode = s.p.trimode;
                let odd = mode % 2 == 1;
                let dimh = lw + fs;
                let dimg = half(h - d);
                let (mut dima, mut dimb) = if odd { (Sp::ZERO, dimg) } else { (half(w), Sp::ZERO) };
                match mode {
                    0 => dimb = -d - dimh,
                    1 => dima = -dimh,
                    2 => dimb = h + dimh,
                    _ => dima = w + dimh,
                }
                let mut dimd = d + h;
                let dimc;
                if !s.p.trimode_star {
                    let (kc, kd) = if odd { ("1.447", "1.789") } else { ("1.789", "1.447") };
                    dimc = (w + kmul(kc, dimh)).times(2);
                    dimd = (dimd + kmul(kd, dimh)).times(2);
                } else if odd {
                    dimd = dimd + kmul("1.1547", w) + kmul("3.4641", dimh);
                    dimc = kmul(".866", dimd);
                } else {
                    dimd = dimd + kmul(".866", w) + kmul("3", dimh);
                    dimc = kmul("1.1547", dimd);
                }
                let (tw, th) = if odd { (dimd, dimc) } else { (dimc, dimd) };
                let p = triangle(v2(dima, dimb), tw.to_pt(), th.to_pt(), -90.0 * mode as f64, linearc, 0.5, lwf)?;
                let (off, ht, dp) = match mode {
                    0 => (half(dimc - w), dimd + dimb, -dimb),
                    2 => (half(dimc - w), dimb, dimd - dimb),
                    1 => {
                        let top = dimb + half(dimd);
                        (-dima, top, dimd - top)
                    }
                    _ => {
                        let top = dimb + half(dimd);
                        (dimc - w - fs - lw, top, dimd - top)
                    }
                };
                Ok((p, 2, off, dimc, ht, dp))
            }
            _ => {
                let m = lw + fs;
                let corner = if s.p.cornersize_absolute { (linearc, false) } else { (s.p.framearc, true) };
                let corner = if corner.0 <= 0.0 { (0.0, false) } else { corner };
                let p = frame(v2(-m, -d - m), v2(w + m, h + m), corner, 0.5, lwf)?;
                let (mut bw, mut bd) = (w + m.times(2), d + m);
                if base == "psshadowbox" {
                    let g = kmul(".7071", s.p.shadowsize);
                    bw = bw + g;
                    bd = bd + g;
                }
                Ok((p, 2, m, bw, h + m, bd))
            }
        })();
        let (outline, linetype, off, bw, bh, bd) = match built {
            Ok(v) => v,
            Err(e) => {
                self.diags.warning(c.span, e);
                return content;
            }
        };
        let o = Obj { repeat: false, ds, starred: c.starred, s };
        let sh = Shape::new(outline, false, linetype, Vec::new(), false);
        let node = self.decorate(&sh, &o);
        let mut nodes = vec![node];
        nodes.extend(content.nodes);
        if o.s.p.boxsep {
            Hbox { w: bw, h: bh, d: bd, nodes: shifted(nodes, off.to_pt(), 0.0) }
        } else {
            Hbox { w, h, d, nodes }
        }
    }

    // ------------------------------------------------------------ clip, picture

    fn clip(&mut self, c: &Cmd, st: &State) -> Vec<Node> {
        let children_ast = c.body_of(Role::Clipped);
        if self.in_multips || self.in_clip_def {
            self.diags.error(c.span, "Misplaced \\psclip command");
            let b = self.hbox(children_ast, st);
            return b.nodes;
        }
        let mut out = Vec::new();
        let mut clip = Path::new();
        let mut s = st.clone();
        self.in_clip_def = true;
        if let Some(defs) = c.body() {
            for item in &defs.items {
                let AstNode::Cmd(d) = item else { continue };
                let base = self.base(&d.name);
                if OBJECTS.contains(&base.as_str()) {
                    let (nodes, path) = self.object(d, &base, &s);
                    out.extend(nodes);
                    if let Some(p) = path {
                        clip.append(&p);
                    }
                } else {
                    let mut hb = Hbox::default();
                    self.command(d, &mut s, &mut hb);
                    out.extend(hb.nodes);
                }
            }
        }
        self.in_clip_def = false;
        let children = self.hbox(children_ast, st).nodes;
        out.push(Node::ClipGroup { clip, children });
        out
    }

    fn picture(&mut self, c: &Cmd, st: &State) -> (BBox, Sp, Vec<Node>) {
        let mut s = st.clone();
        let mut fraction = None;
        if let Some(p) = c.params() {
            match parse_number(p.trim()) {
                Ok(n) => fraction = Some(n.to_f64()),
                Err(_) => {
                    let p = p.to_string();
                    s.apply_raw(&p, &mut self.rep(c.span));
                }
            }
        }
        let (a, b) = {
            let mut rep = Reporter::new(&mut *self.diags, c.span);
            let cs = c.coords();
            let a = s.resolve_coord(cs[0], &mut rep);
            let b = s.resolve_coord(cs[1], &mut rep);
            (a, b)
        };
        let bbox = BBox { x0: a.0.min(b.0), y0: a.1.min(b.1), x1: a.0.max(b.0), y1: a.1.max(b.1) };
        let baseline = match fraction {
            Some(f) => bbox.y0 + (bbox.y1 - bbox.y0).scale(f),
            None => bbox.y0 - s.p.shift,
        };
        let saved = self.picture;
        self.picture = Some((Pt::new(bbox.x0, bbox.y0), Pt::new(bbox.x1, bbox.y1)));
        let mut nodes = Vec::new();
        if s.p.showgrid {
            let (lo, hi) = (Pt::new(bbox.x0, bbox.y0), Pt::new(bbox.x1, bbox.y1));
            nodes.extend(self.grid_nodes(&s, lo, lo, hi));
        }
        nodes.extend(self.hbox(c.body(), &s).nodes);
        self.picture = saved;
        if c.starred {
            let clip = rect_path(bbox.x0.to_pt(), bbox.y0.to_pt(), bbox.x1.to_pt(), bbox.y1.to_pt());
            nodes = vec![Node::ClipGroup { clip, children: nodes }];
        }
        (bbox, baseline, nodes)
    }
}

fn shadow_paint(p: &Paint, m: &Affine, color: Rgb) -> Option<Paint> {
    Some(match p {
        Paint::Fill { path, even_odd, .. } => Paint::Fill { path: path.transform(m), color, even_odd: *even_odd },
        Paint::Stroke { path, style } => {
            Paint::Stroke { path: path.transform(m), style: StrokeStyle { color, ..style.clone() } }
        }
        Paint::Hatch { .. } => return None,
    })
}

/// Box origin for a named `\uput` direction.
fn uput_named(b: &Hbox, ls: Sp, code: (u8, u8)) -> V2 {
    let ls = if code.0 > 0 && code.1 > 0 { kmul(".707", ls) } else { ls };
    let x = match code.0 {
        2 => ls,
        1 => -ls - b.w,
        _ => -half(b.w),
    };
    let y = match code.1 {
        1 => -ls - b.h,
        2 => ls + b.d,
        _ => half(b.h + b.d) - b.h,
    };
    v2(x, y)
}

/// Box origin for a numeric `\uput` angle: the center sits at
/// `labelsep + support(angle)` along the direction.
fn uput_angle(b: &Hbox, ls: Sp, angle: f64) -> V2 {
    let (s, c) = exact_sin_cos(angle);
    let (hw, hh) = (b.w.to_pt() / 2.0, (b.h + b.d).to_pt() / 2.0);
    let dist = ls.to_pt() + hw * c.abs() + hh * s.abs();
    let center = V2::new(dist * c, dist * s);
    center.sub(V2::new(hw, (b.h - b.d).to_pt() / 2.0))
}

// ---------------------------------------------------------------- bounds

fn paint_bounds(p: &Paint) -> Option<BBox> {
    match p {
        Paint::Fill { path, .. } => path.bbox(),
        Paint::Stroke { path, style } => path.bbox().map(|b| b.grow(half(style.width))),
        Paint::Hatch { region, .. } => region.bbox(),
    }
}

fn union(a: Option<BBox>, b: Option<BBox>) -> Option<BBox> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.union(b)),
        (a, None) => a,
        (None, b) => b,
    }
}

fn transform_bbox(b: BBox, m: &Affine) -> BBox {
    let corners = [v2(b.x0, b.y0), v2(b.x1, b.y0), v2(b.x1, b.y1), v2(b.x0, b.y1)];
    let mut out = BBox::of_point(Pt::from_f(m.apply(corners[0])));
    for c in &corners[1..] {
        out.include(Pt::from_f(m.apply(*c)));
    }
    out
}

pub fn node_bounds(n: &Node) -> Option<BBox> {
    match n {
        Node::Decorated { layers, .. } => {
            layers.iter().flat_map(|l| l.paints.iter()).fold(None, |acc, p| union(acc, paint_bounds(p)))
        }
        Node::DotBatch { centers, dot, width, .. } => {
            let g = union(union(dot.fill.bbox(), dot.inner.bbox()), dot.stroke.bbox().map(|b| b.grow(half(*width))))?;
            centers.iter().fold(None, |acc, c| union(acc, Some(transform_bbox(g, &Affine::translate(c.x, c.y)))))
        }
        Node::Label(l) => {
            let b = BBox { x0: Sp::ZERO, y0: -l.depth, x1: l.width, y1: l.height };
            Some(transform_bbox(b, &l.transform))
        }
        Node::ClipGroup { clip, children } => {
            let inner = bounds_of(children)?;
            Some(match clip.bbox() {
                Some(c) => BBox {
                    x0: inner.x0.max(c.x0),
                    y0: inner.y0.max(c.y0),
                    x1: inner.x1.min(c.x1),
                    y1: inner.y1.min(c.y1),
                },
                None => inner,
            })
        }
        Node::Group { transform, children } => bounds_of(children).map(|b| transform_bbox(b, transform)),
    }
}

pub fn bounds_of(nodes: &[Node]) -> Option<BBox> {
    nodes.iter().fold(None, |acc, n| union(acc, node_bounds(n)))
}

// ---------------------------------------------------------------- dump

fn fmt_f(v: f64) -> String {
    let s = format!("{:.4}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

pub fn path_text(p: &Path) -> String {
    let mut out = String::new();
    for s in &p.segs {
        if !out.is_empty() {
            out.push(' ');
        }
        match s {
            Seg::Move(a) => write!(out, "M {} {}", a.x, a.y),
            Seg::Line(a) => write!(out, "L {} {}", a.x, a.y),
            Seg::Cubic(a, b, c) => write!(out, "C {} {} {} {} {} {}", a.x, a.y, b.x, b.y, c.x, c.y),
            Seg::Close => write!(out, "Z"),
        }
        .unwrap();
    }
    out
}

fn affine_text(m: &Affine) -> String {
    [m.a, m.b, m.c, m.d, m.e, m.f].iter().map(|v| fmt_f(*v)).collect::<Vec<_>>().join(" ")
}

/// Indented text form of a scene, for `--dump-scene`.
pub fn dump(scene: &Scene) -> String {
    let mut out = String::new();
    let b = &scene.bbox;
    writeln!(out, "scene bbox {} {} {} {} baseline {}", b.x0, b.y0, b.x1, b.y1, scene.baseline).unwrap();
    fn style_text(s: &StrokeStyle) -> String {
        let mut t = format!("w={} color={} cap={}", s.width, s.color.hex(), s.cap);
        if let Some(d) = &s.dash {
            let e: Vec<String> = d.entries_pt().iter().map(|v| fmt_f(*v)).collect();
            write!(t, " dash=[{}] phase={}", e.join(" "), fmt_f(d.phase_pt())).unwrap();
        }
        t
    }
    fn go(out: &mut String, nodes: &[Node], depth: usize) {
        let pad = "  ".repeat(depth);
        for n in nodes {
            match n {
                Node::Decorated { layers, starred } => {
                    writeln!(out, "{pad}decorated{}", if *starred { " starred" } else { "" }).unwrap();
                    for l in layers {
                        writeln!(out, "{pad}  layer {}", l.kind.name()).unwrap();
                        for p in &l.paints {
                            match p {
                                Paint::Fill { path, color, even_odd } => writeln!(
                                    out,
                                    "{pad}    fill {}{} {}",
                                    color.hex(),
                                    if *even_odd { " eo" } else { "" },
                                    path_text(path)
                                ),
                                Paint::Stroke { path, style } => {
                                    writeln!(out, "{pad}    stroke {} {}", style_text(style), path_text(path))
                                }
                                Paint::Hatch { lines, color, .. } => {
                                    writeln!(out, "{pad}    hatch {} lines={}", color.hex(), lines.len())
                                }
                            }
                            .unwrap();
                        }
                    }
                }
                Node::DotBatch { centers, color, .. } => {
                    let cs: Vec<String> = centers.iter().map(|c| format!("({} {})", fmt_f(c.x), fmt_f(c.y))).collect();
                    writeln!(out, "{pad}dots {} {}", color.hex(), cs.join(" ")).unwrap();
                }
                Node::Label(l) => writeln!(
                    out,
                    "{pad}label {:?} w={} h={} d={} at [{}]{}",
                    l.text,
                    l.width,
                    l.height,
                    l.depth,
                    affine_text(&l.transform),
                    if l.placeholder { " placeholder" } else { "" }
                )
                .unwrap(),
                Node::ClipGroup { clip, children } => {
                    writeln!(out, "{pad}clip {}", path_text(clip)).unwrap();
                    go(out, children, depth + 1);
                }
                Node::Group { transform, children } => {
                    writeln!(out, "{pad}group [{}]", affine_text(transform)).unwrap();
                    go(out, children, depth + 1);
                }
            }
        }
    }
    go(&mut out, &scene.nodes, 0);
    out
}
