//! SVG and EPS back-ends.

use crate::fixnum::{format_sp, Sp};
use crate::geom::{Affine, DashPattern, Path, Pt, Seg};
use crate::scene::{dot_paints, Layer, Node, Paint, Rgb, Scene, StrokeStyle};
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Format {
    #[default]
    Svg,
    Eps,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Svg => "svg",
            Format::Eps => "eps",
        }
    }

    pub fn from_name(s: &str) -> Option<Format> {
        match s {
            "svg" => Some(Format::Svg),
            "eps" => Some(Format::Eps),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    pub format: Format,
    /// Decimal places for SVG coordinates.
    pub precision: u32,
    pub background: Option<Rgb>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { format: Format::Svg, precision: 3, background: None }
    }
}

pub fn emit(scene: &Scene, opts: &RenderOptions) -> String {
    match opts.format {
        Format::Svg => emit_svg(scene, opts),
        Format::Eps => emit_eps(scene, opts),
    }
}

// ---------------------------------------------------------------- numbers

fn trim(mut s: String) -> String {
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

/// `n / 10^prec` as decimal text.
fn fixed(n: i128, prec: u32) -> String {
    if prec == 0 {
        return n.to_string();
    }
    let p = 10i128.pow(prec);
    let sign = if n < 0 { "-" } else { "" };
    let a = n.abs();
    trim(format!("{sign}{}.{:0width$}", a / p, a % p, width = prec as usize))
}

fn div_round_even(n: i128, d: i128) -> i128 {
    let (q, r) = (n.div_euclid(d), n.rem_euclid(d));
    match (2 * r).cmp(&d) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal => q + (q & 1),
    }
}

/// Scaled points to big points, rounded half-even at `prec` places.
pub fn sp_to_bp(v: Sp, prec: u32) -> String {
    let n = v.raw() as i128 * 7200 * 10i128.pow(prec);
    fixed(div_round_even(n, 65536 * 7227), prec)
}

/// Points (float) to big points.
pub fn pt_to_bp(v: f64, prec: u32) -> String {
    num(v * 72.0 / 72.27, prec)
}

/// A plain number rounded half-even at `prec` places.
pub fn num(v: f64, prec: u32) -> String {
    let scaled = (v * 10f64.powi(prec as i32)).round_ties_even();
    if !scaled.is_finite() {
        return "0".into();
    }
    fixed(scaled as i128, prec)
}

fn bp_floor(v: Sp) -> i64 {
    (v.raw() as i128 * 7200).div_euclid(65536 * 7227) as i64
}

fn bp_ceil(v: Sp) -> i64 {
    -bp_floor(-v)
}

// ---------------------------------------------------------------- SVG

struct Svg {
    out: String,
    prec: u32,
    clip_id: usize,
    depth: usize,
}

fn xml_escape(s: &str) -> String {
    let mut o = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => o.push_str("&amp;"),
            '<' => o.push_str("&lt;"),
            '>' => o.push_str("&gt;"),
            '"' => o.push_str("&quot;"),
            c => o.push(c),
        }
    }
    o
}

fn cap_name(cap: u8) -> &'static str {
    match cap {
        1 => "round",
        2 => "square",
        _ => "butt",
    }
}

impl Svg {
    fn line(&mut self, s: &str) {
        for _ in 0..self.depth {
            self.out.push_str("  ");
        }
        self.out.push_str(s);
        self.out.push('\n');
    }

    fn pt(&self, p: Pt) -> String {
        format!("{} {}", sp_to_bp(p.x, self.prec), sp_to_bp(p.y, self.prec))
    }

    fn d(&self, path: &Path) -> String {
        let mut o = String::new();
        for s in &path.segs {
            if !o.is_empty() {
                o.push(' ');
            }
            match s {
                Seg::Move(a) => write!(o, "M{}", self.pt(*a)),
                Seg::Line(a) => write!(o, "L{}", self.pt(*a)),
                Seg::Cubic(a, b, c) => {
                    write!(o, "C{} {} {}", self.pt(*a), self.pt(*b), self.pt(*c))
                }
                Seg::Close => write!(o, "Z"),
            }
            .unwrap();
        }
        o
    }

    fn matrix(&self, m: &Affine) -> String {
        format!(
            "matrix({} {} {} {} {} {})",
            num(m.a, 6),
            num(m.b, 6),
            num(m.c, 6),
            num(m.d, 6),
            pt_to_bp(m.e, self.prec),
            pt_to_bp(m.f, self.prec)
        )
    }

    fn dash_attrs(&self, d: &Option<DashPattern>) -> String {
        match d {
            Some(d) if d.period() > 0 => {
                let e: Vec<String> = d.entries_pt().iter().map(|v| pt_to_bp(*v, self.prec)).collect();
                let mut s = format!(" stroke-dasharray=\"{}\"", e.join(" "));
                if d.phase != 0 {
                    write!(s, " stroke-dashoffset=\"{}\"", pt_to_bp(d.phase_pt(), self.prec)).unwrap();
                }
                s
            }
            _ => String::new(),
        }
    }

    fn stroke(&mut self, path: &Path, st: &StrokeStyle) {
        if path.is_empty() {
            return;
        }
        let s = format!(
            "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\" stroke-linecap=\"{}\"{}/>",
            self.d(path),
            st.color.hex(),
            sp_to_bp(st.width, self.prec),
            cap_name(st.cap),
            self.dash_attrs(&st.dash)
        );
        self.line(&s);
    }

    fn fill(&mut self, path: &Path, color: Rgb, even_odd: bool) {
        if path.is_empty() {
            return;
        }
        let rule = if even_odd { " fill-rule=\"evenodd\"" } else { "" };
        let s = format!("<path d=\"{}\" fill=\"{}\"{} stroke=\"none\"/>", self.d(path), color.hex(), rule);
        self.line(&s);
    }

    fn open_clip(&mut self, clip: &Path) {
        self.clip_id += 1;
        let id = self.clip_id;
        let d = self.d(clip);
        self.line(&format!("<clipPath id=\"clip{id}\"><path d=\"{d}\"/></clipPath>"));
        self.line(&format!("<g clip-path=\"url(#clip{id})\">"));
        self.depth += 1;
    }

    fn close(&mut self) {
        self.depth -= 1;
        self.line("</g>");
    }

    fn paint(&mut self, p: &Paint) {
        match p {
            Paint::Fill { path, color, even_odd } => self.fill(path, *color, *even_odd),
            Paint::Stroke { path, style } => self.stroke(path, style),
            Paint::Hatch { region, lines, color } => {
                if lines.is_empty() {
                    return;
                }
                self.open_clip(region);
                for l in lines {
                    let s = format!(
                        "<path d=\"M{} {} L{} {}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"/>",
                        pt_to_bp(l.a.x, self.prec),
                        pt_to_bp(l.a.y, self.prec),
                        pt_to_bp(l.b.x, self.prec),
                        pt_to_bp(l.b.y, self.prec),
                        color.hex(),
                        pt_to_bp(l.width, self.prec)
                    );
                    self.line(&s);
                }
                self.close();
            }
        }
    }

    fn layers(&mut self, layers: &[Layer], starred: bool) {
        self.line(if starred { "<g class=\"object starred\">" } else { "<g class=\"object\">" });
        self.depth += 1;
        for l in layers {
            self.line(&format!("<g class=\"{}\">", l.kind.name()));
            self.depth += 1;
            for p in &l.paints {
                self.paint(p);
            }
            self.close();
        }
        self.close();
    }

    fn nodes(&mut self, nodes: &[Node]) {
        for n in nodes {
            match n {
                Node::Decorated { layers, starred } => self.layers(layers, *starred),
                Node::DotBatch { centers, dot, color, fill, width } => {
                    self.line("<g class=\"dots\">");
                    self.depth += 1;
                    for c in centers {
                        let g = dot.transform(&Affine::translate(c.x, c.y));
                        for p in dot_paints(&g, *width, *color, *fill) {
                            self.paint(&p);
                        }
                    }
                    self.close();
                }
                Node::Label(l) => {
                    let s = format!(
                        "<text transform=\"{} scale(1 -1)\" font-size=\"{}\" fill=\"{}\" data-w=\"{}\" data-h=\"{}\" data-d=\"{}\">{}</text>",
                        self.matrix(&l.transform),
                        sp_to_bp(l.size, self.prec),
                        l.color.hex(),
                        sp_to_bp(l.width, self.prec),
                        sp_to_bp(l.height, self.prec),
                        sp_to_bp(l.depth, self.prec),
                        xml_escape(&l.text)
                    );
                    self.line(&s);
                }
                Node::ClipGroup { clip, children } => {
                    self.open_clip(clip);
                    self.nodes(children);
                    self.close();
                }
                Node::Group { transform, children } => {
                    let m = self.matrix(transform);
                    self.line(&format!("<g transform=\"{m}\">"));
                    self.depth += 1;
                    self.nodes(children);
                    self.close();
                }
            }
        }
    }
}

pub fn emit_svg(scene: &Scene, opts: &RenderOptions) -> String {
    let prec = opts.precision;
    let b = &scene.bbox;
    let w = sp_to_bp(b.x1 - b.x0, prec);
    let h = sp_to_bp(b.y1 - b.y0, prec);
    let mut svg = Svg { out: String::new(), prec, clip_id: 0, depth: 0 };
    svg.line("<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    svg.line(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    ));
    svg.depth += 1;
    if let Some(bg) = opts.background {
        svg.line(&format!("<rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"{}\"/>", bg.hex()));
    }
    svg.line(&format!(
        "<g transform=\"matrix(1 0 0 -1 {} {})\" stroke-linejoin=\"miter\" stroke-miterlimit=\"10\">",
        sp_to_bp(-b.x0, prec),
        sp_to_bp(b.y1, prec)
    ));
    svg.depth += 1;
    svg.nodes(&scene.nodes);
    svg.close();
    svg.depth -= 1;
    svg.line("</svg>");
    svg.out
}

// ---------------------------------------------------------------- EPS

const PROLOG: &str = "\
/picoforge 8 dict def
picoforge begin
/setlabelfont { /Helvetica findfont exch scalefont setfont } bind def
end
";

struct Eps {
    out: String,
}

fn ps_string(s: &str) -> String {
    let mut o = String::from("(");
    for c in s.chars() {
        match c {
            '(' | ')' | '\\' => {
                o.push('\\');
                o.push(c);
            }
            c if c.is_ascii() && !c.is_ascii_control() => o.push(c),
            _ => o.push('?'),
        }
    }
    o.push(')');
    o
}

fn ps_num(v: f64) -> String {
    num(v, 5)
}

fn ps_pt(v: f64) -> String {
    format_sp(Sp::from_pt_f64(v))
}

fn color_ops(c: Rgb) -> String {
    format!("{} {} {} setrgbcolor", ps_num(c.r), ps_num(c.g), ps_num(c.b))
}

impl Eps {
    fn line(&mut self, s: &str) {
        self.out.push_str(s);
        self.out.push('\n');
    }

    fn path(&mut self, path: &Path) {
        self.line("newpath");
        for s in &path.segs {
            let l = match s {
                Seg::Move(a) => format!("{} {} moveto", format_sp(a.x), format_sp(a.y)),
                Seg::Line(a) => format!("{} {} lineto", format_sp(a.x), format_sp(a.y)),
                Seg::Cubic(a, b, c) => format!(
                    "{} {} {} {} {} {} curveto",
                    format_sp(a.x),
                    format_sp(a.y),
                    format_sp(b.x),
                    format_sp(b.y),
                    format_sp(c.x),
                    format_sp(c.y)
                ),
                Seg::Close => "closepath".into(),
            };
            self.line(&l);
        }
    }

    fn concat(&mut self, m: &Affine) {
        self.line(&format!(
            "[{} {} {} {} {} {}] concat",
            ps_num(m.a),
            ps_num(m.b),
            ps_num(m.c),
            ps_num(m.d),
            ps_pt(m.e),
            ps_pt(m.f)
        ));
    }

    fn paint(&mut self, p: &Paint) {
        match p {
            Paint::Fill { path, color, even_odd } => {
                if path.is_empty() {
                    return;
                }
                self.line("gsave");
                self.path(path);
                self.line(&color_ops(*color));
                self.line(if *even_odd { "eofill" } else { "fill" });
                self.line("grestore");
            }
            Paint::Stroke { path, style } => {
                if path.is_empty() {
                    return;
                }
                self.line("gsave");
                self.path(path);
                self.line(&color_ops(style.color));
                self.line(&format!("{} setlinewidth {} setlinecap", format_sp(style.width), style.cap));
                if let Some(d) = style.dash.as_ref().filter(|d| d.period() > 0) {
                    let e: Vec<String> = d.entries_pt().iter().map(|v| ps_pt(*v)).collect();
                    self.line(&format!("[{}] {} setdash", e.join(" "), ps_pt(d.phase_pt())));
                }
                self.line("stroke");
                self.line("grestore");
            }
            Paint::Hatch { region, lines, color } => {
                if lines.is_empty() {
                    return;
                }
                self.line("gsave");
                self.path(region);
                self.line("clip");
                self.line(&color_ops(*color));
                for l in lines {
                    self.line(&format!(
                        "newpath {} {} moveto {} {} lineto {} setlinewidth stroke",
                        ps_pt(l.a.x),
                        ps_pt(l.a.y),
                        ps_pt(l.b.x),
                        ps_pt(l.b.y),
                        ps_pt(l.width)
                    ));
                }
                self.line("grestore");
            }
        }
    }

    fn nodes(&mut self, nodes: &[Node]) {
        for n in nodes {
            match n {
                Node::Decorated { layers, .. } => {
                    for l in layers {
                        self.line(&format!("% {}", l.kind.name()));
                        for p in &l.paints {
                            self.paint(p);
                        }
                    }
                }
                Node::DotBatch { centers, dot, color, fill, width } => {
                    self.line("% dots");
                    for c in centers {
                        let g = dot.transform(&Affine::translate(c.x, c.y));
                        for p in dot_paints(&g, *width, *color, *fill) {
                            self.paint(&p);
                        }
                    }
                }
                Node::Label(l) => {
                    self.line("gsave");
                    self.concat(&l.transform);
                    self.line(&color_ops(l.color));
                    self.line(&format!("{} picoforge /setlabelfont get exec", format_sp(l.size)));
                    self.line(&format!("0 0 moveto {} show", ps_string(&l.text)));
                    self.line("grestore");
                }
                Node::ClipGroup { clip, children } => {
                    self.line("gsave");
                    self.path(clip);
                    self.line("clip");
                    self.nodes(children);
                    self.line("grestore");
                }
                Node::Group { transform, children } => {
                    self.line("gsave");
                    self.concat(transform);
                    self.nodes(children);
                    self.line("grestore");
                }
            }
        }
    }
}

pub fn emit_eps(scene: &Scene, opts: &RenderOptions) -> String {
    let b = &scene.bbox;
    let (w, h) = (b.x1 - b.x0, b.y1 - b.y0);
    let mut e = Eps { out: String::new() };
    e.line("%!PS-Adobe-3.0 EPSF-3.0");
    e.line(&format!("%%BoundingBox: 0 0 {} {}", bp_ceil(w), bp_ceil(h)));
    e.line(&format!("%%HiResBoundingBox: 0 0 {} {}", sp_to_bp(w, 5), sp_to_bp(h, 5)));
    e.line("%%Creator: picoforge");
    e.line("%%LanguageLevel: 2");
    e.line("%%Pages: 1");
    e.line("%%EndComments");
    e.line("%%BeginProlog");
    e.out.push_str(PROLOG);
    e.line("%%EndProlog");
    e.line("%%Page: 1 1");
    e.line("save");
    if let Some(bg) = opts.background {
        e.line(&format!(
            "gsave {} newpath 0 0 moveto {} 0 lineto {} {} lineto 0 {} lineto closepath fill grestore",
            color_ops(bg),
            bp_ceil(w),
            bp_ceil(w),
            bp_ceil(h),
            bp_ceil(h)
        ));
    }
    e.line(".996264 dup scale");
    e.line(&format!("{} {} translate", format_sp(-b.x0), format_sp(-b.y0)));
    e.line("0 setlinejoin 10 setmiterlimit");
    e.nodes(&scene.nodes);
    e.line("restore");
    e.line("showpage");
    e.line("%%EOF");
    e.out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixnum::CM;
    use crate::geom::BBox;

    fn empty(x1: Sp, y1: Sp) -> Scene {
        Scene { bbox: BBox { x0: Sp::ZERO, y0: Sp::ZERO, x1, y1 }, baseline: Sp::ZERO, nodes: Vec::new() }
    }

    #[test]
    fn centimetre_viewbox() {
        let svg = emit_svg(&empty(CM, CM), &RenderOptions::default());
        assert!(svg.contains("viewBox=\"0 0 28.346 28.346\""));
        assert!(!svg.contains("<path"));
    }

    #[test]
    fn ten_point_bounding_box() {
        let eps = emit_eps(&empty(Sp::pt(10), Sp::pt(10)), &RenderOptions::default());
        assert!(eps.contains("%%BoundingBox: 0 0 10 10\n"));
        assert!(eps.ends_with("%%EOF\n"));
    }

    #[test]
    fn bp_rounding() {
        assert_eq!(sp_to_bp(Sp::pt(1), 3), "0.996");
        assert_eq!(sp_to_bp(Sp::ZERO, 3), "0");
        assert_eq!(sp_to_bp(Sp::pt(-10), 3), "-9.963");
        assert_eq!(num(0.25, 1), "0.2");
        assert_eq!(num(0.75, 1), "0.8");
        assert_eq!(bp_ceil(Sp::pt(10)), 10);
        assert_eq!(bp_floor(Sp::pt(-10)), -10);
    }
}
