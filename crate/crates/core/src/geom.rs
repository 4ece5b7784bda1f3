//! Geometry kernel. Every constructor returns a `Path` whose points are
//! rounded to scaled points; intermediate math runs in f64 points.

use crate::fixnum::Sp;
use crate::state::{ArrowKind, CapKind, FillOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Pt {
    pub x: Sp,
    pub y: Sp,
}

impl Pt {
    pub fn new(x: Sp, y: Sp) -> Pt {
        Pt { x, y }
    }

    pub fn from_f(v: V2) -> Pt {
        Pt { x: Sp::from_pt_f64(v.x), y: Sp::from_pt_f64(v.y) }
    }

    pub fn f(self) -> V2 {
        V2 { x: self.x.to_pt(), y: self.y.to_pt() }
    }
}

/// A point or vector in points.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct V2 {
    pub x: f64,
    pub y: f64,
}

#[allow(clippy::should_implement_trait)]
impl V2 {
    pub const fn new(x: f64, y: f64) -> V2 {
        V2 { x, y }
    }
    pub fn add(self, o: V2) -> V2 {
        V2::new(self.x + o.x, self.y + o.y)
    }
    pub fn sub(self, o: V2) -> V2 {
        V2::new(self.x - o.x, self.y - o.y)
    }
    pub fn mul(self, k: f64) -> V2 {
        V2::new(self.x * k, self.y * k)
    }
    pub fn dot(self, o: V2) -> f64 {
        self.x * o.x + self.y * o.y
    }
    pub fn cross(self, o: V2) -> f64 {
        self.x * o.y - self.y * o.x
    }
    pub fn len(self) -> f64 {
        self.x.hypot(self.y)
    }
    pub fn unit(self) -> V2 {
        let l = self.len();
        if l == 0.0 {
            V2::new(0.0, 0.0)
        } else {
            self.mul(1.0 / l)
        }
    }
    pub fn polar(r: f64, deg: f64) -> V2 {
        let t = deg.to_radians();
        V2::new(r * t.cos(), r * t.sin())
    }
    pub fn rotate(self, deg: f64) -> V2 {
        let (s, c) = deg.to_radians().sin_cos();
        V2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

/// Affine map `(x, y) -> (a x + c y + e, b x + d y + f)`, lengths in points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl Default for Affine {
    fn default() -> Self {
        Affine::IDENTITY
    }
}

impl Affine {
    pub const IDENTITY: Affine = Affine { a: 1.0, b: 0.0, c: 0.0, d: 1.0, e: 0.0, f: 0.0 };

    pub fn translate(x: f64, y: f64) -> Affine {
        Affine { e: x, f: y, ..Affine::IDENTITY }
    }

    pub fn rotate(deg: f64) -> Affine {
        let (s, c) = exact_sin_cos(deg);
        Affine { a: c, b: s, c: -s, d: c, e: 0.0, f: 0.0 }
    }

    pub fn scale(sx: f64, sy: f64) -> Affine {
        Affine { a: sx, d: sy, ..Affine::IDENTITY }
    }

    /// Swap the axes, as `swapaxes` does.
    pub fn swap() -> Affine {
        Affine { a: 0.0, b: 1.0, c: 1.0, d: 0.0, e: 0.0, f: 0.0 }
    }

    /// `self` applied after `inner`.
    pub fn then(self, outer: Affine) -> Affine {
        outer.compose(self)
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(self, inner: Affine) -> Affine {
        Affine {
            a: self.a * inner.a + self.c * inner.b,
            b: self.b * inner.a + self.d * inner.b,
            c: self.a * inner.c + self.c * inner.d,
            d: self.b * inner.c + self.d * inner.d,
            e: self.a * inner.e + self.c * inner.f + self.e,
            f: self.b * inner.e + self.d * inner.f + self.f,
        }
    }

    pub fn apply(&self, p: V2) -> V2 {
        V2::new(self.a * p.x + self.c * p.y + self.e, self.b * p.x + self.d * p.y + self.f)
    }

    pub fn is_identity(&self) -> bool {
        *self == Affine::IDENTITY
    }

    pub fn invert(&self) -> Option<Affine> {
        let det = self.a * self.d - self.b * self.c;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let (a, b, c, d) = (self.d / det, -self.b / det, -self.c / det, self.a / det);
        Some(Affine { a, b, c, d, e: -(a * self.e + c * self.f), f: -(b * self.e + d * self.f) })
    }

    /// Rotation angle of the linear part in degrees.
    pub fn angle(&self) -> f64 {
        self.b.atan2(self.a).to_degrees()
    }
}

/// sin/cos with exact values at multiples of 90 degrees.
pub fn exact_sin_cos(deg: f64) -> (f64, f64) {
    let r = deg.rem_euclid(360.0);
    if r == 0.0 {
        (0.0, 1.0)
    } else if r == 90.0 {
        (1.0, 0.0)
    } else if r == 180.0 {
        (0.0, -1.0)
    } else if r == 270.0 {
        (-1.0, 0.0)
    } else {
        deg.to_radians().sin_cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Seg {
    Move(Pt),
    Line(Pt),
    Cubic(Pt, Pt, Pt),
    Close,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Path {
    pub segs: Vec<Seg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BBox {
    pub x0: Sp,
    pub y0: Sp,
    pub x1: Sp,
    pub y1: Sp,
}

impl BBox {
    pub fn of_point(p: Pt) -> BBox {
        BBox { x0: p.x, y0: p.y, x1: p.x, y1: p.y }
    }

    pub fn include(&mut self, p: Pt) {
        self.x0 = self.x0.min(p.x);
        self.y0 = self.y0.min(p.y);
        self.x1 = self.x1.max(p.x);
        self.y1 = self.y1.max(p.y);
    }

    pub fn union(self, o: BBox) -> BBox {
        BBox { x0: self.x0.min(o.x0), y0: self.y0.min(o.y0), x1: self.x1.max(o.x1), y1: self.y1.max(o.y1) }
    }

    pub fn grow(self, d: Sp) -> BBox {
        BBox { x0: self.x0 - d, y0: self.y0 - d, x1: self.x1 + d, y1: self.y1 + d }
    }

    pub fn width(&self) -> Sp {
        self.x1 - self.x0
    }

    pub fn height(&self) -> Sp {
        self.y1 - self.y0
    }
}

impl Path {
    pub fn new() -> Path {
        Path::default()
    }

    pub fn is_empty(&self) -> bool {
        self.segs.is_empty()
    }

    pub fn move_to(&mut self, p: V2) {
        self.segs.push(Seg::Move(Pt::from_f(p)));
    }

    /// Line to `p`, or a move if the path is empty.
    pub fn line_to(&mut self, p: V2) {
        if self.segs.is_empty() {
            self.move_to(p);
        } else {
            self.segs.push(Seg::Line(Pt::from_f(p)));
        }
    }

    pub fn curve_to(&mut self, c1: V2, c2: V2, p: V2) {
        if self.segs.is_empty() {
            self.move_to(c1);
        }
        self.segs.push(Seg::Cubic(Pt::from_f(c1), Pt::from_f(c2), Pt::from_f(p)));
    }

    pub fn close(&mut self) {
        if self.segs.last().is_some_and(|s| !matches!(s, Seg::Move(_) | Seg::Close)) {
            self.segs.push(Seg::Close);
        }
    }

    pub fn append(&mut self, other: &Path) {
        self.segs.extend_from_slice(&other.segs);
    }

    /// Last point reached, if any.
    pub fn current_point(&self) -> Option<Pt> {
        let mut start = None;
        let mut cur = None;
        for s in &self.segs {
            match *s {
                Seg::Move(p) => {
                    start = Some(p);
                    cur = Some(p);
                }
                Seg::Line(p) | Seg::Cubic(_, _, p) => cur = Some(p),
                Seg::Close => cur = start,
            }
        }
        cur
    }

    /// Endpoints of every segment, in order.
    pub fn points(&self) -> Vec<Pt> {
        let mut v = Vec::new();
        for s in &self.segs {
            match *s {
                Seg::Move(p) | Seg::Line(p) => v.push(p),
                Seg::Cubic(a, b, p) => v.extend([a, b, p]),
                Seg::Close => {}
            }
        }
        v
    }

    pub fn bbox(&self) -> Option<BBox> {
        let pts = self.points();
        let mut it = pts.into_iter();
        let mut b = BBox::of_point(it.next()?);
        for p in it {
            b.include(p);
        }
        Some(b)
    }

    pub fn transform(&self, m: &Affine) -> Path {
        let t = |p: Pt| Pt::from_f(m.apply(p.f()));
        Path {
            segs: self
                .segs
                .iter()
                .map(|s| match *s {
                    Seg::Move(p) => Seg::Move(t(p)),
                    Seg::Line(p) => Seg::Line(t(p)),
                    Seg::Cubic(a, b, p) => Seg::Cubic(t(a), t(b), t(p)),
                    Seg::Close => Seg::Close,
                })
                .collect(),
        }
    }

    /// MoveTo first, Close only after a drawing segment.
    pub fn is_valid(&self) -> bool {
        if self.segs.is_empty() {
            return true;
        }
        if !matches!(self.segs[0], Seg::Move(_)) {
            return false;
        }
        let mut drawn = false;
        for s in &self.segs {
            match s {
                Seg::Move(_) => drawn = false,
                Seg::Line(_) | Seg::Cubic(..) => drawn = true,
                Seg::Close => {
                    if !drawn {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Polylines approximating each subpath; closed subpaths repeat the start.
    pub fn flatten(&self) -> Vec<(Vec<V2>, bool)> {
        let mut out: Vec<(Vec<V2>, bool)> = Vec::new();
        let mut cur: Vec<V2> = Vec::new();
        for s in &self.segs {
            match *s {
                Seg::Move(p) => {
                    if !cur.is_empty() {
                        out.push((std::mem::take(&mut cur), false));
                    }
                    cur.push(p.f());
                }
                Seg::Line(p) => cur.push(p.f()),
                Seg::Cubic(a, b, p) => {
                    let p0 = *cur.last().unwrap_or(&a.f());
                    for i in 1..=FLAT_STEPS {
                        cur.push(cubic_at(p0, a.f(), b.f(), p.f(), i as f64 / FLAT_STEPS as f64));
                    }
                }
                Seg::Close => {
                    if let Some(&first) = cur.first() {
                        cur.push(first);
                        let start = first;
                        out.push((std::mem::take(&mut cur), true));
                        cur.push(start);
                    }
                }
            }
        }
        if cur.len() > 1 {
            out.push((cur, false));
        }
        out
    }

    /// Arc length of all subpaths in points.
    pub fn length(&self) -> f64 {
        self.flatten().iter().map(|(pts, _)| pts.windows(2).map(|w| w[1].sub(w[0]).len()).sum::<f64>()).sum()
    }

    /// Reverse a single open subpath.
    pub fn reversed(&self) -> Path {
        let mut nodes: Vec<Seg> = Vec::new();
        let mut pts: Vec<Pt> = Vec::new();
        for s in &self.segs {
            match *s {
                Seg::Move(p) => pts.push(p),
                Seg::Line(p) => {
                    nodes.push(Seg::Line(p));
                    pts.push(p);
                }
                Seg::Cubic(a, b, p) => {
                    nodes.push(Seg::Cubic(a, b, p));
                    pts.push(p);
                }
                Seg::Close => {}
            }
        }
        let mut out = Path::new();
        if pts.is_empty() {
            return out;
        }
        out.segs.push(Seg::Move(*pts.last().unwrap()));
        for (i, s) in nodes.iter().enumerate().rev() {
            let start = pts[i];
            match *s {
                Seg::Line(_) => out.segs.push(Seg::Line(start)),
                Seg::Cubic(a, b, _) => out.segs.push(Seg::Cubic(b, a, start)),
                _ => {}
            }
        }
        out
    }
}

const FLAT_STEPS: usize = 16;

pub fn cubic_at(p0: V2, p1: V2, p2: V2, p3: V2, t: f64) -> V2 {
    let u = 1.0 - t;
    p0.mul(u * u * u).add(p1.mul(3.0 * u * u * t)).add(p2.mul(3.0 * u * t * t)).add(p3.mul(t * t * t))
}

fn cubic_split(p0: V2, p1: V2, p2: V2, p3: V2, t: f64) -> ([V2; 4], [V2; 4]) {
    let lerp = |a: V2, b: V2| a.add(b.sub(a).mul(t));
    let a = lerp(p0, p1);
    let b = lerp(p1, p2);
    let c = lerp(p2, p3);
    let d = lerp(a, b);
    let e = lerp(b, c);
    let f = lerp(d, e);
    ([p0, a, d, f], [f, e, c, p3])
}

// ---------------------------------------------------------------- arcs

/// Append a circular or elliptical arc. Starts with a line from the current
/// point (or a move on an empty path), like PostScript `arc`.
pub fn append_arc(path: &mut Path, c: V2, rx: f64, ry: f64, a0: f64, a1: f64, ccw: bool) {
    let sweep = arc_sweep(a0, a1, ccw);
    let on = |a: f64| {
        let (s, co) = exact_sin_cos(a);
        V2::new(c.x + rx * co, c.y + ry * s)
    };
    path.line_to(on(a0));
    if sweep == 0.0 {
        return;
    }
    let n = (sweep.abs() / 90.0 - 1e-9).ceil().max(1.0) as usize;
    let step = sweep / n as f64;
    let k = 4.0 / 3.0 * (step.to_radians() / 4.0).tan();
    for i in 0..n {
        let t0 = a0 + step * i as f64;
        let t1 = if i + 1 == n { a0 + sweep } else { t0 + step };
        let (s0, c0) = exact_sin_cos(t0);
        let (s1, c1) = exact_sin_cos(t1);
        let p0 = V2::new(c.x + rx * c0, c.y + ry * s0);
        let p3 = V2::new(c.x + rx * c1, c.y + ry * s1);
        let d0 = V2::new(-rx * s0, ry * c0).mul(k);
        let d1 = V2::new(-rx * s1, ry * c1).mul(k);
        path.curve_to(p0.add(d0), p3.sub(d1), p3);
    }
}

/// Signed sweep in degrees, normalized the way `arc`/`arcn` do.
pub fn arc_sweep(a0: f64, a1: f64, ccw: bool) -> f64 {
    if ccw {
        let mut s = a1 - a0;
        while s < 0.0 {
            s += 360.0;
        }
        if s > 360.0 && a1 - a0 > 360.0 {
            s = 360.0;
        }
        s
    } else {
        let mut s = a1 - a0;
        while s > 0.0 {
            s -= 360.0;
        }
        if s < -360.0 && a1 - a0 < -360.0 {
            s = -360.0;
        }
        s
    }
}

/// Elliptical arc with the dimen radius adjustment.
#[allow(clippy::too_many_arguments)]
pub fn ellipse_arc(
    center: V2,
    rx: f64,
    ry: f64,
    a0: f64,
    a1: f64,
    ccw: bool,
    dimen_k: f64,
    linewidth: f64,
) -> Result<Path, String> {
    let rx = rx - dimen_k * linewidth;
    let ry = ry - dimen_k * linewidth;
    if rx <= 0.0 || ry <= 0.0 {
        return Err("radius must be positive after line width adjustment".into());
    }
    let mut p = Path::new();
    append_arc(&mut p, center, rx, ry, a0, a1, ccw);
    Ok(p)
}

/// Closed full ellipse: four quarter cubics.
pub fn ellipse(center: V2, rx: f64, ry: f64) -> Path {
    let mut p = Path::new();
    append_arc(&mut p, center, rx, ry, 0.0, 360.0, true);
    p.close();
    p
}

/// Shift arc ends by the arc separations; `57.2957/r` degrees per pt.
pub fn arc_with_arcsep(r: f64, a0: f64, a1: f64, sep_a: f64, sep_b: f64, ccw: bool) -> (f64, f64) {
    if r <= 0.0 {
        return (a0, a1);
    }
    let c = 57.2957 / r;
    if ccw {
        (a0 + sep_a * c / 2.0, a1 - sep_b * c / 2.0)
    } else {
        (a0 - sep_a * c / 2.0, a1 + sep_b * c / 2.0)
    }
}

pub fn wedge(center: V2, r: f64, a0: f64, a1: f64, dimen_k: f64, linewidth: f64) -> Result<Path, String> {
    let r = r - dimen_k * linewidth;
    if r <= 0.0 {
        return Err("wedge radius must be positive".into());
    }
    let mut p = Path::new();
    p.move_to(center);
    append_arc(&mut p, center, r, r, a0, a1, true);
    p.close();
    Ok(p)
}

pub fn elliptic_wedge(center: V2, rx: f64, ry: f64, a0: f64, a1: f64, dimen_k: f64, lw: f64) -> Result<Path, String> {
    let rx = rx - dimen_k * lw;
    let ry = ry - dimen_k * lw;
    if rx <= 0.0 || ry <= 0.0 {
        return Err("wedge radius must be positive".into());
    }
    let mut p = Path::new();
    p.move_to(center);
    append_arc(&mut p, center, rx, ry, a0, a1, true);
    p.close();
    Ok(p)
}

// ---------------------------------------------------------------- polylines

/// Drop consecutive duplicates; reports whether any were dropped.
pub fn dedup_points(pts: &[V2]) -> (Vec<V2>, bool) {
    let mut out: Vec<V2> = Vec::with_capacity(pts.len());
    let mut dropped = false;
    for &p in pts {
        if out.last().is_some_and(|q| Pt::from_f(*q) == Pt::from_f(p)) {
            dropped = true;
        } else {
            out.push(p);
        }
    }
    (out, dropped)
}

/// A rounded corner at `b` between `a` and `c`: (tangent in, tangent out,
/// center, radius), or None when the corner is straight.
pub fn corner_arc(a: V2, b: V2, c: V2, r: f64) -> Option<(V2, V2, V2, f64)> {
    let u1 = b.sub(a);
    let u2 = c.sub(b);
    let (l1, l2) = (u1.len(), u2.len());
    if l1 == 0.0 || l2 == 0.0 || r <= 0.0 {
        return None;
    }
    let (e1, e2) = (u1.mul(1.0 / l1), u2.mul(1.0 / l2));
    let cross = e1.cross(e2);
    let cos_turn = e1.dot(e2).clamp(-1.0, 1.0);
    if cross.abs() < 1e-12 {
        return None;
    }
    let turn = cos_turn.acos();
    let mut t = r * (turn / 2.0).tan();
    let mut r = r;
    let tmax = l1.min(l2) / 2.0;
    if t > tmax {
        t = tmax;
        r = t / (turn / 2.0).tan();
    }
    let t1 = b.sub(e1.mul(t));
    let t2 = b.add(e2.mul(t));
    let normal = if cross > 0.0 { V2::new(-e1.y, e1.x) } else { V2::new(e1.y, -e1.x) };
    let center = t1.add(normal.mul(r));
    Some((t1, t2, center, r))
}

fn push_corner(path: &mut Path, t1: V2, t2: V2, center: V2, r: f64) {
    path.line_to(t1);
    let a0 = t1.sub(center);
    let a1 = t2.sub(center);
    let ang0 = a0.y.atan2(a0.x).to_degrees();
    let mut sweep = (a1.y.atan2(a1.x) - a0.y.atan2(a0.x)).to_degrees();
    if sweep > 180.0 {
        sweep -= 360.0;
    } else if sweep < -180.0 {
        sweep += 360.0;
    }
    append_arc(path, center, r, r, ang0, ang0 + sweep, sweep >= 0.0);
}

/// Straight or rounded polyline.
pub fn polyline(pts: &[V2], linearc: f64, closed: bool) -> Path {
    let mut p = Path::new();
    if pts.is_empty() {
        return p;
    }
    let n = pts.len();
    if linearc <= 0.0 || n < 3 && !closed {
        p.move_to(pts[0]);
        for &q in &pts[1..] {
            p.line_to(q);
        }
        if closed {
            p.close();
        }
        return p;
    }
    if closed {
        let start = pts[n - 1].add(pts[0]).mul(0.5);
        p.move_to(start);
        for i in 0..n {
            let a = pts[(i + n - 1) % n];
            let b = pts[i];
            let c = pts[(i + 1) % n];
            match corner_arc(a, b, c, linearc) {
                Some((t1, t2, ctr, r)) => push_corner(&mut p, t1, t2, ctr, r),
                None => p.line_to(b),
            }
        }
        p.line_to(start);
        p.close();
    } else {
        p.move_to(pts[0]);
        for i in 1..n - 1 {
            match corner_arc(pts[i - 1], pts[i], pts[i + 1], linearc) {
                Some((t1, t2, ctr, r)) => push_corner(&mut p, t1, t2, ctr, r),
                None => p.line_to(pts[i]),
            }
        }
        p.line_to(pts[n - 1]);
    }
    p
}

/// Rectangle with the dimen inset and optional rounded corners.
/// `corner` is `(value, relative)`: linearc in points, or framearc.
pub fn frame(p1: V2, p2: V2, corner: (f64, bool), dimen_k: f64, linewidth: f64) -> Result<Path, String> {
    let d = dimen_k * linewidth;
    let (x0, x1) = (p1.x.min(p2.x) + d, p1.x.max(p2.x) - d);
    let (y0, y1) = (p1.y.min(p2.y) + d, p1.y.max(p2.y) - d);
    let (w, h) = (x1 - x0, y1 - y0);
    if w <= 0.0 || h <= 0.0 {
        return Err("frame has zero area".into());
    }
    let r = if corner.1 { corner.0 / 2.0 * w.min(h) } else { corner.0 };
    let r = r.clamp(0.0, w.min(h) / 2.0);
    let mut p = Path::new();
    if r == 0.0 {
        p.move_to(V2::new(x0, y0));
        p.line_to(V2::new(x1, y0));
        p.line_to(V2::new(x1, y1));
        p.line_to(V2::new(x0, y1));
        p.close();
        return Ok(p);
    }
    p.move_to(V2::new(x0 + r, y0));
    p.line_to(V2::new(x1 - r, y0));
    append_arc(&mut p, V2::new(x1 - r, y0 + r), r, r, -90.0, 0.0, true);
    p.line_to(V2::new(x1, y1 - r));
    append_arc(&mut p, V2::new(x1 - r, y1 - r), r, r, 0.0, 90.0, true);
    p.line_to(V2::new(x0 + r, y1));
    append_arc(&mut p, V2::new(x0 + r, y1 - r), r, r, 90.0, 180.0, true);
    p.line_to(V2::new(x0, y0 + r));
    append_arc(&mut p, V2::new(x0 + r, y0 + r), r, r, 180.0, 270.0, true);
    p.close();
    Ok(p)
}

/// Shrink a tangential polygon about its incenter so each edge moves
/// inward by `d`.
fn inset_tangential(pts: &[V2], center: V2, inradius: f64, d: f64) -> Vec<V2> {
    if d == 0.0 || inradius <= 0.0 {
        return pts.to_vec();
    }
    let s = (inradius - d) / inradius;
    pts.iter().map(|p| center.add(p.sub(center).mul(s))).collect()
}

pub fn diamond(center: V2, hw: f64, hh: f64, gangle: f64, linearc: f64, dimen_k: f64, lw: f64) -> Result<Path, String> {
    if hw <= 0.0 || hh <= 0.0 {
        return Err("diamond extents must be positive".into());
    }
    let inr = hw * hh / hw.hypot(hh);
    let base = [V2::new(hw, 0.0), V2::new(0.0, hh), V2::new(-hw, 0.0), V2::new(0.0, -hh)];
    let pts = inset_tangential(&base, V2::default(), inr, dimen_k * lw);
    let pts: Vec<V2> = pts.iter().map(|p| p.rotate(gangle).add(center)).collect();
    Ok(polyline(&pts, linearc, true))
}

/// Isoceles triangle: base of width `w` centered at `base`, apex `h` above,
/// rotated about `base` by `gangle`.
pub fn triangle(base: V2, w: f64, h: f64, gangle: f64, linearc: f64, dimen_k: f64, lw: f64) -> Result<Path, String> {
    if w <= 0.0 || h <= 0.0 {
        return Err("triangle extents must be positive".into());
    }
    let a = V2::new(-w / 2.0, 0.0);
    let b = V2::new(w / 2.0, 0.0);
    let c = V2::new(0.0, h);
    let (la, lb, lc) = (b.sub(c).len(), a.sub(c).len(), w);
    let per = la + lb + lc;
    let inc = a.mul(la).add(b.mul(lb)).add(c.mul(lc)).mul(1.0 / per);
    let area = w * h / 2.0;
    let inr = 2.0 * area / per;
    let pts = inset_tangential(&[a, b, c], inc, inr, dimen_k * lw);
    let pts: Vec<V2> = pts.iter().map(|p| p.rotate(gangle).add(base)).collect();
    Ok(polyline(&pts, linearc, true))
}

// ---------------------------------------------------------------- curves

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Open,
    Closed,
    /// First and last points only steer the end tangents.
    EndClipped,
}

/// Interpolating spline through the points.
pub fn interp_curve(pts: &[V2], curv: (f64, f64, f64), kind: CurveKind) -> Path {
    let (a, b, c) = curv;
    let n = pts.len();
    let mut p = Path::new();
    if n == 0 {
        return p;
    }
    if n == 1 {
        p.move_to(pts[0]);
        return p;
    }
    let closed = kind == CurveKind::Closed;
    let neighbor = |i: usize, delta: isize| -> Option<V2> {
        let j = i as isize + delta;
        if closed {
            Some(pts[j.rem_euclid(n as isize) as usize])
        } else if j < 0 || j >= n as isize {
            None
        } else {
            Some(pts[j as usize])
        }
    };
    // (incoming distance, outgoing distance, unit tangent) per point.
    let tangent = |i: usize| -> (f64, f64, V2) {
        let pi = pts[i];
        let prev = neighbor(i, -1);
        let next = neighbor(i, 1);
        let lin = prev.map_or(0.0, |q| pi.sub(q).len());
        let lout = next.map_or(0.0, |q| q.sub(pi).len());
        let dir = match (prev, next) {
            (Some(q), Some(r)) => {
                let d = r.sub(q);
                if d.len() == 0.0 {
                    r.sub(pi)
                } else {
                    d
                }
            }
            (None, Some(r)) => r.sub(pi),
            (Some(q), None) => pi.sub(q),
            (None, None) => V2::default(),
        };
        let u = dir.unit();
        let cos_t = match (prev, next) {
            (Some(q), Some(r)) => pi.sub(q).unit().dot(r.sub(pi).unit()),
            _ => 1.0,
        };
        let k = (1.0 - b * (1.0 - cos_t)).max(0.0);
        if c == 0.0 {
            let d = if prev.is_none() {
                lout
            } else if next.is_none() {
                lin
            } else {
                lin.min(lout)
            };
            (d * k, d * k, u)
        } else {
            (lin * k, lout * k, u)
        }
    };
    let (first, last) = match kind {
        CurveKind::Open => (0, n - 1),
        CurveKind::Closed => (0, n),
        CurveKind::EndClipped => (1, n - 2),
    };
    if kind == CurveKind::EndClipped && n < 4 {
        p.move_to(pts[0]);
        for &q in &pts[1..] {
            p.line_to(q);
        }
        return p;
    }
    p.move_to(pts[first]);
    for i in first..last {
        let i0 = i % n;
        let i1 = (i + 1) % n;
        let (_, out0, u0) = tangent(i0);
        let (in1, _, u1) = tangent(i1);
        let c1 = pts[i0].add(u0.mul(a / 3.0 * out0));
        let c2 = pts[i1].sub(u1.mul(a / 3.0 * in1));
        p.curve_to(c1, c2, pts[i1]);
    }
    if closed {
        p.close();
    }
    p
}

/// Vertical-axis parabola from `start` through `vertex` to the mirror point.
/// Returns the path and whether it degenerated to a segment.
pub fn parabola(start: V2, vertex: V2) -> (Path, bool) {
    let mut p = Path::new();
    p.move_to(start);
    if Pt::from_f(start).x == Pt::from_f(vertex).x {
        p.line_to(vertex);
        return (p, true);
    }
    let end = V2::new(2.0 * vertex.x - start.x, start.y);
    let q = V2::new(vertex.x, 2.0 * vertex.y - start.y);
    let c1 = start.add(q.sub(start).mul(2.0 / 3.0));
    let c2 = end.add(q.sub(end).mul(2.0 / 3.0));
    p.curve_to(c1, c2, end);
    (p, false)
}

// ---------------------------------------------------------------- grid

#[derive(Debug, Clone, PartialEq)]
pub struct GridLabel {
    pub at: V2,
    pub text: String,
    /// Horizontal labels run along the x axis.
    pub on_x: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GridGeom {
    pub main: Vec<(V2, V2)>,
    pub sub: Vec<(V2, V2)>,
    pub labels: Vec<GridLabel>,
}

/// Grid between integer corners (in units); lengths of a unit in points.
pub fn grid(
    c0: (i64, i64),
    c1: (i64, i64),
    origin: (i64, i64),
    xunit: f64,
    yunit: f64,
    div: i64,
    labels: bool,
) -> GridGeom {
    let mut g = GridGeom::default();
    let (xa, xb) = (c0.0.min(c1.0), c0.0.max(c1.0));
    let (ya, yb) = (c0.1.min(c1.1), c0.1.max(c1.1));
    if xa == xb && ya == yb {
        return g;
    }
    let (xu, yu) = (xunit.abs(), yunit.abs());
    let y0 = ya as f64 * yu;
    let y1 = yb as f64 * yu;
    let x0 = xa as f64 * xu;
    let x1 = xb as f64 * xu;
    if div > 1 {
        let d = div as f64;
        for i in xa..xb {
            for k in 1..div {
                let x = (i as f64 + k as f64 / d) * xu;
                g.sub.push((V2::new(x, y0), V2::new(x, y1)));
            }
        }
        for j in ya..yb {
            for k in 1..div {
                let y = (j as f64 + k as f64 / d) * yu;
                g.sub.push((V2::new(x0, y), V2::new(x1, y)));
            }
        }
    }
    for i in xa..=xb {
        let x = i as f64 * xu;
        g.main.push((V2::new(x, y0), V2::new(x, y1)));
    }
    for j in ya..=yb {
        let y = j as f64 * yu;
        g.main.push((V2::new(x0, y), V2::new(x1, y)));
    }
    if labels {
        let oy = origin.1 as f64 * yu;
        let ox = origin.0 as f64 * xu;
        for i in xa..=xb {
            g.labels.push(GridLabel { at: V2::new(i as f64 * xu, oy), text: i.to_string(), on_x: true });
        }
        for j in ya..=yb {
            g.labels.push(GridLabel { at: V2::new(ox, j as f64 * yu), text: j.to_string(), on_x: false });
        }
    }
    g
}

/// Closed-form grid line counts `(main, sub)`.
pub fn grid_counts(nx: i64, ny: i64, div: i64) -> (usize, usize) {
    let (nx, ny) = (nx.abs(), ny.abs());
    if nx == 0 && ny == 0 {
        return (0, 0);
    }
    let sub = if div > 1 { (div - 1) * (nx + ny) } else { 0 };
    ((nx + 1 + ny + 1) as usize, sub as usize)
}

// ---------------------------------------------------------------- arrows

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrowParams {
    pub clw: Sp,
    pub arrowsize: (Sp, f64),
    pub arrowlength: f64,
    pub arrowinset: f64,
    pub arrowscale: (f64, f64),
    pub tbarsize: (Sp, f64),
    pub bracketlength: f64,
    pub rbracketlength: f64,
    pub dotsize: (Sp, f64),
}

/// An end decoration in its own frame: tip at the origin, the host path
/// arriving from −y.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ArrowGeometry {
    pub trim: Sp,
    /// Filled in the line color.
    pub outline: Path,
    /// Stroked in the line color at CLW.
    pub strokes: Path,
    /// Line cap for `strokes` (0 butt, 1 round, 2 square).
    pub stroke_cap: u8,
    /// Filled in the fill color, over `outline`.
    pub inner: Path,
}

impl ArrowGeometry {
    pub fn is_empty(&self) -> bool {
        self.outline.is_empty() && self.strokes.is_empty() && self.inner.is_empty()
    }

    pub fn transform(&self, m: &Affine) -> ArrowGeometry {
        ArrowGeometry {
            trim: self.trim,
            outline: self.outline.transform(m),
            strokes: self.strokes.transform(m),
            stroke_cap: self.stroke_cap,
            inner: self.inner.transform(m),
        }
    }
}

/// `(W, L, inset depth)` of an arrow head, rounded to sp.
pub fn head_dims(p: &ArrowParams) -> (Sp, Sp, Sp) {
    let w = p.arrowsize.0 + p.clw.scale(p.arrowsize.1);
    let l = w.scale(p.arrowlength);
    let a = l.scale(p.arrowinset);
    (w, l, a)
}

fn head(path: &mut Path, w: f64, l: f64, a: f64, tip_y: f64, flipped: bool) {
    let s = if flipped { -1.0 } else { 1.0 };
    // Base at tip_y − s·l, notch pulled toward the tip by a.
    let base = tip_y - s * l;
    path.move_to(V2::new(0.0, tip_y));
    path.line_to(V2::new(w / 2.0, base));
    path.line_to(V2::new(0.0, base + s * a));
    path.line_to(V2::new(-w / 2.0, base));
    path.close();
}

fn tbar(path: &mut Path, z: f64, y: f64) {
    path.move_to(V2::new(-z / 2.0, y));
    path.line_to(V2::new(z / 2.0, y));
}

pub fn arrow_geometry(kind: ArrowKind, p: &ArrowParams) -> ArrowGeometry {
    let clw = p.clw.to_pt();
    let (w, l, a) = head_dims(p);
    let (w, l, a) = (w.to_pt(), l.to_pt(), a.to_pt());
    let z = (p.tbarsize.0 + p.clw.scale(p.tbarsize.1)).to_pt();
    let mut g = ArrowGeometry::default();
    let trim = match kind {
        ArrowKind::None => return g,
        ArrowKind::Head { double } => {
            head(&mut g.outline, w, l, a, 0.0, false);
            if double {
                head(&mut g.outline, w, l, a, -l, false);
                2.0 * l - a
            } else {
                l - a
            }
        }
        ArrowKind::RevHead { double } => {
            head(&mut g.outline, w, l, a, -l, true);
            if double {
                head(&mut g.outline, w, l, a, -2.0 * l, true);
            }
            a
        }
        ArrowKind::TBar { centered } => {
            let y = if centered { 0.0 } else { -clw / 2.0 };
            tbar(&mut g.strokes, z, y);
            -y
        }
        ArrowKind::Bracket { out } => {
            let y0 = -clw / 2.0;
            let x = (z - clw) / 2.0;
            let leg = p.bracketlength * z * if out { 1.0 } else { -1.0 };
            g.strokes.move_to(V2::new(-x, y0 + leg));
            g.strokes.line_to(V2::new(-x, y0));
            g.strokes.line_to(V2::new(x, y0));
            g.strokes.line_to(V2::new(x, y0 + leg));
            clw / 2.0
        }
        ArrowKind::RoundBracket { out } => {
            let y0 = -clw / 2.0;
            let sx = z / 2.0;
            let sy = p.rbracketlength * z * if out { 1.0 } else { -1.0 };
            let m = |x: f64, y: f64| V2::new(x * sx, y0 + y * sy);
            g.strokes.move_to(m(1.0, 1.0));
            g.strokes.curve_to(m(0.85, 0.5), m(0.35, 0.0), m(0.0, 0.0));
            g.strokes.curve_to(m(-0.35, 0.0), m(-0.85, 0.5), m(-1.0, 1.0));
            clw / 2.0
        }
        ArrowKind::Dot { open, tangent } => {
            let ds = (p.dotsize.0 + p.clw.scale(p.dotsize.1)).to_pt() / 2.0;
            let cy = if tangent { -ds } else { 0.0 };
            let c = V2::new(0.0, cy);
            g.outline = ellipse(c, ds, ds);
            if open && ds > clw {
                g.inner = ellipse(c, ds - clw, ds - clw);
            }
            -cy
        }
        ArrowKind::Cap(cap) => {
            let y = if cap == CapKind::RoundIn { -clw / 2.0 } else { 0.0 };
            g.strokes.move_to(V2::new(0.0, y - 0.1));
            g.strokes.line_to(V2::new(0.0, y));
            g.stroke_cap = if cap == CapKind::Square { 2 } else { 1 };
            -y
        }
        ArrowKind::HeadTBar { centered } => {
            let y = if centered { 0.0 } else { -clw / 2.0 };
            tbar(&mut g.strokes, z, y);
            head(&mut g.outline, w, l, a, y, false);
            -y + l - a
        }
        ArrowKind::TBarHead => {
            let y = -clw / 2.0;
            tbar(&mut g.strokes, z, y);
            head(&mut g.outline, w, l, a, y - l, true);
            -y + a
        }
    };
    let (sx, sy) = p.arrowscale;
    if (sx, sy) != (1.0, 1.0) {
        g = g.transform(&Affine::scale(sx, sy));
    }
    g.trim = Sp::from_pt_f64(trim * sy.abs());
    g
}

/// Point at Euclidean distance `d` back from the end of the last subpath of
/// `pts` (a flattened polyline ending at the endpoint). Returns the cut
/// index and the point.
fn cut_back(pts: &[V2], d: f64) -> Option<(usize, V2)> {
    let end = *pts.last()?;
    for i in (0..pts.len() - 1).rev() {
        let q = pts[i];
        if q.sub(end).len() >= d {
            // Solve |pts[i+1] + t (q − pts[i+1]) − end| = d for t in [0,1].
            let p1 = pts[i + 1];
            let dir = q.sub(p1);
            let f = p1.sub(end);
            let aa = dir.dot(dir);
            let bb = 2.0 * f.dot(dir);
            let cc = f.dot(f) - d * d;
            let disc = (bb * bb - 4.0 * aa * cc).max(0.0);
            let t = if aa == 0.0 { 0.0 } else { ((-bb + disc.sqrt()) / (2.0 * aa)).clamp(0.0, 1.0) };
            return Some((i, p1.add(dir.mul(t))));
        }
    }
    None
}

/// Where an arrow sits: the endpoint, the unit direction of arrival, and the
/// host path with that end trimmed.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrowPlacement {
    pub tip: V2,
    pub dir: V2,
}

impl ArrowPlacement {
    /// Map from the arrow frame (arrival along +y) to picture space.
    pub fn affine(&self) -> Affine {
        let u = self.dir;
        // +y ↦ u, +x ↦ (u.y, −u.x)
        Affine { a: u.y, b: -u.x, c: u.x, d: u.y, e: self.tip.x, f: self.tip.y }
    }
}

/// Trim the end of the last subpath by `trim` and report the placement.
fn trim_end(path: &Path, trim: f64) -> (Path, Option<ArrowPlacement>) {
    // Locate the last subpath.
    let start = path.segs.iter().rposition(|s| matches!(s, Seg::Move(_))).unwrap_or(0);
    let tail = &path.segs[start..];
    if tail.len() < 2 || tail.iter().any(|s| matches!(s, Seg::Close)) {
        return (path.clone(), None);
    }
    let mut prev = match tail[0] {
        Seg::Move(p) => p.f(),
        _ => return (path.clone(), None),
    };
    // Flattened points with originating segment index.
    let mut pts = vec![prev];
    let mut owner = vec![0usize];
    for (k, s) in tail.iter().enumerate().skip(1) {
        match *s {
            Seg::Line(p) => {
                pts.push(p.f());
                owner.push(k);
                prev = p.f();
            }
            Seg::Cubic(a, b, p) => {
                for i in 1..=64 {
                    pts.push(cubic_at(prev, a.f(), b.f(), p.f(), i as f64 / 64.0));
                    owner.push(k);
                }
                prev = p.f();
            }
            _ => {}
        }
    }
    let tip = *pts.last().unwrap();
    if trim <= 0.0 {
        let dir = end_tangent(tail);
        return (path.clone(), Some(ArrowPlacement { tip, dir }));
    }
    let Some((i, cut)) = cut_back(&pts, trim) else {
        let dir = tip.sub(pts[0]).unit();
        let mut out = Path { segs: path.segs[..start].to_vec() };
        out.move_to(tip);
        return (out, Some(ArrowPlacement { tip, dir: if dir.len() == 0.0 { V2::new(0.0, 1.0) } else { dir } }));
    };
    let dir = tip.sub(cut).unit();
    let seg_k = owner[i + 1];
    let mut out = Path { segs: path.segs[..start + seg_k].to_vec() };
    match tail[seg_k] {
        Seg::Line(_) => out.line_to(cut),
        Seg::Cubic(a, b, p) => {
            let p0 = out.current_point().map_or(a.f(), |q| q.f());
            let t = cubic_param_near(p0, a.f(), b.f(), p.f(), cut);
            let (left, _) = cubic_split(p0, a.f(), b.f(), p.f(), t);
            out.segs.push(Seg::Cubic(Pt::from_f(left[1]), Pt::from_f(left[2]), Pt::from_f(cut)));
        }
        _ => {}
    }
    (out, Some(ArrowPlacement { tip, dir }))
}

fn cubic_param_near(p0: V2, p1: V2, p2: V2, p3: V2, target: V2) -> f64 {
    let mut best = (f64::MAX, 0.0);
    for i in 0..=256 {
        let t = i as f64 / 256.0;
        let d = cubic_at(p0, p1, p2, p3, t).sub(target).len();
        if d < best.0 {
            best = (d, t);
        }
    }
    let (mut lo, mut hi) = ((best.1 - 1.0 / 256.0).max(0.0), (best.1 + 1.0 / 256.0).min(1.0));
    for _ in 0..40 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if cubic_at(p0, p1, p2, p3, m1).sub(target).len() < cubic_at(p0, p1, p2, p3, m2).sub(target).len() {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    (lo + hi) / 2.0
}

fn end_tangent(tail: &[Seg]) -> V2 {
    let mut pts: Vec<V2> = Vec::new();
    for s in tail {
        match *s {
            Seg::Move(p) | Seg::Line(p) => pts.push(p.f()),
            Seg::Cubic(a, b, p) => pts.extend([a.f(), b.f(), p.f()]),
            Seg::Close => {}
        }
    }
    let end = *pts.last().unwrap_or(&V2::default());
    for q in pts.iter().rev().skip(1) {
        let d = end.sub(*q);
        if d.len() > 0.0 {
            return d.unit();
        }
    }
    V2::new(0.0, 1.0)
}

/// Decorate both ends of an open path. Returns the trimmed path and the
/// placed arrows (start first).
pub fn apply_arrows(path: &Path, start: ArrowKind, end: ArrowKind, p: &ArrowParams) -> (Path, Vec<ArrowGeometry>) {
    let mut out = path.clone();
    let mut placed = Vec::new();
    if start == ArrowKind::None && end == ArrowKind::None {
        return (out, placed);
    }
    let ga = arrow_geometry(end, p);
    if !ga.is_empty() {
        let (trimmed, place) = trim_end(&out, ga.trim.to_pt());
        if let Some(pl) = place {
            out = trimmed;
            placed.push(ga.transform(&pl.affine()));
        }
    }
    let gs = arrow_geometry(start, p);
    if !gs.is_empty() {
        // Trim the first subpath by working on its reversal.
        let first_end =
            out.segs.iter().skip(1).position(|s| matches!(s, Seg::Move(_))).map_or(out.segs.len(), |i| i + 1);
        let head_part = Path { segs: out.segs[..first_end].to_vec() };
        if !head_part.segs.iter().any(|s| matches!(s, Seg::Close)) {
            let rev = head_part.reversed();
            let (trimmed, place) = trim_end(&rev, gs.trim.to_pt());
            if let Some(pl) = place {
                let mut segs = trimmed.reversed().segs;
                segs.extend_from_slice(&out.segs[first_end..]);
                out = Path { segs };
                placed.insert(0, gs.transform(&pl.affine()));
            }
        }
    }
    (out, placed)
}

// ---------------------------------------------------------------- fills

/// One hatch line, in points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HatchLine {
    pub a: V2,
    pub b: V2,
    pub width: f64,
}

/// Parallel lines at `angle` covering the region, cut to its interior by
/// even-odd crossing on the flattened outline.
pub fn hatch_fill(region: &Path, angle: f64, sep: f64, width: f64, sepinc: f64, widthinc: f64) -> Vec<HatchLine> {
    let mut out = Vec::new();
    if sep <= 0.0 {
        return out;
    }
    // Work in a frame where hatch lines are vertical: rotate by −angle.
    let rot = Affine::rotate(-(angle - 90.0));
    let back = Affine::rotate(angle - 90.0);
    let polys: Vec<Vec<V2>> = region
        .flatten()
        .into_iter()
        .map(|(mut pts, closed)| {
            if !closed {
                if let Some(&f) = pts.first() {
                    pts.push(f);
                }
            }
            pts.into_iter().map(|p| rot.apply(p)).collect()
        })
        .collect();
    let all: Vec<&V2> = polys.iter().flatten().collect();
    if all.is_empty() {
        return out;
    }
    let xmin = all.iter().map(|p| p.x).fold(f64::MAX, f64::min);
    let xmax = all.iter().map(|p| p.x).fold(f64::MIN, f64::max);
    let mut x = if sepinc == 0.0 { (xmin / sep).ceil() * sep } else { xmin + sep / 2.0 };
    let mut k = 0.0;
    while x <= xmax {
        let mut ys: Vec<f64> = Vec::new();
        for poly in &polys {
            for w in poly.windows(2) {
                let (p, q) = (w[0], w[1]);
                if (p.x <= x) != (q.x <= x) {
                    let t = (x - p.x) / (q.x - p.x);
                    ys.push(p.y + t * (q.y - p.y));
                }
            }
        }
        ys.sort_by(|a, b| a.total_cmp(b));
        for pair in ys.chunks_exact(2) {
            if pair[1] > pair[0] {
                out.push(HatchLine {
                    a: back.apply(V2::new(x, pair[0])),
                    b: back.apply(V2::new(x, pair[1])),
                    width: width + k * widthinc,
                });
            }
        }
        x += sep + k * sepinc;
        k += 1.0;
    }
    out
}

/// Hatch lines for a fill operation, if it hatches.
pub fn hatch_for(
    op: FillOp,
    region: &Path,
    angle: f64,
    sep: f64,
    width: f64,
    sepinc: f64,
    widthinc: f64,
) -> Vec<HatchLine> {
    match op {
        FillOp::VLines => hatch_fill(region, angle, sep, width, sepinc, widthinc),
        FillOp::HLines => hatch_fill(region, angle + 90.0, sep, width, sepinc, widthinc),
        _ => Vec::new(),
    }
}

// ---------------------------------------------------------------- dashes

/// A dash array. Lengths are in units of `1/denom` sp so an adjusted
/// pattern fits the path length exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DashPattern {
    pub entries: Vec<i64>,
    pub phase: i64,
    pub denom: i64,
    /// Periods along the path (1 when unadjusted).
    pub count: i64,
    pub round_caps: bool,
}

impl DashPattern {
    pub fn period(&self) -> i64 {
        self.entries.iter().sum()
    }

    pub fn entries_pt(&self) -> Vec<f64> {
        self.entries.iter().map(|e| *e as f64 / self.denom as f64 / 65536.0).collect()
    }

    pub fn phase_pt(&self) -> f64 {
        self.phase as f64 / self.denom as f64 / 65536.0
    }
}

/// Dash array for a path. `dotted` carries `dotsep + CLW`. Returns None for
/// a zero-length pattern (draw solid).
pub fn dash_pattern(
    path_len: Sp,
    dash: [Sp; 4],
    adjust: bool,
    linetype: i64,
    dotted: Option<Sp>,
) -> Option<DashPattern> {
    let (lit, round_caps): (Vec<i64>, bool) = match dotted {
        Some(gap) => (vec![0, gap.raw()], true),
        None => (dash.iter().map(|d| d.raw().abs()).collect(), false),
    };
    let period: i64 = lit.iter().sum();
    if period <= 0 {
        return None;
    }
    let len = path_len.raw();
    if !adjust || len <= 0 {
        return Some(DashPattern { entries: lit, phase: 0, denom: 1, count: 1, round_caps });
    }
    let n = div_round_even(len, period).max(1);
    // Scale entries so they sum to len/n, i.e. to len in units of sp/n.
    let mut entries: Vec<i64> = lit.iter().map(|e| (*e as i128 * len as i128 / period as i128) as i64).collect();
    let short = len - entries.iter().sum::<i64>();
    if let Some(last) = entries.iter_mut().rev().find(|e| **e > 0) {
        *last += short;
    }
    let phase = if linetype <= 0 && dotted.is_none() { entries[0] / 2 } else { 0 };
    Some(DashPattern { entries, phase, denom: n, count: n, round_caps })
}

/// `a / b` rounded to nearest, ties to even, for positive operands.
fn div_round_even(a: i64, b: i64) -> i64 {
    let (q, r) = (a / b, a % b);
    match (2 * r).cmp(&b) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal => q + (q & 1),
    }
}

// ---------------------------------------------------------------- shadows, dots

pub fn shadow_offset(size: Sp, angle: f64) -> (Sp, Sp) {
    let (s, c) = exact_sin_cos(angle);
    (size.scale(c), size.scale(s))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DotGeometry {
    /// Filled in the line color.
    pub fill: Path,
    /// Filled in the fill color on top.
    pub inner: Path,
    /// Stroked in the line color at CLW.
    pub stroke: Path,
}

impl DotGeometry {
    pub fn transform(&self, m: &Affine) -> DotGeometry {
        DotGeometry { fill: self.fill.transform(m), inner: self.inner.transform(m), stroke: self.stroke.transform(m) }
    }
}

fn square(r: f64) -> Path {
    polyline(&[V2::new(-r, -r), V2::new(r, -r), V2::new(r, r), V2::new(-r, r)], 0.0, true)
}

fn tri(x: f64, y: f64) -> Path {
    polyline(&[V2::new(x, y), V2::new(-x, y), V2::new(0.0, -2.0 * y)], 0.0, true)
}

fn pentagon(r: f64) -> Path {
    let pts: Vec<V2> = (0..5).map(|k| V2::polar(r, 90.0 + 72.0 * k as f64)).collect();
    polyline(&pts, 0.0, true)
}

fn plus(path: &mut Path, arm: f64, angle: f64) {
    for a in [angle, angle + 90.0] {
        path.move_to(V2::polar(arm, a));
        path.line_to(V2::polar(arm, a + 180.0));
    }
}

/// Dot shape at the origin after dotangle and dotscale.
pub fn dot_geometry(
    style: &str,
    dotsize: (Sp, f64),
    clw: Sp,
    tbarsize: (Sp, f64),
    scale: (f64, f64),
    angle: f64,
) -> Option<DotGeometry> {
    let c = clw.to_pt();
    let ds = (dotsize.0 + clw.scale(dotsize.1)).to_pt() / 2.0;
    let o = V2::default();
    let mut g = DotGeometry::default();
    let base = style.strip_prefix('B').filter(|s| !s.is_empty()).unwrap_or(style);
    match base {
        "*" => g.fill = ellipse(o, ds, ds),
        "o" => {
            g.fill = ellipse(o, ds, ds);
            if ds > c {
                g.inner = ellipse(o, ds - c, ds - c);
            }
        }
        "square*" => g.fill = square(0.886 * ds),
        "square" => {
            let r1 = 0.886 * ds;
            g.fill = square(r1);
            if r1 > c {
                g.inner = square(r1 - c);
            }
        }
        "diamond*" => g.fill = square(0.886 * ds).transform(&Affine::rotate(45.0)),
        "diamond" => {
            let r1 = 0.886 * ds;
            g.fill = square(r1).transform(&Affine::rotate(45.0));
            if r1 > c {
                g.inner = square(r1 - c).transform(&Affine::rotate(45.0));
            }
        }
        "triangle*" => {
            let y1 = -0.778 * ds;
            g.fill = tri(-1.732 * y1, y1);
        }
        "triangle" => {
            let y1 = -0.778 * ds;
            let y2 = y1 + c;
            g.fill = tri(-1.732 * y1, y1);
            if y2 < 0.0 {
                g.inner = tri(-1.732 * y2, y2);
            }
        }
        "pentagon*" => g.fill = pentagon(1.149 * ds),
        "pentagon" => {
            let r1 = 0.93 * ds * 1.236;
            let r2 = (0.93 * ds - c) * 1.236;
            g.fill = pentagon(r1);
            if r2 > 0.0 {
                g.inner = pentagon(r2);
            }
        }
        "+" => plus(&mut g.stroke, 1.253 * ds, 0.0),
        "x" => plus(&mut g.stroke, 1.253 * ds, 45.0),
        "asterisk" => {
            for a in [90.0, 210.0, 330.0] {
                g.stroke.move_to(V2::default());
                g.stroke.line_to(V2::polar(1.253 * ds, a));
            }
            g.stroke.move_to(V2::polar(1.253 * ds, 270.0));
            g.stroke.line_to(V2::default());
        }
        "oplus" | "otimes" => {
            g.fill = ellipse(o, ds, ds);
            if ds > c {
                g.inner = ellipse(o, ds - c, ds - c);
            }
            plus(&mut g.stroke, ds, if base == "oplus" { 0.0 } else { 45.0 });
        }
        "|" => {
            let h = (tbarsize.0 + clw.scale(tbarsize.1)).to_pt() / 2.0;
            g.stroke.move_to(V2::new(0.0, h));
            g.stroke.line_to(V2::new(0.0, -h));
        }
        _ => return None,
    }
    let m = Affine::rotate(angle).compose(Affine::scale(scale.0, scale.1));
    if !m.is_identity() {
        g = g.transform(&m);
    }
    Some(g)
}
