//! Independent reference implementations used to freeze expected values.

/// Read `digits` after the point back into sp: floor(D·2^16/10^k + 1/2).
pub fn read_fraction(digits: &str) -> i64 {
    if digits.is_empty() {
        return 0;
    }
    let d: u128 = digits.parse().unwrap();
    let p = 10u128.pow(digits.len() as u32);
    ((d * 65536 * 2 + p) / (2 * p)) as i64
}

/// Dimension printer defined by its contract: the shortest fraction that
/// reads back to the same sp value, nearest to the true value on ties.
pub fn print_dimen(x: i64) -> String {
    let sign = if x < 0 { "-" } else { "" };
    let a = x.unsigned_abs() as i64;
    let (ip, f) = (a / 65536, a % 65536);
    for k in 1..=6u32 {
        let p = 10i128.pow(k);
        let exact = f as i128 * p; // numerator over 65536
        let lo = exact / 65536;
        let mut best: Option<(i128, i128)> = None;
        for cand in [lo, lo + 1] {
            if cand >= p {
                continue;
            }
            let s = format!("{:0width$}", cand, width = k as usize);
            if read_fraction(&s) == f {
                let err = (cand * 65536 - exact).abs();
                if best.is_none_or(|(_, e)| err <= e) {
                    best = Some((cand, err));
                }
            }
        }
        if let Some((c, _)) = best {
            return format!("{sign}{ip}.{:0width$}", c, width = k as usize);
        }
    }
    unreachable!("no decimal reads back to {x}")
}

/// Step simulation of the guarded division macro.
pub fn sim_divide(a: i64, b: i64) -> Option<i64> {
    let (mut g, mut c) = (a, b);
    let mut round = 0;
    while round < 4 {
        if -67108863 < g && g < 67108863 {
            g *= 16;
        } else {
            c = if c < 0 { -((-c) / 16) } else { c / 16 };
        }
        round += 1;
    }
    if c == 0 {
        return None;
    }
    let q = g.abs() / c.abs();
    Some(if (g < 0) != (c < 0) { -q } else { q })
}

/// `<fixed-point factor g> × <dimen v>` as the scanner reads a printed factor.
fn sim_mul(g: i64, v: i64) -> i64 {
    let ga = g.abs();
    let (n, f) = (ga >> 16, ga & 0xffff);
    let frac = (v.abs() * f) >> 16;
    let r = n * v + if v < 0 { -frac } else { frac };
    if g < 0 {
        -r
    } else {
        r
    }
}

/// Step simulation of the hypotenuse macro.
pub fn sim_pyth(a: i64, b: i64) -> Option<i64> {
    let pt = 65536;
    let dima0 = a.abs();
    let dimb = b.abs() + dima0;
    if dimb == 0 {
        return Some(0);
    }
    let mut dimg = sim_divide(8 * dima0, dimb)?;
    dimg -= 4 * pt;
    dimg *= 2;
    let mut dima = sim_mul(dimg, dimg);
    dima += 64 * pt;
    dima /= 2;
    let mut dimd = 7 * pt;
    for _ in 0..3 {
        dimg = sim_divide(dima, dimd)?;
        dimd += dimg;
        dimd /= 2;
    }
    Some(sim_mul(dimd, dimb) / 8)
}

/// Maximum radial deviation of a cubic from a circle, by dense sampling.
pub fn cubic_radial_error(p: [(f64, f64); 4], cx: f64, cy: f64, r: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..=400 {
        let t = i as f64 / 400.0;
        let u = 1.0 - t;
        let x = u * u * u * p[0].0 + 3.0 * u * u * t * p[1].0 + 3.0 * u * t * t * p[2].0 + t * t * t * p[3].0;
        let y = u * u * u * p[0].1 + 3.0 * u * u * t * p[1].1 + 3.0 * u * t * t * p[2].1 + t * t * t * p[3].1;
        worst = worst.max(((x - cx).hypot(y - cy) - r).abs());
    }
    worst
}

/// Main and sub line counts for a grid over integer spans.
pub fn grid_counts(nx: i64, ny: i64, div: i64) -> (i64, i64) {
    let main = (nx.abs() + 1) + (ny.abs() + 1);
    let sub = if div > 1 { (div - 1) * (nx.abs() + ny.abs()) } else { 0 };
    if nx == 0 && ny == 0 {
        return (0, 0);
    }
    (main, sub)
}
