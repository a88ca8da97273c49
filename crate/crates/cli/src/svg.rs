//! Minimal SVG figures drawn from the CSV files a run has written.

use std::fmt::Write as _;

use crate::output::Table;

const WIDTH: f64 = 820.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f",
];

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".into()
    } else if (1e-2..1e4).contains(&a) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi <= lo {
            let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
            (lo, hi) = (lo - pad, hi + pad);
        }
        Self { lo, hi, log }
    }

    /// Position in `[0, 1]`.
    fn frac(&self, v: f64) -> f64 {
        if self.log {
            (v.ln() - self.lo.ln()) / (self.hi.ln() - self.lo.ln())
        } else {
            (v - self.lo) / (self.hi - self.lo)
        }
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo.log10().ceil() as i32, self.hi.log10().floor() as i32);
            let t: Vec<f64> = (a..=b).map(|k| 10f64.powi(k)).collect();
            if t.len() >= 2 {
                return t;
            }
            return vec![self.lo, self.hi];
        }
        (0..=4).map(|i| self.lo + (self.hi - self.lo) * i as f64 / 4.0).collect()
    }
}

fn header(s: &mut String, title: &str) {
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title)).unwrap();
}

fn frame(s: &mut String, x: &Axis, y: &Axis, x_label: &str, y_label: &str) {
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#).unwrap();
    for t in x.ticks() {
        let px = LEFT + x.frac(t) * pw;
        writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{0}" x2="{px:.2}" y2="{1}" stroke="black"/><text x="{px:.2}" y="{2}" text-anchor="middle">{3}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 19.0,
            tick_label(t)
        )
        .unwrap();
    }
    for t in y.ticks() {
        let py = TOP + (1.0 - y.frac(t)) * ph;
        writeln!(
            s,
            r#"<line x1="{0}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/><text x="{1}" y="{2:.2}" text-anchor="end">{3}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            py + 4.0,
            tick_label(t)
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    )
    .unwrap();
    writeln!(
        s,
        r#"<text transform="translate(20,{}) rotate(-90)" text-anchor="middle">{}</text>"#,
        TOP + ph / 2.0,
        escape(y_label)
    )
    .unwrap();
}

/// Every column after the first against the first.
pub fn line_plot(table: &Table, title: &str) -> String {
    let x = Axis::fit(table.rows.iter().map(|r| r[0]), false);
    let y = Axis::fit(table.rows.iter().flat_map(|r| r[1..].iter().copied()), false);
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let mut s = String::new();
    header(&mut s, title);
    frame(&mut s, &x, &y, &table.columns[0], "");
    for c in 1..table.columns.len() {
        let colour = PALETTE[(c - 1) % PALETTE.len()];
        let mut points = String::new();
        for r in table.rows.iter().filter(|r| r[0].is_finite() && r[c].is_finite()) {
            write!(points, "{:.2},{:.2} ", LEFT + x.frac(r[0]) * pw, TOP + (1.0 - y.frac(r[c])) * ph).unwrap();
        }
        writeln!(
            s,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            points.trim_end()
        )
        .unwrap();
        let ly = TOP + 10.0 + 18.0 * (c - 1) as f64;
        writeln!(
            s,
            r#"<line x1="{0}" y1="{ly}" x2="{1}" y2="{ly}" stroke="{colour}" stroke-width="2"/><text x="{2}" y="{3}">{4}</text>"#,
            WIDTH - RIGHT + 10.0,
            WIDTH - RIGHT + 30.0,
            WIDTH - RIGHT + 35.0,
            ly + 4.0,
            escape(&table.columns[c])
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

fn diverging(v: f64, scale: f64) -> String {
    let u = (v / scale).clamp(-1.0, 1.0);
    let (r, g, b) = if u >= 0.0 {
        (255.0, 255.0 * (1.0 - u), 255.0 * (1.0 - u))
    } else {
        (255.0 * (1.0 + u), 255.0 * (1.0 + u), 255.0)
    };
    format!("#{:02x}{:02x}{:02x}", r.round() as u8, g.round() as u8, b.round() as u8)
}

/// Heat map of column 2 over the (column 0, column 1) grid on log axes,
/// with the zero contour traced along cell edges. Rows must be ordered by
/// column 0, then column 1.
pub fn heatmap(table: &Table, title: &str) -> Result<String, String> {
    let mut xs: Vec<f64> = table.rows.iter().map(|r| r[0]).collect();
    xs.dedup();
    let ny = table.rows.len() / xs.len().max(1);
    if xs.is_empty() || ny < 2 || xs.len() * ny != table.rows.len() {
        return Err("regime table is not a full grid".into());
    }
    let ys: Vec<f64> = table.rows[..ny].iter().map(|r| r[1]).collect();
    let z = |i: usize, j: usize| table.rows[i * ny + j][2];

    // cell edges halfway (geometrically) between sample points
    let edges = |v: &[f64]| -> Vec<f64> {
        let n = v.len();
        let mut e = Vec::with_capacity(n + 1);
        e.push(v[0] * (v[0] / v[1]).sqrt());
        for k in 0..n - 1 {
            e.push((v[k] * v[k + 1]).sqrt());
        }
        e.push(v[n - 1] * (v[n - 1] / v[n - 2]).sqrt());
        e
    };
    if xs.len() < 2 {
        return Err("regime table needs at least two rows of the first column".into());
    }
    let xe = edges(&xs);
    let ye = edges(&ys);
    let x = Axis { lo: xe[0], hi: xe[xe.len() - 1], log: true };
    let y = Axis { lo: ye[0], hi: ye[ye.len() - 1], log: true };
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let px = |v: f64| LEFT + x.frac(v) * pw;
    let py = |v: f64| TOP + (1.0 - y.frac(v)) * ph;

    let scale = table
        .rows
        .iter()
        .map(|r| r[2].abs())
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max)
        .max(1e-12);

    let mut s = String::new();
    header(&mut s, title);
    for i in 0..xs.len() {
        for j in 0..ny {
            let v = z(i, j);
            let fill = if v.is_finite() { diverging(v, scale) } else { "#cccccc".into() };
            writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}" stroke="none"/>"#,
                px(xe[i]),
                py(ye[j + 1]),
                px(xe[i + 1]) - px(xe[i]) + 0.3,
                py(ye[j]) - py(ye[j + 1]) + 0.3
            )
            .unwrap();
        }
    }
    let mut path = String::new();
    for i in 0..xs.len() {
        for j in 0..ny {
            if i + 1 < xs.len() && (z(i, j) > 0.0) != (z(i + 1, j) > 0.0) {
                write!(path, "M{:.2},{:.2}V{:.2}", px(xe[i + 1]), py(ye[j]), py(ye[j + 1])).unwrap();
            }
            if j + 1 < ny && (z(i, j) > 0.0) != (z(i, j + 1) > 0.0) {
                write!(path, "M{:.2},{:.2}H{:.2}", px(xe[i]), py(ye[j + 1]), px(xe[i + 1])).unwrap();
            }
        }
    }
    if !path.is_empty() {
        writeln!(s, r#"<path d="{path}" fill="none" stroke="black" stroke-width="2" stroke-dasharray="6,3"/>"#).unwrap();
    }
    frame(&mut s, &x, &y, &table.columns[0], &table.columns[1]);

    // colour bar
    let bx = WIDTH - RIGHT + 30.0;
    for k in 0..100 {
        let v = scale * (1.0 - 2.0 * k as f64 / 99.0);
        writeln!(
            s,
            r#"<rect x="{bx}" y="{:.2}" width="18" height="{:.2}" fill="{}"/>"#,
            TOP + ph * k as f64 / 100.0,
            ph / 100.0 + 0.3,
            diverging(v, scale)
        )
        .unwrap();
    }
    for (v, yy) in [(scale, TOP), (0.0, TOP + ph / 2.0), (-scale, TOP + ph)] {
        writeln!(s, r#"<text x="{}" y="{:.2}">{}</text>"#, bx + 24.0, yy + 4.0, tick_label(v)).unwrap();
    }
    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        bx + 9.0,
        TOP - 8.0,
        escape(&table.columns[2])
    )
    .unwrap();
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heatmap_draws_contour() {
        let mut t = Table::new(["beta", "E_z_V_per_m", "ln_Q"]);
        for &b in &[0.1, 0.2, 0.4] {
            for &e in &[1e5, 1e6, 1e7] {
                t.push(vec![b, e, (1e6f64).ln() - e.ln() + 0.5]);
            }
        }
        let svg = heatmap(&t, "map").unwrap();
        assert!(svg.contains("stroke-dasharray"));
        assert_eq!(svg.matches("<rect").count(), 2 + 9 + 100);
    }

    #[test]
    fn line_plot_has_one_polyline_per_series() {
        let mut t = Table::new(["t_s", "a", "b"]);
        for i in 0..10 {
            let x = i as f64;
            t.push(vec![x, x.sin(), x.cos()]);
        }
        assert_eq!(line_plot(&t, "x").matches("<polyline").count(), 2);
    }
}
