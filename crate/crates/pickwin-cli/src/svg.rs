//! Self-contained SVG rendering of a performance curve: cumulative exits of
//! the selected portfolio against the random and perfect baselines, by
//! portfolio size. No external assets, fonts, or scripts — the file is a
//! plain static vector image.

use pickwin::portfolio::CurvePoint;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 616.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 368.0;

/// A tick step of 1, 2 or 5 times a power of ten, targeting about 8 ticks.
fn tick_step(max: f64) -> f64 {
    let raw = (max / 8.0).max(1e-9);
    let mag = 10f64.powf(raw.log10().floor());
    for m in [1.0, 2.0, 5.0, 10.0] {
        if mag * m >= raw {
            return mag * m;
        }
    }
    mag * 10.0
}

fn polyline(points: &[(f64, f64)], style: &str) -> String {
    let coords: Vec<String> = points.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
    format!("  <polyline fill=\"none\" {style} points=\"{}\"/>\n", coords.join(" "))
}

/// Renders the curve to an SVG document string. The curve must be nonempty.
pub fn render_curve(curve: &[CurvePoint]) -> String {
    assert!(!curve.is_empty(), "cannot render an empty curve");
    let x_max = curve.last().unwrap().size as f64;
    let y_max = curve
        .iter()
        .map(|p| (p.perfect as f64).max(p.exits as f64).max(p.random_baseline))
        .fold(1.0f64, f64::max);
    let sx = |v: f64| LEFT + (RIGHT - LEFT) * v / x_max;
    let sy = |v: f64| BOTTOM - (BOTTOM - TOP) * v / y_max;

    let mut s = String::with_capacity(8 * 1024);
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    s.push_str("  <title>Portfolio performance curve</title>\n");
    s.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>\n"
    ));

    // Axes and grid.
    let x_step = tick_step(x_max);
    let y_step = tick_step(y_max);
    let mut t = 0.0;
    while t <= x_max + 1e-9 {
        let x = sx(t);
        s.push_str(&format!(
            "  <line x1=\"{x:.1}\" y1=\"{TOP}\" x2=\"{x:.1}\" y2=\"{BOTTOM}\" \
             stroke=\"#e3e3e3\" stroke-width=\"1\"/>\n"
        ));
        s.push_str(&format!(
            "  <text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\" fill=\"#333333\">{t:.0}</text>\n",
            BOTTOM + 18.0
        ));
        t += x_step;
    }
    let mut t = 0.0;
    while t <= y_max + 1e-9 {
        let y = sy(t);
        s.push_str(&format!(
            "  <line x1=\"{LEFT}\" y1=\"{y:.1}\" x2=\"{RIGHT}\" y2=\"{y:.1}\" \
             stroke=\"#e3e3e3\" stroke-width=\"1\"/>\n"
        ));
        s.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" fill=\"#333333\">{t:.0}</text>\n",
            LEFT - 8.0,
            y + 4.0
        ));
        t += y_step;
    }
    s.push_str(&format!(
        "  <line x1=\"{LEFT}\" y1=\"{BOTTOM}\" x2=\"{RIGHT}\" y2=\"{BOTTOM}\" \
         stroke=\"#333333\" stroke-width=\"1.5\"/>\n\
         \x20 <line x1=\"{LEFT}\" y1=\"{TOP}\" x2=\"{LEFT}\" y2=\"{BOTTOM}\" \
         stroke=\"#333333\" stroke-width=\"1.5\"/>\n"
    ));
    s.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" fill=\"#111111\">portfolio size</text>\n",
        (LEFT + RIGHT) / 2.0,
        HEIGHT - 8.0
    ));
    s.push_str(&format!(
        "  <text x=\"14\" y=\"{:.1}\" text-anchor=\"middle\" fill=\"#111111\" \
         transform=\"rotate(-90 14 {:.1})\">cumulative exits</text>\n",
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0
    ));

    // Series: each starts at the origin (an empty portfolio has no exits).
    let mut selected = vec![(sx(0.0), sy(0.0))];
    let mut random = vec![(sx(0.0), sy(0.0))];
    let mut perfect = vec![(sx(0.0), sy(0.0))];
    for p in curve {
        let x = p.size as f64;
        selected.push((sx(x), sy(p.exits as f64)));
        random.push((sx(x), sy(p.random_baseline)));
        perfect.push((sx(x), sy(p.perfect as f64)));
    }
    s.push_str(&polyline(
        &perfect,
        "stroke=\"#4d4d4d\" stroke-width=\"1.5\" stroke-dasharray=\"2,4\"",
    ));
    s.push_str(&polyline(
        &random,
        "stroke=\"#b2182b\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"",
    ));
    s.push_str(&polyline(&selected, "stroke=\"#1a6fb5\" stroke-width=\"2\""));
    for (x, y) in &selected[1..] {
        s.push_str(&format!(
            "  <circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"2.5\" fill=\"#1a6fb5\"/>\n"
        ));
    }

    // Legend.
    let (lx, ly) = (LEFT + 14.0, TOP + 10.0);
    for (i, (style, label)) in [
        ("stroke=\"#1a6fb5\" stroke-width=\"2\"", "selected portfolio"),
        ("stroke=\"#b2182b\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"", "random"),
        ("stroke=\"#4d4d4d\" stroke-width=\"1.5\" stroke-dasharray=\"2,4\"", "perfect"),
    ]
    .iter()
    .enumerate()
    {
        let y = ly + 16.0 * i as f64;
        s.push_str(&format!(
            "  <line x1=\"{lx}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" {style}/>\n",
            lx + 26.0
        ));
        s.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" fill=\"#111111\">{label}</text>\n",
            lx + 32.0,
            y + 4.0
        ));
    }
    s.push_str("</svg>\n");
    s
}
