//! Minimal self-contained SVG line charts; identical input produces
//! identical bytes.

pub struct Series<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
}

const COLORS: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 54.0;

pub fn emit_plot(title: &str, series: &[Series<'_>], path: &std::path::Path) -> std::io::Result<()> {
    assert!(
        series.iter().any(|s| !s.points.is_empty()),
        "emit_plot needs at least one point"
    );
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for s in series {
        for &(x, y) in &s.points {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
    }
    if xmax == xmin {
        xmax = xmin + 1.0;
    }
    if ymax == ymin {
        ymax = ymin + 1.0;
    }
    let sx = |x: f64| MARGIN + (x - xmin) / (xmax - xmin) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - ymin) / (ymax - ymin) * (H - 2.0 * MARGIN);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.6}\" y=\"24\" font-family=\"monospace\" font-size=\"14\" \
         text-anchor=\"middle\">{}</text>\n",
        W / 2.0,
        xml_escape(title)
    ));
    // axes
    svg.push_str(&format!(
        "<line x1=\"{m:.6}\" y1=\"{b:.6}\" x2=\"{r:.6}\" y2=\"{b:.6}\" stroke=\"black\"/>\n\
         <line x1=\"{m:.6}\" y1=\"{t:.6}\" x2=\"{m:.6}\" y2=\"{b:.6}\" stroke=\"black\"/>\n",
        m = MARGIN,
        r = W - MARGIN,
        t = MARGIN,
        b = H - MARGIN,
    ));
    for (label, x, y, anchor) in [
        (format!("{xmin:.4}"), MARGIN, H - MARGIN + 16.0, "middle"),
        (format!("{xmax:.4}"), W - MARGIN, H - MARGIN + 16.0, "middle"),
        (format!("{ymin:.4}"), MARGIN - 6.0, H - MARGIN, "end"),
        (format!("{ymax:.4}"), MARGIN - 6.0, MARGIN + 4.0, "end"),
    ] {
        svg.push_str(&format!(
            "<text x=\"{x:.6}\" y=\"{y:.6}\" font-family=\"monospace\" font-size=\"11\" \
             text-anchor=\"{anchor}\">{label}</text>\n"
        ));
    }
    for (si, s) in series.iter().enumerate() {
        let color = COLORS[si % COLORS.len()];
        if s.points.len() > 1 {
            let pts: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| format!("{:.6},{:.6}", sx(x), sy(y)))
                .collect();
            svg.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                pts.join(" ")
            ));
        }
        for &(x, y) in &s.points {
            svg.push_str(&format!(
                "<circle cx=\"{:.6}\" cy=\"{:.6}\" r=\"3\" fill=\"{color}\"/>\n",
                sx(x),
                sy(y)
            ));
        }
        // legend entry
        let ly = MARGIN + 16.0 * si as f64;
        svg.push_str(&format!(
            "<rect x=\"{:.6}\" y=\"{:.6}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n\
             <text x=\"{:.6}\" y=\"{:.6}\" font-family=\"monospace\" font-size=\"11\">{}</text>\n",
            W - MARGIN - 150.0,
            ly,
            W - MARGIN - 136.0,
            ly + 9.0,
            xml_escape(s.name)
        ));
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
