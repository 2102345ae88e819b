//! Minimal hand-rolled SVG bar charts for report output.

/// One bar of a chart.
#[derive(Debug, Clone)]
pub struct Bar {
    pub label: String,
    pub value: f64,
    pub color: &'static str,
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders a fixed-layout bar chart. Values are clamped to `[0, max_value]`
/// and the axis is drawn from 0 to `max_value` with quarter gridlines.
pub fn bar_chart(title: &str, bars: &[Bar], max_value: f64) -> String {
    const BAR_WIDTH: f64 = 72.0;
    const GAP: f64 = 28.0;
    const LEFT: f64 = 64.0;
    const TOP: f64 = 48.0;
    const PLOT_HEIGHT: f64 = 260.0;
    const BOTTOM: f64 = 56.0;

    let max_value = if max_value > 0.0 { max_value } else { 1.0 };
    let width = LEFT + bars.len() as f64 * (BAR_WIDTH + GAP) + GAP;
    let height = TOP + PLOT_HEIGHT + BOTTOM;
    let baseline = TOP + PLOT_HEIGHT;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\">\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
        width / 2.0,
        escape(title)
    ));
    for step in 0..=4 {
        let fraction = step as f64 / 4.0;
        let y = baseline - fraction * PLOT_HEIGHT;
        svg.push_str(&format!(
            "  <line x1=\"{LEFT:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" \
             stroke=\"#ccc\" stroke-width=\"1\"/>\n",
            width - GAP
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"end\">{:.2}</text>\n",
            LEFT - 8.0,
            y + 4.0,
            fraction * max_value
        ));
    }
    for (i, bar) in bars.iter().enumerate() {
        let clamped = bar.value.clamp(0.0, max_value);
        let bar_height = clamped / max_value * PLOT_HEIGHT;
        let x = LEFT + GAP + i as f64 * (BAR_WIDTH + GAP);
        let y = baseline - bar_height;
        svg.push_str(&format!(
            "  <rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{BAR_WIDTH:.1}\" height=\"{bar_height:.1}\" \
             fill=\"{}\"/>\n",
            bar.color
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">{:.4}</text>\n",
            x + BAR_WIDTH / 2.0,
            y - 6.0,
            bar.value
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            x + BAR_WIDTH / 2.0,
            baseline + 18.0,
            escape(&bar.label)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
