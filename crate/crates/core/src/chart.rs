//! Minimal self-contained SVG bar charts for the stats reports. No external
//! renderer; just rects, axis lines, and labels.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fmt::format_num;

/// Write a vertical bar chart. Labels and values must align; output is
/// deterministic for identical inputs.
pub fn write_bar_chart(
    path: &Path,
    title: &str,
    labels: &[String],
    values: &[f64],
) -> Result<()> {
    if labels.len() != values.len() {
        return Err(Error::data(format!(
            "chart labels ({}) and values ({}) differ in length",
            labels.len(),
            values.len()
        )));
    }
    let n = labels.len().max(1);
    let bar_w = 18.0;
    let gap = 8.0;
    let margin_left = 60.0;
    let margin_bottom = 70.0;
    let margin_top = 40.0;
    let plot_h = 260.0;
    let width = margin_left + n as f64 * (bar_w + gap) + 20.0;
    let height = margin_top + plot_h + margin_bottom;
    let max_value = values.iter().cloned().fold(0.0f64, f64::max).max(1e-12);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.1}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
        margin_left,
        escape(title)
    ));
    // Axes.
    let base_y = margin_top + plot_h;
    svg.push_str(&format!(
        "  <line x1=\"{margin_left:.1}\" y1=\"{margin_top:.1}\" x2=\"{margin_left:.1}\" y2=\"{base_y:.1}\" stroke=\"black\"/>\n"
    ));
    svg.push_str(&format!(
        "  <line x1=\"{margin_left:.1}\" y1=\"{base_y:.1}\" x2=\"{:.1}\" y2=\"{base_y:.1}\" stroke=\"black\"/>\n",
        width - 10.0
    ));
    svg.push_str(&format!(
        "  <text x=\"4\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"10\">{}</text>\n",
        margin_top + 10.0,
        escape(&format_num(max_value))
    ));
    svg.push_str(&format!(
        "  <text x=\"4\" y=\"{base_y:.1}\" font-family=\"sans-serif\" font-size=\"10\">0</text>\n"
    ));
    for (i, (label, &value)) in labels.iter().zip(values).enumerate() {
        let h = (value.max(0.0) / max_value) * plot_h;
        let x = margin_left + gap / 2.0 + i as f64 * (bar_w + gap);
        let y = base_y - h;
        svg.push_str(&format!(
            "  <rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{bar_w:.1}\" height=\"{h:.1}\" fill=\"#4878a8\"/>\n"
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"9\" transform=\"rotate(45 {:.1} {:.1})\">{}</text>\n",
            x,
            base_y + 12.0,
            x,
            base_y + 12.0,
            escape(label)
        ));
    }
    svg.push_str("</svg>\n");
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(svg.as_bytes()).map_err(|e| Error::io(path, e))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_wellformed_svg() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("chart.svg");
        let labels: Vec<String> = ["NN", "VB<>&"].iter().map(|s| s.to_string()).collect();
        write_bar_chart(&path, "tag totals", &labels, &[10.0, 3.0]).unwrap();
        let content = std::fs::read_to_string(&path).unwrap();
        assert!(content.starts_with("<svg"));
        assert!(content.ends_with("</svg>\n"));
        assert!(content.contains("VB&lt;&gt;&amp;"));
        assert_eq!(content.matches("<rect").count(), 2);
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("chart.svg");
        assert!(write_bar_chart(&path, "x", &["a".to_string()], &[]).is_err());
    }
}
