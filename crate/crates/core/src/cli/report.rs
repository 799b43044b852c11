//! Aligned-column plain-text rendering for CLI reports. Presentation only:
//! the JSON output is the machine interface.

pub fn render_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let render_row = |cells: Vec<String>, out: &mut String| {
        let line: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{c:<width$}", width = widths[i]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    };
    render_row(headers.iter().map(|h| h.to_string()).collect(), &mut out);
    for row in rows {
        render_row(row.clone(), &mut out);
    }
    out
}

pub fn fmt_num(v: f64) -> String {
    format!("{v:.6}")
}

/// Whole-percent change with explicit sign, e.g. "+65%" or "-39%".
pub fn fmt_percent(percent: f64) -> String {
    format!("{:+.0}%", percent.round())
}
