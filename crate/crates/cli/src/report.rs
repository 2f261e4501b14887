/// Plain-text table: first column left-aligned, the rest right-aligned.
pub fn table(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut width = vec![0; cols];
    for row in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        for (c, cell) in row.iter().enumerate() {
            width[c] = width[c].max(cell.chars().count());
        }
    }
    let line = |row: &[String]| {
        let mut s = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c == 0 {
                s.push_str(&format!("{cell:<w$}", w = width[0]));
            } else {
                s.push_str(&format!("  {cell:>w$}", w = width[c]));
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(header);
    out.push_str(&"-".repeat(width.iter().sum::<usize>() + 2 * (cols - 1)));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row));
    }
    out
}

pub fn fixed(v: f64) -> String {
    format!("{v:.3}")
}
