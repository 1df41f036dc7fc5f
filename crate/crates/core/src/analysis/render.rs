use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::ErrorTable;
use crate::expr::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableStyle {
    Plain,
    Csv,
    Latex,
}

/// Exact decimal text when the expansion terminates, `p/q` otherwise.
pub fn rational_to_decimal(q: &Rational) -> String {
    let (num, den) = (q.numer(), q.denom());
    let mut d = den.clone();
    let (mut twos, mut fives) = (0u32, 0u32);
    while (&d % 2u32).is_zero() {
        d /= 2u32;
        twos += 1;
    }
    while (&d % 5u32).is_zero() {
        d /= 5u32;
        fives += 1;
    }
    if d != BigInt::from(1) {
        return format!("{num}/{den}");
    }
    let places = twos.max(fives);
    let scaled = num.abs() * num_traits::pow(BigInt::from(10), places as usize) / den;
    let digits = scaled.to_string();
    let sign = if num.is_negative() { "-" } else { "" };
    if places == 0 {
        return format!("{sign}{digits}");
    }
    let padded = format!("{digits:0>width$}", width = places as usize + 1);
    let (int, frac) = padded.split_at(padded.len() - places as usize);
    format!("{sign}{int}.{frac}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Renders an error table with `significant` digits per cell.
pub fn render_table(table: &ErrorTable, style: TableStyle, significant: usize) -> String {
    let grid = &table.grid;
    let mut rows: Vec<Vec<String>> = Vec::with_capacity(grid.row.values.len() + 1);
    let mut header = vec![grid.label()];
    header.extend(grid.col.values.iter().map(rational_to_decimal));
    rows.push(header);
    for (i, r) in grid.row.values.iter().enumerate() {
        let mut row = vec![rational_to_decimal(r)];
        row.extend(table.values[i].iter().map(|v| v.to_scientific(significant)));
        rows.push(row);
    }

    match style {
        TableStyle::Csv => rows
            .iter()
            .map(|r| r.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(",") + "\n")
            .collect(),
        TableStyle::Plain => {
            let cols = rows[0].len();
            let widths: Vec<usize> = (0..cols)
                .map(|j| rows.iter().map(|r| r[j].len()).max().unwrap_or(0))
                .collect();
            rows.iter()
                .map(|r| {
                    let line = r
                        .iter()
                        .zip(&widths)
                        .map(|(c, w)| format!("{c:>w$}"))
                        .collect::<Vec<_>>()
                        .join("  ");
                    line + "\n"
                })
                .collect()
        }
        TableStyle::Latex => {
            let cols = rows[0].len();
            let mut out = format!("\\begin{{tabular}}{{{}}}\n\\hline\n", "c".repeat(cols));
            for (i, r) in rows.iter().enumerate() {
                let cells: Vec<String> = r
                    .iter()
                    .enumerate()
                    .map(|(j, c)| if i > 0 && j > 0 { latex_number(c) } else { format!("${c}$") })
                    .collect();
                out += &cells.join(" & ");
                out += " \\\\\n";
                if i == 0 {
                    out += "\\hline\n";
                }
            }
            out + "\\hline\n\\end{tabular}\n"
        }
    }
}

/// `1.2345E-7` becomes `$1.2345\times 10^{-7}$`.
fn latex_number(s: &str) -> String {
    match s.split_once('E') {
        Some((m, e)) => format!("${m}\\times 10^{{{}}}$", e.trim_start_matches('+')),
        None => format!("${s}$"),
    }
}
