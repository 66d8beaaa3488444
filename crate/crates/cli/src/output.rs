use std::fmt::Write as _;

use clap::ValueEnum;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
    Pretty,
}

/// Result of a subcommand: the JSON document plus a flat table for the
/// line-oriented formats.
pub struct Report {
    pub json: Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Trailing summary line for `pretty`.
    pub summary: Option<String>,
    /// Whether every check in the report passed.
    pub ok: bool,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("serializable");
                s.push('\n');
                s
            }
            Format::Tsv => {
                let mut s = self.header.join("\t");
                s.push('\n');
                for r in &self.rows {
                    s.push_str(&r.join("\t"));
                    s.push('\n');
                }
                s
            }
            Format::Pretty => {
                let mut widths: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
                for r in &self.rows {
                    for (w, c) in widths.iter_mut().zip(r) {
                        *w = (*w).max(c.chars().count());
                    }
                }
                let mut s = String::new();
                let line = |cells: Vec<&str>, s: &mut String| {
                    let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
                    let _ = writeln!(s, "{}", padded.join("  ").trim_end());
                };
                line(self.header.clone(), &mut s);
                line(widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(|x| x.as_str()).collect(), &mut s);
                for r in &self.rows {
                    line(r.iter().map(|x| x.as_str()).collect(), &mut s);
                }
                if let Some(sum) = &self.summary {
                    let _ = writeln!(s, "\n{sum}");
                }
                s
            }
        }
    }
}

pub fn pass_fail(ok: bool) -> String {
    if ok { "pass" } else { "fail" }.to_string()
}
