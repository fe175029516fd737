//! JSON reports and text rendering. Numbers always use the shortest decimal
//! form that parses back to the same `f64`.

use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct Report {
    pub function: String,
    pub mode: &'static str,
    pub point: Vec<f64>,
    pub seed: Vec<f64>,
    pub value: Vec<f64>,
    pub derivative: Derivative,
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum Derivative {
    /// Forward and reverse: one row. Jacobian: one row per output. Tower:
    /// `f, f′, …` per output.
    Rows(Vec<Vec<f64>>),
    Partials(Vec<Partial>),
}

#[derive(Debug, Serialize)]
pub struct Partial {
    pub output: usize,
    pub multi_index: Vec<usize>,
    pub value: f64,
}

#[derive(Debug, Serialize)]
pub struct BenchReport {
    pub function: String,
    pub mode: &'static str,
    pub counts: Counts,
}

#[derive(Debug, Serialize)]
pub struct Counts {
    pub scenario: String,
    pub rows: Vec<CountRow>,
}

#[derive(Debug, Serialize)]
pub struct CountRow {
    pub n: u64,
    pub symbolic: u64,
    pub ad: u64,
    pub closed_form_symbolic: u64,
    pub closed_form_ad: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symbolic_unfactored: Option<u64>,
}

pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn list(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|&x| num(x)).collect();
    format!("[{}]", items.join(", "))
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\nmode: {}\npoint: {}\n", self.function, self.mode, list(&self.point));
        let seed_name = match self.mode {
            "forward" => Some("direction"),
            "reverse" => Some("covector"),
            _ => None,
        };
        if let Some(name) = seed_name {
            out += &format!("{name}: {}\n", list(&self.seed));
        }
        out += &format!("value: {}\n", list(&self.value));
        match (&self.derivative, self.mode) {
            (Derivative::Rows(rows), "forward") => out += &format!("tangent: {}\n", list(&rows[0])),
            (Derivative::Rows(rows), "reverse") => out += &format!("gradient: {}\n", list(&rows[0])),
            (Derivative::Rows(rows), "tower") => {
                for (j, row) in rows.iter().enumerate() {
                    out += &format!("output {}:\n", j + 1);
                    for (k, d) in row.iter().enumerate() {
                        out += &format!("  d^{k}  {}\n", num(*d));
                    }
                }
            }
            (Derivative::Rows(rows), _) => {
                out += "jacobian:\n";
                for row in rows {
                    out += &format!("  {}\n", list(row));
                }
            }
            (Derivative::Partials(partials), _) => {
                out += "partials:\n";
                for p in partials {
                    let k: Vec<String> = p.multi_index.iter().map(usize::to_string).collect();
                    out += &format!("  output {}  ({})  {}\n", p.output + 1, k.join(","), num(p.value));
                }
            }
        }
        out
    }
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn to_text(&self) -> String {
        let header = ["n", "symbolic", "ad", "closed_form_symbolic", "closed_form_ad"];
        let mut rows: Vec<[String; 5]> = vec![header.map(String::from)];
        for r in &self.counts.rows {
            rows.push([r.n, r.symbolic, r.ad, r.closed_form_symbolic, r.closed_form_ad].map(|v| v.to_string()));
        }
        let widths: Vec<usize> = (0..5).map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
        let mut out = format!("scenario: {}\n", self.counts.scenario);
        for r in &rows {
            let cells: Vec<String> = r.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect();
            out += cells.join("  ").trim_end();
            out += "\n";
        }
        if let Some(Some(u)) = self.counts.rows.last().map(|r| r.symbolic_unfactored) {
            out += &format!("symbolic count without factoring out the shared derivative: 3n ({u} at the last row)\n");
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["n", "symbolic", "ad", "closed_form_symbolic", "closed_form_ad"])
            .expect("in-memory write");
        for r in &self.counts.rows {
            w.write_record([r.n, r.symbolic, r.ad, r.closed_form_symbolic, r.closed_form_ad].map(|v| v.to_string()))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }
}
