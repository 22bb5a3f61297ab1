use std::fmt::Write;

/// How `run` prints a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    /// Aligned, human-oriented lines.
    Table,
    /// `scenario.quantity[label]=value`, one per line.
    Records,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub scenario: String,
    pub quantity: String,
    pub label: Option<String>,
    pub value: f64,
}

impl ReportRow {
    fn key(&self) -> String {
        match &self.label {
            Some(label) => format!("{}[{label}]", self.quantity),
            None => self.quantity.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub scenario: String,
    pub kind: String,
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn new(scenario: impl Into<String>, kind: impl Into<String>) -> Self {
        Self { scenario: scenario.into(), kind: kind.into(), rows: Vec::new() }
    }

    pub fn push(&mut self, quantity: &str, value: f64) {
        self.rows.push(ReportRow {
            scenario: self.scenario.clone(),
            quantity: quantity.to_string(),
            label: None,
            value,
        });
    }

    pub fn push_labeled(&mut self, quantity: &str, label: impl Into<String>, value: f64) {
        self.rows.push(ReportRow {
            scenario: self.scenario.clone(),
            quantity: quantity.to_string(),
            label: Some(label.into()),
            value,
        });
    }

    /// Pushes `quantity[0]`, `quantity[1]`, ….
    pub fn push_list(&mut self, quantity: &str, values: &[f64]) {
        for (k, v) in values.iter().enumerate() {
            self.push_labeled(quantity, k.to_string(), *v);
        }
    }

    pub fn get(&self, quantity: &str, label: Option<&str>) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.quantity == quantity && r.label.as_deref() == label)
            .map(|r| r.value)
    }

    pub fn render(&self, format: OutputFormat) -> String {
        let mut out = String::new();
        match format {
            OutputFormat::Table => {
                let _ = writeln!(out, "scenario: {} ({})", self.scenario, self.kind);
                for row in &self.rows {
                    let _ = writeln!(out, "  {}: {}", row.key(), table_value(row.value));
                }
            }
            OutputFormat::Records => {
                for row in &self.rows {
                    let _ = writeln!(out, "{}.{}={}", row.scenario, row.key(), row.value);
                }
            }
        }
        out
    }
}

fn table_value(v: f64) -> String {
    if v == 0.0 || v.abs() >= 1e-4 {
        format!("{v:.9}")
    } else {
        format!("{v:.9} ({v:.1e})")
    }
}
