use std::fmt::Write as _;
use std::io::Write as _;

use ierk_core::{certify, check_order, ConditionResult, StabilityReport, Tableau};
use serde::Serialize;

use crate::config;
use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize)]
pub struct TableauReport {
    pub name: String,
    pub label: String,
    pub parameter_name: Option<&'static str>,
    pub parameter: Option<f64>,
    pub claimed_order: usize,
    pub certified_order: usize,
    pub c: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub a_hat: Vec<Vec<f64>>,
    pub conditions: Vec<ConditionResult>,
    pub stability: StabilityReport,
    pub positive_definite_range: &'static str,
    pub structure_violations: Vec<String>,
}

fn rows(tab: &Tableau, explicit: bool) -> Vec<Vec<f64>> {
    let m = if explicit { tab.a_hat() } else { tab.a() };
    (0..tab.stages())
        .map(|i| (0..tab.stages()).map(|j| m[(i, j)]).collect())
        .collect()
}

impl TableauReport {
    pub fn new(tab: &Tableau) -> CliResult<Self> {
        let family = tab.family();
        Ok(Self {
            name: tab.name().to_string(),
            label: tab.label(),
            parameter_name: family.and_then(|f| f.parameter_name()),
            parameter: tab.parameter(),
            claimed_order: tab.order(),
            certified_order: certify(tab),
            c: tab.c().iter().copied().collect(),
            a: rows(tab, false),
            a_hat: rows(tab, true),
            conditions: check_order(tab, tab.order().clamp(1, 4))?,
            stability: tab.stability_report(),
            positive_definite_range: family.map_or("", |f| f.positive_definite_range()),
            structure_violations: tab.validate(),
        })
    }

    pub fn certified(&self) -> bool {
        self.certified_order == self.claimed_order && self.structure_violations.is_empty()
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.label);
        if let (Some(n), Some(p)) = (self.parameter_name, self.parameter) {
            let _ = writeln!(s, "parameter        {n} = {p}");
        }
        let _ = writeln!(s, "claimed order    {}", self.claimed_order);
        let _ = writeln!(s, "certified order  {}", self.certified_order);
        let _ = writeln!(s, "\nc");
        let _ = writeln!(s, "  {}", fmt_row(&self.c));
        let _ = writeln!(s, "\nA (implicit)");
        for r in &self.a {
            let _ = writeln!(s, "  {}", fmt_row(r));
        }
        let _ = writeln!(s, "\nA_hat (explicit)");
        for r in &self.a_hat {
            let _ = writeln!(s, "  {}", fmt_row(r));
        }
        let _ = writeln!(s, "\norder conditions");
        for c in &self.conditions {
            let _ = writeln!(
                s,
                "  p={} {:<9} {}{} lhs {:>+.15e}  residual {:.2e}",
                c.order,
                format!("{:?}", c.kind).to_lowercase(),
                c.label,
                " ".repeat(22usize.saturating_sub(display_width(&c.label))),
                c.lhs,
                c.residual
            );
        }
        for v in &self.structure_violations {
            let _ = writeln!(s, "  structure: {v}");
        }
        let st = &self.stability;
        let _ = writeln!(s, "\nstability");
        let _ = writeln!(s, "  lambda_I  {:+.6e}", st.lambda_i);
        let _ = writeln!(s, "  sigma_I   {:+.6e}", st.sigma_i);
        let _ = writeln!(s, "  sigma_E   {:+.6e}", st.sigma_e);
        let _ = writeln!(s, "  positive definite: {}", st.positive_definite);
        if !self.positive_definite_range.is_empty() {
            let _ = writeln!(s, "  positive-definite range: {}", self.positive_definite_range);
        }
        s
    }
}

/// Character count without combining marks.
fn display_width(s: &str) -> usize {
    s.chars().filter(|c| !('\u{0300}'..='\u{036f}').contains(c)).count()
}

fn fmt_row(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:>12.8}")).collect::<Vec<_>>().join(" ")
}

/// Prints the report; fails unless the order certifies and the tableau is
/// positive definite (the latter is waived by `allow_unstable`).
pub fn run(name: &str, param: Option<f64>, json: bool, allow_unstable: bool) -> CliResult<()> {
    let tab = config::tableau(name, param, true)?;
    let report = TableauReport::new(&tab)?;
    let text = if json {
        serde_json::to_string_pretty(&report)? + "\n"
    } else {
        report.text()
    };
    std::io::stdout().lock().write_all(text.as_bytes())?;
    if !report.certified() {
        return Err(CliError::Validation(format!(
            "{}: certified order {} differs from claimed order {}",
            report.label, report.certified_order, report.claimed_order
        )));
    }
    if allow_unstable {
        if !report.stability.positive_definite {
            eprintln!("warning: {} is outside positive-definite range", report.label);
        }
        return Ok(());
    }
    config::check_admissible(&tab)
}
