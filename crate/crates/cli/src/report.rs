use std::io::Write;

use definetti::certifier::{Status, VerificationReport};
use serde::Serialize;

use crate::error::CliError;
use crate::spec::{RuleSpec, StateSpec};

pub const HEADER: [&str; 14] = [
    "d",
    "n",
    "k",
    "r",
    "state",
    "lhs",
    "lhs_err",
    "chain_bound",
    "explicit_bound",
    "g_max",
    "fallback_nodes",
    "nodes",
    "seed",
    "status",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub d: usize,
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub state: String,
    pub lhs: f64,
    pub lhs_err: f64,
    pub chain_bound: f64,
    pub explicit_bound: f64,
    pub g_max: f64,
    pub fallback_nodes: usize,
    pub nodes: usize,
    pub seed: u64,
    pub status: Status,
}

impl ReportRow {
    pub fn new(report: &VerificationReport, state: &StateSpec, rule: &RuleSpec) -> Self {
        ReportRow {
            d: report.d,
            n: report.n,
            k: report.k,
            r: report.r,
            state: state.to_string(),
            lhs: report.lhs,
            lhs_err: report.lhs_integration_error,
            chain_bound: report.chain_bound,
            explicit_bound: report.explicit_bound,
            g_max: report.g_max_value,
            fallback_nodes: report.fallback_node_count,
            nodes: report.node_count,
            seed: rule.seed(),
            status: report.status,
        }
    }

    pub fn record(&self) -> Vec<String> {
        vec![
            self.d.to_string(),
            self.n.to_string(),
            self.k.to_string(),
            self.r.to_string(),
            self.state.clone(),
            fmt_num(self.lhs),
            fmt_num(self.lhs_err),
            fmt_num(self.chain_bound),
            fmt_num(self.explicit_bound),
            fmt_num(self.g_max),
            self.fallback_nodes.to_string(),
            self.nodes.to_string(),
            self.seed.to_string(),
            self.status.to_string(),
        ]
    }
}

/// `%.12g`: 12 significant digits, ties to even, trailing zeros dropped.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs());
    }
    trim_zeros(&format!("{x:.*}", (11 - exp) as usize)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_csv<W: Write>(out: W, rows: &[ReportRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(mut out: W, rows: &[ReportRow]) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    writeln!(out)?;
    Ok(())
}
