use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use definetti::certifier::{
    check_chernoff_claim, check_exponent_sandwich, gentle_suite, verify, Instance, Status,
};
use definetti::haar::{exact_qubit_rule, integrate};
use definetti::linalg::Operator;
use definetti::symmetric::{sym_dim, symmetrizer};

use crate::error::CliError;
use crate::report::{write_csv, write_json, ReportRow};
use crate::spec::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Both,
}

pub fn run_rows(cfg: &RunConfig) -> Result<Vec<ReportRow>, CliError> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for (k, r) in cfg.cells() {
        let spec = cfg.rule_for(k);
        let rule = spec.build(cfg.d)?;
        let state = cfg.state.build(cfg.n + k, cfg.d)?;
        let inst = Instance::new(state, cfg.n, k, r, cfg.state.to_string())?;
        let report = verify(&inst, &rule, cfg.fallback_tol)?;
        eprintln!("{} n={} k={k} r={r}: {}", cfg.state, cfg.n, report.status);
        rows.push(ReportRow::new(&report, &cfg.state, &spec));
    }
    rows.sort_by_key(|row| (row.n, row.k, row.r));
    Ok(rows)
}

/// 1 on any violation, 2 on any inconclusive row otherwise, else 0.
pub fn status_exit_code(rows: &[ReportRow]) -> i32 {
    if rows.iter().any(|r| r.status == Status::Violation) {
        1
    } else if rows.iter().any(|r| r.status == Status::Inconclusive) {
        2
    } else {
        0
    }
}

pub fn emit(rows: &[ReportRow], output: Option<&Path>, format: Format) -> Result<(), CliError> {
    match (output, format) {
        (None, Format::Csv) => write_csv(io::stdout().lock(), rows),
        (None, Format::Json) => write_json(io::stdout().lock(), rows),
        (None, Format::Both) => Err(CliError::Usage("--format both needs --output".into())),
        (Some(path), Format::Csv) => write_file(path, |w| write_csv(w, rows)),
        (Some(path), Format::Json) => write_file(path, |w| write_json(w, rows)),
        (Some(path), Format::Both) => {
            write_file(path, |w| write_csv(w, rows))?;
            write_file(&json_sibling(path), |w| write_json(w, rows))
        }
    }
}

/// `out.csv` → `out.json`; a path already ending in `.json` gets `.json` appended.
pub fn json_sibling(path: &Path) -> PathBuf {
    if path.extension().is_some_and(|e| e == "json") {
        let mut s = path.as_os_str().to_owned();
        s.push(".json");
        PathBuf::from(s)
    } else {
        path.with_extension("json")
    }
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<(), CliError>) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct PropsConfig {
    pub max_sym_n: usize,
    pub gentle_pairs: usize,
    pub gentle_max_dim: usize,
    pub chernoff_max_n: usize,
    pub sandwich_max: u64,
    pub seed: u64,
}

/// Largest entrywise deviation of `c_{n,2} Σ_j w_j |θ_j⟩⟨θ_j|^{⊗n}` from the
/// symmetrizer, over `n = 1..=max_n`, with the exact rule of degree `n`.
pub fn post_selection_error(max_n: usize) -> Result<f64, CliError> {
    let mut worst: f64 = 0.0;
    for n in 1..=max_n {
        let c = sym_dim(n, 2)? as f64;
        let avg: Operator = integrate(&exact_qubit_rule(n), |t| t.power(n).expect("qubit power").density().scale(c));
        worst = worst.max(avg.max_abs_diff(&symmetrizer(n, 2)?)?);
    }
    Ok(worst)
}

/// Runs the property checks, printing one line each. Returns the exit code.
pub fn check_props(cfg: &PropsConfig, out: &mut impl Write) -> Result<i32, CliError> {
    let mut all = true;
    let mut line = |out: &mut dyn Write, name: String, slack: f64, ok: bool| -> io::Result<()> {
        all &= ok;
        writeln!(out, "{name:<40} slack={:>14} {}", crate::report::fmt_num(slack), if ok { "PASS" } else { "FAIL" })
    };

    let err = post_selection_error(cfg.max_sym_n)?;
    line(out, format!("post-selection d=2 n<={}", cfg.max_sym_n), 1e-11 - err, err <= 1e-11)?;

    let gentle = gentle_suite(cfg.gentle_pairs, cfg.gentle_max_dim, cfg.seed)?;
    line(out, format!("gentle-measurement pairs={}", cfg.gentle_pairs), gentle, gentle >= -1e-10)?;

    let (mut tail, mut entropy) = (f64::INFINITY, f64::INFINITY);
    for n in 1..=cfg.chernoff_max_n {
        for r in 1..=n {
            let c = check_chernoff_claim(n, r)?;
            tail = tail.min(c.tail_slack);
            entropy = entropy.min(c.entropy_slack);
        }
    }
    line(out, format!("chernoff-tail n<={}", cfg.chernoff_max_n), tail, tail >= -1e-12)?;
    line(out, format!("chernoff-entropy n<={}", cfg.chernoff_max_n), entropy, entropy >= -1e-12)?;

    let m = cfg.sandwich_max;
    let ok = check_exponent_sandwich((1..=m).flat_map(|n| (1..=m).map(move |k| (n, k))));
    line(out, format!("exponent-sandwich n,k<={m}"), if ok { 0.0 } else { -1.0 }, ok)?;

    Ok(if all { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::{RuleSpec, StateSpec};

    fn row(status: Status) -> ReportRow {
        ReportRow {
            d: 2,
            n: 1,
            k: 1,
            r: 1,
            state: "ghz".into(),
            lhs: 0.0,
            lhs_err: 0.0,
            chain_bound: 1.0,
            explicit_bound: 2.0,
            g_max: 0.25,
            fallback_nodes: 0,
            nodes: 1,
            seed: 0,
            status,
        }
    }

    #[test]
    fn exit_codes() {
        use Status::*;
        assert_eq!(status_exit_code(&[row(Pass), row(Pass)]), 0);
        assert_eq!(status_exit_code(&[row(Pass), row(Inconclusive)]), 2);
        assert_eq!(status_exit_code(&[row(Inconclusive), row(Violation)]), 1);
        assert_eq!(status_exit_code(&[row(Violation)]), 1);
    }

    #[test]
    fn json_paths() {
        assert_eq!(json_sibling(Path::new("out/run.csv")), PathBuf::from("out/run.json"));
        assert_eq!(json_sibling(Path::new("run")), PathBuf::from("run.json"));
        assert_eq!(json_sibling(Path::new("run.json")), PathBuf::from("run.json.json"));
    }

    #[test]
    fn bell_row() {
        let cfg = RunConfig {
            d: 2,
            n: 1,
            k_list: vec![1],
            r_list: vec![1],
            state: StateSpec::Ghz,
            rule: Some(RuleSpec::Exact(6)),
            fallback_tol: 1e-12,
            allow_large: false,
        };
        let rows = run_rows(&cfg).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].status, Status::Pass);
        assert!((rows[0].chain_bound - 6.0_f64.sqrt()).abs() < 1e-9);
        assert!(rows[0].lhs < 1e-8);
    }

    #[test]
    fn post_selection_small() {
        assert!(post_selection_error(4).unwrap() <= 1e-11);
    }
}
