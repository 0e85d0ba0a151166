use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context as _, Result};
use bumpcert_core::gauge::GaugeSpec;
use serde::{Deserialize, Serialize};

use crate::suites::{Context, Row, Suite};

const HIST_BINS: usize = 20;
const LISTED_FAILURES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeEcho {
    pub depth: usize,
    pub branching: usize,
    pub leaves: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub suite: Suite,
    pub relation: String,
    pub trials: u64,
    pub seed: u64,
    pub tolerance: f64,
    pub config_hash: String,
    pub gauges: [GaugeSpec; 2],
    pub lattice: LatticeEcho,
    /// Smallest `lhs − rhs`.
    pub min_slack: Option<f64>,
    /// Smallest `(lhs − rhs)/(1 + |rhs|)`.
    pub min_relative_slack: Option<f64>,
    pub worst_trial: Option<u64>,
    pub max_ratio: Option<f64>,
    pub bound: Option<f64>,
    pub failures: u64,
    pub failing: Vec<Row>,
    pub pass: bool,
}

pub struct RunReport {
    pub rows: Vec<Row>,
    pub summary: RunSummary,
    pub ledger: Option<String>,
}

impl RunReport {
    pub fn new(ctx: &Context, rows: Vec<Row>, ledger: Option<String>) -> Self {
        let rel = |r: &Row| r.slack / (1.0 + r.rhs.abs());
        let finite = rows.iter().filter(|r| r.slack.is_finite());
        let worst = finite.clone().min_by(|a, b| rel(a).total_cmp(&rel(b)));
        let min_slack = finite.clone().map(|r| r.slack).min_by(f64::total_cmp);
        let max_ratio = rows.iter().filter_map(|r| r.ratio).max_by(f64::total_cmp);
        let failing: Vec<&Row> = rows.iter().filter(|r| !r.ok).collect();
        let (g1, g2) = ctx.cfg.gauge_specs();
        let summary = RunSummary {
            suite: ctx.suite,
            relation: ctx.suite.relation().to_string(),
            trials: rows.len() as u64,
            seed: ctx.cfg.seed,
            tolerance: ctx.cfg.tolerance,
            config_hash: ctx.cfg.hash(),
            gauges: [g1, g2],
            lattice: LatticeEcho {
                depth: ctx.lattice.depth(),
                branching: ctx.cfg.lattice.branching(),
                leaves: ctx.lattice.num_leaves(),
            },
            min_slack,
            min_relative_slack: worst.map(rel),
            worst_trial: worst.map(|r| r.trial),
            max_ratio,
            bound: ctx.bound,
            failures: failing.len() as u64,
            failing: failing.iter().take(LISTED_FAILURES).map(|r| (*r).clone()).collect(),
            pass: failing.is_empty(),
        };
        Self { rows, summary, ledger }
    }

    pub fn rows_csv(&self) -> String {
        let mut out = String::from("trial,ok,slack,lhs,rhs,ratio,witness\n");
        for r in &self.rows {
            let ratio = r.ratio.map(|x| format!("{x:e}")).unwrap_or_default();
            writeln!(
                out,
                "{},{},{:e},{:e},{:e},{},\"{}\"",
                r.trial,
                r.ok,
                r.slack,
                r.lhs,
                r.rhs,
                ratio,
                r.witness.replace('"', "'")
            )
            .expect("write to string");
        }
        out
    }

    /// Histograms of the relative slack and, for ratio suites, of the ratio.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("quantity,lo,hi,count\n");
        let rel: Vec<f64> = self
            .rows
            .iter()
            .map(|r| r.slack / (1.0 + r.rhs.abs()))
            .filter(|x| x.is_finite())
            .collect();
        push_hist(&mut out, "relative_slack", &rel);
        let ratios: Vec<f64> = self.rows.iter().filter_map(|r| r.ratio).filter(|x| x.is_finite()).collect();
        push_hist(&mut out, "ratio", &ratios);
        out
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        fs::write(dir.join("rows.csv"), self.rows_csv())?;
        fs::write(dir.join("histogram.csv"), self.histogram_csv())?;
        fs::write(dir.join("summary.md"), markdown(&self.summary))?;
        let json = serde_json::to_string_pretty(&self.summary)? + "\n";
        fs::write(dir.join("summary.json"), json)?;
        if let Some(ledger) = &self.ledger {
            let mut text = String::from("trial,kind,root,generation,partial_lhs,rhs,slack\n");
            text.push_str(ledger);
            fs::write(dir.join("ledger.csv"), text)?;
        }
        Ok(())
    }
}

fn push_hist(out: &mut String, name: &str, xs: &[f64]) {
    if xs.is_empty() {
        return;
    }
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / HIST_BINS as f64;
    let mut counts = [0usize; HIST_BINS];
    for &x in xs {
        let k = if width > 0.0 {
            (((x - lo) / width) as usize).min(HIST_BINS - 1)
        } else {
            0
        };
        counts[k] += 1;
    }
    for (k, c) in counts.iter().enumerate() {
        let a = lo + width * k as f64;
        let b = if k + 1 == HIST_BINS { hi } else { lo + width * (k + 1) as f64 };
        writeln!(out, "{name},{a:e},{b:e},{c}").expect("write to string");
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "n/a".into())
}

pub fn markdown(s: &RunSummary) -> String {
    let mut out = String::new();
    let verdict = if s.pass { "PASS" } else { "FAIL" };
    let _ = writeln!(out, "# {} : {verdict}\n", s.suite.name());
    let _ = writeln!(out, "{}\n", s.relation);
    let _ = writeln!(out, "| field | value |\n|---|---|");
    let _ = writeln!(out, "| trials | {} |", s.trials);
    let _ = writeln!(out, "| seed | {} |", s.seed);
    let _ = writeln!(out, "| tolerance | {:e} |", s.tolerance);
    let _ = writeln!(out, "| config hash | `{}` |", s.config_hash);
    let gauge = |g: &GaugeSpec| serde_json::to_string(g).expect("gauge serializes");
    let _ = writeln!(out, "| gauges | `{}` / `{}` |", gauge(&s.gauges[0]), gauge(&s.gauges[1]));
    let _ = writeln!(
        out,
        "| lattice | depth {}, branching {}, {} leaves |",
        s.lattice.depth, s.lattice.branching, s.lattice.leaves
    );
    let _ = writeln!(out, "| min slack | {} |", opt(s.min_slack));
    let _ = writeln!(out, "| min relative slack | {} |", opt(s.min_relative_slack));
    if let Some(t) = s.worst_trial {
        let _ = writeln!(out, "| worst trial | {t} |");
    }
    if s.bound.is_some() || s.max_ratio.is_some() {
        let _ = writeln!(out, "| max ratio | {} |", opt(s.max_ratio));
        let _ = writeln!(out, "| bound | {} |", opt(s.bound));
    }
    let _ = writeln!(out, "| failures | {} |", s.failures);
    if !s.failing.is_empty() {
        let _ = writeln!(out, "\n## Failing trials\n");
        for r in &s.failing {
            let _ = writeln!(out, "- trial {}: slack {:e}; {}", r.trial, r.slack, r.witness);
        }
    }
    out
}

pub fn load_summary(dir: &Path) -> Result<RunSummary> {
    let path = dir.join("summary.json");
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
