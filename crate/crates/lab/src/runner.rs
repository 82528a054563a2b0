use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::checkers::Output;
use crate::config::{Params, Scenario};
use crate::report::{Row, Status, SUMMARY_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunSummary {
    pub rows: usize,
    pub failed: usize,
    pub errors: usize,
}

impl RunSummary {
    pub fn ok(&self) -> bool {
        self.failed == 0 && self.errors == 0
    }
}

pub fn scenario_rows(s: &Scenario, seed: u64) -> (Vec<Row>, Vec<(String, String)>) {
    match s.checker.run(&Params(&s.params), seed) {
        Ok(Output { cases, artifacts }) => (
            cases.iter().map(|c| Row::from_case(s, seed, c)).collect(),
            artifacts,
        ),
        Err(e) => (
            vec![Row::scenario_error(s, seed, e.to_string())],
            Vec::new(),
        ),
    }
}

/// Runs every scenario (in name order) on a pool of `jobs` threads and
/// writes `<name>.jsonl`, any artifacts, and `summary.csv` into `out`.
pub fn run_scenarios(
    scenarios: &[Scenario],
    default_seed: u64,
    jobs: Option<usize>,
    out: &Path,
) -> std::io::Result<RunSummary> {
    let mut sorted: Vec<&Scenario> = scenarios.iter().collect();
    sorted.sort_by(|a, b| a.name.cmp(&b.name));
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder.build().map_err(std::io::Error::other)?;
    let results: Vec<_> = pool.install(|| {
        sorted
            .par_iter()
            .map(|s| {
                let seed = s.seed.unwrap_or(default_seed);
                scenario_rows(s, seed)
            })
            .collect()
    });

    fs::create_dir_all(out)?;
    let mut summary = String::from(SUMMARY_HEADER);
    summary.push('\n');
    let mut totals = RunSummary::default();
    for (s, (rows, artifacts)) in sorted.iter().zip(results) {
        let mut jsonl = String::new();
        for r in &rows {
            jsonl.push_str(&r.to_json());
            jsonl.push('\n');
            summary.push_str(&r.summary_line());
            summary.push('\n');
            match r.status {
                Status::Pass => {}
                Status::Fail => totals.failed += 1,
                Status::Error => totals.errors += 1,
            }
        }
        totals.rows += rows.len();
        fs::write(out.join(format!("{}.jsonl", s.name)), jsonl)?;
        for (suffix, body) in artifacts {
            fs::write(out.join(format!("{}.{suffix}", s.name)), body)?;
        }
        let bad = rows.iter().filter(|r| r.status != Status::Pass).count();
        println!("{}: {} rows, {} not as expected", s.name, rows.len(), bad);
        for r in rows.iter().filter(|r| r.status != Status::Pass).take(5) {
            let why = if r.error.is_empty() {
                format!("verdict {} against expect {}", r.verdict, r.expect)
            } else {
                r.error.clone()
            };
            println!(
                "  {} {}: {}",
                r.case,
                format!("{:?}", r.status).to_lowercase(),
                why
            );
        }
    }
    fs::write(out.join("summary.csv"), summary)?;
    Ok(totals)
}
