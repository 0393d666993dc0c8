//! Tables and curve data from a directory of run CSVs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;

use anyhow::{bail, Context, Result};
use graphbo::bo::{RunRecord, CSV_HEADER};
use serde::{Deserialize, Serialize};

use crate::summary::{stat, trajectory, write_json, RunSummary, Stat, TrajectoryPoint};

/// Fractions of the budget reported in the percentile table.
pub const BUDGET_FRACTIONS: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 1.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub name: String,
    pub files: Vec<String>,
    pub optimum_y: f64,
    pub budget: usize,
    pub evaluations_to_optimum: Vec<Option<usize>>,
    /// Over the runs that reached the optimum.
    pub evaluations_to_optimum_stat: Option<Stat>,
    /// `(evaluations, mean and std of the incumbent)`.
    pub at_budget_fraction: Vec<(usize, Stat)>,
    pub curve: Vec<TrajectoryPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub groups: Vec<GroupReport>,
}

struct LoadedRun {
    file: String,
    record: RunRecord,
    summary: Option<RunSummary>,
}

fn group_name(stem: &str, summary: Option<&RunSummary>) -> String {
    if let Some(s) = summary {
        return format!("{:?}", s.method).to_lowercase();
    }
    match stem.rsplit_once('_') {
        Some((prefix, tail)) if tail.chars().all(|c| c.is_ascii_digit()) => prefix.to_string(),
        _ => stem.to_string(),
    }
}

fn is_run_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "csv")
        && fs::read_to_string(path).is_ok_and(|t| t.lines().next().is_some_and(|h| h.trim() == CSV_HEADER))
}

/// Scans `dir` for run CSVs, grouped by method when a summary JSON sits
/// next to the CSV and by file-name prefix otherwise.
pub fn build_report(dir: &Path) -> Result<Report> {
    let mut entries: Vec<_> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| is_run_csv(p))
        .collect();
    entries.sort();
    if entries.is_empty() {
        bail!("no run CSVs found in {}", dir.display());
    }
    let mut groups: BTreeMap<String, Vec<LoadedRun>> = BTreeMap::new();
    for path in entries {
        let record = RunRecord::read_csv(BufReader::new(File::open(&path)?))
            .with_context(|| format!("parsing {}", path.display()))?;
        let stem = path.file_stem().unwrap_or_default().to_string_lossy().to_string();
        let json = path.with_extension("json");
        let summary = json.exists().then(|| RunSummary::load(&json)).transpose()?;
        groups.entry(group_name(&stem, summary.as_ref())).or_default().push(LoadedRun {
            file: path.file_name().unwrap_or_default().to_string_lossy().to_string(),
            record,
            summary,
        });
    }
    let observed_max = groups
        .values()
        .flatten()
        .flat_map(|r| r.record.rows.iter().filter_map(|row| row.y))
        .fold(f64::NEG_INFINITY, f64::max);

    let groups = groups
        .into_iter()
        .map(|(name, runs)| {
            let optimum_y = runs
                .iter()
                .find_map(|r| r.summary.as_ref().map(|s| s.optimum_y))
                .unwrap_or(observed_max);
            let records: Vec<RunRecord> = runs.iter().map(|r| r.record.clone()).collect();
            let budget = records.iter().map(RunRecord::len).max().unwrap_or(0);
            let evaluations_to_optimum: Vec<Option<usize>> =
                records.iter().map(|r| r.evaluations_to(optimum_y)).collect();
            let reached: Vec<f64> = evaluations_to_optimum.iter().flatten().map(|&k| k as f64).collect();
            let at_budget_fraction = BUDGET_FRACTIONS
                .iter()
                .map(|f| {
                    let b = ((f * budget as f64).round() as usize).max(1);
                    let values: Vec<f64> = records.iter().filter_map(|r| r.best_at(b)).collect();
                    (b, stat(&values))
                })
                .collect();
            GroupReport {
                name,
                files: runs.iter().map(|r| r.file.clone()).collect(),
                optimum_y,
                budget,
                evaluations_to_optimum,
                evaluations_to_optimum_stat: (!reached.is_empty()).then(|| stat(&reached)),
                at_budget_fraction,
                curve: trajectory(&records),
            }
        })
        .collect();
    Ok(Report { groups })
}

impl Report {
    pub fn tables(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "evaluations to optimum");
        let _ = writeln!(out, "{:<12} {:>5} {:>8} {:>10} {:>10}", "group", "runs", "reached", "mean", "std");
        for g in &self.groups {
            let reached = g.evaluations_to_optimum.iter().flatten().count();
            let (mean, std) = g
                .evaluations_to_optimum_stat
                .as_ref()
                .map_or(("-".into(), "-".into()), |s| (format!("{:.1}", s.mean), format!("{:.1}", s.std)));
            let _ = writeln!(out, "{:<12} {:>5} {:>8} {:>10} {:>10}", g.name, g.files.len(), reached, mean, std);
        }
        let _ = writeln!(out, "\nincumbent at fractions of the budget (mean ± std)");
        let _ = write!(out, "{:<12}", "group");
        for f in BUDGET_FRACTIONS {
            let _ = write!(out, " {:>20}", format!("{:.0}%", 100.0 * f));
        }
        let _ = writeln!(out);
        for g in &self.groups {
            let _ = write!(out, "{:<12}", g.name);
            for (b, s) in &g.at_budget_fraction {
                let _ = write!(out, " {:>20}", format!("{:.4}±{:.4} @{b}", s.mean, s.std));
            }
            let _ = writeln!(out);
        }
        out
    }

    pub fn curves_csv(&self) -> String {
        let mut out = String::from("group,t,mean_best_y,std_best_y\n");
        for g in &self.groups {
            for p in &g.curve {
                let _ = writeln!(out, "{},{},{},{}", g.name, p.t, p.mean, p.std);
            }
        }
        out
    }

    /// One data block per group, separated by two blank lines, for gnuplot's
    /// `index` selector.
    pub fn curves_gnuplot(&self) -> String {
        let mut out = String::new();
        for (k, g) in self.groups.iter().enumerate() {
            let _ = writeln!(out, "# index {k}: {} (optimum {})\n# t mean_best_y std_best_y", g.name, g.optimum_y);
            for p in &g.curve {
                let _ = writeln!(out, "{} {} {}", p.t, p.mean, p.std);
            }
            out.push_str("\n\n");
        }
        out
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.txt"), self.tables())?;
        fs::write(dir.join("curves.csv"), self.curves_csv())?;
        fs::write(dir.join("curves.dat"), self.curves_gnuplot())?;
        write_json(&dir.join("report.json"), self)
    }
}
