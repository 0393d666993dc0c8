use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column header of the per-evaluation CSV.
pub const CSV_HEADER: &str = "t,graph_id,y,best_y,t_select_ms,t_eval_ms,t_retrain_ms";

/// One evaluation. `t` counts evaluations from 1, so the first `M` rows are
/// the random initialization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub t: usize,
    pub graph_id: u64,
    /// `None` when the objective failed.
    pub y: Option<f64>,
    /// Incumbent after this evaluation; `None` until the first success.
    pub best_y: Option<f64>,
    pub select_ms: f64,
    pub eval_ms: f64,
    pub retrain_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub rows: Vec<RunRow>,
    pub best_id: Option<u64>,
    pub best_y: Option<f64>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), |x| x.to_string())
}

fn parse_opt(field: &str, line: usize) -> Result<Option<f64>> {
    let x: f64 = field.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad number `{field}`"),
    })?;
    Ok(if x.is_nan() { None } else { Some(x) })
}

impl RunRecord {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Incumbent after `budget` evaluations (or after the last one if the
    /// run stopped earlier).
    pub fn best_at(&self, budget: usize) -> Option<f64> {
        let k = budget.min(self.rows.len());
        if k == 0 {
            return None;
        }
        self.rows[k - 1].best_y
    }

    /// First evaluation count at which the incumbent reached `target`.
    pub fn evaluations_to(&self, target: f64) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.best_y.is_some_and(|b| b >= target))
            .map(|r| r.t)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{:.3},{:.3},{:.3}",
                r.t,
                r.graph_id,
                fmt_opt(r.y),
                fmt_opt(r.best_y),
                r.select_ms,
                r.eval_ms,
                r.retrain_ms
            )?;
        }
        Ok(())
    }

    /// The CSV without the wall-time columns.
    pub fn write_csv_untimed<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,graph_id,y,best_y")?;
        for r in &self.rows {
            writeln!(out, "{},{},{},{}", r.t, r.graph_id, fmt_opt(r.y), fmt_opt(r.best_y))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let n = i + 1;
            if i == 0 {
                if line.trim() != CSV_HEADER {
                    return Err(Error::Parse {
                        line: n,
                        msg: format!("expected header `{CSV_HEADER}`"),
                    });
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(Error::Parse {
                    line: n,
                    msg: format!("expected 7 fields, found {}", f.len()),
                });
            }
            let int = |s: &str| -> Result<u64> {
                s.parse().map_err(|_| Error::Parse {
                    line: n,
                    msg: format!("bad integer `{s}`"),
                })
            };
            let num = |s: &str| parse_opt(s, n).map(|v| v.unwrap_or(f64::NAN));
            rows.push(RunRow {
                t: int(f[0])? as usize,
                graph_id: int(f[1])?,
                y: parse_opt(f[2], n)?,
                best_y: parse_opt(f[3], n)?,
                select_ms: num(f[4])?,
                eval_ms: num(f[5])?,
                retrain_ms: num(f[6])?,
            });
        }
        let best = rows
            .iter()
            .filter_map(|r| r.y.map(|y| (r.graph_id, y)))
            .fold(None, |acc: Option<(u64, f64)>, (id, y)| match acc {
                Some((_, b)) if b >= y => acc,
                _ => Some((id, y)),
            });
        Ok(Self {
            rows,
            best_id: best.map(|b| b.0),
            best_y: best.map(|b| b.1),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunRecord {
        let row = |t, id, y: Option<f64>, b| RunRow {
            t,
            graph_id: id,
            y,
            best_y: b,
            select_ms: 1.25,
            eval_ms: 0.0,
            retrain_ms: 3.5,
        };
        RunRecord {
            rows: vec![
                row(1, 4, None, None),
                row(2, 9, Some(-0.5), Some(-0.5)),
                row(3, 1, Some(0.25), Some(0.25)),
                row(4, 7, Some(0.1), Some(0.25)),
            ],
            best_id: Some(1),
            best_y: Some(0.25),
        }
    }

    #[test]
    fn csv_round_trip() {
        let rec = sample();
        let mut buf = Vec::new();
        rec.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,graph_id,y,best_y,t_select_ms,t_eval_ms,t_retrain_ms\n1,4,nan,nan,1.250"));
        let back = RunRecord::read_csv(&buf[..]).unwrap();
        assert_eq!(back, rec);
    }

    #[test]
    fn budget_queries() {
        let rec = sample();
        assert_eq!(rec.best_at(0), None);
        assert_eq!(rec.best_at(2), Some(-0.5));
        assert_eq!(rec.best_at(100), Some(0.25));
        assert_eq!(rec.evaluations_to(0.2), Some(3));
        assert_eq!(rec.evaluations_to(1.0), None);
    }
}
