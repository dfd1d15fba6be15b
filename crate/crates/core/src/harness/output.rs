use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::stats::{baseline_rollouts, linear_fit, LinearFit};
use super::ExperimentResult;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::InvalidConfig(format!(
                "unknown format `{s}`, expected csv or json"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub variant: String,
    pub world: String,
    #[serde(rename = "J")]
    pub j: usize,
    pub replicas: usize,
    pub rollouts: usize,
    pub smoothing: usize,
    pub threshold: f64,
    /// `None` when the smoothed curve never reached the threshold.
    pub convergence_rollout: Option<usize>,
    pub baseline_rollouts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedupSummary {
    pub reference: String,
    pub variant: String,
    /// `(J, variant, reference)` convergence counts used in the fit.
    pub points: Vec<(usize, usize, usize)>,
    pub fit_reference: LinearFit,
    pub fit_variant: LinearFit,
    pub speedup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: Vec<RunSummary>,
    pub speedup: Option<SpeedupSummary>,
}

impl Summary {
    pub fn from_results(results: &[ExperimentResult]) -> Self {
        let runs: Vec<RunSummary> = results
            .iter()
            .map(|r| RunSummary {
                variant: r.variant.clone(),
                world: r.world.clone(),
                j: r.j,
                replicas: r.curve.replicas,
                rollouts: r.curve.len(),
                smoothing: r.curve.window,
                threshold: r.threshold,
                convergence_rollout: r.convergence,
                baseline_rollouts: baseline_rollouts(r.j),
            })
            .collect();
        let mut summary = Self {
            runs,
            speedup: None,
        };
        summary.speedup = summary.speedup_between("no-ext", "active").ok();
        summary
    }

    /// Fits convergence over `J` for both variants, using every `J` at which
    /// both converged.
    pub fn speedup_between(&self, reference: &str, variant: &str) -> Result<SpeedupSummary> {
        let find = |name: &str, j: usize| {
            self.runs
                .iter()
                .find(|r| r.variant == name && r.j == j)
                .and_then(|r| r.convergence_rollout)
        };
        let mut js: Vec<usize> = self.runs.iter().map(|r| r.j).collect();
        js.sort_unstable();
        js.dedup();
        let points: Vec<(usize, usize, usize)> = js
            .into_iter()
            .filter_map(|j| Some((j, find(variant, j)?, find(reference, j)?)))
            .collect();
        let fit = |pick: fn(&(usize, usize, usize)) -> usize| {
            linear_fit(
                &points
                    .iter()
                    .map(|p| (p.0 as f64, pick(p) as f64))
                    .collect::<Vec<_>>(),
            )
        };
        let fit_variant = fit(|p| p.1)?;
        let fit_reference = fit(|p| p.2)?;
        if fit_reference.slope == 0.0 {
            return Err(Error::DegenerateFit("reference slope is zero".into()));
        }
        Ok(SpeedupSummary {
            reference: reference.to_string(),
            variant: variant.to_string(),
            speedup: 1.0 - fit_variant.slope / fit_reference.slope,
            points,
            fit_reference,
            fit_variant,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

/// `<dir>/<stem>.summary.json` next to a result file.
pub fn summary_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.summary.json"))
}

#[derive(Serialize)]
struct Row<'a> {
    variant: &'a str,
    world: &'a str,
    #[serde(rename = "J")]
    j: usize,
    rollout: usize,
    success_rate_raw: f64,
    success_rate_smoothed: f64,
}

fn rows(results: &[ExperimentResult]) -> impl Iterator<Item = Row<'_>> {
    results.iter().flat_map(|r| {
        (0..r.curve.len()).map(move |t| Row {
            variant: &r.variant,
            world: &r.world,
            j: r.j,
            rollout: t,
            success_rate_raw: r.curve.raw[t],
            success_rate_smoothed: r.curve.smoothed[t],
        })
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes one row per (run, rollout) to `path` and the convergence summary
/// to [`summary_path`]. Returns the summary.
pub fn emit_results(results: &[ExperimentResult], format: Format, path: &Path) -> Result<Summary> {
    let text = match format {
        Format::Csv => {
            let mut out =
                String::from("variant,world,J,rollout,success_rate_raw,success_rate_smoothed\n");
            for r in rows(results) {
                writeln!(
                    out,
                    "{},{},{},{},{:.6},{:.6}",
                    r.variant, r.world, r.j, r.rollout, r.success_rate_raw, r.success_rate_smoothed
                )
                .unwrap();
            }
            out
        }
        Format::Json => {
            let all: Vec<Row> = rows(results).collect();
            serde_json::to_string_pretty(&all).expect("rows serialize") + "\n"
        }
    };
    write(path, &text)?;
    let summary = Summary::from_results(results);
    write(
        &summary_path(path),
        &(serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n"),
    )?;
    Ok(summary)
}
