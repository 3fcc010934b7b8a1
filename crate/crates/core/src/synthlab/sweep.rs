use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::infovgae::TrainConfig;

use super::experiment::{run_planted, Method};
use super::graph::SynthGraphConfig;
use super::SynthError;

/// One row of the sweep table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub fraction: f64,
    pub mean_f1: f64,
    /// Sample standard deviation (zero for a single seed).
    pub std_f1: f64,
    pub n_seeds: usize,
    pub f1s: Vec<f64>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Trains unsupervised InfoVGAE on planted graphs at each neutral fraction
/// and summarises F1 over non-neutral assertions.
///
/// For each seed `s` both the graph and the trainer use `s`; everything
/// else comes from `base` and `train_cfg`.
pub fn neutral_sweep(
    base: &SynthGraphConfig,
    fractions: &[f64],
    train_cfg: &TrainConfig,
    seeds: &[u64],
) -> Result<Vec<SweepRow>, SynthError> {
    if fractions.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(SynthError::Config(
            "sweep fractions must be strictly ascending".into(),
        ));
    }
    if seeds.is_empty() {
        return Err(SynthError::Config("sweep needs at least one seed".into()));
    }
    let jobs: Vec<(usize, u64)> = (0..fractions.len())
        .flat_map(|f| seeds.iter().map(move |&s| (f, s)))
        .collect();
    let f1s: Vec<f64> = jobs
        .par_iter()
        .map(|&(fi, seed)| {
            let gcfg = SynthGraphConfig {
                neutral_fraction: fractions[fi],
                seed,
                ..base.clone()
            };
            gcfg.validate()?;
            let tcfg = TrainConfig {
                seed,
                ..train_cfg.clone()
            };
            Ok(run_planted(&gcfg, &tcfg, &Method::InfoVgae)?.report.f1)
        })
        .collect::<Result<_, SynthError>>()?;
    Ok(fractions
        .iter()
        .enumerate()
        .map(|(fi, &fraction)| {
            let xs = f1s[fi * seeds.len()..(fi + 1) * seeds.len()].to_vec();
            let (mean_f1, std_f1) = mean_std(&xs);
            SweepRow {
                fraction,
                mean_f1,
                std_f1,
                n_seeds: xs.len(),
                f1s: xs,
            }
        })
        .collect())
}

/// `fraction,mean_f1,std_f1,n_seeds` with one line per row.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("fraction,mean_f1,std_f1,n_seeds\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{:.6},{:.6},{}",
            r.fraction, r.mean_f1, r.std_f1, r.n_seeds
        );
    }
    s
}

pub fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<(), SynthError> {
    fs::write(path, sweep_csv(rows)).map_err(|source| SynthError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
        assert_eq!(mean_std(&[0.5]), (0.5, 0.0));
    }

    #[test]
    fn rejects_unsorted_fractions() {
        let r = neutral_sweep(
            &SynthGraphConfig::standard(0),
            &[0.2, 0.0],
            &TrainConfig::default(),
            &[0],
        );
        assert!(matches!(r, Err(SynthError::Config(_))));
    }

    #[test]
    fn csv_has_one_line_per_fraction() {
        let cfg = SynthGraphConfig {
            users_per_side: 6,
            assertions_per_side: 8,
            p_in: 0.6,
            p_out: 0.05,
            ..SynthGraphConfig::standard(0)
        };
        let tcfg = TrainConfig {
            epochs: 5,
            ..TrainConfig::default()
        };
        let rows = neutral_sweep(&cfg, &[0.0, 0.25, 0.5], &tcfg, &[1, 2]).unwrap();
        let csv = sweep_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "fraction,mean_f1,std_f1,n_seeds");
        assert!(lines[2].starts_with("0.25,") && lines[2].ends_with(",2"));
    }
}
