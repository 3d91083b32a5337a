use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use crate::diagnostics::{PowerFit, TimeSeries};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ReplayEntry {
    pub file: PathBuf,
    pub params_hash: String,
    pub original: Option<PowerFit<f64>>,
    pub refit: Option<PowerFit<f64>>,
}

impl ReplayEntry {
    /// Bitwise agreement of the stored and recomputed fits.
    pub fn identical(&self) -> bool {
        match (&self.original, &self.refit) {
            (None, None) => true,
            (Some(a), Some(b)) => {
                a.exponent.to_bits() == b.exponent.to_bits()
                    && a.prefactor.to_bits() == b.prefactor.to_bits()
                    && a.r_squared.to_bits() == b.r_squared.to_bits()
            }
            _ => false,
        }
    }
}

fn is_series_csv(path: &Path) -> Result<bool> {
    if path.extension().and_then(|e| e.to_str()) != Some("csv") {
        return Ok(false);
    }
    let mut first = String::new();
    BufReader::new(fs::File::open(path)?).read_line(&mut first)?;
    Ok(first.trim_end() == "quantity,params_hash")
}

/// Re-fits every series CSV in `dir` over the window recorded in its `#fit` line.
pub fn replay(dir: &Path) -> Result<Vec<ReplayEntry>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.sort();
    let mut out = Vec::new();
    for path in paths {
        if !is_series_csv(&path)? {
            continue;
        }
        let (series, params_hash) = TimeSeries::<f64>::read_csv(BufReader::new(fs::File::open(&path)?))?;
        let original = series.fit().copied();
        let refit = match original {
            Some(f) => crate::diagnostics::fit_exponent(&series, f.window)?,
            None => None,
        };
        out.push(ReplayEntry {
            file: path,
            params_hash,
            original,
            refit,
        });
    }
    if out.is_empty() {
        return Err(Error::Format(format!("no series CSV files in {}", dir.display())));
    }
    Ok(out)
}
