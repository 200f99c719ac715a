//! Communities-and-crime ingestion: clean the raw table, normalize the
//! surviving features, and partition communities into the nine-node census
//! division network with per-division train/test splits.

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::path::{Path, PathBuf};

use crate::error::{DecsvmError, Result};
use crate::synthgen::LabeledShard;

/// Number of leading identifier columns in the raw file:
/// state FIPS, county, community, community name, fold.
const ID_COLS: usize = 5;
const MIN_ROWS_PER_DIVISION: usize = 5;

/// Census division (1..=9) for a state FIPS code.
pub fn fips_to_division(fips: u32) -> Option<u8> {
    Some(match fips {
        9 | 23 | 25 | 33 | 44 | 50 => 1,                     // New England
        34 | 36 | 42 => 2,                                   // Middle Atlantic
        17 | 18 | 26 | 39 | 55 => 3,                         // East North Central
        19 | 20 | 27 | 29 | 31 | 38 | 46 => 4,               // West North Central
        10 | 11 | 12 | 13 | 24 | 37 | 45 | 51 | 54 => 5,     // South Atlantic
        1 | 21 | 28 | 47 => 6,                               // East South Central
        5 | 22 | 40 | 48 => 7,                               // West South Central
        4 | 8 | 16 | 30 | 32 | 35 | 49 | 56 => 8,            // Mountain
        2 | 6 | 15 | 41 | 53 => 9,                           // Pacific
        _ => return None,
    })
}

/// Cleaned table: one row per community.
#[derive(Debug, Clone)]
pub struct RealTable {
    /// Division index per row, 0-based (division number minus one).
    pub division: Vec<usize>,
    /// Min-max normalized features for the columns that survived cleaning.
    pub features: Array2<f64>,
    /// Target rate per row.
    pub rate: Array1<f64>,
    /// Raw-file column indices of the surviving feature columns.
    pub kept_columns: Vec<usize>,
}

/// Split/label settings.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RealDataConfig {
    pub path: PathBuf,
    /// Rate above which a community is labeled +1.
    pub rate_threshold: f64,
    pub test_fraction: f64,
    /// Training-set label corruption probability.
    pub p_flip: f64,
    pub seed: u64,
}

impl RealDataConfig {
    pub fn new(path: PathBuf) -> Self {
        RealDataConfig {
            path,
            rate_threshold: 0.15,
            test_fraction: 0.2,
            p_flip: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate_threshold.is_finite()) {
            return Err(DecsvmError::InvalidConfig("bad rate threshold".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(DecsvmError::InvalidConfig("test fraction must be in (0, 1)".into()));
        }
        if !(0.0..=0.5).contains(&self.p_flip) {
            return Err(DecsvmError::InvalidConfig("p_flip must be in [0, 0.5]".into()));
        }
        Ok(())
    }
}

fn is_missing(field: &str) -> bool {
    let f = field.trim();
    f.is_empty() || f == "?"
}

/// Read the raw comma-separated table (no header expected; a header row is
/// detected and skipped if the last field of the first record does not
/// parse as a number), drop every feature column with any missing entry,
/// min-max normalize the survivors, and attach census divisions.
pub fn load_and_clean(path: &Path) -> Result<RealTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)?;
    let mut records: Vec<csv::StringRecord> = Vec::new();
    for rec in reader.records() {
        records.push(rec?);
    }
    if let Some(first) = records.first() {
        let last = first.get(first.len().saturating_sub(1)).unwrap_or("");
        if last.trim().parse::<f64>().is_err() && !is_missing(last) {
            records.remove(0);
        }
    }
    if records.is_empty() {
        return Err(DecsvmError::Data("no data rows".into()));
    }
    let width = records[0].len();
    if width < ID_COLS + 2 {
        return Err(DecsvmError::Data(format!("only {width} columns; expected identifiers, features and a target")));
    }
    for (i, rec) in records.iter().enumerate() {
        if rec.len() != width {
            return Err(DecsvmError::Data(format!("row {} has {} fields, expected {width}", i + 1, rec.len())));
        }
    }
    let goal_col = width - 1;

    let mut division = Vec::with_capacity(records.len());
    let mut rate = Vec::with_capacity(records.len());
    for (i, rec) in records.iter().enumerate() {
        let fips: u32 = rec
            .get(0)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| DecsvmError::Data(format!("row {}: unreadable state code", i + 1)))?;
        let div = fips_to_division(fips)
            .ok_or_else(|| DecsvmError::Data(format!("row {}: unknown state code {fips}", i + 1)))?;
        division.push(div as usize - 1);
        let r: f64 = rec
            .get(goal_col)
            .filter(|s| !is_missing(s))
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| DecsvmError::Data(format!("row {}: unreadable target", i + 1)))?;
        rate.push(r);
    }

    // keep only fully observed numeric feature columns
    let mut kept_columns = Vec::new();
    for col in ID_COLS..goal_col {
        let complete = records.iter().all(|rec| {
            rec.get(col).is_some_and(|f| !is_missing(f) && f.trim().parse::<f64>().is_ok())
        });
        if complete {
            kept_columns.push(col);
        }
    }
    if kept_columns.is_empty() {
        return Err(DecsvmError::Data("every feature column has missing values".into()));
    }

    let n = records.len();
    let mut features = Array2::<f64>::zeros((n, kept_columns.len()));
    for (i, rec) in records.iter().enumerate() {
        for (j, &col) in kept_columns.iter().enumerate() {
            features[[i, j]] = rec.get(col).unwrap().trim().parse().unwrap();
        }
    }
    // min-max to [0, 1]; constant columns become all zeros
    for j in 0..kept_columns.len() {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            lo = lo.min(features[[i, j]]);
            hi = hi.max(features[[i, j]]);
        }
        let span = hi - lo;
        for i in 0..n {
            features[[i, j]] = if span > 0.0 { (features[[i, j]] - lo) / span } else { 0.0 };
        }
    }

    Ok(RealTable {
        division,
        features,
        rate: Array1::from_vec(rate),
        kept_columns,
    })
}

/// Per-division train/test shards with binary labels and an intercept
/// column. Label flips are applied to training rows only.
pub fn binarize_and_partition(
    table: &RealTable,
    cfg: &RealDataConfig,
) -> Result<(Vec<LabeledShard>, Vec<LabeledShard>)> {
    cfg.validate()?;
    let p = table.features.ncols();
    let mut by_division: Vec<Vec<usize>> = vec![Vec::new(); 9];
    for (i, &d) in table.division.iter().enumerate() {
        by_division[d].push(i);
    }
    for (d, rows) in by_division.iter().enumerate() {
        if rows.len() < MIN_ROWS_PER_DIVISION {
            return Err(DecsvmError::Data(format!(
                "division {} has only {} communities (need {MIN_ROWS_PER_DIVISION})",
                d + 1,
                rows.len()
            )));
        }
    }

    let mut train = Vec::with_capacity(9);
    let mut test = Vec::with_capacity(9);
    for (d, rows) in by_division.iter().enumerate() {
        let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
        rng.set_stream(d as u64 + 1);
        let mut order = rows.clone();
        order.shuffle(&mut rng);
        let n_test = ((order.len() as f64 * cfg.test_fraction).round() as usize)
            .clamp(1, order.len() - 1);
        let (test_rows, train_rows) = order.split_at(n_test);

        let build = |rows: &[usize], flip: bool, rng: &mut ChaCha12Rng| -> Result<LabeledShard> {
            let mut x = Array2::<f64>::zeros((rows.len(), p + 1));
            let mut y = Array1::<f64>::zeros(rows.len());
            for (r, &i) in rows.iter().enumerate() {
                x[[r, 0]] = 1.0;
                for j in 0..p {
                    x[[r, j + 1]] = table.features[[i, j]];
                }
                let mut label = if table.rate[i] > cfg.rate_threshold { 1.0 } else { -1.0 };
                if flip && rng.random::<f64>() < cfg.p_flip {
                    label = -label;
                }
                y[r] = label;
            }
            LabeledShard::new(x, y)
        };
        test.push(build(test_rows, false, &mut rng)?);
        train.push(build(train_rows, true, &mut rng)?);
    }
    Ok((train, test))
}
