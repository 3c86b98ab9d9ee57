//! File formats read and written by the commands.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use liftreach_core::{Comparison, Dataset, Error, ReachResult, Trajectory};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let file = File::open(path).map_err(|e| with_path(e, path))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let mut w = BufWriter::new(File::create(path).map_err(|e| with_path(e, path))?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn with_path(e: std::io::Error, path: &Path) -> std::io::Error {
    std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))
}

/// A dataset JSON file, or a directory whose `*.csv` files are read in name order.
pub fn read_dataset(path: &Path) -> Result<Dataset, Error> {
    if !path.is_dir() {
        return read_json(path);
    }
    let mut csvs: Vec<_> = std::fs::read_dir(path)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    csvs.retain(|p| p.extension().is_some_and(|x| x == "csv"));
    csvs.sort();
    let trajectories = csvs
        .iter()
        .map(|p| Trajectory::read_csv(BufReader::new(File::open(p)?)))
        .collect::<Result<Vec<_>, _>>()?;
    Dataset::new(trajectories)
}

pub fn write_trajectory_csvs(dir: &Path, data: &Dataset) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    for (i, t) in data.trajectories().iter().enumerate() {
        let f = File::create(dir.join(format!("trajectory_{i:04}.csv")))?;
        t.write_csv(BufWriter::new(f))?;
    }
    Ok(())
}

/// One row per (k, dim) with the interval hull of R′_k.
pub fn write_hull_csv(path: &Path, result: &ReachResult) -> Result<(), Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["k", "dim", "lower", "upper", "width"])?;
    for (k, set) in result.projected_sets.iter().enumerate() {
        let hull = set.interval_hull();
        for (i, iv) in hull.intervals().iter().enumerate() {
            w.serialize((k + 1, i + 1, iv.lo, iv.hi, iv.width()))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_ratio_csv(path: &Path, table: &Comparison) -> Result<(), Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["k", "dim", "width_koopman", "width_baseline", "ratio"])?;
    for r in &table.rows {
        w.serialize((r.k, r.dim, r.width_koopman, r.width_baseline, r.ratio))?;
    }
    w.flush()?;
    Ok(())
}
