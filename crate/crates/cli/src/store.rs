//! Append-only results store with a completed-cell manifest.
//!
//! Layout under the store directory:
//!
//! ```text
//! results.csv        one row per finished cell (stable column schema)
//! manifest.txt       "<cell_id> evals=<n> status=ok|failed ..." per cell
//! cells/<id>/solutions.csv   final solution set of the cell
//! cells/<id>/manifest.txt    config echo + seed + evaluation count
//! ```
//!
//! Rows are appended as cells finish (crash safety, resumability) and the
//! file is rewritten in canonical cell order once a study completes, so two
//! full runs of the same study produce byte-identical files.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::experiments::{CellOutcome, RunResult, RESULTS_HEADER};

#[derive(Debug)]
pub struct ResultsStore {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl ResultsStore {
    pub fn create(dir: impl AsRef<Path>) -> std::io::Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(dir.join("cells"))?;
        Ok(Self {
            dir,
            write_lock: Mutex::new(()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn results_path(&self) -> PathBuf {
        self.dir.join("results.csv")
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.dir.join("manifest.txt")
    }

    pub fn cell_dir(&self, cell_id: &str) -> PathBuf {
        self.dir.join("cells").join(cell_id)
    }

    /// Cell ids recorded as successfully completed.
    pub fn completed(&self) -> std::io::Result<HashSet<String>> {
        let path = self.manifest_path();
        if !path.exists() {
            return Ok(HashSet::new());
        }
        let text = fs::read_to_string(path)?;
        Ok(text
            .lines()
            .filter(|l| l.contains(" status=ok"))
            .filter_map(|l| l.split_whitespace().next())
            .map(String::from)
            .collect())
    }

    /// Persist one finished cell: results row, manifest line and artifacts.
    pub fn append_cell(&self, cell_id: &str, outcome: &CellOutcome) -> std::io::Result<()> {
        let _guard = self.write_lock.lock().unwrap();
        let cell_dir = self.cell_dir(cell_id);
        fs::create_dir_all(&cell_dir)?;
        fs::write(cell_dir.join("solutions.csv"), &outcome.solutions_csv)?;
        fs::write(cell_dir.join("manifest.txt"), &outcome.cell_manifest)?;

        let results = self.results_path();
        let mut file = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&results)?;
        if file.metadata()?.len() == 0 {
            writeln!(file, "{RESULTS_HEADER}")?;
        }
        writeln!(file, "{}", outcome.result.to_csv_row())?;
        file.flush()?;

        let mut manifest = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.manifest_path())?;
        writeln!(
            manifest,
            "{cell_id} evals={} status=ok",
            outcome.evaluations
        )?;
        manifest.flush()
    }

    pub fn record_failure(&self, cell_id: &str, reason: &str) -> std::io::Result<()> {
        let _guard = self.write_lock.lock().unwrap();
        let mut manifest = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.manifest_path())?;
        writeln!(
            manifest,
            "{cell_id} status=failed reason={}",
            reason.replace('\n', " ")
        )
    }

    /// Rewrite results.csv with rows sorted into `order` (by cell key);
    /// unknown rows keep their relative position at the end.
    pub fn canonicalize(&self, order: &[String]) -> std::io::Result<()> {
        let _guard = self.write_lock.lock().unwrap();
        let path = self.results_path();
        if !path.exists() {
            return Ok(());
        }
        let text = fs::read_to_string(&path)?;
        let mut rows: Vec<RunResult> = text
            .lines()
            .skip(1)
            .filter(|l| !l.is_empty())
            .filter_map(RunResult::from_csv_row)
            .collect();
        let position = |row: &RunResult| {
            order
                .iter()
                .position(|id| *id == row.cell_key())
                .unwrap_or(usize::MAX)
        };
        rows.sort_by_key(position);
        let mut out = String::from(RESULTS_HEADER);
        out.push('\n');
        for row in &rows {
            out.push_str(&row.to_csv_row());
            out.push('\n');
        }
        let tmp = path.with_extension("csv.tmp");
        fs::write(&tmp, out)?;
        fs::rename(tmp, path)
    }

    pub fn read_results(&self) -> Result<Vec<RunResult>, crate::experiments::ExperimentError> {
        Ok(read_results_file(self.results_path())?)
    }
}

/// Parse a results CSV written by the store.
pub fn read_results_file(path: impl AsRef<Path>) -> std::io::Result<Vec<RunResult>> {
    let text = fs::read_to_string(path)?;
    Ok(text
        .lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .filter_map(RunResult::from_csv_row)
        .collect())
}
