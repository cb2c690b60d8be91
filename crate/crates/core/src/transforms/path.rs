use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// A process trajectory sampled on an increasing grid.
///
/// `right` holds the right-continuous value at each grid point and `left`
/// the limit from the left; the two differ only at jump points. `time`
/// carries the intrinsic time of each grid point (for example `G(x)`),
/// which integral statistics use as their measure.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessPath {
    grid: Vec<f64>,
    time: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
    meta: Vec<(String, String)>,
}

impl ProcessPath {
    pub fn new(grid: Vec<f64>, time: Vec<f64>, left: Vec<f64>, right: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        if time.len() != n || left.len() != n || right.len() != n {
            return Err(Error::InvalidArgument(
                "path columns must have equal lengths".into(),
            ));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument(
                "path grid must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            grid,
            time,
            left,
            right,
            meta: Vec::new(),
        })
    }

    /// A path with no jumps whose time is the grid itself.
    pub fn continuous(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(grid.clone(), grid, values.clone(), values)
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.meta.push((key.into(), value.to_string()));
        self
    }

    pub fn meta(&self) -> &[(String, String)] {
        &self.meta
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn time(&self) -> &[f64] {
        &self.time
    }

    pub fn values_left(&self) -> &[f64] {
        &self.left
    }

    pub fn values_right(&self) -> &[f64] {
        &self.right
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Right value at the last grid point.
    pub fn final_value(&self) -> Option<f64> {
        self.right.last().copied()
    }

    /// Right value at the largest grid point `≤ x`.
    pub fn value_at(&self, x: f64) -> Option<f64> {
        let k = self.grid.partition_point(|g| *g <= x);
        (k > 0).then(|| self.right[k - 1])
    }

    /// Every value multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.left.iter_mut().for_each(|v| *v *= c);
        out.right.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// The sub-path on grid points inside `[lo, hi]`.
    pub fn restricted(&self, lo: f64, hi: f64) -> Self {
        let keep: Vec<usize> = (0..self.len())
            .filter(|i| self.grid[*i] >= lo && self.grid[*i] <= hi)
            .collect();
        let pick = |v: &[f64]| keep.iter().map(|i| v[*i]).collect::<Vec<_>>();
        Self {
            grid: pick(&self.grid),
            time: pick(&self.time),
            left: pick(&self.left),
            right: pick(&self.right),
            meta: self.meta.clone(),
        }
    }

    /// CSV with columns `x,value_left,value_right`, preceded by `# key=value`
    /// comment lines for the metadata.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str("x,value_left,value_right\n");
        for i in 0..self.len() {
            let _ = writeln!(out, "{},{},{}", self.grid[i], self.left[i], self.right[i]);
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Reads the CSV layout written by [`ProcessPath::to_csv`]. Time is not
    /// stored in the file and is restored as the grid itself.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut meta = Vec::new();
        let (mut grid, mut left, mut right) = (Vec::new(), Vec::new(), Vec::new());
        let mut header_seen = false;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.trim().split_once('=') {
                    meta.push((k.to_string(), v.to_string()));
                }
                continue;
            }
            if !header_seen {
                header_seen = true;
                if line == "x,value_left,value_right" {
                    continue;
                }
            }
            let cols: Vec<&str> = line.split(',').collect();
            let parse = |s: &str| {
                s.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line: i + 1,
                    msg: format!("`{s}` is not a number"),
                })
            };
            if cols.len() != 3 {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected 3 columns, found {}", cols.len()),
                });
            }
            grid.push(parse(cols[0])?);
            left.push(parse(cols[1])?);
            right.push(parse(cols[2])?);
        }
        let mut path = Self::new(grid.clone(), grid, left, right)?;
        path.meta = meta;
        Ok(path)
    }
}
