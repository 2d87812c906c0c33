//! CSV side files, written next to the report as `<output_path>.<artifact>.csv`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use hdickman_core::dickman::RhoTable;
use hdickman_core::stats::{CharFunctionGrid, EmpiricalDistribution};
use hdickman_core::Complex64;

use crate::LabError;

/// A named table of numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvArtifact {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvArtifact {
    pub fn new(name: &str, header: &[&str]) -> Self {
        CsvArtifact { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, x) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                // `{:?}` prints the shortest string that round-trips.
                write!(out, "{x:?}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn path_for(&self, output_path: &Path) -> PathBuf {
        let mut s = output_path.as_os_str().to_owned();
        s.push(format!(".{}.csv", self.name));
        PathBuf::from(s)
    }

    pub fn write(&self, output_path: &Path) -> Result<PathBuf, LabError> {
        let path = self.path_for(output_path);
        std::fs::write(&path, self.render()).map_err(|e| LabError::io(&path, e))?;
        Ok(path)
    }
}

/// Columns `u,rho` on the solver grid.
pub fn rho_table(table: &RhoTable) -> CsvArtifact {
    let mut a = CsvArtifact::new("rho", &["u", "rho"]);
    a.rows = table.grid().map(|(u, r)| vec![u, r]).collect();
    a
}

/// Columns `x,ecdf`: the right-continuous ECDF at each distinct sample value.
pub fn ecdf(name: &str, dist: &EmpiricalDistribution) -> CsvArtifact {
    let mut a = CsvArtifact::new(name, &["x", "ecdf"]);
    a.rows = dist.steps().into_iter().map(|(x, f)| vec![x, f]).collect();
    a
}

/// Columns `u,re,im,target_re,target_im`.
pub fn charfn_grid(name: &str, grid: &CharFunctionGrid, target: &[Complex64]) -> CsvArtifact {
    let mut a = CsvArtifact::new(name, &["u", "re", "im", "target_re", "target_im"]);
    a.rows = grid
        .u_values
        .iter()
        .zip(&grid.values)
        .zip(target)
        .map(|((&u, v), t)| vec![u, v.re, v.im, t.re, t.im])
        .collect();
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_csv_starts_at_zero() {
        let t = hdickman_core::dickman::solve_rho(2.0, 1e-3).unwrap();
        let csv = rho_table(&t).render();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("u,rho"));
        assert_eq!(lines.next(), Some("0.0,1.0"));
        assert_eq!(csv.lines().count(), 2002);
    }

    #[test]
    fn side_file_name() {
        let a = CsvArtifact::new("ecdf", &["x"]);
        assert_eq!(a.path_for(Path::new("out/run.json")), PathBuf::from("out/run.json.ecdf.csv"));
    }
}
