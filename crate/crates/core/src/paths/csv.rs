//! Plain CSV for ensembles: `path,step,k,value` (dual) and `path,step,value`
//! (scalar). Values use Rust's shortest round-trip float formatting.

use std::io::{BufRead, Write};

use super::grid::{DualPath, DualPathEnsemble, ScalarPathEnsemble, TimeGrid};
use crate::error::{Error, Result};
use crate::hermite::BasisSpec;

pub fn write_dual_csv(ensemble: &DualPathEnsemble, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "path,step,k,value")?;
    for (m, path) in ensemble.paths().iter().enumerate() {
        for (j, state) in path.states().enumerate() {
            for (k, v) in state.iter().enumerate() {
                writeln!(out, "{m},{j},{k},{v}")?;
            }
        }
    }
    Ok(())
}

pub fn write_scalar_csv(ensemble: &ScalarPathEnsemble, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "path,step,value")?;
    for (m, path) in ensemble.paths.iter().enumerate() {
        for (j, v) in path.iter().enumerate() {
            writeln!(out, "{m},{j},{v}")?;
        }
    }
    Ok(())
}

fn fields<const K: usize>(line: &str, lineno: usize) -> Result<[&str; K]> {
    let parts: Vec<&str> = line.trim().split(',').collect();
    parts
        .try_into()
        .map_err(|_| Error::invalid(format!("line {lineno}: expected {K} fields")))
}

fn parse<T: std::str::FromStr>(s: &str, lineno: usize) -> Result<T> {
    s.parse()
        .map_err(|_| Error::invalid(format!("line {lineno}: cannot parse `{s}`")))
}

pub fn read_dual_csv(
    input: impl BufRead,
    grid: TimeGrid,
    basis: BasisSpec,
) -> Result<DualPathEnsemble> {
    let mut paths: Vec<Vec<f64>> = Vec::new();
    let per_path = grid.len() * basis.n;
    for (i, line) in input.lines().enumerate().skip(1) {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let [m, j, k, v] = fields::<4>(&line, i + 1)?;
        let (m, j, k): (usize, usize, usize) =
            (parse(m, i + 1)?, parse(j, i + 1)?, parse(k, i + 1)?);
        if j >= grid.len() || k >= basis.n {
            return Err(Error::invalid(format!(
                "line {}: index out of range",
                i + 1
            )));
        }
        if m >= paths.len() {
            paths.resize_with(m + 1, || vec![f64::NAN; per_path]);
        }
        paths[m][j * basis.n + k] = parse(v, i + 1)?;
    }
    let paths = paths
        .into_iter()
        .map(|c| DualPath::new(grid, basis, c))
        .collect::<Result<Vec<_>>>()?;
    DualPathEnsemble::new(paths)
}

pub fn read_scalar_csv(input: impl BufRead, grid: TimeGrid) -> Result<ScalarPathEnsemble> {
    let mut paths: Vec<Vec<f64>> = Vec::new();
    for (i, line) in input.lines().enumerate().skip(1) {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let [m, j, v] = fields::<3>(&line, i + 1)?;
        let (m, j): (usize, usize) = (parse(m, i + 1)?, parse(j, i + 1)?);
        if j >= grid.len() {
            return Err(Error::invalid(format!("line {}: step out of range", i + 1)));
        }
        if m >= paths.len() {
            paths.resize_with(m + 1, || vec![f64::NAN; grid.len()]);
        }
        paths[m][j] = parse(v, i + 1)?;
    }
    if paths.iter().flatten().any(|v| v.is_nan()) {
        return Err(Error::invalid("scalar CSV is missing entries"));
    }
    ScalarPathEnsemble::new(grid, paths, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_roundtrip_is_bit_exact() {
        let g = TimeGrid::new(0.5, 3).unwrap();
        let spec = BasisSpec::new(2).unwrap();
        let a = DualPath::from_fn(g, spec, |t| vec![t / 3.0, (t * 1.7).exp()]).unwrap();
        let b = DualPath::from_fn(g, spec, |t| vec![-t.sqrt(), 1e-300]).unwrap();
        let e = DualPathEnsemble::new(vec![a, b]).unwrap();
        let mut buf = Vec::new();
        write_dual_csv(&e, &mut buf).unwrap();
        let back = read_dual_csv(buf.as_slice(), g, spec).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn scalar_roundtrip_and_missing_entries() {
        let g = TimeGrid::new(1.0, 2).unwrap();
        let e =
            ScalarPathEnsemble::new(g, vec![vec![0.0, 0.1, 0.30000000000000004]], None).unwrap();
        let mut buf = Vec::new();
        write_scalar_csv(&e, &mut buf).unwrap();
        assert_eq!(read_scalar_csv(buf.as_slice(), g).unwrap(), e);
        let short = "path,step,value\n0,0,1\n0,2,3\n";
        assert!(read_scalar_csv(short.as_bytes(), g).is_err());
    }
}
