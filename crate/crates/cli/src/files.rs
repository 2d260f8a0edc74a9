//! CSV and summary files. Numbers are written with 17 significant digits so
//! every value reads back bit-for-bit.

use crate::error::CliError;
use cap_core::{BarrierChain, Complex64, SquareBarrier};
use std::io::Write;
use std::path::Path;

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn out_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output(format!("{}: {e}", path.display()))
}

fn in_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{}: {e}", path.display()))
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| out_err(path, e))?;
    tmp.write_all(bytes).map_err(|e| out_err(path, e))?;
    tmp.persist(path).map_err(|e| out_err(path, e.error))?;
    Ok(())
}

fn table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

/// One row per slab at its left edge, then a closing row at the right edge with `V = 0`.
pub fn profile_csv(chain: &BarrierChain) -> Vec<u8> {
    let rows = chain
        .positioned()
        .map(|(x, s)| vec![num(x), num(s.height.re), num(s.height.im)])
        .chain(std::iter::once(vec![num(chain.end()), num(0.0), num(0.0)]));
    table(&["x", "re_v", "im_v"], rows)
}

pub fn heights_csv(heights: &[Complex64], width: f64) -> Vec<u8> {
    let rows = heights
        .iter()
        .enumerate()
        .map(|(j, v)| vec![(j + 1).to_string(), num(v.re), num(v.im), num(width)]);
    table(&["index", "re_v", "im_v", "width"], rows)
}

/// Rows of `(k, survival, reflection probability, transmission probability)`.
pub fn scan_csv(rows: &[[f64; 4]]) -> Vec<u8> {
    table(
        &["k", "survival", "refl_prob", "trans_prob"],
        rows.iter().map(|r| r.iter().map(|&v| num(v)).collect()),
    )
}

pub fn eta_scan_csv(scan: &[(f64, f64)]) -> Vec<u8> {
    table(&["eta", "f"], scan.iter().map(|&(eta, f)| vec![num(eta), num(f)]))
}

fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| in_err(path, e))?;
    let found = r.headers().map_err(|e| in_err(path, e))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(in_err(
            path,
            format!("expected header {}, found {}", header.join(","), found.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| in_err(path, e))?;
            rec.iter()
                .map(|field| field.trim().parse::<f64>().map_err(|e| in_err(path, format!("{field:?}: {e}"))))
                .collect()
        })
        .collect()
}

pub fn read_profile(path: &Path) -> Result<BarrierChain, CliError> {
    let rows = read_rows(path, &["x", "re_v", "im_v"])?;
    if rows.len() < 2 {
        return Err(in_err(path, "a profile needs at least one slab and the closing row"));
    }
    let segments = rows
        .windows(2)
        .map(|w| SquareBarrier::new(w[1][0] - w[0][0], Complex64::new(w[0][1], w[0][2])))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| in_err(path, e))?;
    Ok(BarrierChain::new(rows[0][0], segments))
}

pub fn read_heights(path: &Path) -> Result<BarrierChain, CliError> {
    let rows = read_rows(path, &["index", "re_v", "im_v", "width"])?;
    if rows.is_empty() {
        return Err(in_err(path, "no barriers"));
    }
    let segments = rows
        .iter()
        .map(|r| SquareBarrier::new(r[3], Complex64::new(r[1], r[2])))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| in_err(path, e))?;
    Ok(BarrierChain::new(0.0, segments))
}

/// Wavenumbers listed under a single `k` header.
pub fn read_k_file(path: &Path) -> Result<Vec<f64>, CliError> {
    Ok(read_rows(path, &["k"])?.into_iter().map(|r| r[0]).collect())
}
