#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

use ncjoin_core::numerics::{least_squares, CMatrix, C64};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(name: &str, file: &str) -> PathBuf {
    fixtures().join(name).join(file)
}

pub fn ncjoin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncjoin"))
        .args(args)
        .env_remove("NCJOIN_TOL")
        .output()
        .expect("binary runs")
}

pub fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

/// Range of `V[i][j]` over the transport polytope with row sums `rows` and
/// column sums `cols`, from brute-force enumeration of basic feasible
/// solutions (supports of size m + n − 1).
pub fn transport_range(rows: &[f64], cols: &[f64], i: usize, j: usize) -> (f64, f64) {
    let (m, n) = (rows.len(), cols.len());
    let cells = m * n;
    let k = m + n - 1;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut support: Vec<usize> = (0..k).collect();
    loop {
        let a = CMatrix::from_fn(m + n, k, |r, c| {
            let (p, q) = (support[c] / n, support[c] % n);
            let hit = if r < m { p == r } else { q == r - m };
            C64::new(if hit { 1.0 } else { 0.0 }, 0.0)
        });
        let b: Vec<C64> = rows.iter().chain(cols).map(|&x| C64::new(x, 0.0)).collect();
        if let Ok(x) = least_squares(&a, &b) {
            let fit = a.mul_vec(&x);
            let consistent = fit.iter().zip(&b).all(|(f, t)| (f - t).norm() < 1e-10);
            if consistent && x.iter().all(|v| v.re >= -1e-12) {
                let value = support
                    .iter()
                    .position(|&s| s == i * n + j)
                    .map_or(0.0, |c| x[c].re);
                lo = lo.min(value);
                hi = hi.max(value);
            }
        }
        // next k-subset of 0..cells
        let mut t = k;
        while t > 0 && support[t - 1] == cells - k + t - 1 {
            t -= 1;
        }
        if t == 0 {
            break;
        }
        support[t - 1] += 1;
        for u in t..k {
            support[u] = support[u - 1] + 1;
        }
    }
    (lo, hi)
}
