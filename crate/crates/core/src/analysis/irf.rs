//! Impulse responses identified by the theory's impact matrix.

use nalgebra::DMatrix;

use crate::sampler::store::quantile;
use crate::sampler::DrawStore;
use crate::{Error, Result};

/// Responses per reference date and draw: `responses[d][i][h]` is `N x nε`.
#[derive(Clone, Debug)]
pub struct IrfResult {
    pub dates: Vec<usize>,
    pub variables: Vec<String>,
    pub shocks: Vec<String>,
    pub cumulative: Vec<bool>,
    pub responses: Vec<Vec<Vec<DMatrix<f64>>>>,
}

/// Slope matrices `A_l` (`N x N`) of the companion form from a `k x N` block.
pub fn lag_matrices(phi: &DMatrix<f64>, p: usize) -> Result<Vec<DMatrix<f64>>> {
    let (k, n) = phi.shape();
    if k != 1 + n * p {
        return Err(Error::NonCompanionable { k });
    }
    Ok((0..p).map(|l| phi.rows(1 + l * n, n).transpose()).collect())
}

/// Level responses `Ψ_0 = impact`, `Ψ_h = Σ_l A_l Ψ_{h−l}` for `h ≤ horizon`.
pub fn propagate(
    lags: &[DMatrix<f64>],
    impact: &DMatrix<f64>,
    horizon: usize,
) -> Vec<DMatrix<f64>> {
    let mut out: Vec<DMatrix<f64>> = vec![impact.clone()];
    for h in 1..=horizon {
        let mut r = DMatrix::zeros(impact.nrows(), impact.ncols());
        for (l, a) in lags.iter().enumerate() {
            if h > l {
                r += a * &out[h - l - 1];
            }
        }
        out.push(r);
    }
    out
}

/// Replace the rows flagged `cumulative` by their prefix sums over horizons.
pub fn accumulate(resp: &mut [DMatrix<f64>], cumulative: &[bool]) {
    for h in 1..resp.len() {
        let prev = resp[h - 1].clone();
        for (i, c) in cumulative.iter().enumerate() {
            if *c {
                for j in 0..prev.ncols() {
                    resp[h][(i, j)] += prev[(i, j)];
                }
            }
        }
    }
}

/// Responses for every stored Φ draw at each reference date (0-based
/// estimation period). `impact(i, date)` returns the identified impact
/// matrix of draw `i`; Φ is held at its value at the reference date.
pub fn irf(
    store: &DrawStore,
    p: usize,
    impact: impl Fn(usize, usize) -> Result<DMatrix<f64>> + Sync,
    dates: &[usize],
    horizon: usize,
    cumulative: &[bool],
) -> Result<IrfResult> {
    use rayon::prelude::*;
    let (t_len, k, n) = store.shape;
    if store.phi.is_empty() {
        return Err(Error::EmptyRun);
    }
    if k != 1 + n * p {
        return Err(Error::NonCompanionable { k });
    }
    if let Some(d) = dates.iter().find(|&&d| d >= t_len) {
        return Err(Error::InvalidParameter(format!(
            "reference date {d} outside the {t_len} estimation periods"
        )));
    }
    let mut responses = Vec::with_capacity(dates.len());
    for &d in dates {
        let per: Result<Vec<Vec<DMatrix<f64>>>> = (0..store.phi.len())
            .into_par_iter()
            .map(|i| {
                let lags = lag_matrices(&store.phi_at(i, d), p)?;
                let imp = impact(i, d)?;
                if imp.nrows() != n {
                    return Err(Error::Dimension(format!(
                        "impact has {} rows, VAR has {n} variables",
                        imp.nrows()
                    )));
                }
                let mut r = propagate(&lags, &imp, horizon);
                accumulate(&mut r, cumulative);
                Ok(r)
            })
            .collect();
        responses.push(per?);
    }
    let n_shocks = responses[0][0][0].ncols();
    Ok(IrfResult {
        dates: dates.to_vec(),
        variables: (0..n).map(|i| format!("y{i}")).collect(),
        shocks: (0..n_shocks).map(|j| format!("e{j}")).collect(),
        cumulative: cumulative.to_vec(),
        responses,
    })
}

impl IrfResult {
    pub fn horizons(&self) -> usize {
        self.responses
            .first()
            .and_then(|d| d.first())
            .map_or(0, Vec::len)
    }

    /// Draws of the response of `var` to `shock` at date index `d`, horizon `h`.
    pub fn draws(&self, d: usize, var: usize, shock: usize, h: usize) -> Vec<f64> {
        self.responses[d]
            .iter()
            .map(|r| r[h][(var, shock)])
            .collect()
    }

    /// `(q10, q50, q90)`.
    pub fn band(&self, d: usize, var: usize, shock: usize, h: usize) -> (f64, f64, f64) {
        let x = self.draws(d, var, shock, h);
        (quantile(&x, 0.1), quantile(&x, 0.5), quantile(&x, 0.9))
    }

    /// Long format: date, shock, variable, horizon, q10, q50, q90.
    pub fn write_csv(&self, path: &std::path::Path, date_labels: &[String]) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["date", "shock", "variable", "horizon", "q10", "q50", "q90"])?;
        for (di, d) in self.dates.iter().enumerate() {
            let label = date_labels
                .get(*d)
                .cloned()
                .unwrap_or_else(|| d.to_string());
            for (s, sname) in self.shocks.iter().enumerate() {
                for (v, vname) in self.variables.iter().enumerate() {
                    for h in 0..self.horizons() {
                        let (a, b, c) = self.band(di, v, s, h);
                        w.write_record([
                            label.clone(),
                            sname.clone(),
                            vname.clone(),
                            h.to_string(),
                            a.to_string(),
                            b.to_string(),
                            c.to_string(),
                        ])?;
                    }
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}
