//! In-memory draw container and its on-disk layout.
//!
//! A store directory holds `store.json` (shapes, names, acceptance, warnings),
//! one raw little-endian `f64` file per parameter group and `summary.csv`.
//! Matrices are written column-major, draw after draw: `phi.f64` has
//! `draws × (T·k) × N` values, `sigma.f64` has `draws × N × N`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::ChainConfig;
use crate::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DrawStore {
    pub model: String,
    pub config: Option<ChainConfig>,
    /// `(T, k, N)` of each Φ draw.
    pub shape: (usize, usize, usize),
    pub theta_names: Vec<String>,
    pub lambda: Vec<f64>,
    pub gamma: Vec<f64>,
    pub theta: Vec<Vec<f64>>,
    pub log_ml: Vec<f64>,
    pub phi: Vec<DMatrix<f64>>,
    pub sigma: Vec<DMatrix<f64>>,
    pub chain: Vec<usize>,
    /// Post burn-in acceptance of the (λ, γ) and θ blocks, per chain.
    pub acceptance: Vec<[f64; 2]>,
    pub warnings: Vec<String>,
    pub rejections: usize,
    /// Additional per-draw vectors (e.g. state variances of a baseline).
    pub extra: BTreeMap<String, Vec<Vec<f64>>>,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    model: String,
    config: Option<ChainConfig>,
    shape: (usize, usize, usize),
    n_draws: usize,
    n_phi: usize,
    n_sigma: usize,
    theta_names: Vec<String>,
    theta_dim: usize,
    chain: Vec<usize>,
    acceptance: Vec<[Option<f64>; 2]>,
    warnings: Vec<String>,
    rejections: usize,
    extra: BTreeMap<String, usize>,
    layout: String,
}

fn write_f64(path: &Path, vals: impl Iterator<Item = f64>) -> Result<()> {
    let bytes: Vec<u8> = vals.flat_map(|v| v.to_le_bytes()).collect();
    fs::write(path, bytes)?;
    Ok(())
}

fn read_f64(path: &Path) -> Result<Vec<f64>> {
    let bytes = fs::read(path)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Config(format!(
            "{}: length not a multiple of 8",
            path.display()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn mats(vals: &[f64], r: usize, c: usize, n: usize) -> Result<Vec<DMatrix<f64>>> {
    if vals.len() != r * c * n {
        return Err(Error::Dimension(format!(
            "expected {} values, found {}",
            r * c * n,
            vals.len()
        )));
    }
    Ok((0..n)
        .map(|i| DMatrix::from_column_slice(r, c, &vals[i * r * c..(i + 1) * r * c]))
        .collect())
}

/// Quantile by linear interpolation between order statistics.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

impl DrawStore {
    pub fn new(model: &str, cfg: &ChainConfig) -> Self {
        Self {
            model: model.to_string(),
            config: Some(cfg.clone()),
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.lambda.len().max(self.phi.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Append another chain's draws.
    pub fn merge(&mut self, other: DrawStore) {
        self.lambda.extend(other.lambda);
        self.gamma.extend(other.gamma);
        self.theta.extend(other.theta);
        self.log_ml.extend(other.log_ml);
        self.phi.extend(other.phi);
        self.sigma.extend(other.sigma);
        self.chain.extend(other.chain);
        self.acceptance.extend(other.acceptance);
        self.warnings.extend(other.warnings);
        self.rejections += other.rejections;
        for (k, v) in other.extra {
            self.extra.entry(k).or_default().extend(v);
        }
    }

    /// Φ block of period `t` (0-based) in draw `i`.
    pub fn phi_at(&self, i: usize, t: usize) -> DMatrix<f64> {
        let (_, k, n) = self.shape;
        self.phi[i].view((t * k, 0), (k, n)).into_owned()
    }

    /// `(name, median, q10, q90)` for λ, γ and each θ entry.
    pub fn summary(&self) -> Vec<(String, f64, f64, f64)> {
        let mut rows = Vec::new();
        let mut push = |name: String, xs: &[f64]| {
            if !xs.is_empty() {
                rows.push((
                    name,
                    quantile(xs, 0.5),
                    quantile(xs, 0.1),
                    quantile(xs, 0.9),
                ));
            }
        };
        push("lambda".into(), &self.lambda);
        push("gamma".into(), &self.gamma);
        let d = self.theta.first().map_or(0, Vec::len);
        for j in 0..d {
            let col: Vec<f64> = self.theta.iter().map(|t| t[j]).collect();
            let name = self
                .theta_names
                .get(j)
                .cloned()
                .unwrap_or_else(|| format!("theta{j}"));
            push(name, &col);
        }
        rows
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let (t, k, n) = self.shape;
        let theta_dim = self.theta.first().map_or(0, Vec::len);
        write_f64(&dir.join("lambda.f64"), self.lambda.iter().copied())?;
        write_f64(&dir.join("gamma.f64"), self.gamma.iter().copied())?;
        write_f64(&dir.join("log_ml.f64"), self.log_ml.iter().copied())?;
        write_f64(&dir.join("theta.f64"), self.theta.iter().flatten().copied())?;
        write_f64(
            &dir.join("phi.f64"),
            self.phi.iter().flat_map(|m| m.iter().copied()),
        )?;
        write_f64(
            &dir.join("sigma.f64"),
            self.sigma.iter().flat_map(|m| m.iter().copied()),
        )?;
        let mut extra = BTreeMap::new();
        for (name, v) in &self.extra {
            extra.insert(name.clone(), v.first().map_or(0, Vec::len));
            write_f64(
                &dir.join(format!("extra_{name}.f64")),
                v.iter().flatten().copied(),
            )?;
        }
        let side = Sidecar {
            model: self.model.clone(),
            config: self.config.clone(),
            shape: (t, k, n),
            n_draws: self.lambda.len(),
            n_phi: self.phi.len(),
            n_sigma: self.sigma.len(),
            theta_names: self.theta_names.clone(),
            theta_dim,
            chain: self.chain.clone(),
            acceptance: self
                .acceptance
                .iter()
                .map(|a| a.map(|x| x.is_finite().then_some(x)))
                .collect(),
            warnings: self.warnings.clone(),
            rejections: self.rejections,
            extra,
            layout: "little-endian f64; matrices column-major, draws consecutive".into(),
        };
        fs::write(dir.join("store.json"), serde_json::to_string_pretty(&side)?)?;
        let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
        w.write_record(["parameter", "median", "q10", "q90"])?;
        for (name, med, lo, hi) in self.summary() {
            w.write_record([name, med.to_string(), lo.to_string(), hi.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let side: Sidecar = serde_json::from_str(&fs::read_to_string(dir.join("store.json"))?)?;
        let (t, k, n) = side.shape;
        let theta_flat = read_f64(&dir.join("theta.f64"))?;
        let theta = if side.theta_dim == 0 {
            vec![Vec::new(); side.n_draws]
        } else {
            theta_flat
                .chunks(side.theta_dim)
                .map(<[f64]>::to_vec)
                .collect()
        };
        let mut extra = BTreeMap::new();
        for (name, d) in &side.extra {
            let v = read_f64(&dir.join(format!("extra_{name}.f64")))?;
            let rows = if *d == 0 {
                Vec::new()
            } else {
                v.chunks(*d).map(<[f64]>::to_vec).collect()
            };
            extra.insert(name.clone(), rows);
        }
        Ok(Self {
            model: side.model,
            config: side.config,
            shape: side.shape,
            theta_names: side.theta_names,
            lambda: read_f64(&dir.join("lambda.f64"))?,
            gamma: read_f64(&dir.join("gamma.f64"))?,
            theta,
            log_ml: read_f64(&dir.join("log_ml.f64"))?,
            phi: mats(&read_f64(&dir.join("phi.f64"))?, t * k, n, side.n_phi)?,
            sigma: mats(&read_f64(&dir.join("sigma.f64"))?, n, n, side.n_sigma)?,
            chain: side.chain,
            acceptance: side
                .acceptance
                .iter()
                .map(|a| a.map(|x| x.unwrap_or(f64::NAN)))
                .collect(),
            warnings: side.warnings,
            rejections: side.rejections,
            extra,
        })
    }
}
