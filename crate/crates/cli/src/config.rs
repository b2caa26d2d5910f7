//! Flat `key = value` run configuration. `#` starts a comment; unknown keys
//! are rejected so typos do not silently fall back to defaults.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    Disk,
    Square,
    PlaneWave,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Richardson,
    Gmres,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub problem: Problem,
    /// Mesh file replacing the generator.
    pub mesh: Option<PathBuf>,
    pub sectors: usize,
    pub r_skeleton: f64,
    pub r_outer: f64,
    pub h: f64,
    pub half_width: f64,
    pub cells: usize,
    pub kappa0: f64,
    /// Per-subdomain `μ`; empty means the problem default.
    pub mu: Vec<f64>,
    pub kappa_sq: Vec<f64>,
    pub kappa_sq_im: Vec<f64>,
    /// Gaussian source `[x, y, width]`; empty means no source.
    pub source: Vec<f64>,
    pub theta: f64,
    pub gamma: Option<f64>,
    pub omega: Option<f64>,
    pub closure: String,
    pub solver: Solver,
    pub form: String,
    pub beta: f64,
    pub tol: f64,
    pub maxit: usize,
    pub restart: usize,
    pub exec: String,
    pub probes: usize,
    pub seed: u64,
    pub oracle: bool,
    pub record_timings: bool,
    /// `j:pos` redirects one entry of the restriction map (verify only).
    pub corrupt_restriction: Option<(usize, usize)>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: Problem::Disk,
            mesh: None,
            sectors: 3,
            r_skeleton: 1.0,
            r_outer: 2.0,
            h: 0.1,
            half_width: 1.0,
            cells: 32,
            kappa0: 3.0,
            mu: Vec::new(),
            kappa_sq: Vec::new(),
            kappa_sq_im: Vec::new(),
            source: vec![0.3, 0.1, 0.35],
            theta: 0.7,
            gamma: None,
            omega: None,
            closure: "absorbing".into(),
            solver: Solver::Richardson,
            form: "product".into(),
            beta: 0.5,
            tol: 1e-10,
            maxit: 20_000,
            restart: 200,
            exec: "parallel".into(),
            probes: 20,
            seed: 1,
            oracle: true,
            record_timings: true,
            corrupt_restriction: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: Display,
{
    value.parse().map_err(|e| anyhow!("{key}: cannot parse {value:?}: {e}"))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    if value.trim().is_empty() || value.trim() == "none" {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| parse(key, v.trim())).collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => bail!("{key}: expected true or false, got {value:?}"),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse_str(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value", n + 1))?;
            cfg.set(key.trim(), value.trim()).with_context(|| format!("line {}", n + 1))?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "problem" => {
                self.problem = match v {
                    "disk" => Problem::Disk,
                    "square" => Problem::Square,
                    "plane-wave" => Problem::PlaneWave,
                    _ => bail!("problem: expected disk, square or plane-wave, got {v:?}"),
                }
            }
            "mesh" => self.mesh = (!v.is_empty()).then(|| PathBuf::from(v)),
            "sectors" => self.sectors = parse(key, v)?,
            "r_skeleton" => self.r_skeleton = parse(key, v)?,
            "r_outer" => self.r_outer = parse(key, v)?,
            "h" => self.h = parse(key, v)?,
            "half_width" => self.half_width = parse(key, v)?,
            "cells" => self.cells = parse(key, v)?,
            "kappa0" => self.kappa0 = parse(key, v)?,
            "mu" => self.mu = parse_list(key, v)?,
            "kappa_sq" => self.kappa_sq = parse_list(key, v)?,
            "kappa_sq_im" => self.kappa_sq_im = parse_list(key, v)?,
            "source" => self.source = parse_list(key, v)?,
            "theta" => self.theta = parse(key, v)?,
            "gamma" => self.gamma = (v != "auto").then(|| parse(key, v)).transpose()?,
            "omega" => self.omega = (v != "auto").then(|| parse(key, v)).transpose()?,
            "closure" => self.closure = v.to_string(),
            "solver" => {
                self.solver = match v {
                    "richardson" => Solver::Richardson,
                    "gmres" => Solver::Gmres,
                    _ => bail!("solver: expected richardson or gmres, got {v:?}"),
                }
            }
            "form" => self.form = v.to_string(),
            "beta" => self.beta = parse(key, v)?,
            "tol" => self.tol = parse(key, v)?,
            "maxit" => self.maxit = parse(key, v)?,
            "restart" => self.restart = parse(key, v)?,
            "exec" => self.exec = v.to_string(),
            "probes" => self.probes = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "oracle" => self.oracle = parse_bool(key, v)?,
            "record_timings" => self.record_timings = parse_bool(key, v)?,
            "corrupt_restriction" => {
                self.corrupt_restriction = if v == "none" || v.is_empty() {
                    None
                } else {
                    let (j, p) = v
                        .split_once(':')
                        .ok_or_else(|| anyhow!("corrupt_restriction: expected j:pos, got {v:?}"))?;
                    Some((parse(key, j)?, parse(key, p)?))
                }
            }
            _ => bail!("unknown key {key:?}"),
        }
        Ok(())
    }

    /// Checks ranges and enumerated strings; called after all overrides.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("r_skeleton", self.r_skeleton),
            ("r_outer", self.r_outer),
            ("h", self.h),
            ("half_width", self.half_width),
            ("kappa0", self.kappa0),
            ("tol", self.tol),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                bail!("{k} must be positive, got {v}");
            }
        }
        for (k, v) in [("gamma", self.gamma), ("omega", self.omega)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    bail!("{k} must be positive, got {v}");
                }
            }
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            bail!("beta must lie in (0, 1), got {}", self.beta);
        }
        if self.r_outer <= self.r_skeleton {
            bail!("r_outer must exceed r_skeleton");
        }
        if self.maxit == 0 || self.restart == 0 || self.probes == 0 {
            bail!("maxit, restart and probes must be positive");
        }
        if !matches!(self.closure.as_str(), "absorbing" | "exact") {
            bail!("closure: expected absorbing or exact, got {:?}", self.closure);
        }
        if !matches!(self.form.as_str(), "product" | "difference") {
            bail!("form: expected product or difference, got {:?}", self.form);
        }
        if !matches!(self.exec.as_str(), "parallel" | "sequential") {
            bail!("exec: expected parallel or sequential, got {:?}", self.exec);
        }
        if !(self.source.is_empty() || self.source.len() == 3) {
            bail!("source: expected x, y, width or none");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_lists_and_overrides() {
        let cfg = RunConfig::parse_str(
            "# reference disk\nproblem = disk\nh = 0.05  # finer\nmu = 1, 2, 1, 2\ngamma = auto\nomega = 4\nsolver = gmres\ncorrupt_restriction = 1:3\n",
        )
        .unwrap();
        assert_eq!(cfg.h, 0.05);
        assert_eq!(cfg.mu, vec![1.0, 2.0, 1.0, 2.0]);
        assert_eq!(cfg.gamma, None);
        assert_eq!(cfg.omega, Some(4.0));
        assert_eq!(cfg.solver, Solver::Gmres);
        assert_eq!(cfg.corrupt_restriction, Some((1, 3)));
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::parse_str("nonsense = 1").is_err());
        assert!(RunConfig::parse_str("h 0.1").is_err());
        assert!(RunConfig::parse_str("h = abc").is_err());
        let mut cfg = RunConfig {
            beta: 1.0,
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
        cfg.beta = 0.5;
        cfg.closure = "pml".into();
        assert!(cfg.validate().is_err());
    }
}
