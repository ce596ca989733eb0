//! Run configuration: flat `key = value` files with command-line overrides.

use crate::ddm::{ErrorSampling, SolverConfig};
use crate::error::{Error, Result};
use crate::impedance::{ImpedanceKind, ImpedanceSpec};
use crate::mesh::PartitionMethod;
use crate::C64;
use std::f64::consts::PI;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Richardson,
    Gmres,
}

impl std::str::FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "richardson" => Ok(SolverKind::Richardson),
            "gmres" => Ok(SolverKind::Gmres),
            _ => Err(cfg("solver", format!("unknown solver `{s}` (expected richardson or gmres)"))),
        }
    }
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolverKind::Richardson => "richardson",
            SolverKind::Gmres => "gmres",
        })
    }
}

fn cfg(field: &str, msg: impl Into<String>) -> Error {
    Error::Config { field: field.to_string(), msg: msg.into() }
}

/// Everything needed to set up and solve one scattering run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub radius: f64,
    pub kappa: f64,
    pub kappa_imag: f64,
    /// Contrast: `μ = 1 + mu_r` inside the inclusion.
    pub mu_r: f64,
    pub inclusion_radius: f64,
    pub n_lambda: f64,
    /// Explicit mesh size, overriding `2π / (κ N_λ)`.
    pub h: Option<f64>,
    /// MSH file used instead of the generated disk.
    pub mesh_file: Option<PathBuf>,
    pub j: usize,
    pub partition: PartitionMethod,
    pub impedance: ImpedanceKind,
    pub kappa_r: Option<f64>,
    pub imp_a: Option<f64>,
    pub imp_b: Option<f64>,
    pub delta: Option<f64>,
    pub solver: SolverKind,
    pub r: f64,
    pub tol: f64,
    pub restart: usize,
    pub max_iter: usize,
    pub sample_every_restart: bool,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            radius: 1.0,
            kappa: 1.0,
            kappa_imag: 0.0,
            mu_r: 0.0,
            inclusion_radius: 0.5,
            n_lambda: 20.0,
            h: None,
            mesh_file: None,
            j: 4,
            partition: PartitionMethod::GraphGrowing,
            impedance: ImpedanceKind::M,
            kappa_r: None,
            imp_a: None,
            imp_b: None,
            delta: None,
            solver: SolverKind::Gmres,
            r: 0.5,
            tol: 1e-8,
            restart: 20,
            max_iter: 100_000,
            sample_every_restart: false,
            seed: 0,
        }
    }
}

fn as_f64(field: &str, v: &toml::Value) -> Result<f64> {
    match v {
        toml::Value::Float(x) => Ok(*x),
        toml::Value::Integer(i) => Ok(*i as f64),
        toml::Value::String(s) => s.trim().parse().map_err(|_| cfg(field, format!("expected a number, got `{s}`"))),
        other => Err(cfg(field, format!("expected a number, got {other}"))),
    }
}

fn as_usize(field: &str, v: &toml::Value) -> Result<usize> {
    match v {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        toml::Value::String(s) => s.trim().parse().map_err(|_| cfg(field, format!("expected a non-negative integer, got `{s}`"))),
        other => Err(cfg(field, format!("expected a non-negative integer, got {other}"))),
    }
}

fn as_str(field: &str, v: &toml::Value) -> Result<String> {
    match v {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(x) => Ok(x.to_string()),
        toml::Value::Boolean(b) => Ok(b.to_string()),
        other => Err(cfg(field, format!("expected a string, got {other}"))),
    }
}

fn as_bool(field: &str, v: &toml::Value) -> Result<bool> {
    match v {
        toml::Value::Boolean(b) => Ok(*b),
        toml::Value::String(s) => s.trim().parse().map_err(|_| cfg(field, format!("expected true or false, got `{s}`"))),
        other => Err(cfg(field, format!("expected true or false, got {other}"))),
    }
}

impl RunConfig {
    /// Parses a flat TOML document; unknown keys are errors.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| cfg("<file>", e.to_string()))?;
        let mut c = RunConfig::default();
        for (k, v) in &table {
            c.set_value(k, v)?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Applies a `key=value` override. The value is read as TOML when
    /// possible, otherwise as a bare string.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| cfg(assignment, "override must have the form key=value"))?;
        let (k, v) = (k.trim(), v.trim());
        let value = format!("x = {v}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("x"))
            .unwrap_or_else(|| toml::Value::String(v.to_string()));
        self.set_value(k, &value)
    }

    fn set_value(&mut self, key: &str, v: &toml::Value) -> Result<()> {
        match key {
            "radius" => self.radius = as_f64(key, v)?,
            "kappa" => self.kappa = as_f64(key, v)?,
            "kappa_imag" => self.kappa_imag = as_f64(key, v)?,
            "mu_r" => self.mu_r = as_f64(key, v)?,
            "inclusion_radius" => self.inclusion_radius = as_f64(key, v)?,
            "n_lambda" => self.n_lambda = as_f64(key, v)?,
            "h" => self.h = Some(as_f64(key, v)?),
            "mesh_file" => self.mesh_file = Some(PathBuf::from(as_str(key, v)?)),
            "j" | "J" => self.j = as_usize(key, v)?,
            "partition" => {
                self.partition = as_str(key, v)?.parse().map_err(|e: Error| cfg(key, e.to_string()))?;
            }
            "impedance" => {
                self.impedance = as_str(key, v)?.parse().map_err(|e: Error| cfg(key, e.to_string()))?;
            }
            "kappa_r" => self.kappa_r = Some(as_f64(key, v)?),
            "a" => self.imp_a = Some(as_f64(key, v)?),
            "b" => self.imp_b = Some(as_f64(key, v)?),
            "delta" => self.delta = Some(as_f64(key, v)?),
            "solver" => self.solver = as_str(key, v)?.parse()?,
            "r" => self.r = as_f64(key, v)?,
            "tol" => self.tol = as_f64(key, v)?,
            "restart" => self.restart = as_usize(key, v)?,
            "max_iter" => self.max_iter = as_usize(key, v)?,
            "sample_every_restart" => self.sample_every_restart = as_bool(key, v)?,
            "seed" => self.seed = as_usize(key, v)? as u64,
            _ => return Err(cfg(key, "unknown configuration key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(cfg(field, format!("must be positive, got {v}")))
            }
        };
        pos("radius", self.radius)?;
        pos("kappa", self.kappa)?;
        pos("n_lambda", self.n_lambda)?;
        pos("inclusion_radius", self.inclusion_radius)?;
        if !(self.kappa_imag >= 0.0) {
            return Err(cfg("kappa_imag", "must be non-negative"));
        }
        if !(self.mu_r > -1.0) {
            return Err(cfg("mu_r", "contrast must exceed -1 so that mu stays positive"));
        }
        if let Some(h) = self.h {
            pos("h", h)?;
        }
        if self.j == 0 {
            return Err(cfg("j", "must be at least 1"));
        }
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(cfg("r", format!("relaxation must lie in (0, 1), got {}", self.r)));
        }
        pos("tol", self.tol)?;
        if self.restart == 0 {
            return Err(cfg("restart", "must be at least 1"));
        }
        if self.max_iter == 0 {
            return Err(cfg("max_iter", "must be at least 1"));
        }
        for (field, v) in [("kappa_r", self.kappa_r), ("a", self.imp_a), ("b", self.imp_b), ("delta", self.delta)] {
            if let Some(v) = v {
                pos(field, v)?;
            }
        }
        Ok(())
    }

    pub fn kappa_complex(&self) -> C64 {
        C64::new(self.kappa, self.kappa_imag)
    }

    /// `2π / (κ N_λ)` unless `h` is set.
    pub fn mesh_size(&self) -> f64 {
        self.h.unwrap_or(2.0 * PI / (self.kappa * self.n_lambda))
    }

    /// Impedance with wavenumber defaults, individually overridable.
    pub fn impedance_spec(&self) -> Result<ImpedanceSpec> {
        self.impedance_spec_for(self.impedance)
    }

    pub fn impedance_spec_for(&self, kind: ImpedanceKind) -> Result<ImpedanceSpec> {
        let k = self.kappa_complex().norm();
        let spec = match ImpedanceSpec::for_wavenumber(kind, k)? {
            ImpedanceSpec::Despres { kappa_r } => ImpedanceSpec::Despres { kappa_r: self.kappa_r.unwrap_or(kappa_r) },
            ImpedanceSpec::SecondOrder { a, b } => {
                ImpedanceSpec::SecondOrder { a: self.imp_a.unwrap_or(a), b: self.imp_b.unwrap_or(b) }
            }
            ImpedanceSpec::Hypersingular { a, delta } => {
                ImpedanceSpec::Hypersingular { a: self.imp_a.unwrap_or(a), delta: self.delta.unwrap_or(delta) }
            }
            ImpedanceSpec::Schur => ImpedanceSpec::Schur,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            r: self.r,
            tol: self.tol,
            max_iter: self.max_iter,
            restart: self.restart,
            sampling: if self.sample_every_restart { ErrorSampling::EveryRestart } else { ErrorSampling::EveryIteration },
        }
    }
}
