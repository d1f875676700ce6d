//! Run configuration: built-in defaults, optionally overlaid by a JSON file,
//! overlaid by command-line flags.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::continuation::{Method, Param, TraceConfig};
use crate::discretization::{kappa_legendre, Scheme, KAPPA_UNIFORM};
use crate::error::{Error, Result};
use crate::geometry::Quadrilateral;
use crate::search::SearchConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StarConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl Default for StarConfig {
    fn default() -> Self {
        StarConfig {
            alpha: -0.2,
            beta: 1.1,
            gamma: 1.2,
            delta: 1.3,
        }
    }
}

impl StarConfig {
    pub fn quad(&self) -> Quadrilateral {
        Quadrilateral::new(self.alpha, self.beta, self.gamma, self.delta)
    }

    pub fn from_quad(q: &Quadrilateral) -> Self {
        StarConfig {
            alpha: q.alpha,
            beta: q.beta,
            gamma: q.gamma,
            delta: q.delta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSection {
    pub l: f64,
    pub h: f64,
    pub epsilon: f64,
    pub prefilter: bool,
    pub area_tol: f64,
}

impl Default for SearchSection {
    fn default() -> Self {
        let d = SearchConfig::default();
        SearchSection {
            l: d.l,
            h: d.h,
            epsilon: d.epsilon,
            prefilter: d.area_prefilter,
            area_tol: d.area_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceSection {
    pub method: Method,
    pub explicit: Param,
    #[serde(rename = "T")]
    pub t_half: f64,
    #[serde(rename = "M")]
    pub steps: usize,
    pub fd_increment: f64,
    pub singular_tol: f64,
}

impl Default for TraceSection {
    fn default() -> Self {
        let d = TraceConfig::default();
        TraceSection {
            method: d.method,
            explicit: d.explicit_param,
            t_half: d.t_half,
            steps: d.steps,
            fd_increment: d.fd_increment,
            singular_tol: d.singular_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeformSection {
    #[serde(rename = "S")]
    pub stages: usize,
    #[serde(rename = "T0")]
    pub t0: f64,
}

impl Default for DeformSection {
    fn default() -> Self {
        DeformSection {
            stages: 10,
            t0: 0.06,
        }
    }
}

/// Fully resolved configuration. Every field has a default, so a JSON file
/// only needs the keys it changes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub star: StarConfig,
    pub scheme: Scheme,
    pub kappa: f64,
    pub search: SearchSection,
    pub trace: TraceSection,
    pub deform: DeformSection,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            star: StarConfig::default(),
            scheme: Scheme::Sp,
            kappa: KAPPA_UNIFORM,
            search: SearchSection::default(),
            trace: TraceSection::default(),
            deform: DeformSection::default(),
        }
    }
}

impl Config {
    /// Reads a config file. A run manifest is accepted too: its `config`
    /// member is used.
    pub fn load(path: &Path) -> Result<Config> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        let inner = match value.get("config") {
            Some(cfg) if value.get("command").is_some() => cfg.clone(),
            _ => value,
        };
        serde_json::from_value(inner)
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Config> {
        match path {
            Some(p) => Config::load(p),
            None => Ok(Config::default()),
        }
    }

    pub fn search_config(&self, threads: Option<usize>) -> SearchConfig {
        SearchConfig {
            l: self.search.l,
            h: self.search.h,
            epsilon: self.search.epsilon,
            scheme: self.scheme,
            kappa: self.kappa,
            area_prefilter: self.search.prefilter,
            area_tol: self.search.area_tol,
            threads,
        }
    }

    pub fn trace_config(&self) -> TraceConfig {
        TraceConfig {
            explicit_param: self.trace.explicit,
            t_half: self.trace.t_half,
            steps: self.trace.steps,
            method: self.trace.method,
            fd_increment: self.trace.fd_increment,
            singular_tol: self.trace.singular_tol,
            scheme: self.scheme,
            kappa: self.kappa,
            ..TraceConfig::default()
        }
    }
}

/// `"legendre"`, `"uniform"` or a number.
pub fn parse_kappa(s: &str) -> std::result::Result<f64, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "legendre" => Ok(kappa_legendre()),
        "uniform" => Ok(KAPPA_UNIFORM),
        other => other
            .parse::<f64>()
            .map_err(|_| format!("expected a number, 'uniform' or 'legendre', got {s:?}")),
    }
}

fn parse_numbers(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("not a number: {t:?}")))
        .collect()
}

/// `alpha,beta,gamma,delta`.
pub fn parse_params(s: &str) -> std::result::Result<Quadrilateral, String> {
    let v = parse_numbers(s)?;
    match v.as_slice() {
        &[a, b, g, d] => Ok(Quadrilateral::new(a, b, g, d)),
        _ => Err(format!("expected 4 numbers alpha,beta,gamma,delta, got {}", v.len())),
    }
}

/// `x1,y1,x2,y2,x3,y3,x4,y4` in mapping order `V1, V2, V3, V4`.
pub fn parse_vertices(s: &str) -> std::result::Result<[crate::geometry::Point; 4], String> {
    let v = parse_numbers(s)?;
    if v.len() != 8 {
        return Err(format!("expected 8 numbers (four x,y pairs), got {}", v.len()));
    }
    Ok(std::array::from_fn(|i| crate::geometry::Point::new(v[2 * i], v[2 * i + 1])))
}
