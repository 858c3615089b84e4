//! Run configuration: flat `key = value` lines with dotted section names.
//!
//! ```text
//! # comments and blank lines are ignored
//! geometry.a_minus = 0
//! geometry.a_plus = 2
//! geometry.b = 3.14159
//! medium.V0_real = 1
//! incidence.k = 2.5
//! incidence.theta0_deg = 20
//! ```

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use sha2::{Digest, Sha256};
use wavescat::scattering::{FieldRegion, KernelOptions, DEFAULT_EXCLUSION_DEG, DEFAULT_THETA_POINTS};
use wavescat::{Incidence, Side, WaveguideSpec};

/// Keys accepted in a configuration file.
pub const KNOWN_KEYS: &[&str] = &[
    "geometry.a_minus",
    "geometry.a_plus",
    "geometry.b",
    "medium.V0_real",
    "medium.V0_imag",
    "incidence.k",
    "incidence.k_min",
    "incidence.k_max",
    "incidence.k_steps",
    "incidence.theta0_deg",
    "incidence.side",
    "grid.theta_points",
    "grid.exclusion_band_deg",
    "truncation.max_modes",
    "truncation.tol",
    "output.format",
    "output.path",
    "output.emit_field",
    "output.field_box",
    "output.field_grid",
    "output.field_modes",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    /// 1-based line of the offending entry, when it comes from one.
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.key) {
            (Some(l), Some(k)) => write!(f, "line {l}: `{k}`: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "`{k}`: {}", self.message),
            (None, None) => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

/// Wavenumbers to run: one value or an evenly spaced sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Wavenumbers {
    Single(f64),
    Sweep { min: f64, max: f64, steps: usize },
}

impl Wavenumbers {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Wavenumbers::Single(k) => vec![k],
            Wavenumbers::Sweep { min, steps: 1, .. } => vec![min],
            Wavenumbers::Sweep { min, max, steps } => (0..steps)
                .map(|j| min + (max - min) * j as f64 / (steps - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldConfig {
    pub region: FieldRegion,
    pub nx: usize,
    pub ny: usize,
    pub modes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: WaveguideSpec,
    pub wavenumbers: Wavenumbers,
    pub theta0_deg: f64,
    pub side: Side,
    pub theta_points: usize,
    pub exclusion_band_deg: f64,
    pub kernel: KernelOptions,
    pub format: Format,
    pub path: Option<String>,
    pub emit_field: bool,
    pub field: Option<FieldConfig>,
    /// SHA-256 of the canonical `key=value` listing, sorted by key.
    pub hash: String,
}

impl RunConfig {
    /// Incidence at wavenumber `k`.
    pub fn incidence(&self, k: f64) -> wavescat::Result<Incidence> {
        Incidence::with_side(k, self.theta0_deg.to_radians(), self.side)
    }
}

struct Entry {
    line: usize,
    value: String,
}

struct Entries(BTreeMap<String, Entry>);

fn err(line: Option<usize>, key: Option<&str>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        line,
        key: key.map(str::to_string),
        message: message.into(),
    }
}

impl Entries {
    fn raw(&self, key: &str) -> Option<&Entry> {
        self.0.get(key)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<T>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<T>()
                .map(Some)
                .map_err(|_| err(Some(e.line), Some(key), format!("expected {what}, got `{}`", e.value))),
        }
    }

    fn float(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        let v = self.parsed::<f64>(key, "a number")?;
        if let (Some(x), Some(e)) = (v, self.raw(key)) {
            if !x.is_finite() {
                return Err(err(Some(e.line), Some(key), "must be finite"));
            }
        }
        Ok(v)
    }

    fn required_float(&self, key: &str) -> Result<f64, ConfigError> {
        self.float(key)?
            .ok_or_else(|| err(None, Some(key), "missing required key"))
    }

    fn list(&self, key: &str, len: usize) -> Result<Option<(usize, Vec<String>)>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => {
                let parts: Vec<String> = e.value.split(',').map(|s| s.trim().to_string()).collect();
                if parts.len() != len {
                    return Err(err(
                        Some(e.line),
                        Some(key),
                        format!("expected {len} comma-separated values, got {}", parts.len()),
                    ));
                }
                Ok(Some((e.line, parts)))
            }
        }
    }

    /// Line of `key`, for diagnostics about a validated value.
    fn line(&self, key: &str) -> Option<usize> {
        self.raw(key).map(|e| e.line)
    }
}

fn parse_entries(text: &str) -> Result<Entries, ConfigError> {
    let mut map: BTreeMap<String, Entry> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(err(
                Some(line),
                None,
                format!("expected `key = value`, got `{content}`"),
            ));
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(err(Some(line), None, "empty key"));
        }
        if !KNOWN_KEYS.contains(&key) {
            return Err(err(Some(line), Some(key), "unknown key"));
        }
        if value.is_empty() {
            return Err(err(Some(line), Some(key), "empty value"));
        }
        if let Some(prev) = map.get(key) {
            return Err(err(
                Some(line),
                Some(key),
                format!("duplicate key (first set on line {})", prev.line),
            ));
        }
        map.insert(
            key.to_string(),
            Entry {
                line,
                value: value.to_string(),
            },
        );
    }
    Ok(Entries(map))
}

fn canonical_hash(entries: &Entries) -> String {
    let mut h = Sha256::new();
    for (k, e) in &entries.0 {
        h.update(k.as_bytes());
        h.update(b"=");
        h.update(e.value.as_bytes());
        h.update(b"\n");
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn core_err(line: Option<usize>, key: &str, e: wavescat::Error) -> ConfigError {
    err(line, Some(key), e.to_string())
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let e = parse_entries(text)?;

    let a_minus = e.required_float("geometry.a_minus")?;
    let a_plus = e.required_float("geometry.a_plus")?;
    let b = e.required_float("geometry.b")?;
    let v0 = Complex64::new(
        e.float("medium.V0_real")?.unwrap_or(0.0),
        e.float("medium.V0_imag")?.unwrap_or(0.0),
    );
    let spec = WaveguideSpec::with_complex_v0(a_minus, a_plus, b, v0)
        .map_err(|x| core_err(e.line("geometry.a_plus").or(e.line("geometry.b")), "geometry", x))?;

    let single = e.float("incidence.k")?;
    let sweep = (
        e.float("incidence.k_min")?,
        e.float("incidence.k_max")?,
        e.parsed::<usize>("incidence.k_steps", "a positive integer")?,
    );
    let wavenumbers = match (single, sweep) {
        (Some(k), (None, None, None)) => Wavenumbers::Single(k),
        (None, (Some(min), Some(max), Some(steps))) => {
            if steps == 0 {
                return Err(err(
                    e.line("incidence.k_steps"),
                    Some("incidence.k_steps"),
                    "must be at least 1",
                ));
            }
            if !(max >= min) {
                return Err(err(
                    e.line("incidence.k_max"),
                    Some("incidence.k_max"),
                    "must not be below incidence.k_min",
                ));
            }
            Wavenumbers::Sweep { min, max, steps }
        }
        (Some(_), _) => {
            return Err(err(
                e.line("incidence.k"),
                Some("incidence.k"),
                "give either incidence.k or a k_min/k_max/k_steps sweep, not both",
            ))
        }
        (None, _) => {
            return Err(err(
                None,
                Some("incidence"),
                "need incidence.k or all of incidence.k_min, incidence.k_max, incidence.k_steps",
            ))
        }
    };
    let theta0_deg = e.required_float("incidence.theta0_deg")?;
    let side_given = match e.raw("incidence.side") {
        None => None,
        Some(x) => Some(match x.value.as_str() {
            "left" => Side::Left,
            "right" => Side::Right,
            other => {
                return Err(err(
                    Some(x.line),
                    Some("incidence.side"),
                    format!("expected left or right, got `{other}`"),
                ))
            }
        }),
    };
    let theta_line = e.line("incidence.theta0_deg");
    let mut side = None;
    for k in wavenumbers.values() {
        let inc = Incidence::new(k, theta0_deg.to_radians()).map_err(|x| {
            let key = if matches!(x, wavescat::Error::InvalidParameter { name: "k", .. }) {
                "incidence.k"
            } else {
                "incidence.theta0_deg"
            };
            core_err(e.line(key).or(theta_line), key, x)
        })?;
        side = Some(inc.side());
    }
    let side = side.expect("at least one wavenumber");
    if let Some(given) = side_given {
        if given != side {
            return Err(err(
                e.line("incidence.side"),
                Some("incidence.side"),
                format!("theta0_deg = {theta0_deg} lies in the {} sector", side.as_str()),
            ));
        }
    }

    let theta_points = e
        .parsed::<usize>("grid.theta_points", "an integer")?
        .unwrap_or(DEFAULT_THETA_POINTS);
    if theta_points < 2 {
        return Err(err(
            e.line("grid.theta_points"),
            Some("grid.theta_points"),
            "need at least 2",
        ));
    }
    let exclusion_band_deg = e.float("grid.exclusion_band_deg")?.unwrap_or(DEFAULT_EXCLUSION_DEG);
    if !(exclusion_band_deg > 0.0 && exclusion_band_deg < 90.0) {
        return Err(err(
            e.line("grid.exclusion_band_deg"),
            Some("grid.exclusion_band_deg"),
            "must lie in (0, 90)",
        ));
    }

    let defaults = KernelOptions::default();
    let max_modes = e
        .parsed::<usize>("truncation.max_modes", "an integer")?
        .unwrap_or(defaults.max_modes);
    if max_modes == 0 {
        return Err(err(
            e.line("truncation.max_modes"),
            Some("truncation.max_modes"),
            "must be positive",
        ));
    }
    let tol = e.float("truncation.tol")?.unwrap_or(defaults.tol);
    if !(tol > 0.0) {
        return Err(err(
            e.line("truncation.tol"),
            Some("truncation.tol"),
            "must be positive",
        ));
    }
    let kernel = KernelOptions {
        tol,
        max_modes,
        ..defaults
    };

    let format = match e.raw("output.format") {
        None => Format::Csv,
        Some(x) => Format::parse(&x.value).ok_or_else(|| {
            err(
                Some(x.line),
                Some("output.format"),
                format!("expected csv or json, got `{}`", x.value),
            )
        })?,
    };
    let path = e.raw("output.path").map(|x| x.value.clone());
    let emit_field = match e.raw("output.emit_field") {
        None => false,
        Some(x) => match x.value.as_str() {
            "true" => true,
            "false" => false,
            other => {
                return Err(err(
                    Some(x.line),
                    Some("output.emit_field"),
                    format!("expected true or false, got `{other}`"),
                ))
            }
        },
    };
    let field = parse_field(&e)?;
    if emit_field && field.is_none() {
        return Err(err(
            e.line("output.emit_field"),
            Some("output.emit_field"),
            "needs output.field_box and output.field_grid",
        ));
    }

    Ok(RunConfig {
        spec,
        wavenumbers,
        theta0_deg,
        side,
        theta_points,
        exclusion_band_deg,
        kernel,
        format,
        path,
        emit_field,
        field,
        hash: canonical_hash(&e),
    })
}

fn parse_field(e: &Entries) -> Result<Option<FieldConfig>, ConfigError> {
    let bx = e.list("output.field_box", 4)?;
    let grid = e.list("output.field_grid", 2)?;
    let modes = e.parsed::<usize>("output.field_modes", "an integer")?;
    let (bx, grid) = match (bx, grid) {
        (None, None) => {
            if modes.is_some() {
                return Err(err(
                    e.line("output.field_modes"),
                    Some("output.field_modes"),
                    "needs output.field_box and output.field_grid",
                ));
            }
            return Ok(None);
        }
        (Some(b), Some(g)) => (b, g),
        (Some((l, _)), None) => {
            return Err(err(
                Some(l),
                Some("output.field_box"),
                "needs output.field_grid as well",
            ))
        }
        (None, Some((l, _))) => {
            return Err(err(
                Some(l),
                Some("output.field_grid"),
                "needs output.field_box as well",
            ))
        }
    };
    let (bl, bv) = bx;
    let nums: Vec<f64> = bv
        .iter()
        .map(|s| s.parse::<f64>().ok().filter(|x| x.is_finite()))
        .collect::<Option<_>>()
        .ok_or_else(|| {
            err(
                Some(bl),
                Some("output.field_box"),
                "expected x_min, x_max, y_min, y_max as numbers",
            )
        })?;
    let region = FieldRegion {
        x_min: nums[0],
        x_max: nums[1],
        y_min: nums[2],
        y_max: nums[3],
    };
    if !(region.x_max > region.x_min && region.y_max > region.y_min) {
        return Err(err(
            Some(bl),
            Some("output.field_box"),
            "max must exceed min on both axes",
        ));
    }
    let (gl, gv) = grid;
    let dims: Vec<usize> = gv
        .iter()
        .map(|s| s.parse::<usize>().ok())
        .collect::<Option<_>>()
        .ok_or_else(|| err(Some(gl), Some("output.field_grid"), "expected nx, ny as integers"))?;
    if dims[0] < 2 || dims[1] < 2 {
        return Err(err(Some(gl), Some("output.field_grid"), "need at least 2×2 samples"));
    }
    let modes = modes.unwrap_or(64);
    if modes == 0 {
        return Err(err(
            e.line("output.field_modes"),
            Some("output.field_modes"),
            "must be positive",
        ));
    }
    Ok(Some(FieldConfig {
        region,
        nx: dims[0],
        ny: dims[1],
        modes,
    }))
}
