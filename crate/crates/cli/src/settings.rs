//! Run settings: a flat `key = value` file overlaid by command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;

use crate::Failure;

/// Every recognised setting. Flags use the same names with `-` for `_`.
pub const KEYS: &[&str] = &[
    "input", "world_file", "patch", "overlap", "conf", "nms_iou", "class_agnostic", "grayscale",
    "backend", "rules", "model", "workers", "output", "crs", "roads", "seed", "detections",
    "labels", "width", "height", "pixel_space", "weights", "save_weights", "channels", "size",
    "d_driveway", "d_intersection", "d_road",
];

#[derive(Debug, Default, Args)]
pub struct Flags {
    /// Flat `key = value` settings file; flags override its entries
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Input raster (PNG, PGM/PPM, ...)
    #[arg(long, global = true)]
    pub input: Option<String>,
    /// World file with the six affine coefficients
    #[arg(long, global = true)]
    pub world_file: Option<String>,
    /// Tile edge in pixels [1024]
    #[arg(long, global = true)]
    pub patch: Option<String>,
    /// Overlap between neighbouring tiles in pixels [256]
    #[arg(long, global = true)]
    pub overlap: Option<String>,
    /// Minimum detection score [0.25]
    #[arg(long, global = true)]
    pub conf: Option<String>,
    /// IoU above which overlapping detections are merged [0.5]
    #[arg(long, global = true)]
    pub nms_iou: Option<String>,
    /// Suppress across classes during merging [true]
    #[arg(long, global = true)]
    pub class_agnostic: Option<String>,
    /// Feed single-band tiles to the detector [false]
    #[arg(long, global = true)]
    pub grayscale: Option<String>,
    /// Detector backend: fixture or external [fixture]
    #[arg(long, global = true)]
    pub backend: Option<String>,
    /// Rule file for the fixture backend (detection text format)
    #[arg(long, global = true)]
    pub rules: Option<String>,
    /// Executable run once per tile by the external backend
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// Parallel tile workers [1]
    #[arg(long, global = true)]
    pub workers: Option<String>,
    /// Output file, or file stem for export
    #[arg(long, global = true)]
    pub output: Option<String>,
    /// File holding the WKT written to the .prj sidecar
    #[arg(long, global = true)]
    pub crs: Option<String>,
    /// GeoJSON road network used to categorise crosswalks
    #[arg(long, global = true)]
    pub roads: Option<String>,
    /// Random seed [0]
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Detection file or directory
    #[arg(long, global = true)]
    pub detections: Option<String>,
    /// Label file or directory
    #[arg(long, global = true)]
    pub labels: Option<String>,
    /// Image width when no raster is given
    #[arg(long, global = true)]
    pub width: Option<String>,
    /// Image height when no raster is given
    #[arg(long, global = true)]
    pub height: Option<String>,
    /// Export in pixel coordinates instead of world coordinates [false]
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub pixel_space: Option<String>,
    /// Module weight file
    #[arg(long, global = true)]
    pub weights: Option<String>,
    /// Write the weights used by demo-modules to this file
    #[arg(long, global = true)]
    pub save_weights: Option<String>,
    /// Channel count for demo-modules [64]
    #[arg(long, global = true)]
    pub channels: Option<String>,
    /// Spatial size for demo-modules [16]
    #[arg(long, global = true)]
    pub size: Option<String>,
    /// Driveway distance threshold in metres [10]
    #[arg(long, global = true)]
    pub d_driveway: Option<String>,
    /// Intersection distance threshold in metres [15]
    #[arg(long, global = true)]
    pub d_intersection: Option<String>,
    /// Road distance threshold in metres [25]
    #[arg(long, global = true)]
    pub d_road: Option<String>,
}

impl Flags {
    fn entries(&self) -> [(&'static str, &Option<String>); 28] {
        [
            ("input", &self.input),
            ("world_file", &self.world_file),
            ("patch", &self.patch),
            ("overlap", &self.overlap),
            ("conf", &self.conf),
            ("nms_iou", &self.nms_iou),
            ("class_agnostic", &self.class_agnostic),
            ("grayscale", &self.grayscale),
            ("backend", &self.backend),
            ("rules", &self.rules),
            ("model", &self.model),
            ("workers", &self.workers),
            ("output", &self.output),
            ("crs", &self.crs),
            ("roads", &self.roads),
            ("seed", &self.seed),
            ("detections", &self.detections),
            ("labels", &self.labels),
            ("width", &self.width),
            ("height", &self.height),
            ("pixel_space", &self.pixel_space),
            ("weights", &self.weights),
            ("save_weights", &self.save_weights),
            ("channels", &self.channels),
            ("size", &self.size),
            ("d_driveway", &self.d_driveway),
            ("d_intersection", &self.d_intersection),
            ("d_road", &self.d_road),
        ]
    }
}

#[derive(Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
    /// Relative paths from the config file resolve against its directory.
    base: Option<PathBuf>,
    from_file: BTreeMap<String, bool>,
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`", i + 1))?;
        let key = key.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(format!("line {}: unknown setting `{key}`", i + 1));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

impl Settings {
    pub fn load(flags: &Flags) -> Result<Self, Failure> {
        let mut s = Settings::default();
        if let Some(path) = &flags.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::input(format!("cannot read config {}: {e}", path.display())))?;
            let values = parse_config(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            for k in values.keys() {
                s.from_file.insert(k.clone(), true);
            }
            s.values = values;
            s.base = path.parent().map(Path::to_path_buf);
        }
        for (key, value) in flags.entries() {
            if let Some(v) = value {
                s.values.insert(key.to_string(), v.clone());
                s.from_file.insert(key.to_string(), false);
            }
        }
        Ok(s)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        debug_assert!(KEYS.contains(&key), "unregistered key {key}");
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, Failure>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|e| Failure::input(format!("invalid {key} `{v}`: {e}"))))
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, Failure>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn flag(&self, key: &str, default: bool) -> Result<bool, Failure> {
        match self.raw(key).map(str::to_ascii_lowercase).as_deref() {
            None => Ok(default),
            Some("true" | "yes" | "1" | "on") => Ok(true),
            Some("false" | "no" | "0" | "off") => Ok(false),
            Some(other) => Err(Failure::input(format!("invalid {key} `{other}`: expected true or false"))),
        }
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        let raw = PathBuf::from(self.raw(key)?);
        match (&self.base, self.from_file.get(key)) {
            (Some(base), Some(true)) if raw.is_relative() => Some(base.join(raw)),
            _ => Some(raw),
        }
    }

    pub fn require_path(&self, key: &str) -> Result<PathBuf, Failure> {
        self.path(key)
            .ok_or_else(|| Failure::input(format!("missing required setting `{key}` (--{})", key.replace('_', "-"))))
    }

    /// Like [`Settings::require_path`] but also checks the path exists.
    pub fn existing_path(&self, key: &str) -> Result<PathBuf, Failure> {
        let p = self.require_path(key)?;
        if !p.exists() {
            return Err(Failure::input(format!("{key}: {} does not exist", p.display())));
        }
        Ok(p)
    }
}
