//! Flat `key=value` configuration with one section per module.
//!
//! ```text
//! [spotter]
//! window=35
//! [eval]
//! criterion=center
//! ```
//!
//! Overrides use `section.key=value` and are applied after the file, so they
//! win. Unknown sections and keys are errors.

use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::EvalConfig;
use crate::spotters::SpotterConfig;
use crate::stfeatures::{parse_blocks, parse_scales, StFeatureConfig, TrainParams};
use crate::synth::FixtureConfig;

pub const SECTIONS: [&str; 5] = ["spotter", "stfeatures", "train", "eval", "synth"];

pub const DEFAULT_NEGATIVES_PER_POSITIVE: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub spotter: SpotterConfig,
    pub stfeatures: StFeatureConfig,
    pub train: TrainParams,
    /// Negative training windows sampled per ground-truth sample.
    pub negatives_per_positive: usize,
    pub eval: EvalConfig,
    pub synth: FixtureConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            spotter: SpotterConfig::default(),
            stfeatures: StFeatureConfig::default(),
            train: TrainParams::default(),
            negatives_per_positive: DEFAULT_NEGATIVES_PER_POSITIVE,
            eval: EvalConfig::default(),
            synth: FixtureConfig::default(),
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| Error::Config(format!("{key}={value}: {e}")))
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("{key}={value}: expected true or false"))),
    }
}

fn range(key: &str, value: &str) -> Result<(usize, usize)> {
    match value.split_once(',') {
        Some((a, b)) => Ok((num(key, a.trim())?, num(key, b.trim())?)),
        None => {
            let v = num(key, value)?;
            Ok((v, v))
        }
    }
}

impl Config {
    /// Sets one documented key.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let name = format!("{section}.{key}");
        let k = name.as_str();
        match (section, key) {
            ("spotter", "window") => self.spotter.window = num(k, v)?,
            ("spotter", "half_window") => self.spotter.half_window = num(k, v)?,
            ("spotter", "lbp_grid") => self.spotter.lbp_grid = num(k, v)?,
            ("spotter", "lbp_neighbors") => self.spotter.lbp_neighbors = num(k, v)?,
            ("spotter", "lbp_radius") => self.spotter.lbp_radius = num(k, v)?,
            ("spotter", "peak_fraction") => self.spotter.peak_fraction = num(k, v)?,
            ("spotter", "mdmd_k") => self.spotter.mdmd_k = num(k, v)?,
            ("spotter", "mdmd_bins") => self.spotter.mdmd_bins = num(k, v)?,
            ("spotter", "mdmd_search_radius") => self.spotter.mdmd_search_radius = num(k, v)?,
            ("spotter", "landmark_window") => self.spotter.landmark_window = num(k, v)?,

            ("stfeatures", "kind") => self.stfeatures.kind = v.parse()?,
            ("stfeatures", "blocks") => self.stfeatures.blocks = parse_blocks(v)?,
            ("stfeatures", "overlap") => self.stfeatures.overlap = num(k, v)?,
            ("stfeatures", "bins") => self.stfeatures.bins = num(k, v)?,
            ("stfeatures", "window") => self.stfeatures.window = num(k, v)?,
            ("stfeatures", "scales") => self.stfeatures.scales = parse_scales(v)?,

            ("train", "lambda") => self.train.lambda = num(k, v)?,
            ("train", "epochs") => self.train.epochs = num(k, v)?,
            ("train", "seed") => self.train.seed = num(k, v)?,
            ("train", "learning_rate") => self.train.learning_rate = num(k, v)?,
            ("train", "balanced") => self.train.balanced = flag(k, v)?,
            ("train", "negatives_per_positive") => self.negatives_per_positive = num(k, v)?,

            ("eval", "criterion") => self.eval.criterion = v.parse()?,
            ("eval", "epsilon") => self.eval.epsilon = num(k, v)?,
            ("eval", "apex_mode") => self.eval.apex_mode = flag(k, v)?,

            ("synth", "seed") => self.synth.seed = num(k, v)?,
            ("synth", "videos") => self.synth.videos = num(k, v)?,
            ("synth", "subjects") => self.synth.subjects = num(k, v)?,
            ("synth", "frames_per_video") => self.synth.frames_per_video = num(k, v)?,
            ("synth", "fps") => self.synth.fps = num(k, v)?,
            ("synth", "mes_per_video") => self.synth.mes_per_video = range(k, v)?,
            ("synth", "me_length") => self.synth.me_length = range(k, v)?,
            ("synth", "me_amplitude") => self.synth.me_amplitude = num(k, v)?,
            ("synth", "blink_rate") => self.synth.blink_rate = num(k, v)?,
            ("synth", "head_shift_rate") => self.synth.head_shift_rate = num(k, v)?,
            ("synth", "macro_rate") => self.synth.macro_rate = num(k, v)?,
            ("synth", "min_separation") => self.synth.min_separation = num(k, v)?,
            ("synth", "width") => self.synth.width = num(k, v)?,
            ("synth", "height") => self.synth.height = num(k, v)?,
            ("synth", "noise") => self.synth.noise = num(k, v)?,

            _ if !SECTIONS.contains(&section) => {
                return Err(Error::Config(format!("unknown section [{section}]")));
            }
            _ => return Err(Error::Config(format!("unknown key {name}"))),
        }
        Ok(())
    }

    /// Applies a `section.key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let bad = || Error::Config(format!("override {assignment:?} must look like section.key=value"));
        let (path, value) = assignment.split_once('=').ok_or_else(bad)?;
        let (section, key) = path.trim().split_once('.').ok_or_else(bad)?;
        self.set(section, key, value)
    }

    pub fn parse(text: &str, source: &Path) -> Result<Config> {
        let mut cfg = Config::default();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if !SECTIONS.contains(&name) {
                    return Err(Error::parse(source, i + 1, format!("unknown section [{name}]")));
                }
                section = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::parse(source, i + 1, "expected key=value"));
            };
            let Some(sec) = section.as_deref() else {
                return Err(Error::parse(source, i + 1, "key outside of any [section]"));
            };
            cfg.set(sec, key.trim(), value)
                .map_err(|e| Error::parse(source, i + 1, e.to_string()))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Config::parse(&text, path)
    }

    /// Loads `path` (or the defaults) and applies `overrides` in order.
    pub fn resolve(path: Option<&Path>, overrides: &[String]) -> Result<Config> {
        let mut cfg = match path {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        for o in overrides {
            cfg.apply_override(o)?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.spotter.validate()?;
        self.stfeatures.validate()?;
        self.eval.validate()?;
        self.synth.validate()
    }

    /// Canonical text form; parsing it gives back the same configuration.
    pub fn to_text(&self) -> String {
        let s = &self.spotter;
        let f = &self.stfeatures;
        let t = &self.train;
        let e = &self.eval;
        let y = &self.synth;
        let scales: Vec<String> = f.scales.iter().map(|v| v.to_string()).collect();
        let mut out = String::new();
        let mut w = |line: String| {
            out.push_str(&line);
            out.push('\n');
        };
        w("[spotter]".into());
        w(format!("window={}", s.window));
        w(format!("half_window={}", s.half_window));
        w(format!("lbp_grid={}", s.lbp_grid));
        w(format!("lbp_neighbors={}", s.lbp_neighbors));
        w(format!("lbp_radius={}", s.lbp_radius));
        w(format!("peak_fraction={}", s.peak_fraction));
        w(format!("mdmd_k={}", s.mdmd_k));
        w(format!("mdmd_bins={}", s.mdmd_bins));
        w(format!("mdmd_search_radius={}", s.mdmd_search_radius));
        w(format!("landmark_window={}", s.landmark_window));
        w("[stfeatures]".into());
        w(format!("kind={}", f.kind));
        w(format!("blocks={}x{}x{}", f.blocks.0, f.blocks.1, f.blocks.2));
        w(format!("overlap={}", f.overlap));
        w(format!("bins={}", f.bins));
        w(format!("window={}", f.window));
        w(format!("scales={}", scales.join(",")));
        w("[train]".into());
        w(format!("lambda={}", t.lambda));
        w(format!("epochs={}", t.epochs));
        w(format!("seed={}", t.seed));
        w(format!("learning_rate={}", t.learning_rate));
        w(format!("balanced={}", t.balanced));
        w(format!("negatives_per_positive={}", self.negatives_per_positive));
        w("[eval]".into());
        w(format!("criterion={}", e.criterion));
        w(format!("epsilon={}", e.epsilon));
        w(format!("apex_mode={}", e.apex_mode));
        w("[synth]".into());
        w(format!("seed={}", y.seed));
        w(format!("videos={}", y.videos));
        w(format!("subjects={}", y.subjects));
        w(format!("frames_per_video={}", y.frames_per_video));
        w(format!("fps={}", y.fps));
        w(format!("mes_per_video={},{}", y.mes_per_video.0, y.mes_per_video.1));
        w(format!("me_length={},{}", y.me_length.0, y.me_length.1));
        w(format!("me_amplitude={}", y.me_amplitude));
        w(format!("blink_rate={}", y.blink_rate));
        w(format!("head_shift_rate={}", y.head_shift_rate));
        w(format!("macro_rate={}", y.macro_rate));
        w(format!("min_separation={}", y.min_separation));
        w(format!("width={}", y.width));
        w(format!("height={}", y.height));
        w(format!("noise={}", y.noise));
        out
    }
}
