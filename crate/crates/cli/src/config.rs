use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use animlayout::st::Canvas;

pub const CONFIG_ENV: &str = "ANIMLAYOUT_CONFIG";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub backend: BackendSection,
    pub templates: TemplateSection,
    pub canvas: Option<Canvas>,
    pub render: RenderSection,
    pub metrics: MetricsSection,
    pub extract: ExtractSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BackendSection {
    /// `mock` or `http`.
    pub kind: Option<String>,
    pub endpoint: Option<String>,
    pub token: Option<String>,
    pub timeout_secs: Option<u64>,
    pub max_retries: Option<u32>,
    pub max_tokens: Option<u32>,
    pub canned_dir: Option<PathBuf>,
    pub single_call: bool,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TemplateSection {
    pub banner: Option<PathBuf>,
    pub mainground: Option<PathBuf>,
    pub animation: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RenderSection {
    pub scale: Option<f64>,
    pub font: Option<PathBuf>,
    pub logo_placeholder: Option<String>,
    pub logo_border: Option<String>,
    pub background_image_dir: Option<PathBuf>,
    pub allow_missing_background: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsSection {
    pub include_banner_objects: bool,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtractSection {
    pub tol: Option<f64>,
}

impl Config {
    /// Loads from `--config`, else `$ANIMLAYOUT_CONFIG`, else defaults.
    pub fn resolve(flag: Option<&Path>) -> Result<Self> {
        let from_env = std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
        match flag.map(Path::to_path_buf).or(from_env) {
            Some(path) => Self::load(&path),
            None => Ok(Self::default()),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: Config = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.check_paths()?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        };
        fix(&mut self.backend.canned_dir);
        fix(&mut self.templates.banner);
        fix(&mut self.templates.mainground);
        fix(&mut self.templates.animation);
        fix(&mut self.render.font);
        fix(&mut self.render.background_image_dir);
    }

    fn check_paths(&self) -> Result<()> {
        let paths = [
            ("backend.canned_dir", &self.backend.canned_dir),
            ("templates.banner", &self.templates.banner),
            ("templates.mainground", &self.templates.mainground),
            ("templates.animation", &self.templates.animation),
            ("render.font", &self.render.font),
            ("render.background_image_dir", &self.render.background_image_dir),
        ];
        for (key, path) in paths {
            if let Some(p) = path {
                if !p.exists() {
                    bail!("config {key}: {} does not exist", p.display());
                }
            }
        }
        if let Some(kind) = &self.backend.kind {
            if kind != "mock" && kind != "http" {
                bail!("config backend.kind must be \"mock\" or \"http\", got {kind:?}");
            }
        }
        Ok(())
    }

    pub fn canvas(&self) -> Canvas {
        self.canvas.unwrap_or_default()
    }
}
