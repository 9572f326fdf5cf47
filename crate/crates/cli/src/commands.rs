use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, Context};
use serde::Serialize;

use animlayout::maskproc::{load_mask_dir, masks_to_animation, BoxConfig, MaskError, DEFAULT_KEYFRAME_TOL};
use animlayout::metrics::{evaluate, EvalPair, OverlapOptions};
use animlayout::pipeline::{
    generate as run_pipeline, Backends, GenStage, GenerateOptions, GeneratorBackend, HttpBackend, MockBackend,
    PipelineError, ReasoningMode, StageTemplate, Templates, TOKEN_ENV,
};
use animlayout::render::{render_video, FontSource, RenderConfig, RenderError};
use animlayout::st::{parse_document, serialize_document, serialize_st, Color, ParseContext, StFragment, StStage};
use animlayout::validate::{validate_stage_with, PromptSpec};

use crate::config::Config;

/// A command failure with its exit status: domain failures exit 1, I/O and
/// environment problems exit 2.
#[derive(Debug)]
pub enum Failure {
    Domain(anyhow::Error),
    Env(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Env(_) => 2,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Domain(e) | Failure::Env(e) => e,
        }
    }
}

pub trait Classify<T> {
    fn env(self) -> Result<T, Failure>;
    fn domain(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn env(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Env(e.into()))
    }

    fn domain(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Domain(e.into()))
    }
}

type CmdResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .env()
}

fn write(path: &Path, contents: &str) -> CmdResult {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))
            .env()?;
    }
    fs::write(path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .env()
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value).map(|s| s + "\n").env()
}

pub fn validate(cfg: &Config, paths: &[PathBuf], stage: StStage, prompt: Option<&str>) -> CmdResult {
    #[derive(Serialize)]
    struct Line<'a> {
        file: String,
        #[serde(flatten)]
        report: &'a animlayout::validate::ValidationReport,
    }

    let spec = prompt.map(PromptSpec::from_prompt);
    let ctx = ParseContext {
        canvas: cfg.canvas(),
        foreground_len: None,
    };
    let (mut failed, mut unreadable) = (0usize, 0usize);
    for path in paths {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: reading {}: {e}", path.display());
                unreadable += 1;
                continue;
            }
        };
        let (report, _) = validate_stage_with(&text, stage, spec.as_ref(), &ctx);
        if !report.ok {
            failed += 1;
        }
        let line = Line {
            file: path.display().to_string(),
            report: &report,
        };
        println!("{}", serde_json::to_string(&line).env()?);
    }
    if unreadable > 0 {
        return Err(Failure::Env(anyhow!("{unreadable} file(s) could not be read")));
    }
    if failed > 0 {
        return Err(Failure::Domain(anyhow!("{failed} of {} file(s) failed validation", paths.len())));
    }
    Ok(())
}

pub struct GenerateArgs {
    pub banner_prompt: String,
    pub mainground_prompt: String,
    /// `Some(true)` for http, `Some(false)` for mock, `None` to defer to config.
    pub http: Option<bool>,
    pub endpoint: Option<String>,
    pub canned_dir: Option<PathBuf>,
    pub single_call: bool,
    pub out: PathBuf,
}

fn build_backend(cfg: &Config, args: &GenerateArgs) -> Result<Box<dyn GeneratorBackend>, Failure> {
    let b = &cfg.backend;
    let http = args.http.unwrap_or(b.kind.as_deref() == Some("http"));
    if http {
        let endpoint = args
            .endpoint
            .clone()
            .or_else(|| b.endpoint.clone())
            .ok_or_else(|| Failure::Env(anyhow!("the http backend needs --endpoint or backend.endpoint")))?;
        let token = std::env::var(TOKEN_ENV)
            .ok()
            .filter(|t| !t.is_empty())
            .or_else(|| b.token.clone());
        let mut backend = match b.timeout_secs {
            Some(secs) => HttpBackend::with_timeout(endpoint, token, Duration::from_secs(secs)),
            None => HttpBackend::new(endpoint, token),
        };
        if let Some(n) = b.max_retries {
            backend.max_retries = n;
        }
        if let Some(n) = b.max_tokens {
            backend.max_tokens = n;
        }
        Ok(Box::new(backend))
    } else {
        let mut backend = MockBackend::new();
        backend.canvas = cfg.canvas();
        if let Some(dir) = args.canned_dir.clone().or_else(|| b.canned_dir.clone()) {
            if !dir.is_dir() {
                return Err(Failure::Env(anyhow!("canned directory {} does not exist", dir.display())));
            }
            backend = backend.with_canned_dir(dir);
        }
        if let Some(n) = b.max_retries {
            backend.max_retries = n;
        }
        Ok(Box::new(backend))
    }
}

fn load_templates(cfg: &Config) -> Result<Templates, Failure> {
    let load = |path: &Option<PathBuf>, stage: GenStage| match path {
        Some(p) => StageTemplate::load(p, stage).env(),
        None => Ok(StageTemplate::default_for(stage)),
    };
    Ok(Templates {
        banner: load(&cfg.templates.banner, GenStage::Banner)?,
        mainground: load(&cfg.templates.mainground, GenStage::Mainground)?,
        animation: load(&cfg.templates.animation, GenStage::Animation)?,
    })
}

pub fn generate(cfg: &Config, args: GenerateArgs) -> CmdResult {
    let backend = build_backend(cfg, &args)?;
    let templates = load_templates(cfg)?;
    let spec = PromptSpec::from_prompt(&args.banner_prompt).merged(PromptSpec::from_prompt(&args.mainground_prompt));
    let opts = GenerateOptions {
        canvas: cfg.canvas(),
        mode: if args.single_call || cfg.backend.single_call {
            ReasoningMode::SingleCall
        } else {
            ReasoningMode::TwoCall
        },
    };
    log::info!("generating with {} backend", backend.name());
    let result = run_pipeline(
        &args.banner_prompt,
        &args.mainground_prompt,
        Backends::uniform(backend.as_ref()),
        &templates,
        Some(&spec),
        &opts,
    );
    let trace_path = args.out.join("trace.json");
    match result {
        Ok(generation) => {
            write(&args.out.join("st.json"), &(serialize_document(&generation.document) + "\n"))?;
            write(&trace_path, &to_json(&generation.trace)?)?;
            if generation.trace.ok() {
                eprintln!("wrote {}", args.out.display());
                Ok(())
            } else {
                let kinds: Vec<String> = generation
                    .trace
                    .report()
                    .map(|r| r.failures.iter().map(|f| format!("{:?} at {}", f.kind, f.path)).collect())
                    .unwrap_or_default();
                Err(Failure::Domain(anyhow!(
                    "assembled document failed validation: {}",
                    kinds.join(", ")
                )))
            }
        }
        Err(err) => {
            if let Some(trace) = err.trace() {
                write(&trace_path, &to_json(trace)?)?;
            }
            match err {
                PipelineError::StageFailed { .. } => Err(Failure::Domain(err.into())),
                _ => Err(Failure::Env(err.into())),
            }
        }
    }
}

fn parse_color(value: &Option<String>, key: &str, default: Color) -> Result<Color, Failure> {
    match value {
        Some(s) => s
            .parse::<Color>()
            .map_err(|e| Failure::Env(anyhow!("config render.{key}: {}", e.0))),
        None => Ok(default),
    }
}

pub fn render(
    cfg: &Config,
    st_path: &Path,
    out_dir: &Path,
    scale: Option<f64>,
    font: Option<PathBuf>,
    background_dir: Option<PathBuf>,
) -> CmdResult {
    let text = read(st_path)?;
    let doc = parse_document(&text)
        .with_context(|| format!("{} is not a valid document", st_path.display()))
        .domain()?;
    let r = &cfg.render;
    let defaults = RenderConfig::default();
    let render_cfg = RenderConfig {
        scale: scale.or(r.scale).unwrap_or(defaults.scale),
        font: font
            .or_else(|| r.font.clone())
            .map_or(FontSource::Embedded, FontSource::File),
        logo_placeholder: parse_color(&r.logo_placeholder, "logo_placeholder", defaults.logo_placeholder)?,
        logo_border: parse_color(&r.logo_border, "logo_border", defaults.logo_border)?,
        background_image_dir: background_dir.or_else(|| r.background_image_dir.clone()),
        allow_missing_background: r.allow_missing_background.unwrap_or(defaults.allow_missing_background),
    };
    match render_video(&doc, &render_cfg, out_dir) {
        Ok(manifest) => {
            for w in &manifest.warnings {
                log::warn!("{w}");
            }
            eprintln!(
                "rendered {} frame(s) at {}x{} to {} ({} warning(s))",
                manifest.frames,
                manifest.width,
                manifest.height,
                out_dir.display(),
                manifest.warnings.len()
            );
            Ok(())
        }
        Err(e @ (RenderError::MissingBackgroundImage { .. } | RenderError::FrameOutOfRange { .. })) => {
            Err(Failure::Domain(e.into()))
        }
        Err(e) => Err(Failure::Env(e.into())),
    }
}

fn json_files(dir: &Path) -> Result<Vec<String>, Failure> {
    let entries = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))
        .env()?;
    let mut names = Vec::new();
    for entry in entries {
        let path = entry.env()?.path();
        if path.extension().is_some_and(|e| e == "json") {
            if let Some(name) = path.file_name().and_then(|n| n.to_str()) {
                names.push(name.to_string());
            }
        }
    }
    names.sort();
    Ok(names)
}

fn pair_list(gen: &Path, real: &Path, pairs: Option<&Path>) -> Result<Vec<(PathBuf, PathBuf)>, Failure> {
    if let Some(file) = pairs {
        let text = read(file)?;
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [g, r] = parts[..] else {
                return Err(Failure::Domain(anyhow!(
                    "{}:{}: expected `<gen file> <real file>`",
                    file.display(),
                    i + 1
                )));
            };
            out.push((gen.join(g), real.join(r)));
        }
        return Ok(out);
    }
    let gen_names = json_files(gen)?;
    let real_names = json_files(real)?;
    let unpaired: Vec<String> = gen_names
        .iter()
        .filter(|n| !real_names.contains(n))
        .map(|n| format!("gen/{n}"))
        .chain(
            real_names
                .iter()
                .filter(|n| !gen_names.contains(n))
                .map(|n| format!("real/{n}")),
        )
        .collect();
    if !unpaired.is_empty() {
        return Err(Failure::Domain(anyhow!("unpaired files: {}", unpaired.join(", "))));
    }
    Ok(gen_names.iter().map(|n| (gen.join(n), real.join(n))).collect())
}

pub fn eval(
    cfg: &Config,
    gen: &Path,
    real: &Path,
    pairs: Option<&Path>,
    include_banner_objects: bool,
    out: Option<&Path>,
) -> CmdResult {
    #[derive(Serialize)]
    struct FileResult {
        gen: String,
        real: String,
        ok: bool,
        failure: Option<String>,
    }
    #[derive(Serialize)]
    struct Output {
        #[serde(flatten)]
        report: animlayout::metrics::EvalReport,
        files: Vec<FileResult>,
    }

    let list = pair_list(gen, real, pairs)?;
    if list.is_empty() {
        return Err(Failure::Domain(anyhow!("no document pairs to evaluate")));
    }
    let mut eval_pairs = Vec::with_capacity(list.len());
    let mut files = Vec::with_capacity(list.len());
    for (g, r) in &list {
        let gen_text = read(g)?;
        let real_doc = parse_document(&read(r)?)
            .with_context(|| format!("real layout {} is invalid", r.display()))
            .domain()?;
        let ctx = ParseContext {
            canvas: real_doc.canvas,
            foreground_len: None,
        };
        let (report, fragment) = validate_stage_with(&gen_text, StStage::Full, None, &ctx);
        let gen_doc = match fragment {
            Some(StFragment::Full(doc)) if report.ok => Some(doc),
            _ => None,
        };
        files.push(FileResult {
            gen: g.display().to_string(),
            real: r.display().to_string(),
            ok: report.ok,
            failure: report.primary_kind().map(|k| format!("{k:?}")),
        });
        eval_pairs.push(EvalPair {
            gen: gen_doc,
            real: real_doc,
            report,
        });
    }
    let opts = OverlapOptions {
        include_banner_objects: include_banner_objects || cfg.metrics.include_banner_objects,
    };
    let report = evaluate(&eval_pairs, opts).domain()?;
    let table = format_table(&report);
    let json = to_json(&Output { report, files })?;
    match out {
        Some(path) => {
            write(path, &json)?;
            print!("{table}");
        }
        None => {
            print!("{json}");
            eprint!("{table}");
        }
    }
    Ok(())
}

fn format_table(report: &animlayout::metrics::EvalReport) -> String {
    let fmd = report.fmd.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
    let rows = [
        ("FMD", fmd),
        ("Overlap", format!("{:.4}", report.overlap)),
        ("mIoU", format!("{:.4}", report.miou)),
        ("Failure rate", format!("{:.4}", report.failure_rate)),
        ("Pairs", report.n.to_string()),
    ];
    let key_w = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let val_w = rows.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<key_w$}  {v:>val_w$}\n"))
        .collect()
}

pub fn extract(cfg: &Config, mask_dir: &Path, tol: Option<f64>, out: Option<&Path>) -> CmdResult {
    let tol = tol.or(cfg.extract.tol).unwrap_or(DEFAULT_KEYFRAME_TOL);
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Failure::Env(anyhow!("--tol must be a finite non-negative number")));
    }
    let (index, masks) = load_mask_dir(mask_dir).env()?;
    let order = index.object_order();
    let animation = masks_to_animation(&masks, order.as_deref(), &BoxConfig::default(), tol).map_err(|e| match e {
        MaskError::DimensionMismatch { .. } => Failure::Env(e.into()),
        other => Failure::Domain(other.into()),
    })?;
    let summary: BTreeMap<usize, usize> = animation
        .tracks
        .iter()
        .map(|t| (t.object_index, t.keyframes.len()))
        .collect();
    log::info!("keyframes per object: {summary:?}");
    let text = serialize_st(&StFragment::Animation(animation)) + "\n";
    match out {
        Some(path) => write(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
