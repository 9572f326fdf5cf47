//! Sectioned prompt templates with `{name}` placeholders.
//!
//! A template file has `[persona]`, `[task]`, `[context]`, `[format]` and optionally
//! `[reasoning]` sections. A placeholder is `{` + lowercase identifier + `}`; any other
//! brace (such as JSON examples in the format section) is literal text.

use std::collections::BTreeSet;
use std::path::Path;

use super::{GenStage, PipelineError};

pub const DEFAULT_REASONING: &str = "Before writing any structured output, describe your plan in plain language.";

const SECTIONS: [&str; 5] = ["persona", "task", "context", "reasoning", "format"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageTemplate {
    pub persona: String,
    pub task: String,
    pub context: String,
    pub reasoning: String,
    pub format: String,
}

/// Placeholders each stage may use, and which of them it must use.
pub fn allowed_placeholders(stage: GenStage) -> (&'static [&'static str], &'static [&'static str]) {
    match stage {
        GenStage::Banner => (&["banner_prompt", "ut"], &["banner_prompt", "ut"]),
        GenStage::Mainground => (
            &["mainground_prompt", "banner_st", "ut"],
            &["mainground_prompt", "banner_st", "ut"],
        ),
        GenStage::Animation => (&["mainground_st", "ut"], &["mainground_st", "ut"]),
    }
}

/// Names of all `{identifier}` placeholders in `text`, in order of appearance.
pub fn placeholders(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        let ident_len = after
            .find(|c: char| !(c.is_ascii_lowercase() || c == '_'))
            .unwrap_or(after.len());
        if ident_len > 0 && after[ident_len..].starts_with('}') {
            out.push(&after[..ident_len]);
            rest = &after[ident_len + 1..];
        } else {
            rest = after;
        }
    }
    out
}

/// Replaces placeholders using `lookup`; unknown names are left as-is.
pub fn fill(text: &str, lookup: impl Fn(&str) -> Option<String>) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let ident_len = after
            .find(|c: char| !(c.is_ascii_lowercase() || c == '_'))
            .unwrap_or(after.len());
        if ident_len > 0 && after[ident_len..].starts_with('}') {
            let name = &after[..ident_len];
            match lookup(name) {
                Some(v) => out.push_str(&v),
                None => {
                    out.push('{');
                    out.push_str(name);
                    out.push('}');
                }
            }
            rest = &after[ident_len + 1..];
        } else {
            out.push('{');
            rest = after;
        }
    }
    out.push_str(rest);
    out
}

impl StageTemplate {
    pub fn parse(text: &str, stage: GenStage) -> Result<Self, PipelineError> {
        let err = |m: String| PipelineError::Template { stage, message: m };
        let mut sections: [Option<String>; 5] = Default::default();
        let mut current: Option<usize> = None;
        for line in text.lines() {
            let trimmed = line.trim();
            if let Some(name) = trimmed.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                if let Some(i) = SECTIONS.iter().position(|s| *s == name) {
                    if sections[i].is_some() {
                        return Err(err(format!("duplicate section [{name}]")));
                    }
                    sections[i] = Some(String::new());
                    current = Some(i);
                    continue;
                }
            }
            match current {
                Some(i) => {
                    let s = sections[i].as_mut().expect("section opened");
                    s.push_str(line);
                    s.push('\n');
                }
                None if trimmed.is_empty() => {}
                None => return Err(err(format!("text before the first section: {trimmed:?}"))),
            }
        }
        let mut take = |i: usize| -> Result<String, PipelineError> {
            match sections[i].take() {
                Some(s) => Ok(s.trim().to_string()),
                None if SECTIONS[i] == "reasoning" => Ok(DEFAULT_REASONING.to_string()),
                None => Err(err(format!("missing section [{}]", SECTIONS[i]))),
            }
        };
        let template = StageTemplate {
            persona: take(0)?,
            task: take(1)?,
            context: take(2)?,
            reasoning: take(3)?,
            format: take(4)?,
        };
        template.check(stage)?;
        Ok(template)
    }

    pub fn load(path: &Path, stage: GenStage) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Template {
            stage,
            message: format!("{}: {e}", path.display()),
        })?;
        Self::parse(&text, stage)
    }

    pub fn default_for(stage: GenStage) -> Self {
        let text = match stage {
            GenStage::Banner => include_str!("../../templates/banner.txt"),
            GenStage::Mainground => include_str!("../../templates/mainground.txt"),
            GenStage::Animation => include_str!("../../templates/animation.txt"),
        };
        Self::parse(text, stage).expect("bundled templates are valid")
    }

    /// Every placeholder is allowed for the stage, every required one appears, and
    /// `{ut}` sits in the format section only.
    pub fn check(&self, stage: GenStage) -> Result<(), PipelineError> {
        let err = |m: String| PipelineError::Template { stage, message: m };
        let (allowed, required) = allowed_placeholders(stage);
        let mut used = BTreeSet::new();
        for (name, body) in [
            ("persona", &self.persona),
            ("task", &self.task),
            ("context", &self.context),
            ("reasoning", &self.reasoning),
            ("format", &self.format),
        ] {
            for p in placeholders(body) {
                if !allowed.contains(&p) {
                    return Err(err(format!("placeholder {{{p}}} is not available in [{name}]")));
                }
                if p == "ut" && name != "format" {
                    return Err(err(format!("{{ut}} may only appear in [format], found in [{name}]")));
                }
                used.insert(p);
            }
        }
        if let Some(missing) = required.iter().find(|r| !used.contains(*r)) {
            return Err(err(format!("required placeholder {{{missing}}} is not used")));
        }
        Ok(())
    }

    pub fn system_prompt(&self) -> String {
        format!("{}\n\n{}", self.persona, self.task)
    }
}

/// Templates for the three stages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Templates {
    pub banner: StageTemplate,
    pub mainground: StageTemplate,
    pub animation: StageTemplate,
}

impl Default for Templates {
    fn default() -> Self {
        Self {
            banner: StageTemplate::default_for(GenStage::Banner),
            mainground: StageTemplate::default_for(GenStage::Mainground),
            animation: StageTemplate::default_for(GenStage::Animation),
        }
    }
}

impl Templates {
    pub fn get(&self, stage: GenStage) -> &StageTemplate {
        match stage {
            GenStage::Banner => &self.banner,
            GenStage::Mainground => &self.mainground,
            GenStage::Animation => &self.animation,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn placeholder_scan_ignores_json() {
        let t = r#"{"banners": []} then {banner_prompt} and {x1} {} {ut}"#;
        assert_eq!(placeholders(t), vec!["banner_prompt", "ut"]);
    }

    #[test]
    fn fill_keeps_literal_braces() {
        let t = r#"a {"k": 1} {name} {other}"#;
        let out = fill(t, |n| (n == "name").then(|| "X".to_string()));
        assert_eq!(out, r#"a {"k": 1} X {other}"#);
    }

    #[test]
    fn bundled_templates_parse() {
        for stage in GenStage::ALL {
            let t = StageTemplate::default_for(stage);
            assert!(!t.persona.is_empty() && !t.format.is_empty());
        }
    }

    #[test]
    fn missing_section_and_required_placeholder() {
        let no_format = "[persona]\np\n[task]\nt\n[context]\n{banner_prompt}\n";
        assert!(matches!(
            StageTemplate::parse(no_format, GenStage::Banner),
            Err(PipelineError::Template { .. })
        ));
        let no_ut = "[persona]\np\n[task]\nt\n[context]\n{banner_prompt}\n[format]\nJSON\n";
        let e = StageTemplate::parse(no_ut, GenStage::Banner).unwrap_err();
        assert!(e.to_string().contains("{ut}"), "{e}");
    }

    #[test]
    fn stage_scoped_placeholders() {
        // the animation stage sees only the foreground, never the prompts
        let t = "[persona]\np\n[task]\nt\n[context]\n{mainground_st} {banner_prompt}\n[format]\n{ut}\n";
        assert!(StageTemplate::parse(t, GenStage::Animation).is_err());
        let ut_in_context = "[persona]\np\n[task]\nt\n[context]\n{banner_prompt} {ut}\n[format]\n{ut}\n";
        assert!(StageTemplate::parse(ut_in_context, GenStage::Banner).is_err());
    }

    #[test]
    fn reasoning_section_defaults() {
        let t = "[persona]\np\n[task]\nt\n[context]\n{banner_prompt}\n[format]\n{ut}\n";
        assert_eq!(StageTemplate::parse(t, GenStage::Banner).unwrap().reasoning, DEFAULT_REASONING);
    }
}
