use std::collections::BTreeMap;
use std::path::Path;

use crate::model::Dimension;

use super::TpoError;

/// Template role, file stem and the placeholders it must contain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum TemplateKind {
    Loss,
    Gradient,
    Update,
    PreRewrite,
    PostRewrite,
    RewardScore,
    Author(Dimension),
}

impl TemplateKind {
    pub fn all() -> Vec<TemplateKind> {
        let mut v = vec![
            TemplateKind::Loss,
            TemplateKind::Gradient,
            TemplateKind::Update,
            TemplateKind::PreRewrite,
            TemplateKind::PostRewrite,
            TemplateKind::RewardScore,
        ];
        v.extend(Dimension::ALL.map(TemplateKind::Author));
        v
    }

    pub fn file_name(self) -> String {
        match self {
            TemplateKind::Loss => "loss.txt".into(),
            TemplateKind::Gradient => "gradient.txt".into(),
            TemplateKind::Update => "update.txt".into(),
            TemplateKind::PreRewrite => "pre_rewrite.txt".into(),
            TemplateKind::PostRewrite => "post_rewrite.txt".into(),
            TemplateKind::RewardScore => "reward_score.txt".into(),
            TemplateKind::Author(d) => format!("author_{}.txt", d.slug()),
        }
    }

    pub fn required(self) -> &'static [&'static str] {
        match self {
            TemplateKind::Loss => &["current_prompt", "task_definition", "input_videos"],
            TemplateKind::Gradient => &["current_prompt", "loss"],
            TemplateKind::Update => &["current_prompt", "gradient"],
            TemplateKind::PreRewrite => &["current_prompt", "initial_image"],
            TemplateKind::PostRewrite => &["current_prompt", "input_videos"],
            TemplateKind::RewardScore => &["current_prompt", "input_videos"],
            TemplateKind::Author(_) => &["initial_image", "target_image", "task"],
        }
    }

    fn builtin(self) -> &'static str {
        match self {
            TemplateKind::Loss => include_str!("../../templates/loss.txt"),
            TemplateKind::Gradient => include_str!("../../templates/gradient.txt"),
            TemplateKind::Update => include_str!("../../templates/update.txt"),
            TemplateKind::PreRewrite => include_str!("../../templates/pre_rewrite.txt"),
            TemplateKind::PostRewrite => include_str!("../../templates/post_rewrite.txt"),
            TemplateKind::RewardScore => include_str!("../../templates/reward_score.txt"),
            TemplateKind::Author(Dimension::Structural) => include_str!("../../templates/author_structural.txt"),
            TemplateKind::Author(Dimension::SpatialPattern) => {
                include_str!("../../templates/author_spatial_pattern.txt")
            }
            TemplateKind::Author(Dimension::SymbolicLogical) => {
                include_str!("../../templates/author_symbolic_logical.txt")
            }
            TemplateKind::Author(Dimension::PlanningExecution) => {
                include_str!("../../templates/author_planning_execution.txt")
            }
        }
    }
}

/// Names of the `{identifier}` placeholders in `text`, in order of first use.
pub fn placeholders(text: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) => {
                let name = &after[..close];
                if !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    if !out.iter().any(|n| n == name) {
                        out.push(name.to_string());
                    }
                    rest = &after[close + 1..];
                } else {
                    rest = after;
                }
            }
            None => break,
        }
    }
    out
}

/// The prompt templates used by the optimizer, the rewriting baselines and
/// the authoring helper.
#[derive(Clone, Debug, PartialEq)]
pub struct PromptTemplateSet {
    templates: BTreeMap<TemplateKind, String>,
}

impl Default for PromptTemplateSet {
    fn default() -> Self {
        Self::builtin()
    }
}

impl PromptTemplateSet {
    pub fn builtin() -> Self {
        PromptTemplateSet {
            templates: TemplateKind::all().into_iter().map(|k| (k, k.builtin().to_string())).collect(),
        }
    }

    /// Builtins overridden by any same-named files found in `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self, TpoError> {
        if !dir.is_dir() {
            return Err(TpoError::Config(format!("template directory {} not found", dir.display())));
        }
        let mut set = Self::builtin();
        for k in TemplateKind::all() {
            let p = dir.join(k.file_name());
            if p.is_file() {
                let text = std::fs::read_to_string(&p)
                    .map_err(|e| TpoError::Config(format!("reading {}: {e}", p.display())))?;
                set.templates.insert(k, text);
            }
        }
        set.validate()?;
        Ok(set)
    }

    pub fn with(mut self, kind: TemplateKind, text: &str) -> Self {
        self.templates.insert(kind, text.to_string());
        self
    }

    pub fn get(&self, kind: TemplateKind) -> &str {
        self.templates.get(&kind).map(String::as_str).unwrap_or_else(|| kind.builtin())
    }

    pub fn check(&self, kind: TemplateKind) -> Result<(), TpoError> {
        let present = placeholders(self.get(kind));
        for r in kind.required() {
            if !present.iter().any(|p| p == r) {
                return Err(TpoError::Config(format!("template {} lacks {{{r}}}", kind.file_name())));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), TpoError> {
        TemplateKind::all().into_iter().try_for_each(|k| self.check(k))
    }

    /// Substitute `vars`; every placeholder in the template must be bound.
    pub fn fill(&self, kind: TemplateKind, vars: &[(&str, &str)]) -> Result<String, TpoError> {
        self.check(kind)?;
        let text = self.get(kind);
        for p in placeholders(text) {
            if !vars.iter().any(|(k, _)| *k == p) {
                return Err(TpoError::Config(format!("no value for {{{p}}} in {}", kind.file_name())));
            }
        }
        let mut out = text.to_string();
        for (k, v) in vars {
            out = out.replace(&format!("{{{k}}}"), v);
        }
        Ok(out.trim_end().to_string())
    }
}
