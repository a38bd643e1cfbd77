use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::model::{Dataset, Task};
use crate::modelio::{
    Embedder, GeneratorClient, Grounder, HsvGrounder, HttpConfig, HttpEmbedder, HttpGenerator, HttpGrounder,
    HttpJudge, JudgeClient, OracleGenerator, PatchHistogramEmbedder, ScriptedJudge,
};
use crate::taskgen::CorruptionMode;
use crate::tpo::TpoConfig;
use crate::track::TrackConfig;
use crate::verify::{Deps, VerifyConfig};

use super::HarnessError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    #[default]
    Plain,
    PreRewrite,
    PostRewrite,
    #[serde(rename = "videotpo", alias = "video_tpo")]
    VideoTpo,
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "plain" => Ok(Strategy::Plain),
            "pre_rewrite" | "pre" => Ok(Strategy::PreRewrite),
            "post_rewrite" | "post" => Ok(Strategy::PostRewrite),
            "videotpo" | "video_tpo" | "tpo" => Ok(Strategy::VideoTpo),
            _ => Err(format!("unknown strategy `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub k: usize,
    pub base_seed: u64,
    pub strategy: Strategy,
    /// Model name to input `[width, height]`; models not listed get the
    /// sample's own resolution.
    pub resolution: BTreeMap<String, (u32, u32)>,
    /// Worker threads for sample-level parallelism; 0 picks the core count.
    pub workers: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            k: 5,
            base_seed: 0,
            strategy: Strategy::Plain,
            resolution: BTreeMap::new(),
            workers: 0,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.k < 1 {
            return Err(HarnessError::Config("eval.k must be at least 1".into()));
        }
        if let Some((m, _)) = self.resolution.iter().find(|(_, (w, h))| *w == 0 || *h == 0) {
            return Err(HarnessError::Config(format!("resolution for `{m}` has a zero side")));
        }
        Ok(())
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.k as u64).map(|g| self.base_seed.wrapping_add(g)).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    /// Replays ground-truth clips, optionally corrupted.
    #[default]
    Oracle,
    Http,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorSection {
    pub kind: GeneratorKind,
    /// Oracle only: corrupt clips of the tasks the mode applies to.
    pub noise: Option<CorruptionMode>,
    /// Oracle only: restrict `noise` to these task slugs.
    pub noise_tasks: Vec<String>,
    /// Oracle only: model name reported to the resolution policy.
    pub name: Option<String>,
    pub http: HttpConfig,
}

impl Default for GeneratorSection {
    fn default() -> Self {
        GeneratorSection {
            kind: GeneratorKind::Oracle,
            noise: None,
            noise_tasks: Vec::new(),
            name: None,
            http: HttpConfig {
                api_key_env: "TIVI_GEN_API_KEY".into(),
                ..HttpConfig::default()
            },
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JudgeKind {
    #[default]
    None,
    /// Fixed replies, cycled; for offline runs and tests.
    Scripted,
    Http,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JudgeSection {
    pub kind: JudgeKind,
    pub replies: Vec<String>,
    pub http: HttpConfig,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalOrHttp {
    #[default]
    Builtin,
    Http,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceSection {
    pub kind: LocalOrHttp,
    pub http: HttpConfig,
}

/// Whole configuration file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessConfig {
    pub verify: VerifyConfig,
    pub track: TrackConfig,
    pub judge: JudgeSection,
    pub generator: GeneratorSection,
    pub embedder: ServiceSection,
    pub grounder: ServiceSection,
    pub eval: EvalConfig,
    pub tpo: TpoConfig,
    /// Directory of prompt templates overriding the built-in ones.
    pub templates: Option<String>,
}

impl HarnessConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: HarnessConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("reading {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.verify.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        self.track.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        self.eval.validate()?;
        self.tpo.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        for t in &self.generator.noise_tasks {
            t.parse::<Task>().map_err(HarnessError::Config)?;
        }
        Ok(())
    }

    pub fn build_judge(&self) -> Result<Option<Arc<dyn JudgeClient>>, HarnessError> {
        Ok(match self.judge.kind {
            JudgeKind::None => None,
            JudgeKind::Scripted => {
                if self.judge.replies.is_empty() {
                    return Err(HarnessError::Config("scripted judge needs at least one reply".into()));
                }
                Some(Arc::new(ScriptedJudge::new(self.judge.replies.clone()).cycling()))
            }
            JudgeKind::Http => Some(Arc::new(HttpJudge::new(self.judge.http.clone()).map_err(client_cfg)?)),
        })
    }

    pub fn build_deps(&self) -> Result<Deps, HarnessError> {
        let embedder: Arc<dyn Embedder> = match self.embedder.kind {
            LocalOrHttp::Builtin => Arc::new(PatchHistogramEmbedder),
            LocalOrHttp::Http => Arc::new(HttpEmbedder::new(self.embedder.http.clone()).map_err(client_cfg)?),
        };
        let grounder: Arc<dyn Grounder> = match self.grounder.kind {
            LocalOrHttp::Builtin => Arc::new(HsvGrounder::default()),
            LocalOrHttp::Http => Arc::new(HttpGrounder::new(self.grounder.http.clone()).map_err(client_cfg)?),
        };
        let mut deps = Deps::default().with_embedder(embedder).with_grounder(grounder);
        if let Some(j) = self.build_judge()? {
            deps = deps.with_judge(j);
        }
        Ok(deps)
    }

    pub fn build_generator(&self, dataset: &Dataset) -> Result<Arc<dyn GeneratorClient>, HarnessError> {
        let g = &self.generator;
        Ok(match g.kind {
            GeneratorKind::Oracle => {
                let mut o = OracleGenerator::from_dataset(dataset, g.noise)
                    .map_err(|e| HarnessError::Runtime(e.to_string()))?;
                if !g.noise_tasks.is_empty() {
                    let tasks = g
                        .noise_tasks
                        .iter()
                        .map(|t| t.parse::<Task>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(HarnessError::Config)?;
                    o = o.only_for(&tasks);
                }
                if let Some(n) = &g.name {
                    o = o.named(n);
                }
                Arc::new(o)
            }
            GeneratorKind::Http => Arc::new(HttpGenerator::new(g.http.clone()).map_err(client_cfg)?),
        })
    }
}

fn client_cfg(e: crate::modelio::ClientError) -> HarnessError {
    HarnessError::Config(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_file_parses() {
        let cfg = HarnessConfig::from_toml(
            r#"
            [verify]
            ssim_threshold = 0.75
            [verify.tasks.sudoku]
            ncc_threshold = 0.9
            [track]
            n_samples = 12
            [judge]
            kind = "scripted"
            replies = ["yes"]
            [generator]
            kind = "oracle"
            noise = "static_video"
            noise_tasks = ["sudoku"]
            [embedder]
            kind = "builtin"
            [grounder]
            kind = "builtin"
            [eval]
            k = 3
            strategy = "videotpo"
            resolution = { oracle = [640, 360] }
            [tpo]
            n_steps = 4
            "#,
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.eval.strategy, Strategy::VideoTpo);
        assert_eq!(cfg.eval.resolution["oracle"], (640, 360));
        assert_eq!(cfg.eval.seeds(), [0, 1, 2]);
        assert_eq!(cfg.tpo.n_steps, 4);
        assert!(cfg.build_judge().unwrap().is_some());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(HarnessConfig::from_toml("[eval]\nkk = 3").is_err());
        assert!(HarnessConfig::from_toml("[nope]").is_err());
        let bad = HarnessConfig::from_toml("[eval]\nk = 0").unwrap();
        assert!(bad.validate().is_err());
    }
}
