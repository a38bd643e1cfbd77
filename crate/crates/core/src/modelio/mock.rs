use std::collections::HashMap;
use std::sync::Mutex;

use crate::model::{Dataset, Frame, Task, TaskSample, VideoClip};
use crate::taskgen::{self, CorruptionMode};

use super::{ClientError, GeneratorClient, JudgeClient};

/// Replays ground-truth (or corrupted) clips for samples it recognizes by
/// the content hash of their initial frame.
pub struct OracleGenerator {
    by_hash: HashMap<String, TaskSample>,
    stored: HashMap<String, VideoClip>,
    noise: Option<CorruptionMode>,
    /// Restricts the noise to these tasks; other samples get clean clips.
    noise_tasks: Option<Vec<Task>>,
    cache: Mutex<HashMap<String, VideoClip>>,
    name: String,
}

impl OracleGenerator {
    pub fn new(samples: &[TaskSample], noise: Option<CorruptionMode>) -> Self {
        OracleGenerator {
            by_hash: samples.iter().map(|s| (s.initial.content_hash(), s.clone())).collect(),
            stored: HashMap::new(),
            noise,
            noise_tasks: None,
            cache: Mutex::new(HashMap::new()),
            name: "oracle".into(),
        }
    }

    /// Uses the dataset's stored ground-truth clips where present.
    pub fn from_dataset(ds: &Dataset, noise: Option<CorruptionMode>) -> Result<Self, ClientError> {
        let mut g = Self::new(&ds.samples, noise);
        for s in &ds.samples {
            if let Some(clip) = ds.gt_video(&s.id).map_err(|e| ClientError::Backend(e.to_string()))? {
                g.stored.insert(s.id.clone(), clip);
            }
        }
        Ok(g)
    }

    pub fn only_for(mut self, tasks: &[Task]) -> Self {
        self.noise_tasks = Some(tasks.to_vec());
        self
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    fn clean(&self, s: &TaskSample) -> Result<VideoClip, ClientError> {
        if let Some(c) = self.stored.get(&s.id) {
            return Ok(c.clone());
        }
        if let Some(c) = self.cache.lock().unwrap().get(&s.id) {
            return Ok(c.clone());
        }
        let clip = taskgen::render_gt_video(s).map_err(|e| ClientError::Backend(e.to_string()))?;
        self.cache.lock().unwrap().insert(s.id.clone(), clip.clone());
        Ok(clip)
    }
}

impl GeneratorClient for OracleGenerator {
    fn generate(&self, initial: &Frame, _prompt: &str, seed: u64) -> Result<VideoClip, ClientError> {
        let hash = initial.content_hash();
        let s = self.by_hash.get(&hash).ok_or(ClientError::UnknownFrame(hash))?;
        let noisy = self
            .noise
            .filter(|m| m.applies_to(s.task))
            .filter(|_| self.noise_tasks.as_ref().is_none_or(|t| t.contains(&s.task)));
        match noisy {
            Some(mode) => taskgen::corrupt(s, mode, seed).map_err(|e| ClientError::Backend(e.to_string())),
            None => self.clean(s),
        }
    }

    fn model_name(&self) -> &str {
        &self.name
    }
}

/// One recorded judge request.
#[derive(Clone, Debug, PartialEq)]
pub struct JudgeCall {
    pub text: String,
    pub images: usize,
}

/// Replies from a fixed script, in order.
pub struct ScriptedJudge {
    replies: Vec<String>,
    cycle: bool,
    state: Mutex<(usize, Vec<JudgeCall>)>,
}

impl ScriptedJudge {
    pub fn new<S: Into<String>>(replies: impl IntoIterator<Item = S>) -> Self {
        ScriptedJudge {
            replies: replies.into_iter().map(Into::into).collect(),
            cycle: false,
            state: Mutex::new((0, Vec::new())),
        }
    }

    /// Restart the script instead of failing when it runs out.
    pub fn cycling(mut self) -> Self {
        self.cycle = true;
        self
    }

    pub fn transcript(&self) -> Vec<JudgeCall> {
        self.state.lock().unwrap().1.clone()
    }

    pub fn calls(&self) -> usize {
        self.state.lock().unwrap().1.len()
    }
}

impl JudgeClient for ScriptedJudge {
    fn chat(&self, images: &[Frame], text: &str) -> Result<String, ClientError> {
        let mut st = self.state.lock().unwrap();
        st.1.push(JudgeCall {
            text: text.to_string(),
            images: images.len(),
        });
        let i = st.0;
        st.0 += 1;
        if self.replies.is_empty() {
            return Err(ClientError::Exhausted(0));
        }
        let idx = if self.cycle { i % self.replies.len() } else { i };
        self.replies.get(idx).cloned().ok_or(ClientError::Exhausted(self.replies.len()))
    }
}

type ReplyFn = dyn Fn(usize, &[Frame], &str) -> Result<String, ClientError> + Send + Sync;

/// Judge whose reply is computed from the call index and request.
pub struct FnJudge {
    f: Box<ReplyFn>,
    state: Mutex<Vec<JudgeCall>>,
}

impl FnJudge {
    pub fn new(f: impl Fn(usize, &[Frame], &str) -> Result<String, ClientError> + Send + Sync + 'static) -> Self {
        FnJudge {
            f: Box::new(f),
            state: Mutex::new(Vec::new()),
        }
    }

    pub fn transcript(&self) -> Vec<JudgeCall> {
        self.state.lock().unwrap().clone()
    }
}

impl JudgeClient for FnJudge {
    fn chat(&self, images: &[Frame], text: &str) -> Result<String, ClientError> {
        let i = {
            let mut st = self.state.lock().unwrap();
            st.push(JudgeCall {
                text: text.to_string(),
                images: images.len(),
            });
            st.len() - 1
        };
        (self.f)(i, images, text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn script_runs_out() {
        let j = ScriptedJudge::new(["yes"]);
        assert_eq!(j.chat(&[], "q").unwrap(), "yes");
        assert!(matches!(j.chat(&[], "q"), Err(ClientError::Exhausted(1))));
        assert_eq!(j.transcript().len(), 2);
        let c = ScriptedJudge::new(["a", "b"]).cycling();
        let got: Vec<String> = (0..3).map(|_| c.chat(&[], "").unwrap()).collect();
        assert_eq!(got, ["a", "b", "a"]);
    }
}
