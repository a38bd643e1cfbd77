use crate::model::{Evidence, Metric, QaAnswer, QaItem, Verdict, VideoClip};
use crate::modelio::JudgeClient;

/// Frames sent to the judge with every question.
pub const QA_FRAMES: usize = 8;

pub fn question_prompt(question: &str) -> String {
    format!("{question}\nAnswer with a single word: yes or no.")
}

/// First word of the reply, case-insensitive, punctuation stripped.
fn parse_yes_no(reply: &str) -> Option<bool> {
    let first = reply.split_whitespace().next()?;
    let word: String = first.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase();
    match word.as_str() {
        "yes" => Some(true),
        "no" => Some(false),
        _ => None,
    }
}

pub fn verify_qa(clip: &VideoClip, questions: &[QaItem], judge: &dyn JudgeClient) -> Verdict {
    if questions.is_empty() {
        return Verdict::metric_error(Metric::Qa, "QA truth has no questions");
    }
    let frames = clip.sample_uniform(QA_FRAMES);
    let mut answers = Vec::with_capacity(questions.len());
    for q in questions {
        let reply = match judge.chat(&frames, &question_prompt(&q.question)) {
            Ok(r) => r,
            Err(e) => return Verdict::metric_error(Metric::Qa, format!("judge failed on `{}`: {e}", q.question)),
        };
        let Some(answer) = parse_yes_no(&reply) else {
            return Verdict::metric_error(
                Metric::Qa,
                format!("unparseable judge reply {:?} to `{}`", reply.trim(), q.question),
            );
        };
        answers.push(QaAnswer {
            question: q.question.clone(),
            expected: q.answer,
            answer: Some(answer),
            reply,
        });
    }
    let pass = answers.iter().all(|a| a.answer == Some(a.expected));
    Verdict::new(Metric::Qa, pass, Evidence::Qa { answers })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn yes_no_parsing() {
        assert_eq!(parse_yes_no("Yes."), Some(true));
        assert_eq!(parse_yes_no("  NO, it does not"), Some(false));
        assert_eq!(parse_yes_no("maybe"), None);
        assert_eq!(parse_yes_no("yesterday"), None);
        assert_eq!(parse_yes_no(""), None);
    }
}
