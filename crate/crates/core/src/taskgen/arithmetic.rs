use rand::Rng as _;

use crate::imgproc::palette::INK;
use crate::imgproc::{Canvas, GlyphAtlas};
use crate::model::{Dimension, Frame, GroundTruth, Rational};
use crate::verify::expr::parse_expression;

use super::{prompt, CorruptionMode, GenError, Instance, Params, Rng, MIN_FRAMES};

pub(crate) struct Arithmetic {
    expression: String,
    value: Rational,
    scale: u32,
    origin: (i64, i64),
    width: u32,
    height: u32,
    bg: [u8; 3],
}

fn random_expression(ops: usize, max_operand: u32, rng: &mut Rng) -> String {
    let mut s = rng.random_range(1..=max_operand).to_string();
    for _ in 0..ops {
        let op = ['+', '-', '×', '÷'][rng.random_range(0..4)];
        let v = if op == '÷' || op == '×' {
            rng.random_range(2..=9)
        } else {
            rng.random_range(1..=max_operand)
        };
        s.push(op);
        s.push_str(&v.to_string());
    }
    s
}

impl Arithmetic {
    pub fn generate(p: &Params, rng: &mut Rng) -> Result<Arithmetic, GenError> {
        let ops = p.difficulty.pick(1, 2, 3);
        let max_operand = p.difficulty.pick(9, 20, 30);
        for _ in 0..10_000 {
            let expression = random_expression(ops, max_operand, rng);
            let Ok(expr) = parse_expression(&expression) else { continue };
            let Ok(v) = expr.eval() else { continue };
            // Each division must be exact on its own, not only in the total.
            if !expr.divisions_exact() || !v.0.is_integer() || v.num() < 0 || v.num() > 999 {
                continue;
            }
            let atlas = GlyphAtlas::builtin();
            let full = format!("{expression}={}", v);
            let by_width = (p.width as f64 * 0.8) / (atlas.text_width(&full, 1) as f64);
            let by_height = (p.height as f64 * 0.3) / atlas.text_height(1) as f64;
            let scale = by_width.min(by_height).floor().clamp(2.0, 16.0) as u32;
            let w = atlas.text_width(&full, scale) as i64;
            let h = atlas.text_height(scale) as i64;
            let origin = ((p.width as i64 - w) / 2, (p.height as i64 - h) / 2);
            return Ok(Arithmetic {
                expression,
                value: v,
                scale,
                origin,
                width: p.width,
                height: p.height,
                bg: p.bg,
            });
        }
        Err(GenError::Failed("no admissible expression found".into()))
    }

    fn render(&self, answer: &str) -> Frame {
        let mut c = Canvas::new(self.width, self.height, self.bg);
        let text = format!("{}={}", self.expression, answer);
        c.text(self.origin.0, self.origin.1, self.scale, &text, INK);
        c.into_frame()
    }

    fn answer(&self) -> String {
        self.value.to_string()
    }

    /// Answer prefix visible in frame `i`: digits appear one per frame after
    /// a short pause.
    fn shown(&self, i: usize) -> String {
        let a = self.answer();
        let start = 4;
        let k = i.saturating_sub(start - 1).min(a.len());
        if i < start {
            String::new()
        } else {
            a[..k].to_string()
        }
    }
}

impl Instance for Arithmetic {
    fn truth(&self) -> GroundTruth {
        GroundTruth::ExprResult {
            expression: self.expression.clone(),
            value: self.value,
        }
    }

    fn prompt(&self) -> String {
        prompt::compose(
            Dimension::SymbolicLogical,
            &format!("A clean board shows the expression {}= in black digits.", self.expression),
            "A hand-written result appears to the right of the equals sign, one digit at a time, following the usual order of operations.",
            "The board ends showing the complete equation with its correct value.",
        )
    }

    fn frame_count(&self) -> usize {
        MIN_FRAMES
    }

    fn frame(&self, i: usize) -> Frame {
        if i + 1 >= self.frame_count() {
            return self.render(&self.answer());
        }
        self.render(&self.shown(i))
    }

    fn corrupt(&self, mode: CorruptionMode, rng: &mut Rng) -> Option<Vec<Frame>> {
        if mode != CorruptionMode::WrongDigit {
            return None;
        }
        let mut digits: Vec<u8> = self.answer().bytes().map(|b| b - b'0').collect();
        let pos = rng.random_range(0..digits.len());
        let lo = if pos == 0 && digits.len() > 1 { 1 } else { 0 };
        let choices: Vec<u8> = (lo..=9).filter(|&d| d != digits[pos]).collect();
        digits[pos] = choices[rng.random_range(0..choices.len())];
        let wrong: String = digits.iter().map(|d| (b'0' + d) as char).collect();
        let last = self.render(&wrong);
        let total = self.frame_count();
        Some((0..total).map(|i| if i + 1 >= total { last.clone() } else { self.frame(i) }).collect())
    }
}
