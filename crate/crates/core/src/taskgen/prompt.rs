//! Deterministic offline prompts, one skeleton per dimension.

use crate::model::Dimension;

/// Assemble a prompt from scene, process and end-state sentences plus the
/// dimension's fixed closing instruction.
pub fn compose(dimension: Dimension, scene: &str, process: &str, end: &str) -> String {
    let closing = match dimension {
        Dimension::Structural => "Keep the camera static and the layout unchanged; only the described elements move.",
        Dimension::SpatialPattern => "Keep the camera static; existing objects keep their size, shape and position.",
        Dimension::SymbolicLogical => "Keep the camera static and every given symbol unchanged; write new symbols in the same style.",
        Dimension::PlanningExecution => "Keep the camera static and carry out the steps in a physically plausible order.",
    };
    format!("{scene} {process} {end} {closing}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_joins_sentences() {
        let p = compose(Dimension::Structural, "A.", "B.", "C.");
        assert!(p.starts_with("A. B. C. "));
        assert!(p.split_whitespace().count() < 150);
    }
}
