//! Analysis artifacts for a trained model: pruned emission tables,
//! transition heatmaps, the dominant tactic path, dominant-action labels,
//! and permutation alignment between models.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hmm::HmmModel;

/// Retained `(action, probability)` pairs for one tactic, descending by
/// probability. Probabilities are reported exactly as in the model,
/// never renormalized after pruning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrunedRow {
    pub tactic: usize,
    pub actions: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TacticReport {
    pub threshold: f64,
    pub pruned_emissions: Vec<PrunedRow>,
    pub transition: Vec<Vec<f64>>,
    pub dominant_path: Vec<usize>,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatmapFormat {
    Svg,
    Text,
}

/// Alignment of a second model onto a reference: state `i` of the
/// reference corresponds to state `permutation[i]` of the other model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub permutation: Vec<usize>,
    /// Minimal total L1 distance between emission matrices.
    pub residual: f64,
}

fn check_threshold(threshold: f64) -> Result<()> {
    if !(0.0..1.0).contains(&threshold) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be in [0, 1), got {threshold}"
        )));
    }
    Ok(())
}

/// Per tactic, keep `(action, p)` pairs with `p >= threshold`, descending
/// by probability (symbol order as tiebreak).
pub fn prune_emissions(model: &HmmModel, threshold: f64) -> Result<Vec<PrunedRow>> {
    check_threshold(threshold)?;
    let symbols = model.alphabet().symbols();
    Ok(model
        .emission()
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut actions: Vec<(String, f64)> = row
                .iter()
                .enumerate()
                .filter(|(_, &p)| p >= threshold)
                .map(|(k, &p)| (symbols[k].clone(), p))
                .collect();
            actions.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
            PrunedRow { tactic: i, actions }
        })
        .collect())
}

fn luminance(p: f64) -> u8 {
    (255.0 * (1.0 - p)).round() as u8
}

/// Render a transition matrix as a grayscale grid. Row = source tactic,
/// column = destination; cell luminance is `255 * (1 - p)` rounded to the
/// nearest integer, so probability 1 is black and 0 is white.
pub fn render_heatmap(transition: &[Vec<f64>], format: HeatmapFormat) -> Result<String> {
    let m = transition.len();
    if m == 0 {
        return Err(Error::InvalidArgument("empty transition matrix".into()));
    }
    for (i, row) in transition.iter().enumerate() {
        if row.len() != m {
            return Err(Error::InvalidArgument(format!(
                "transition row {i} has {} entries, expected {m}",
                row.len()
            )));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidArgument(format!(
                "transition row {i} sums to {sum}, not stochastic"
            )));
        }
    }

    match format {
        HeatmapFormat::Text => {
            let mut out = String::new();
            for row in transition {
                let line = row.iter().map(|p| format!("{p:.3}")).join(" ");
                out.push_str(&line);
                out.push('\n');
            }
            Ok(out)
        }
        HeatmapFormat::Svg => {
            const CELL: usize = 40;
            const MARGIN: usize = 30;
            let size = MARGIN + m * CELL + 10;
            let mut out = String::new();
            out.push_str(&format!(
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n"
            ));
            for (i, row) in transition.iter().enumerate() {
                out.push_str(&format!(
                    "  <text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">S{}</text>\n",
                    MARGIN / 2,
                    MARGIN + i * CELL + CELL / 2 + 4,
                    i + 1
                ));
                out.push_str(&format!(
                    "  <text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">S{}</text>\n",
                    MARGIN + i * CELL + CELL / 2,
                    MARGIN - 8,
                    i + 1
                ));
                for (j, &p) in row.iter().enumerate() {
                    let l = luminance(p);
                    out.push_str(&format!(
                        "  <rect x=\"{}\" y=\"{}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"rgb({l},{l},{l})\" stroke=\"gray\"/>\n",
                        MARGIN + j * CELL,
                        MARGIN + i * CELL
                    ));
                }
            }
            out.push_str("</svg>\n");
            Ok(out)
        }
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > best {
            best = v;
            arg = i;
        }
    }
    arg
}

/// Greedy argmax walk: start at the highest-prior tactic, repeatedly step
/// to the argmax of the current transition row, stop before revisiting
/// any tactic already on the path. Ties break toward the lower index.
pub fn dominant_path(model: &HmmModel) -> Vec<usize> {
    let mut visited = vec![false; model.num_states()];
    let mut path = Vec::new();
    let mut current = argmax(model.prior());
    while !visited[current] {
        visited[current] = true;
        path.push(current);
        current = argmax(&model.transition()[current]);
    }
    path
}

/// Label each tactic by its retained actions joined with `+` in
/// descending probability, or `(diffuse)` when nothing survives pruning.
pub fn label_tactics(model: &HmmModel, threshold: f64) -> Result<Vec<String>> {
    Ok(prune_emissions(model, threshold)?
        .into_iter()
        .map(|row| {
            if row.actions.is_empty() {
                "(diffuse)".to_string()
            } else {
                row.actions.iter().map(|(name, _)| name.as_str()).join("+")
            }
        })
        .collect())
}

/// Find the relabeling of `other`'s states minimizing the total L1
/// distance between emission matrices, by exhaustive search over all
/// permutations (refused above 8 states).
pub fn align(reference: &HmmModel, other: &HmmModel) -> Result<Alignment> {
    let m = reference.num_states();
    if other.num_states() != m {
        return Err(Error::InvalidArgument(format!(
            "cannot align models with {m} and {} states",
            other.num_states()
        )));
    }
    if reference.alphabet() != other.alphabet() {
        return Err(Error::InvalidArgument(
            "cannot align models over different alphabets".into(),
        ));
    }
    if m > 8 {
        return Err(Error::InvalidArgument(format!(
            "alignment is exhaustive over permutations and refuses M > 8 (got {m})"
        )));
    }

    // Pairwise emission-row distances, so each permutation costs O(M).
    let mut dist = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            dist[i][j] = reference.emission()[i]
                .iter()
                .zip(&other.emission()[j])
                .map(|(a, b)| (a - b).abs())
                .sum();
        }
    }

    let mut best: Option<(Vec<usize>, f64)> = None;
    for perm in (0..m).permutations(m) {
        let cost: f64 = perm.iter().enumerate().map(|(i, &j)| dist[i][j]).sum();
        if best.as_ref().is_none_or(|(_, c)| cost < *c) {
            best = Some((perm, cost));
        }
    }
    let (permutation, residual) = best.expect("M >= 1");
    Ok(Alignment {
        permutation,
        residual,
    })
}

/// Assemble the full report for one model.
pub fn build_report(model: &HmmModel, threshold: f64) -> Result<TacticReport> {
    Ok(TacticReport {
        threshold,
        pruned_emissions: prune_emissions(model, threshold)?,
        transition: model.transition().to_vec(),
        dominant_path: dominant_path(model),
        labels: label_tactics(model, threshold)?,
    })
}

impl TacticReport {
    /// Human-readable text rendering: pruned emissions, transition
    /// matrix, and the dominant path in `S<k>` notation.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("Emission table (threshold {}):\n", self.threshold));
        for row in &self.pruned_emissions {
            let cells = row
                .actions
                .iter()
                .map(|(name, p)| format!("{name} {p:.3}"))
                .join(", ");
            out.push_str(&format!(
                "  S{}: {}  [{}]\n",
                row.tactic + 1,
                if cells.is_empty() { "(diffuse)".into() } else { cells },
                self.labels[row.tactic]
            ));
        }
        out.push_str("Transition matrix:\n");
        for row in &self.transition {
            out.push_str("  ");
            out.push_str(&row.iter().map(|p| format!("{p:.3}")).join(" "));
            out.push('\n');
        }
        let path = self
            .dominant_path
            .iter()
            .map(|&s| format!("S{}", s + 1))
            .join(" -> ");
        out.push_str(&format!("Dominant path: {path}\n"));
        out
    }
}
