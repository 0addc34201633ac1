//! Rendering helpers shared by the subcommands.
//!
//! Human output rounds to 4 decimals; delimited and structured output carry
//! full precision. Identical invocations produce byte-identical delimited
//! and structured output.

use diffset::{SelectionTrace, SubsetEvaluation, SCORE_CAP};
use serde::Serialize;

/// Self-describing envelope for structured (JSON) output.
#[derive(Serialize)]
pub struct Document<C: Serialize, R: Serialize> {
    pub command: &'static str,
    pub generator: &'static str,
    pub seed: u64,
    pub config: C,
    pub result: R,
}

pub fn to_json<C: Serialize, R: Serialize>(doc: &Document<C, R>) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents always serialize");
    s.push('\n');
    s
}

/// 4-decimal rendering with the cap sentinel spelled out.
pub fn round4(value: f64) -> String {
    if value >= SCORE_CAP {
        "+CAP".into()
    } else if value <= -SCORE_CAP {
        "-CAP".into()
    } else {
        format!("{value:.4}")
    }
}

pub fn join_names(names: &[String]) -> String {
    if names.is_empty() {
        "(none)".into()
    } else {
        names.join(", ")
    }
}

pub fn termination_label(t: diffset::Termination) -> &'static str {
    match t {
        diffset::Termination::ExhaustedVariables => "exhausted_variables",
        diffset::Termination::BelowFMin => "below_f_min",
        diffset::Termination::NoPositiveK => "no_positive_k",
        diffset::Termination::MaxIterations => "max_iterations",
    }
}

pub fn render_trace_human(trace: &SelectionTrace) -> String {
    let mut out = String::new();
    for step in &trace.steps {
        let name = &trace.variables[step.chosen.index()];
        out.push_str(&format!(
            "iteration {}: chose {}   H = {} ± {}   k = {}   f = {}   dH >= {}\n",
            step.iteration,
            name,
            round4(step.chosen_estimate.h_est),
            round4(step.chosen_estimate.sigma_est),
            round4(step.k_star),
            round4(step.f_star),
            round4(step.entropy_reduction_lower_bound),
        ));
        out.push_str("  candidate        h_est     sigma         k         f\n");
        for cand in &step.candidates {
            let marker = if cand.variable == step.chosen { "  *" } else { "" };
            out.push_str(&format!(
                "  {:<12} {:>9} {:>9} {:>9} {:>9}{}\n",
                trace.variables[cand.variable.index()],
                round4(cand.estimate.h_est),
                round4(cand.estimate.sigma_est),
                round4(cand.k),
                round4(cand.f),
                marker,
            ));
        }
    }
    let chosen: Vec<String> = trace
        .steps
        .iter()
        .map(|s| trace.variables[s.chosen.index()].clone())
        .collect();
    out.push_str(&format!(
        "termination: {} after {} step(s)\nselected: {}\n",
        termination_label(trace.termination),
        trace.steps.len(),
        join_names(&chosen),
    ));
    out
}

/// Candidate scoreboard in long form, one row per (iteration, candidate).
pub fn render_trace_delimited(trace: &SelectionTrace, delimiter: char) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "iteration{d}variable{d}chosen{d}h_est{d}sigma_est{d}k{d}f\n",
        d = delimiter
    ));
    for step in &trace.steps {
        for cand in &step.candidates {
            out.push_str(&format!(
                "{}{d}{}{d}{}{d}{}{d}{}{d}{}{d}{}\n",
                step.iteration,
                trace.variables[cand.variable.index()],
                (cand.variable == step.chosen) as u8,
                cand.estimate.h_est,
                cand.estimate.sigma_est,
                cand.k,
                cand.f,
                d = delimiter
            ));
        }
    }
    out
}

pub fn render_ranking_human(
    evaluations: &[SubsetEvaluation],
    names: &[String],
    minimal: &[Vec<usize>],
) -> String {
    let mut out = String::new();
    out.push_str("rank  entropy   subset\n");
    for (rank, eval) in evaluations.iter().enumerate() {
        let indices: Vec<usize> = eval.subset.iter().map(|v| v.index()).collect();
        let label = indices
            .iter()
            .map(|&i| names[i].clone())
            .collect::<Vec<_>>()
            .join(" ");
        let marker = if minimal.contains(&indices) { "  <- minimal optimal" } else { "" };
        out.push_str(&format!(
            "{:>4}  {}   {{{}}}{}\n",
            rank + 1,
            round4(eval.entropy),
            label,
            marker
        ));
    }
    out
}

pub fn render_ranking_delimited(
    evaluations: &[SubsetEvaluation],
    names: &[String],
    minimal: &[Vec<usize>],
    delimiter: char,
) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "rank{d}subset{d}cardinality{d}entropy{d}minimal_optimal\n",
        d = delimiter
    ));
    for (rank, eval) in evaluations.iter().enumerate() {
        let indices: Vec<usize> = eval.subset.iter().map(|v| v.index()).collect();
        let label = indices
            .iter()
            .map(|&i| names[i].clone())
            .collect::<Vec<_>>()
            .join("+");
        out.push_str(&format!(
            "{}{d}{}{d}{}{d}{}{d}{}\n",
            rank + 1,
            label,
            indices.len(),
            eval.entropy,
            minimal.contains(&indices) as u8,
            d = delimiter
        ));
    }
    out
}
