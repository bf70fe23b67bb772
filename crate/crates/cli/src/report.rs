use std::path::PathBuf;

use nbest_rescore::pipeline::RunResult;

use crate::error::Failure;

pub const HEADER: &str = "run_name\tcorpus_wer_pct\toracle_wer_pct\trel_reduction_vs_baseline_pct\tfallback_rate";

/// One TSV row per run; relative reduction is against the first run.
pub fn table(runs: &[RunResult]) -> String {
    let baseline = runs.first().and_then(RunResult::corpus_wer);
    let mut out = String::from(HEADER);
    out.push('\n');
    for run in runs {
        let rel = match (baseline, run.corpus_wer()) {
            (Some(b), Some(w)) if b > 0.0 => format!("{:.1}%", (b - w) / b * 100.0),
            _ => "NA".to_string(),
        };
        let row = [
            run.name.replace(['\t', '\n'], " "),
            pct(run.corpus_wer()),
            pct(run.oracle_wer),
            rel,
            format!("{:.3}", run.parser_stats.fallback_rate()),
        ];
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| format!("{:.2}", v * 100.0))
}

pub fn report(paths: &[PathBuf]) -> Result<String, Failure> {
    let runs = paths
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", p.display())))
        })
        .collect::<Result<Vec<RunResult>, _>>()?;
    Ok(table(&runs))
}
