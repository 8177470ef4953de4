//! Rendering: a fixed-width table for people, pretty JSON for machines.

use std::io::Write;

use crate::commands::{fmt_point, Outcome, Report};
use crate::{Cli, Failure};

pub fn report_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn table(outcome: &Outcome) -> String {
    let r = &outcome.report;
    let mut lines = vec![format!(
        "command {}  tol {:.1e}  probes {}  seed {}",
        r.command, r.tol, r.probes, r.seed
    )];
    if !r.residuals.is_empty() {
        lines.push(format!(
            "{:<34} {:>13} {:>13}  {:<6} {}",
            "residual", "max", "mean", "status", "argmax"
        ));
        for res in &r.residuals {
            let status = if res.passes(r.tol) { "ok" } else { "FAIL" };
            lines.push(format!(
                "{:<34} {:>13.6e} {:>13.6e}  {:<6} {}",
                res.name,
                res.max,
                res.mean,
                status,
                fmt_point(&res.argmax_point)
            ));
        }
    }
    lines.extend(outcome.notes.iter().cloned());
    let mut s = lines.join("\n");
    s.push('\n');
    s
}

/// Writes `report.json` and any extra files under `--out`, then the table
/// or JSON to `stdout`.
pub fn emit(outcome: &Outcome, cli: &Cli, stdout: &mut dyn Write) -> Result<(), Failure> {
    let json = report_json(&outcome.report);
    if let Some(dir) = &cli.flags.out {
        let io = |e: std::io::Error| Failure::Config(format!("--out {}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        std::fs::write(dir.join("report.json"), &json).map_err(io)?;
        for (name, body) in &outcome.files {
            std::fs::write(dir.join(name), body).map_err(io)?;
        }
    }
    let text = if cli.flags.json { json } else { table(outcome) };
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| Failure::Config(format!("writing output: {e}")))
}
