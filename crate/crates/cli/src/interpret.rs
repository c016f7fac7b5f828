use std::io::Write;
use std::path::Path;

use moira_core::interpret::Interpreter;
use moira_core::report::RunReport;

use crate::{CliError, Format, Input, Paths};

/// Interprets every line of `input` against the model and writes the
/// report. Ids restart for each run, so the output for a given model and
/// input never changes.
pub fn cmd_interpret(model: Option<&Path>, input: &Input, format: Format, out: &mut dyn Write) -> Result<RunReport, CliError> {
    let paths = Paths {
        model: model.map(Path::to_path_buf),
        ..Paths::default()
    };
    let kb = paths.sources()?.model_kb()?;
    let text = input.read()?;
    let report = RunReport::interpret(&kb, &Interpreter::default(), text.lines());
    out.write_all(render_report(&report, format)?.as_bytes())
        .map_err(CliError::Output)?;
    Ok(report)
}

pub fn render_report(report: &RunReport, format: Format) -> Result<String, CliError> {
    Ok(match format {
        Format::Text => report.render_text(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            s
        }
    })
}
