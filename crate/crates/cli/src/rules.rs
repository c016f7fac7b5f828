use std::io::Write;

use serde::{Deserialize, Serialize};

use moira_core::ce::{describe_fact, load_document, render_statement, CeStatement};
use moira_core::fusion::{rationale, run_rules, Subject};
use moira_core::kernel::Provenance;

use crate::{read, CliError, Format, Paths};

/// What a rule run added, with the reason for each new instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RulesOutcome {
    pub rounds: usize,
    pub new_instances: Vec<String>,
    /// New instances, then new facts, one CE sentence each.
    pub facts: Vec<String>,
    /// `because ...` for each new instance, in the same order.
    pub rationales: Vec<String>,
}

impl RulesOutcome {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for f in &self.facts {
            out.push_str(f);
            out.push('\n');
        }
        for (id, r) in self.new_instances.iter().zip(&self.rationales) {
            out.push_str(&format!("\n{id}:\n{r}\n"));
        }
        out.push_str(&format!(
            "\n{} new facts, {} new instances, {} rounds\n",
            self.facts.len() - self.new_instances.len(),
            self.new_instances.len(),
            self.rounds
        ));
        out
    }
}

/// Loads `facts` (CE files) on top of the model and runs the rules to a
/// fixpoint. With `kb_out` the resulting knowledge base is saved there.
pub fn cmd_run_rules(
    paths: &Paths,
    facts: &[std::path::PathBuf],
    format: Format,
    kb_out: Option<&std::path::Path>,
    out: &mut dyn Write,
) -> Result<RulesOutcome, CliError> {
    let sources = paths.sources()?;
    let mut kb = sources.model_kb()?;
    let rules = sources.rules()?;
    for path in facts {
        let text = read(path)?;
        let source = path.display().to_string();
        load_document(&mut kb, &text, &Provenance::told(&source, chrono::DateTime::UNIX_EPOCH)).map_err(|source| {
            CliError::Load {
                path: path.clone(),
                source,
            }
        })?;
    }
    let run = run_rules(&mut kb, &rules)?;
    let declared = run.new_instances.iter().filter_map(|id| kb.instance(id)).map(|inst| {
        render_statement(&CeStatement::new_instance(&inst.concept, &inst.id, Vec::new()))
    });
    let facts = declared
        .chain(
            run.new_facts
                .iter()
                .filter_map(|id| kb.fact(*id))
                .map(|f| render_statement(&describe_fact(&kb, f))),
        )
        .collect();
    let rationales = run
        .new_instances
        .iter()
        .map(|id| Ok(rationale(&kb, &Subject::Instance(id.clone()))?.text))
        .collect::<Result<_, CliError>>()?;
    let outcome = RulesOutcome {
        rounds: run.rounds,
        new_instances: run.new_instances,
        facts,
        rationales,
    };
    if let Some(path) = kb_out {
        moira_core::persist::save_to(&kb, path)?;
    }
    let text = match format {
        Format::Text => outcome.render_text(),
        Format::Json => serde_json::to_string_pretty(&outcome)? + "\n",
    };
    out.write_all(text.as_bytes()).map_err(CliError::Output)?;
    Ok(outcome)
}
