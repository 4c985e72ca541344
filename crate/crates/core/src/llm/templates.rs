//! Prompt templates and slot rendering.
//!
//! The four templates ship verbatim as versioned text assets under
//! `assets/prompts/v1/`; rendering only substitutes the named slot tokens,
//! so the instruction text (including its embedded JSON braces) is never
//! touched.

use serde::{Deserialize, Serialize};

/// Asset version of the shipped prompt set.
pub const PROMPT_VERSION: &str = "v1";

/// Identifies one of the four registered prompt templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    AcuExtractSalience,
    NliBatch,
    QaQuestionGen,
    QaAnswering,
}

impl TemplateId {
    pub fn as_str(self) -> &'static str {
        match self {
            TemplateId::AcuExtractSalience => "acu_extract_salience",
            TemplateId::NliBatch => "nli_batch",
            TemplateId::QaQuestionGen => "qa_question_gen",
            TemplateId::QaAnswering => "qa_answering",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "acu_extract_salience" => Some(Self::AcuExtractSalience),
            "nli_batch" => Some(Self::NliBatch),
            "qa_question_gen" => Some(Self::QaQuestionGen),
            "qa_answering" => Some(Self::QaAnswering),
            _ => None,
        }
    }

    pub const ALL: [TemplateId; 4] = [
        TemplateId::AcuExtractSalience,
        TemplateId::NliBatch,
        TemplateId::QaQuestionGen,
        TemplateId::QaAnswering,
    ];
}

impl std::fmt::Display for TemplateId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Raw template text for `id`.
pub fn template_text(id: TemplateId) -> &'static str {
    match id {
        TemplateId::AcuExtractSalience => {
            include_str!("../../assets/prompts/v1/acu_extract_salience.txt")
        }
        TemplateId::NliBatch => include_str!("../../assets/prompts/v1/nli_batch.txt"),
        TemplateId::QaQuestionGen => include_str!("../../assets/prompts/v1/qa_question_gen.txt"),
        TemplateId::QaAnswering => include_str!("../../assets/prompts/v1/qa_answering.txt"),
    }
}

/// One-shot example filled into the extraction template. The default ships
/// as an asset and can be replaced per run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionExample {
    pub document: String,
    pub output: String,
}

impl Default for ExtractionExample {
    fn default() -> Self {
        Self {
            document: include_str!("../../assets/prompts/v1/example_document.txt")
                .trim_end()
                .to_string(),
            output: include_str!("../../assets/prompts/v1/example_output.json")
                .trim_end()
                .to_string(),
        }
    }
}

/// Render the one-pass extraction + summary + salience prompt.
pub fn render_extraction(document: &str, example: &ExtractionExample) -> String {
    template_text(TemplateId::AcuExtractSalience)
        .replace("{example document}", &example.document)
        .replace("{example output}", &example.output)
        .replace("{input document}", document)
}

/// Render the batched NLI prompt over 1-based (premise, hypothesis) pairs.
pub fn render_nli(pairs: &[(String, String)]) -> String {
    let mut block = String::new();
    for (i, (premise, hypothesis)) in pairs.iter().enumerate() {
        if i > 0 {
            block.push('\n');
        }
        block.push_str(&format!(
            "###Premise {n}: {premise}\n###Hypothesis {n}: {hypothesis}\n",
            n = i + 1
        ));
    }
    template_text(TemplateId::NliBatch)
        .replace("{premise (similar ACUs) hypothesis (target ACU) pairs}", block.trim_end())
}

/// Render the question-generation prompt over 1-based numbered target ACUs.
pub fn render_question_gen(targets: &[&str]) -> String {
    let block: Vec<String> =
        targets.iter().enumerate().map(|(i, t)| format!("{}: {}", i + 1, t)).collect();
    template_text(TemplateId::QaQuestionGen).replace("{target ACUs}", &block.join("\n"))
}

/// Render the question-answering prompt over (context, questions) groups.
pub fn render_question_answering(items: &[(String, Vec<String>)]) -> String {
    let mut block = String::new();
    for (i, (context, questions)) in items.iter().enumerate() {
        block.push_str(&format!("Context {}: {}\n", i + 1, context));
        for (qi, q) in questions.iter().enumerate() {
            block.push_str(&format!("Q{}: {}\n", qi + 1, q));
        }
    }
    template_text(TemplateId::QaAnswering)
        .replace("{context (similar ACUs) questions (generated questions) list}", block.trim_end())
}
