//! One-pass document decomposition: ACU list, summary, and salient subset
//! from a single backend call.

use serde::Deserialize;
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::llm::templates::{render_extraction, ExtractionExample};
use crate::llm::{LlmError, LlmGateway, TemplateId};
use crate::model::{Acu, Document};

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("extraction payload is unusable: {0}")]
    ParseError(String),
    #[error("extraction returned an empty ACU list")]
    EmptyAcuList,
}

/// Output of [`extract`]: ordered ACUs with salience flags, the document
/// summary, and any non-fatal warnings hit while reconciling the payload.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionResult {
    pub acus: Vec<Acu>,
    pub summary: String,
    pub n_salient: usize,
    pub warnings: Vec<String>,
}

#[derive(Deserialize)]
struct ExtractionPayload {
    all_acus: Vec<String>,
    summary: String,
    salient_acus: Vec<String>,
}

/// Matching key for ACU texts: Unicode NFC, trimmed, internal whitespace
/// runs collapsed to one space, lowercased. Stored ACU text keeps its
/// original casing; this key is only used for dedup and salience matching.
pub fn normalize_acu_text(s: &str) -> String {
    let nfc: String = s.nfc().collect();
    let mut out = String::with_capacity(nfc.len());
    let mut pending_space = false;
    for ch in nfc.trim().chars() {
        if ch.is_whitespace() {
            pending_space = true;
        } else {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            for lower in ch.to_lowercase() {
                out.push(lower);
            }
        }
    }
    out
}

/// Decompose `doc` into ACUs, summary, and salient subset via one call.
///
/// Ordinals follow the backend's list order. Exact duplicates (by normalized
/// text) are dropped keeping the first. Salience is an exact match of
/// normalized text against the returned salient list: the prompt instructs
/// the model to copy salient ACUs from the full list, so fuzzier matching
/// would only hide backend noncompliance. Unmatched salient entries are
/// dropped with a warning.
pub fn extract(
    doc: &Document,
    gateway: &LlmGateway,
    example: &ExtractionExample,
    max_acus: Option<usize>,
) -> Result<ExtractionResult, ExtractError> {
    let prompt = render_extraction(&doc.text, example);
    let response = gateway.complete(TemplateId::AcuExtractSalience, prompt)?;
    let value = match response.parsed_json {
        Some(v) => v,
        None => return Err(crate::llm::parse_json_payload(&response.raw_text).map(|_| unreachable!()).unwrap_err().into()),
    };
    let payload: ExtractionPayload = serde_json::from_value(value).map_err(|e| {
        ExtractError::ParseError(format!(
            "payload must carry all_acus, summary, and salient_acus: {e}"
        ))
    })?;
    if payload.all_acus.is_empty() {
        return Err(ExtractError::EmptyAcuList);
    }
    if payload.summary.trim().is_empty() {
        return Err(ExtractError::ParseError("summary is empty".into()));
    }

    let mut warnings = Vec::new();
    let mut seen_keys: Vec<String> = Vec::new();
    let mut kept: Vec<(String, String)> = Vec::new(); // (text, key)
    for raw in &payload.all_acus {
        let text = raw.trim();
        if text.is_empty() {
            warnings.push("dropped empty ACU text".to_string());
            continue;
        }
        // The extractor contract forbids unresolved placeholder markers.
        if text.contains('{') && text.contains('}') {
            warnings.push(format!("dropped ACU with placeholder marker: {text:?}"));
            continue;
        }
        let key = normalize_acu_text(text);
        if seen_keys.iter().any(|k| k == &key) {
            warnings.push(format!("dropped duplicate ACU: {text:?}"));
            continue;
        }
        seen_keys.push(key.clone());
        kept.push((text.to_string(), key));
    }
    if let Some(cap) = max_acus {
        if kept.len() > cap {
            warnings.push(format!("capped ACU list from {} to {cap}", kept.len()));
            kept.truncate(cap);
        }
    }
    if kept.is_empty() {
        return Err(ExtractError::EmptyAcuList);
    }

    let salient_keys: Vec<String> =
        payload.salient_acus.iter().map(|s| normalize_acu_text(s)).collect();
    for (raw, key) in payload.salient_acus.iter().zip(&salient_keys) {
        if !kept.iter().any(|(_, k)| k == key) {
            let msg = format!("salient entry not present in all_acus: {raw:?}");
            log::warn!("{}: {msg}", doc.id);
            warnings.push(msg);
        }
    }

    let acus: Vec<Acu> = kept
        .into_iter()
        .enumerate()
        .map(|(ordinal, (text, key))| Acu {
            acu_id: Acu::id_for(&doc.id, ordinal),
            doc_id: doc.id.clone(),
            ordinal,
            salient: salient_keys.contains(&key),
            text,
        })
        .collect();
    let n_salient = acus.iter().filter(|a| a.salient).count();
    Ok(ExtractionResult { acus, summary: payload.summary, n_salient, warnings })
}
