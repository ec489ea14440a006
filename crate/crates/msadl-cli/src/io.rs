//! File loading and saving: DSL text (`.jsm`/`.lsm`) and the JSON
//! interchange format (`.json`).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use msadl_core::diag::{codes, Diagnostic, Location};
use msadl_core::model::View;
use msadl_core::surface::{parse_unit, serialize_unit, SourceUnit};

pub const FORMAT_VERSION: &str = "1.0.0";

/// The JSON interchange envelope. Unknown fields are rejected: models feed
/// transforms, so silent drift is worse than a hard error.
#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct InterchangeDocument {
    pub format_version: String,
    pub view: View,
    pub payload: SourceUnit,
}

impl InterchangeDocument {
    pub fn new(unit: SourceUnit) -> Self {
        InterchangeDocument { format_version: FORMAT_VERSION.to_string(), view: unit.view, payload: unit }
    }

    fn version_supported(&self) -> bool {
        let mut parts = self.format_version.split('.');
        matches!((parts.next(), parts.next()), (Some("1"), Some("0")))
    }
}

pub fn view_of_path(path: &Path) -> Option<View> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("jsm") => Some(View::Jolie),
        Some("lsm") => Some(View::Lemma),
        _ => None,
    }
}

fn is_interchange(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()) == Some("json")
}

fn file_loc(path: &Path) -> Location {
    Location { file: path.display().to_string(), ..Default::default() }
}

pub fn load_unit(path: &Path) -> Result<SourceUnit, Vec<Diagnostic>> {
    let text = fs::read_to_string(path).map_err(|e| {
        vec![Diagnostic::error(codes::PARSE_ERROR, format!("cannot read {}: {e}", path.display()), file_loc(path))]
    })?;
    if is_interchange(path) {
        let doc: InterchangeDocument = serde_json::from_str(&text).map_err(|e| {
            vec![Diagnostic::error(
                codes::PARSE_ERROR,
                format!("{} is not a valid interchange document: {e}", path.display()),
                file_loc(path),
            )]
        })?;
        if !doc.version_supported() {
            return Err(vec![Diagnostic::error(
                codes::FORMAT_VERSION_UNSUPPORTED,
                format!("format version {} is outside the supported 1.0.x range", doc.format_version),
                file_loc(path),
            )]);
        }
        if doc.view != doc.payload.view {
            return Err(vec![Diagnostic::error(
                codes::VIEW_MISMATCH,
                format!("document view `{}` disagrees with payload view `{}`", doc.view, doc.payload.view),
                file_loc(path),
            )]);
        }
        return Ok(doc.payload);
    }
    parse_unit(&text, &path.display().to_string(), view_of_path(path))
}

pub fn render_unit(unit: &SourceUnit, path: &Path) -> String {
    if is_interchange(path) {
        let doc = InterchangeDocument::new(unit.stripped());
        let mut text = serde_json::to_string_pretty(&doc).expect("interchange document serialises");
        text.push('\n');
        text
    } else {
        serialize_unit(unit)
    }
}

pub fn write_unit(unit: &SourceUnit, path: &Path) -> Result<(), String> {
    fs::write(path, render_unit(unit, path)).map_err(|e| format!("cannot write {}: {e}", path.display()))
}
