use super::PipelineError;

/// The balanced `{...}` prefix of `text` (which must start with `{`), honouring JSON
/// string literals and escapes.
pub fn balanced_braces(text: &str) -> Option<&str> {
    if !text.starts_with('{') {
        return None;
    }
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, c) in text.char_indices() {
        if in_string {
            match c {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match c {
            '"' => in_string = true,
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&text[..=i]);
                }
            }
            _ => {}
        }
    }
    None
}

/// The JSON payload of a completion.
///
/// Returns the body of the first fenced code block if one is closed; otherwise the
/// balanced-brace object starting at the first `{`. An object that never closes is
/// returned up to the end of the text so that parsing reports it as malformed JSON.
pub fn extract_json_block(text: &str) -> Result<String, PipelineError> {
    if let Some(open) = text.find("```") {
        let after = &text[open + 3..];
        // skip an info string such as `json`
        let lang_len = after
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '-'))
            .unwrap_or(after.len());
        let body = &after[lang_len..];
        if let Some(close) = body.find("```") {
            return Ok(body[..close].trim().to_string());
        }
    }
    let start = text.find('{').ok_or(PipelineError::NoJsonFound)?;
    Ok(balanced_braces(&text[start..]).unwrap_or(&text[start..]).trim().to_string())
}
