//! Lenient location of a JSON object inside model output.

use serde_json::Value;

/// Finds the first JSON object in `text`.
///
/// Tries, in order: the whole trimmed text, the body of each markdown code
/// fence, then every balanced `{...}` span from left to right.
pub fn find_json_object(text: &str) -> Result<serde_json::Map<String, Value>, String> {
    let mut candidates: Vec<&str> = vec![text.trim()];
    candidates.extend(fenced_blocks(text));
    for cand in candidates {
        if let Ok(Value::Object(m)) = serde_json::from_str::<Value>(cand) {
            return Ok(m);
        }
    }
    for (i, _) in text.match_indices('{') {
        if let Some(end) = balanced_end(&text[i..]) {
            if let Ok(Value::Object(m)) = serde_json::from_str::<Value>(&text[i..i + end]) {
                return Ok(m);
            }
        }
    }
    if text.contains('{') {
        Err("response contains no valid JSON object".into())
    } else {
        Err("response contains no JSON object".into())
    }
}

fn fenced_blocks(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find("```") {
        let after = &rest[open + 3..];
        // skip an info string such as `json`
        let body_start = after.find('\n').map_or(after.len(), |n| n + 1);
        let body = &after[body_start..];
        match body.find("```") {
            Some(close) => {
                out.push(body[..close].trim());
                rest = &body[close + 3..];
            }
            None => break,
        }
    }
    out
}

/// Byte length of the balanced object starting at `s[0] == '{'`, skipping
/// braces inside strings.
fn balanced_end(s: &str) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_str = false;
    let mut escaped = false;
    for (i, c) in s.char_indices() {
        if in_str {
            match c {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_str = false,
                _ => {}
            }
            continue;
        }
        match c {
            '"' => in_str = true,
            '{' => depth += 1,
            '}' => {
                depth = depth.checked_sub(1)?;
                if depth == 0 {
                    return Some(i + 1);
                }
            }
            _ => {}
        }
    }
    None
}
