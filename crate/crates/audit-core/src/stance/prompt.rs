use crate::error::{Error, Result};

/// Versioned classification prompt. The two slots `{video_description}` and
/// `{comment}` are filled by [`render_prompt`]; everything else is byte-exact.
pub const STANCE_PROMPT_TEMPLATE: &str = include_str!("../../assets/stance_prompt_v1.txt");

/// Render the stance prompt for one comment.
///
/// Substitution is a single left-to-right pass: slot values are inserted
/// verbatim and never re-scanned, so braces inside a comment cannot inject
/// further expansion. An empty video description is allowed; an empty comment
/// is an error.
pub fn render_prompt(comment: &str, video_description: &str) -> Result<String> {
    if comment.is_empty() {
        return Err(Error::InvalidInput("empty comment".into()));
    }
    Ok(substitute(
        STANCE_PROMPT_TEMPLATE,
        &[("{video_description}", video_description), ("{comment}", comment)],
    ))
}

fn substitute(template: &str, slots: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len() + 256);
    let mut rest = template;
    loop {
        let next = slots
            .iter()
            .filter_map(|&(pat, val)| rest.find(pat).map(|pos| (pos, pat, val)))
            .min_by_key(|&(pos, _, _)| pos);
        match next {
            Some((pos, pat, val)) => {
                out.push_str(&rest[..pos]);
                out.push_str(val);
                rest = &rest[pos + pat.len()..];
            }
            None => {
                out.push_str(rest);
                return out;
            }
        }
    }
}
