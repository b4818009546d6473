//! Literate source support.
//!
//! A Markdown file can carry code inside fenced blocks whose info string
//! starts with `rzk`. Extraction keeps every line of the original file:
//! prose and fence lines are replaced by empty lines, so spans reported
//! against the extracted text point at the right place in the `.md` file.

/// True when `path` should be treated as a literate Markdown module.
pub fn is_literate(path: &str) -> bool {
    path.ends_with(".md")
}

/// Replace everything outside ` ```rzk ` fences with blank lines.
pub fn extract(input: &str) -> String {
    let mut out = String::with_capacity(input.len());
    // (fence length, emitting) — `None` while outside any fence.
    let mut open: Option<(usize, bool)> = None;
    let mut first = true;
    for line in input.lines() {
        if !first {
            out.push('\n');
        }
        first = false;
        let trimmed = line.trim_end();
        let ticks = trimmed.chars().take_while(|&c| c == '`').count();
        match open {
            None => {
                if ticks >= 3 {
                    let info = trimmed[ticks..].trim();
                    let is_rzk = info.split_whitespace().next() == Some("rzk");
                    open = Some((ticks, is_rzk));
                }
                // Prose or an opening fence: blank line either way.
            }
            Some((len, emitting)) => {
                if ticks >= len && trimmed[ticks..].trim().is_empty() {
                    open = None; // closing fence, drop it
                } else if emitting {
                    out.push_str(line);
                }
            }
        }
    }
    if input.ends_with('\n') {
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extracts_rzk_fences_and_preserves_line_numbers() {
        let src = "# Title\n\
                   \n\
                   Some prose.\n\
                   \n\
                   ```rzk\n\
                   #lang rzk-1\n\
                   #def x : U := U\n\
                   ```\n\
                   More prose with `inline code`.\n\
                   ```rzk\n\
                   #def y : U := U\n\
                   ```\n";
        let code = extract(src);
        assert_eq!(code.lines().count(), src.lines().count());
        let lines: Vec<&str> = code.lines().collect();
        assert_eq!(lines[0], "");
        assert_eq!(lines[5], "#lang rzk-1");
        assert_eq!(lines[6], "#def x : U := U");
        assert_eq!(lines[7], "");
        assert_eq!(lines[10], "#def y : U := U");
    }

    #[test]
    fn non_rzk_fences_are_dropped() {
        let src = "```haskell\nmain = pure ()\n```\n```rzk\n#lang rzk-1\n```\n";
        let code = extract(src);
        let lines: Vec<&str> = code.lines().collect();
        assert_eq!(lines[1], "");
        assert_eq!(lines[4], "#lang rzk-1");
    }

    #[test]
    fn longer_closing_fence_required_for_longer_opening() {
        let src = "````rzk\ncode ``` here\n````\n";
        let code = extract(src);
        assert_eq!(code.lines().nth(1), Some("code ``` here"));
    }

    #[test]
    fn info_word_must_be_exactly_rzk() {
        let src = "```rzkx\nnope\n```\n```rzk info\nyes\n```\n";
        let code = extract(src);
        assert_eq!(code.lines().nth(1), Some(""));
        assert_eq!(code.lines().nth(4), Some("yes"));
    }

    #[test]
    fn literate_detection_by_extension() {
        assert!(is_literate("corpus/01-paths.rzk.md"));
        assert!(!is_literate("fixtures/boundary-mismatch.fail.rzk"));
    }
}
