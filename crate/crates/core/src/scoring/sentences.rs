//! Rule-based sentence segmentation.
//!
//! A boundary follows `.`, `!` or `?` (plus any closing quotes or brackets)
//! when whitespace and then an uppercase letter, digit or opening quote
//! come next. A period after a known abbreviation or a single-letter
//! initial is not a boundary. Blank lines always separate sentences.

const ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "mt", "ft", "vs", "etc", "e.g", "i.e", "u.s", "u.k",
    "u.n", "inc", "ltd", "co", "corp", "gen", "gov", "sen", "rep", "rev", "hon", "pres", "lt", "col", "sgt",
    "capt", "cmdr", "adm", "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec",
    "no", "fig", "approx", "dept", "est", "al", "vol", "pp",
];

const CLOSERS: &[char] = &['"', '\'', ')', ']', '\u{201d}', '\u{2019}'];
const OPENERS: &[char] = &['"', '\'', '(', '[', '\u{201c}', '\u{2018}'];

fn is_abbreviation(word: &str) -> bool {
    let w = word.trim_start_matches(|c: char| !c.is_alphanumeric()).to_lowercase();
    if w.is_empty() {
        return false;
    }
    // Single-letter initials such as the "J" in "J. Smith".
    if w.chars().count() == 1 && w.chars().all(char::is_alphabetic) {
        return true;
    }
    ABBREVIATIONS.contains(&w.as_str())
}

fn starts_sentence(rest: &str) -> bool {
    let mut chars = rest.chars().skip_while(|c| OPENERS.contains(c));
    matches!(chars.next(), Some(c) if c.is_uppercase() || c.is_ascii_digit())
}

/// Splits text into trimmed, non-empty sentences. Joining the sentences
/// reproduces every non-whitespace character of the input in order.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c == '\n' {
            // Blank line: newline, optional spaces, newline.
            let mut j = i + 1;
            while j < chars.len() && chars[j].1 != '\n' && chars[j].1.is_whitespace() {
                j += 1;
            }
            if j < chars.len() && chars[j].1 == '\n' {
                push(&mut out, &text[start..pos]);
                start = chars[j].0;
                i = j + 1;
                continue;
            }
        }
        if matches!(c, '.' | '!' | '?') {
            let mut j = i + 1;
            while j < chars.len() && (matches!(chars[j].1, '.' | '!' | '?') || CLOSERS.contains(&chars[j].1)) {
                j += 1;
            }
            let end = chars.get(j).map_or(text.len(), |&(p, _)| p);
            let followed_by_space = j < chars.len() && chars[j].1.is_whitespace();
            if followed_by_space {
                let mut k = j;
                while k < chars.len() && chars[k].1.is_whitespace() {
                    k += 1;
                }
                let next = chars.get(k).map_or(text.len(), |&(p, _)| p);
                let word_start = text[start..pos]
                    .rfind(char::is_whitespace)
                    .map_or(start, |w| start + w + 1);
                let word = &text[word_start..pos];
                let abbreviation = c == '.' && is_abbreviation(word);
                if !abbreviation && starts_sentence(&text[next..]) {
                    push(&mut out, &text[start..end]);
                    start = end;
                    i = k;
                    continue;
                }
            }
            i = j;
            continue;
        }
        i += 1;
    }
    push(&mut out, &text[start..]);
    out
}

fn push(out: &mut Vec<String>, s: &str) {
    let s = s.trim();
    if !s.is_empty() {
        out.push(s.to_string());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic() {
        assert_eq!(split_sentences("Hello world. Bye."), vec!["Hello world.", "Bye."]);
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("   \n ").is_empty());
    }

    #[test]
    fn abbreviations_and_initials() {
        assert_eq!(
            split_sentences("Dr. Smith met Mr. J. Doe at 5 p.m. on Friday. They talked."),
            vec!["Dr. Smith met Mr. J. Doe at 5 p.m. on Friday.", "They talked."]
        );
        assert_eq!(
            split_sentences("The U.S. Senate voted. It passed."),
            vec!["The U.S. Senate voted.", "It passed."]
        );
    }

    #[test]
    fn lowercase_continuation_is_not_a_boundary() {
        assert_eq!(split_sentences("It costs 3.5 million. e.g. this"), vec!["It costs 3.5 million. e.g. this"]);
    }

    #[test]
    fn quotes_and_runs_of_punctuation() {
        assert_eq!(
            split_sentences("He said \"No!\" Then left?! \"Why?\" she asked."),
            vec!["He said \"No!\"", "Then left?!", "\"Why?\" she asked."]
        );
    }

    #[test]
    fn blank_lines_split_paragraphs() {
        assert_eq!(split_sentences("Headline without stop\n\nFirst line. Second"), vec![
            "Headline without stop",
            "First line.",
            "Second"
        ]);
    }
}
