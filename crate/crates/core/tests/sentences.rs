//! Sentence splitting against generated documents with known boundaries.

use frameguard::scoring::split_sentences;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const OPENERS: [&str; 6] = ["The", "Dr. Smith", "Mr. J. Doe", "In 2016 the U.S. Senate", "\"Nobody", "Officials"];
const MIDDLES: [&str; 6] = [
    "said the plan costs 3.5 million",
    "met reporters at 5 p.m. on Friday",
    "voted on the bill, e.g. the tax part",
    "argued that prices rose",
    "asked why vs. when mattered",
    "wrote about it",
];
const ENDS: [&str; 5] = [".", "!", "?", ".\"", "?!"];

fn sentence(rng: &mut ChaCha8Rng) -> String {
    let opener = OPENERS[rng.random_range(0..OPENERS.len())];
    let middle = MIDDLES[rng.random_range(0..MIDDLES.len())];
    let end = ENDS[rng.random_range(0..ENDS.len())];
    let end = if opener.starts_with('"') && !end.ends_with('"') { format!("{end}\"") } else { end.to_string() };
    format!("{opener} {middle}{end}")
}

fn document(seed: u64, n: usize) -> (String, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sentences: Vec<String> = (0..n).map(|_| sentence(&mut rng)).collect();
    let mut text = String::new();
    for (i, s) in sentences.iter().enumerate() {
        if i > 0 {
            text.push_str([" ", "  ", "\n", " \n\n "][rng.random_range(0..4)]);
        }
        text.push_str(s);
    }
    (text, sentences)
}

#[test]
fn fifty_sentence_document_splits_exactly() {
    let (text, expected) = document(42, 50);
    assert_eq!(split_sentences(&text), expected);
}

proptest! {
    #[test]
    fn generated_documents_split_at_known_boundaries(seed in any::<u64>(), n in 1usize..40) {
        let (text, expected) = document(seed, n);
        prop_assert_eq!(split_sentences(&text), expected);
    }

    #[test]
    fn splitting_preserves_every_visible_character(text in "[A-Za-z .!?\"'\n]{0,200}") {
        let joined: String = split_sentences(&text).concat().chars().filter(|c| !c.is_whitespace()).collect();
        let original: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        prop_assert_eq!(joined, original);
    }
}
