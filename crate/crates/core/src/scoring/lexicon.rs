//! Tokenizer and phrase matcher shared by the baseline scorers.

/// Lowercased word tokens; apostrophes inside words are kept ("don't").
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        let inner_apostrophe = (c == '\'' || c == '\u{2019}')
            && !cur.is_empty()
            && chars.peek().is_some_and(|n| n.is_alphanumeric());
        if c.is_alphanumeric() {
            cur.extend(c.to_lowercase());
        } else if inner_apostrophe {
            cur.push('\'');
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Occurrences of the token sequence `phrase` in `tokens`, overlapping
/// matches included.
pub fn count_phrase(tokens: &[String], phrase: &[&str]) -> usize {
    if phrase.is_empty() || phrase.len() > tokens.len() {
        return 0;
    }
    tokens
        .windows(phrase.len())
        .filter(|w| w.iter().zip(phrase).all(|(t, p)| t == p))
        .count()
}

/// A lexicon phrase with its signed weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub phrase: &'static str,
    pub weight: f64,
}

const fn e(phrase: &'static str, weight: f64) -> Entry {
    Entry { phrase, weight }
}

/// Health lexicon. Negative weights mark hostility, dismissiveness,
/// sweeping generalizations and sarcasm; positive weights mark hedged,
/// reasoned or appreciative contributions.
pub const HEALTH_LEXICON: &[Entry] = &[
    // hostility
    e("idiot", -1.2),
    e("idiots", -1.2),
    e("moron", -1.3),
    e("morons", -1.3),
    e("stupid", -1.0),
    e("dumb", -0.9),
    e("fool", -0.8),
    e("fools", -0.8),
    e("pathetic", -0.9),
    e("disgusting", -0.8),
    e("liar", -0.9),
    e("liars", -0.9),
    e("clueless", -0.8),
    e("ignorant", -0.8),
    e("garbage", -0.7),
    e("trash", -0.7),
    e("shut up", -1.2),
    e("hate", -0.6),
    e("scum", -1.3),
    // dismissiveness
    e("whatever", -0.5),
    e("who cares", -0.7),
    e("get over it", -0.9),
    e("nonsense", -0.6),
    e("ridiculous", -0.5),
    e("absurd", -0.4),
    e("wake up", -0.6),
    e("sheeple", -1.0),
    e("give me a break", -0.7),
    // sweeping generalizations
    e("you people", -0.9),
    e("these people", -0.6),
    e("all of them", -0.4),
    e("every single one", -0.5),
    e("typical", -0.4),
    e("always", -0.2),
    e("never", -0.2),
    // sarcasm
    e("yeah right", -0.8),
    e("oh sure", -0.6),
    e("how convenient", -0.6),
    e("what a surprise", -0.6),
    e("genius", -0.4),
    // constructive cues
    e("i think", 0.3),
    e("i believe", 0.3),
    e("i agree", 0.4),
    e("i disagree", 0.2),
    e("in my experience", 0.3),
    e("for example", 0.3),
    e("evidence", 0.3),
    e("research", 0.2),
    e("data", 0.2),
    e("perhaps", 0.2),
    e("consider", 0.2),
    e("suggest", 0.2),
    e("respectfully", 0.4),
    e("thank you", 0.4),
    e("thanks", 0.3),
    e("good point", 0.5),
    e("valid point", 0.5),
];

/// Keyword lists for the baseline frame scorer, indexed in taxonomy order
/// (the `Other` entry is empty).
pub const FRAME_KEYWORDS: [&[&str]; 10] = [
    // Economic
    &[
        "economy", "economic", "economics", "tax", "taxes", "taxpayer", "taxpayers", "job", "jobs", "wage", "wages",
        "budget", "cost", "costs", "spending", "money", "dollars", "market", "markets", "trade", "tariff", "tariffs",
        "inflation", "income", "debt", "deficit", "price", "prices", "business", "businesses", "employment",
        "unemployment", "profit", "profits", "premium", "premiums", "funding", "afford", "affordable", "billion",
        "revenue",
    ],
    // Morality
    &[
        "moral", "morality", "immoral", "ethical", "ethics", "god", "religious", "religion", "sin", "sinful",
        "conscience", "evil", "righteous", "church", "pray", "prayer", "biblical", "sacred", "shame", "virtue",
    ],
    // Fairness and Equality
    &[
        "fair", "fairness", "unfair", "equal", "equality", "inequality", "discrimination", "discriminate", "equity",
        "injustice", "privilege", "disparity", "disparities", "marginalized", "racism", "racist", "sexism",
        "equally",
    ],
    // Legality and Crime
    &[
        "law", "laws", "legal", "illegal", "court", "courts", "judge", "judges", "lawsuit", "crime", "crimes",
        "criminal", "criminals", "police", "prison", "jail", "constitution", "constitutional", "ruling",
        "prosecutor", "prosecutors", "arrest", "arrested", "attorney", "trial", "guilty", "justice",
    ],
    // Political and Policies
    &[
        "political", "politics", "politician", "politicians", "policy", "policies", "congress", "senate", "senator",
        "republican", "republicans", "democrat", "democrats", "party", "election", "elections", "vote", "voting",
        "campaign", "president", "administration", "government", "bill", "legislation", "lawmakers", "obama",
        "gop", "liberal", "liberals", "conservative", "conservatives", "partisan", "obamacare", "parliament",
    ],
    // Security and Defense
    &[
        "security", "military", "war", "troops", "army", "defense", "defence", "terrorism", "terrorist",
        "terrorists", "attack", "attacks", "weapon", "weapons", "nuclear", "missile", "missiles", "soldiers",
        "threat", "threats", "invasion", "isis", "bomb", "bombing", "intelligence",
    ],
    // Health and Safety
    &[
        "health", "healthcare", "hospital", "hospitals", "doctor", "doctors", "disease", "patients", "patient",
        "medical", "medicine", "safety", "safe", "unsafe", "vaccine", "vaccines", "illness", "deaths", "injury",
        "injuries", "mental", "drug", "drugs", "epidemic", "clinic", "clinics", "nurse", "nurses",
    ],
    // Cultural Identity
    &[
        "culture", "cultural", "tradition", "traditions", "traditional", "heritage", "identity", "ethnic",
        "customs", "language", "patriotism", "patriotic", "community", "communities", "lifestyle", "ancestors",
    ],
    // Public Opinion
    &[
        "poll", "polls", "polling", "survey", "surveys", "opinion", "opinions", "majority", "percent", "popular",
        "popularity", "sentiment", "protest", "protests", "protesters", "approval", "backlash", "outcry",
        "consensus",
    ],
    // Other
    &[],
];
