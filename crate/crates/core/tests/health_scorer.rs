//! Baseline scorers on fixtures whose lexicon hits were listed by hand.

use frameguard::scoring::{BaselineFrameScorer, BaselineHealthScorer, HealthScorer};
use frameguard::FrameLabel;

/// `(text, weights of every lexicon hit)`.
const FIXTURES: [(&str, &[f64]); 20] = [
    ("The council meets on Tuesday.", &[]),
    ("You are an idiot.", &[-1.2]),
    ("Shut up, you people never listen.", &[-1.2, -0.9, -0.2]),
    ("I think the evidence is thin.", &[0.3, 0.3]),
    ("Thank you for the research and the data.", &[0.4, 0.2, 0.2]),
    ("Idiots and morons, all of them.", &[-1.2, -1.3, -0.4]),
    ("Whatever. Who cares?", &[-0.5, -0.7]),
    ("Good point, I agree.", &[0.5, 0.4]),
    ("Yeah right, how convenient.", &[-0.8, -0.6]),
    ("Respectfully, I disagree; consider the evidence.", &[0.4, 0.2, 0.2, 0.3]),
    ("Get over it and wake up, sheeple.", &[-0.9, -0.6, -1.0]),
    ("This is garbage and trash.", &[-0.7, -0.7]),
    ("In my experience, perhaps not.", &[0.3, 0.2]),
    ("Typical liar.", &[-0.4, -0.9]),
    ("Stupid stupid stupid.", &[-1.0, -1.0, -1.0]),
    ("I think I think.", &[0.3, 0.3]),
    ("Give me a break, genius.", &[-0.7, -0.4]),
    ("That is absurd and ridiculous nonsense.", &[-0.4, -0.5, -0.6]),
    ("Thanks, valid point, for example the budget.", &[0.3, 0.5, 0.3]),
    ("These people always hate everything.", &[-0.6, -0.2, -0.6]),
];

#[test]
fn scores_equal_logistic_of_prior_plus_listed_weights() {
    let scorer = BaselineHealthScorer::default();
    let texts: Vec<String> = FIXTURES.iter().map(|f| f.0.to_string()).collect();
    let batch = scorer.score_batch(&texts).unwrap();
    for ((text, weights), got) in FIXTURES.iter().zip(batch) {
        let z = 3f64.ln() + weights.iter().sum::<f64>();
        let expected = 1.0 / (1.0 + (-z).exp());
        assert!((got - expected).abs() < 1e-12, "{text}: {got} vs {expected}");
    }
}

#[test]
fn hostile_fixtures_fall_below_the_threshold() {
    let scorer = BaselineHealthScorer::default();
    assert!(scorer.score("You are an idiot and a liar.") < 0.5);
    assert!(scorer.score("Good point, thanks.") > 0.75);
}

#[test]
fn frame_keywords_pick_the_frame() {
    let s = BaselineFrameScorer::default();
    assert_eq!(s.label("The court ruled the law illegal.").0, FrameLabel::LegalityCrime);
    assert_eq!(s.label("Hospitals need more nurses.").0, FrameLabel::HealthSafety);
    assert_eq!(s.label("The poll shows majority support.").0, FrameLabel::PublicOpinion);
    let (_, c) = s.label("Tax, budget and jobs.");
    assert!((c - 0.875).abs() < 1e-15);
}
