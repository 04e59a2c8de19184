//! Prints the default risk rules over a health grid for each alignment
//! condition, and evaluates a custom rule file.
//!
//! `cargo run -p frameguard --example risk_table`

use frameguard::riskengine::RuleSet;
use frameguard::{assess, AlignmentCondition};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    print!("{:>6}", "health");
    for a in AlignmentCondition::ALL {
        print!(" {:>22}", a.to_string());
    }
    println!();
    for i in 0..=10 {
        let h = f64::from(i) / 10.0;
        print!("{h:>6.1}");
        for a in AlignmentCondition::ALL {
            let r = assess(h, a);
            print!(" {:>22}", format!("{} {:?} ({})", r.level, r.action, r.matched_rule));
        }
        println!();
    }

    // A stricter table: selective reframing below 0.7 is high risk.
    let mut rules = RuleSet::default();
    let mut strict = rules.rules[1].clone();
    strict.id = "S1".into();
    strict.max_health = Some(0.7);
    strict.alignment = frameguard::riskengine::AlignmentSet::Only(vec![AlignmentCondition::Selective]);
    rules.rules.insert(0, strict);
    let rules = RuleSet::from_toml(&rules.to_toml())?;
    let r = rules.assess(0.65, AlignmentCondition::Selective)?;
    println!("custom rules at 0.65/Selective: {} via {}", r.level, r.matched_rule);
    Ok(())
}
