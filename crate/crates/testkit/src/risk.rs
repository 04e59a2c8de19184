//! The moderation risk table written out as nested conditionals.

/// Expected `(level, action)` for a health score and alignment name
/// (`"Match"`, `"Selective"`, `"Complete"`). Rows are checked top-down.
pub fn expected(health: f64, alignment: &str) -> (&'static str, &'static str) {
    if health < 0.3 {
        return ("High", "SuggestAndFlag");
    }
    if health < 0.5 && alignment == "Complete" {
        return ("High", "SuggestAndFlag");
    }
    if (0.3..0.6).contains(&health) {
        return ("Medium", "Suggest");
    }
    if health >= 0.6 && (alignment == "Selective" || alignment == "Complete") {
        return ("Medium", "Suggest");
    }
    if health >= 0.6 && alignment == "Match" {
        return ("Low", "Allow");
    }
    unreachable!("table is total over [0, 1]")
}
