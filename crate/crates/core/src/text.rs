//! Low-level word splitting shared by every tokenizer in the crate.

/// Lowercased alphanumeric runs of `text`, in order. Anything that is not
/// alphanumeric separates words.
pub fn words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
}

/// Number of whitespace-delimited tokens.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_punctuation_and_lowercases() {
        let got: Vec<_> = words("Pipes-and-Filters, MVC!  ok").collect();
        assert_eq!(got, ["pipes", "and", "filters", "mvc", "ok"]);
    }

    #[test]
    fn word_count_ignores_runs_of_whitespace() {
        assert_eq!(word_count("  one two\n\tthree  "), 3);
        assert_eq!(word_count(""), 0);
    }
}
