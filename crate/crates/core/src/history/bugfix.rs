use std::collections::BTreeSet;
use std::path::Path;

pub const DEFAULT_BUG_KEYWORDS: &[&str] =
    &["error", "bug", "fixes", "fixing", "fix", "fixed", "mistake", "incorrect", "fault", "defect", "flaw"];

/// Keyword set for bug-fix commit detection. Matching is case-insensitive on
/// whole words, where a word is a maximal run of alphanumeric characters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BugKeywords {
    words: BTreeSet<String>,
}

impl Default for BugKeywords {
    fn default() -> Self {
        BugKeywords::new(DEFAULT_BUG_KEYWORDS.iter().copied())
    }
}

impl BugKeywords {
    pub fn new<'a>(words: impl IntoIterator<Item = &'a str>) -> Self {
        BugKeywords { words: words.into_iter().map(|w| w.trim().to_lowercase()).filter(|w| !w.is_empty()).collect() }
    }

    /// One keyword per line; `#` starts a comment.
    pub fn from_file(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(BugKeywords::new(text.lines().map(|l| l.split('#').next().unwrap_or(""))))
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    pub fn matches(&self, message: &str) -> bool {
        message
            .split(|c: char| !c.is_alphanumeric())
            .filter(|w| !w.is_empty())
            .any(|w| self.words.contains(&w.to_lowercase()))
    }
}

pub fn classify_bugfix(message: &str) -> bool {
    BugKeywords::default().matches(message)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert!(classify_bugfix("Fixed null pointer in parser"));
        assert!(!classify_bugfix("Add streaming feature"));
        assert!(!classify_bugfix("Update prefix handling"));
        assert!(classify_bugfix("closes #12: off-by-one ERROR"));
        assert!(classify_bugfix("bug-fix for reader"));
        assert!(!classify_bugfix("debugging output"));
        assert!(!classify_bugfix(""));
    }

    #[test]
    fn custom_keywords_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("kw.txt");
        std::fs::write(&path, "# extra words\nRegression\n\ncrash  # trailing comment\n").unwrap();
        let kw = BugKeywords::from_file(&path).unwrap();
        assert_eq!(kw.words().collect::<Vec<_>>(), vec!["crash", "regression"]);
        assert!(kw.matches("Crash on startup"));
        assert!(!kw.matches("fix typo"));
    }

    proptest! {
        #[test]
        fn case_insensitive(msg in "[a-zA-Z ,.:-]{0,40}") {
            prop_assert_eq!(classify_bugfix(&msg), classify_bugfix(&msg.to_uppercase()));
            prop_assert_eq!(classify_bugfix(&msg), classify_bugfix(&msg.to_lowercase()));
        }
    }
}
