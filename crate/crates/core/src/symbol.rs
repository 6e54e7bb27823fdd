//! Index symbols, index strings and format strings.

use std::collections::BTreeSet;
use std::fmt;

/// A single index symbol.
///
/// Symbols live in two disjoint namespaces: single ASCII letters and
/// non-negative integer tags (written `{n}`). Letters order before tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IndexSymbol {
    Letter(char),
    Tag(u32),
}

impl IndexSymbol {
    /// Builds a letter symbol, returning `None` for anything but `a-z`/`A-Z`.
    pub fn letter(c: char) -> Option<Self> {
        c.is_ascii_alphabetic().then_some(IndexSymbol::Letter(c))
    }

    pub fn tag(n: u32) -> Self {
        IndexSymbol::Tag(n)
    }
}

impl fmt::Display for IndexSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexSymbol::Letter(c) => write!(f, "{c}"),
            IndexSymbol::Tag(n) => write!(f, "{{{n}}}"),
        }
    }
}

/// An ordered, possibly empty sequence of index symbols. Duplicates are allowed.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexString(pub Vec<IndexSymbol>);

impl IndexString {
    pub fn new(symbols: Vec<IndexSymbol>) -> Self {
        IndexString(symbols)
    }

    pub fn empty() -> Self {
        IndexString(Vec::new())
    }

    /// Builds an index string from letters only; panics on non-letters.
    /// Intended for tests and examples; use the parser for user input.
    pub fn from_letters(s: &str) -> Self {
        IndexString(
            s.chars()
                .map(|c| IndexSymbol::letter(c).expect("index strings are letters only"))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[IndexSymbol] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = &IndexSymbol> {
        self.0.iter()
    }

    pub fn contains(&self, s: &IndexSymbol) -> bool {
        self.0.contains(s)
    }

    /// The de-duplicated symbol set of this string.
    pub fn sigma(&self) -> BTreeSet<IndexSymbol> {
        sigma(self)
    }

    /// True when no symbol occurs twice.
    pub fn is_distinct(&self) -> bool {
        self.sigma().len() == self.len()
    }

    /// Applies `f` to every symbol.
    pub fn map(&self, mut f: impl FnMut(IndexSymbol) -> IndexSymbol) -> Self {
        IndexString(self.0.iter().map(|&s| f(s)).collect())
    }
}

impl fmt::Display for IndexString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromIterator<IndexSymbol> for IndexString {
    fn from_iter<T: IntoIterator<Item = IndexSymbol>>(iter: T) -> Self {
        IndexString(iter.into_iter().collect())
    }
}

/// The symbol set of an index string.
pub fn sigma(index: &IndexString) -> BTreeSet<IndexSymbol> {
    index.0.iter().copied().collect()
}

/// Input index strings and an output index string.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FormatString {
    pub inputs: Vec<IndexString>,
    pub output: IndexString,
}

impl FormatString {
    pub fn new(inputs: Vec<IndexString>, output: IndexString) -> Self {
        FormatString { inputs, output }
    }

    /// Convenience constructor for letter-only formats, e.g. `("ij,jk", "ik")`.
    pub fn from_letters(inputs: &str, output: &str) -> Self {
        FormatString {
            inputs: inputs.split(',').map(IndexString::from_letters).collect(),
            output: IndexString::from_letters(output),
        }
    }

    pub fn arity(&self) -> usize {
        self.inputs.len()
    }

    /// Union of the symbol sets of all input strings.
    pub fn input_symbols(&self) -> BTreeSet<IndexSymbol> {
        self.inputs.iter().flat_map(|s| s.iter().copied()).collect()
    }

    /// Every symbol in the format, inputs and output.
    pub fn all_symbols(&self) -> BTreeSet<IndexSymbol> {
        let mut all = self.input_symbols();
        all.extend(self.output.iter().copied());
        all
    }

    /// Output symbols that no input string binds.
    pub fn unbound_output_symbols(&self) -> Vec<IndexSymbol> {
        let bound = self.input_symbols();
        self.output
            .sigma()
            .into_iter()
            .filter(|s| !bound.contains(s))
            .collect()
    }

    /// Renames every symbol, inputs and output alike.
    pub fn map_symbols(&self, mut f: impl FnMut(IndexSymbol) -> IndexSymbol) -> Self {
        FormatString {
            inputs: self.inputs.iter().map(|s| s.map(&mut f)).collect(),
            output: self.output.map(&mut f),
        }
    }
}

impl fmt::Display for FormatString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, input) in self.inputs.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{input}")?;
        }
        write!(f, "->{}", self.output)
    }
}

/// Source of symbols guaranteed unused in some scope.
///
/// Draws from the integer-tag namespace, starting above the largest tag seen.
#[derive(Clone, Debug)]
pub struct FreshSymbols {
    next: u32,
}

impl FreshSymbols {
    /// A source whose symbols avoid everything in `used`.
    pub fn avoiding<'a>(used: impl IntoIterator<Item = &'a IndexSymbol>) -> Self {
        let next = used
            .into_iter()
            .filter_map(|s| match s {
                IndexSymbol::Tag(n) => Some(n + 1),
                IndexSymbol::Letter(_) => None,
            })
            .max()
            .unwrap_or(0);
        FreshSymbols { next }
    }

    /// Marks more symbols as used.
    pub fn reserve<'a>(&mut self, used: impl IntoIterator<Item = &'a IndexSymbol>) {
        for s in used {
            if let IndexSymbol::Tag(n) = s {
                self.next = self.next.max(n + 1);
            }
        }
    }

    pub fn next_symbol(&mut self) -> IndexSymbol {
        let s = IndexSymbol::Tag(self.next);
        self.next += 1;
        s
    }
}

const PREFERRED_LETTERS: &str = "ijklmnopqrstuvwxyzabcdefghIJKLMNOPQRSTUVWXYZABCDEFGH";

/// `n` pairwise distinct symbols: `i, j, k, …` first, then integer tags.
pub fn distinct_symbols(n: usize) -> IndexString {
    let letters = PREFERRED_LETTERS.chars().map(IndexSymbol::Letter);
    let tags = (0u32..).map(IndexSymbol::Tag);
    letters.chain(tags).take(n).collect()
}

/// Letters in preferred order, used when tidying generated tags into letters.
pub(crate) fn preferred_letters() -> impl Iterator<Item = IndexSymbol> {
    PREFERRED_LETTERS.chars().map(IndexSymbol::Letter)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(c: char) -> IndexSymbol {
        IndexSymbol::Letter(c)
    }

    #[test]
    fn sigma_collapses_duplicates() {
        let s = IndexString::from_letters("iji");
        assert_eq!(sigma(&s), [l('i'), l('j')].into_iter().collect());
        assert!(sigma(&IndexString::empty()).is_empty());
        assert_eq!(
            sigma(&IndexString::from_letters("ii")),
            [l('i')].into_iter().collect()
        );
    }

    #[test]
    fn letters_order_before_tags() {
        assert!(l('z') < IndexSymbol::Tag(0));
        assert!(l('A') < l('a'));
        assert!(IndexSymbol::Tag(2) < IndexSymbol::Tag(10));
    }

    #[test]
    fn fresh_symbols_skip_used_tags() {
        let used = [l('i'), IndexSymbol::Tag(4), IndexSymbol::Tag(1)];
        let mut fresh = FreshSymbols::avoiding(used.iter());
        assert_eq!(fresh.next_symbol(), IndexSymbol::Tag(5));
        assert_eq!(fresh.next_symbol(), IndexSymbol::Tag(6));
    }

    #[test]
    fn format_display() {
        let f = FormatString::from_letters("ij,jk", "ik");
        assert_eq!(f.to_string(), "ij,jk->ik");
        let f = FormatString::new(vec![IndexString::empty()], IndexString::empty());
        assert_eq!(f.to_string(), "->");
        let tagged = IndexString::new(vec![l('i'), IndexSymbol::Tag(10)]);
        assert_eq!(tagged.to_string(), "i{10}");
    }

    #[test]
    fn unbound_output() {
        let f = FormatString::from_letters("ij", "ik");
        assert_eq!(f.unbound_output_symbols(), vec![l('k')]);
    }
}
