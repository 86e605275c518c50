use std::fmt;

use crate::error::{Error, Result};

use super::{admissible, BandType, BlockLetter, BlockShift, Letter};

/// An admissible word `v_1..v_n` over the block alphabet, stored as block indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct BlockWord(pub Vec<usize>);

impl BlockWord {
    pub fn new(shift: &BlockShift, blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Inadmissible("empty word".into()));
        }
        if !shift.is_admissible(&blocks) {
            return Err(Error::Inadmissible(format!("{blocks:?}")));
        }
        Ok(BlockWord(blocks))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn blocks(&self) -> &[usize] {
        &self.0
    }

    pub fn prefix(&self, n: usize) -> BlockWord {
        BlockWord(self.0[..n].to_vec())
    }

    /// Parses `block|block|...` with blocks written as `t:i@m.t:i@m...`.
    pub fn parse(shift: &BlockShift, s: &str) -> Result<Self> {
        let blocks = s
            .split('|')
            .map(|b| {
                let bl = BlockLetter::parse(b.trim())?;
                shift
                    .index_of(&bl)
                    .ok_or_else(|| Error::Inadmissible(format!("block `{b}` not in the alphabet")))
            })
            .collect::<Result<Vec<_>>>()?;
        BlockWord::new(shift, blocks)
    }

    pub fn format(&self, shift: &BlockShift) -> String {
        self.0
            .iter()
            .map(|&b| shift.block(b).to_string())
            .collect::<Vec<_>>()
            .join("|")
    }
}

/// A finite word `x_0 x_1 .. x_n` of the band coding: a root type (`1` or
/// `3`) followed by letters, one per level.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CodeWord {
    pub root: BandType,
    pub letters: Vec<Letter>,
}

impl CodeWord {
    pub fn root(root: BandType) -> Self {
        Self {
            root,
            letters: Vec::new(),
        }
    }

    pub fn level(&self) -> usize {
        self.letters.len()
    }

    pub fn tail_type(&self) -> BandType {
        self.letters.last().map(|e| e.btype).unwrap_or(self.root)
    }

    pub fn child(&self, e: Letter) -> CodeWord {
        let mut letters = self.letters.clone();
        letters.push(e);
        CodeWord {
            root: self.root,
            letters,
        }
    }

    pub fn truncate(&self, level: usize) -> CodeWord {
        CodeWord {
            root: self.root,
            letters: self.letters[..level].to_vec(),
        }
    }

    /// Checks the admissibility chain `x_j -> x_{j+1}`.
    pub fn is_admissible(&self) -> bool {
        if self.root == BandType::Two {
            return false;
        }
        let mut t = self.root;
        for e in &self.letters {
            if !admissible(t, e) {
                return false;
            }
            t = e.btype;
        }
        true
    }

    /// Parses `r.t:i@m.t:i@m...` with `r` the root type.
    pub fn parse(s: &str) -> Result<Self> {
        let mut parts = s.split('.');
        let root: u8 = parts
            .next()
            .and_then(|r| r.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("code word `{s}` lacks a root type")))?;
        let root = BandType::try_from(root)?;
        let letters = parts.map(Letter::parse).collect::<Result<Vec<_>>>()?;
        Ok(CodeWord { root, letters })
    }
}

impl fmt::Display for CodeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)?;
        for e in &self.letters {
            write!(f, ".{e}")?;
        }
        Ok(())
    }
}

/// Embeds a block word into the coding of the canonical frequency `[1, (a)*]`
/// by prepending `1 (2,1)_1` or `3 (1,1)_1` according to the header type.
pub fn iota(shift: &BlockShift, w: &BlockWord) -> CodeWord {
    let header = shift.block(w.0[0]).header();
    let (root, first) = match header.btype {
        BandType::Two => (BandType::Three, Letter {
            btype: BandType::One,
            index: 1,
            order: 1,
        }),
        _ => (BandType::One, Letter {
            btype: BandType::Two,
            index: 1,
            order: 1,
        }),
    };
    let mut letters = Vec::with_capacity(1 + w.len() * shift.k());
    letters.push(first);
    for &b in &w.0 {
        letters.extend_from_slice(shift.block(b).letters());
    }
    CodeWord { root, letters }
}

/// Iterator over all admissible words of a fixed length in lexicographic order.
pub struct WordIter<'a> {
    shift: &'a BlockShift,
    len: usize,
    // positions[j] indexes the choices available at depth j
    positions: Vec<usize>,
    current: Vec<usize>,
    done: bool,
}

impl<'a> WordIter<'a> {
    fn choices(&self, depth: usize) -> usize {
        if depth == 0 {
            self.shift.len()
        } else {
            self.shift.successors(self.current[depth - 1]).len()
        }
    }

    fn pick(&self, depth: usize, pos: usize) -> usize {
        if depth == 0 {
            pos
        } else {
            self.shift.successors(self.current[depth - 1])[pos]
        }
    }

    fn fill_from(&mut self, depth: usize) {
        for d in depth..self.len {
            self.positions[d] = 0;
            let b = self.pick(d, 0);
            self.current[d] = b;
        }
    }
}

impl Iterator for WordIter<'_> {
    type Item = BlockWord;

    fn next(&mut self) -> Option<BlockWord> {
        if self.done {
            return None;
        }
        let out = BlockWord(self.current.clone());
        // advance the odometer; every block has a successor, so refills never fail
        let mut d = self.len;
        loop {
            if d == 0 {
                self.done = true;
                break;
            }
            d -= 1;
            if self.positions[d] + 1 < self.choices(d) {
                self.positions[d] += 1;
                self.current[d] = self.pick(d, self.positions[d]);
                self.fill_from(d + 1);
                break;
            }
        }
        Some(out)
    }
}

/// All admissible words of length `n >= 1`, each exactly once, in canonical order.
pub fn enumerate_words(shift: &BlockShift, n: usize) -> Result<WordIter<'_>> {
    if n == 0 {
        return Err(Error::InvalidInput("word length must be >= 1".into()));
    }
    let mut it = WordIter {
        shift,
        len: n,
        positions: vec![0; n],
        current: vec![0; n],
        done: false,
    };
    it.fill_from(0);
    Ok(it)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    #[test]
    fn enumeration_counts() {
        let s = BlockShift::new(&[1]).unwrap();
        let counts: Vec<usize> = (1..=3).map(|n| enumerate_words(&s, n).unwrap().count()).collect();
        assert_eq!(counts, vec![4, 6, 10]);
        assert!(enumerate_words(&s, 0).is_err());
    }

    #[test]
    fn enumeration_matches_matrix_powers() {
        for a in [vec![1], vec![2], vec![1, 2], vec![2, 3], vec![1, 1, 2]] {
            let s = BlockShift::new(&a).unwrap();
            for n in 1..=12 {
                let expected = s.incidence().word_count(n).to_u64().unwrap();
                if expected > 300_000 {
                    break;
                }
                let words: Vec<_> = enumerate_words(&s, n).unwrap().collect();
                assert_eq!(words.len() as u64, expected, "{a:?} n={n}");
                assert!(words.windows(2).all(|w| w[0] < w[1]));
                assert!(words.iter().all(|w| s.is_admissible(&w.0)));
            }
        }
    }

    #[test]
    fn brute_force_pairs() {
        // n = 3 via brute force over all triples
        let s = BlockShift::new(&[1]).unwrap();
        let m = s.len();
        let mut count = 0;
        for x in 0..m {
            for y in 0..m {
                for z in 0..m {
                    if s.is_admissible(&[x, y, z]) {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(count, 10);
    }

    #[test]
    fn iota_examples() {
        let s = BlockShift::new(&[1]).unwrap();
        let w = BlockWord::parse(&s, "1:1@1").unwrap();
        assert_eq!(iota(&s, &w).to_string(), "1.2:1@1.1:1@1");
        let w = BlockWord::parse(&s, "2:1@1").unwrap();
        assert_eq!(iota(&s, &w).to_string(), "3.1:1@1.2:1@1");
        let s2 = BlockShift::new(&[2]).unwrap();
        let w = BlockWord::parse(&s2, "3:2@2").unwrap();
        assert_eq!(iota(&s2, &w).to_string(), "1.2:1@1.3:2@2");
    }

    #[test]
    fn iota_is_admissible_and_sized() {
        for a in [vec![1], vec![2, 3], vec![1, 2, 1]] {
            let s = BlockShift::new(&a).unwrap();
            for n in 1..=3 {
                for w in enumerate_words(&s, n).unwrap() {
                    let c = iota(&s, &w);
                    assert!(c.is_admissible(), "{}", c);
                    assert_eq!(c.level(), n * a.len() + 1);
                }
            }
        }
    }

    #[test]
    fn word_format_roundtrip() {
        let s = BlockShift::new(&[1, 2]).unwrap();
        for w in enumerate_words(&s, 3).unwrap() {
            let text = w.format(&s);
            assert_eq!(BlockWord::parse(&s, &text).unwrap(), w);
        }
        assert!(BlockWord::parse(&s, "1:1@1.1:1@2").is_err());
        let s1 = BlockShift::new(&[1]).unwrap();
        assert!(BlockWord::parse(&s1, "1:1@1|1:1@1").is_err());
        assert_eq!(
            BlockWord::parse(&s1, "2:1@1|1:1@1").unwrap().format(&s1),
            "2:1@1|1:1@1"
        );
    }

    #[test]
    fn code_word_parse() {
        let c = CodeWord::parse("3.1:1@1.2:1@1").unwrap();
        assert_eq!(c.level(), 2);
        assert!(c.is_admissible());
        assert!(!CodeWord::parse("1.1:1@1").unwrap().is_admissible());
    }
}
