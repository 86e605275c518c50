//! Coding combinatorics of the spectral bands.
//!
//! Letters `(t, i)_m` of the alphabets `A_m`, the admissibility relation
//! between a band type and a letter, the compressed block alphabet of a
//! period `a = a_1..a_k` and its incidence matrix.

mod charpoly;
mod perron;
mod words;

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use charpoly::{charpoly, charpoly_3x3, charpoly_identity, divides_auxiliary_factor};
pub use perron::{parry_measure, perron, ExactParry, PerronData};
pub use words::{enumerate_words, iota, BlockWord, CodeWord, WordIter};

/// Band type `1`, `2` or `3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum BandType {
    One,
    Two,
    Three,
}

impl BandType {
    pub const ALL: [BandType; 3] = [BandType::One, BandType::Two, BandType::Three];

    pub fn as_u8(self) -> u8 {
        match self {
            BandType::One => 1,
            BandType::Two => 2,
            BandType::Three => 3,
        }
    }

    pub fn index(self) -> usize {
        self.as_u8() as usize - 1
    }
}

impl From<BandType> for u8 {
    fn from(t: BandType) -> u8 {
        t.as_u8()
    }
}

impl TryFrom<u8> for BandType {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(BandType::One),
            2 => Ok(BandType::Two),
            3 => Ok(BandType::Three),
            _ => Err(Error::InvalidInput(format!("band type {v} not in {{1,2,3}}"))),
        }
    }
}

impl fmt::Display for BandType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// A letter `(t, i)_m` of the alphabet `A_m`.
///
/// Ordering is type-major, index-minor; letters of different orders compare
/// by order last.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub btype: BandType,
    pub index: u32,
    pub order: u32,
}

impl Letter {
    pub fn new(btype: BandType, index: u32, order: u32) -> Result<Self> {
        let max = match btype {
            BandType::One => order + 1,
            BandType::Two => 1,
            BandType::Three => order,
        };
        if order == 0 || index == 0 || index > max {
            return Err(Error::InvalidInput(format!(
                "letter ({btype},{index})_{order} does not exist"
            )));
        }
        Ok(Self {
            btype,
            index,
            order,
        })
    }

    /// Parses the `t:i@m` form.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("letter `{s}` is not of the form t:i@m"));
        let (t, rest) = s.split_once(':').ok_or_else(bad)?;
        let (i, m) = rest.split_once('@').ok_or_else(bad)?;
        let t: u8 = t.trim().parse().map_err(|_| bad())?;
        let i: u32 = i.trim().parse().map_err(|_| bad())?;
        let m: u32 = m.trim().parse().map_err(|_| bad())?;
        Letter::new(BandType::try_from(t)?, i, m)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}@{}", self.btype, self.index, self.order)
    }
}

/// The alphabet `A_m` in canonical order: `(1,1..m+1)`, `(2,1)`, `(3,1..m)`.
pub fn alphabet(m: u32) -> Result<Vec<Letter>> {
    if m == 0 {
        return Err(Error::InvalidInput("alphabet order must be >= 1".into()));
    }
    let mut out = Vec::with_capacity(2 * m as usize + 2);
    for i in 1..=m + 1 {
        out.push(Letter {
            btype: BandType::One,
            index: i,
            order: m,
        });
    }
    out.push(Letter {
        btype: BandType::Two,
        index: 1,
        order: m,
    });
    for i in 1..=m {
        out.push(Letter {
            btype: BandType::Three,
            index: i,
            order: m,
        });
    }
    Ok(out)
}

/// Whether a band of type `t` may be followed by the letter `e`.
pub fn admissible(t: BandType, e: &Letter) -> bool {
    let m = e.order;
    match (t, e.btype) {
        (BandType::One, BandType::Two) => e.index == 1,
        (BandType::Two, BandType::One) => e.index <= m + 1,
        (BandType::Two, BandType::Three) => e.index <= m,
        (BandType::Three, BandType::One) => e.index <= m,
        (BandType::Three, BandType::Three) => e.index + 1 <= m,
        _ => false,
    }
}

/// Number of children of each type below a band of type `parent` when the
/// next partial quotient is `a`: `(type-1, type-2, type-3)`.
pub fn child_counts(parent: BandType, a: u32) -> (u32, u32, u32) {
    match parent {
        BandType::One => (0, 1, 0),
        BandType::Two => (a + 1, 0, a),
        BandType::Three => (a, 0, a - 1),
    }
}

/// An element `e_1..e_k` of the block alphabet with `e_i -> e_{i+1}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockLetter(pub Vec<Letter>);

impl BlockLetter {
    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn header(&self) -> &Letter {
        &self.0[0]
    }

    pub fn tail_type(&self) -> BandType {
        self.0[self.0.len() - 1].btype
    }

    pub fn parse(s: &str) -> Result<Self> {
        let letters = s
            .split('.')
            .map(Letter::parse)
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(Error::Parse("empty block".into()));
        }
        Ok(BlockLetter(letters))
    }
}

impl fmt::Display for BlockLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, e) in self.0.iter().enumerate() {
            if j > 0 {
                f.write_str(".")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

fn check_period(a: &[u32]) -> Result<()> {
    if a.is_empty() || a.contains(&0) {
        return Err(Error::InvalidInput(
            "period must be a nonempty list of positive integers".into(),
        ));
    }
    Ok(())
}

/// All internally admissible blocks for the period `a`, lexicographically sorted.
pub fn block_alphabet(a: &[u32]) -> Result<Vec<BlockLetter>> {
    check_period(a)?;
    let mut blocks: Vec<Vec<Letter>> = alphabet(a[0])?.into_iter().map(|e| vec![e]).collect();
    for &m in &a[1..] {
        let next = alphabet(m)?;
        blocks = blocks
            .into_iter()
            .flat_map(|b| {
                let t = b[b.len() - 1].btype;
                next.iter()
                    .filter(move |e| admissible(t, e))
                    .map(move |e| {
                        let mut nb = b.clone();
                        nb.push(*e);
                        nb
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    Ok(blocks.into_iter().map(BlockLetter).collect())
}

/// Square 0/1 matrix over the block alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncidenceMatrix {
    size: usize,
    ones: Vec<bool>,
}

impl IncidenceMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.ones[i * self.size + j]
    }

    pub fn row_sums(&self) -> Vec<usize> {
        (0..self.size)
            .map(|i| (0..self.size).filter(|&j| self.get(i, j)).count())
            .collect()
    }

    pub fn total_ones(&self) -> usize {
        self.ones.iter().filter(|&&x| x).count()
    }

    pub fn to_i64(&self) -> Vec<Vec<i64>> {
        (0..self.size)
            .map(|i| (0..self.size).map(|j| self.get(i, j) as i64).collect())
            .collect()
    }

    /// `1^T A^(n-1) 1`, the number of admissible words of length `n`.
    pub fn word_count(&self, n: usize) -> BigUint {
        if n == 0 {
            return BigUint::one();
        }
        let mut v = vec![BigUint::one(); self.size];
        for _ in 1..n {
            let mut next = vec![BigUint::zero(); self.size];
            for (i, vi) in v.iter().enumerate() {
                for (j, nj) in next.iter_mut().enumerate() {
                    if self.get(i, j) {
                        *nj += vi;
                    }
                }
            }
            v = next;
        }
        v.into_iter().sum()
    }

    /// Whether `A^p` has all entries strictly positive.
    pub fn power_positive(&self, p: usize) -> bool {
        let n = self.size;
        // Boolean matrix powers.
        let mut acc = self.ones.clone();
        for _ in 1..p {
            let mut next = vec![false; n * n];
            for i in 0..n {
                for k in 0..n {
                    if acc[i * n + k] {
                        for j in 0..n {
                            if self.ones[k * n + j] {
                                next[i * n + j] = true;
                            }
                        }
                    }
                }
            }
            acc = next;
        }
        acc.iter().all(|&x| x)
    }
}

/// Incidence matrix: entry `(v, w)` is 1 iff the tail type of `v` admits the header of `w`.
pub fn incidence_matrix(a: &[u32]) -> Result<IncidenceMatrix> {
    let blocks = block_alphabet(a)?;
    Ok(incidence_of(&blocks))
}

fn incidence_of(blocks: &[BlockLetter]) -> IncidenceMatrix {
    let size = blocks.len();
    let mut ones = vec![false; size * size];
    for (i, v) in blocks.iter().enumerate() {
        for (j, w) in blocks.iter().enumerate() {
            ones[i * size + j] = admissible(v.tail_type(), w.header());
        }
    }
    IncidenceMatrix { size, ones }
}

/// Exact 3x3 integer matrix.
pub type IntMatrix3 = [[BigInt; 3]; 3];

fn hat_a(k: u32) -> IntMatrix3 {
    let k = BigInt::from(k);
    let z = BigInt::zero;
    [
        [z(), BigInt::one(), z()],
        [&k + 1, z(), k.clone()],
        [k.clone(), z(), k - 1],
    ]
}

pub fn mat3_mul(x: &IntMatrix3, y: &IntMatrix3) -> IntMatrix3 {
    let mut out: IntMatrix3 = Default::default();
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..3).map(|l| &x[i][l] * &y[l][j]).sum();
        }
    }
    out
}

/// `Â_{a_k} ... Â_{a_1}`.
pub fn auxiliary_matrix(a: &[u32]) -> Result<IntMatrix3> {
    check_period(a)?;
    let mut acc = hat_a(a[0]);
    for &m in &a[1..] {
        acc = mat3_mul(&hat_a(m), &acc);
    }
    Ok(acc)
}

/// `B_a = Q_{a_k} ... Q_{a_1}` with `Q_m = [[m,1],[1,0]]`, as `[[b00,b01],[b10,b11]]`.
pub fn convergent_matrix(a: &[u32]) -> Result<[[BigInt; 2]; 2]> {
    check_period(a)?;
    let mut acc = [
        [BigInt::one(), BigInt::zero()],
        [BigInt::zero(), BigInt::one()],
    ];
    for &m in a {
        let m = BigInt::from(m);
        // Q_m * acc
        acc = [
            [&m * &acc[0][0] + &acc[1][0], &m * &acc[0][1] + &acc[1][1]],
            [acc[0][0].clone(), acc[0][1].clone()],
        ];
    }
    Ok(acc)
}

/// The subshift of finite type for a period: block alphabet, incidence and
/// successor lists. Immutable once built.
#[derive(Clone, Debug)]
pub struct BlockShift {
    period: Vec<u32>,
    blocks: Vec<BlockLetter>,
    incidence: IncidenceMatrix,
    successors: Vec<Vec<usize>>,
}

impl BlockShift {
    pub fn new(a: &[u32]) -> Result<Self> {
        let blocks = block_alphabet(a)?;
        let incidence = incidence_of(&blocks);
        let successors = (0..blocks.len())
            .map(|i| (0..blocks.len()).filter(|&j| incidence.get(i, j)).collect())
            .collect();
        Ok(Self {
            period: a.to_vec(),
            blocks,
            incidence,
            successors,
        })
    }

    pub fn period(&self) -> &[u32] {
        &self.period
    }

    /// Block length `k`.
    pub fn k(&self) -> usize {
        self.period.len()
    }

    pub fn blocks(&self) -> &[BlockLetter] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &BlockLetter {
        &self.blocks[i]
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn incidence(&self) -> &IncidenceMatrix {
        &self.incidence
    }

    pub fn successors(&self, i: usize) -> &[usize] {
        &self.successors[i]
    }

    pub fn index_of(&self, b: &BlockLetter) -> Option<usize> {
        self.blocks.binary_search(b).ok()
    }

    /// Whether the block sequence is an admissible word.
    pub fn is_admissible(&self, blocks: &[usize]) -> bool {
        blocks.iter().all(|&b| b < self.len())
            && blocks.windows(2).all(|w| self.incidence.get(w[0], w[1]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(t: u8, i: u32, m: u32) -> Letter {
        Letter::new(BandType::try_from(t).unwrap(), i, m).unwrap()
    }

    #[test]
    fn alphabet_sizes() {
        assert!(alphabet(0).is_err());
        for m in 1..=50 {
            assert_eq!(alphabet(m).unwrap().len(), 2 * m as usize + 2);
        }
        let a1 = alphabet(1).unwrap();
        assert_eq!(a1, vec![l(1, 1, 1), l(1, 2, 1), l(2, 1, 1), l(3, 1, 1)]);
        assert!(a1.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn admissibility_examples() {
        assert!(admissible(BandType::One, &l(2, 1, 3)));
        assert!(!admissible(BandType::Three, &l(3, 1, 1)));
        assert!(admissible(BandType::Two, &l(1, 4, 3)));
        assert!(!admissible(BandType::One, &l(1, 1, 3)));
        assert!(!admissible(BandType::Two, &l(2, 1, 3)));
        assert!(!admissible(BandType::Three, &l(1, 4, 3)));
        assert!(admissible(BandType::Three, &l(3, 2, 3)));
        assert!(!admissible(BandType::Three, &l(3, 3, 3)));
    }

    #[test]
    fn admissible_successor_counts_match_child_counts() {
        for m in 1..8 {
            let alph = alphabet(m).unwrap();
            for t in BandType::ALL {
                let (c1, c2, c3) = child_counts(t, m);
                let count = |bt| alph.iter().filter(|e| e.btype == bt && admissible(t, e)).count() as u32;
                assert_eq!(
                    (count(BandType::One), count(BandType::Two), count(BandType::Three)),
                    (c1, c2, c3)
                );
            }
        }
    }

    #[test]
    fn block_alphabet_sizes() {
        assert_eq!(block_alphabet(&[1]).unwrap().len(), 4);
        assert_eq!(block_alphabet(&[1, 1]).unwrap().len(), 6);
        assert_eq!(block_alphabet(&[2]).unwrap().len(), 6);
        let b = block_alphabet(&[2, 3]).unwrap();
        assert!(b.windows(2).all(|w| w[0] < w[1]));
        assert!(b.len() <= 6 * 8);
        assert!(block_alphabet(&[]).is_err());
    }

    #[test]
    fn incidence_for_period_one() {
        let m = incidence_matrix(&[1]).unwrap();
        assert_eq!(m.row_sums(), vec![1, 1, 3, 1]);
        assert_eq!(m.total_ones(), 6);
    }

    #[test]
    fn type_one_rows_point_at_type_two_headers() {
        let blocks = block_alphabet(&[2, 1, 3]).unwrap();
        let m = incidence_of(&blocks);
        for (i, v) in blocks.iter().enumerate() {
            if v.tail_type() == BandType::One {
                for (j, w) in blocks.iter().enumerate() {
                    assert_eq!(m.get(i, j), w.header().btype == BandType::Two);
                }
            }
            if v.tail_type() == BandType::Two {
                assert!(m.row_sums()[i] >= 2);
            }
        }
    }

    fn ints(rows: [[i64; 3]; 3]) -> IntMatrix3 {
        rows.map(|r| r.map(BigInt::from))
    }

    #[test]
    fn auxiliary_examples() {
        assert_eq!(
            auxiliary_matrix(&[1]).unwrap(),
            ints([[0, 1, 0], [2, 0, 1], [1, 0, 0]])
        );
        assert_eq!(
            auxiliary_matrix(&[2]).unwrap(),
            ints([[0, 1, 0], [3, 0, 2], [2, 0, 1]])
        );
        assert_eq!(
            auxiliary_matrix(&[1, 1]).unwrap(),
            ints([[2, 0, 1], [1, 2, 0], [0, 1, 0]])
        );
    }

    #[test]
    fn auxiliary_fifth_power_positive() {
        let mut cases = Vec::new();
        for k in 1..=4usize {
            let mut a = vec![1u32; k];
            loop {
                cases.push(a.clone());
                let mut i = 0;
                while i < k && a[i] == 5 {
                    a[i] = 1;
                    i += 1;
                }
                if i == k {
                    break;
                }
                a[i] += 1;
            }
        }
        for a in cases {
            let m = auxiliary_matrix(&a).unwrap();
            let mut p = m.clone();
            for _ in 1..5 {
                p = mat3_mul(&p, &m);
            }
            assert!(p.iter().flatten().all(|x| x > &BigInt::zero()), "{a:?}");
        }
    }

    #[test]
    fn incidence_primitive_within_bound() {
        for a in [vec![1], vec![2], vec![1, 2], vec![2, 3], vec![3, 1, 2], vec![1, 1, 1, 1]] {
            let m = incidence_matrix(&a).unwrap();
            let bound = 4 * a.len() + 8;
            assert!((1..=bound).any(|p| m.power_positive(p)), "{a:?}");
        }
    }

    #[test]
    fn letter_roundtrip() {
        let e = Letter::parse("3:2@4").unwrap();
        assert_eq!(e, l(3, 2, 4));
        assert_eq!(e.to_string(), "3:2@4");
        assert!(Letter::parse("2:2@4").is_err());
        assert!(Letter::parse("2-1@4").is_err());
    }
}
