//! The free group F2 = <a, b> and G = F2 x Z.
//!
//! Words are kept freely reduced at all times. The wire form uses `a`, `b` for the
//! generators and `A`, `B` for their inverses; a group element is written `word:z`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::TreeEnd;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Letter {
    A = 0,
    AInv = 1,
    B = 2,
    BInv = 3,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::A, Letter::AInv, Letter::B, Letter::BInv];

    pub fn inverse(self) -> Letter {
        match self {
            Letter::A => Letter::AInv,
            Letter::AInv => Letter::A,
            Letter::B => Letter::BInv,
            Letter::BInv => Letter::B,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Letter::A => 'a',
            Letter::AInv => 'A',
            Letter::B => 'b',
            Letter::BInv => 'B',
        }
    }

    pub fn from_char(c: char) -> Result<Letter> {
        match c {
            'a' => Ok(Letter::A),
            'A' => Ok(Letter::AInv),
            'b' => Ok(Letter::B),
            'B' => Ok(Letter::BInv),
            _ => Err(Error::Parse(format!("invalid letter {c:?}"))),
        }
    }

    /// Signed exponent contribution `(da, db)` of this letter.
    pub fn exponents(self) -> (i64, i64) {
        match self {
            Letter::A => (1, 0),
            Letter::AInv => (-1, 0),
            Letter::B => (0, 1),
            Letter::BInv => (0, -1),
        }
    }
}

/// Appends `letters` to an already reduced buffer, cancelling as it goes.
fn push_reduced(buf: &mut Vec<Letter>, letters: impl IntoIterator<Item = Letter>) {
    for l in letters {
        if buf.last() == Some(&l.inverse()) {
            buf.pop();
        } else {
            buf.push(l);
        }
    }
}

/// A freely reduced word in F2.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Word {
        Word::default()
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn reduce(letters: impl IntoIterator<Item = Letter>) -> Word {
        let mut buf = Vec::new();
        push_reduced(&mut buf, letters);
        Word { letters: buf }
    }

    /// Wraps letters already known to be reduced.
    pub(crate) fn from_reduced(letters: Vec<Letter>) -> Word {
        debug_assert!(letters.windows(2).all(|w| w[0] != w[1].inverse()));
        Word { letters }
    }

    pub fn parse(s: &str) -> Result<Word> {
        let s = s.trim();
        if s == "e" || s == "1" {
            return Ok(Word::identity());
        }
        let letters = s.chars().map(Letter::from_char).collect::<Result<Vec<_>>>()?;
        Ok(Word::reduce(letters))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.letters.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }

    pub fn inverse(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(|l| l.inverse()).collect() }
    }

    pub fn mul(&self, other: &Word) -> Word {
        let mut buf = self.letters.clone();
        push_reduced(&mut buf, other.letters.iter().copied());
        Word { letters: buf }
    }

    pub fn pow(&self, n: u32) -> Word {
        let mut out = Word::identity();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word { letters: self.letters[..n.min(self.len())].to_vec() }
    }

    pub fn suffix_from(&self, n: usize) -> Word {
        Word { letters: self.letters[n.min(self.len())..].to_vec() }
    }

    pub fn push(&mut self, l: Letter) {
        push_reduced(&mut self.letters, [l]);
    }

    /// Signed exponent sums `(#a - #A, #b - #B)`.
    pub fn exponent_sums(&self) -> (i64, i64) {
        self.letters.iter().fold((0, 0), |(x, y), l| {
            let (da, db) = l.exponents();
            (x + da, y + db)
        })
    }

    pub fn common_prefix_len(&self, other: &Word) -> usize {
        self.letters.iter().zip(&other.letters).take_while(|(x, y)| x == y).count()
    }

    /// Whether the first letter is not the inverse of the last.
    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.first(), self.last()) {
            (Some(f), Some(l)) => self.len() == 1 || f != l.inverse(),
            _ => true,
        }
    }

    /// `w = u c u^-1` with `c` cyclically reduced and `u` as short as possible.
    pub fn cyclic_reduce(&self) -> (Word, Word) {
        let l = &self.letters;
        let n = l.len();
        let mut k = 0;
        while 2 * k + 1 < n && l[k] == l[n - 1 - k].inverse() {
            k += 1;
        }
        (
            Word { letters: l[..k].to_vec() },
            Word { letters: l[k..n - k].to_vec() },
        )
    }

    /// The end `w^inf` of the tree: the limit of the vertices `w^n`.
    pub fn power_end(&self) -> Result<TreeEnd> {
        let (u, c) = self.cyclic_reduce();
        if c.is_empty() {
            return Err(Error::EmptyPeriod);
        }
        TreeEnd::new(&u, &c)
    }

    /// Shortlex comparison with the letter order a < A < b < B.
    pub fn shortlex_cmp(&self, other: &Word) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.letters.cmp(&other.letters))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;
    fn from_str(s: &str) -> Result<Word> {
        Word::parse(s)
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.shortlex_cmp(other)
    }
}

/// An element `(w, z)` of G = F2 x Z.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct GroupElement {
    pub word: Word,
    pub z: i64,
}

impl GroupElement {
    pub fn new(word: Word, z: i64) -> Self {
        GroupElement { word, z }
    }

    pub fn identity() -> Self {
        GroupElement::default()
    }

    pub fn is_identity(&self) -> bool {
        self.word.is_empty() && self.z == 0
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (w, z) = match s.split_once(':') {
            Some((w, z)) => {
                let z = z.trim().parse::<i64>().map_err(|_| Error::Parse(format!("invalid z in {s:?}")))?;
                (w, z)
            }
            None => (s, 0),
        };
        Ok(GroupElement::new(Word::parse(w)?, z))
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        GroupElement::new(self.word.mul(&other.word), self.z + other.z)
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement::new(self.word.inverse(), -self.z)
    }

    pub fn pow(&self, n: u32) -> GroupElement {
        GroupElement::new(self.word.pow(n), self.z * n as i64)
    }

    /// Word length for the generating set {a, b, z}: `|w| + |n|`.
    pub fn norm(&self) -> u64 {
        self.word.len() as u64 + self.z.unsigned_abs()
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.word, self.z)
    }
}

impl FromStr for GroupElement {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        GroupElement::parse(s)
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical order: shortlex on the word, then `z`.
impl Ord for GroupElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.word.cmp(&other.word).then(self.z.cmp(&other.z))
    }
}

impl Serialize for GroupElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GroupElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        GroupElement::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// All reduced words of length at most `max_len`, in shortlex order.
pub fn words_up_to(max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::identity()];
    let mut frontier = vec![Word::identity()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(frontier.len() * 3 + 4);
        for w in &frontier {
            for l in Letter::ALL {
                if w.last() == Some(l.inverse()) {
                    continue;
                }
                let mut letters = w.letters.clone();
                letters.push(l);
                next.push(Word { letters });
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Number of reduced words of length at most `l`: `2 * 3^l - 1`.
pub fn free_ball_size(l: u32) -> u64 {
    2 * 3u64.pow(l) - 1
}

/// Closed-form size of `ball(l)` in G.
pub fn ball_size(l: u32) -> u64 {
    (-(l as i64)..=l as i64).map(|n| free_ball_size(l - n.unsigned_abs() as u32)).sum()
}

/// All `(w, n)` with `|w| + |n| <= l`, in canonical order.
pub fn ball(l: u32) -> Vec<GroupElement> {
    let words = words_up_to(l as usize);
    let mut out = Vec::with_capacity(ball_size(l) as usize);
    for w in words {
        let slack = l as i64 - w.len() as i64;
        for z in -slack..=slack {
            out.push(GroupElement::new(w.clone(), z));
        }
    }
    out
}
