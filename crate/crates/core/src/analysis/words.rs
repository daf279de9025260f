use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::FlowError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    fn as_char(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// Ordered word of gap signs between consecutive intersections of two pinned
/// curves. The intersection count is `letters + 1`, so it is always at least 2.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SgnWord {
    letters: Vec<Sign>,
}

impl SgnWord {
    /// `None` for an empty word: two pinned curves always bound at least one arc.
    pub fn new(letters: Vec<Sign>) -> Option<Self> {
        if letters.is_empty() {
            None
        } else {
            Some(SgnWord { letters })
        }
    }

    pub fn letters(&self) -> &[Sign] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Intersection number, endpoints included.
    pub fn z(&self) -> usize {
        self.letters.len() + 1
    }

    pub fn flipped(&self) -> SgnWord {
        SgnWord { letters: self.letters.iter().map(|s| s.flip()).collect() }
    }

    pub fn is_all(&self, sign: Sign) -> bool {
        self.letters.iter().all(|&s| s == sign)
    }

    /// `true` when `other` is a subword (ordered subsequence) of `self`.
    pub fn contains_subword(&self, other: &SgnWord) -> bool {
        subword(self, other)
    }
}

/// `w1 |> w2`: the letters of `w2` appear in `w1` in order.
pub fn subword(w1: &SgnWord, w2: &SgnWord) -> bool {
    let mut it = w1.letters.iter();
    w2.letters.iter().all(|c| it.any(|d| d == c))
}

impl fmt::Display for SgnWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.letters {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for SgnWord {
    type Err = FlowError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let letters = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '[' && *c != ']')
            .map(|c| match c {
                '+' => Ok(Sign::Plus),
                '-' | '\u{2212}' => Ok(Sign::Minus),
                other => Err(FlowError::InvalidProfile(format!("bad sign letter {other:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        SgnWord::new(letters).ok_or_else(|| FlowError::InvalidProfile("empty sign word".into()))
    }
}

impl Serialize for SgnWord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SgnWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
