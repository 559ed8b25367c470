//! Label and code vocabularies.
//!
//! Level A is the ordinal collaboration-quality label predicted by the
//! models. Level B2 (student roles) and Level C (student behaviours) are the
//! code sets observed on the annotation timelines.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Number of Level A classes.
pub const NUM_CLASSES: usize = 5;

/// Ordinal Level A label. Discriminants follow the ordinal scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelA {
    Effective = 0,
    Satisfactory = 1,
    Progressing = 2,
    NeedsImprovement = 3,
    WorkingIndependently = 4,
}

impl LevelA {
    pub const ALL: [LevelA; NUM_CLASSES] = [
        LevelA::Effective,
        LevelA::Satisfactory,
        LevelA::Progressing,
        LevelA::NeedsImprovement,
        LevelA::WorkingIndependently,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<LevelA> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            LevelA::Effective => "Effective",
            LevelA::Satisfactory => "Satisfactory",
            LevelA::Progressing => "Progressing",
            LevelA::NeedsImprovement => "Needs Improvement",
            LevelA::WorkingIndependently => "Working Independently",
        }
    }

    /// One-hot label vector.
    pub fn one_hot(self) -> Vec<f64> {
        let mut v = vec![0.0; NUM_CLASSES];
        v[self.index()] = 1.0;
        v
    }
}

impl fmt::Display for LevelA {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LevelA {
    type Err = String;

    /// Accepts the display name (case-insensitive, spaces or underscores) or
    /// the ordinal index.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Ok(i) = s.parse::<usize>() {
            return LevelA::from_index(i).ok_or_else(|| format!("label index {i} out of range 0..5"));
        }
        let norm = s.replace('_', " ").to_ascii_lowercase();
        LevelA::ALL
            .into_iter()
            .find(|c| c.name().to_ascii_lowercase() == norm)
            .ok_or_else(|| format!("unknown Level A code {s:?}"))
    }
}

/// The ordered 5-class Level A label space together with the neighbour
/// pairing used when oversampling.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrdinalLabelScheme;

impl OrdinalLabelScheme {
    pub fn classes(&self) -> &'static [LevelA; NUM_CLASSES] {
        &LevelA::ALL
    }

    pub fn len(&self) -> usize {
        NUM_CLASSES
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Neighbour classes a primary class is mixed against.
    ///
    /// The two extreme classes borrow their second neighbour from two steps
    /// inward, so every class has exactly two partners.
    pub fn adjacency(&self, class: LevelA) -> [LevelA; 2] {
        use LevelA::*;
        match class {
            Effective => [Satisfactory, Progressing],
            Satisfactory => [Effective, Progressing],
            Progressing => [Satisfactory, NeedsImprovement],
            NeedsImprovement => [Progressing, WorkingIndependently],
            WorkingIndependently => [Progressing, NeedsImprovement],
        }
    }
}

/// Annotation level of a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Level {
    B2,
    C,
}

impl Level {
    pub fn scheme(self) -> &'static CodeScheme {
        match self {
            Level::B2 => &B2_SCHEME,
            Level::C => &C_SCHEME,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::B2 => "B2",
            Level::C => "C",
        })
    }
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "B2" => Ok(Level::B2),
            "C" => Ok(Level::C),
            other => Err(format!("unknown level {other:?} (expected B2 or C)")),
        }
    }
}

/// One entry of a code vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Code {
    pub name: &'static str,
    pub abbrev: Option<&'static str>,
}

/// Closed, ordered vocabulary of codes for one annotation level.
#[derive(Debug, PartialEq, Eq)]
pub struct CodeScheme {
    pub level: Level,
    pub codes: &'static [Code],
}

const fn code(name: &'static str, abbrev: &'static str) -> Code {
    Code {
        name,
        abbrev: Some(abbrev),
    }
}

const fn plain(name: &'static str) -> Code {
    Code { name, abbrev: None }
}

pub static B2_SCHEME: CodeScheme = CodeScheme {
    level: Level::B2,
    codes: &[
        code("Group guide/Coordinator", "GG"),
        code("Contributor (Active)", "C"),
        code("Follower", "F"),
        code("Conflict Resolver", "CR"),
        code("Conflict Instigator/Disagreeable", "CI"),
        code("Off-task/Disinterested", "OT"),
        code("Lone Solver", "LS"),
    ],
};

pub static C_SCHEME: CodeScheme = CodeScheme {
    level: Level::C,
    codes: &[
        plain("Talking"),
        plain("Reading"),
        plain("Writing"),
        plain("Using/Working with materials"),
        plain("Setting up the physical space"),
        plain("Actively listening/Paying attention"),
        plain("Explaining/Sharing ideas"),
        plain("Problem solving/Negotiation"),
        plain("Recognizing/Inviting others contributions"),
        plain("Setting group roles and responsibilities"),
        plain("Comforting, encouraging others/Coralling"),
        plain("Agreeing"),
        plain("Off-task/Disinterested"),
        plain("Disagreeing"),
        plain("Arguing"),
        plain("Seeking recognition/Boasting"),
        plain("Joking/Laughing"),
        plain("Playing/Horsing around/Rough housing"),
        plain("Excessive difference to authority/leader"),
        plain("Blocking information from being shared"),
        plain("Doing nothing/Withdrawing"),
        plain("Engaging with outside environment"),
        plain("Waiting"),
    ],
};

impl CodeScheme {
    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Resolves a code by full name or abbreviation, ignoring ASCII case.
    pub fn resolve(&self, text: &str) -> Option<usize> {
        let text = text.trim();
        self.codes
            .iter()
            .position(|c| c.name.eq_ignore_ascii_case(text) || c.abbrev.is_some_and(|a| a.eq_ignore_ascii_case(text)))
    }

    /// Short label used when writing corpora: the abbreviation if one exists.
    pub fn label(&self, index: usize) -> &'static str {
        let c = &self.codes[index];
        c.abbrev.unwrap_or(c.name)
    }
}
