//! Command-line values that need more than clap's built-in parsing.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use serde_json::Value;
use vilenkin::group::{GeneratorSequence, GroupSpec};
use vilenkin::kernels::Convention;

/// Generator sequence as typed on the command line.
///
/// `2` and `2,3` repeat cyclically up to whatever rank the command needs;
/// `2,3,4,2:explicit` is used as written and fixes the maximum rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MPattern {
    Periodic(Vec<usize>),
    Explicit(Vec<usize>),
}

impl MPattern {
    /// The group for a command that needs rank `rank`.
    pub fn group(&self, rank: usize) -> vilenkin::error::Result<GeneratorSequence> {
        self.group_within(rank, rank)
    }

    /// For commands that need rank `needed` and use up to `wanted` when
    /// available: periodic patterns extend to `wanted`, explicit ones must
    /// reach `needed`.
    pub fn group_within(
        &self,
        needed: usize,
        wanted: usize,
    ) -> vilenkin::error::Result<GeneratorSequence> {
        match self {
            MPattern::Periodic(p) => GeneratorSequence::periodic(p, wanted.max(needed).max(1)),
            MPattern::Explicit(m) => {
                if m.len() < needed {
                    return Err(vilenkin::error::Error::Rank {
                        needed,
                        available: m.len(),
                    });
                }
                GeneratorSequence::new(m, m.len())
            }
        }
    }
}

impl FromStr for MPattern {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (body, explicit) = match s.split_once(':') {
            Some((body, "explicit")) => (body, true),
            Some((_, tag)) => return Err(format!("unknown pattern suffix ':{tag}'")),
            None => (s, false),
        };
        let m = parse_list::<usize>(body)?;
        if let Some(bad) = m.iter().find(|&&v| v < 2) {
            return Err(format!("generator {bad} is below 2"));
        }
        Ok(if explicit {
            MPattern::Explicit(m)
        } else {
            MPattern::Periodic(m)
        })
    }
}

impl fmt::Display for MPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (m, suffix) = match self {
            MPattern::Periodic(m) => (m, ""),
            MPattern::Explicit(m) => (m, ":explicit"),
        };
        let parts: Vec<String> = m.iter().map(|v| v.to_string()).collect();
        write!(f, "{}{suffix}", parts.join(","))
    }
}

/// Comma-separated list, e.g. `3,4,5`. A newtype so clap treats it as one
/// value rather than repeated occurrences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_list(s).map(List)
    }
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: fmt::Display,
{
    s.split(',')
        .map(|t| t.trim().parse::<T>().map_err(|e| format!("'{t}': {e}")))
        .collect()
}

/// Everything that determines a run. Embedded in every report written.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub experiment: String,
    pub m_pattern: String,
    pub group: GroupSpec,
    pub parameters: Value,
    pub convention: Option<Convention>,
    pub seed: Option<u64>,
    pub output: PathBuf,
    pub calibration: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn patterns() {
        assert_eq!("2".parse(), Ok(MPattern::Periodic(vec![2])));
        assert_eq!("2,3".parse(), Ok(MPattern::Periodic(vec![2, 3])));
        assert_eq!(
            "2,3,4,2:explicit".parse(),
            Ok(MPattern::Explicit(vec![2, 3, 4, 2]))
        );
        assert!("2,1".parse::<MPattern>().is_err());
        assert!("2:cyclic".parse::<MPattern>().is_err());
        assert!("".parse::<MPattern>().is_err());
        assert_eq!(
            "2,3,4,2:explicit".parse::<MPattern>().unwrap().to_string(),
            "2,3,4,2:explicit"
        );
        assert_eq!("3, 4,5".parse::<List<usize>>(), Ok(List(vec![3, 4, 5])));
        assert!("3,,5".parse::<List<usize>>().is_err());
    }

    #[test]
    fn group_rank() {
        let g = MPattern::Periodic(vec![2, 3]).group(5).unwrap();
        assert_eq!(g.radices(), [2, 3, 2, 3, 2]);
        let e = MPattern::Explicit(vec![2, 3, 4]);
        assert_eq!(e.group(2).unwrap().n_max(), 3);
        assert!(e.group(4).is_err());
        assert_eq!(e.group_within(3, 5).unwrap().n_max(), 3);
        assert_eq!(
            MPattern::Periodic(vec![2])
                .group_within(3, 5)
                .unwrap()
                .n_max(),
            5
        );
    }
}
