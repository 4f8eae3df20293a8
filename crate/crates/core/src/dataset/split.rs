use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Part {
    Train,
    Val,
    Test,
}

impl fmt::Display for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Part::Train => "train",
            Part::Val => "val",
            Part::Test => "test",
        })
    }
}

impl FromStr for Part {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Part::Train),
            "val" => Ok(Part::Val),
            "test" => Ok(Part::Test),
            other => Err(Error::parse(0, format!("unknown split part `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub seed: u64,
    /// Fraction of all graphs held out for testing.
    pub test_fraction: f64,
    /// Fraction of the graphs left after the test cut.
    pub val_fraction: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            seed: 0,
            test_fraction: 0.10,
            val_fraction: 0.10,
        }
    }
}

impl SplitSpec {
    pub fn with_seed(seed: u64) -> Self {
        SplitSpec {
            seed,
            ..SplitSpec::default()
        }
    }

    /// `(train, val, test)` sizes for `n` items. Both cuts round down.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let test = floor_fraction(n, self.test_fraction);
        let val = floor_fraction(n - test, self.val_fraction);
        (n - test - val, val, test)
    }

    /// Part of each of `n` items, in item order.
    pub fn membership(&self, n: usize) -> Vec<Part> {
        let (_, val, test) = self.sizes(n);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(self.seed));
        let mut parts = vec![Part::Train; n];
        for (rank, &i) in order.iter().enumerate() {
            if rank < test {
                parts[i] = Part::Test;
            } else if rank < test + val {
                parts[i] = Part::Val;
            }
        }
        parts
    }
}

fn floor_fraction(n: usize, fraction: f64) -> usize {
    // the epsilon keeps 0.1 * 100 from landing on 9.999...
    ((n as f64) * fraction + 1e-9).floor().max(0.0) as usize
}

/// Partitions `items` by the membership of `spec`; relative order is kept.
pub fn split<T: Clone>(items: &[T], spec: &SplitSpec) -> (Vec<T>, Vec<T>, Vec<T>) {
    let mut out = (Vec::new(), Vec::new(), Vec::new());
    for (item, part) in items.iter().zip(spec.membership(items.len())) {
        match part {
            Part::Train => out.0.push(item.clone()),
            Part::Val => out.1.push(item.clone()),
            Part::Test => out.2.push(item.clone()),
        }
    }
    out
}

pub fn format_split(entries: &[(String, Part)]) -> String {
    entries.iter().map(|(id, p)| format!("{id} {p}\n")).collect()
}

pub fn parse_split(text: &str) -> Result<Vec<(String, Part)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        match line.split_ascii_whitespace().collect::<Vec<_>>()[..] {
            [] => continue,
            [id, part] => {
                let part = part.parse().map_err(|_| {
                    Error::parse(lineno + 1, format!("unknown split part `{part}`"))
                })?;
                out.push((id.to_string(), part));
            }
            _ => return Err(Error::parse(lineno + 1, "expected `<graph_id> <train|val|test>`")),
        }
    }
    Ok(out)
}

pub fn read_split_file(path: impl AsRef<Path>) -> Result<Vec<(String, Part)>> {
    parse_split(&fs::read_to_string(path)?)
}

pub fn write_split_file(entries: &[(String, Part)], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_split(entries))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hundred_graphs() {
        let spec = SplitSpec::with_seed(4);
        assert_eq!(spec.sizes(100), (81, 9, 10));
        let items: Vec<usize> = (0..100).collect();
        let (train, val, test) = split(&items, &spec);
        assert_eq!((train.len(), val.len(), test.len()), (81, 9, 10));
    }

    #[test]
    fn single_graph_goes_to_train() {
        assert_eq!(SplitSpec::default().membership(1), vec![Part::Train]);
        assert!(SplitSpec::default().membership(0).is_empty());
    }

    #[test]
    fn file_round_trip() {
        let entries = vec![("a".to_string(), Part::Train), ("b".to_string(), Part::Test)];
        let text = format_split(&entries);
        assert_eq!(text, "a train\nb test\n");
        assert_eq!(parse_split(&text).unwrap(), entries);
        assert!(parse_split("a holdout\n").is_err());
    }

    proptest! {
        #[test]
        fn partition_is_exhaustive_and_deterministic(n in 0usize..400, seed in any::<u64>()) {
            let spec = SplitSpec::with_seed(seed);
            let items: Vec<usize> = (0..n).collect();
            let (train, val, test) = split(&items, &spec);
            let mut all: Vec<usize> = train.iter().chain(&val).chain(&test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(&all, &items);
            prop_assert_eq!(spec.membership(n), spec.membership(n));
            let want_test = n as f64 * 0.1;
            prop_assert!((test.len() as f64 - want_test).abs() <= 1.0);
            let want_val = (n - test.len()) as f64 * 0.1;
            prop_assert!((val.len() as f64 - want_val).abs() <= 1.0);
        }
    }
}
