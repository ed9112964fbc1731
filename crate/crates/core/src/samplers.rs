//! Sampling schemes: uniform random, contiguous blocks, and disjoint
//! partitions.
//!
//! A sample is always a set of *row indices* into a parent dataset, kept
//! sorted ascending so that downstream comparisons (overlap counts between
//! flag vectors) can walk two samples in lockstep.

use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::str::FromStr;

use rand::seq::{index, SliceRandom};

use crate::error::{Error, Result};
use crate::seed;

/// How a sample was drawn from its parent dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scheme {
    /// Uniform random sample without replacement.
    Random { size: usize },
    /// Union of non-overlapping contiguous index runs.
    Block { n_blocks: usize, block_size: usize },
    /// Part `part` (0-based) of a random partition into `k` subsets.
    Partition { k: usize, part: usize },
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Random { size } => write!(f, "random(size={size})"),
            Scheme::Block {
                n_blocks,
                block_size,
            } => write!(f, "block(n_blocks={n_blocks},block_size={block_size})"),
            Scheme::Partition { k, part } => write!(f, "partition(k={k},part={part})"),
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            row: 0,
            column: "scheme".into(),
            reason: format!("unrecognized scheme descriptor {s:?}"),
        };
        let (name, rest) = s.split_once('(').ok_or_else(bad)?;
        let args = rest.strip_suffix(')').ok_or_else(bad)?;
        let mut fields = std::collections::BTreeMap::new();
        for pair in args.split(',') {
            let (k, v) = pair.split_once('=').ok_or_else(bad)?;
            let v: usize = v.trim().parse().map_err(|_| bad())?;
            fields.insert(k.trim().to_string(), v);
        }
        let get = |key: &str| fields.get(key).copied().ok_or_else(bad);
        match name.trim() {
            "random" => Ok(Scheme::Random { size: get("size")? }),
            "block" => Ok(Scheme::Block {
                n_blocks: get("n_blocks")?,
                block_size: get("block_size")?,
            }),
            "partition" => Ok(Scheme::Partition {
                k: get("k")?,
                part: get("part")?,
            }),
            _ => Err(bad()),
        }
    }
}

/// A drawn sample: sorted row indices plus enough provenance to reproduce it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleIndex {
    indices: Vec<usize>,
    parent_n: usize,
    scheme: Scheme,
    seed: u64,
}

impl SampleIndex {
    /// Wraps raw indices, enforcing the invariants: non-empty, strictly
    /// ascending (hence duplicate-free), and within `0..parent_n`.
    pub fn new(indices: Vec<usize>, parent_n: usize, scheme: Scheme, seed: u64) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Range("sample must contain at least one index".into()));
        }
        if !indices.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Range(
                "sample indices must be strictly ascending".into(),
            ));
        }
        let last = *indices.last().expect("non-empty");
        if last >= parent_n {
            return Err(Error::Range(format!(
                "sample index {last} out of range for parent of {parent_n} rows"
            )));
        }
        Ok(SampleIndex {
            indices,
            parent_n,
            scheme,
            seed,
        })
    }

    /// The identity sample covering every row of a parent of `n` rows.
    pub fn full(n: usize) -> Result<Self> {
        SampleIndex::new((0..n).collect(), n, Scheme::Random { size: n }, 0)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn parent_n(&self) -> usize {
        self.parent_n
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Whether the sample covers the entire parent dataset.
    pub fn is_full(&self) -> bool {
        self.indices.len() == self.parent_n
    }

    /// Serializes the sample as CSV: provenance in `#` comment lines, then
    /// one index per row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# scheme: {}", self.scheme)?;
        writeln!(w, "# parent_n: {}", self.parent_n)?;
        writeln!(w, "# seed: {}", self.seed)?;
        writeln!(w, "index")?;
        for i in &self.indices {
            writeln!(w, "{i}")?;
        }
        Ok(())
    }

    /// Reads back a sample written by [`SampleIndex::write_csv`], re-checking
    /// every invariant.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let reader = BufReader::new(r);
        let mut scheme: Option<Scheme> = None;
        let mut parent_n: Option<usize> = None;
        let mut seed: Option<u64> = None;
        let mut indices = Vec::new();
        let mut saw_header = false;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                if let Some((key, value)) = comment.split_once(':') {
                    let value = value.trim();
                    match key.trim() {
                        "scheme" => scheme = Some(value.parse()?),
                        "parent_n" => {
                            parent_n = Some(value.parse().map_err(|_| Error::Parse {
                                row: lineno + 1,
                                column: "parent_n".into(),
                                reason: format!("expected integer, got {value:?}"),
                            })?)
                        }
                        "seed" => {
                            seed = Some(value.parse().map_err(|_| Error::Parse {
                                row: lineno + 1,
                                column: "seed".into(),
                                reason: format!("expected integer, got {value:?}"),
                            })?)
                        }
                        _ => {}
                    }
                }
                continue;
            }
            if !saw_header {
                if trimmed != "index" {
                    return Err(Error::Parse {
                        row: lineno + 1,
                        column: "index".into(),
                        reason: format!("expected header \"index\", got {trimmed:?}"),
                    });
                }
                saw_header = true;
                continue;
            }
            let idx: usize = trimmed.parse().map_err(|_| Error::Parse {
                row: lineno + 1,
                column: "index".into(),
                reason: format!("expected row index, got {trimmed:?}"),
            })?;
            indices.push(idx);
        }
        let scheme = scheme.ok_or_else(|| Error::Config("sample file missing scheme".into()))?;
        let parent_n =
            parent_n.ok_or_else(|| Error::Config("sample file missing parent_n".into()))?;
        let seed = seed.ok_or_else(|| Error::Config("sample file missing seed".into()))?;
        SampleIndex::new(indices, parent_n, scheme, seed)
    }
}

/// Draws a uniform random sample of `size` indices without replacement from
/// `0..n`. Identical `(n, size, seed)` always yields the identical sample.
pub fn random_sample(n: usize, size: usize, seed: u64) -> Result<SampleIndex> {
    if size == 0 || size > n {
        return Err(Error::Range(format!(
            "random sample size must satisfy 1 <= size <= n, got size {size} for n = {n}"
        )));
    }
    let mut rng = seed::stream_rng(seed, "random-sample", 0);
    let mut indices = index::sample(&mut rng, n, size).into_vec();
    indices.sort_unstable();
    SampleIndex::new(indices, n, Scheme::Random { size }, seed)
}

/// Draws `n_blocks` non-overlapping contiguous runs of `block_size` indices,
/// uniformly over all feasible placements.
///
/// Uses the gap method: pick `n_blocks` slots from the range shortened by the
/// space the blocks themselves occupy, then re-expand. Every feasible
/// placement corresponds to exactly one slot combination, so uniformity over
/// combinations carries over to placements.
pub fn block_sample(n: usize, n_blocks: usize, block_size: usize, seed: u64) -> Result<SampleIndex> {
    if n_blocks == 0 || block_size == 0 {
        return Err(Error::Range(
            "block sampling requires n_blocks >= 1 and block_size >= 1".into(),
        ));
    }
    let total = n_blocks
        .checked_mul(block_size)
        .filter(|&t| t <= n)
        .ok_or_else(|| {
            Error::Range(format!(
                "cannot place {n_blocks} disjoint blocks of {block_size} in {n} rows"
            ))
        })?;
    let reduced = n - n_blocks * (block_size - 1);
    let mut rng = seed::stream_rng(seed, "block-sample", 0);
    let mut slots = index::sample(&mut rng, reduced, n_blocks).into_vec();
    slots.sort_unstable();
    let mut indices = Vec::with_capacity(total);
    for (i, slot) in slots.into_iter().enumerate() {
        let start = slot + i * (block_size - 1);
        indices.extend(start..start + block_size);
    }
    SampleIndex::new(
        indices,
        n,
        Scheme::Block {
            n_blocks,
            block_size,
        },
        seed,
    )
}

/// Randomly partitions `0..n` into `k` disjoint parts covering every index.
///
/// A random permutation is cut into `k` consecutive chunks; sizes differ by
/// at most one (the remainder goes to the first parts). All parts share the
/// partitioning seed.
pub fn partition(n: usize, k: usize, seed: u64) -> Result<Vec<SampleIndex>> {
    if k == 0 || k > n {
        return Err(Error::Range(format!(
            "partition requires 1 <= k <= n, got k = {k} for n = {n}"
        )));
    }
    let mut rng = seed::stream_rng(seed, "partition", 0);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let base = n / k;
    let remainder = n % k;
    let mut parts = Vec::with_capacity(k);
    let mut offset = 0;
    for part in 0..k {
        let size = base + usize::from(part < remainder);
        let mut indices = perm[offset..offset + size].to_vec();
        indices.sort_unstable();
        offset += size;
        parts.push(SampleIndex::new(
            indices,
            n,
            Scheme::Partition { k, part },
            seed,
        )?);
    }
    Ok(parts)
}
