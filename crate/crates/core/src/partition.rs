//! Set partitions of `{1..k}` in restricted-growth form.
//!
//! Positions are 0-based in the API (`0..k`); the textual notation
//! `{1,8,10}{2,4}` is 1-based, as is usual in print.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Default cap on the ground-set size for enumeration.
pub const K_MAX: usize = 12;

/// A set partition stored as a restricted-growth string with 0-based labels:
/// `labels[0] == 0` and `labels[i] <= 1 + max(labels[..i])`.
///
/// Equality of partitions is equality of label strings.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    labels: Vec<u8>,
}

impl Partition {
    /// Validates a restricted-growth string.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::invalid("a partition needs at least one element"));
        }
        if labels.len() > u8::MAX as usize {
            return Err(Error::invalid("ground set too large"));
        }
        let mut next = 0usize;
        for (i, &l) in labels.iter().enumerate() {
            if l > next {
                return Err(Error::invalid(format!(
                    "label {l} at position {i} breaks restricted growth (expected <= {next})"
                )));
            }
            if l == next {
                next += 1;
            }
        }
        Ok(Partition {
            labels: labels.iter().map(|&l| l as u8).collect(),
        })
    }

    /// Relabels arbitrary block tags by order of first occurrence.
    pub fn canonical<T: PartialEq + Copy>(tags: &[T]) -> Self {
        let mut seen: Vec<T> = Vec::new();
        let labels = tags
            .iter()
            .map(|t| match seen.iter().position(|s| s == t) {
                Some(p) => p as u8,
                None => {
                    seen.push(*t);
                    (seen.len() - 1) as u8
                }
            })
            .collect();
        Partition { labels }
    }

    /// Builds a partition from blocks of 1-based elements covering `{1..k}`.
    pub fn from_blocks(blocks: &[Vec<usize>]) -> Result<Self> {
        let k: usize = blocks.iter().map(Vec::len).sum();
        if k == 0 {
            return Err(Error::invalid("a partition needs at least one element"));
        }
        let mut tags = vec![usize::MAX; k];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::invalid("empty block"));
            }
            for &e in block {
                if e == 0 || e > k {
                    return Err(Error::invalid(format!("element {e} outside 1..{k}")));
                }
                if tags[e - 1] != usize::MAX {
                    return Err(Error::invalid(format!("element {e} appears twice")));
                }
                tags[e - 1] = b;
            }
        }
        Ok(Partition::canonical(&tags))
    }

    pub fn discrete(k: usize) -> Self {
        Partition {
            labels: (0..k as u8).collect(),
        }
    }

    pub fn one_block(k: usize) -> Self {
        Partition { labels: vec![0; k] }
    }

    pub fn k(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Block index (0-based) of position `i`.
    pub fn block_of(&self, i: usize) -> usize {
        self.labels[i] as usize
    }

    pub fn block_count(&self) -> usize {
        self.labels.iter().max().map_or(0, |&m| m as usize + 1)
    }

    /// Blocks as sorted lists of 0-based positions, ordered by first element.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.block_count()];
        for (i, &l) in self.labels.iter().enumerate() {
            blocks[l as usize].push(i);
        }
        blocks
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.block_count()];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }

    pub fn is_pairing(&self) -> bool {
        self.block_sizes().iter().all(|&s| s == 2)
    }

    /// True when every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        if self.k() != other.k() {
            return false;
        }
        let mut image = vec![u8::MAX; self.block_count()];
        for (&a, &b) in self.labels.iter().zip(&other.labels) {
            let slot = &mut image[a as usize];
            if *slot == u8::MAX {
                *slot = b;
            } else if *slot != b {
                return false;
            }
        }
        true
    }

    /// The partition obtained by shifting positions cyclically: position `i`
    /// of the result is position `(i + shift) % k` of `self`.
    pub fn rotated(&self, shift: usize) -> Partition {
        let k = self.k();
        let tags: Vec<u8> = (0..k).map(|i| self.labels[(i + shift) % k]).collect();
        Partition::canonical(&tags)
    }

    /// Smallest rotation in label order; a key for trace-cyclic quantities.
    pub fn min_rotation(&self) -> Partition {
        (1..self.k())
            .map(|s| self.rotated(s))
            .fold(self.clone(), |best, r| if r < best { r } else { best })
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for block in self.blocks() {
            let items: Vec<String> = block.iter().map(|e| (e + 1).to_string()).collect();
            write!(f, "{{{}}}", items.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Parses `{1,8,10}{2,4}{3,5}{6,7,9}`; blocks may come in any order and
    /// whitespace is ignored.
    fn from_str(s: &str) -> Result<Self> {
        let bytes = s.as_bytes();
        let mut pos = 0;
        let skip_ws = |pos: &mut usize| {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
        };
        let err = |pos: usize, msg: &str| Error::Parse {
            pos,
            msg: msg.to_string(),
        };
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut starts: Vec<usize> = Vec::new();
        skip_ws(&mut pos);
        if pos == bytes.len() {
            return Err(err(pos, "empty input"));
        }
        while pos < bytes.len() {
            if bytes[pos] != b'{' {
                return Err(err(pos, "expected '{'"));
            }
            starts.push(pos);
            pos += 1;
            let mut block = Vec::new();
            loop {
                skip_ws(&mut pos);
                let start = pos;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                if start == pos {
                    return Err(err(pos, "expected a positive integer"));
                }
                let v: usize = s[start..pos]
                    .parse()
                    .map_err(|_| err(start, "integer out of range"))?;
                if v == 0 {
                    return Err(err(start, "elements start at 1"));
                }
                block.push(v);
                skip_ws(&mut pos);
                match bytes.get(pos) {
                    Some(b',') => pos += 1,
                    Some(b'}') => {
                        pos += 1;
                        break;
                    }
                    _ => return Err(err(pos, "expected ',' or '}'")),
                }
            }
            blocks.push(block);
            skip_ws(&mut pos);
        }
        let k: usize = blocks.iter().map(Vec::len).sum();
        let mut seen = vec![false; k + 1];
        for (block, &start) in blocks.iter().zip(&starts) {
            for &e in block {
                if e > k {
                    return Err(err(start, &format!("element {e} exceeds ground-set size {k}")));
                }
                if seen[e] {
                    return Err(err(start, &format!("element {e} appears twice")));
                }
                seen[e] = true;
            }
        }
        Partition::from_blocks(&blocks)
    }
}

/// Lexicographic restricted-growth enumeration of `Part(k)`.
#[derive(Clone, Debug)]
pub struct Partitions {
    labels: Vec<u8>,
    // prefix_max[i] = max(labels[..=i])
    prefix_max: Vec<u8>,
    done: bool,
}

impl Partitions {
    fn new(k: usize) -> Self {
        Partitions {
            labels: vec![0; k],
            prefix_max: vec![0; k],
            done: k == 0,
        }
    }

    fn advance(&mut self) {
        let k = self.labels.len();
        for i in (1..k).rev() {
            if self.labels[i] <= self.prefix_max[i - 1] {
                self.labels[i] += 1;
                self.prefix_max[i] = self.prefix_max[i - 1].max(self.labels[i]);
                for j in i + 1..k {
                    self.labels[j] = 0;
                    self.prefix_max[j] = self.prefix_max[i];
                }
                return;
            }
        }
        self.done = true;
    }
}

impl Iterator for Partitions {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        if self.done {
            return None;
        }
        let out = Partition {
            labels: self.labels.clone(),
        };
        self.advance();
        Some(out)
    }
}

/// All partitions of `{1..k}`, with the default cap [`K_MAX`].
pub fn enumerate_partitions(k: usize) -> Result<Partitions> {
    enumerate_partitions_capped(k, K_MAX)
}

pub fn enumerate_partitions_capped(k: usize, cap: usize) -> Result<Partitions> {
    if k == 0 || k > cap {
        return Err(Error::Bounds {
            what: "k",
            value: k,
            cap_name: "K_MAX",
            cap,
        });
    }
    Ok(Partitions::new(k))
}

/// All pairings of `{1..k}` in restricted-growth order.
pub fn enumerate_pairings(k: usize) -> Result<std::vec::IntoIter<Partition>> {
    if k % 2 == 1 {
        return Err(Error::invalid(format!("pairings need an even size, got {k}")));
    }
    if k == 0 || k > K_MAX {
        return Err(Error::Bounds {
            what: "k",
            value: k,
            cap_name: "K_MAX",
            cap: K_MAX,
        });
    }
    fn rec(tags: &mut Vec<usize>, next_tag: usize, out: &mut Vec<Partition>) {
        let Some(first) = tags.iter().position(|&t| t == usize::MAX) else {
            out.push(Partition::canonical(tags));
            return;
        };
        tags[first] = next_tag;
        for j in first + 1..tags.len() {
            if tags[j] == usize::MAX {
                tags[j] = next_tag;
                rec(tags, next_tag + 1, out);
                tags[j] = usize::MAX;
            }
        }
        tags[first] = usize::MAX;
    }
    let mut out = Vec::new();
    rec(&mut vec![usize::MAX; k], 0, &mut out);
    out.sort();
    Ok(out.into_iter())
}

/// True iff no `x<y<z<t` has `x~z`, `y~t` and `x` not related to `y`.
///
/// Stack scan: a block that reappears must be the innermost open block.
pub fn is_noncrossing(pi: &Partition) -> bool {
    let k = pi.k();
    let mut last = vec![0usize; pi.block_count()];
    for i in 0..k {
        last[pi.block_of(i)] = i;
    }
    let mut open: Vec<usize> = Vec::new();
    let mut started = vec![false; pi.block_count()];
    for i in 0..k {
        let b = pi.block_of(i);
        if started[b] {
            if open.last() != Some(&b) {
                return false;
            }
            if last[b] == i {
                open.pop();
            }
        } else {
            started[b] = true;
            if last[b] != i {
                open.push(b);
            }
        }
    }
    true
}

fn blocks_cross(a: &[usize], b: &[usize]) -> bool {
    // Merge the two sorted blocks and count alternations of membership.
    let (mut i, mut j) = (0, 0);
    let mut runs = 0;
    let mut prev: Option<bool> = None;
    while i < a.len() || j < b.len() {
        let from_a = j == b.len() || (i < a.len() && a[i] < b[j]);
        if from_a {
            i += 1;
        } else {
            j += 1;
        }
        if prev != Some(from_a) {
            runs += 1;
            prev = Some(from_a);
        }
    }
    runs >= 4
}

/// Smallest non-crossing partition above `pi` in refinement order.
pub fn nc_closure(pi: &Partition) -> Partition {
    let mut blocks = pi.blocks();
    'outer: loop {
        for i in 0..blocks.len() {
            for j in i + 1..blocks.len() {
                if blocks_cross(&blocks[i], &blocks[j]) {
                    let other = blocks.swap_remove(j);
                    blocks[i].extend(other);
                    blocks[i].sort_unstable();
                    continue 'outer;
                }
            }
        }
        break;
    }
    let mut tags = vec![0usize; pi.k()];
    for (b, block) in blocks.iter().enumerate() {
        for &e in block {
            tags[e] = b;
        }
    }
    Partition::canonical(&tags)
}

/// The partition induced by a partition on a subset of its positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InducedPartition {
    support: Vec<usize>,
    partition: Partition,
}

impl InducedPartition {
    /// `support` holds sorted 0-based positions of `pi`.
    pub fn new(pi: &Partition, support: Vec<usize>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::invalid("empty support"));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) || *support.last().unwrap() >= pi.k() {
            return Err(Error::invalid("support must be sorted positions of the partition"));
        }
        let tags: Vec<u8> = support.iter().map(|&i| pi.labels[i]).collect();
        Ok(InducedPartition {
            partition: Partition::canonical(&tags),
            support,
        })
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// The induced partition with gaps collapsed, as a partition of `{1..|support|}`.
    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }
}

impl fmt::Display for InducedPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for block in self.partition.blocks() {
            let items: Vec<String> = block
                .iter()
                .map(|&e| (self.support[e] + 1).to_string())
                .collect();
            write!(f, "{{{}}}", items.join(","))?;
        }
        Ok(())
    }
}

/// Partitions induced by `pi` on the blocks of its non-crossing closure,
/// ordered by smallest element.
pub fn connected_components(pi: &Partition) -> Vec<InducedPartition> {
    nc_closure(pi)
        .blocks()
        .into_iter()
        .map(|support| InducedPartition::new(pi, support).expect("closure blocks are valid supports"))
        .collect()
}

pub fn is_connected(pi: &Partition) -> bool {
    nc_closure(pi).block_count() == 1
}

/// Repeatedly erases `l` when its cyclic successor in the surviving support
/// lies in the same block, sweeping left to right, until nothing changes.
///
/// The last surviving element is never erased, so a single block of size `k`
/// thins to the single point `{k}`.
pub fn thin(pi: &Partition) -> InducedPartition {
    let mut support: Vec<usize> = (0..pi.k()).collect();
    loop {
        let mut changed = false;
        let mut idx = 0;
        while idx < support.len() && support.len() >= 2 {
            let next = support[(idx + 1) % support.len()];
            if pi.labels[support[idx]] == pi.labels[next] {
                support.remove(idx);
                changed = true;
            } else {
                idx += 1;
            }
        }
        if !changed {
            break;
        }
    }
    InducedPartition::new(pi, support).expect("thin keeps a non-empty sorted support")
}

/// Block changes along the cyclic order of a partition's positions.
pub fn cyclic_block_changes(pi: &Partition) -> usize {
    let k = pi.k();
    (0..k)
        .filter(|&i| pi.labels[i] != pi.labels[(i + 1) % k])
        .count()
}

/// Sum over connected components of the block changes along each
/// component's own cyclic order (gaps collapsed).
pub fn kappa(pi: &Partition) -> usize {
    connected_components(pi)
        .iter()
        .map(|c| cyclic_block_changes(c.partition()))
        .sum()
}

/// Sum over components of the number of maximal runs when the component is
/// read linearly, without wrapping around. Kept only to contrast with
/// [`kappa`]; it is not invariant under rotation.
pub fn linear_run_count(pi: &Partition) -> usize {
    connected_components(pi)
        .iter()
        .map(|c| {
            let l = c.partition().labels();
            1 + l.windows(2).filter(|w| w[0] != w[1]).count()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    fn ten_point() -> Partition {
        p("{1,8,10}{2,4}{3,5}{6,7,9}")
    }

    #[test]
    fn enumeration_counts() {
        let bell = [1, 2, 5, 15, 52, 203, 877, 4140];
        for (k, &b) in bell.iter().enumerate() {
            assert_eq!(enumerate_partitions(k + 1).unwrap().count(), b);
        }
        assert_eq!(enumerate_partitions(1).unwrap().next().unwrap(), p("{1}"));
    }

    #[test]
    fn enumeration_is_lexicographic_and_valid() {
        let all: Vec<Partition> = enumerate_partitions(6).unwrap().collect();
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        for q in &all {
            let l: Vec<usize> = q.labels().iter().map(|&x| x as usize).collect();
            assert_eq!(&Partition::from_labels(&l).unwrap(), q);
        }
    }

    #[test]
    fn enumeration_bounds() {
        assert!(matches!(
            enumerate_partitions(13),
            Err(Error::Bounds { cap: 12, .. })
        ));
        assert!(enumerate_partitions(0).is_err());
    }

    #[test]
    fn parse_and_display() {
        let q = p(" {6,7,9} {2,4}{1,8,10}{3,5} ");
        assert_eq!(q, ten_point());
        assert_eq!(q.to_string(), "{1,8,10}{2,4}{3,5}{6,7,9}");
        assert_eq!(q.labels(), &[0, 1, 2, 1, 2, 3, 3, 0, 3, 0]);
    }

    #[test]
    fn parse_errors_are_positional() {
        for (s, pos) in [("{1,2}x", 5), ("{1,,2}", 3), ("{1,3}", 0), ("{1,2}{2}", 5), ("", 0), ("{0}", 1)] {
            match s.parse::<Partition>() {
                Err(Error::Parse { pos: got, .. }) => assert_eq!(got, pos, "{s}"),
                other => panic!("{s}: {other:?}"),
            }
        }
    }

    #[test]
    fn noncrossing_examples() {
        assert!(is_noncrossing(&p("{1,2}{3,4}")));
        assert!(!is_noncrossing(&p("{1,3}{2,4}")));
        assert!(!is_noncrossing(&ten_point()));
        assert!(is_noncrossing(&p("{1,4}{2,3}")));
        assert!(is_noncrossing(&p("{1,5}{2,3,4}{6}")));
    }

    #[test]
    fn closure_examples() {
        assert_eq!(nc_closure(&ten_point()), p("{1,6,7,8,9,10}{2,3,4,5}"));
        assert_eq!(nc_closure(&p("{1,3}{2,4}")), p("{1,2,3,4}"));
        let q = p("{1,4}{2,3}{5}");
        assert_eq!(nc_closure(&q), q);
    }

    #[test]
    fn component_examples() {
        let comps = connected_components(&ten_point());
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].support(), &[0, 5, 6, 7, 8, 9]);
        assert_eq!(comps[1].support(), &[1, 2, 3, 4]);
        assert_eq!(comps[0].to_string(), "{1,8,10}{6,7,9}");
        assert_eq!(connected_components(&p("{1,2,3}")).len(), 1);
        assert_eq!(connected_components(&p("{1,2}{3,4}")).len(), 2);
    }

    #[test]
    fn thin_examples() {
        let t = thin(&p("{1,2}{3,4}"));
        assert_eq!(t.support(), &[1, 3]);
        assert_eq!(t.partition(), &p("{1}{2}"));

        let q = p("{1,3}{2,4}");
        assert_eq!(thin(&q).partition(), &q);

        let t = thin(&ten_point());
        assert_eq!(t.len(), 8);
        assert_eq!(t.support(), &[0, 1, 2, 3, 4, 6, 7, 8]);
        let comps = connected_components(t.partition());
        assert_eq!(comps.iter().map(|c| c.len()).collect::<Vec<_>>(), vec![4, 4]);

        let t = thin(&Partition::one_block(5));
        assert_eq!(t.support(), &[4]);
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(kappa(&p("{1,2}{3,4}")), 0);
        assert_eq!(kappa(&p("{1,3}{2,4}")), 4);
        // Components read A D D A D A and B C B C cyclically.
        assert_eq!(kappa(&ten_point()), 8);
        assert_eq!(linear_run_count(&ten_point()), 9);
    }

    #[test]
    fn pairings() {
        assert_eq!(enumerate_pairings(2).unwrap().count(), 1);
        assert_eq!(enumerate_pairings(4).unwrap().count(), 3);
        assert_eq!(enumerate_pairings(6).unwrap().count(), 15);
        assert_eq!(enumerate_pairings(8).unwrap().count(), 105);
        assert!(matches!(enumerate_pairings(5), Err(Error::InvalidInput(_))));
        let filtered: Vec<Partition> = enumerate_partitions(6)
            .unwrap()
            .filter(|q| q.is_pairing())
            .collect();
        assert_eq!(enumerate_pairings(6).unwrap().collect::<Vec<_>>(), filtered);
    }

    #[test]
    fn refinement_and_rotation() {
        let q = ten_point();
        assert!(q.refines(&nc_closure(&q)));
        assert!(!nc_closure(&q).refines(&q));
        assert_eq!(p("{1,2}{3}").rotated(1), p("{1,3}{2}"));
        assert_eq!(p("{1}{2,3}").min_rotation(), p("{1,2}{3}"));
    }
}
