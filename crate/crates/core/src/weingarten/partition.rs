//! Set partitions of `{1, …, n}` and the refinement lattice.

use std::fmt;

use crate::error::{invalid, Error, Result};

/// Largest ground set [`enumerate_partitions`] accepts (Bell(8) = 4140).
pub const MAX_GROUND_SIZE: usize = 8;

/// Partition stored as a restricted growth string: `labels[i]` is the 0-based block of
/// element `i`, blocks numbered in order of their smallest element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetPartition {
    labels: Vec<u8>,
}

impl SetPartition {
    /// Canonicalizes arbitrary block labels.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map: Vec<(usize, u8)> = Vec::new();
        let labels = labels
            .iter()
            .map(|&l| match map.iter().find(|(k, _)| *k == l) {
                Some(&(_, v)) => v,
                None => {
                    let v = map.len() as u8;
                    map.push((l, v));
                    v
                }
            })
            .collect();
        Self { labels }
    }

    /// Builds from 0-based blocks covering `0..n` exactly once.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut labels = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return invalid("empty block");
            }
            for &e in block {
                if e >= n || labels[e] != usize::MAX {
                    return invalid(format!("element {e} missing from range or repeated"));
                }
                labels[e] = b;
            }
        }
        if labels.contains(&usize::MAX) {
            return invalid("blocks do not cover the ground set");
        }
        Ok(Self::from_labels(&labels))
    }

    /// `{{0, …, n−1}}`.
    pub fn full(n: usize) -> Self {
        Self { labels: vec![0; n] }
    }

    /// `{{0}, …, {n−1}}`.
    pub fn singletons(n: usize) -> Self {
        Self {
            labels: (0..n as u8).collect(),
        }
    }

    pub fn ground_size(&self) -> usize {
        self.labels.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.labels
            .iter()
            .map(|&l| l as usize + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i] as usize
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Blocks as sorted 0-based element lists, ordered by smallest element.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.num_blocks()];
        for (i, &l) in self.labels.iter().enumerate() {
            blocks[l as usize].push(i);
        }
        blocks
    }
}

impl fmt::Display for SetPartition {
    /// 1-based, e.g. `{{1,2},{3,4}}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks()
            .iter()
            .map(|b| {
                let inner: Vec<String> = b.iter().map(|e| (e + 1).to_string()).collect();
                format!("{{{}}}", inner.join(","))
            })
            .collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// Partitions of a 4-element set in the order σ₁ … σ₁₅ used for fourth moments.
const ORDER4: [[u8; 4]; 15] = [
    [0, 0, 0, 0],
    [0, 0, 0, 1],
    [0, 0, 1, 0],
    [0, 1, 0, 0],
    [0, 1, 1, 1],
    [0, 0, 1, 1],
    [0, 1, 1, 0],
    [0, 1, 0, 1],
    [0, 0, 1, 2],
    [0, 1, 0, 2],
    [0, 1, 2, 0],
    [0, 1, 2, 1],
    [0, 1, 1, 2],
    [0, 1, 2, 2],
    [0, 1, 2, 3],
];

/// All Bell(n) partitions, coarsest first: by block count, then restricted-growth string.
/// For `n = 4` the order is the fixed σ₁ … σ₁₅ listing.
pub fn enumerate_partitions(n: usize) -> Result<Vec<SetPartition>> {
    if n == 0 {
        return invalid("ground set must be nonempty");
    }
    if n > MAX_GROUND_SIZE {
        return Err(Error::TooLarge {
            what: "partition ground size",
            value: n,
            max: MAX_GROUND_SIZE,
        });
    }
    if n == 4 {
        return Ok(ORDER4
            .iter()
            .map(|l| SetPartition { labels: l.to_vec() })
            .collect());
    }
    let mut out = Vec::new();
    let mut labels = vec![0u8; n];
    rgs(&mut labels, 1, 0, &mut out);
    out.sort_by_key(|p| (p.num_blocks(), p.labels.clone()));
    Ok(out)
}

fn rgs(labels: &mut [u8], pos: usize, max: u8, out: &mut Vec<SetPartition>) {
    if pos == labels.len() {
        out.push(SetPartition {
            labels: labels.to_vec(),
        });
        return;
    }
    for l in 0..=max + 1 {
        labels[pos] = l;
        rgs(labels, pos + 1, max.max(l), out);
    }
}

fn same_ground(a: &SetPartition, b: &SetPartition) -> Result<()> {
    if a.ground_size() != b.ground_size() {
        return Err(Error::DimensionMismatch {
            expected: a.ground_size(),
            got: b.ground_size(),
        });
    }
    Ok(())
}

/// Finest partition coarser than both (the lattice join): transitive closure of block unions.
pub fn common_coarsening(a: &SetPartition, b: &SetPartition) -> Result<SetPartition> {
    same_ground(a, b)?;
    let n = a.ground_size();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for part in [a, b] {
        let mut first = vec![usize::MAX; part.num_blocks()];
        for i in 0..n {
            let l = part.label(i);
            if first[l] == usize::MAX {
                first[l] = i;
            } else {
                let (x, y) = (find(&mut parent, first[l]), find(&mut parent, i));
                parent[x.max(y)] = x.min(y);
            }
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    Ok(SetPartition::from_labels(&roots))
}

/// Coarsest partition finer than both (the lattice meet): nonempty blockwise intersections.
pub fn common_refinement(a: &SetPartition, b: &SetPartition) -> Result<SetPartition> {
    same_ground(a, b)?;
    let pairs: Vec<usize> = (0..a.ground_size())
        .map(|i| a.label(i) * 256 + b.label(i))
        .collect();
    Ok(SetPartition::from_labels(&pairs))
}

/// Whether every block of `fine` lies inside a block of `coarse`.
pub fn refines(fine: &SetPartition, coarse: &SetPartition) -> bool {
    if fine.ground_size() != coarse.ground_size() {
        return false;
    }
    let mut image = vec![usize::MAX; fine.num_blocks()];
    (0..fine.ground_size()).all(|i| {
        let slot = &mut image[fine.label(i)];
        if *slot == usize::MAX {
            *slot = coarse.label(i);
        }
        *slot == coarse.label(i)
    })
}

/// Möbius function of the partition lattice,
/// `μ(fine, coarse) = Π_{B ∈ coarse} (−1)^{n_B−1} (n_B−1)!` with `n_B` fine blocks inside `B`.
pub fn mobius(fine: &SetPartition, coarse: &SetPartition) -> Result<i64> {
    if !refines(fine, coarse) {
        return Err(Error::NotRefinement);
    }
    let mut inside = vec![0usize; coarse.num_blocks()];
    let mut seen = vec![false; fine.num_blocks()];
    for i in 0..fine.ground_size() {
        if !seen[fine.label(i)] {
            seen[fine.label(i)] = true;
            inside[coarse.label(i)] += 1;
        }
    }
    Ok(inside
        .iter()
        .map(|&m| {
            let fact: i64 = (1..m as i64).product();
            if m % 2 == 1 {
                fact
            } else {
                -fact
            }
        })
        .product())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(blocks: &[&[usize]], n: usize) -> SetPartition {
        let b: Vec<Vec<usize>> = blocks
            .iter()
            .map(|b| b.iter().map(|e| e - 1).collect())
            .collect();
        SetPartition::from_blocks(n, &b).unwrap()
    }

    #[test]
    fn bell_numbers() {
        let bell = [1, 2, 5, 15, 52, 203, 877, 4140];
        for (n, &b) in (1..=8).zip(&bell) {
            let parts = enumerate_partitions(n).unwrap();
            assert_eq!(parts.len(), b);
            let mut uniq = parts.clone();
            uniq.sort();
            uniq.dedup();
            assert_eq!(uniq.len(), b);
        }
        assert!(enumerate_partitions(9).is_err());
        assert!(enumerate_partitions(0).is_err());
    }

    #[test]
    fn order_four_listing() {
        let parts = enumerate_partitions(4).unwrap();
        assert_eq!(parts[0], SetPartition::full(4));
        assert_eq!(parts[14], SetPartition::singletons(4));
        assert_eq!(parts[5], p(&[&[1, 2], &[3, 4]], 4));
        assert_eq!(parts[6], p(&[&[1, 4], &[2, 3]], 4));
        assert_eq!(parts[7], p(&[&[1, 3], &[2, 4]], 4));
        assert_eq!(parts[4].to_string(), "{{1},{2,3,4}}");
        let counts: Vec<usize> = parts.iter().map(|q| q.num_blocks()).collect();
        assert_eq!(counts, vec![1, 2, 2, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3, 4]);
    }

    #[test]
    fn small_orders() {
        let two = enumerate_partitions(2).unwrap();
        assert_eq!(
            two,
            vec![SetPartition::full(2), SetPartition::singletons(2)]
        );
        assert_eq!(
            enumerate_partitions(1).unwrap(),
            vec![SetPartition::full(1)]
        );
    }

    #[test]
    fn coarsening_examples() {
        let a = p(&[&[1, 2], &[3, 4]], 4);
        let b = p(&[&[2, 3], &[1], &[4]], 4);
        assert_eq!(common_coarsening(&a, &b).unwrap(), SetPartition::full(4));
        assert_eq!(common_coarsening(&a, &a).unwrap(), a);
        assert_eq!(
            common_coarsening(&SetPartition::singletons(4), &b).unwrap(),
            b
        );
        assert!(common_coarsening(&a, &SetPartition::full(3)).is_err());
    }

    #[test]
    fn refinement_examples() {
        let a = p(&[&[1, 2], &[3, 4]], 4);
        let b = p(&[&[1, 3], &[2, 4]], 4);
        assert_eq!(
            common_refinement(&a, &b).unwrap(),
            SetPartition::singletons(4)
        );
        assert_eq!(common_refinement(&a, &SetPartition::full(4)).unwrap(), a);
        assert!(refines(&SetPartition::singletons(4), &a));
        assert!(!refines(&a, &b));
    }

    #[test]
    fn mobius_examples() {
        let a = p(&[&[1, 2], &[3, 4]], 4);
        assert_eq!(mobius(&a, &a).unwrap(), 1);
        assert_eq!(
            mobius(&SetPartition::singletons(4), &SetPartition::full(4)).unwrap(),
            -6
        );
        assert_eq!(
            mobius(&SetPartition::singletons(2), &SetPartition::full(2)).unwrap(),
            -1
        );
        assert_eq!(mobius(&SetPartition::singletons(4), &a).unwrap(), 1);
        assert_eq!(
            mobius(&a, &SetPartition::singletons(4)),
            Err(Error::NotRefinement)
        );
    }

    /// Recursive definition: μ(x,x)=1, μ(x,y) = −Σ_{x≤z<y} μ(x,z).
    fn recursive_mobius(parts: &[SetPartition]) -> Vec<Vec<i64>> {
        let n = parts.len();
        let mut mu = vec![vec![0i64; n]; n];
        // Process targets from fine to coarse (more blocks first).
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(parts[i].num_blocks()));
        for &x in &order {
            for &y in &order {
                if x == y {
                    mu[x][y] = 1;
                } else if refines(&parts[x], &parts[y]) {
                    let s: i64 = order
                        .iter()
                        .filter(|&&z| {
                            z != y && refines(&parts[x], &parts[z]) && refines(&parts[z], &parts[y])
                        })
                        .map(|&z| mu[x][z])
                        .sum();
                    mu[x][y] = -s;
                }
            }
        }
        mu
    }

    #[test]
    fn mobius_matches_recursion_and_inverts_zeta() {
        for n in 1..=5 {
            let parts = enumerate_partitions(n).unwrap();
            let rec = recursive_mobius(&parts);
            let m = parts.len();
            for i in 0..m {
                for j in 0..m {
                    let closed = mobius(&parts[i], &parts[j]).unwrap_or(0);
                    assert_eq!(closed, rec[i][j], "n={n} {} {}", parts[i], parts[j]);
                }
            }
            // ζ·μ = I
            for i in 0..m {
                for j in 0..m {
                    let s: i64 = (0..m)
                        .map(|k| {
                            i64::from(refines(&parts[i], &parts[k]))
                                * mobius(&parts[k], &parts[j]).unwrap_or(0)
                        })
                        .sum();
                    assert_eq!(s, i64::from(i == j));
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_partition(n: usize) -> impl Strategy<Value = SetPartition> {
            proptest::collection::vec(0usize..n, n).prop_map(|l| SetPartition::from_labels(&l))
        }

        proptest! {
            #[test]
            fn join_lattice_laws(a in arb_partition(6), b in arb_partition(6), c in arb_partition(6)) {
                let j = |x: &SetPartition, y: &SetPartition| common_coarsening(x, y).unwrap();
                prop_assert_eq!(j(&a, &a), a.clone());
                prop_assert_eq!(j(&a, &b), j(&b, &a));
                prop_assert_eq!(j(&j(&a, &b), &c), j(&a, &j(&b, &c)));
                prop_assert_eq!(j(&SetPartition::singletons(6), &a), a.clone());
                prop_assert!(refines(&a, &j(&a, &b)) && refines(&b, &j(&a, &b)));
            }

            #[test]
            fn meet_lattice_laws(a in arb_partition(6), b in arb_partition(6)) {
                let m = common_refinement(&a, &b).unwrap();
                prop_assert!(refines(&m, &a) && refines(&m, &b));
                prop_assert_eq!(common_refinement(&b, &a).unwrap(), m.clone());
                prop_assert_eq!(common_refinement(&SetPartition::full(6), &a).unwrap(), a.clone());
            }

            #[test]
            fn from_labels_is_canonical(a in arb_partition(7)) {
                prop_assert_eq!(SetPartition::from_blocks(7, &a.blocks()).unwrap(), a.clone());
            }
        }
    }
}
