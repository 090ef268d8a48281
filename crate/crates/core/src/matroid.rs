//! Matroids given by independence oracles.
//!
//! Four families ship: uniform, partition, graphic and explicitly listed.
//! Every query is answered from scratch (graphic independence rebuilds a
//! union-find per call), so a [`Matroid`] is immutable and freely shared
//! across threads.
//!
//! Greedy tie-breaking is by ascending element id among equal weights, and
//! zero-weight elements are still added when independent, so the greedy
//! output is always a basis of the restriction to the candidates.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::set::ElementSet;

/// Explicit families are checked against the matroid axioms up to this size.
pub const EXPLICIT_VALIDATION_LIMIT: usize = 12;

/// One block of a partition matroid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub elements: Vec<usize>,
    pub capacity: usize,
}

/// Serializable description of a matroid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MatroidKind {
    Uniform {
        k: usize,
        rank: usize,
    },
    Partition {
        blocks: Vec<Block>,
    },
    Graphic {
        vertices: usize,
        edges: Vec<(usize, usize)>,
    },
    Explicit {
        k: usize,
        independent: Vec<Vec<usize>>,
    },
}

#[derive(Debug, Clone)]
enum Oracle {
    Uniform { rank: usize },
    Partition { blocks: Vec<(ElementSet, usize)> },
    Graphic { vertices: usize, edges: Vec<(usize, usize)> },
    Explicit { family: HashSet<u64> },
}

/// A matroid over elements `0..k`, optionally restricted to a subset.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MatroidKind", into = "MatroidKind")]
pub struct Matroid {
    kind: MatroidKind,
    k: usize,
    ground: ElementSet,
    oracle: Oracle,
}

impl PartialEq for Matroid {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.ground == other.ground
    }
}

impl TryFrom<MatroidKind> for Matroid {
    type Error = Error;

    fn try_from(kind: MatroidKind) -> Result<Self> {
        Matroid::new(kind)
    }
}

impl From<Matroid> for MatroidKind {
    fn from(m: Matroid) -> Self {
        m.kind
    }
}

impl Matroid {
    /// Validates a description and builds the oracle.
    pub fn new(kind: MatroidKind) -> Result<Self> {
        Self::build(kind, true)
    }

    /// Like [`Matroid::new`] but skips the exhaustive axiom check on
    /// explicit families. Intended for fixtures that are known to be valid.
    pub fn new_unchecked(kind: MatroidKind) -> Result<Self> {
        Self::build(kind, false)
    }

    pub fn uniform(k: usize, rank: usize) -> Result<Self> {
        Self::new(MatroidKind::Uniform { k, rank })
    }

    pub fn partition(blocks: Vec<(Vec<usize>, usize)>) -> Result<Self> {
        Self::new(MatroidKind::Partition {
            blocks: blocks
                .into_iter()
                .map(|(elements, capacity)| Block { elements, capacity })
                .collect(),
        })
    }

    pub fn graphic(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        Self::new(MatroidKind::Graphic { vertices, edges })
    }

    pub fn explicit(k: usize, independent: Vec<Vec<usize>>) -> Result<Self> {
        Self::new(MatroidKind::Explicit { k, independent })
    }

    fn build(kind: MatroidKind, validate: bool) -> Result<Self> {
        let (k, oracle) = match &kind {
            MatroidKind::Uniform { k, rank } => {
                check_size(*k)?;
                if rank > k {
                    return Err(Error::InvalidMatroid(format!(
                        "uniform rank {rank} exceeds ground size {k}"
                    )));
                }
                (*k, Oracle::Uniform { rank: *rank })
            }
            MatroidKind::Partition { blocks } => {
                let k: usize = blocks.iter().map(|b| b.elements.len()).sum();
                check_size(k)?;
                let mut seen = ElementSet::EMPTY;
                let mut masks = Vec::with_capacity(blocks.len());
                for b in blocks {
                    let mut mask = ElementSet::EMPTY;
                    for &e in &b.elements {
                        if e >= k {
                            return Err(Error::InvalidMatroid(format!(
                                "partition element {e} outside 0..{k}"
                            )));
                        }
                        if seen.contains(e) {
                            return Err(Error::InvalidMatroid(format!(
                                "element {e} appears in two partition blocks"
                            )));
                        }
                        seen.insert(e);
                        mask.insert(e);
                    }
                    masks.push((mask, b.capacity));
                }
                (k, Oracle::Partition { blocks: masks })
            }
            MatroidKind::Graphic { vertices, edges } => {
                check_size(edges.len())?;
                if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= *vertices || v >= *vertices)
                {
                    return Err(Error::InvalidMatroid(format!(
                        "edge ({u}, {v}) has an endpoint outside 0..{vertices}"
                    )));
                }
                (
                    edges.len(),
                    Oracle::Graphic {
                        vertices: *vertices,
                        edges: edges.clone(),
                    },
                )
            }
            MatroidKind::Explicit { k, independent } => {
                check_size(*k)?;
                let mut family = HashSet::with_capacity(independent.len());
                for set in independent {
                    family.insert(ElementSet::try_from_ids(set, *k)?.bits());
                }
                if validate && *k <= EXPLICIT_VALIDATION_LIMIT {
                    validate_family(*k, &family)?;
                }
                (*k, Oracle::Explicit { family })
            }
        };
        Ok(Matroid {
            kind,
            k,
            ground: ElementSet::full(k),
            oracle,
        })
    }

    /// Size of the underlying element id space (ids are `0..k`).
    pub fn k(&self) -> usize {
        self.k
    }

    /// Ground set, i.e. the restriction set when one is present.
    pub fn ground(&self) -> ElementSet {
        self.ground
    }

    pub fn kind(&self) -> &MatroidKind {
        &self.kind
    }

    pub fn is_restricted(&self) -> bool {
        self.ground != ElementSet::full(self.k)
    }

    fn check_members(&self, s: ElementSet) -> Result<()> {
        if let Some(e) = s.first_at_or_above(self.k) {
            return Err(Error::ElementOutOfRange {
                element: e,
                size: self.k,
            });
        }
        if let Some(e) = s.difference(self.ground).iter().next() {
            return Err(Error::OutsideGround(e));
        }
        Ok(())
    }

    pub fn is_independent(&self, s: ElementSet) -> Result<bool> {
        self.check_members(s)?;
        Ok(self.independent_unchecked(s))
    }

    /// Independence test without range checks; `s` must be within the ground set.
    #[inline]
    pub(crate) fn independent_unchecked(&self, s: ElementSet) -> bool {
        match &self.oracle {
            Oracle::Uniform { rank } => s.len() <= *rank,
            Oracle::Partition { blocks } => blocks
                .iter()
                .all(|&(mask, cap)| s.intersection(mask).len() <= cap),
            Oracle::Graphic { vertices, edges } => is_forest(*vertices, edges, s),
            Oracle::Explicit { family } => family.contains(&s.bits()),
        }
    }

    /// Size of a largest independent subset of `s`.
    pub fn rank(&self, s: ElementSet) -> Result<usize> {
        self.check_members(s)?;
        let mut acc = ElementSet::EMPTY;
        for e in s.iter() {
            let next = acc.with(e);
            if self.independent_unchecked(next) {
                acc = next;
            }
        }
        Ok(acc.len())
    }

    /// Rank of the whole ground set.
    pub fn full_rank(&self) -> usize {
        self.rank(self.ground).expect("ground set is always in range")
    }

    /// The restriction `M | r`: same ids, ground set `r`.
    pub fn restrict(&self, r: ElementSet) -> Result<Matroid> {
        self.check_members(r)?;
        let mut m = self.clone();
        m.ground = r;
        Ok(m)
    }

    /// Max-weight independent subset of `candidates` by the matroid greedy.
    ///
    /// `weights` is indexed by element id and must cover every candidate.
    /// Weights may be `+inf`; equal weights resolve by ascending id.
    pub fn max_weight_independent_set(
        &self,
        candidates: ElementSet,
        weights: &[f64],
    ) -> Result<ElementSet> {
        self.check_members(candidates)?;
        for e in candidates.iter() {
            let w = *weights.get(e).ok_or_else(|| {
                Error::InvalidArgument(format!("no weight supplied for element {e}"))
            })?;
            if w.is_nan() || w < 0.0 {
                return Err(Error::InvalidWeight {
                    element: e,
                    weight: w,
                });
            }
        }
        Ok(self.greedy_unchecked(candidates, weights))
    }

    /// Greedy without validation. Weights must be non-negative and not NaN.
    pub(crate) fn greedy_unchecked(&self, candidates: ElementSet, weights: &[f64]) -> ElementSet {
        let mut order = [(0.0f64, 0usize); ElementSet::CAPACITY];
        let mut n = 0;
        for e in candidates.iter() {
            // normalises -0.0 so it ties with 0.0
            order[n] = (weights[e] + 0.0, e);
            n += 1;
        }
        let order = &mut order[..n];
        order.sort_unstable_by(|a, b| match b.0.total_cmp(&a.0) {
            Ordering::Equal => a.1.cmp(&b.1),
            o => o,
        });
        let mut acc = ElementSet::EMPTY;
        for &(_, e) in order.iter() {
            let next = acc.with(e);
            if self.independent_unchecked(next) {
                acc = next;
            }
        }
        acc
    }

    /// Greedy over a precomputed order (heaviest first). Equivalent to
    /// [`Matroid::greedy_unchecked`] when `order` sorts by descending weight
    /// with ascending id on ties.
    #[inline]
    pub(crate) fn greedy_in_order(&self, order: &[usize], candidates: ElementSet) -> ElementSet {
        let mut acc = ElementSet::EMPTY;
        for &e in order {
            if candidates.contains(e) {
                let next = acc.with(e);
                if self.independent_unchecked(next) {
                    acc = next;
                }
            }
        }
        acc
    }

    /// Strong basis exchange: a bijection `sigma: i1 -> i2` such that
    /// `i1 - i + sigma(i)` is independent for every `i`, fixing shared
    /// elements.
    ///
    /// Built as a perfect matching (augmenting paths) in the bipartite graph
    /// of legal single swaps between `i1 \ i2` and `i2 \ i1`.
    pub fn exchange_bijection(&self, i1: ElementSet, i2: ElementSet) -> Result<ExchangeBijection> {
        if !self.is_independent(i1)? {
            return Err(Error::NotIndependent(i1));
        }
        if !self.is_independent(i2)? {
            return Err(Error::NotIndependent(i2));
        }
        if i1.len() != i2.len() {
            return Err(Error::SizeMismatch(i1.len(), i2.len()));
        }
        let left: Vec<usize> = i1.difference(i2).to_vec();
        let right: Vec<usize> = i2.difference(i1).to_vec();
        let adj: Vec<Vec<usize>> = left
            .iter()
            .map(|&i| {
                right
                    .iter()
                    .enumerate()
                    .filter(|&(_, &j)| self.independent_unchecked(i1.without(i).with(j)))
                    .map(|(r, _)| r)
                    .collect()
            })
            .collect();

        let mut match_right: Vec<Option<usize>> = vec![None; right.len()];
        for l in 0..left.len() {
            let mut visited = vec![false; right.len()];
            if !augment(l, &adj, &mut visited, &mut match_right) {
                return Err(Error::Internal(format!(
                    "no perfect exchange matching between {i1:?} and {i2:?}; \
                     the independence oracle does not describe a matroid"
                )));
            }
        }

        let mut pairs: Vec<(usize, usize)> = i1.intersection(i2).iter().map(|i| (i, i)).collect();
        for (r, l) in match_right.iter().enumerate() {
            let l = l.expect("perfect matching covers the right side");
            pairs.push((left[l], right[r]));
        }
        pairs.sort_unstable();
        Ok(ExchangeBijection { pairs })
    }
}

fn check_size(k: usize) -> Result<()> {
    if k > ElementSet::CAPACITY {
        return Err(Error::TooLarge {
            what: "matroid ground set",
            size: k as u128,
            limit: ElementSet::CAPACITY as u128,
        });
    }
    Ok(())
}

fn augment(
    l: usize,
    adj: &[Vec<usize>],
    visited: &mut [bool],
    match_right: &mut [Option<usize>],
) -> bool {
    for &r in &adj[l] {
        if visited[r] {
            continue;
        }
        visited[r] = true;
        if match_right[r].is_none_or(|other| augment(other, adj, visited, match_right)) {
            match_right[r] = Some(l);
            return true;
        }
    }
    false
}

/// Disjoint-set forest with path compression and union by rank.
struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    /// Returns false when `a` and `b` were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            Ordering::Less => self.parent[ra] = rb,
            Ordering::Greater => self.parent[rb] = ra,
            Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

fn is_forest(vertices: usize, edges: &[(usize, usize)], s: ElementSet) -> bool {
    if s.is_empty() {
        return true;
    }
    // a forest on n vertices has at most n - 1 edges
    if s.len() >= vertices {
        return false;
    }
    let mut uf = UnionFind::new(vertices);
    s.iter().all(|e| {
        let (u, v) = edges[e];
        uf.union(u, v)
    })
}

fn validate_family(k: usize, family: &HashSet<u64>) -> Result<()> {
    if !family.contains(&0) {
        return Err(Error::InvalidMatroid(
            "explicit family must contain the empty set".into(),
        ));
    }
    for &bits in family {
        let s = ElementSet::from_bits(bits);
        for e in s.iter() {
            if !family.contains(&s.without(e).bits()) {
                return Err(Error::InvalidMatroid(format!(
                    "hereditary axiom fails: {s:?} is listed but {:?} is not",
                    s.without(e)
                )));
            }
        }
    }
    // with heredity in place, augmentation reduces to |b| = |a| + 1
    let ground = ElementSet::full(k);
    for &a in family {
        let a = ElementSet::from_bits(a);
        for &b in family {
            let b = ElementSet::from_bits(b);
            if b.len() != a.len() + 1 {
                continue;
            }
            let ok = b
                .difference(a)
                .iter()
                .any(|e| family.contains(&a.with(e).bits()));
            if !ok {
                return Err(Error::InvalidMatroid(format!(
                    "augmentation axiom fails for {a:?} and {b:?}"
                )));
            }
        }
    }
    debug_assert!(family.iter().all(|&b| ElementSet::from_bits(b).is_subset(ground)));
    Ok(())
}

/// A bijection between two equal-size independent sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExchangeBijection {
    /// `(i, sigma(i))`, sorted by `i`.
    pub pairs: Vec<(usize, usize)>,
}

impl ExchangeBijection {
    pub fn image(&self, i: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.0 == i).map(|p| p.1)
    }

    pub fn preimage(&self, j: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.1 == j).map(|p| p.0)
    }

    /// Checks bijectivity, fixed shared elements and the exchange property.
    pub fn is_valid(&self, m: &Matroid, i1: ElementSet, i2: ElementSet) -> bool {
        let sources: ElementSet = self.pairs.iter().map(|p| p.0).collect();
        let targets: ElementSet = self.pairs.iter().map(|p| p.1).collect();
        if sources != i1 || targets != i2 || self.pairs.len() != i1.len() {
            return false;
        }
        self.pairs.iter().all(|&(i, j)| {
            (!i2.contains(i) || i == j)
                && m.is_independent(i1.without(i).with(j)).unwrap_or(false)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ids: &[usize]) -> ElementSet {
        ids.iter().copied().collect()
    }

    fn triangle() -> Matroid {
        // ab, bc, ca
        Matroid::graphic(3, vec![(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    #[test]
    fn independence_examples() {
        let u = Matroid::uniform(5, 2).unwrap();
        assert!(u.is_independent(set(&[0, 1])).unwrap());
        assert!(!u.is_independent(set(&[0, 1, 2])).unwrap());

        let g = triangle();
        assert!(g.is_independent(set(&[0, 1])).unwrap());
        assert!(!g.is_independent(set(&[0, 1, 2])).unwrap());

        let e = Matroid::explicit(3, vec![vec![], vec![0], vec![1], vec![2]]).unwrap();
        assert!(!e.is_independent(set(&[0, 2])).unwrap());
        assert!(e.is_independent(set(&[2])).unwrap());
    }

    #[test]
    fn out_of_range_ids_are_errors() {
        let u = Matroid::uniform(3, 1).unwrap();
        assert_eq!(
            u.is_independent(set(&[3])),
            Err(Error::ElementOutOfRange { element: 3, size: 3 })
        );
        assert!(u.rank(set(&[0, 5])).is_err());
    }

    #[test]
    fn rank_examples() {
        let u = Matroid::uniform(5, 2).unwrap();
        assert_eq!(u.rank(set(&[0, 1, 2, 3])).unwrap(), 2);
        assert_eq!(triangle().rank(set(&[0, 1, 2])).unwrap(), 2);
        assert_eq!(u.rank(ElementSet::EMPTY).unwrap(), 0);
        assert_eq!(triangle().rank(ElementSet::EMPTY).unwrap(), 0);
    }

    #[test]
    fn restriction() {
        let u = Matroid::uniform(4, 2).unwrap();
        let r = u.restrict(set(&[0, 1])).unwrap();
        assert!(r.is_independent(set(&[0, 1])).unwrap());
        assert_eq!(r.is_independent(set(&[2])), Err(Error::OutsideGround(2)));
        assert_eq!(r.full_rank(), u.rank(set(&[0, 1])).unwrap());

        let empty = u.restrict(ElementSet::EMPTY).unwrap();
        assert!(empty.is_independent(ElementSet::EMPTY).unwrap());
        assert_eq!(empty.full_rank(), 0);
        assert!(empty.is_independent(set(&[0])).is_err());

        let t = triangle().restrict(set(&[0, 1])).unwrap();
        assert_eq!(t.full_rank(), 2);
    }

    #[test]
    fn greedy_examples() {
        let u = Matroid::uniform(3, 1).unwrap();
        let got = u
            .max_weight_independent_set(ElementSet::full(3), &[0.2, 0.9, 0.5])
            .unwrap();
        assert_eq!(got, set(&[1]));

        let got = triangle()
            .max_weight_independent_set(ElementSet::full(3), &[1.0, 1.0, 1.0])
            .unwrap();
        assert_eq!(got, set(&[0, 1]));

        let p = Matroid::partition(vec![(vec![0, 1], 1), (vec![2], 1)]).unwrap();
        let got = p
            .max_weight_independent_set(ElementSet::full(3), &[0.3, 0.7, 0.1])
            .unwrap();
        assert_eq!(got, set(&[1, 2]));
    }

    #[test]
    fn greedy_includes_zero_weights_and_handles_infinity() {
        let u = Matroid::uniform(4, 3).unwrap();
        let got = u
            .max_weight_independent_set(ElementSet::full(4), &[0.0, 0.5, 0.0, 0.0])
            .unwrap();
        assert_eq!(got, set(&[0, 1, 2]));

        let inf = f64::INFINITY;
        let got = u
            .max_weight_independent_set(ElementSet::full(4), &[0.9, inf, 0.1, inf])
            .unwrap();
        assert_eq!(got, set(&[0, 1, 3]));
    }

    #[test]
    fn greedy_rejects_negative_weight() {
        let u = Matroid::uniform(2, 1).unwrap();
        assert_eq!(
            u.max_weight_independent_set(ElementSet::full(2), &[0.5, -0.1]),
            Err(Error::InvalidWeight {
                element: 1,
                weight: -0.1
            })
        );
        assert!(u
            .max_weight_independent_set(ElementSet::full(2), &[f64::NAN, 0.1])
            .is_err());
    }

    #[test]
    fn exchange_examples() {
        let u = Matroid::uniform(4, 2).unwrap();
        let b = u.exchange_bijection(set(&[0, 1]), set(&[2, 3])).unwrap();
        assert!(b.is_valid(&u, set(&[0, 1]), set(&[2, 3])));

        let id = u.exchange_bijection(set(&[0, 1]), set(&[0, 1])).unwrap();
        assert_eq!(id.pairs, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn exchange_errors() {
        let u = Matroid::uniform(4, 2).unwrap();
        assert_eq!(
            u.exchange_bijection(set(&[0]), set(&[1, 2])),
            Err(Error::SizeMismatch(1, 2))
        );
        assert_eq!(
            u.exchange_bijection(set(&[0, 1, 2]), set(&[1, 2])),
            Err(Error::NotIndependent(set(&[0, 1, 2])))
        );
    }

    #[test]
    fn explicit_axioms_are_validated() {
        // missing {0} breaks heredity
        assert!(Matroid::explicit(2, vec![vec![], vec![1], vec![0, 1]]).is_err());
        // {0,1} and {2} with nothing else: augmentation fails for {2} vs {0,1}
        assert!(Matroid::explicit(
            3,
            vec![vec![], vec![0], vec![1], vec![2], vec![0, 1]]
        )
        .is_err());
        // opt-out accepts it
        assert!(Matroid::new_unchecked(MatroidKind::Explicit {
            k: 3,
            independent: vec![vec![], vec![0], vec![1], vec![2], vec![0, 1]],
        })
        .is_ok());
    }

    #[test]
    fn constructor_errors() {
        assert!(Matroid::uniform(3, 4).is_err());
        assert!(Matroid::graphic(2, vec![(0, 2)]).is_err());
        assert!(Matroid::partition(vec![(vec![0, 1], 1), (vec![1], 1)]).is_err());
        assert!(Matroid::partition(vec![(vec![0, 3], 1)]).is_err());
    }

    #[test]
    fn self_loop_is_dependent() {
        let g = Matroid::graphic(2, vec![(0, 0), (0, 1)]).unwrap();
        assert!(!g.is_independent(set(&[0])).unwrap());
        assert_eq!(g.rank(set(&[0, 1])).unwrap(), 1);
    }

    #[test]
    fn serde_round_trip() {
        let json = r#"{"kind":"partition","blocks":[{"elements":[0,1],"capacity":1},{"elements":[2],"capacity":1}]}"#;
        let m: Matroid = serde_json::from_str(json).unwrap();
        assert_eq!(m.k(), 3);
        let again: Matroid = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(again, m);
        assert!(serde_json::from_str::<Matroid>(r#"{"kind":"uniform","k":2,"rank":3}"#).is_err());
    }
}
