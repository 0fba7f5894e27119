//! Two-level Boolean minimization (Quine–McCluskey with an exact cover).
//!
//! The function to minimize is given by its ON-set; every other assignment
//! is OFF (there are no don't-cares). Prime implicants are generated by the
//! usual tabular merging, then a minimum-cardinality cover is chosen by
//! Petrick's method after removing essential primes. When the Petrick
//! expansion grows past a limit the same optimum is found by branch and
//! bound instead. Among minimum covers the lexicographically smallest one,
//! comparing the sorted implicant encodings, is returned.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QmError {
    #[error("{num_vars} variables exceed the configured limit of {cap}")]
    TooManyVariables { num_vars: usize, cap: usize },
    #[error("the ON-set is empty")]
    EmptyOnSet,
    #[error("assignment {0:#x} has bits beyond the variable count")]
    OutOfRange(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QmOptions {
    /// Largest accepted variable count.
    pub max_vars: usize,
    /// Partial products kept by Petrick's expansion before switching to
    /// branch and bound.
    pub petrick_limit: usize,
}

impl Default for QmOptions {
    fn default() -> Self {
        QmOptions {
            max_vars: 24,
            petrick_limit: 512,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Literal {
    Negative,
    Positive,
    Free,
}

/// A product term over `num_vars` variables: variables in `free` are
/// unconstrained, the others must equal the corresponding bit of `value`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Implicant {
    value: u64,
    free: u64,
    num_vars: usize,
}

impl Implicant {
    pub fn new(value: u64, free: u64, num_vars: usize) -> Self {
        assert!(value & free == 0, "free variables carry no value");
        Implicant {
            value,
            free,
            num_vars,
        }
    }

    pub fn minterm(point: u64, num_vars: usize) -> Self {
        Implicant::new(point, 0, num_vars)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn free_mask(&self) -> u64 {
        self.free
    }

    pub fn literal(&self, var: usize) -> Literal {
        let bit = 1u64 << var;
        if self.free & bit != 0 {
            Literal::Free
        } else if self.value & bit != 0 {
            Literal::Positive
        } else {
            Literal::Negative
        }
    }

    /// Variables appearing as positive literals, ascending.
    pub fn positives(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_vars).filter(|&v| self.literal(v) == Literal::Positive)
    }

    pub fn num_literals(&self) -> usize {
        self.num_vars - self.free.count_ones() as usize
    }

    pub fn covers(&self, point: u64) -> bool {
        point & !self.free == self.value
    }

    /// One character per variable, variable 0 first: `-` free, `0`
    /// negative, `1` positive.
    pub fn encoding(&self) -> String {
        (0..self.num_vars)
            .map(|v| match self.literal(v) {
                Literal::Free => '-',
                Literal::Negative => '0',
                Literal::Positive => '1',
            })
            .collect()
    }

    fn rank(&self, var: usize) -> u8 {
        match self.literal(var) {
            Literal::Free => 0,
            Literal::Negative => 1,
            Literal::Positive => 2,
        }
    }
}

/// Orders like the encodings compare as strings.
impl Ord for Implicant {
    fn cmp(&self, other: &Self) -> Ordering {
        let shared = self.num_vars.min(other.num_vars);
        (0..shared)
            .map(|v| self.rank(v).cmp(&other.rank(v)))
            .find(|o| o.is_ne())
            .unwrap_or_else(|| self.num_vars.cmp(&other.num_vars))
    }
}

impl PartialOrd for Implicant {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Implicant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Implicant({})", self.encoding())
    }
}

/// All prime implicants of the function whose ON-set is `on_set`, sorted.
pub fn prime_implicants(on_set: &[u64], num_vars: usize) -> Vec<Implicant> {
    let mut current: HashSet<(u64, u64)> = on_set.iter().map(|&p| (p, 0)).collect();
    let mut primes = Vec::new();
    while !current.is_empty() {
        let mut next = HashSet::new();
        let mut merged = HashSet::new();
        for &(value, free) in &current {
            for var in 0..num_vars {
                let bit = 1u64 << var;
                if free & bit != 0 || value & bit != 0 {
                    continue;
                }
                if current.contains(&(value | bit, free)) {
                    next.insert((value, free | bit));
                    merged.insert((value, free));
                    merged.insert((value | bit, free));
                }
            }
        }
        primes.extend(
            current
                .iter()
                .filter(|t| !merged.contains(t))
                .map(|&(v, f)| Implicant::new(v, f, num_vars)),
        );
        current = next;
    }
    primes.sort();
    primes
}

/// Minimum prime cover of the ON-set, lexicographically smallest among
/// minimum covers, returned sorted.
pub fn minimal_dnf(
    on_set: &[u64],
    num_vars: usize,
    options: &QmOptions,
) -> Result<Vec<Implicant>, QmError> {
    if num_vars > options.max_vars.min(64) {
        return Err(QmError::TooManyVariables {
            num_vars,
            cap: options.max_vars.min(64),
        });
    }
    if on_set.is_empty() {
        return Err(QmError::EmptyOnSet);
    }
    if let Some(&bad) = on_set
        .iter()
        .find(|&&p| num_vars < 64 && p >> num_vars != 0)
    {
        return Err(QmError::OutOfRange(bad));
    }
    let mut points = on_set.to_vec();
    points.sort_unstable();
    points.dedup();
    let primes = prime_implicants(&points, num_vars);
    let chart: Vec<Bits> = primes
        .iter()
        .map(|p| Bits::from_fn(points.len(), |i| p.covers(points[i])))
        .collect();
    let chosen = minimum_cover(&chart, points.len(), options.petrick_limit);
    Ok(chosen.into_iter().map(|i| primes[i]).collect())
}

/// Exact minimum cover of `universe` elements by the given sets, returning
/// the lexicographically smallest sorted index list among minimum covers.
/// Every element must be covered by some set.
pub(crate) fn minimum_cover(sets: &[Bits], universe: usize, petrick_limit: usize) -> Vec<usize> {
    let mut chosen = Vec::new();
    let mut uncovered = Bits::full(universe);
    let mut live: Vec<usize> = (0..sets.len()).collect();

    // Reduce to the cyclic core. None of these steps changes the
    // lexicographically first minimum cover:
    // - a set that is the only owner of some element is in every cover;
    // - an element whose owners include all owners of another element is
    //   covered whenever that one is, so it can be dropped;
    // - a set covering a subset of what a smaller-indexed set covers can
    //   be swapped for that set in any minimum cover, which makes the cover
    //   lexicographically smaller, so it is never needed.
    loop {
        live.retain(|&i| sets[i].intersects(&uncovered));
        let owners: Vec<(usize, Bits)> = uncovered
            .ones()
            .map(|e| (e, Bits::from_fn(live.len(), |k| sets[live[k]].get(e))))
            .collect();
        if let Some((_, only)) = owners.iter().find(|(_, o)| o.count() == 1) {
            let set = live[only.ones().next().expect("one owner")];
            chosen.push(set);
            uncovered = uncovered.difference(&sets[set]);
            continue;
        }
        let mut changed = false;
        for (a, (e, own_e)) in owners.iter().enumerate() {
            let dominated = owners.iter().enumerate().any(|(b, (_, own_f))| {
                b != a && own_f.is_subset_of(own_e) && (own_f != own_e || b < a)
            });
            if dominated {
                uncovered.clear(*e);
                changed = true;
            }
        }
        if changed {
            continue;
        }
        let restricted: Vec<Bits> = live
            .iter()
            .map(|&i| sets[i].intersection(&uncovered))
            .collect();
        let before = live.len();
        let keep: Vec<bool> = (0..live.len())
            .map(|k| !(0..k).any(|j| restricted[k].is_subset_of(&restricted[j])))
            .collect();
        let mut flags = keep.iter();
        live.retain(|_| *flags.next().expect("same length"));
        if live.len() == before {
            break;
        }
    }
    if !uncovered.is_empty() {
        let candidates: Vec<(usize, Bits)> = live
            .iter()
            .map(|&i| (i, sets[i].intersection(&uncovered)))
            .collect();
        let elements: Vec<usize> = uncovered.ones().collect();
        let rest = petrick(&candidates, &elements, petrick_limit)
            .unwrap_or_else(|| branch_and_bound(&candidates, &elements));
        chosen.extend(rest);
    }
    chosen.sort_unstable();
    chosen
}

/// Petrick's method: multiply out the product of sums (one sum per element,
/// listing the candidates covering it) with absorption, then take the
/// smallest product. Gives up with `None` past `limit` partial products.
fn petrick(candidates: &[(usize, Bits)], elements: &[usize], limit: usize) -> Option<Vec<usize>> {
    let k = candidates.len();
    let mut clauses: Vec<Bits> = elements
        .iter()
        .map(|&e| Bits::from_fn(k, |c| candidates[c].1.get(e)))
        .collect();
    clauses.sort_by_key(Bits::count);
    clauses.dedup();
    let mut products = vec![Bits::new(k)];
    for clause in &clauses {
        let mut next = Vec::new();
        for p in &products {
            if p.intersects(clause) {
                next.push(p.clone());
            } else {
                for c in clause.ones() {
                    let mut q = p.clone();
                    q.set(c);
                    next.push(q);
                }
            }
        }
        products = absorb(next);
        if products.len() > limit {
            return None;
        }
    }
    let best = products
        .iter()
        .map(|p| p.ones().map(|c| candidates[c].0).collect::<Vec<_>>())
        .min_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)))?;
    Some(best)
}

/// Removes duplicates and strict supersets.
fn absorb(mut products: Vec<Bits>) -> Vec<Bits> {
    products.sort_by_key(Bits::count);
    products.dedup();
    let mut kept: Vec<Bits> = Vec::with_capacity(products.len());
    for p in products {
        if !kept.iter().any(|k| k.is_subset_of(&p)) {
            kept.push(p);
        }
    }
    kept
}

/// Exact cover search used when Petrick's expansion is too large. Finds the
/// optimum size by iterative deepening, then fills the cover slot by slot
/// with the smallest candidate that still admits an optimal completion.
fn branch_and_bound(candidates: &[(usize, Bits)], elements: &[usize]) -> Vec<usize> {
    let k = candidates.len();
    let m = elements.len();
    // Re-index: cover[c] over positions in `elements`, owners[e] over candidates.
    let cover: Vec<Bits> = candidates
        .iter()
        .map(|(_, s)| Bits::from_fn(m, |e| s.get(elements[e])))
        .collect();
    let owners: Vec<Bits> = (0..m)
        .map(|e| Bits::from_fn(k, |c| cover[c].get(e)))
        .collect();
    let search = CoverSearch { cover, owners };

    let all = Bits::full(m);
    let everyone = Bits::full(k);
    let mut size = search.lower_bound(&all, &everyone).unwrap_or(0);
    while !search.coverable(&all, &everyone, size) {
        size += 1;
    }

    let mut picked = Vec::with_capacity(size);
    let mut uncovered = all;
    for slot in 0..size {
        let from = picked.last().map_or(0, |&c| c + 1);
        let chosen = (from..k)
            .find(|&c| {
                if !search.cover[c].intersects(&uncovered) {
                    return false;
                }
                let rest = uncovered.difference(&search.cover[c]);
                let allowed = Bits::from_fn(k, |x| x > c);
                search.coverable(&rest, &allowed, size - slot - 1)
            })
            .expect("an optimal completion exists");
        uncovered = uncovered.difference(&search.cover[chosen]);
        picked.push(chosen);
    }
    picked.into_iter().map(|c| candidates[c].0).collect()
}

struct CoverSearch {
    cover: Vec<Bits>,
    owners: Vec<Bits>,
}

impl CoverSearch {
    /// Greedy packing of elements with pairwise disjoint (allowed) owner
    /// sets. Each needs its own set, so the count bounds the cover size
    /// from below. `None` when some element has no allowed owner.
    fn lower_bound(&self, uncovered: &Bits, allowed: &Bits) -> Option<usize> {
        let mut rows: Vec<Bits> = Vec::new();
        for e in uncovered.ones() {
            let owners = self.owners[e].intersection(allowed);
            if owners.is_empty() {
                return None;
            }
            rows.push(owners);
        }
        // scarce elements first pack more of them
        rows.sort_by_key(Bits::count);
        let mut used = Bits::new(self.cover.len());
        let mut bound = 0;
        for owners in rows {
            if !owners.intersects(&used) {
                used.union_with(&owners);
                bound += 1;
            }
        }
        Some(bound)
    }

    /// Whether `uncovered` can be covered by at most `budget` allowed sets.
    /// Branches on the element with the fewest allowed owners; after trying
    /// an owner it is disallowed in the remaining branches.
    fn coverable(&self, uncovered: &Bits, allowed: &Bits, budget: usize) -> bool {
        if uncovered.is_empty() {
            return true;
        }
        match self.lower_bound(uncovered, allowed) {
            Some(lb) if lb <= budget => {}
            _ => return false,
        }
        let hardest = uncovered
            .ones()
            .min_by_key(|&e| self.owners[e].intersection(allowed).count())
            .expect("non-empty");
        let mut allowed = allowed.clone();
        let options: Vec<usize> = self.owners[hardest].intersection(&allowed).ones().collect();
        for c in options {
            let rest = uncovered.difference(&self.cover[c]);
            if self.coverable(&rest, &allowed, budget - 1) {
                return true;
            }
            allowed.clear(c);
        }
        false
    }
}

/// Small fixed-width bit set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Bits {
    words: Vec<u64>,
    len: usize,
}

impl Bits {
    pub(crate) fn new(len: usize) -> Self {
        Bits {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub(crate) fn full(len: usize) -> Self {
        Self::from_fn(len, |_| true)
    }

    pub(crate) fn from_fn(len: usize, f: impl Fn(usize) -> bool) -> Self {
        let mut b = Self::new(len);
        for i in (0..len).filter(|&i| f(i)) {
            b.set(i);
        }
        b
    }

    pub(crate) fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub(crate) fn clear(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub(crate) fn get(&self, i: usize) -> bool {
        self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub(crate) fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub(crate) fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    fn zip_with(&self, other: &Bits, f: impl Fn(u64, u64) -> u64) -> Bits {
        Bits {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            len: self.len,
        }
    }

    pub(crate) fn intersection(&self, other: &Bits) -> Bits {
        self.zip_with(other, |a, b| a & b)
    }

    pub(crate) fn difference(&self, other: &Bits) -> Bits {
        self.zip_with(other, |a, b| a & !b)
    }

    pub(crate) fn union_with(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub(crate) fn intersects(&self, other: &Bits) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub(crate) fn is_subset_of(&self, other: &Bits) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bits_of(encodings: &[&str]) -> Vec<String> {
        encodings.iter().map(|s| s.to_string()).collect()
    }

    fn dnf(on: &[u64], n: usize) -> Vec<String> {
        minimal_dnf(on, n, &QmOptions::default())
            .unwrap()
            .iter()
            .map(Implicant::encoding)
            .collect()
    }

    #[test]
    fn single_point_gives_full_minterm() {
        // s2 = (010,110,100): bits 1, 3, 4, 6
        let s2 = 0b0_0101_1010;
        let terms = minimal_dnf(&[s2], 9, &QmOptions::default()).unwrap();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].num_literals(), 9);
        assert_eq!(terms[0].positives().collect::<Vec<_>>(), vec![1, 3, 4, 6]);
    }

    #[test]
    fn tautology_is_one_free_term() {
        let all: Vec<u64> = (0..16).collect();
        assert_eq!(dnf(&all, 4), bits_of(&["----"]));
    }

    #[test]
    fn classic_examples() {
        // x0 alone
        assert_eq!(dnf(&[1, 3], 2), bits_of(&["1-"]));
        // xor needs both minterms
        assert_eq!(dnf(&[1, 2], 2), bits_of(&["01", "10"]));
        // cyclic core: every minimum cover has 3 terms
        let cyclic = [0, 1, 2, 5, 6, 7];
        let terms = dnf(&cyclic, 3);
        assert_eq!(terms.len(), 3);
    }

    #[test]
    fn cyclic_tie_break_is_lexicographic() {
        // f = sum m(0,1,2,5,6,7) over 3 vars has two minimum covers;
        // six primes, two minimum covers: {-00, 01-, 1-1} and {-11, 0-0, 10-}
        assert_eq!(dnf(&[0, 1, 2, 5, 6, 7], 3), bits_of(&["-00", "01-", "1-1"]));
    }

    #[test]
    fn errors() {
        let opts = QmOptions::default();
        assert_eq!(
            minimal_dnf(&[1], 25, &opts),
            Err(QmError::TooManyVariables {
                num_vars: 25,
                cap: 24
            })
        );
        assert_eq!(minimal_dnf(&[], 3, &opts), Err(QmError::EmptyOnSet));
        assert_eq!(minimal_dnf(&[8], 3, &opts), Err(QmError::OutOfRange(8)));
    }

    #[test]
    fn encoding_order_matches_string_order() {
        let a = Implicant::new(0b010, 0b001, 3);
        let b = Implicant::new(0b110, 0, 3);
        assert_eq!(a.encoding(), "-10");
        assert_eq!(a.cmp(&b), a.encoding().cmp(&b.encoding()));
    }

    #[test]
    fn petrick_and_branch_and_bound_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..300 {
            let n = rng.gen_range(2..=7);
            let density = rng.gen_range(0.05..0.95);
            let on: Vec<u64> = (0..1u64 << n).filter(|_| rng.gen_bool(density)).collect();
            if on.is_empty() {
                continue;
            }
            let primes = prime_implicants(&on, n);
            let chart: Vec<Bits> = primes
                .iter()
                .map(|p| Bits::from_fn(on.len(), |i| p.covers(on[i])))
                .collect();
            let exact = minimum_cover(&chart, on.len(), 512);
            let bnb = minimum_cover(&chart, on.len(), 0);
            assert_eq!(exact, bnb, "n={n} on={on:?}");
        }
    }
}
