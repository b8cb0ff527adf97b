//! Exact ground truth for small systems.
//!
//! * [`enumerate_parking`] replays all `n^{n-1}` first-try vectors.
//! * [`enumerate_spanning_trees`] replays all `n^{n-2}·(n-1)!` ordered trees.
//! * [`partition_dp`] runs the chain forward over integer partitions with
//!   exact transition probabilities `(x+y) / (n(N-1))`.
//!
//! All probabilities are `BigRational`. Sequence laws are keyed by the packed
//! `(s, S, L)` triples of every step.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::cost::Functional;
use crate::error::{Error, Result};
use crate::process::{orient_from_root, prufer_decode};
use crate::special::ln_tree_count_minus_k;

pub type Ratio = BigRational;

pub const PARKING_MAX_N: usize = 8;
pub const TREE_MAX_N: usize = 6;
pub const DP_MAX_N: usize = 20;
/// Path enumeration of the chain (full sequence law).
pub const DP_SEQUENCE_MAX_N: usize = 8;
/// `p_mk` is returned from exact arithmetic up to this `m`.
pub const PMK_EXACT_MAX_M: usize = 30;

const BITS_PER_FIELD: u32 = 3;
const BITS_PER_STEP: u32 = 3 * BITS_PER_FIELD;

// Every sequence-law oracle packs (s-1, S-1, L-1) into 3 bits each, n-1 steps.
const _: () = assert!(PARKING_MAX_N <= 8 && TREE_MAX_N <= 8 && DP_SEQUENCE_MAX_N <= 8);
const _: () = assert!((PARKING_MAX_N as u32 - 1) * BITS_PER_STEP <= 64);

fn check_cap(oracle: &'static str, n: usize, min: usize, max: usize) -> Result<()> {
    if n < min || n > max {
        Err(Error::OracleCap {
            oracle,
            min,
            max,
            n,
        })
    } else {
        Ok(())
    }
}

pub fn ratio(num: u64, den: u64) -> Ratio {
    Ratio::new(BigInt::from(num), BigInt::from(den))
}

pub fn ratio_to_f64(r: &Ratio) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `p/q` string of a rational.
pub fn ratio_string(r: &Ratio) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// `(s, S, L)` of every step, packed into one word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SeqKey(u64);

impl SeqKey {
    fn with_step(self, step: usize, smaller: usize, larger: usize, predator: usize) -> SeqKey {
        let field = |v: usize| (v as u64 - 1) & ((1 << BITS_PER_FIELD) - 1);
        let packed = field(smaller)
            | field(larger) << BITS_PER_FIELD
            | field(predator) << (2 * BITS_PER_FIELD);
        SeqKey(self.0 | packed << ((step - 1) as u32 * BITS_PER_STEP))
    }

    /// Key of a run given its `(s, S, L)` per step, `n <= 8`.
    pub fn from_steps(steps: &[(usize, usize, usize)]) -> SeqKey {
        assert!(steps.len() < 8, "sequence keys hold at most 7 steps");
        steps
            .iter()
            .enumerate()
            .fold(SeqKey::default(), |key, (i, &(s, big, l))| {
                key.with_step(i + 1, s, big, l)
            })
    }

    pub fn decode(self, n: usize) -> Vec<(usize, usize, usize)> {
        (0..n.saturating_sub(1))
            .map(|i| {
                let w = self.0 >> (i as u32 * BITS_PER_STEP);
                let f = |shift: u32| ((w >> shift) & ((1 << BITS_PER_FIELD) - 1)) as usize + 1;
                (f(0), f(BITS_PER_FIELD), f(2 * BITS_PER_FIELD))
            })
            .collect()
    }
}

/// Exact law of a full coalescence of `n`.
#[derive(Debug, Clone)]
pub struct ExactLaw {
    pub n: usize,
    /// Law of the `(s, S, L)` sequence.
    pub sequences: BTreeMap<SeqKey, Ratio>,
    /// Per step (index `k - 1`): joint law of `(L, R)`.
    pub predator_prey: Vec<BTreeMap<(usize, usize), Ratio>>,
    /// Per step: joint law of `(L, D)`, when the oracle realizes `D`.
    pub predator_displacement: Option<Vec<BTreeMap<(usize, usize), Ratio>>>,
}

impl ExactLaw {
    fn from_counts(
        n: usize,
        total: u64,
        sequences: HashMap<SeqKey, u64>,
        lr: Vec<BTreeMap<(usize, usize), u64>>,
        ld: Option<Vec<BTreeMap<(usize, usize), u64>>>,
    ) -> Self {
        let to_law = |m: BTreeMap<(usize, usize), u64>| {
            m.into_iter()
                .map(|(k, c)| (k, ratio(c, total)))
                .collect::<BTreeMap<_, _>>()
        };
        ExactLaw {
            n,
            sequences: sequences
                .into_iter()
                .map(|(k, c)| (k, ratio(c, total)))
                .collect(),
            predator_prey: lr.into_iter().map(to_law).collect(),
            predator_displacement: ld.map(|v| v.into_iter().map(to_law).collect()),
        }
    }

    /// Total variation distance between the two sequence laws, exactly.
    pub fn total_variation(&self, other: &ExactLaw) -> Ratio {
        let mut sum = Ratio::zero();
        for (key, p) in &self.sequences {
            let q = other
                .sequences
                .get(key)
                .cloned()
                .unwrap_or_else(Ratio::zero);
            sum += (p - q).abs();
        }
        for (key, q) in &other.sequences {
            if !self.sequences.contains_key(key) {
                sum += q.clone();
            }
        }
        sum / Ratio::from_integer(BigInt::from(2))
    }

    /// `P(L_k = ℓ)` for `k = step`.
    pub fn predator_marginal(&self, step: usize) -> BTreeMap<usize, Ratio> {
        let mut out: BTreeMap<usize, Ratio> = BTreeMap::new();
        for ((l, _), p) in &self.predator_prey[step - 1] {
            *out.entry(*l).or_insert_with(Ratio::zero) += p;
        }
        out
    }

    /// `E[R_k | L_k = ℓ]` for every reachable `ℓ`.
    pub fn conditional_prey_mean(&self, step: usize) -> BTreeMap<usize, Ratio> {
        conditional_mean(&self.predator_prey[step - 1])
    }

    /// `E[D_k | L_k = ℓ]`, when `D` is realized.
    pub fn conditional_displacement_mean(&self, step: usize) -> Option<BTreeMap<usize, Ratio>> {
        self.predator_displacement
            .as_ref()
            .map(|v| conditional_mean(&v[step - 1]))
    }

    /// `E[cost_k]` for a functional, from the `(L, R)` law. Quick-Find uses its
    /// conditional mean (the coin is not part of the exact law); displacement
    /// uses the realized law when available.
    pub fn expected_cost(&self, functional: Functional, step: usize) -> Ratio {
        if functional == Functional::Displacement {
            if let Some(ld) = &self.predator_displacement {
                return ld[step - 1]
                    .iter()
                    .map(|((_, d), p)| p * Ratio::from_integer(BigInt::from(*d)))
                    .sum();
            }
        }
        self.predator_prey[step - 1]
            .iter()
            .map(|((l, r), p)| {
                let v = match functional {
                    Functional::Predator => ratio(*l as u64, 1),
                    Functional::Prey | Functional::QuickFindBiased => ratio(*r as u64, 1),
                    Functional::QuickFindWeighted => ratio((*l).min(*r) as u64, 1),
                    Functional::QuickFind => ratio((*l + *r) as u64, 2),
                    Functional::Displacement => ratio(*l as u64 - 1, 2),
                };
                p * v
            })
            .sum()
    }
}

fn conditional_mean(joint: &BTreeMap<(usize, usize), Ratio>) -> BTreeMap<usize, Ratio> {
    let mut mass: BTreeMap<usize, (Ratio, Ratio)> = BTreeMap::new();
    for ((l, v), p) in joint {
        let e = mass
            .entry(*l)
            .or_insert_with(|| (Ratio::zero(), Ratio::zero()));
        e.0 += p;
        e.1 += p * Ratio::from_integer(BigInt::from(*v));
    }
    mass.into_iter().map(|(l, (p, pv))| (l, pv / p)).collect()
}

fn empty_step_tables(n: usize) -> Vec<BTreeMap<(usize, usize), u64>> {
    vec![BTreeMap::new(); n.saturating_sub(1)]
}

/// Replays the parking scheme for one first-try vector with a plain circular
/// scan. Returns `(L, R, D)` per arrival.
pub fn replay_parking(n: usize, tries: &[usize]) -> Vec<(usize, usize, usize)> {
    let mut occupied = vec![false; n];
    let mut block = vec![1usize; n];
    let mut out = Vec::with_capacity(tries.len());
    for &first in tries {
        let mut place = first;
        while occupied[place] {
            place = (place + 1) % n;
        }
        let displacement = (place + n - first) % n;
        occupied[place] = true;
        let mut next = (place + 1) % n;
        while occupied[next] {
            next = (next + 1) % n;
        }
        let (l, r) = (block[place], block[next]);
        block[next] += l;
        out.push((l, r, displacement));
    }
    out
}

pub fn enumerate_parking(n: usize) -> Result<ExactLaw> {
    check_cap("enumerate_parking", n, 2, PARKING_MAX_N)?;
    let cars = n - 1;
    let total = (n as u64).pow(cars as u32);
    let mut sequences: HashMap<SeqKey, u64> = HashMap::new();
    let mut lr = empty_step_tables(n);
    let mut ld = empty_step_tables(n);
    let mut tries = vec![0usize; cars];
    for index in 0..total {
        let mut x = index;
        for t in tries.iter_mut() {
            *t = (x % n as u64) as usize;
            x /= n as u64;
        }
        let mut key = SeqKey::default();
        for (i, (l, r, d)) in replay_parking(n, &tries).into_iter().enumerate() {
            key = key.with_step(i + 1, l.min(r), l.max(r), l);
            *lr[i].entry((l, r)).or_insert(0) += 1;
            *ld[i].entry((l, d)).or_insert(0) += 1;
        }
        *sequences.entry(key).or_insert(0) += 1;
    }
    Ok(ExactLaw::from_counts(n, total, sequences, lr, Some(ld)))
}

/// Calls `visit` with every permutation of `0..m` (Heap's algorithm).
fn for_each_permutation(m: usize, mut visit: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..m).collect();
    let mut c = vec![0usize; m];
    visit(&perm);
    let mut i = 0;
    while i < m {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

pub fn enumerate_spanning_trees(n: usize) -> Result<ExactLaw> {
    check_cap("enumerate_spanning_trees", n, 2, TREE_MAX_N)?;
    let trees = (n as u64).pow(n as u32 - 2);
    let orders: u64 = (1..n as u64).product();
    let total = trees * orders;
    let mut sequences: HashMap<SeqKey, u64> = HashMap::new();
    let mut lr = empty_step_tables(n);
    let mut code = vec![0usize; n - 2];
    for index in 0..trees {
        let mut x = index;
        for c in code.iter_mut() {
            *c = (x % n as u64) as usize;
            x /= n as u64;
        }
        let oriented = orient_from_root(n, &prufer_decode(&code, n), 0);
        for_each_permutation(n - 1, |perm| {
            // component labels, relabelled on merge
            let mut label: Vec<usize> = (0..n).collect();
            let mut size = vec![1usize; n];
            let mut key = SeqKey::default();
            for (i, &e) in perm.iter().enumerate() {
                let (bottom, top) = oriented[e];
                let (lb, lt) = (label[bottom], label[top]);
                let (l, r) = (size[lb], size[lt]);
                for v in label.iter_mut() {
                    if *v == lt {
                        *v = lb;
                    }
                }
                size[lb] += r;
                key = key.with_step(i + 1, l.min(r), l.max(r), l);
                *lr[i].entry((l, r)).or_insert(0) += 1;
            }
            *sequences.entry(key).or_insert(0) += 1;
        });
    }
    Ok(ExactLaw::from_counts(n, total, sequences, lr, None))
}

/// Canonical partition: nonincreasing sizes.
pub type Partition = Vec<usize>;

/// Distinct unordered size pairs `(a, b)`, `a <= b`, with their merge
/// probability from `partition`.
fn merge_pairs(partition: &[usize], n: usize) -> Vec<(usize, usize, Ratio)> {
    let parts = partition.len();
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for &s in partition {
        *counts.entry(s).or_insert(0) += 1;
    }
    let denom = (n * (parts - 1)) as u64;
    let sizes: Vec<(usize, u64)> = counts.into_iter().collect();
    let mut out = Vec::new();
    for (i, &(a, ca)) in sizes.iter().enumerate() {
        if ca >= 2 {
            let mult = ca * (ca - 1) / 2;
            out.push((a, a, ratio(mult * 2 * a as u64, denom)));
        }
        for &(b, cb) in &sizes[i + 1..] {
            out.push((a, b, ratio(ca * cb * (a + b) as u64, denom)));
        }
    }
    out
}

fn merged(partition: &[usize], a: usize, b: usize) -> Partition {
    let mut next = partition.to_vec();
    let ia = next.iter().position(|&s| s == a).unwrap();
    next.remove(ia);
    let ib = next.iter().position(|&s| s == b).unwrap();
    next.remove(ib);
    next.push(a + b);
    next.sort_unstable_by(|x, y| y.cmp(x));
    next
}

#[derive(Debug, Clone)]
pub struct DpStep {
    /// Law of the unordered merged sizes `(s, S)`.
    pub pair_law: BTreeMap<(usize, usize), Ratio>,
    /// Joint law of `(L, R)`.
    pub predator_prey: BTreeMap<(usize, usize), Ratio>,
    /// `E[cost_k]` per functional, indexed like [`Functional::ALL`].
    pub expected: Vec<Ratio>,
    /// Law of the partition after this step.
    pub partitions: BTreeMap<Partition, Ratio>,
}

#[derive(Debug, Clone)]
pub struct PartitionDp {
    pub n: usize,
    pub steps: Vec<DpStep>,
}

impl PartitionDp {
    pub fn expected_cost(&self, functional: Functional, step: usize) -> &Ratio {
        &self.steps[step - 1].expected[functional.index()]
    }

    /// `E[C_{n,m}]`.
    pub fn expected_total(&self, functional: Functional, m: usize) -> Ratio {
        (1..=m)
            .map(|k| self.expected_cost(functional, k).clone())
            .sum()
    }

    pub fn conditional_prey_mean(&self, step: usize) -> BTreeMap<usize, Ratio> {
        conditional_mean(&self.steps[step - 1].predator_prey)
    }
}

pub fn partition_dp(n: usize) -> Result<PartitionDp> {
    check_cap("partition_dp", n, 2, DP_MAX_N)?;
    let mut current: BTreeMap<Partition, Ratio> = BTreeMap::from([(vec![1; n], Ratio::one())]);
    let mut steps = Vec::with_capacity(n - 1);
    for _ in 1..n {
        let mut next: BTreeMap<Partition, Ratio> = BTreeMap::new();
        let mut pair_law: BTreeMap<(usize, usize), Ratio> = BTreeMap::new();
        let mut lr: BTreeMap<(usize, usize), Ratio> = BTreeMap::new();
        let mut expected = vec![Ratio::zero(); Functional::ALL.len()];
        for (partition, p) in &current {
            for (a, b, pm) in merge_pairs(partition, n) {
                let w = p * &pm;
                *pair_law.entry((a, b)).or_insert_with(Ratio::zero) += &w;
                let sum = (a + b) as u64;
                let to_a = &w * ratio(a as u64, sum);
                let to_b = &w * ratio(b as u64, sum);
                *lr.entry((a, b)).or_insert_with(Ratio::zero) += to_a;
                *lr.entry((b, a)).or_insert_with(Ratio::zero) += to_b;
                for f in Functional::ALL {
                    let (num, den) = f.conditional_mean_ratio(a as u64, b as u64);
                    expected[f.index()] += &w * ratio(num, den);
                }
                *next
                    .entry(merged(partition, a, b))
                    .or_insert_with(Ratio::zero) += w;
            }
        }
        steps.push(DpStep {
            pair_law,
            predator_prey: lr,
            expected,
            partitions: next.clone(),
        });
        current = next;
    }
    Ok(PartitionDp { n, steps })
}

/// Full `(s, S, L)` sequence law of the chain, by path enumeration.
pub fn chain_sequence_law(n: usize) -> Result<ExactLaw> {
    check_cap("chain_sequence_law", n, 2, DP_SEQUENCE_MAX_N)?;
    let mut sequences: BTreeMap<SeqKey, Ratio> = BTreeMap::new();
    let mut lr: Vec<BTreeMap<(usize, usize), Ratio>> = vec![BTreeMap::new(); n - 1];

    fn walk(
        n: usize,
        partition: Partition,
        step: usize,
        prob: Ratio,
        key: SeqKey,
        sequences: &mut BTreeMap<SeqKey, Ratio>,
        lr: &mut Vec<BTreeMap<(usize, usize), Ratio>>,
    ) {
        if partition.len() == 1 {
            *sequences.entry(key).or_insert_with(Ratio::zero) += prob;
            return;
        }
        for (a, b, pm) in merge_pairs(&partition, n) {
            let w = &prob * pm;
            let next = merged(&partition, a, b);
            let sides: Vec<(usize, usize, Ratio)> = if a == b {
                vec![(a, b, w)]
            } else {
                let sum = (a + b) as u64;
                vec![
                    (a, b, &w * ratio(a as u64, sum)),
                    (b, a, &w * ratio(b as u64, sum)),
                ]
            };
            for (l, r, pl) in sides {
                *lr[step - 1].entry((l, r)).or_insert_with(Ratio::zero) += &pl;
                let k = key.with_step(step, a, b, l);
                walk(n, next.clone(), step + 1, pl, k, sequences, lr);
            }
        }
    }

    walk(
        n,
        vec![1; n],
        1,
        Ratio::one(),
        SeqKey::default(),
        &mut sequences,
        &mut lr,
    );
    Ok(ExactLaw {
        n,
        sequences,
        predator_prey: lr,
        predator_displacement: None,
    })
}

fn check_pmk(m: usize, k: usize) -> Result<()> {
    if m < 2 || k < 1 || k >= m {
        return Err(Error::InvalidArgument(format!(
            "p_mk needs m >= 2 and 1 <= k <= m-1, got m={m} k={k}"
        )));
    }
    Ok(())
}

/// `p_{m,k} = C(m−2, k−1) · k^{k−1} · (m−k)^{m−k−2} / m^{m−2}`, exactly.
pub fn p_mk_exact(m: usize, k: usize) -> Result<Ratio> {
    check_pmk(m, k)?;
    let j = m - k;
    let num = binomial(BigUint::from(m - 2), BigUint::from(k - 1))
        * BigUint::from(k).pow(k as u32 - 1)
        * if j >= 2 {
            BigUint::from(j).pow(j as u32 - 2)
        } else {
            BigUint::one()
        };
    let den = BigUint::from(m).pow(m as u32 - 2);
    Ok(Ratio::new(BigInt::from(num), BigInt::from(den)))
}

/// `ln p_{m,k}`, from tree-count terms that stay accurate for large `m`.
pub fn ln_p_mk(m: usize, k: usize) -> Result<f64> {
    check_pmk(m, k)?;
    let j = m - k;
    let (kf, jf, mf) = (k as u64, j as u64, m as u64);
    Ok(ln_tree_count_minus_k(kf) + ln_tree_count_minus_k(jf)
        - ln_tree_count_minus_k(mf)
        - (j as f64).ln()
        + (m as f64).ln()
        - ((m - 1) as f64).ln())
}

/// Exact for `m <= 30`, log-space beyond.
pub fn p_mk(m: usize, k: usize) -> Result<f64> {
    if m <= PMK_EXACT_MAX_M {
        p_mk_exact(m, k).map(|r| ratio_to_f64(&r))
    } else {
        ln_p_mk(m, k).map(f64::exp)
    }
}

/// Borel(1) mass `k^{k−1} e^{−k} / k!`.
pub fn borel_pmf(k: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("Borel support starts at 1".into()));
    }
    Ok((ln_tree_count_minus_k(k) - (k as f64).ln()).exp())
}

/// Number of `k`-car configurations (out of `n^k`) whose blocks just before
/// the `k`-th arrival, numbered clockwise from the block receiving that car,
/// have sizes `blocks`:
/// `multinomial(k−1; b_0−1, …) · n · b_0 · Π b_i^{b_i−2}`.
/// Infeasible vectors count 0.
pub fn block_config_count(n: usize, k: usize, blocks: &[usize]) -> Result<BigUint> {
    if n < 2 || k < 1 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "block_config_count needs n >= 2 and 1 <= k <= n-1, got n={n} k={k}"
        )));
    }
    if blocks.len() != n - k + 1 || blocks.contains(&0) || blocks.iter().sum::<usize>() != n {
        return Ok(BigUint::zero());
    }
    let mut count = factorial(k - 1);
    for &b in blocks {
        count /= factorial(b - 1);
    }
    count *= BigUint::from(n) * BigUint::from(blocks[0]);
    for &b in blocks {
        if b >= 2 {
            count *= BigUint::from(b).pow(b as u32 - 2);
        }
    }
    Ok(count)
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// All compositions of `total` into `parts` positive parts.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 1..=left.saturating_sub(parts - 1) {
            prefix.push(first);
            rec(left - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts >= 1 && total >= parts {
        rec(total, parts, &mut Vec::new(), &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seq_key_round_trip() {
        let key = SeqKey::default()
            .with_step(1, 1, 1, 1)
            .with_step(2, 1, 2, 2)
            .with_step(3, 3, 4, 3);
        assert_eq!(key.decode(4), vec![(1, 1, 1), (1, 2, 2), (3, 4, 3)]);
        assert_eq!(SeqKey::from_steps(&key.decode(4)), key);
    }

    #[test]
    fn caps_are_enforced() {
        assert!(matches!(enumerate_parking(9), Err(Error::OracleCap { .. })));
        assert!(matches!(enumerate_parking(1), Err(Error::OracleCap { .. })));
        assert!(enumerate_spanning_trees(7).is_err());
        assert!(partition_dp(21).is_err());
        assert!(chain_sequence_law(9).is_err());
    }

    #[test]
    fn n2_is_a_single_sequence() {
        for law in [
            enumerate_parking(2).unwrap(),
            enumerate_spanning_trees(2).unwrap(),
            chain_sequence_law(2).unwrap(),
        ] {
            assert_eq!(law.sequences.len(), 1);
            assert!(law.sequences.values().next().unwrap().is_one());
        }
    }

    #[test]
    fn n3_second_predator() {
        let expect = BTreeMap::from([(1, ratio(1, 3)), (2, ratio(2, 3))]);
        assert_eq!(enumerate_parking(3).unwrap().predator_marginal(2), expect);
        assert_eq!(
            enumerate_spanning_trees(3).unwrap().predator_marginal(2),
            expect
        );
        assert_eq!(chain_sequence_law(3).unwrap().predator_marginal(2), expect);
    }

    #[test]
    fn small_dp_values() {
        let dp = partition_dp(3).unwrap();
        assert_eq!(dp.expected_total(Functional::Predator, 2), ratio(8, 3));
        assert_eq!(dp.expected_total(Functional::Prey, 2), ratio(7, 3));
        assert_eq!(
            dp.expected_total(Functional::QuickFindBiased, 2),
            ratio(7, 3)
        );
        assert_eq!(dp.expected_total(Functional::QuickFind, 2), ratio(5, 2));
        assert_eq!(
            dp.steps[1].pair_law,
            BTreeMap::from([((1, 2), Ratio::one())])
        );
    }

    #[test]
    fn dp_probabilities_sum_to_one() {
        let dp = partition_dp(12).unwrap();
        for step in &dp.steps {
            let total: Ratio = step.partitions.values().cloned().sum();
            assert!(total.is_one());
            let total: Ratio = step.pair_law.values().cloned().sum();
            assert!(total.is_one());
            for part in step.partitions.keys() {
                assert_eq!(part.iter().sum::<usize>(), 12);
            }
        }
    }

    #[test]
    fn three_oracles_agree_at_small_n() {
        for n in 2..=5 {
            let parking = enumerate_parking(n).unwrap();
            let trees = enumerate_spanning_trees(n).unwrap();
            let chain = chain_sequence_law(n).unwrap();
            assert!(parking.total_variation(&trees).is_zero(), "n={n}");
            assert!(parking.total_variation(&chain).is_zero(), "n={n}");
        }
    }

    #[test]
    fn displacement_is_uniform_below_predator() {
        let law = enumerate_parking(6).unwrap();
        for step in 1..6 {
            for (l, mean) in law.conditional_displacement_mean(step).unwrap() {
                assert_eq!(mean, ratio(l as u64 - 1, 2), "step {step} ℓ={l}");
            }
        }
    }

    #[test]
    fn pmk_small_values() {
        assert!(p_mk_exact(2, 1).unwrap().is_one());
        assert_eq!(p_mk_exact(3, 2).unwrap(), ratio(2, 3));
        assert_eq!(p_mk_exact(3, 1).unwrap(), ratio(1, 3));
        assert!(p_mk_exact(3, 3).is_err());
        assert!(p_mk_exact(1, 1).is_err());
        for m in 2..=30 {
            let total: Ratio = (1..m).map(|k| p_mk_exact(m, k).unwrap()).sum();
            assert!(total.is_one(), "m={m}");
        }
    }

    #[test]
    fn pmk_log_form_matches_exact() {
        for m in 2..=30 {
            for k in 1..m {
                let exact = ratio_to_f64(&p_mk_exact(m, k).unwrap());
                let approx = ln_p_mk(m, k).unwrap().exp();
                assert!((exact - approx).abs() <= 1e-12 * exact, "m={m} k={k}");
            }
        }
    }

    #[test]
    fn borel_values() {
        assert!((borel_pmf(1).unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert!((borel_pmf(2).unwrap() - (-2f64).exp()).abs() < 1e-15);
        assert!((borel_pmf(1).unwrap() - 0.367879).abs() < 1e-6);
        assert!(borel_pmf(0).is_err());
    }

    /// The tail decays like `k^{-3/2}`, so the partial sum is closed with the
    /// Euler-Maclaurin estimate of `Σ_{k>K} k^{-3/2} / √(2π)`.
    #[test]
    fn borel_mass_is_one() {
        let cut = 1_000_000u64;
        let head: f64 = (1..=cut).map(|k| borel_pmf(k).unwrap()).sum();
        let kf = cut as f64;
        let tail = (2.0 / kf.sqrt() - 0.5 / kf.powf(1.5)) / (2.0 * std::f64::consts::PI).sqrt();
        assert!((head + tail - 1.0).abs() < 1e-9, "{}", head + tail - 1.0);
    }

    #[test]
    fn block_counts_are_complete_and_exchangeable() {
        assert_eq!(
            block_config_count(2, 1, &[1, 1]).unwrap(),
            BigUint::from(2u32)
        );
        assert_eq!(
            block_config_count(4, 2, &[1, 1, 1]).unwrap(),
            BigUint::zero()
        );
        assert!(block_config_count(3, 3, &[3]).is_err());
        for n in 2..=7 {
            for k in 1..n {
                let total: BigUint = compositions(n, n - k + 1)
                    .iter()
                    .map(|b| block_config_count(n, k, b).unwrap())
                    .sum();
                assert_eq!(total, BigUint::from(n).pow(k as u32), "n={n} k={k}");
            }
        }
        // a zero block is infeasible
        assert!(block_config_count(7, 3, &[2, 1, 3, 1, 0])
            .unwrap()
            .is_zero());
        let ref_count = block_config_count(8, 4, &[2, 1, 3, 1, 1]).unwrap();
        for perm in [[1, 3, 1, 1], [3, 1, 1, 1], [1, 1, 1, 3]] {
            let mut b = vec![2];
            b.extend(perm);
            assert_eq!(block_config_count(8, 4, &b).unwrap(), ref_count);
        }
    }

    /// Tally the anchored block vectors directly from all `n^k` configurations.
    #[test]
    fn block_counts_match_direct_tally() {
        for n in 2..=5usize {
            for k in 1..n {
                let mut tally: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
                let total = (n as u64).pow(k as u32);
                for index in 0..total {
                    let mut x = index;
                    let tries: Vec<usize> = (0..k)
                        .map(|_| {
                            let t = (x % n as u64) as usize;
                            x /= n as u64;
                            t
                        })
                        .collect();
                    // park the first k-1 cars
                    let mut occupied = vec![false; n];
                    for &t in &tries[..k - 1] {
                        let mut p = t;
                        while occupied[p] {
                            p = (p + 1) % n;
                        }
                        occupied[p] = true;
                    }
                    let mut target = tries[k - 1];
                    while occupied[target] {
                        target = (target + 1) % n;
                    }
                    // blocks clockwise starting with the one closed by `target`
                    let empties: Vec<usize> = (0..n)
                        .map(|i| (target + i) % n)
                        .filter(|&p| !occupied[p])
                        .collect();
                    let mut sizes = Vec::with_capacity(empties.len());
                    for (i, &e) in empties.iter().enumerate() {
                        let prev = if i == 0 {
                            empties[empties.len() - 1]
                        } else {
                            empties[i - 1]
                        };
                        let size = (e + n - prev) % n;
                        sizes.push(if size == 0 { n } else { size });
                    }
                    *tally.entry(sizes).or_insert(0) += 1;
                }
                for b in compositions(n, n - k + 1) {
                    let want = tally.get(&b).copied().unwrap_or(0);
                    assert_eq!(
                        block_config_count(n, k, &b).unwrap(),
                        BigUint::from(want),
                        "n={n} k={k} b={b:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn permutations_cover_factorial() {
        let mut seen = std::collections::BTreeSet::new();
        for_each_permutation(5, |p| {
            seen.insert(p.to_vec());
        });
        assert_eq!(seen.len(), 120);
    }

    #[test]
    fn compositions_count() {
        // C(n-1, parts-1)
        assert_eq!(compositions(6, 3).len(), 10);
        assert_eq!(compositions(4, 4), vec![vec![1, 1, 1, 1]]);
        assert!(compositions(2, 3).is_empty());
    }
}
