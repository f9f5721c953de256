//! Brute-force enumeration over the elements of small groups G_λ. Used only
//! to check the closed formulas in the parent module.

use std::collections::{BTreeMap, HashMap};

use rustc_hash::FxHashSet;

use dashu::integer::IBig;

use super::{AbelianPGroup, PGroupError};
use crate::arith::ExactInt;
use crate::partition::Partition;

pub const DEFAULT_CAP: u128 = 512;

/// Addition table of G_λ on mixed-radix element indices.
pub struct GroupTable {
    pub p: u64,
    pub ty: Partition,
    pub order: usize,
    add: Vec<u16>,
    times_p: Vec<u16>,
    words: usize,
}

/// Subgroup as a bitset over element indices.
pub type Bits = Box<[u64]>;

fn test(b: &[u64], i: usize) -> bool {
    b[i >> 6] >> (i & 63) & 1 == 1
}

fn set(b: &mut [u64], i: usize) {
    b[i >> 6] |= 1 << (i & 63);
}

fn popcount(b: &[u64]) -> usize {
    b.iter().map(|w| w.count_ones() as usize).sum()
}

fn log_p(mut n: usize, p: u64) -> u32 {
    let mut e = 0;
    while n > 1 {
        n /= p as usize;
        e += 1;
    }
    e
}

impl GroupTable {
    pub fn new(group: &AbelianPGroup, cap: u128) -> Result<Self, PGroupError> {
        let order = group.order_u128().unwrap_or(u128::MAX);
        if order > cap || order > u16::MAX as u128 {
            return Err(PGroupError::CapExceeded { order, cap });
        }
        let n = order as usize;
        let radices: Vec<usize> = group
            .ty
            .parts()
            .iter()
            .map(|&e| (group.p as usize).pow(e))
            .collect();
        let digits = |mut x: usize| -> Vec<usize> {
            radices
                .iter()
                .map(|&r| {
                    let d = x % r;
                    x /= r;
                    d
                })
                .collect()
        };
        let index = |ds: &[usize]| -> usize {
            ds.iter()
                .zip(&radices)
                .rev()
                .fold(0, |acc, (&d, &r)| acc * r + d)
        };
        let all: Vec<Vec<usize>> = (0..n).map(digits).collect();
        let mut add = vec![0u16; n * n];
        for a in 0..n {
            for b in 0..n {
                let s: Vec<usize> = all[a]
                    .iter()
                    .zip(&all[b])
                    .zip(&radices)
                    .map(|((x, y), r)| (x + y) % r)
                    .collect();
                add[a * n + b] = index(&s) as u16;
            }
        }
        let times_p = (0..n)
            .map(|a| {
                let s: Vec<usize> = all[a]
                    .iter()
                    .zip(&radices)
                    .map(|(x, r)| x * group.p as usize % r)
                    .collect();
                index(&s) as u16
            })
            .collect();
        Ok(GroupTable {
            p: group.p,
            ty: group.ty.clone(),
            order: n,
            add,
            times_p,
            words: n.div_ceil(64),
        })
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.order + b] as usize
    }

    pub fn times_p(&self, a: usize) -> usize {
        self.times_p[a] as usize
    }

    pub fn empty_set(&self) -> Bits {
        vec![0u64; self.words].into_boxed_slice()
    }

    pub fn trivial(&self) -> Bits {
        let mut b = self.empty_set();
        set(&mut b, 0);
        b
    }

    pub fn elements(&self, h: &[u64]) -> Vec<usize> {
        let mut out = Vec::with_capacity(popcount(h));
        for (w, &word) in h.iter().enumerate() {
            let mut x = word;
            while x != 0 {
                out.push(w * 64 + x.trailing_zeros() as usize);
                x &= x - 1;
            }
        }
        out
    }

    /// <H, g> for a subgroup H: union of the cosets H + t·g.
    pub fn extend(&self, h: &[u64], g: usize) -> Bits {
        let mut out: Bits = h.into();
        self.extend_into(h, &self.elements(h), g, &mut out);
        out
    }

    /// [`Self::extend`] writing into `out`, with the elements of H supplied.
    fn extend_into(&self, h: &[u64], elems: &[usize], g: usize, out: &mut [u64]) {
        out.copy_from_slice(h);
        let mut y = g;
        while !test(h, y) {
            let row = &self.add[y * self.order..(y + 1) * self.order];
            for &x in elems {
                set(out, row[x] as usize);
            }
            y = self.add(y, g);
        }
    }

    /// Isomorphism type of a subgroup, read off from |p^j H|.
    pub fn subgroup_type(&self, h: &[u64]) -> Partition {
        let mut cur = self.elements(h);
        let mut logs = vec![log_p(cur.len(), self.p)];
        while cur.len() > 1 {
            let mut next = self.empty_set();
            for &x in &cur {
                set(&mut next, self.times_p(x));
            }
            cur = self.elements(&next);
            logs.push(log_p(cur.len(), self.p));
        }
        let conj: Vec<u32> = logs.windows(2).map(|w| w[0] - w[1]).collect();
        Partition::new(conj).unwrap().conjugate()
    }

    /// Type of G/H, read off from |p^j G + H| / |H|.
    pub fn quotient_type(&self, h: &[u64]) -> Partition {
        let hel = self.elements(h);
        let mut pj: Vec<usize> = (0..self.order).collect();
        let mut logs = Vec::new();
        loop {
            let mut sum = self.empty_set();
            for &x in &pj {
                for &y in &hel {
                    set(&mut sum, self.add(x, y));
                }
            }
            logs.push(log_p(popcount(&sum) / hel.len(), self.p));
            if *logs.last().unwrap() == 0 {
                break;
            }
            let mut next = self.empty_set();
            for &x in &pj {
                set(&mut next, self.times_p(x));
            }
            pj = self.elements(&next);
        }
        let conj: Vec<u32> = logs.windows(2).map(|w| w[0] - w[1]).collect();
        Partition::new(conj).unwrap().conjugate()
    }

    /// Visits every subgroup exactly once, grouped by order. Each level is
    /// generated from the previous one through index-p extensions.
    pub fn for_each_subgroup(&self, mut f: impl FnMut(&[u64])) {
        let mut level: FxHashSet<Bits> = FxHashSet::default();
        level.insert(self.trivial());
        while !level.is_empty() {
            let mut next: FxHashSet<Bits> = FxHashSet::default();
            let mut ext = self.empty_set();
            for h in &level {
                f(h);
                let elems = self.elements(h);
                let mut covered: Bits = h.clone();
                for g in 0..self.order {
                    if test(&covered, g) || !test(h, self.times_p(g)) {
                        continue;
                    }
                    self.extend_into(h, &elems, g, &mut ext);
                    for (c, e) in covered.iter_mut().zip(ext.iter()) {
                        *c |= e;
                    }
                    if !next.contains(&ext) {
                        next.insert(ext.clone());
                    }
                }
            }
            level = next;
        }
    }

    pub fn all_subgroups(&self) -> Vec<Bits> {
        let mut out = Vec::new();
        self.for_each_subgroup(|h| out.push(h.into()));
        out
    }
}

/// Multiplicity of each subgroup type of G.
pub fn brute_force_subgroups(
    group: &AbelianPGroup,
    cap: u128,
) -> Result<BTreeMap<Partition, u64>, PGroupError> {
    let t = GroupTable::new(group, cap)?;
    let mut counts: HashMap<Partition, u64> = HashMap::new();
    t.for_each_subgroup(|h| *counts.entry(t.subgroup_type(h)).or_default() += 1);
    Ok(counts.into_iter().collect())
}

/// (type, cotype) of every subgroup of G.
pub fn brute_force_type_pairs(
    group: &AbelianPGroup,
    cap: u128,
) -> Result<Vec<(Partition, Partition)>, PGroupError> {
    let t = GroupTable::new(group, cap)?;
    let mut out = Vec::new();
    t.for_each_subgroup(|h| out.push((t.subgroup_type(h), t.quotient_type(h))));
    Ok(out)
}

/// #Sur(G_μ, G_λ) by running over generator images, tracking the subgroup
/// generated so far.
pub fn brute_force_sur_count(
    mu: &Partition,
    lambda: &Partition,
    p: u64,
    cap: u128,
) -> Result<ExactInt, PGroupError> {
    let target = AbelianPGroup::new(p, lambda.clone())?;
    let t = GroupTable::new(&target, cap)?;
    let full = {
        let mut b = t.empty_set();
        for i in 0..t.order {
            set(&mut b, i);
        }
        b
    };
    let mut states: HashMap<Bits, IBig> = HashMap::new();
    states.insert(t.trivial(), IBig::ONE);
    for &e in mu.parts() {
        // images x with p^e x = 0
        let allowed: Vec<usize> = (0..t.order)
            .filter(|&x| {
                let mut y = x;
                for _ in 0..e {
                    y = t.times_p(y);
                }
                y == 0
            })
            .collect();
        let mut next: HashMap<Bits, IBig> = HashMap::new();
        let mut closure: HashMap<(Bits, usize), Bits> = HashMap::new();
        for (s, c) in &states {
            for &x in &allowed {
                let ext = closure
                    .entry((s.clone(), x))
                    .or_insert_with(|| t.extend(s, x))
                    .clone();
                *next.entry(ext).or_insert(IBig::ZERO) += c;
            }
        }
        states = next;
    }
    Ok(states.remove(&full).unwrap_or(IBig::ZERO))
}

/// n_k(G) by explicit chains in the subgroup lattice of G.
pub fn brute_force_chain_count_literal(
    group: &AbelianPGroup,
    k: u64,
    cap: u128,
) -> Result<ExactInt, PGroupError> {
    let t = GroupTable::new(group, cap)?;
    let subs = t.all_subgroups();
    let subset = |a: &[u64], b: &[u64]| a.iter().zip(b).all(|(x, y)| x & !y == 0);
    // f[i] = number of chains 0 = H_0 ≤ … ≤ H_j = subs[i]
    let mut f: Vec<IBig> = subs
        .iter()
        .map(|h| {
            if popcount(h) == 1 {
                IBig::ONE
            } else {
                IBig::ZERO
            }
        })
        .collect();
    for _ in 0..k {
        f = subs
            .iter()
            .map(|b| {
                subs.iter()
                    .zip(&f)
                    .filter(|(a, _)| subset(a, b))
                    .map(|(_, v)| v.clone())
                    .sum()
            })
            .collect();
    }
    let full_idx = subs.iter().position(|h| popcount(h) == t.order).unwrap();
    Ok(f[full_idx].clone())
}

/// n_k(G) = Σ_{H ≤ G} n_{k-1}(H), with the subgroup multiplicities of G and of
/// every subgroup type obtained by enumeration.
pub fn brute_force_chain_count(
    group: &AbelianPGroup,
    k: u64,
    cap: u128,
) -> Result<ExactInt, PGroupError> {
    SubgroupCensus::new(group.p, cap).chain_count(&group.ty, k)
}

/// Enumerated subgroup multiplicities of G_λ for one prime, cached per type so
/// a sweep over many groups enumerates each lattice once.
pub struct SubgroupCensus {
    p: u64,
    cap: u128,
    types: HashMap<Partition, BTreeMap<Partition, u64>>,
    chains: HashMap<(Partition, u64), ExactInt>,
}

impl SubgroupCensus {
    pub fn new(p: u64, cap: u128) -> Self {
        SubgroupCensus {
            p,
            cap,
            types: HashMap::new(),
            chains: HashMap::new(),
        }
    }

    pub fn subgroups(&mut self, ty: &Partition) -> Result<&BTreeMap<Partition, u64>, PGroupError> {
        if !self.types.contains_key(ty) {
            let g = AbelianPGroup::new(self.p, ty.clone())?;
            self.types
                .insert(ty.clone(), brute_force_subgroups(&g, self.cap)?);
        }
        Ok(&self.types[ty])
    }

    pub fn chain_count(&mut self, ty: &Partition, k: u64) -> Result<ExactInt, PGroupError> {
        if k == 0 {
            return Ok(if ty.is_empty() { IBig::ONE } else { IBig::ZERO });
        }
        if let Some(v) = self.chains.get(&(ty.clone(), k)) {
            return Ok(v.clone());
        }
        let subs = self.subgroups(ty)?.clone();
        let mut acc = IBig::ZERO;
        for (sub, mult) in subs {
            acc += IBig::from(mult) * self.chain_count(&sub, k - 1)?;
        }
        self.chains.insert((ty.clone(), k), acc.clone());
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(p: u64, v: &[u32]) -> AbelianPGroup {
        AbelianPGroup::new(p, Partition::from_parts(v)).unwrap()
    }

    fn types(p: u64, v: &[u32]) -> Vec<(String, u64)> {
        brute_force_subgroups(&g(p, v), DEFAULT_CAP)
            .unwrap()
            .into_iter()
            .map(|(t, c)| (t.to_string(), c))
            .collect()
    }

    #[test]
    fn cyclic_four() {
        assert_eq!(
            types(2, &[2]),
            vec![("0".into(), 1), ("1".into(), 1), ("2".into(), 1)]
        );
    }

    #[test]
    fn klein_four() {
        assert_eq!(
            types(2, &[1, 1]),
            vec![("0".into(), 1), ("1".into(), 3), ("1,1".into(), 1)]
        );
    }

    #[test]
    fn z2_plus_z4_has_eight() {
        let total: u64 = types(2, &[2, 1]).iter().map(|x| x.1).sum();
        assert_eq!(total, 8);
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(
            brute_force_subgroups(&g(2, &[5, 5]), DEFAULT_CAP),
            Err(PGroupError::CapExceeded { .. })
        ));
    }

    #[test]
    fn sur_small() {
        let p = |v: &[u32]| Partition::from_parts(v);
        assert_eq!(
            brute_force_sur_count(&p(&[1, 1]), &p(&[1]), 2, 64).unwrap(),
            IBig::from(3)
        );
        assert_eq!(
            brute_force_sur_count(&p(&[2]), &p(&[1]), 2, 64).unwrap(),
            IBig::ONE
        );
        assert_eq!(
            brute_force_sur_count(&p(&[1]), &p(&[1, 1]), 2, 64).unwrap(),
            IBig::ZERO
        );
    }

    #[test]
    fn quotient_types() {
        let t = GroupTable::new(&g(2, &[2, 1]), 64).unwrap();
        let mut pairs: Vec<_> = t
            .all_subgroups()
            .iter()
            .map(|h| {
                (
                    t.subgroup_type(h).to_string(),
                    t.quotient_type(h).to_string(),
                )
            })
            .collect();
        pairs.sort();
        assert!(pairs.contains(&("0".into(), "2,1".into())));
        assert!(pairs.contains(&("2,1".into(), "0".into())));
    }

    #[test]
    fn chains_literal_vs_types() {
        for v in [&[1, 1][..], &[2, 1], &[3]] {
            for k in 0..=3 {
                assert_eq!(
                    brute_force_chain_count_literal(&g(2, v), k, 64).unwrap(),
                    brute_force_chain_count(&g(2, v), k, 64).unwrap()
                );
            }
        }
    }
}
