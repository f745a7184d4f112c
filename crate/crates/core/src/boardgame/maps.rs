use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::error::{domain, Error, Result};

/// Largest depth accepted by the enumerators.
pub const MAX_DEPTH: usize = 8;

/// `μ : {k+1, …, k+q} → {k, …, k+q−1}` with `μ(k+1) = k` and `μ(l) < l`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CollapsingMap {
    pub k: usize,
    pub q: usize,
    /// `mu[i] = μ(k+1+i)`.
    pub mu: Vec<usize>,
}

impl CollapsingMap {
    pub fn new(k: usize, mu: Vec<usize>) -> Result<Self> {
        let m = Self { k, q: mu.len(), mu };
        if !m.is_admissible() {
            return domain(format!("inadmissible collapsing map {m}"));
        }
        Ok(m)
    }

    /// `μ(l)` for `l` in `k+1..=k+q`.
    pub fn at(&self, l: usize) -> usize {
        self.mu[l - self.k - 1]
    }

    pub fn is_admissible(&self) -> bool {
        if self.k == 0 || self.mu.len() != self.q {
            return false;
        }
        if self.q > 0 && self.mu[0] != self.k {
            return false;
        }
        self.mu
            .iter()
            .enumerate()
            .all(|(i, &m)| m >= self.k && m < self.k + 1 + i)
    }
}

impl fmt::Display for CollapsingMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={} mu=[", self.k)?;
        for (i, m) in self.mu.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "]")
    }
}

fn factorial(q: usize) -> u128 {
    (1..=q as u128).product()
}

/// All admissible maps in lexicographic order of `μ`.
pub fn enumerate_maps(k: usize, q: usize) -> Result<Vec<CollapsingMap>> {
    if k == 0 {
        return domain("base order k must be at least 1");
    }
    if q > MAX_DEPTH {
        return Err(Error::SizeRefusal {
            count: factorial(q),
            limit: factorial(MAX_DEPTH),
        });
    }
    let mut out = Vec::new();
    let mut mu = Vec::with_capacity(q);
    fn rec(k: usize, q: usize, mu: &mut Vec<usize>, out: &mut Vec<CollapsingMap>) {
        let i = mu.len();
        if i == q {
            out.push(CollapsingMap { k, q, mu: mu.clone() });
            return;
        }
        let l = k + 1 + i;
        let choices = if i == 0 { k..k + 1 } else { k..l };
        for m in choices {
            mu.push(m);
            rec(k, q, mu, out);
            mu.pop();
        }
    }
    rec(k, q, &mut mu, &mut out);
    Ok(out)
}

/// Adjacent-column exchange at `l` (`k+1 < l < k+q`), allowed when `μ(l+1) ≠ l`.
///
/// Columns `l` and `l+1` swap their targets and later targets `l`, `l+1` are
/// relabelled. The move is an involution.
pub fn apply_move(m: &CollapsingMap, l: usize) -> Option<CollapsingMap> {
    let (k, q) = (m.k, m.q);
    if !(l > k + 1 && l < k + q) || m.at(l + 1) == l {
        return None;
    }
    let i = l - k - 1;
    let mut mu = m.mu.clone();
    mu.swap(i, i + 1);
    for v in mu.iter_mut().skip(i + 2) {
        if *v == l {
            *v = l + 1;
        } else if *v == l + 1 {
            *v = l;
        }
    }
    Some(CollapsingMap { k, q, mu })
}

fn neighbours(m: &CollapsingMap) -> impl Iterator<Item = CollapsingMap> + '_ {
    (m.k + 2..m.k + m.q).filter_map(move |l| apply_move(m, l))
}

/// Orbit of `m` under the move relation, sorted.
pub fn orbit(m: &CollapsingMap) -> Vec<CollapsingMap> {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(m.clone());
    queue.push_back(m.clone());
    while let Some(cur) = queue.pop_front() {
        for nb in neighbours(&cur) {
            if seen.insert(nb.clone()) {
                queue.push_back(nb);
            }
        }
    }
    seen.into_iter().collect()
}

/// Lexicographically least member of the orbit.
pub fn canonicalize(m: &CollapsingMap) -> CollapsingMap {
    orbit(m).into_iter().next().expect("orbit contains m")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceClass {
    pub representative: CollapsingMap,
    pub member_count: usize,
    pub members: Option<Vec<CollapsingMap>>,
}

/// Partition of the admissible maps into classes, ordered by representative.
pub fn classes(k: usize, q: usize, keep_members: bool) -> Result<Vec<EquivalenceClass>> {
    let maps = enumerate_maps(k, q)?;
    let index: BTreeMap<&CollapsingMap, usize> = maps.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut parent: Vec<usize> = (0..maps.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (i, m) in maps.iter().enumerate() {
        for nb in neighbours(m) {
            let j = index[&nb];
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                // keep the smaller index as root: it is the lexicographic minimum
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                parent[hi] = lo;
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..maps.len() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    Ok(groups
        .into_iter()
        .map(|(root, members)| EquivalenceClass {
            representative: maps[root].clone(),
            member_count: members.len(),
            members: keep_members.then(|| members.iter().map(|&i| maps[i].clone()).collect()),
        })
        .collect())
}

/// Number of distinct canonical forms.
pub fn class_count(k: usize, q: usize) -> Result<usize> {
    Ok(classes(k, q, false)?.len())
}
