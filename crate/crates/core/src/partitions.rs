//! Young diagram combinatorics.
//!
//! Partitions label irreducible representations of the symmetric group. For
//! the swap representation of `S(n)` on `(C^d)^{⊗n}` every diagram of height
//! at most `d` occurs with multiplicity [`mult_sw`] and dimension
//! [`dim_sym`]. Everything here is exact integer/rational arithmetic.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An integer partition, stored as weakly decreasing positive rows.
///
/// The empty partition is the unique partition of 0.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition(Vec<usize>);

impl Partition {
    /// Builds a partition from row lengths. Trailing zero rows are dropped.
    pub fn new(mut rows: Vec<usize>) -> Result<Self> {
        while rows.last() == Some(&0) {
            rows.pop();
        }
        if rows.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidPartition(format!("rows {rows:?} are not weakly decreasing")));
        }
        if rows.contains(&0) {
            return Err(Error::InvalidPartition(format!("rows {rows:?} contain an interior zero")));
        }
        Ok(Partition(rows))
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    /// Single-row diagram `(n)`.
    pub fn row(n: usize) -> Self {
        if n == 0 {
            Partition::empty()
        } else {
            Partition(vec![n])
        }
    }

    pub fn rows(&self) -> &[usize] {
        &self.0
    }

    /// Row length `i` (0-based); zero past the last row.
    pub fn part(&self, i: usize) -> usize {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn weight(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn height(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn conjugate(&self) -> Partition {
        let width = self.part(0);
        Partition((0..width).map(|j| self.0.iter().filter(|&&r| r > j).count()).collect())
    }

    /// Hook lengths in row-major cell order.
    pub fn hooks(&self) -> Vec<usize> {
        let conj = self.conjugate();
        let mut out = Vec::with_capacity(self.weight());
        for (i, &len) in self.0.iter().enumerate() {
            for j in 0..len {
                out.push(len - j - 1 + conj.part(j) - i);
            }
        }
        out
    }

    /// True when every row of `self` fits inside the matching row of `other`.
    pub fn is_contained_in(&self, other: &Partition) -> bool {
        self.height() <= other.height() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Accepts `3,1`, `(3,1)`, `[3, 1]`, and `()` for the empty diagram.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches(['(', '[']).trim_end_matches([')', ']']);
        if inner.trim().is_empty() {
            return Ok(Partition::empty());
        }
        let rows = inner
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidPartition(format!("{s:?}: {e}")))?;
        Partition::new(rows)
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;

    fn try_from(rows: Vec<usize>) -> Result<Self> {
        Partition::new(rows)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.0
    }
}

/// All partitions of `n` with at most `d` rows, in strongly decreasing
/// lexicographic order starting from `(n)`.
pub fn enumerate(n: usize, d: usize) -> Vec<Partition> {
    fn rec(remaining: usize, max_part: usize, rows_left: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition(cur.clone()));
            return;
        }
        if rows_left == 0 {
            return;
        }
        for first in (1..=remaining.min(max_part)).rev() {
            cur.push(first);
            rec(remaining - first, first, rows_left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, d, &mut Vec::new(), &mut out);
    out
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// Dimension of the `S(n)` irrep labelled by `p` (hook-length formula).
pub fn dim_sym(p: &Partition) -> BigUint {
    let hooks: BigUint = p.hooks().into_iter().map(BigUint::from).product();
    factorial(p.weight()) / hooks
}

/// Multiplicity of the irrep `p` in the swap representation on
/// `(C^d)^{⊗|p|}`; zero when the height exceeds `d`.
pub fn mult_sw(p: &Partition, d: usize) -> BigUint {
    if p.height() > d {
        return BigUint::zero();
    }
    let mut num = BigUint::one();
    for (i, &len) in p.rows().iter().enumerate() {
        for j in 0..len {
            num *= BigUint::from(d + j - i);
        }
    }
    let hooks: BigUint = p.hooks().into_iter().map(BigUint::from).product();
    num / hooks
}

/// Diagrams obtained by adding one box, ordered by the row receiving it.
pub fn add_box_targets(p: &Partition, d: usize) -> Vec<Partition> {
    let rows = p.rows();
    let mut out = Vec::new();
    for i in 0..=rows.len() {
        if i == rows.len() {
            if rows.len() < d {
                let mut q = rows.to_vec();
                q.push(1);
                out.push(Partition(q));
            }
        } else if i == 0 || rows[i - 1] > rows[i] {
            let mut q = rows.to_vec();
            q[i] += 1;
            out.push(Partition(q));
        }
    }
    out
}

/// Diagrams obtained by removing one box, ordered by the row losing it.
pub fn remove_box_targets(p: &Partition) -> Vec<Partition> {
    let rows = p.rows();
    let mut out = Vec::new();
    for i in 0..rows.len() {
        if i + 1 == rows.len() || rows[i] > rows[i + 1] {
            let mut q = rows.to_vec();
            q[i] -= 1;
            out.push(Partition::new(q).expect("removing a corner keeps rows decreasing"));
        }
    }
    out
}

/// Number of ways to reach every diagram `k` boxes above `alpha`, one box at
/// a time, staying within height `d`.
pub fn path_counts_from(alpha: &Partition, k: usize, d: usize) -> BTreeMap<Partition, BigUint> {
    let mut level: BTreeMap<Partition, BigUint> = BTreeMap::new();
    if alpha.height() > d {
        return level;
    }
    level.insert(alpha.clone(), BigUint::one());
    for _ in 0..k {
        let mut next: BTreeMap<Partition, BigUint> = BTreeMap::new();
        for (p, count) in &level {
            for q in add_box_targets(p, d) {
                *next.entry(q).or_default() += count;
            }
        }
        level = next;
    }
    level
}

/// `m_{μ/α}`: the number of `k`-step box-addition chains from `alpha` to `mu`
/// through diagrams of height at most `d`.
pub fn path_count(mu: &Partition, alpha: &Partition, k: usize, d: usize) -> Result<BigUint> {
    if mu.weight() != alpha.weight() + k {
        return Err(Error::WeightMismatch { expected: alpha.weight() + k, found: mu.weight() });
    }
    if mu.height() > d || !alpha.is_contained_in(mu) {
        return Ok(BigUint::zero());
    }
    // Only diagrams sandwiched between alpha and mu can lie on a chain.
    let mut level: HashMap<Partition, BigUint> = HashMap::from([(alpha.clone(), BigUint::one())]);
    for _ in 0..k {
        let mut next: HashMap<Partition, BigUint> = HashMap::new();
        for (p, count) in &level {
            for q in add_box_targets(p, d) {
                if q.is_contained_in(mu) {
                    *next.entry(q).or_default() += count;
                }
            }
        }
        level = next;
    }
    Ok(level.remove(mu).unwrap_or_default())
}

fn recip_factorial(x: i64) -> BigRational {
    if x < 0 {
        BigRational::zero()
    } else {
        BigRational::new(BigInt::one(), BigInt::from(factorial(x as usize)))
    }
}

/// Two-row closed form for `m_{μ/α}`: `k!` times the determinant of the
/// 2×2 matrix with entries `1/(μ_i − α_j − i + j)!` (zero for negative
/// arguments).
pub fn path_count_det_d2(mu: &Partition, alpha: &Partition, k: usize) -> Result<BigUint> {
    for p in [mu, alpha] {
        if p.height() > 2 {
            return Err(Error::HeightExceeded { height: p.height(), limit: 2 });
        }
    }
    if mu.weight() != alpha.weight() + k {
        return Err(Error::WeightMismatch { expected: alpha.weight() + k, found: mu.weight() });
    }
    let entry = |i: usize, j: usize| {
        let arg = mu.part(i) as i64 - alpha.part(j) as i64 - i as i64 + j as i64;
        recip_factorial(arg)
    };
    let det = entry(0, 0) * entry(1, 1) - entry(0, 1) * entry(1, 0);
    let value = det * BigRational::from_integer(BigInt::from(factorial(k)));
    if !value.is_integer() || value.is_negative() {
        return Err(Error::RelationViolated(format!(
            "determinant for {mu}/{alpha} is not a non-negative integer: {value}"
        )));
    }
    Ok(value.to_integer().to_biguint().expect("checked non-negative"))
}

/// `Σ_{ν ⊢ n, h(ν) ≤ d} m_ν²` summed directly over the diagrams.
pub fn sum_squared_mults(n: usize, d: usize) -> BigUint {
    enumerate(n, d).iter().map(|p| mult_sw(p, d).pow(2)).sum()
}

/// Size of the conjugacy class with the given cycle type.
pub fn class_size(cycle_type: &Partition) -> BigUint {
    factorial(cycle_type.weight()) / centralizer_order(cycle_type)
}

fn centralizer_order(cycle_type: &Partition) -> BigUint {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &len in cycle_type.rows() {
        *counts.entry(len).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(len, c)| BigUint::from(len).pow(c as u32) * factorial(c))
        .product()
}

/// The same sum via the character inner product of the swap representation:
/// `(1/n!) Σ_σ d^{2·cycles(σ)}`, grouped by cycle type (fixed points count as
/// cycles).
pub fn sum_squared_mults_by_cycles(n: usize, d: usize) -> BigUint {
    let total: BigUint = enumerate(n, n)
        .iter()
        .map(|ct| class_size(ct) * BigUint::from(d).pow(2 * ct.height() as u32))
        .sum();
    let nf = factorial(n);
    debug_assert!((&total % &nf).is_zero());
    total / nf
}

/// Both sides of the squared-multiplicity ratio identity:
/// `Σ_{ν⊢N} m_ν² / Σ_{α⊢N−k} m_α²` and `Π_{j<k} (d²+N−1−j)/(N−j)`.
pub fn ratio_identity_check(n: usize, k: usize, d: usize) -> Result<(BigRational, BigRational)> {
    if k == 0 || k >= n {
        return Err(Error::InvalidParameters(format!("ratio identity needs 1 ≤ k ≤ N−1, got N={n}, k={k}")));
    }
    let big = |x: BigUint| BigInt::from(x);
    let lhs = BigRational::new(big(sum_squared_mults(n, d)), big(sum_squared_mults(n - k, d)));
    let d2 = (d * d) as i64;
    let rhs = (0..k as i64).fold(BigRational::one(), |acc, j| {
        acc * BigRational::new(BigInt::from(d2 + n as i64 - 1 - j), BigInt::from(n as i64 - j))
    });
    Ok((lhs, rhs))
}

/// Irreducible character `χ^λ` at a permutation of the given cycle type
/// (Murnaghan–Nakayama rule on beta-sets).
pub fn character(lambda: &Partition, cycle_type: &Partition) -> Result<i64> {
    if lambda.weight() != cycle_type.weight() {
        return Err(Error::WeightMismatch { expected: lambda.weight(), found: cycle_type.weight() });
    }
    let mut memo = HashMap::new();
    Ok(mn_rec(lambda.rows().to_vec(), cycle_type.rows(), &mut memo))
}

fn mn_rec(lambda: Vec<usize>, cycles: &[usize], memo: &mut HashMap<(Vec<usize>, usize), i64>) -> i64 {
    let Some((&r, rest)) = cycles.split_first() else {
        return if lambda.is_empty() { 1 } else { 0 };
    };
    let key = (lambda.clone(), cycles.len());
    if let Some(&v) = memo.get(&key) {
        return v;
    }
    let len = lambda.len();
    let beta: Vec<usize> = lambda.iter().enumerate().map(|(i, &l)| l + len - 1 - i).collect();
    let mut total = 0i64;
    for (i, &b) in beta.iter().enumerate() {
        if b < r || beta.contains(&(b - r)) {
            continue;
        }
        let nb = b - r;
        // Leg length of the removed rim hook.
        let crossed = beta.iter().filter(|&&x| nb < x && x < b).count();
        let mut next = beta.clone();
        next[i] = nb;
        next.sort_unstable_by(|a, b| b.cmp(a));
        let m = next.len();
        let shape: Vec<usize> = (0..m).map(|j| next[j] - (m - 1 - j)).filter(|&x| x > 0).collect();
        let sign = if crossed % 2 == 0 { 1 } else { -1 };
        total += sign * mn_rec(shape, rest, memo);
    }
    memo.insert(key, total);
    total
}

/// One row of a [`PartitionTable`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableEntry {
    pub partition: Partition,
    pub dim: BigUint,
    pub mult: BigUint,
}

/// All height-≤`d` partitions of `n` with their `S(n)` dimensions and
/// Schur–Weyl multiplicities, in strongly decreasing lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionTable {
    pub n: usize,
    pub d: usize,
    pub entries: Vec<TableEntry>,
    index: HashMap<Partition, usize>,
}

impl PartitionTable {
    pub fn build(n: usize, d: usize) -> Self {
        let entries = enumerate(n, d)
            .into_iter()
            .map(|p| TableEntry { dim: dim_sym(&p), mult: mult_sw(&p, d), partition: p })
            .collect();
        Self::from_entries(n, d, entries)
    }

    fn from_entries(n: usize, d: usize, entries: Vec<TableEntry>) -> Self {
        let index = entries.iter().enumerate().map(|(i, e)| (e.partition.clone(), i)).collect();
        PartitionTable { n, d, entries, index }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn position(&self, p: &Partition) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn get(&self, p: &Partition) -> Option<&TableEntry> {
        self.position(p).map(|i| &self.entries[i])
    }

    pub fn partitions(&self) -> impl Iterator<Item = &Partition> {
        self.entries.iter().map(|e| &e.partition)
    }

    /// `Σ m_λ d_λ`, which must equal `d^n`.
    pub fn schur_weyl_total(&self) -> BigUint {
        self.entries.iter().map(|e| &e.mult * &e.dim).sum()
    }

    pub fn to_json(&self) -> String {
        let file = CacheFile {
            version: CACHE_VERSION,
            n: self.n,
            d: self.d,
            entries: self
                .entries
                .iter()
                .map(|e| CacheEntry {
                    rows: e.partition.rows().to_vec(),
                    dim: e.dim.to_string(),
                    mult: e.mult.to_string(),
                })
                .collect(),
        };
        serde_json::to_string(&file).expect("cache file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CacheFile = serde_json::from_str(text).map_err(|e| Error::Cache(e.to_string()))?;
        if file.version != CACHE_VERSION {
            return Err(Error::Cache(format!("unsupported cache version {}", file.version)));
        }
        let mut entries = Vec::with_capacity(file.entries.len());
        for e in file.entries {
            let parse = |s: &str| s.parse::<BigUint>().map_err(|err| Error::Cache(format!("{s:?}: {err}")));
            entries.push(TableEntry { partition: Partition::new(e.rows)?, dim: parse(&e.dim)?, mult: parse(&e.mult)? });
        }
        let table = Self::from_entries(file.n, file.d, entries);
        let expected: Vec<Partition> = enumerate(table.n, table.d);
        if table.partitions().cloned().collect::<Vec<_>>() != expected
            || table.schur_weyl_total() != BigUint::from(table.d).pow(table.n as u32)
        {
            return Err(Error::Cache(format!("cached table for n={}, d={} is inconsistent", table.n, table.d)));
        }
        Ok(table)
    }

    fn cache_path(dir: &Path, n: usize, d: usize) -> PathBuf {
        dir.join(format!("partitions-v{CACHE_VERSION}-n{n}-d{d}.json"))
    }

    /// Reads the table from `dir` if present, otherwise builds and writes it.
    pub fn load_or_build(n: usize, d: usize, dir: &Path) -> Result<Self> {
        let path = Self::cache_path(dir, n, d);
        if let Ok(text) = std::fs::read_to_string(&path) {
            let table = Self::from_json(&text)?;
            if table.n == n && table.d == d {
                return Ok(table);
            }
        }
        let table = Self::build(n, d);
        std::fs::create_dir_all(dir)?;
        std::fs::write(&path, table.to_json())?;
        Ok(table)
    }
}

const CACHE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CacheFile {
    version: u32,
    n: usize,
    d: usize,
    entries: Vec<CacheEntry>,
}

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    rows: Vec<usize>,
    dim: String,
    mult: String,
}

type TableMemo = RwLock<HashMap<(usize, usize), Arc<PartitionTable>>>;

fn memo() -> &'static TableMemo {
    static MEMO: OnceLock<TableMemo> = OnceLock::new();
    MEMO.get_or_init(Default::default)
}

static DISK_CACHE: OnceLock<PathBuf> = OnceLock::new();

/// Enables the on-disk table cache for the rest of the process. Only the
/// first call has an effect.
pub fn set_disk_cache_dir(dir: PathBuf) -> bool {
    DISK_CACHE.set(dir).is_ok()
}

/// Memoized [`PartitionTable`] for `(n, d)`.
pub fn table(n: usize, d: usize) -> Arc<PartitionTable> {
    if let Some(t) = memo().read().expect("table memo poisoned").get(&(n, d)) {
        return Arc::clone(t);
    }
    let built = match DISK_CACHE.get() {
        // A broken cache file is not fatal: fall back to building in memory.
        Some(dir) => PartitionTable::load_or_build(n, d, dir).unwrap_or_else(|_| PartitionTable::build(n, d)),
        None => PartitionTable::build(n, d),
    };
    let mut guard = memo().write().expect("table memo poisoned");
    Arc::clone(guard.entry((n, d)).or_insert_with(|| Arc::new(built)))
}

/// Branching data between `S(N)` and `S(N−k)` restricted to height ≤ `d`:
/// both partition tables plus every path count `m_{μ/α}`.
#[derive(Clone, Debug)]
pub struct Branching {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    /// Diagrams `μ ⊢ N`.
    pub top: Arc<PartitionTable>,
    /// Diagrams `α ⊢ N−k`.
    pub base: Arc<PartitionTable>,
    /// `paths[a][m]` is `m_{μ/α}` for `α = base[a]`, `μ = top[m]`.
    pub paths: Vec<Vec<BigUint>>,
}

impl Branching {
    pub fn new(n: usize, k: usize, d: usize) -> Result<Self> {
        crate::check_params(n, k, d)?;
        let top = table(n, d);
        let base = table(n - k, d);
        let paths = base
            .partitions()
            .map(|alpha| {
                let reach = path_counts_from(alpha, k, d);
                top.partitions().map(|mu| reach.get(mu).cloned().unwrap_or_default()).collect()
            })
            .collect();
        Ok(Branching { n, k, d, top, base, paths })
    }

    /// Pairs `(a, m)` with `m_{μ/α} > 0`, in table order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.paths
            .iter()
            .enumerate()
            .flat_map(|(a, row)| row.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(move |(m, _)| (a, m)))
    }

    /// Diagrams `μ` reachable from `base[a]`.
    pub fn reachable(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.paths[a].iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(m, _)| m)
    }

    /// `|I| = N!/(N−k)!`, the number of ordered port tuples.
    pub fn index_count(&self) -> BigUint {
        ((self.n - self.k + 1)..=self.n).map(BigUint::from).product()
    }
}

pub(crate) fn biguint_to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}
