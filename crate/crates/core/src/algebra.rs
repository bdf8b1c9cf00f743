//! Tuples, operations, superposition and clone generation over a finite domain.
//!
//! Tuples of arity `m` over `{0..d-1}` are indexed lexicographically with the
//! leftmost coordinate most significant. An operation of arity `k` is stored
//! as its table of `d^k` labels in that order, so an operation's table is
//! itself an `d^k`-tuple.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Label = u8;

/// Environment variable overriding [`Caps::op_cap`].
pub const OP_CAP_ENV: &str = "WCLONE_OP_CAP";

/// Resource caps that make infeasible enumerations fail loudly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    /// Maximum number of operations `d^(d^k)` of one arity that may be enumerated.
    pub op_cap: u64,
    /// Maximum number of assignments `d^n` a brute-force solve may visit.
    pub assignment_cap: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            op_cap: 1 << 16,
            assignment_cap: 1 << 20,
        }
    }
}

impl Caps {
    /// Defaults, with `op_cap` taken from `WCLONE_OP_CAP` when set.
    pub fn from_env() -> Result<Self> {
        let mut caps = Caps::default();
        if let Ok(text) = std::env::var(OP_CAP_ENV) {
            caps.op_cap = text
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("{OP_CAP_ENV}={text:?} is not an integer")))?;
        }
        Ok(caps)
    }

    /// Checks that all `d^(d^k)` operations of arity `k` fit under the cap.
    pub fn check_ops(&self, d: DomainSize, k: usize) -> Result<usize> {
        let inputs = d.count(k);
        let total = inputs.and_then(|m| checked_pow(d.get() as u128, m));
        match total {
            Some(n) if n <= self.op_cap as u128 => Ok(n as usize),
            _ => Err(Error::CapExceeded {
                what: format!(
                    "enumerating all operations of arity {k} on a domain of size {}",
                    d.get()
                ),
                required: match (inputs, total) {
                    (Some(m), Some(n)) => format!("d^(d^k) = {}^{m} = {n} operations", d.get()),
                    (Some(m), None) => {
                        format!("d^(d^k) = {}^{m} operations (beyond 2^128)", d.get())
                    }
                    _ => format!("d^(d^k) with d^k = {}^{k} beyond 2^128", d.get()),
                },
                cap: self.op_cap,
            }),
        }
    }

    pub fn check_assignments(&self, d: DomainSize, n: usize) -> Result<usize> {
        match d.count(n) {
            Some(total) if total as u64 <= self.assignment_cap => Ok(total),
            total => Err(Error::CapExceeded {
                what: format!(
                    "brute force over {n} variables on a domain of size {}",
                    d.get()
                ),
                required: match total {
                    Some(t) => format!("d^n = {}^{n} = {t} assignments", d.get()),
                    None => format!("d^n = {}^{n} assignments", d.get()),
                },
                cap: self.assignment_cap,
            }),
        }
    }
}

fn checked_pow(base: u128, exp: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Number of labels `d >= 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct DomainSize(usize);

impl DomainSize {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 || d > Label::MAX as usize + 1 {
            return Err(Error::InvalidDomain(d));
        }
        Ok(DomainSize(d))
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// `d^arity`, or `None` on overflow.
    pub fn count(self, arity: usize) -> Option<usize> {
        checked_pow(self.0 as u128, arity).and_then(|n| usize::try_from(n).ok())
    }

    pub fn labels(self) -> impl Iterator<Item = Label> {
        (0..self.0).map(|l| l as Label)
    }

    pub fn check_tuple(self, tuple: &[Label]) -> Result<()> {
        match tuple.iter().find(|&&l| l as usize >= self.0) {
            Some(&l) => Err(Error::LabelOutOfRange {
                label: l as usize,
                d: self.0,
            }),
            None => Ok(()),
        }
    }

    pub fn tuples(self, arity: usize) -> Tuples {
        Tuples::new(self, arity)
    }
}

impl<'de> Deserialize<'de> for DomainSize {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let d = usize::deserialize(de)?;
        DomainSize::new(d).map_err(serde::de::Error::custom)
    }
}

/// Lexicographic index of a tuple (leftmost coordinate most significant).
pub fn tuple_index(d: DomainSize, tuple: &[Label]) -> Result<usize> {
    d.check_tuple(tuple)?;
    Ok(index_unchecked(d.get(), tuple))
}

#[inline]
pub(crate) fn index_unchecked(d: usize, tuple: &[Label]) -> usize {
    tuple.iter().fold(0, |acc, &l| acc * d + l as usize)
}

/// Inverse of [`tuple_index`].
pub fn index_tuple(index: usize, arity: usize, d: DomainSize) -> Result<Vec<Label>> {
    let count = d
        .count(arity)
        .ok_or_else(|| Error::shape(format!("{}^{arity} tuples overflow", d.get())))?;
    if index >= count {
        return Err(Error::IndexOutOfRange { index, count });
    }
    let mut tuple = vec![0; arity];
    let mut rest = index;
    for slot in tuple.iter_mut().rev() {
        *slot = (rest % d.get()) as Label;
        rest /= d.get();
    }
    Ok(tuple)
}

/// All tuples of a given arity in lexicographic order.
#[derive(Clone, Debug)]
pub struct Tuples {
    d: usize,
    next: Option<Vec<Label>>,
}

impl Tuples {
    fn new(d: DomainSize, arity: usize) -> Self {
        Tuples {
            d: d.get(),
            next: Some(vec![0; arity]),
        }
    }
}

impl Iterator for Tuples {
    type Item = Vec<Label>;

    fn next(&mut self) -> Option<Vec<Label>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut pos = succ.len();
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            if (succ[pos] as usize) + 1 < self.d {
                succ[pos] += 1;
                self.next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(current)
    }
}

/// A sequence of `k` columns, each an `m`-tuple.
///
/// Row `i` of the transposed view is the `k`-tuple of the `i`-th entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TupleMatrix {
    columns: Vec<Vec<Label>>,
}

impl TupleMatrix {
    pub fn new(d: DomainSize, columns: Vec<Vec<Label>>) -> Result<Self> {
        if let Some(first) = columns.first() {
            if columns.iter().any(|c| c.len() != first.len()) {
                return Err(Error::shape(
                    "columns of a tuple matrix must share one arity",
                ));
            }
        }
        for c in &columns {
            d.check_tuple(c)?;
        }
        Ok(TupleMatrix { columns })
    }

    /// Builds the matrix from its transposed view (`m` rows of length `k`).
    pub fn from_rows(d: DomainSize, k: usize, rows: &[Vec<Label>]) -> Result<Self> {
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::shape(format!("every row must have length {k}")));
        }
        let columns = (0..k)
            .map(|j| rows.iter().map(|r| r[j]).collect())
            .collect();
        TupleMatrix::new(d, columns)
    }

    pub fn columns(&self) -> &[Vec<Label>] {
        &self.columns
    }

    /// Number of columns `k`.
    pub fn width(&self) -> usize {
        self.columns.len()
    }

    /// Arity `m` shared by the columns.
    pub fn height(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn row(&self, i: usize) -> Vec<Label> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    pub fn rows(&self) -> Vec<Vec<Label>> {
        (0..self.height()).map(|i| self.row(i)).collect()
    }

    /// Lexicographic index of each row; `f(X)[i] = table[row_indices[i]]`.
    pub fn row_indices(&self, d: DomainSize) -> Vec<usize> {
        (0..self.height())
            .map(|i| {
                self.columns
                    .iter()
                    .fold(0, |acc, c| acc * d.get() + c[i] as usize)
            })
            .collect()
    }
}

/// A `k`-ary operation on `{0..d-1}` stored as its lexicographic table.
///
/// Ordering (and therefore every sorted collection of operations) is by
/// domain, then arity, then table.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Operation {
    domain: DomainSize,
    arity: usize,
    table: Vec<Label>,
}

impl fmt::Debug for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Op{}{:?}", self.arity, self.table)
    }
}

impl Operation {
    pub fn new(d: DomainSize, arity: usize, table: Vec<Label>) -> Result<Self> {
        if arity == 0 {
            return Err(Error::invalid("operations must have arity at least 1"));
        }
        let expected = d.count(arity).ok_or_else(|| {
            Error::shape(format!("table of {}^{arity} entries overflows", d.get()))
        })?;
        if table.len() != expected {
            return Err(Error::shape(format!(
                "operation table of arity {arity} on d={} needs {expected} entries, got {}",
                d.get(),
                table.len()
            )));
        }
        d.check_tuple(&table)?;
        Ok(Operation {
            domain: d,
            arity,
            table,
        })
    }

    pub(crate) fn from_table_unchecked(d: DomainSize, arity: usize, table: Vec<Label>) -> Self {
        Operation {
            domain: d,
            arity,
            table,
        }
    }

    pub fn from_fn(d: DomainSize, arity: usize, f: impl Fn(&[Label]) -> Label) -> Result<Self> {
        let table = d.tuples(arity).map(|t| f(&t)).collect();
        Operation::new(d, arity, table)
    }

    /// The projection `e_i^(k)`; `i` is 1-based.
    pub fn projection(d: DomainSize, arity: usize, i: usize) -> Result<Self> {
        if i == 0 || i > arity {
            return Err(Error::IndexOutOfRange {
                index: i,
                count: arity,
            });
        }
        Operation::from_fn(d, arity, |t| t[i - 1])
    }

    pub fn constant(d: DomainSize, arity: usize, value: Label) -> Result<Self> {
        d.check_tuple(&[value])?;
        Operation::from_fn(d, arity, |_| value)
    }

    pub fn projections(d: DomainSize, arity: usize) -> Result<Vec<Self>> {
        (1..=arity)
            .map(|i| Operation::projection(d, arity, i))
            .collect()
    }

    pub fn domain(&self) -> DomainSize {
        self.domain
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &[Label] {
        &self.table
    }

    pub fn eval(&self, args: &[Label]) -> Label {
        self.table[index_unchecked(self.domain.get(), args)]
    }

    /// `Some(i)` (1-based) when this is the projection `e_i`.
    pub fn projection_index(&self) -> Option<usize> {
        let d = self.domain.get();
        (0..self.arity).find_map(|i| {
            // e_{i+1} at index t has value t / d^(k-1-i) mod d
            let stride = d.pow((self.arity - 1 - i) as u32);
            let hit = self
                .table
                .iter()
                .enumerate()
                .all(|(idx, &v)| (idx / stride) % d == v as usize);
            hit.then_some(i + 1)
        })
    }

    pub fn is_projection(&self) -> bool {
        self.projection_index().is_some()
    }

    /// Coordinatewise application to the columns of `x`.
    pub fn apply(&self, x: &TupleMatrix) -> Result<Vec<Label>> {
        if x.width() != self.arity {
            return Err(Error::shape(format!(
                "operation of arity {} applied to {} columns",
                self.arity,
                x.width()
            )));
        }
        for c in x.columns() {
            self.domain.check_tuple(c)?;
        }
        Ok(self.apply_rows(&x.row_indices(self.domain)))
    }

    /// Application given precomputed row indices of the argument matrix.
    #[inline]
    pub fn apply_rows(&self, row_indices: &[usize]) -> Vec<Label> {
        row_indices.iter().map(|&i| self.table[i]).collect()
    }

    /// The superposition `f[g_1, ..., g_k]`.
    pub fn superpose(&self, gs: &[Operation]) -> Result<Operation> {
        if gs.len() != self.arity {
            return Err(Error::shape(format!(
                "superposition of a {}-ary operation needs {} inner operations, got {}",
                self.arity,
                self.arity,
                gs.len()
            )));
        }
        let inner = gs[0].arity;
        if gs
            .iter()
            .any(|g| g.arity != inner || g.domain != self.domain)
        {
            return Err(Error::shape("inner operations must share arity and domain"));
        }
        Ok(self.superpose_tables(
            inner,
            &gs.iter().map(|g| g.table.as_slice()).collect::<Vec<_>>(),
        ))
    }

    pub(crate) fn superpose_tables(&self, inner_arity: usize, gs: &[&[Label]]) -> Operation {
        let d = self.domain.get();
        let len = gs.first().map_or(0, |g| g.len());
        let table = (0..len)
            .map(|i| self.table[gs.iter().fold(0, |acc, g| acc * d + g[i] as usize)])
            .collect();
        Operation::from_table_unchecked(self.domain, inner_arity, table)
    }
}

#[derive(Serialize, Deserialize)]
struct OperationRepr {
    d: DomainSize,
    k: usize,
    table: Vec<Label>,
}

impl Serialize for Operation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OperationRepr {
            d: self.domain,
            k: self.arity,
            table: self.table.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Operation {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let r = OperationRepr::deserialize(de)?;
        Operation::new(r.d, r.k, r.table).map_err(serde::de::Error::custom)
    }
}

/// All operations of arity `k` in table-lexicographic order.
pub fn enumerate_ops(d: DomainSize, k: usize, caps: &Caps) -> Result<OpEnumerator> {
    if k == 0 {
        return Err(Error::invalid("operations must have arity at least 1"));
    }
    caps.check_ops(d, k)?;
    let len = d.count(k).expect("checked by cap");
    Ok(OpEnumerator {
        d,
        arity: k,
        tables: Tuples::new(d, len),
    })
}

#[derive(Debug)]
pub struct OpEnumerator {
    d: DomainSize,
    arity: usize,
    tables: Tuples,
}

impl Iterator for OpEnumerator {
    type Item = Operation;

    fn next(&mut self) -> Option<Operation> {
        self.tables
            .next()
            .map(|t| Operation::from_table_unchecked(self.d, self.arity, t))
    }
}

/// Operations over one domain, grouped by arity, each group sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperationSet {
    domain: DomainSize,
    by_arity: BTreeMap<usize, BTreeSet<Operation>>,
}

impl OperationSet {
    pub fn new(domain: DomainSize) -> Self {
        OperationSet {
            domain,
            by_arity: BTreeMap::new(),
        }
    }

    pub fn from_ops(domain: DomainSize, ops: impl IntoIterator<Item = Operation>) -> Result<Self> {
        let mut set = OperationSet::new(domain);
        for op in ops {
            set.insert(op)?;
        }
        Ok(set)
    }

    pub fn domain(&self) -> DomainSize {
        self.domain
    }

    /// Returns whether the operation was new.
    pub fn insert(&mut self, op: Operation) -> Result<bool> {
        if op.domain != self.domain {
            return Err(Error::shape(
                "operation domain differs from the set's domain",
            ));
        }
        Ok(self.by_arity.entry(op.arity).or_default().insert(op))
    }

    pub fn contains(&self, op: &Operation) -> bool {
        self.by_arity.get(&op.arity).is_some_and(|s| s.contains(op))
    }

    pub fn arity(&self, k: usize) -> impl Iterator<Item = &Operation> {
        self.by_arity.get(&k).into_iter().flatten()
    }

    pub fn arity_vec(&self, k: usize) -> Vec<Operation> {
        self.arity(k).cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Operation> {
        self.by_arity.values().flatten()
    }

    pub fn len(&self) -> usize {
        self.by_arity.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn arities(&self) -> impl Iterator<Item = usize> + '_ {
        self.by_arity
            .iter()
            .filter(|(_, s)| !s.is_empty())
            .map(|(&k, _)| k)
    }

    pub fn is_subset(&self, other: &OperationSet) -> bool {
        self.iter().all(|op| other.contains(op))
    }
}

impl Serialize for OperationSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

/// Upper bound on superposition combinations tried in one closure round.
const CLOSURE_WORK_CAP: u128 = 1 << 28;

/// The part of the clone generated by `generators` consisting of operations of
/// arity at most `max_arity`.
///
/// For each arity `l` the `l`-ary part is the smallest set of `l`-ary
/// operations containing the projections and closed under `f[g_1..g_a]` for
/// generators `f`; this equals the `l`-ary part of the generated clone. The
/// computation is a semi-naive worklist in canonical order.
pub fn clone_closure(
    generators: &OperationSet,
    max_arity: usize,
    caps: &Caps,
) -> Result<OperationSet> {
    if max_arity == 0 {
        return Err(Error::invalid("max_arity must be at least 1"));
    }
    let d = generators.domain();
    let mut result = OperationSet::new(d);
    let gens: Vec<&Operation> = generators.iter().collect();
    for arity in 1..=max_arity {
        caps.check_ops(d, arity)?;
        for op in closure_at_arity(d, &gens, arity)? {
            result.insert(op)?;
        }
    }
    Ok(result)
}

fn closure_at_arity(d: DomainSize, gens: &[&Operation], arity: usize) -> Result<Vec<Operation>> {
    let mut seen: HashSet<Vec<Label>> = HashSet::new();
    let mut members: Vec<Vec<Label>> = Vec::new();
    for p in Operation::projections(d, arity)? {
        if seen.insert(p.table.clone()) {
            members.push(p.table);
        }
    }
    // members[..old] were already combined with each other in a previous round
    let mut old = 0;
    while old < members.len() {
        let frontier = members.len();
        for f in gens {
            let a = f.arity;
            let work = (frontier as u128)
                .checked_pow(a as u32)
                .unwrap_or(u128::MAX);
            if work > CLOSURE_WORK_CAP {
                return Err(Error::CapExceeded {
                    what: format!("clone closure at arity {arity} with a {a}-ary generator"),
                    required: format!("{frontier}^{a} superpositions per round"),
                    cap: CLOSURE_WORK_CAP as u64,
                });
            }
            let mut choice = vec![0usize; a];
            'combos: loop {
                if choice.iter().any(|&c| c >= old) {
                    let gs: Vec<&[Label]> = choice.iter().map(|&c| members[c].as_slice()).collect();
                    let h = f.superpose_tables(arity, &gs);
                    if seen.insert(h.table.clone()) {
                        members.push(h.table);
                    }
                }
                for pos in (0..a).rev() {
                    choice[pos] += 1;
                    if choice[pos] < frontier {
                        continue 'combos;
                    }
                    choice[pos] = 0;
                }
                break;
            }
        }
        old = frontier;
    }
    members.sort();
    Ok(members
        .into_iter()
        .map(|t| Operation::from_table_unchecked(d, arity, t))
        .collect())
}
