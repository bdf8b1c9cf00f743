//! Weighted relations, constraint languages and the weighted-relational-clone
//! operations: addition, minimisation, scaling, constant shifts, `Feas`, `Opt`
//! and projection of gadgets.

use std::collections::BTreeMap;

use num_traits::Signed;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::{index_unchecked, tuple_index, DomainSize, Label};
use crate::error::{Error, Result};
use crate::rational::{ExtRat, Rat};
use crate::vcsp::VcspInstance;

/// An `m`-ary weighted relation: a dense table of `d^m` extended rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightedRelation {
    domain: DomainSize,
    arity: usize,
    table: Vec<ExtRat>,
}

impl WeightedRelation {
    pub fn new(domain: DomainSize, arity: usize, table: Vec<ExtRat>) -> Result<Self> {
        let expected = domain
            .count(arity)
            .ok_or_else(|| Error::shape(format!("{}^{arity} entries overflow", domain.get())))?;
        if table.len() != expected {
            return Err(Error::shape(format!(
                "weighted relation of arity {arity} on d={} needs {expected} entries, got {}",
                domain.get(),
                table.len()
            )));
        }
        Ok(WeightedRelation {
            domain,
            arity,
            table,
        })
    }

    pub fn from_fn(
        domain: DomainSize,
        arity: usize,
        f: impl Fn(&[Label]) -> ExtRat,
    ) -> Result<Self> {
        let table = domain.tuples(arity).map(|t| f(&t)).collect();
        WeightedRelation::new(domain, arity, table)
    }

    pub fn constant(domain: DomainSize, arity: usize, value: ExtRat) -> Result<Self> {
        WeightedRelation::from_fn(domain, arity, |_| value.clone())
    }

    /// Builds a relation from integer weights, `None` meaning infinity.
    pub fn from_ints(domain: DomainSize, arity: usize, values: &[Option<i64>]) -> Result<Self> {
        let table = values
            .iter()
            .map(|v| v.map_or(ExtRat::Infinite, ExtRat::from_int))
            .collect();
        WeightedRelation::new(domain, arity, table)
    }

    /// The binary equality relation.
    pub fn equality(domain: DomainSize) -> Self {
        WeightedRelation::from_fn(domain, 2, |t| {
            if t[0] == t[1] {
                ExtRat::zero()
            } else {
                ExtRat::Infinite
            }
        })
        .expect("binary table size")
    }

    /// The unary empty relation.
    pub fn empty(domain: DomainSize) -> Self {
        WeightedRelation::constant(domain, 1, ExtRat::Infinite).expect("unary table size")
    }

    pub fn domain(&self) -> DomainSize {
        self.domain
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &[ExtRat] {
        &self.table
    }

    pub fn value(&self, tuple: &[Label]) -> Result<&ExtRat> {
        if tuple.len() != self.arity {
            return Err(Error::shape(format!(
                "tuple of length {} for a relation of arity {}",
                tuple.len(),
                self.arity
            )));
        }
        Ok(&self.table[tuple_index(self.domain, tuple)?])
    }

    #[inline]
    pub(crate) fn value_unchecked(&self, tuple: &[Label]) -> &ExtRat {
        &self.table[index_unchecked(self.domain.get(), tuple)]
    }

    pub fn at(&self, index: usize) -> &ExtRat {
        &self.table[index]
    }

    pub fn is_feasible(&self, tuple: &[Label]) -> bool {
        self.value_unchecked(tuple).is_finite()
    }

    /// Feasible tuples in lexicographic order.
    pub fn feasible_tuples(&self) -> Vec<Vec<Label>> {
        self.domain
            .tuples(self.arity)
            .zip(&self.table)
            .filter(|(_, v)| v.is_finite())
            .map(|(t, _)| t)
            .collect()
    }

    pub fn feasible_count(&self) -> usize {
        self.table.iter().filter(|v| v.is_finite()).count()
    }

    pub fn finite_values(&self) -> impl Iterator<Item = &Rat> {
        self.table.iter().filter_map(ExtRat::finite)
    }

    pub fn min_finite(&self) -> Option<Rat> {
        self.finite_values().min().cloned()
    }

    pub fn max_finite(&self) -> Option<Rat> {
        self.finite_values().max().cloned()
    }

    /// True when the relation takes at most one finite value, i.e. it is an
    /// (unweighted) relation up to an additive constant.
    pub fn is_relation(&self) -> bool {
        let mut values = self.finite_values();
        match values.next() {
            Some(first) => values.all(|v| v == first),
            None => true,
        }
    }

    pub fn map(&self, f: impl Fn(&ExtRat) -> ExtRat) -> Self {
        WeightedRelation {
            domain: self.domain,
            arity: self.arity,
            table: self.table.iter().map(f).collect(),
        }
    }

    /// `Feas(γ)`: zero where finite, infinite elsewhere. Equals `0 · γ`.
    pub fn feas(&self) -> Self {
        self.map(|v| {
            if v.is_finite() {
                ExtRat::zero()
            } else {
                ExtRat::Infinite
            }
        })
    }

    /// `Opt(γ)`: zero on minimum-weight tuples, infinite elsewhere.
    pub fn opt(&self) -> Self {
        match self.min_finite() {
            Some(min) => self.map(|v| {
                if *v == min {
                    ExtRat::zero()
                } else {
                    ExtRat::Infinite
                }
            }),
            None => self.clone(),
        }
    }

    /// Non-negative scaling, with `0 · inf = inf`.
    pub fn scale(&self, factor: &Rat) -> Result<Self> {
        if factor.is_negative() {
            return Err(Error::invalid(format!("negative scale factor {factor}")));
        }
        Ok(self.map(|v| v.scale(factor)))
    }

    /// Adds a rational constant to every finite entry.
    pub fn shift(&self, by: &Rat) -> Self {
        self.map(|v| v.shift(by))
    }

    /// The `r`-ary relation `(x_1..x_r) ↦ γ(x_{σ(1)}, .., x_{σ(s)})`; positions
    /// in `sigma` are 0-based.
    pub fn embed(&self, sigma: &[usize], r: usize) -> Result<Self> {
        if sigma.len() != self.arity {
            return Err(Error::shape(format!(
                "index map has {} entries for a relation of arity {}",
                sigma.len(),
                self.arity
            )));
        }
        if let Some(&bad) = sigma.iter().find(|&&p| p >= r) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                count: r,
            });
        }
        let d = self.domain.get();
        WeightedRelation::from_fn(self.domain, r, |t| {
            self.table[sigma.iter().fold(0, |acc, &p| acc * d + t[p] as usize)].clone()
        })
    }

    /// Addition `γ(x_1..x_r) = γ1(x_σ) + γ2(x_τ)` with 0-based index maps.
    pub fn add(
        gamma1: &Self,
        sigma: &[usize],
        gamma2: &Self,
        tau: &[usize],
        r: usize,
    ) -> Result<Self> {
        if gamma1.domain != gamma2.domain {
            return Err(Error::shape("added relations must share a domain"));
        }
        let a = gamma1.embed(sigma, r)?;
        let b = gamma2.embed(tau, r)?;
        Ok(a.pointwise_add(&b))
    }

    /// Entrywise sum of two relations of equal arity.
    pub fn pointwise_add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.arity, other.arity);
        WeightedRelation {
            domain: self.domain,
            arity: self.arity,
            table: self
                .table
                .iter()
                .zip(&other.table)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Minimises over the last `s` coordinates.
    pub fn minimise(&self, s: usize) -> Result<Self> {
        if s == 0 || s >= self.arity {
            return Err(Error::invalid(format!(
                "cannot minimise {s} trailing coordinates of a relation of arity {}",
                self.arity
            )));
        }
        let block = self.domain.count(s).expect("fits: smaller than the table");
        let table = self
            .table
            .chunks(block)
            .map(|chunk| chunk.iter().min().expect("domain is non-empty").clone())
            .collect();
        WeightedRelation::new(self.domain, self.arity - s, table)
    }
}

#[derive(Serialize, Deserialize)]
struct EntryRepr {
    tuple: Vec<Label>,
    value: ExtRat,
}

#[derive(Serialize, Deserialize)]
struct WeightedRelationRepr {
    d: DomainSize,
    m: usize,
    entries: Vec<EntryRepr>,
    #[serde(default = "default_infinite")]
    default: ExtRat,
}

fn default_infinite() -> ExtRat {
    ExtRat::Infinite
}

impl Serialize for WeightedRelation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        // Default is infinity when present, else the most frequent value
        // (smallest on ties), so dense weighted tables stay compact.
        let default = if self.table.iter().any(ExtRat::is_infinite) {
            ExtRat::Infinite
        } else {
            let mut counts: BTreeMap<&ExtRat, usize> = BTreeMap::new();
            for v in &self.table {
                *counts.entry(v).or_default() += 1;
            }
            let best = counts.values().copied().max().unwrap_or(0);
            counts
                .into_iter()
                .find(|(_, c)| *c == best)
                .map_or(ExtRat::Infinite, |(v, _)| v.clone())
        };
        let entries = self
            .domain
            .tuples(self.arity)
            .zip(&self.table)
            .filter(|(_, v)| **v != default)
            .map(|(tuple, v)| EntryRepr {
                tuple,
                value: v.clone(),
            })
            .collect();
        WeightedRelationRepr {
            d: self.domain,
            m: self.arity,
            entries,
            default,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for WeightedRelation {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = WeightedRelationRepr::deserialize(de)?;
        let size =
            r.d.count(r.m)
                .ok_or_else(|| D::Error::custom("relation table too large"))?;
        let mut table = vec![r.default; size];
        let mut seen = vec![false; size];
        for e in r.entries {
            if e.tuple.len() != r.m {
                return Err(D::Error::custom(format!(
                    "tuple {:?} does not have arity {}",
                    e.tuple, r.m
                )));
            }
            let idx = tuple_index(r.d, &e.tuple).map_err(D::Error::custom)?;
            if std::mem::replace(&mut seen[idx], true) {
                return Err(D::Error::custom(format!("duplicate tuple {:?}", e.tuple)));
            }
            table[idx] = e.value;
        }
        WeightedRelation::new(r.d, r.m, table).map_err(D::Error::custom)
    }
}

/// A named collection of weighted relations over one domain, ordered by name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Language {
    domain: DomainSize,
    relations: BTreeMap<String, WeightedRelation>,
}

impl Language {
    pub fn new(domain: DomainSize) -> Self {
        Language {
            domain,
            relations: BTreeMap::new(),
        }
    }

    pub fn from_relations<S: Into<String>>(
        domain: DomainSize,
        relations: impl IntoIterator<Item = (S, WeightedRelation)>,
    ) -> Result<Self> {
        let mut lang = Language::new(domain);
        for (name, rel) in relations {
            lang.insert(name, rel)?;
        }
        Ok(lang)
    }

    pub fn insert(&mut self, name: impl Into<String>, relation: WeightedRelation) -> Result<()> {
        let name = name.into();
        if relation.domain != self.domain {
            return Err(Error::shape(format!(
                "relation {name:?} has domain {} but the language has {}",
                relation.domain.get(),
                self.domain.get()
            )));
        }
        if self.relations.contains_key(&name) {
            return Err(Error::invalid(format!("duplicate relation name {name:?}")));
        }
        self.relations.insert(name, relation);
        Ok(())
    }

    pub fn domain(&self) -> DomainSize {
        self.domain
    }

    pub fn get(&self, name: &str) -> Option<&WeightedRelation> {
        self.relations.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &WeightedRelation)> {
        self.relations.iter()
    }

    pub fn relations(&self) -> impl Iterator<Item = &WeightedRelation> {
        self.relations.values()
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.relations.keys()
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn remove(&mut self, name: &str) -> Option<WeightedRelation> {
        self.relations.remove(name)
    }

    /// Largest finite weight over all relations.
    pub fn max_finite(&self) -> Option<Rat> {
        self.relations()
            .filter_map(WeightedRelation::max_finite)
            .max()
    }
}

impl Serialize for Language {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.relations.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Language {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let relations = BTreeMap::<String, WeightedRelation>::deserialize(de)?;
        let domain = match relations.values().next() {
            Some(r) => r.domain,
            None => {
                return Err(D::Error::custom(
                    "a language file needs at least one relation to fix the domain",
                ))
            }
        };
        Language::from_relations(domain, relations).map_err(D::Error::custom)
    }
}

/// Projection of a gadget: `π_L(I)(x) = min { I(s) : (s(v))_{v∈L} = x }`.
///
/// `scope` may repeat variables; a minimum over no assignments is infinity.
pub fn gadget_project(
    instance: &VcspInstance,
    scope: &[usize],
    caps: &crate::algebra::Caps,
) -> Result<WeightedRelation> {
    let n = instance.num_vars();
    if let Some(&bad) = scope.iter().find(|&&v| v >= n) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            count: n,
        });
    }
    let d = instance.domain();
    let size = d
        .count(scope.len())
        .ok_or_else(|| Error::shape("projection arity too large"))?;
    let mut table = vec![ExtRat::Infinite; size];
    let mut projected = vec![0 as Label; scope.len()];
    instance.for_each_value(caps, |assignment, value| {
        for (slot, &v) in projected.iter_mut().zip(scope) {
            *slot = assignment[v];
        }
        let idx = index_unchecked(d.get(), &projected);
        if value < table[idx] {
            table[idx] = value;
        }
    })?;
    WeightedRelation::new(d, scope.len(), table)
}
