//! VCSP instances, exhaustive solving and the value gap `δ_I`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::{index_unchecked, Caps, DomainSize, Label};
use crate::error::{Error, Result};
use crate::rational::{ExtRat, Rat};
use crate::wrel::{Language, WeightedRelation};

/// A valued constraint: a relation name applied to a scope of variable indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Constraint {
    #[serde(rename = "rel")]
    pub relation: String,
    pub scope: Vec<usize>,
}

impl Constraint {
    pub fn new(relation: impl Into<String>, scope: Vec<usize>) -> Self {
        Constraint {
            relation: relation.into(),
            scope,
        }
    }
}

/// An instance `I(x_1..x_n) = Σ γ_i(x_i)`. Constraints may repeat.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VcspInstance {
    num_vars: usize,
    language: Language,
    constraints: Vec<Constraint>,
}

impl VcspInstance {
    pub fn new(num_vars: usize, language: Language, constraints: Vec<Constraint>) -> Result<Self> {
        for c in &constraints {
            let rel = language
                .get(&c.relation)
                .ok_or_else(|| Error::invalid(format!("unknown relation {:?}", c.relation)))?;
            if rel.arity() != c.scope.len() {
                return Err(Error::shape(format!(
                    "relation {:?} has arity {} but its scope has {} variables",
                    c.relation,
                    rel.arity(),
                    c.scope.len()
                )));
            }
            if let Some(&bad) = c.scope.iter().find(|&&v| v >= num_vars) {
                return Err(Error::IndexOutOfRange {
                    index: bad,
                    count: num_vars,
                });
            }
        }
        Ok(VcspInstance {
            num_vars,
            language,
            constraints,
        })
    }

    pub fn with_constraints<S: Into<String>>(
        num_vars: usize,
        language: Language,
        constraints: impl IntoIterator<Item = (S, Vec<usize>)>,
    ) -> Result<Self> {
        let constraints = constraints
            .into_iter()
            .map(|(name, scope)| Constraint::new(name, scope))
            .collect();
        VcspInstance::new(num_vars, language, constraints)
    }

    pub fn domain(&self) -> DomainSize {
        self.language.domain()
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn language(&self) -> &Language {
        &self.language
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn relation(&self, c: &Constraint) -> &WeightedRelation {
        self.language
            .get(&c.relation)
            .expect("validated at construction")
    }

    pub fn evaluate(&self, assignment: &[Label]) -> Result<ExtRat> {
        if assignment.len() != self.num_vars {
            return Err(Error::shape(format!(
                "assignment has {} labels for {} variables",
                assignment.len(),
                self.num_vars
            )));
        }
        self.domain().check_tuple(assignment)?;
        let mut total = ExtRat::zero();
        let mut args = Vec::new();
        for c in &self.constraints {
            args.clear();
            args.extend(c.scope.iter().map(|&v| assignment[v]));
            total = &total + self.relation(c).value_unchecked(&args);
            if total.is_infinite() {
                break;
            }
        }
        Ok(total)
    }

    /// Calls `visit` with every assignment (lexicographic order) and its value.
    pub fn for_each_value(
        &self,
        caps: &Caps,
        mut visit: impl FnMut(&[Label], ExtRat),
    ) -> Result<()> {
        let d = self.domain();
        caps.check_assignments(d, self.num_vars)?;
        let compiled = self.compile();
        let mut args = Vec::new();
        for assignment in d.tuples(self.num_vars) {
            let mut total = ExtRat::zero();
            for (table, scope) in &compiled {
                args.clear();
                args.extend(scope.iter().map(|&v| assignment[v]));
                total = &total + &table[index_unchecked(d.get(), &args)];
                if total.is_infinite() {
                    break;
                }
            }
            visit(&assignment, total);
        }
        Ok(())
    }

    /// Identical constraints merged into one table pre-multiplied by their count.
    fn compile(&self) -> Vec<(Vec<ExtRat>, &[usize])> {
        let mut counts: BTreeMap<&Constraint, usize> = BTreeMap::new();
        for c in &self.constraints {
            *counts.entry(c).or_default() += 1;
        }
        counts
            .into_iter()
            .map(|(c, count)| {
                let table = self
                    .relation(c)
                    .table()
                    .iter()
                    .map(|v| v.times(count))
                    .collect();
                (table, c.scope.as_slice())
            })
            .collect()
    }

    /// Exact optimum; the argmin is the lexicographically smallest optimal assignment.
    pub fn solve(&self, caps: &Caps) -> Result<Solution> {
        let mut best = ExtRat::Infinite;
        let mut argmin = None;
        self.for_each_value(caps, |s, v| {
            if v < best {
                best = v;
                argmin = Some(s.to_vec());
            }
        })?;
        Ok(Solution {
            optimum: best,
            argmin,
        })
    }

    /// Smallest gap between two distinct finite objective values, if any.
    pub fn delta(&self, caps: &Caps) -> Result<Option<Rat>> {
        let mut values = BTreeSet::new();
        self.for_each_value(caps, |_, v| {
            if let ExtRat::Finite(v) = v {
                values.insert(v);
            }
        })?;
        let values: Vec<Rat> = values.into_iter().collect();
        Ok(values.windows(2).map(|w| &w[1] - &w[0]).min())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub optimum: ExtRat,
    pub argmin: Option<Vec<Label>>,
}

#[derive(Serialize, Deserialize)]
struct InstanceRepr {
    n: usize,
    language: Language,
    constraints: Vec<Constraint>,
}

impl Serialize for VcspInstance {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        InstanceRepr {
            n: self.num_vars,
            language: self.language.clone(),
            constraints: self.constraints.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for VcspInstance {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let r = InstanceRepr::deserialize(de)?;
        VcspInstance::new(r.n, r.language, r.constraints).map_err(serde::de::Error::custom)
    }
}
