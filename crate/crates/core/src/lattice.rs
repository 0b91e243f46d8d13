//! Concept enumeration and the concept lattice.
//!
//! Concepts are enumerated by closing attribute sets in lectic order, with
//! attribute 0 as the most significant position. The first concept is
//! therefore always the top (smallest closed intent) and the last is the
//! bottom (intent = M).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::context::FormalContext;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Concept {
    pub extent: BitSet,
    pub intent: BitSet,
}

/// The lectic successor of the closed set `current`, if any.
fn next_closure(ctx: &FormalContext, current: &BitSet) -> Option<BitSet> {
    let mut prefix = current.clone();
    for i in (0..ctx.num_attributes()).rev() {
        if prefix.contains(i) {
            prefix.remove(i);
            continue;
        }
        let mut candidate = prefix.clone();
        candidate.insert(i);
        let closed = ctx.closure_of(&candidate);
        if closed.agrees_below(&prefix, i) {
            return Some(closed);
        }
    }
    None
}

/// Every formal concept of `ctx`, in lectic order of intents.
pub fn all_concepts(ctx: &FormalContext) -> Vec<Concept> {
    let mut out = Vec::new();
    let mut intent = ctx.closure_of(&BitSet::empty(ctx.num_attributes()));
    loop {
        let extent = ctx.extent_of(&intent);
        let next = next_closure(ctx, &intent);
        out.push(Concept { extent, intent });
        match next {
            Some(n) => intent = n,
            None => break,
        }
    }
    out
}

/// Concepts of a context together with their cover relation.
#[derive(Clone, Debug)]
pub struct ConceptLattice {
    context: FormalContext,
    concepts: Vec<Concept>,
    covers: Vec<(usize, usize)>,
    upper: Vec<Vec<usize>>,
    lower: Vec<Vec<usize>>,
    top: usize,
    bottom: usize,
    meet_irreducible: Vec<bool>,
    by_intent: HashMap<BitSet, usize>,
}

impl ConceptLattice {
    pub fn build(ctx: &FormalContext) -> Self {
        let concepts = all_concepts(ctx);
        let by_intent: HashMap<BitSet, usize> = concepts
            .iter()
            .enumerate()
            .map(|(i, c)| (c.intent.clone(), i))
            .collect();

        // Upper neighbours of each concept (Lindig): for every object outside
        // the extent, the generated concept is a cover unless it also
        // swallows another still-minimal object.
        let n = concepts.len();
        let mut upper = vec![Vec::new(); n];
        let mut lower = vec![Vec::new(); n];
        for (ci, c) in concepts.iter().enumerate() {
            let outside = ctx.all_objects().difference(&c.extent);
            let mut minimal = outside.clone();
            for g in outside.iter() {
                let intent = c.intent.intersection(ctx.row(g));
                let extent = ctx.extent_of(&intent);
                let mut grown = extent.difference(&c.extent);
                grown.remove(g);
                if minimal.is_disjoint(&grown) {
                    upper[ci].push(by_intent[&intent]);
                } else {
                    minimal.remove(g);
                }
            }
            upper[ci].sort_unstable();
        }
        let mut covers = Vec::new();
        for (lo, ups) in upper.iter().enumerate() {
            for &up in ups {
                covers.push((lo, up));
                lower[up].push(lo);
            }
        }
        for l in &mut lower {
            l.sort_unstable();
        }
        let meet_irreducible = upper.iter().map(|u| u.len() == 1).collect();

        Self {
            context: ctx.clone(),
            top: 0,
            bottom: n - 1,
            concepts,
            covers,
            upper,
            lower,
            meet_irreducible,
            by_intent,
        }
    }

    pub fn context(&self) -> &FormalContext {
        &self.context
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn concept(&self, i: usize) -> Result<&Concept> {
        self.concepts.get(i).ok_or(Error::UnknownConcept(i))
    }

    /// `(lower, upper)` index pairs of the cover relation.
    pub fn covers(&self) -> &[(usize, usize)] {
        &self.covers
    }

    pub fn upper_covers(&self, i: usize) -> &[usize] {
        &self.upper[i]
    }

    pub fn lower_covers(&self, i: usize) -> &[usize] {
        &self.lower[i]
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn is_meet_irreducible(&self, i: usize) -> bool {
        self.meet_irreducible[i]
    }

    pub fn index_of_intent(&self, intent: &BitSet) -> Option<usize> {
        self.by_intent.get(intent).copied()
    }

    /// `a ≤ b` in the concept order (extent containment).
    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.concepts[a].extent.is_subset(&self.concepts[b].extent)
    }

    fn check(&self, cs: &[usize]) -> Result<()> {
        match cs.iter().find(|&&c| c >= self.concepts.len()) {
            Some(&c) => Err(Error::UnknownConcept(c)),
            None => Ok(()),
        }
    }

    /// Greatest lower bound. The empty meet is the top.
    pub fn meet(&self, cs: &[usize]) -> Result<usize> {
        self.check(cs)?;
        let mut extent = self.context.all_objects();
        for &c in cs {
            extent.intersect_with(&self.concepts[c].extent);
        }
        Ok(self.by_intent[&self.context.intent_of(&extent)])
    }

    /// Least upper bound. The empty join is the bottom.
    pub fn join(&self, cs: &[usize]) -> Result<usize> {
        self.check(cs)?;
        let mut intent = self.context.all_attributes();
        for &c in cs {
            intent.intersect_with(&self.concepts[c].intent);
        }
        Ok(self.by_intent[&self.context.closure_of(&intent)])
    }

    /// The smallest concept whose extent contains `g`.
    pub fn object_concept(&self, g: &str) -> Result<usize> {
        let gi = self.context.object_id(g)?;
        Ok(self.object_concept_index(gi))
    }

    pub fn object_concept_index(&self, g: usize) -> usize {
        self.by_intent[self.context.row(g)]
    }

    /// The largest concept whose intent contains `m`.
    pub fn attribute_concept(&self, m: &str) -> Result<usize> {
        let mi = self.context.attribute_id(m)?;
        Ok(self.attribute_concept_index(mi))
    }

    pub fn attribute_concept_index(&self, m: usize) -> usize {
        let attrs = BitSet::from_indices(self.context.num_attributes(), [m]);
        self.by_intent[&self.context.closure_of(&attrs)]
    }

    /// Objects whose object concept is `i` (reduced labelling).
    pub fn own_objects(&self, i: usize) -> Vec<String> {
        (0..self.context.num_objects())
            .filter(|&g| self.object_concept_index(g) == i)
            .map(|g| self.context.objects()[g].clone())
            .collect()
    }

    /// Attributes whose attribute concept is `i` (reduced labelling).
    pub fn own_attributes(&self, i: usize) -> Vec<String> {
        (0..self.context.num_attributes())
            .filter(|&m| self.attribute_concept_index(m) == i)
            .map(|m| self.context.attributes()[m].clone())
            .collect()
    }

    pub fn to_json(&self) -> LatticeJson {
        LatticeJson {
            concepts: self
                .concepts
                .iter()
                .enumerate()
                .map(|(id, c)| ConceptJson {
                    id,
                    extent: self.context.object_names(&c.extent),
                    intent: self.context.attribute_names(&c.intent),
                    meet_irreducible: self.meet_irreducible[id],
                })
                .collect(),
            covers: self.covers.clone(),
            top: self.top,
            bottom: self.bottom,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConceptJson {
    pub id: usize,
    pub extent: Vec<String>,
    pub intent: Vec<String>,
    pub meet_irreducible: bool,
}

/// Name-level view of a lattice for export.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeJson {
    pub concepts: Vec<ConceptJson>,
    pub covers: Vec<(usize, usize)>,
    pub top: usize,
    pub bottom: usize,
}
