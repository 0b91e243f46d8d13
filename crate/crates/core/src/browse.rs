//! Seed-based exploration of a built view: local neighborhoods, their
//! simplification, union comparison and reseeding.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::classify::BuiltView;
use crate::context::FormalContext;
use crate::error::{Error, Result};
use crate::lattice::{ConceptLattice, LatticeJson};
use crate::scales::rank_attributes;

pub const DEFAULT_THRESHOLD: usize = 1;
pub const DEFAULT_TOP_K: usize = 12;
/// Concept budget targeted by automatic simplification.
pub const ACCEPTABLE_CONCEPTS: usize = 50;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "lowercase")]
pub enum Seed {
    Object(String),
    Attribute(String),
}

impl Seed {
    /// Resolves a bare id, preferring objects over attributes.
    pub fn resolve(ctx: &FormalContext, id: &str) -> Result<Seed> {
        if ctx.has_object(id) {
            Ok(Seed::Object(id.to_owned()))
        } else if ctx.has_attribute(id) {
            Ok(Seed::Attribute(id.to_owned()))
        } else {
            Err(Error::UnknownSeed(id.to_owned()))
        }
    }

    pub fn id(&self) -> &str {
        match self {
            Seed::Object(s) | Seed::Attribute(s) => s,
        }
    }

    fn check(&self, ctx: &FormalContext) -> Result<()> {
        let ok = match self {
            Seed::Object(g) => ctx.has_object(g),
            Seed::Attribute(m) => ctx.has_attribute(m),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::UnknownSeed(self.id().to_owned()))
        }
    }

    /// The seed's intent: an object's attributes, or the closure of a single
    /// attribute.
    fn intent(&self, ctx: &FormalContext) -> BitSet {
        match self {
            Seed::Object(g) => ctx.row(ctx.object_id(g).unwrap()).clone(),
            Seed::Attribute(m) => {
                let m = ctx.attribute_id(m).unwrap();
                ctx.closure_of(&BitSet::from_indices(ctx.num_attributes(), [m]))
            }
        }
    }

    fn objects(&self, ctx: &FormalContext) -> BitSet {
        match self {
            Seed::Object(g) => BitSet::from_indices(ctx.num_objects(), [ctx.object_id(g).unwrap()]),
            Seed::Attribute(m) => ctx.column(ctx.attribute_id(m).unwrap()).clone(),
        }
    }
}

/// Jaccard index of two attribute sets; two empty sets are identical.
pub fn jaccard(a: &BitSet, b: &BitSet) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        1.0
    } else {
        a.intersection_count(b) as f64 / union as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrowseParams {
    /// Minimum number of attributes shared with the seed's intent.
    pub threshold: usize,
    /// Attribute budget; `None` keeps every attribute.
    pub top_k: Option<usize>,
    /// Minimum Jaccard similarity to the seed.
    pub radius: Option<f64>,
    /// Raise the threshold until the lattice has at most
    /// [`ACCEPTABLE_CONCEPTS`] concepts.
    #[serde(default)]
    pub auto_simplify: bool,
}

impl Default for BrowseParams {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            top_k: Some(DEFAULT_TOP_K),
            radius: None,
            auto_simplify: false,
        }
    }
}

/// Serialized form of a session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub seed: Seed,
    pub threshold: usize,
    pub top_k: Option<usize>,
    pub radius: Option<f64>,
    pub history: Vec<Seed>,
}

#[derive(Clone, Debug)]
pub struct BrowseSession {
    global: Arc<ConceptLattice>,
    pub seed: Seed,
    pub params: BrowseParams,
    pub history: Vec<Seed>,
}

impl BrowseSession {
    pub fn new(view: &BuiltView, seed: Seed, params: BrowseParams) -> Result<Self> {
        Self::over(view.lattice.clone(), seed, params)
    }

    pub fn over(global: Arc<ConceptLattice>, seed: Seed, params: BrowseParams) -> Result<Self> {
        let ctx = global.context();
        seed.check(ctx)?;
        if params.threshold > ctx.num_attributes() {
            return Err(Error::BadThreshold {
                threshold: params.threshold,
                attributes: ctx.num_attributes(),
            });
        }
        if let Some(r) = params.radius {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::BadRadius(r));
            }
        }
        Ok(Self {
            global,
            seed,
            params,
            history: Vec::new(),
        })
    }

    pub fn global(&self) -> &Arc<ConceptLattice> {
        &self.global
    }

    /// Concept count of the full view lattice.
    pub fn global_concept_count(&self) -> usize {
        self.global.len()
    }

    pub fn state(&self) -> SessionState {
        SessionState {
            seed: self.seed.clone(),
            threshold: self.params.threshold,
            top_k: self.params.top_k,
            radius: self.params.radius,
            history: self.history.clone(),
        }
    }

    /// Moves to `new_seed`, remembering the old one.
    pub fn reseed(&self, new_seed: Seed) -> Result<Self> {
        new_seed.check(self.global.context())?;
        let mut next = self.clone();
        next.history.push(std::mem::replace(&mut next.seed, new_seed));
        Ok(next)
    }

    pub fn with_params(&self, params: BrowseParams) -> Result<Self> {
        let mut next = Self::over(self.global.clone(), self.seed.clone(), params)?;
        next.history = self.history.clone();
        Ok(next)
    }

    pub fn neighborhood(&self) -> Neighborhood {
        let mut threshold = self.params.threshold;
        let limit = self.global.context().num_attributes();
        loop {
            let n = self.neighborhood_at(threshold);
            if !self.params.auto_simplify || n.lattice.len() <= ACCEPTABLE_CONCEPTS || threshold >= limit {
                return n;
            }
            threshold += 1;
        }
    }

    fn neighborhood_at(&self, threshold: usize) -> Neighborhood {
        let ctx = self.global.context();
        let seed_intent = self.seed.intent(ctx);
        let mut objects = self.seed.objects(ctx);
        for g in 0..ctx.num_objects() {
            let row = ctx.row(g);
            let close_enough = row.intersection_count(&seed_intent) >= threshold;
            let within = self.params.radius.is_none_or(|r| jaccard(row, &seed_intent) >= r);
            if close_enough && within {
                objects.insert(g);
            }
        }

        let mut used = BitSet::empty(ctx.num_attributes());
        for g in objects.iter() {
            used.union_with(ctx.row(g));
        }
        let budget = self.params.top_k.unwrap_or(usize::MAX);
        let attributes = BitSet::from_indices(
            ctx.num_attributes(),
            rank_attributes(ctx).into_iter().filter(|&m| used.contains(m)).take(budget),
        );
        Neighborhood::build(self.global.clone(), self.seed.clone(), seed_intent, &objects, &attributes, threshold)
    }
}

/// What the old and new seeds of a union have in common.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedComparison {
    pub previous: Seed,
    pub shared: Vec<String>,
    /// `1 - jaccard` of the two seed intents.
    pub distance: f64,
}

#[derive(Clone, Debug)]
pub struct Neighborhood {
    global: Arc<ConceptLattice>,
    pub seed: Seed,
    seed_intent: BitSet,
    /// Object and attribute selections over the global context.
    objects: BitSet,
    attributes: BitSet,
    pub subcontext: FormalContext,
    pub lattice: ConceptLattice,
    pub scores: BTreeMap<String, f64>,
    pub threshold_used: usize,
    pub comparison: Option<SeedComparison>,
}

impl Neighborhood {
    fn build(
        global: Arc<ConceptLattice>,
        seed: Seed,
        seed_intent: BitSet,
        objects: &BitSet,
        attributes: &BitSet,
        threshold_used: usize,
    ) -> Self {
        let ctx = global.context();
        let cols: Vec<usize> = attributes.iter().collect();
        let rows = objects
            .iter()
            .map(|g| {
                BitSet::from_indices(
                    cols.len(),
                    cols.iter().enumerate().filter(|(_, &m)| ctx.incident(g, m)).map(|(i, _)| i),
                )
            })
            .collect();
        let subcontext = FormalContext::from_rows(ctx.object_names(objects), ctx.attribute_names(attributes), rows)
            .expect("selection of a valid context");
        let scores = objects
            .iter()
            .map(|g| (ctx.objects()[g].clone(), jaccard(ctx.row(g), &seed_intent)))
            .collect();
        let lattice = ConceptLattice::build(&subcontext);
        Self {
            seed,
            seed_intent,
            objects: objects.clone(),
            attributes: attributes.clone(),
            subcontext,
            lattice,
            scores,
            threshold_used,
            comparison: None,
            global,
        }
    }

    pub fn view_fingerprint(&self) -> u64 {
        self.global.context().fingerprint()
    }

    pub fn object_ids(&self) -> &[String] {
        self.subcontext.objects()
    }

    pub fn attribute_ids(&self) -> &[String] {
        self.subcontext.attributes()
    }

    pub fn seed_intent(&self) -> Vec<String> {
        self.global.context().attribute_names(&self.seed_intent)
    }

    pub fn to_json(&self) -> NeighborhoodJson {
        NeighborhoodJson {
            seed: self.seed.clone(),
            seed_intent: self.seed_intent(),
            threshold: self.threshold_used,
            context: self.subcontext.clone(),
            lattice: self.lattice.to_json(),
            scores: self.scores.clone(),
            comparison: self.comparison.clone(),
        }
    }
}

/// Union of two neighborhoods of the same view: union of objects and of
/// attributes, incidence taken from the view, seeded at `newer`'s seed.
pub fn union_neighborhood(older: &Neighborhood, newer: &Neighborhood) -> Result<Neighborhood> {
    if !Arc::ptr_eq(&older.global, &newer.global) && older.view_fingerprint() != newer.view_fingerprint() {
        return Err(Error::ViewMismatch);
    }
    let objects = older.objects.union(&newer.objects);
    let attributes = older.attributes.union(&newer.attributes);
    let mut n = Neighborhood::build(
        newer.global.clone(),
        newer.seed.clone(),
        newer.seed_intent.clone(),
        &objects,
        &attributes,
        older.threshold_used.min(newer.threshold_used),
    );
    n.comparison = Some(SeedComparison {
        previous: older.seed.clone(),
        shared: newer
            .global
            .context()
            .attribute_names(&older.seed_intent.intersection(&newer.seed_intent)),
        distance: 1.0 - jaccard(&older.seed_intent, &newer.seed_intent),
    });
    Ok(n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodJson {
    pub seed: Seed,
    pub seed_intent: Vec<String>,
    pub threshold: usize,
    pub context: FormalContext,
    pub lattice: LatticeJson,
    pub scores: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<SeedComparison>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn global() -> Arc<ConceptLattice> {
        let ctx = FormalContext::from_pairs([
            ("1", "a"),
            ("1", "b"),
            ("2", "a"),
            ("2", "b"),
            ("2", "c"),
            ("3", "c"),
            ("3", "d"),
            ("4", "d"),
            ("5", "a"),
        ])
        .unwrap();
        Arc::new(ConceptLattice::build(&ctx))
    }

    fn session(seed: &str, params: BrowseParams) -> BrowseSession {
        let g = global();
        let seed = Seed::resolve(g.context(), seed).unwrap();
        BrowseSession::over(g, seed, params).unwrap()
    }

    #[test]
    fn init_validates_seed_and_threshold() {
        let g = global();
        assert_eq!(Seed::resolve(g.context(), "zz"), Err(Error::UnknownSeed("zz".into())));
        assert_eq!(Seed::resolve(g.context(), "a").unwrap(), Seed::Attribute("a".into()));
        let too_high = BrowseParams {
            threshold: 5,
            ..Default::default()
        };
        assert!(matches!(
            BrowseSession::over(g.clone(), Seed::Object("1".into()), too_high),
            Err(Error::BadThreshold { .. })
        ));
        let bad_radius = BrowseParams {
            radius: Some(1.5),
            ..Default::default()
        };
        assert!(BrowseSession::over(g, Seed::Object("1".into()), bad_radius).is_err());
        let s = session("1", BrowseParams::default());
        assert_eq!(s.params.threshold, 1);
        assert_eq!(s.params.top_k, Some(12));
        assert_eq!(s.params.radius, None);
    }

    #[test]
    fn threshold_filters_shared_attributes() {
        let p = BrowseParams {
            threshold: 2,
            top_k: None,
            ..Default::default()
        };
        let n = session("1", p).neighborhood();
        assert_eq!(n.object_ids(), ["1", "2"]);
        let n = session("1", BrowseParams::default()).neighborhood();
        assert_eq!(n.object_ids(), ["1", "2", "5"]);
    }

    #[test]
    fn no_op_filter_returns_full_context() {
        let p = BrowseParams {
            threshold: 0,
            top_k: Some(100),
            radius: None,
            auto_simplify: false,
        };
        let n = session("4", p).neighborhood();
        assert_eq!(&n.subcontext, global().context());
    }

    #[test]
    fn radius_one_keeps_identical_intents() {
        let p = BrowseParams {
            threshold: 0,
            top_k: None,
            radius: Some(1.0),
            auto_simplify: false,
        };
        let n = session("1", p).neighborhood();
        assert_eq!(n.object_ids(), ["1"]);
        assert_eq!(n.scores["1"], 1.0);
    }

    #[test]
    fn top_k_keeps_most_general_attributes() {
        let p = BrowseParams {
            threshold: 0,
            top_k: Some(2),
            ..Default::default()
        };
        let n = session("1", p).neighborhood();
        // a has extent 3, then b, c, d with 2 each: b wins the tie by name.
        assert_eq!(n.attribute_ids(), ["a", "b"]);
    }

    #[test]
    fn attribute_seed_includes_its_extent() {
        let p = BrowseParams {
            threshold: 3,
            top_k: None,
            ..Default::default()
        };
        let n = session("c", p).neighborhood();
        assert_eq!(n.object_ids(), ["2", "3"]);
        assert_eq!(n.seed_intent(), ["c"]);
    }

    #[test]
    fn reseed_tracks_history() {
        let s = session("1", BrowseParams::default());
        let same = s.reseed(Seed::Object("1".into())).unwrap();
        assert_eq!(same.history, [Seed::Object("1".into())]);
        assert_eq!(same.neighborhood().object_ids(), s.neighborhood().object_ids());
        assert!(s.reseed(Seed::Object("x".into())).is_err());
        let state = serde_json::to_value(same.state()).unwrap();
        assert_eq!(state["seed"], serde_json::json!({"kind": "object", "id": "1"}));
        assert_eq!(state["threshold"], 1);
        assert!(state["radius"].is_null());
    }

    #[test]
    fn union_compares_seeds() {
        let p = BrowseParams {
            threshold: 1,
            top_k: None,
            ..Default::default()
        };
        let a = session("1", p.clone());
        let b = a.reseed(Seed::Object("3".into())).unwrap();
        let (na, nb) = (a.neighborhood(), b.neighborhood());
        let u = union_neighborhood(&na, &nb).unwrap();
        assert_eq!(u.object_ids(), ["1", "2", "3", "4", "5"]);
        assert_eq!(u.seed, Seed::Object("3".into()));
        let cmp = u.comparison.as_ref().unwrap();
        assert!(cmp.shared.is_empty());
        assert_eq!(cmp.distance, 1.0);

        let same = union_neighborhood(&na, &na).unwrap();
        assert_eq!(same.subcontext, na.subcontext);
        assert_eq!(same.comparison.unwrap().distance, 0.0);

        let other = Arc::new(ConceptLattice::build(&FormalContext::from_pairs([("1", "a")]).unwrap()));
        let foreign = BrowseSession::over(other, Seed::Object("1".into()), p).unwrap().neighborhood();
        assert_eq!(union_neighborhood(&na, &foreign).unwrap_err(), Error::ViewMismatch);
    }

    #[test]
    fn auto_simplify_raises_threshold_until_small() {
        let mut pairs = Vec::new();
        for g in 0..12 {
            for m in 0..10 {
                if (g * 7 + m * 3) % 5 < 2 {
                    pairs.push((format!("g{g}"), format!("m{m}")));
                }
            }
        }
        let ctx = FormalContext::from_pairs(pairs).unwrap();
        let g = Arc::new(ConceptLattice::build(&ctx));
        let p = BrowseParams {
            threshold: 0,
            top_k: None,
            radius: None,
            auto_simplify: true,
        };
        let s = BrowseSession::over(g, Seed::Object("g0".into()), p).unwrap();
        let n = s.neighborhood();
        assert!(n.lattice.len() <= ACCEPTABLE_CONCEPTS);
    }
}
