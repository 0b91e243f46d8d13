use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;

use wave_core::browse::{union_neighborhood, BrowseParams, BrowseSession, Seed};
use wave_core::ingest::{parse_records, serialize_records, Dataset, DocumentRecord};
use wave_core::layout::{export_dot, export_json, layout_lattice, layout_nested};
use wave_core::{apposition, nest, restrict_attributes, BitSet, ConceptLattice, FormalContext, RawValue, Scale};

fn context(rows: &[Vec<bool>], m: usize) -> FormalContext {
    let objects = (0..rows.len()).map(|g| format!("g{g}")).collect();
    let attributes = (0..m).map(|i| format!("m{i}")).collect();
    FormalContext::from_matrix(objects, attributes, rows).unwrap()
}

fn arb_context(max_g: usize, max_m: usize) -> impl Strategy<Value = FormalContext> {
    (0..=max_g, 0..=max_m).prop_flat_map(|(g, m)| {
        prop::collection::vec(prop::collection::vec(any::<bool>(), m), g).prop_map(move |rows| context(&rows, m))
    })
}

/// All concepts by closing every attribute subset.
fn brute_force(ctx: &FormalContext) -> BTreeSet<(Vec<usize>, Vec<usize>)> {
    let m = ctx.num_attributes();
    (0u32..1 << m)
        .map(|b| {
            let attrs = BitSet::from_indices(m, (0..m).filter(|i| b >> i & 1 == 1));
            let e = ctx.extent_of(&attrs);
            (e.to_vec(), ctx.intent_of(&e).to_vec())
        })
        .collect()
}

proptest! {
    #[test]
    fn concepts_match_brute_force(ctx in arb_context(7, 10)) {
        let lat = ConceptLattice::build(&ctx);
        let got: BTreeSet<_> = lat.concepts().iter().map(|c| (c.extent.to_vec(), c.intent.to_vec())).collect();
        prop_assert_eq!(got.len(), lat.len());
        prop_assert_eq!(got, brute_force(&ctx));
    }

    #[test]
    fn covers_are_the_transitive_reduction(ctx in arb_context(6, 6)) {
        let lat = ConceptLattice::build(&ctx);
        let cs = lat.concepts();
        let lt = |a: usize, b: usize| a != b && cs[a].extent.is_subset(&cs[b].extent);
        let mut expected = BTreeSet::new();
        for a in 0..cs.len() {
            for b in 0..cs.len() {
                if lt(a, b) && !(0..cs.len()).any(|c| lt(a, c) && lt(c, b)) {
                    expected.insert((a, b));
                }
            }
        }
        let got: BTreeSet<_> = lat.covers().iter().copied().collect();
        prop_assert_eq!(got, expected);
        for i in 0..cs.len() {
            prop_assert_eq!(lat.is_meet_irreducible(i), lat.upper_covers(i).len() == 1);
        }
        prop_assert!(lat.concepts()[lat.top()].extent.count() == ctx.num_objects());
        prop_assert!(lat.concepts()[lat.bottom()].intent.count() == ctx.num_attributes());
    }

    #[test]
    fn meet_and_join_are_bounds(ctx in arb_context(6, 6), picks in prop::collection::vec(any::<prop::sample::Index>(), 1..4)) {
        let lat = ConceptLattice::build(&ctx);
        let ids: Vec<usize> = picks.iter().map(|p| p.index(lat.len())).collect();
        let meet = lat.meet(&ids).unwrap();
        let join = lat.join(&ids).unwrap();
        for &i in &ids {
            prop_assert!(lat.leq(meet, i));
            prop_assert!(lat.leq(i, join));
        }
        for c in 0..lat.len() {
            if ids.iter().all(|&i| lat.leq(c, i)) {
                prop_assert!(lat.leq(c, meet));
            }
            if ids.iter().all(|&i| lat.leq(i, c)) {
                prop_assert!(lat.leq(join, c));
            }
        }
    }

    #[test]
    fn realized_nodes_are_apposed_concepts(rows in prop::collection::vec((0u8..8, 0u8..8), 0..10)) {
        let outer_rows: Vec<Vec<bool>> = rows.iter().map(|r| (0..3).map(|i| r.0 >> i & 1 == 1).collect()).collect();
        let inner_rows: Vec<Vec<bool>> = rows.iter().map(|r| (0..3).map(|i| r.1 >> i & 1 == 1).collect()).collect();
        let objects: Vec<String> = (0..rows.len()).map(|g| format!("g{g}")).collect();
        let outer = FormalContext::from_matrix(objects.clone(), (0..3).map(|i| format!("o{i}")).collect(), &outer_rows).unwrap();
        let inner = FormalContext::from_matrix(objects, (0..3).map(|i| format!("i{i}")).collect(), &inner_rows).unwrap();
        let nd = nest(&outer, &inner).unwrap();
        prop_assert_eq!(nd.product_count(), nd.outer.len() * nd.inner.len());
        let apposed = ConceptLattice::build(&apposition(&[&outer, &inner]).unwrap());
        prop_assert_eq!(nd.realized_count, apposed.len());
        let layout = layout_nested(&nd);
        prop_assert_eq!(layout.nodes.len(), nd.product_count());
        prop_assert_eq!(layout.nodes.iter().filter(|n| n.class == "realized").count(), nd.realized_count);
    }

    #[test]
    fn layout_is_graded_and_deterministic(ctx in arb_context(6, 6)) {
        let lat = ConceptLattice::build(&ctx);
        let l = layout_lattice(&lat);
        for e in &l.edges {
            prop_assert!(l.nodes[e.lower].y >= l.nodes[e.upper].y + 1.0);
        }
        let coords: BTreeSet<(i64, i64)> = l.nodes.iter().map(|n| ((n.x * 1e6) as i64, (n.y * 1e6) as i64)).collect();
        prop_assert_eq!(coords.len(), l.nodes.len());
        let again = layout_lattice(&ConceptLattice::build(&ctx));
        prop_assert_eq!(export_json(&l), export_json(&again));
        prop_assert_eq!(export_dot(&l), export_dot(&again));
    }

    #[test]
    fn neighborhoods_shrink_under_tighter_parameters(
        ctx in arb_context(8, 6).prop_filter("needs an object", |c| c.num_objects() > 0),
        seed in any::<prop::sample::Index>(),
        threshold in 0usize..4,
        radius in 0.0f64..=1.0,
        top_k in 1usize..6,
    ) {
        let lat = Arc::new(ConceptLattice::build(&ctx));
        let g = ctx.objects()[seed.index(ctx.num_objects())].clone();
        let threshold = threshold.min(ctx.num_attributes());
        let base = BrowseParams { threshold, top_k: Some(top_k + 1), radius: Some(radius / 2.0), auto_simplify: false };
        let s = BrowseSession::over(lat.clone(), Seed::Object(g.clone()), base.clone()).unwrap();
        let objs = |s: &BrowseSession| s.neighborhood().object_ids().iter().cloned().collect::<BTreeSet<_>>();
        let here = objs(&s);
        prop_assert!(here.contains(&g));
        for tighter in [
            BrowseParams { radius: Some(radius), ..base.clone() },
            BrowseParams { top_k: Some(top_k), ..base.clone() },
        ] {
            let t = s.with_params(tighter).unwrap();
            prop_assert!(objs(&t).is_subset(&here));
        }
        let n = s.neighborhood();
        let same_attributes = ConceptLattice::build(&restrict_attributes(&ctx, n.attribute_ids()).unwrap());
        prop_assert!(n.lattice.len() <= same_attributes.len());
    }

    #[test]
    fn union_is_commutative_on_sets(ctx in arb_context(8, 5).prop_filter("two objects", |c| c.num_objects() > 1), a in any::<prop::sample::Index>(), b in any::<prop::sample::Index>()) {
        let lat = Arc::new(ConceptLattice::build(&ctx));
        let pick = |i: &prop::sample::Index| Seed::Object(ctx.objects()[i.index(ctx.num_objects())].clone());
        let params = BrowseParams { threshold: 1.min(ctx.num_attributes()), ..Default::default() };
        let na = BrowseSession::over(lat.clone(), pick(&a), params.clone()).unwrap().neighborhood();
        let nb = BrowseSession::over(lat.clone(), pick(&b), params).unwrap().neighborhood();
        let ab = union_neighborhood(&na, &nb).unwrap();
        let ba = union_neighborhood(&nb, &na).unwrap();
        prop_assert_eq!(ab.object_ids(), ba.object_ids());
        prop_assert_eq!(ab.attribute_ids(), ba.attribute_ids());
        let aa = union_neighborhood(&na, &na).unwrap();
        prop_assert_eq!(aa.object_ids(), na.object_ids());
        let c = ab.comparison.unwrap();
        prop_assert!((0.0..=1.0).contains(&c.distance));
    }

    #[test]
    fn ordinal_and_interordinal_match_arithmetic(v in 0.0f64..200.0, mut cuts in prop::collection::btree_set(1u32..200, 1..5)) {
        let asc: Vec<f64> = std::mem::take(&mut cuts).into_iter().map(f64::from).collect();
        let desc: Vec<f64> = asc.iter().rev().copied().collect();
        let ord = Scale::ordinal("x", &desc).unwrap();
        let got: BTreeSet<String> = ord.assign_names(&RawValue::Number(v)).unwrap().into_iter().collect();
        let want: BTreeSet<String> = desc.iter().filter(|&&t| v >= t).map(|t| format!("x≥{t}")).collect();
        prop_assert_eq!(got, want);
        let inter = Scale::interordinal("x", &asc).unwrap();
        let got: BTreeSet<String> = inter.assign_names(&RawValue::Number(v)).unwrap().into_iter().collect();
        let want: BTreeSet<String> = asc.iter().map(|c| if v <= *c { format!("x≤{c}") } else { format!("x>{c}") }).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn context_formats_round_trip(ctx in arb_context(6, 6)) {
        prop_assert_eq!(FormalContext::parse(&ctx.to_ctx_string()).unwrap(), ctx.clone());
        let json = serde_json::to_string(&ctx).unwrap();
        prop_assert_eq!(serde_json::from_str::<FormalContext>(&json).unwrap(), ctx);
    }

    #[test]
    fn records_round_trip(docs in prop::collection::vec(
        (
            "[A-Z][A-Z0-9-]{0,8}",
            prop::option::of("(http|ftp)://[a-z]{1,6}\\.(ch|de|org)(/[a-z]{1,4}){0,3}"),
            prop::option::of(0u32..2000),
            prop::option::of(0u32..500),
            prop::option::of(0i64..2_000_000_000),
            prop::collection::vec("[a-z]{1,6}", 0..3),
        ),
        0..8,
    )) {
        let mut seen = BTreeSet::new();
        let records: Vec<DocumentRecord> = docs
            .into_iter()
            .filter(|d| seen.insert(d.0.clone()))
            .map(|(id, url, score, size, modified, keywords)| DocumentRecord {
                id,
                url,
                score: score.map(f64::from),
                size: size.map(f64::from),
                modified,
                keywords,
            })
            .collect();
        let ds = Dataset { records, size_unit: Some("lines".into()), ..Default::default() };
        prop_assert_eq!(parse_records(&serialize_records(&ds)).unwrap(), ds);
    }
}
