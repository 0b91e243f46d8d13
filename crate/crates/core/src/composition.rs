//! Apposition of contexts and nested line diagrams.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::context::FormalContext;
use crate::error::{Error, Result};
use crate::lattice::{ConceptLattice, LatticeJson};

/// Reorders the rows of `ctx` to follow `objects`, which must be the same set.
fn align(ctx: &FormalContext, objects: &[String]) -> Result<FormalContext> {
    if ctx.objects() == objects {
        return Ok(ctx.clone());
    }
    if ctx.num_objects() != objects.len() {
        return Err(Error::ObjectSetMismatch);
    }
    let rows = objects
        .iter()
        .map(|g| {
            ctx.object_id(g)
                .map(|i| ctx.row(i).clone())
                .map_err(|_| Error::ObjectSetMismatch)
        })
        .collect::<Result<Vec<_>>>()?;
    FormalContext::from_rows(objects.to_vec(), ctx.attributes().to_vec(), rows)
}

/// Side-by-side composition over a shared object set. Attribute lists are
/// concatenated in argument order; the object order of the first context
/// is kept.
pub fn apposition(ctxs: &[&FormalContext]) -> Result<FormalContext> {
    let Some(first) = ctxs.first() else {
        return FormalContext::from_rows(vec![], vec![], vec![]);
    };
    let objects = first.objects().to_vec();
    let aligned = ctxs
        .iter()
        .map(|c| align(c, &objects))
        .collect::<Result<Vec<_>>>()?;

    let mut attributes = Vec::new();
    let mut seen = HashSet::new();
    for c in &aligned {
        for m in c.attributes() {
            if !seen.insert(m.as_str()) {
                return Err(Error::AttributeCollision(m.clone()));
            }
            attributes.push(m.clone());
        }
    }
    let rows = (0..objects.len())
        .map(|g| {
            let mut row = BitSet::empty(attributes.len());
            let mut offset = 0;
            for c in &aligned {
                for m in c.row(g).iter() {
                    row.insert(offset + m);
                }
                offset += c.num_attributes();
            }
            row
        })
        .collect();
    FormalContext::from_rows(objects, attributes, rows)
}

/// Subcontext on the kept attribute columns; column order is preserved.
pub fn restrict_attributes<S: AsRef<str>>(ctx: &FormalContext, keep: &[S]) -> Result<FormalContext> {
    let keep_set = ctx.attribute_set(keep)?;
    let kept: Vec<usize> = keep_set.iter().collect();
    let rows = (0..ctx.num_objects())
        .map(|g| {
            BitSet::from_indices(
                kept.len(),
                kept.iter().enumerate().filter(|(_, &m)| ctx.incident(g, m)).map(|(i, _)| i),
            )
        })
        .collect();
    FormalContext::from_rows(
        ctx.objects().to_vec(),
        kept.iter().map(|&m| ctx.attributes()[m].clone()).collect(),
        rows,
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellNode {
    pub inner_id: usize,
    /// Whether the combined intent is closed in the apposed context.
    pub realized: bool,
    /// Intersection of the outer and inner extents.
    pub extent: BitSet,
    /// Index in the apposed lattice, when realized.
    pub apposed_id: Option<usize>,
}

/// The copy of the inner lattice drawn inside one outer concept.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub outer_id: usize,
    pub nodes: Vec<CellNode>,
}

#[derive(Clone, Debug)]
pub struct NestedDiagram {
    pub outer: ConceptLattice,
    pub inner: ConceptLattice,
    pub apposed: ConceptLattice,
    pub cells: Vec<Cell>,
    pub realized_count: usize,
    /// For three or more scales: the nesting of everything inside the outer
    /// scale. `inner` is then the lattice of their apposition.
    pub nested: Option<Box<NestedDiagram>>,
}

impl NestedDiagram {
    /// Number of nodes in the product of the outer and inner lattices.
    pub fn product_count(&self) -> usize {
        self.outer.len() * self.inner.len()
    }

    pub fn node(&self, outer_id: usize, inner_id: usize) -> &CellNode {
        &self.cells[outer_id].nodes[inner_id]
    }

    pub fn to_json(&self) -> NestedJson {
        let ctx = self.apposed.context();
        NestedJson {
            product: self.product_count(),
            realized: self.realized_count,
            outer: self.outer.to_json(),
            inner: self.inner.to_json(),
            cells: self
                .cells
                .iter()
                .map(|c| CellJson {
                    outer_id: c.outer_id,
                    nodes: c
                        .nodes
                        .iter()
                        .map(|n| CellNodeJson {
                            inner_id: n.inner_id,
                            realized: n.realized,
                            extent: ctx.object_names(&n.extent),
                        })
                        .collect(),
                })
                .collect(),
            nested: self.nested.as_ref().map(|n| Box::new(n.to_json())),
        }
    }
}

/// Builds the nested diagram of `inner` drawn inside `outer`.
pub fn nest(outer: &FormalContext, inner: &FormalContext) -> Result<NestedDiagram> {
    let inner = align(inner, outer.objects())?;
    let apposed_ctx = apposition(&[outer, &inner])?;
    let outer_lat = ConceptLattice::build(outer);
    let inner_lat = ConceptLattice::build(&inner);
    let apposed = ConceptLattice::build(&apposed_ctx);

    let offset = outer.num_attributes();
    let width = apposed_ctx.num_attributes();
    let mut realized_count = 0;
    let cells = outer_lat
        .concepts()
        .iter()
        .enumerate()
        .map(|(outer_id, oc)| {
            let nodes = inner_lat
                .concepts()
                .iter()
                .enumerate()
                .map(|(inner_id, ic)| {
                    let union = BitSet::from_indices(
                        width,
                        oc.intent.iter().chain(ic.intent.iter().map(|m| m + offset)),
                    );
                    let apposed_id = apposed.index_of_intent(&union);
                    realized_count += apposed_id.is_some() as usize;
                    CellNode {
                        inner_id,
                        realized: apposed_id.is_some(),
                        extent: oc.extent.intersection(&ic.extent),
                        apposed_id,
                    }
                })
                .collect();
            Cell { outer_id, nodes }
        })
        .collect();

    Ok(NestedDiagram {
        outer: outer_lat,
        inner: inner_lat,
        apposed,
        cells,
        realized_count,
        nested: None,
    })
}

/// Nests any number of scale contexts, outermost first, folding from the
/// right. With `rank`, contexts are first stably sorted by ascending key.
pub fn nest_many(ctxs: &[FormalContext], rank: Option<&[i64]>) -> Result<NestedDiagram> {
    let mut order: Vec<usize> = (0..ctxs.len()).collect();
    if let Some(keys) = rank {
        if keys.len() != ctxs.len() {
            return Err(Error::BadScaleSpec(format!(
                "{} rank keys for {} scales",
                keys.len(),
                ctxs.len()
            )));
        }
        order.sort_by_key(|&i| keys[i]);
    }
    let sorted: Vec<&FormalContext> = order.iter().map(|&i| &ctxs[i]).collect();
    nest_sorted(&sorted)
}

fn nest_sorted(ctxs: &[&FormalContext]) -> Result<NestedDiagram> {
    match ctxs {
        [] => Err(Error::BadScaleSpec("nothing to nest".into())),
        [only] => {
            let trivial = FormalContext::from_rows(
                only.objects().to_vec(),
                vec![],
                vec![BitSet::empty(0); only.num_objects()],
            )?;
            nest(only, &trivial)
        }
        [outer, inner] => nest(outer, inner),
        [outer, rest @ ..] => {
            let inner_nesting = nest_sorted(rest)?;
            let inner_ctx = inner_nesting.apposed.context().clone();
            let mut diagram = nest(outer, &inner_ctx)?;
            diagram.nested = Some(Box::new(inner_nesting));
            Ok(diagram)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellNodeJson {
    pub inner_id: usize,
    pub realized: bool,
    pub extent: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellJson {
    pub outer_id: usize,
    pub nodes: Vec<CellNodeJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NestedJson {
    pub product: usize,
    pub realized: usize,
    pub outer: LatticeJson,
    pub inner: LatticeJson,
    pub cells: Vec<CellJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nested: Option<Box<NestedJson>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::tests::toy;
    use crate::scales::{RawValue, Scale};

    fn ctx(pairs: &[(&str, &str)], objects: &[&str]) -> FormalContext {
        let base = FormalContext::from_pairs(pairs.iter().copied()).unwrap();
        let objects: Vec<String> = objects.iter().map(|s| s.to_string()).collect();
        let rows = objects
            .iter()
            .map(|g| match base.object_id(g) {
                Ok(i) => base.row(i).clone(),
                Err(_) => BitSet::empty(base.num_attributes()),
            })
            .collect();
        FormalContext::from_rows(objects, base.attributes().to_vec(), rows).unwrap()
    }

    #[test]
    fn apposition_concatenates_attributes() {
        let a = ctx(&[("1", "p"), ("2", "q")], &["1", "2"]);
        let b = ctx(&[("2", "r"), ("1", "s")], &["2", "1"]);
        let ab = apposition(&[&a, &b]).unwrap();
        assert_eq!(ab.objects(), ["1", "2"]);
        assert_eq!(ab.attributes(), ["p", "q", "r", "s"]);
        assert_eq!(ab.incidence_strings(), ["X..X", ".XX."]);
    }

    #[test]
    fn apposition_with_attribute_free_context_is_identity() {
        let k = toy();
        let empty = FormalContext::from_rows(k.objects().to_vec(), vec![], vec![BitSet::empty(0); 3]).unwrap();
        assert_eq!(apposition(&[&k, &empty]).unwrap(), k);
    }

    #[test]
    fn apposition_is_associative() {
        let a = ctx(&[("1", "p")], &["1", "2"]);
        let b = ctx(&[("2", "q")], &["1", "2"]);
        let c = ctx(&[("1", "r"), ("2", "r")], &["1", "2"]);
        let left = apposition(&[&apposition(&[&a, &b]).unwrap(), &c]).unwrap();
        let right = apposition(&[&a, &apposition(&[&b, &c]).unwrap()]).unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn apposition_errors() {
        let a = ctx(&[("1", "p")], &["1", "2"]);
        let b = ctx(&[("1", "q")], &["1", "3"]);
        assert_eq!(apposition(&[&a, &b]), Err(Error::ObjectSetMismatch));
        let c = ctx(&[("1", "q")], &["1"]);
        assert_eq!(apposition(&[&a, &c]), Err(Error::ObjectSetMismatch));
        assert_eq!(apposition(&[&a, &a]), Err(Error::AttributeCollision("p".into())));
    }

    #[test]
    fn restrict_examples() {
        let k = toy();
        assert_eq!(restrict_attributes(&k, &["c", "a"]).unwrap().attributes(), ["a", "c"]);
        assert_eq!(restrict_attributes(&k, k.attributes()).unwrap(), k);
        let none = restrict_attributes::<&str>(&k, &[]).unwrap();
        assert_eq!(ConceptLattice::build(&none).len(), 1);
        assert_eq!(
            restrict_attributes(&k, &["zz"]),
            Err(Error::UnknownAttribute("zz".into()))
        );
    }

    #[test]
    fn nest_with_trivial_inner_matches_outer() {
        let k = toy();
        let trivial = FormalContext::from_rows(k.objects().to_vec(), vec![], vec![BitSet::empty(0); 3]).unwrap();
        let d = nest(&k, &trivial).unwrap();
        assert_eq!(d.inner.len(), 1);
        assert_eq!(d.product_count(), 6);
        assert_eq!(d.realized_count, 6);
        assert!(d.cells.iter().all(|c| c.nodes[0].realized));
    }

    #[test]
    fn nest_small_example() {
        let vals: Vec<(String, RawValue)> = [("a", 1.0), ("b", 5.0), ("c", 9.0)]
            .iter()
            .map(|(g, v)| (g.to_string(), RawValue::Number(*v)))
            .collect();
        let outer = Scale::ordinal("x", &[5.0]).unwrap().apply(&vals).unwrap();
        let inner = Scale::interordinal("y", &[3.0, 7.0]).unwrap().apply(&vals).unwrap();
        let d = nest(&outer, &inner).unwrap();
        assert_eq!(d.product_count(), d.outer.len() * d.inner.len());
        assert_eq!(d.realized_count, d.apposed.len());
        // Realized nodes map one-to-one onto apposed concepts.
        let mut ids: Vec<usize> = d.cells.iter().flat_map(|c| c.nodes.iter().filter_map(|n| n.apposed_id)).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), d.apposed.len());
    }

    #[test]
    fn nest_many_three_levels() {
        let a = ctx(&[("1", "p"), ("2", "p")], &["1", "2", "3"]);
        let b = ctx(&[("2", "q"), ("3", "q")], &["1", "2", "3"]);
        let c = ctx(&[("1", "r"), ("3", "r")], &["1", "2", "3"]);
        let d = nest_many(&[a.clone(), b.clone(), c.clone()], None).unwrap();
        let full = ConceptLattice::build(&apposition(&[&a, &b, &c]).unwrap());
        assert_eq!(d.realized_count, full.len());
        assert!(d.nested.is_some());
        assert_eq!(d.nested.as_ref().unwrap().outer.context().attributes(), ["q"]);

        let reordered = nest_many(&[a, b, c], Some(&[2, 1, 0])).unwrap();
        assert_eq!(reordered.outer.context().attributes(), ["r"]);
        assert_eq!(reordered.realized_count, full.len());
    }

    #[test]
    fn nested_json_shape() {
        let k = toy();
        let trivial = FormalContext::from_rows(k.objects().to_vec(), vec![], vec![BitSet::empty(0); 3]).unwrap();
        let json = serde_json::to_value(nest(&k, &trivial).unwrap().to_json()).unwrap();
        assert_eq!(json["product"], 6);
        assert_eq!(json["realized"], 6);
        assert_eq!(json["cells"][0]["nodes"][0]["realized"], true);
        assert!(json.get("nested").is_none());
    }
}
