//! Layered 2D layout of lattices and nested diagrams, with DOT and JSON
//! export.
//!
//! Layers are longest-path distances from the top, so every cover edge
//! points strictly downward. Within a layer, nodes are ordered by four
//! alternating barycenter sweeps. Coordinates are in abstract units with
//! unit spacing between layers and between neighbours in a layer; `z` is
//! always 0.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::composition::NestedDiagram;
use crate::error::Result;
use crate::lattice::ConceptLattice;

const SWEEPS: usize = 4;
/// Fraction of the inter-node spacing taken by a nested inner diagram.
const INNER_BOX: f64 = 0.8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutNode {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// Extent cardinality.
    pub size: f64,
    pub class: String,
    /// Outer concept of a nested node.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<usize>,
    /// Reduced labelling: objects and attributes introduced at this node.
    pub objects: Vec<String>,
    pub attributes: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutEdge {
    pub upper: usize,
    pub lower: usize,
}

/// Bounding box of one outer concept in a nested layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OuterBox {
    pub outer_id: usize,
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
    pub attributes: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagramLayout {
    pub nodes: Vec<LayoutNode>,
    pub edges: Vec<LayoutEdge>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boxes: Vec<OuterBox>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub box_edges: Vec<LayoutEdge>,
}

/// Layer index per concept: longest path from the top.
pub fn layers(lat: &ConceptLattice) -> Vec<usize> {
    let mut order: Vec<usize> = (0..lat.len()).collect();
    // Upper covers have strictly larger extents, so this is topological.
    order.sort_by_key(|&c| std::cmp::Reverse(lat.concepts()[c].extent.count()));
    let mut layer = vec![0; lat.len()];
    for c in order {
        layer[c] = lat.upper_covers(c).iter().map(|&u| layer[u] + 1).max().unwrap_or(0);
    }
    layer
}

fn barycenter_order(lat: &ConceptLattice, layer: &[usize]) -> Vec<Vec<usize>> {
    let depth = layer.iter().max().map_or(0, |d| d + 1);
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); depth];
    for (c, &l) in layer.iter().enumerate() {
        rows[l].push(c);
    }
    let mut pos = vec![0.0; lat.len()];
    let reindex = |rows: &[Vec<usize>], pos: &mut [f64]| {
        for row in rows {
            for (i, &c) in row.iter().enumerate() {
                pos[c] = i as f64;
            }
        }
    };
    reindex(&rows, &mut pos);
    for sweep in 0..SWEEPS {
        let downward = sweep % 2 == 0;
        let seq: Vec<usize> = if downward { (1..depth).collect() } else { (0..depth.saturating_sub(1)).rev().collect() };
        for l in seq {
            let mut keyed: Vec<(f64, f64, usize)> = rows[l]
                .iter()
                .map(|&c| {
                    let nbrs = if downward { lat.upper_covers(c) } else { lat.lower_covers(c) };
                    let bary = if nbrs.is_empty() {
                        pos[c]
                    } else {
                        nbrs.iter().map(|&n| pos[n]).sum::<f64>() / nbrs.len() as f64
                    };
                    (bary, pos[c], c)
                })
                .collect();
            keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            rows[l] = keyed.into_iter().map(|k| k.2).collect();
            for (i, &c) in rows[l].iter().enumerate() {
                pos[c] = i as f64;
            }
        }
    }
    rows
}

/// `(x, y)` per concept.
fn coordinates(lat: &ConceptLattice) -> Vec<(f64, f64)> {
    let layer = layers(lat);
    let rows = barycenter_order(lat, &layer);
    let mut xy = vec![(0.0, 0.0); lat.len()];
    for (l, row) in rows.iter().enumerate() {
        let half = (row.len() as f64 - 1.0) / 2.0;
        for (i, &c) in row.iter().enumerate() {
            xy[c] = (i as f64 - half, l as f64);
        }
    }
    xy
}

pub fn layout_lattice(lat: &ConceptLattice) -> DiagramLayout {
    let xy = coordinates(lat);
    let nodes = xy
        .iter()
        .enumerate()
        .map(|(id, &(x, y))| LayoutNode {
            id,
            x,
            y,
            z: 0.0,
            size: lat.concepts()[id].extent.count() as f64,
            class: "concept".into(),
            group: None,
            objects: lat.own_objects(id),
            attributes: lat.own_attributes(id),
        })
        .collect();
    let edges = lat
        .covers()
        .iter()
        .map(|&(lower, upper)| LayoutEdge { upper, lower })
        .collect();
    DiagramLayout {
        nodes,
        edges,
        ..Default::default()
    }
}

/// Lays out the outer lattice and draws a scaled copy of the inner lattice
/// inside each outer node. Node ids are `outer_id * |inner| + inner_id`.
pub fn layout_nested(nd: &NestedDiagram) -> DiagramLayout {
    let outer_xy = coordinates(&nd.outer);
    let inner_xy = coordinates(&nd.inner);
    let (min_x, max_x) = inner_xy.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (min_y, max_y) = inner_xy.iter().fold((f64::MAX, f64::MIN), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let extent = (max_x - min_x).max(max_y - min_y);
    let scale = if extent > 0.0 { INNER_BOX / extent } else { 0.0 };
    let (cx, cy) = ((min_x + max_x) / 2.0, (min_y + max_y) / 2.0);
    let k = nd.inner.len();
    let ctx = nd.apposed.context();

    let mut nodes = Vec::with_capacity(nd.product_count());
    let mut edges = Vec::new();
    for cell in &nd.cells {
        let (ox, oy) = outer_xy[cell.outer_id];
        for node in &cell.nodes {
            let (ix, iy) = inner_xy[node.inner_id];
            let objects = match node.apposed_id {
                Some(a) => nd.apposed.own_objects(a),
                None => Vec::new(),
            };
            nodes.push(LayoutNode {
                id: cell.outer_id * k + node.inner_id,
                x: ox + (ix - cx) * scale,
                y: oy + (iy - cy) * scale,
                z: 0.0,
                size: node.extent.count() as f64,
                class: if node.realized { "realized" } else { "unrealized" }.into(),
                group: Some(cell.outer_id),
                objects,
                attributes: nd.inner.own_attributes(node.inner_id),
            });
        }
        for &(lower, upper) in nd.inner.covers() {
            edges.push(LayoutEdge {
                upper: cell.outer_id * k + upper,
                lower: cell.outer_id * k + lower,
            });
        }
    }
    debug_assert!(ctx.num_objects() == nd.outer.context().num_objects());

    let boxes = outer_xy
        .iter()
        .enumerate()
        .map(|(outer_id, &(x, y))| OuterBox {
            outer_id,
            x,
            y,
            width: INNER_BOX,
            height: INNER_BOX,
            attributes: nd.outer.own_attributes(outer_id),
        })
        .collect();
    let box_edges = nd
        .outer
        .covers()
        .iter()
        .map(|&(lower, upper)| LayoutEdge { upper, lower })
        .collect();
    DiagramLayout {
        nodes,
        edges,
        boxes,
        box_edges,
    }
}

fn num(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.3}")
}

fn quote(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz text with pinned positions (points, y pointing up).
pub fn export_dot(layout: &DiagramLayout) -> String {
    let mut out = String::from("digraph lattice {\n  node [shape=circle];\n");
    let write_node = |out: &mut String, n: &LayoutNode, indent: &str| {
        let _ = writeln!(
            out,
            "{indent}n{} [label=\"{}\", pos=\"{},{}!\", class=\"{}\", tooltip=\"{}\"];",
            n.id,
            n.size as usize,
            num(n.x * 72.0),
            num(-n.y * 72.0),
            n.class,
            quote(&n.attributes.iter().chain(&n.objects).cloned().collect::<Vec<_>>().join(", ")),
        );
    };
    if layout.boxes.is_empty() {
        for n in &layout.nodes {
            write_node(&mut out, n, "  ");
        }
    } else {
        for b in &layout.boxes {
            let _ = writeln!(out, "  subgraph cluster_{} {{", b.outer_id);
            let _ = writeln!(out, "    label=\"{}\";", quote(&b.attributes.join(", ")));
            for n in layout.nodes.iter().filter(|n| n.group == Some(b.outer_id)) {
                write_node(&mut out, n, "    ");
            }
            out.push_str("  }\n");
        }
    }
    for e in &layout.edges {
        let _ = writeln!(out, "  n{} -> n{};", e.upper, e.lower);
    }
    out.push_str("}\n");
    out
}

pub fn export_json(layout: &DiagramLayout) -> String {
    serde_json::to_string_pretty(layout).expect("layout serializes")
}

pub fn import_json(text: &str) -> Result<DiagramLayout> {
    serde_json::from_str(text).map_err(|e| crate::Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composition::nest;
    use crate::context::tests::toy;
    use crate::context::FormalContext;
    use crate::scales::{RawValue, Scale};
    use crate::BitSet;

    fn chain(n: usize) -> ConceptLattice {
        let vals: Vec<(String, RawValue)> = (0..n).map(|i| (format!("g{i}"), RawValue::Number(i as f64))).collect();
        let thresholds: Vec<f64> = (1..n).rev().map(|t| t as f64).collect();
        ConceptLattice::build(&Scale::ordinal("x", &thresholds).unwrap().apply(&vals).unwrap())
    }

    #[test]
    fn chain_is_vertical() {
        let lat = chain(3);
        assert_eq!(lat.len(), 3);
        let l = layout_lattice(&lat);
        let mut ys: Vec<f64> = l.nodes.iter().map(|n| n.y).collect();
        ys.sort_by(f64::total_cmp);
        assert_eq!(ys, [0.0, 1.0, 2.0]);
        assert!(l.nodes.iter().all(|n| n.x == 0.0));
    }

    #[test]
    fn toy_has_four_layers() {
        let lat = ConceptLattice::build(&toy());
        let layer = layers(&lat);
        let mut count = [0; 4];
        for &l in &layer {
            count[l] += 1;
        }
        assert_eq!(count, [1, 2, 2, 1]);
        let l = layout_lattice(&lat);
        for e in &l.edges {
            assert!(l.nodes[e.lower].y > l.nodes[e.upper].y);
        }
    }

    #[test]
    fn single_concept_dot() {
        let ctx = FormalContext::from_rows(vec![], vec![], vec![]).unwrap();
        let dot = export_dot(&layout_lattice(&ConceptLattice::build(&ctx)));
        assert_eq!(dot.matches("->").count(), 0);
        assert_eq!(dot.matches("[label=").count(), 1);
    }

    #[test]
    fn json_round_trip() {
        let l = layout_lattice(&ConceptLattice::build(&toy()));
        assert_eq!(import_json(&export_json(&l)).unwrap(), l);
        assert!(import_json("{").is_err());
    }

    #[test]
    fn nested_trivial_inner_degenerates() {
        let k = toy();
        let trivial = FormalContext::from_rows(k.objects().to_vec(), vec![], vec![BitSet::empty(0); 3]).unwrap();
        let nd = nest(&k, &trivial).unwrap();
        let nested = layout_nested(&nd);
        let plain = layout_lattice(&nd.outer);
        for (a, b) in nested.nodes.iter().zip(&plain.nodes) {
            assert_eq!((a.x, a.y), (b.x, b.y));
            assert_eq!(a.class, "realized");
        }
    }

    #[test]
    fn dot_clusters_nested_nodes() {
        let k = toy();
        let trivial = FormalContext::from_rows(k.objects().to_vec(), vec![], vec![BitSet::empty(0); 3]).unwrap();
        let dot = export_dot(&layout_nested(&nest(&k, &trivial).unwrap()));
        assert_eq!(dot.matches("subgraph cluster_").count(), 6);
    }
}
