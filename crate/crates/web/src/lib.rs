//! Browser demo over the bundled Ethnic Cooking data.
//!
//! Three operations are exported to JavaScript, each returning a JSON string
//! that `www/index.html` draws as SVG:
//!
//! - `nested(score, size)` - score/size nested diagram under user thresholds and cuts
//! - `lattice(ctx)` - lattice and layout of a pasted context
//! - `neighborhood(seed, threshold)` - browse neighborhood of a recipe or attribute

use serde::Serialize;
use wasm_bindgen::prelude::*;

use wave_core::browse::{BrowseParams, BrowseSession, NeighborhoodJson, Seed};
use wave_core::fixtures::Workspace;
use wave_core::layout::{layout_lattice, layout_nested, DiagramLayout};
use wave_core::{nest, ConceptLattice, FormalContext, Scale};

#[derive(Serialize)]
struct Nested {
    product: usize,
    realized: usize,
    layout: DiagramLayout,
}

#[derive(Serialize)]
struct Lattice {
    concepts: usize,
    layout: DiagramLayout,
}

#[derive(Serialize)]
struct Neighborhood {
    #[serde(flatten)]
    neighborhood: NeighborhoodJson,
    layout: DiagramLayout,
}

fn numbers(text: &str) -> Result<Vec<f64>, String> {
    text.split([',', ' '])
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("not a number: `{t}`")))
        .collect()
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// `score` lists thresholds, highest first; `size` lists cuts, lowest first.
pub fn nested_json(score: &str, size: &str) -> Result<String, String> {
    let mut ws = Workspace::ethnic_cooking().map_err(|e| e.to_string())?;
    let mut thresholds = numbers(score)?;
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let mut cuts = numbers(size)?;
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    ws.registry.insert(Scale::ordinal("score", &thresholds).map_err(|e| e.to_string())?);
    ws.registry.insert(Scale::interordinal("size", &cuts).map_err(|e| e.to_string())?);
    let docs = &ws.dataset.records;
    let nd = nest(
        &ws.registry.apply("score", docs).map_err(|e| e.to_string())?,
        &ws.registry.apply("size", docs).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    to_json(&Nested {
        product: nd.product_count(),
        realized: nd.realized_count,
        layout: layout_nested(&nd),
    })
}

pub fn lattice_json(ctx: &str) -> Result<String, String> {
    let ctx = FormalContext::parse(ctx).map_err(|e| e.to_string())?;
    let lat = ConceptLattice::build(&ctx);
    to_json(&Lattice {
        concepts: lat.len(),
        layout: layout_lattice(&lat),
    })
}

pub fn neighborhood_json(seed: &str, threshold: usize) -> Result<String, String> {
    let ws = Workspace::ethnic_cooking().map_err(|e| e.to_string())?;
    let built = ws.view.built().map_err(|e| e.to_string())?;
    let seed = Seed::resolve(built.context(), seed).map_err(|e| e.to_string())?;
    let params = BrowseParams {
        threshold,
        ..Default::default()
    };
    let n = BrowseSession::new(built, seed, params).map_err(|e| e.to_string())?.neighborhood();
    to_json(&Neighborhood {
        layout: layout_lattice(&n.lattice),
        neighborhood: n.to_json(),
    })
}

#[wasm_bindgen]
pub fn nested(score: &str, size: &str) -> Result<String, JsError> {
    nested_json(score, size).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn lattice(ctx: &str) -> Result<String, JsError> {
    lattice_json(ctx).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn neighborhood(seed: &str, threshold: usize) -> Result<String, JsError> {
    neighborhood_json(seed, threshold).map_err(|e| JsError::new(&e))
}

/// The bundled toy context, as a starting point for the lattice panel.
#[wasm_bindgen]
pub fn sample_context() -> String {
    wave_core::fixtures::TOY_CTX.to_owned()
}
