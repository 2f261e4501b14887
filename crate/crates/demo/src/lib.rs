//! WebAssembly bindings for the browser demo in `www/`.
//!
//! A [`Demo`] holds one Euclidean instance with its geometry. The page asks
//! for the layout, solves it under a chosen rule and plots the
//! welfare-representation trade-off. All logic lives in [`session`] so it
//! can be tested natively; the exported methods only serialize.

pub mod session;

use wasm_bindgen::prelude::*;

pub use session::{CurvePoint, Layout, Session, Solved};

#[wasm_bindgen]
pub struct Demo(Session);

#[wasm_bindgen]
impl Demo {
    /// Draws a small Euclidean instance from `seed`.
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32) -> Demo {
        Demo(Session::new(u64::from(seed)))
    }

    /// Voter and project positions, costs, budget and ballots as JSON.
    pub fn layout(&self) -> String {
        to_json(&self.0.layout())
    }

    /// Solves with `rule` (`av`, `cc`, `pav`, `weighted`) and `method`
    /// (`exact`, `sequential`, `random`); `p` is read only by `weighted`.
    pub fn solve(&self, rule: &str, p: f64, method: &str) -> Result<String, String> {
        self.0.solve(rule, p, method).map(|s| to_json(&s))
    }

    /// Exact weighted optima for `steps + 1` evenly spaced `p`, followed by
    /// the PAV, sequential and random points.
    pub fn tradeoff(&self, steps: u32) -> Result<String, String> {
        self.0.tradeoff(steps as usize).map(|c| to_json(&c))
    }
}

fn to_json(value: &impl serde::Serialize) -> String {
    serde_json::to_string(value).expect("demo values serialize")
}
