//! Browser bindings for the conformal-ms integrators.
//!
//! Three operations are exposed: stepping a preset under a chosen scheme,
//! comparing the headline balance residual of an exponential scheme with its
//! baseline, and sampling the exponential weights of a sinusoidal damping
//! coefficient.

use wasm_bindgen::prelude::*;

use conformal_ms::conformal::{exp_weights, DampingCoefficient};
use conformal_ms::harness::{preset, SimState, Simulation, PRESET_NAMES};
use conformal_ms::schemes::SchemeKind;

fn message(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Residual tracked by [`compare_schemes`] for the model of `preset`.
fn headline(name: &str) -> &'static str {
    if name.starts_with("ch_") {
        "casimir_residual"
    } else {
        "norm_law_residual_global"
    }
}

/// Exponential scheme and its baseline for the model of `preset`.
fn scheme_pair(name: &str) -> (SchemeKind, SchemeKind) {
    if name.starts_with("ch_") {
        (SchemeKind::Expbox, SchemeKind::MidpointBoxBaseline)
    } else {
        (SchemeKind::Embs, SchemeKind::MixedEulerBaseline)
    }
}

fn simulation(name: &str, scheme: Option<&str>, n_nodes: usize, dt: f64) -> Result<Simulation, String> {
    let mut cfg = preset(name).map_err(message)?;
    if let Some(s) = scheme {
        cfg.scheme = s.parse().map_err(message)?;
    }
    if n_nodes > 0 {
        cfg.grid.n_nodes = n_nodes;
    }
    if dt > 0.0 {
        cfg.dt = dt;
    }
    cfg.t_end = cfg.dt;
    cfg.validate().map_err(message)?;
    Simulation::new(cfg).map_err(message)
}

/// Names accepted by [`Demo::new`] and [`compare_schemes`].
#[wasm_bindgen]
pub fn preset_names() -> Vec<String> {
    PRESET_NAMES.iter().map(|s| s.to_string()).collect()
}

/// A preset advanced step by step.
#[wasm_bindgen]
pub struct Demo {
    sim: Simulation,
    state: SimState,
    step: usize,
    names: Vec<&'static str>,
    latest: Vec<f64>,
    worst: Vec<f64>,
}

#[wasm_bindgen]
impl Demo {
    /// `n_nodes = 0` and `dt = 0` keep the preset values.
    #[wasm_bindgen(constructor)]
    pub fn new(name: &str, scheme: &str, n_nodes: usize, dt: f64) -> Result<Demo, String> {
        let scheme = (!scheme.is_empty()).then_some(scheme);
        let sim = simulation(name, scheme, n_nodes, dt)?;
        let state = sim.initial_state().map_err(message)?;
        let names = sim.diagnostic_names();
        let n = names.len();
        Ok(Demo {
            sim,
            state,
            step: 0,
            names,
            latest: vec![0.0; n],
            worst: vec![0.0; n],
        })
    }

    /// Takes `steps` steps; on failure the state stays at the last good step.
    pub fn advance(&mut self, steps: usize) -> Result<(), String> {
        for _ in 0..steps {
            let next = self.sim.step(&self.state, self.step).map_err(message)?;
            let rec = self.sim.diagnostics(&self.state, &next).map_err(message)?;
            for (i, name) in self.names.iter().enumerate() {
                let v = rec.get(name).unwrap_or(f64::NAN);
                self.latest[i] = v;
                self.worst[i] = self.worst[i].max(v.abs());
            }
            self.state = next.state;
            self.step += 1;
        }
        Ok(())
    }

    pub fn t(&self) -> f64 {
        self.state.t()
    }

    pub fn steps(&self) -> usize {
        self.step
    }

    pub fn dt(&self) -> f64 {
        self.sim.config().dt
    }

    pub fn x(&self) -> Vec<f64> {
        let g = self.sim.grid();
        (0..g.n_nodes).map(|n| g.x(n)).collect()
    }

    /// `|ψ|` for NLS presets, `u` for Camassa-Holm presets.
    pub fn surface(&self) -> Vec<f64> {
        (0..self.sim.grid().n_nodes)
            .map(|n| self.state.surface_value(n))
            .collect()
    }

    pub fn diagnostic_names(&self) -> Vec<String> {
        self.names.iter().map(|s| s.to_string()).collect()
    }

    /// Diagnostics of the most recent step, in [`Demo::diagnostic_names`] order.
    pub fn latest(&self) -> Vec<f64> {
        self.latest.clone()
    }

    /// Largest magnitude of each diagnostic so far.
    pub fn worst(&self) -> Vec<f64> {
        self.worst.clone()
    }
}

/// Runs `preset` for `steps` steps under its exponential scheme and under
/// the baseline. Returns rows `[t, exponential, baseline]` of the headline
/// residual, flattened.
#[wasm_bindgen]
pub fn compare_schemes(name: &str, steps: usize, n_nodes: usize, dt: f64) -> Result<Vec<f64>, String> {
    let (exp, base) = scheme_pair(name);
    let mut a = Demo::new(name, exp.name(), n_nodes, dt)?;
    let mut b = Demo::new(name, base.name(), n_nodes, dt)?;
    let col = a
        .names
        .iter()
        .position(|n| *n == headline(name))
        .ok_or_else(|| format!("preset `{name}` has no {} diagnostic", headline(name)))?;
    let mut out = Vec::with_capacity(3 * steps);
    for _ in 0..steps {
        a.advance(1)?;
        b.advance(1)?;
        out.extend([a.t(), a.latest[col], b.latest[col]]);
    }
    Ok(out)
}

/// Samples `θ(t) = ∫₀ᵗ a` for `a(t) = offset + amplitude·sin(frequency·t)`
/// together with the step weights `w₊, w₋` of the step starting at each
/// sample. Returns rows `[t, θ, w₊, w₋]`, flattened.
#[wasm_bindgen]
pub fn damping_weights(
    offset: f64,
    amplitude: f64,
    frequency: f64,
    dt: f64,
    samples: usize,
) -> Result<Vec<f64>, String> {
    let a = DampingCoefficient::sinusoid(offset, amplitude, frequency);
    let mut out = Vec::with_capacity(4 * samples);
    for k in 0..samples {
        let t = k as f64 * dt;
        let w = exp_weights(&a, t, dt).map_err(message)?;
        out.extend([t, a.theta(t).map_err(message)?, w.plus, w.minus]);
    }
    Ok(out)
}
