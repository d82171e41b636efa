//! Browser bindings: render a sample, estimate a crossing probability, and
//! evaluate the slab domination bounds at one `p`.

use serde_json::json;
use wasm_bindgen::prelude::*;

use oriperc::duality::{detect_circuit, dualize, DualVariant};
use oriperc::estimators::reach_probability;
use oriperc::reach::reach;
use oriperc::slab::{exact_conditional, positive_association_check, rho};
use oriperc::svg::{render_arcs, render_config, SvgOptions};
use oriperc::{ArcSet, Config, Lattice, ModelSpec, Region, Site};

const MAX_RENDER: u32 = 40;
const MAX_WORK: u64 = 20_000_000;

fn model(name: &str, p: f64) -> Result<ModelSpec, String> {
    let m = match name {
        "grimmett" => ModelSpec::Grimmett2D { p },
        "h" => ModelSpec::HModel { p },
        "ne" => ModelSpec::NEQuadrant { p },
        "slab" => ModelSpec::Grimmett3DSlab { p },
        "arcs" => ModelSpec::IndependentArcs { a: p, b: p },
        other => return Err(format!("unknown model {other:?}")),
    };
    m.validate().map_err(|e| e.to_string())
}

/// SVG of one sample. `highlight` is "", "path" or "circuit". The arcs model
/// uses `a = b = p`.
pub fn sample_svg(name: &str, p: f64, size: u32, seed: u64, highlight: &str) -> Result<String, String> {
    if size == 0 || size > MAX_RENDER {
        return Err(format!("size must be in 1..={MAX_RENDER}"));
    }
    let m = model(name, p)?;
    if !m.is_planar() {
        return Err("only planar models can be drawn".into());
    }
    let region = m.crossing_region(size);
    let lattice = Lattice::new(region).map_err(|e| e.to_string())?;
    let targets = region.outer_boundary();
    let mut opts = SvgOptions::default();
    let svg = if let ModelSpec::IndependentArcs { a, b } = m {
        let arcs = ArcSet::sample(&lattice, a, b, seed).map_err(|e| e.to_string())?;
        match highlight {
            "path" => opts.path = reach(&lattice, &arcs, Site::ORIGIN, &targets).map_err(|e| e.to_string())?,
            "circuit" => return Err("circuits need an orientation model".into()),
            _ => {}
        }
        render_arcs(&arcs, &opts)
    } else {
        let config = Config::sample(&lattice, m, seed).map_err(|e| e.to_string())?;
        match highlight {
            "path" => opts.path = reach(&lattice, &config, Site::ORIGIN, &targets).map_err(|e| e.to_string())?,
            "circuit" => {
                if !matches!(region, Region::Box { .. }) {
                    return Err("circuits need a centred box".into());
                }
                let u = dualize(&config, DualVariant::U).map_err(|e| e.to_string())?;
                let annulus = Region::Annulus { inner: 0, outer: size };
                opts.circuit = detect_circuit(&u, annulus, DualVariant::U)
                    .map_err(|e| e.to_string())?
                    .map(|w| w.cycle);
            }
            _ => {}
        }
        render_config(&config, &opts)
    };
    svg.map_err(|e| e.to_string())
}

/// JSON with the reach estimate and its 95% interval.
pub fn reach_json(name: &str, p: f64, n: u32, samples: u32, seed: u64) -> Result<String, String> {
    let m = model(name, p)?;
    if n == 0 || samples == 0 {
        return Err("n and samples must be positive".into());
    }
    if samples as u64 * (n as u64 + 1).pow(2) > MAX_WORK {
        return Err("too much work for the browser; lower n or samples".into());
    }
    let e = reach_probability(m, n, samples as u64, seed).map_err(|e| e.to_string())?;
    Ok(json!({
        "p_hat": e.p_hat,
        "ci_lo": e.ci_lo,
        "ci_hi": e.ci_hi,
        "successes": e.successes,
        "samples": e.samples,
    })
    .to_string())
}

/// JSON with the exact conditional presence probability, the target
/// `rho(p)` and the positive association check.
pub fn slab_json(p: f64) -> Result<String, String> {
    let exact = exact_conditional(p).map_err(|e| e.to_string())?;
    let assoc = positive_association_check(p).map_err(|e| e.to_string())?;
    let r = rho(p);
    Ok(json!({ "p": p, "exact": exact, "rho": r, "holds": exact >= r, "association": assoc }).to_string())
}

#[wasm_bindgen]
pub fn render_sample(model: &str, p: f64, size: u32, seed: u32, highlight: &str) -> Result<String, JsError> {
    sample_svg(model, p, size, seed as u64, highlight).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn reach_estimate(model: &str, p: f64, n: u32, samples: u32, seed: u32) -> Result<String, JsError> {
    reach_json(model, p, n, samples, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn slab_bounds(p: f64) -> Result<String, JsError> {
    slab_json(p).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_outward_with_path() {
        let svg = sample_svg("h", 1.0, 3, 1, "path").unwrap();
        assert!(svg.starts_with("<svg") && svg.contains("class=\"path\""));
        let svg = sample_svg("h", 0.0, 3, 1, "circuit").unwrap();
        assert!(svg.contains("class=\"circuit\""));
        assert!(sample_svg("slab", 0.5, 3, 1, "").is_err());
        assert!(sample_svg("h", 0.5, 0, 1, "").is_err());
    }

    #[test]
    fn reach_json_fields() {
        let v: serde_json::Value = serde_json::from_str(&reach_json("h", 1.0, 4, 50, 3).unwrap()).unwrap();
        assert_eq!(v["p_hat"], 1.0);
        assert_eq!(v["samples"], 50);
        assert!(reach_json("h", 0.5, 1000, 1000, 0).is_err());
        assert!(reach_json("nope", 0.5, 4, 10, 0).is_err());
    }

    #[test]
    fn slab_json_holds_at_half() {
        let v: serde_json::Value = serde_json::from_str(&slab_json(0.5).unwrap()).unwrap();
        assert_eq!(v["holds"], true);
        assert_eq!(v["association"], true);
        assert!(slab_json(0.3).is_err());
    }
}
