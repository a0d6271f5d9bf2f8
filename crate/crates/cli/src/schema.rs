//! The config schema printed by `hn-spectra schema`.

use hn_spectra::{EigenOptions, GreenConfig, LyapunovConfig, UhConfig};
use serde_json::{json, Value};

fn complex() -> Value {
    json!({
        "description": "a real number or [re, im]",
        "oneOf": [{ "type": "number" }, { "type": "array", "items": { "type": "number" }, "minItems": 2, "maxItems": 2 }]
    })
}

fn pair() -> Value {
    json!({ "description": "[re, im]", "type": "array", "items": { "type": "number" }, "minItems": 2, "maxItems": 2 })
}

fn object(props: Value, required: &[&str]) -> Value {
    json!({ "type": "object", "additionalProperties": false, "properties": props, "required": required })
}

fn grid() -> Value {
    object(
        json!({
            "re_min": { "type": "number" }, "re_max": { "type": "number" },
            "im_min": { "type": "number" }, "im_max": { "type": "number" },
            "nx": { "type": "integer", "minimum": 2 }, "ny": { "type": "integer", "minimum": 2 }
        }),
        &["re_min", "re_max", "im_min", "im_max", "nx", "ny"],
    )
}

fn with_defaults<T: serde::Serialize>(default: T, doc: &str) -> Value {
    let d = serde_json::to_value(default).expect("defaults serialize");
    let props: serde_json::Map<String, Value> =
        d.as_object().expect("object").iter().map(|(k, v)| (k.clone(), json!({ "default": v }))).collect();
    json!({ "type": "object", "additionalProperties": false, "description": doc, "properties": props, "default": d })
}

fn task(kind: &str, props: Value, required: &[&str]) -> Value {
    let mut p = props;
    p["kind"] = json!({ "const": kind });
    let mut req = vec!["kind"];
    req.extend_from_slice(required);
    object(p, &req)
}

pub fn schema() -> Value {
    let lyap = with_defaults(LyapunovConfig::default(), "Lyapunov estimator: steps per phase, phase count, burn-in");
    let eigen = with_defaults(EigenOptions::default(), "eigensolver; method is dense, structured or auto");
    let uh = with_defaults(UhConfig::default(), "uniform hyperbolicity test thresholds");
    let green = with_defaults(GreenConfig::default(), "Green's function construction");
    let boundary = json!({ "enum": ["periodic", "dirichlet"], "default": "periodic" });
    let sigma0 = object(
        json!({
            "re_min": { "type": "number" }, "re_max": { "type": "number" },
            "n_points": { "type": "integer", "minimum": 2 },
            "resolution": { "type": "number", "default": 1e-3 },
            "uh": uh
        }),
        &["re_min", "re_max", "n_points"],
    );
    let tol0 = json!({ "type": "number", "description": "level-set tolerance; default max(3 * max stderr, 1e-3)" });
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "hn-spectra run config",
        "type": "object",
        "additionalProperties": false,
        "required": ["model", "task", "output"],
        "properties": {
            "model": object(json!({
                "base": {
                    "description": "base dynamics",
                    "oneOf": [
                        object(json!({ "kind": { "const": "rotation" }, "alpha": { "type": "number" } }), &["kind", "alpha"]),
                        object(json!({ "kind": { "const": "skew_shift" }, "alpha": { "type": "number" } }), &["kind", "alpha"]),
                        object(json!({ "kind": { "const": "periodic" }, "period": { "type": "integer", "minimum": 1 } }), &["kind", "period"]),
                        object(json!({ "kind": { "const": "iid" }, "seed": { "type": "integer" }, "half_width": { "type": "number" } }), &["kind", "seed", "half_width"])
                    ]
                },
                "potential": {
                    "description": "sampling function; imag_shift y evaluates v(x + iy)",
                    "oneOf": [
                        object(json!({ "form": { "const": "cosine" }, "lambda": { "type": "number" }, "imag_shift": { "type": "number", "default": 0.0 } }), &["form", "lambda"]),
                        object(json!({ "form": { "const": "single_exponential" }, "lambda": complex(), "imag_shift": { "type": "number", "default": 0.0 } }), &["form", "lambda"]),
                        object(json!({ "form": { "const": "fourier" }, "coeffs": { "type": "object", "description": "frequency -> coefficient", "additionalProperties": complex() }, "imag_shift": { "type": "number", "default": 0.0 } }), &["form", "coeffs"]),
                        object(json!({ "form": { "const": "constant" }, "c": complex() }), &["form", "c"]),
                        object(json!({ "form": { "const": "iid_diagonal" } }), &["form"])
                    ]
                },
                "g": { "type": "number", "minimum": 0.0, "default": 0.0 },
                "phase": { "type": "array", "items": { "type": "number" }, "default": [] }
            }), &["base", "potential"]),
            "task": { "oneOf": [
                task("lyapunov", json!({ "energies": { "type": "array", "items": pair() }, "lyapunov": lyap }), &["energies"]),
                task("field", json!({ "grid": grid(), "lyapunov": lyap }), &["grid"]),
                task("spectrum", json!({ "grid": grid(), "lyapunov": lyap, "sigma0": sigma0, "tol0": tol0 }), &["grid"]),
                task("transition", json!({ "grid": grid(), "lyapunov": lyap, "sigma0": sigma0, "tol0": tol0 }), &["grid"]),
                task("eig", json!({ "n": { "type": "integer", "minimum": 3 }, "boundary": boundary, "eigen": eigen }), &["n"]),
                task("dos", json!({ "n": { "type": "integer", "minimum": 3 }, "boundary": boundary, "eigen": eigen, "density_grid": grid(), "lyapunov": lyap, "tol0": tol0 }), &["n"]),
                task("thouless", json!({ "n": { "type": "integer", "minimum": 3 }, "probes": { "type": "array", "items": pair() }, "eigen": eigen, "lyapunov": lyap }), &["n", "probes"]),
                task("green", json!({ "energy": pair(), "w": { "type": "integer", "minimum": 2 }, "regime": { "enum": ["auto", "forward", "hyperbolic"], "default": "auto" }, "green": green }), &["energy", "w"]),
                task("dirichlet-check", json!({ "n": { "type": "integer", "minimum": 3 }, "g1": { "type": "number" }, "g2": { "type": "number" }, "eigen": eigen }), &["n", "g1", "g2"])
            ]},
            "threads": { "type": "integer", "minimum": 0, "default": 0, "description": "0 = all cores; HN_SPECTRA_THREADS overrides" },
            "output": { "type": "string", "description": "output directory" }
        }
    })
}
