//! Structured diffs between two run directories.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use hn_spectra::dos::bl_distance;
use hn_spectra::io::{parse_f64, read_grid};
use hn_spectra::{EmpiricalMeasure, C64};
use serde_json::{json, Value};

use crate::manifest::Manifest;
use crate::CliError;

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_table(path: &Path) -> Result<Table, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("").split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    Ok(Table { header, rows })
}

fn column_deviations(a: &Table, b: &Table) -> (Vec<(String, f64)>, usize) {
    let mut dev = vec![0.0f64; a.header.len()];
    let mut text_mismatch = 0;
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        for (k, (x, y)) in ra.iter().zip(rb).enumerate() {
            match (parse_f64(x), parse_f64(y)) {
                (Ok(u), Ok(v)) if u.is_finite() && v.is_finite() => dev[k] = dev[k].max((u - v).abs()),
                (Ok(u), Ok(v)) if u.to_bits() == v.to_bits() || (u.is_nan() && v.is_nan()) => {}
                _ if x == y => {}
                _ => text_mismatch += 1,
            }
        }
    }
    (a.header.iter().cloned().zip(dev).collect(), text_mismatch)
}

fn atoms(path: &Path) -> Result<EmpiricalMeasure, CliError> {
    let t = read_table(path)?;
    let mut atoms = Vec::with_capacity(t.rows.len());
    for r in &t.rows {
        let num = |k: usize| {
            parse_f64(r.get(k).map(String::as_str).unwrap_or("")).map_err(|e| CliError::Config(e.to_string()))
        };
        atoms.push((C64::new(num(0)?, num(1)?), num(2)?));
    }
    let total = atoms.iter().map(|a| a.1).sum();
    Ok(EmpiricalMeasure { atoms, total })
}

fn grid_deviation(a: &Path, b: &Path) -> Result<Value, CliError> {
    let read = |p: &Path| -> Result<_, CliError> {
        let f = fs::File::open(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
        read_grid(std::io::BufReader::new(f)).map_err(|e| CliError::Config(e.to_string()))
    };
    let (ga, la) = read(a)?;
    let (gb, lb) = read(b)?;
    let mut layers = serde_json::Map::new();
    for ((name, va), (_, vb)) in la.iter().zip(&lb) {
        let mut max = 0.0f64;
        for j in 0..ga.ny {
            for i in 0..ga.nx {
                let z = ga.node(i, j);
                let u = va[ga.index(i, j)];
                let v = if ga == gb { Some(vb[gb.index(i, j)]) } else { gb.interpolate(vb, z) };
                if let Some(v) = v {
                    max = max.max((u - v).abs());
                }
            }
        }
        layers.insert(name.clone(), json!(max));
    }
    Ok(json!({ "same_grid": ga == gb, "max_deviation": layers }))
}

enum Leaf {
    Num(f64),
    Other(String),
}

fn flatten(v: &Value, path: String, out: &mut Vec<(String, Leaf)>) {
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(x, format!("{path}/{k}"), out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(k, x)| flatten(x, format!("{path}/{k}"), out)),
        Value::Number(n) => out.push((path, Leaf::Num(n.as_f64().unwrap_or(f64::NAN)))),
        other => out.push((path, Leaf::Other(other.to_string()))),
    }
}

fn json_deviation(a: &Path, b: &Path, tol: f64) -> Result<(Value, bool), CliError> {
    let read = |p: &Path| -> Result<Value, CliError> {
        let t = fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
        serde_json::from_str(&t).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
    };
    let (mut la, mut lb) = (Vec::new(), Vec::new());
    flatten(&read(a)?, String::new(), &mut la);
    flatten(&read(b)?, String::new(), &mut lb);
    let lb: std::collections::BTreeMap<String, Leaf> = lb.into_iter().collect();
    let mut max = 0.0f64;
    let mut offending = Vec::new();
    let mut seen = BTreeSet::new();
    for (path, x) in &la {
        seen.insert(path.clone());
        let bad = match (x, lb.get(path)) {
            (Leaf::Num(u), Some(Leaf::Num(v))) => {
                let d = (u - v).abs();
                if d.is_finite() {
                    max = max.max(d);
                }
                !(d <= tol)
            }
            (Leaf::Other(u), Some(Leaf::Other(v))) => u != v,
            _ => true,
        };
        if bad {
            offending.push(path.clone());
        }
    }
    offending.extend(lb.keys().filter(|k| !seen.contains(*k)).cloned());
    let differs = !offending.is_empty();
    offending.truncate(20);
    Ok((json!({ "max_deviation": max, "differing_paths": offending }), differs))
}

/// Compares the artifacts of two run directories.
pub fn compare(a: &Path, b: &Path, tol: f64) -> Result<Value, CliError> {
    let (ma, mb) = (Manifest::read(a)?, Manifest::read(b)?);
    if ma.task != mb.task {
        return Err(CliError::Config(format!("task kinds differ: {} vs {}", ma.task, mb.task)));
    }
    let names: BTreeSet<String> = ma.outputs.iter().chain(&mb.outputs).map(|o| o.file.clone()).collect();
    let mut files = Vec::new();
    let mut differences = Vec::new();
    for name in names {
        let (pa, pb) = (a.join(&name), b.join(&name));
        let in_a = ma.outputs.iter().find(|o| o.file == name);
        let in_b = mb.outputs.iter().find(|o| o.file == name);
        let (Some(ra), Some(rb)) = (in_a, in_b) else {
            differences
                .push(json!({ "file": name, "reason": if in_a.is_none() { "missing in a" } else { "missing in b" } }));
            continue;
        };
        if ra.sha256 == rb.sha256 {
            files.push(json!({ "file": name, "status": "identical" }));
            continue;
        }
        let entry = if name.ends_with(".csv") {
            let (ta, tb) = (read_table(&pa)?, read_table(&pb)?);
            if ta.header == tb.header && ta.rows.len() == tb.rows.len() {
                let (cols, text) = column_deviations(&ta, &tb);
                let worst = cols.iter().map(|c| c.1).fold(0.0, f64::max);
                if worst > tol || text > 0 {
                    differences.push(json!({ "file": name, "max_deviation": worst, "text_mismatches": text }));
                }
                json!({ "file": name, "status": "compared", "columns": cols.into_iter().map(|(k, v)| (k, json!(v))).collect::<serde_json::Map<_, _>>(), "text_mismatches": text })
            } else if name == "atoms.csv" {
                let d = bl_distance(&atoms(&pa)?, &atoms(&pb)?);
                if d > tol {
                    differences.push(json!({ "file": name, "bl_distance": d }));
                }
                json!({ "file": name, "status": "different_sizes", "bl_distance": d })
            } else if name == "field.csv" && names_have_grid(&ma, &mb) {
                let d = grid_deviation(&a.join("field.bin"), &b.join("field.bin"))?;
                json!({ "file": name, "status": "different_sizes", "see": "field.bin", "interpolated": d })
            } else {
                differences.push(json!({ "file": name, "reason": "shape mismatch" }));
                json!({ "file": name, "status": "shape_mismatch", "rows": [ta.rows.len(), tb.rows.len()] })
            }
        } else if name.ends_with(".bin") {
            let d = grid_deviation(&pa, &pb)?;
            let worst = d["max_deviation"]
                .as_object()
                .map(|m| m.values().filter_map(Value::as_f64).fold(0.0, f64::max))
                .unwrap_or(0.0);
            if worst > tol {
                differences.push(json!({ "file": name, "interpolated_max_deviation": worst }));
            }
            json!({ "file": name, "status": "compared", "grid": d })
        } else if name.ends_with(".json") {
            let (d, differs) = json_deviation(&pa, &pb, tol)?;
            if differs {
                differences.push(json!({ "file": name, "json": d.clone() }));
            }
            json!({ "file": name, "status": "compared", "json": d })
        } else {
            differences.push(json!({ "file": name, "reason": "bytes differ" }));
            json!({ "file": name, "status": "bytes_differ" })
        };
        files.push(entry);
    }
    Ok(json!({
        "task": ma.task,
        "tolerance": tol,
        "config_hash_equal": ma.config_hash == mb.config_hash,
        "files": files,
        "differences": differences,
    }))
}

fn names_have_grid(a: &Manifest, b: &Manifest) -> bool {
    a.outputs.iter().any(|o| o.file == "field.bin") && b.outputs.iter().any(|o| o.file == "field.bin")
}
