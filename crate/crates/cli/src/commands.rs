use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use klab::graph_sheaf::Section;
use klab::ring_linalg::{MatrixR, Subquotient};
use klab::selmer_instance::{check_instance, generate_instance, GenParams, SelmerInstance, Vertex};
use klab::suites;
use klab::systems::{
    invariant_profile, kolyvagin_modules, pi_transform, recover_structure, stark_module, tower_check, Hasse,
    KolyvaginModules, StarkModule,
};

use crate::GenArgs;

const SCHEMA: u32 = 1;
const MODEL: &str = "faithful model: global classes vanish under the all-strict condition";

fn check_bounds(p: u64, k: u32, r: usize, m: usize) -> Result<()> {
    let q = p.checked_pow(k).unwrap_or(u64::MAX);
    if q > 125 || m == 0 || m > 5 || r == 0 || r > 3 || 2 * m as u32 * k > 40 {
        bail!("size bounds exceeded: need p^k <= 125, 1 <= m <= 5, 1 <= r <= 3, 2mk <= 40 (got p^k = {q}, m = {m}, r = {r})");
    }
    Ok(())
}

fn load(path: &Path) -> Result<SelmerInstance> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    // accept both a bare instance and a `gen` report embedding one
    let body = match value.get("instance") {
        Some(inner) => inner.clone(),
        None => value,
    };
    let inst: SelmerInstance =
        serde_json::from_value(body).with_context(|| format!("{} is not a valid instance", path.display()))?;
    check_bounds(inst.ring.p(), inst.ring.k(), inst.r, inst.m())?;
    Ok(inst)
}

fn emit(report: Value, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(&report)? + "\n";
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn envelope(command: &str, seed: u64, inst: Option<&SelmerInstance>, passed: bool, result: Value) -> Value {
    json!({
        "schema": SCHEMA,
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": seed,
        "instance_hash": inst.map(SelmerInstance::hash),
        "model": MODEL,
        "passed": passed,
        "result": result,
    })
}

fn finish(command: &str, seed: u64, inst: &SelmerInstance, passed: bool, result: Value, out: Option<&Path>) -> Result<bool> {
    emit(envelope(command, seed, Some(inst), passed, result), out)?;
    Ok(passed)
}

fn section_json(inst: &SelmerInstance, hasse: &Hasse, s: &Section) -> BTreeMap<String, Vec<u64>> {
    hasse.list.iter().map(|&n| (inst.vertex_name(n), hasse.value(s, n).to_vec())).collect()
}

fn names(inst: &SelmerInstance, vs: &[Vertex]) -> Vec<String> {
    vs.iter().map(|&n| inst.vertex_name(n)).collect()
}

pub fn gen(args: &GenArgs, seed: u64, out: Option<&Path>) -> Result<bool> {
    check_bounds(args.p, args.k, args.r, args.m)?;
    let e = args
        .e
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<u32>().with_context(|| format!("bad exponent {s:?} in --e")))
        .collect::<Result<Vec<_>>>()?;
    let params = GenParams { p: args.p, k: args.k, r: args.r, m: args.m, e, seed, levels: args.levels.clone() };
    let inst = generate_instance(&params)?;
    let validity = check_instance(&inst, inst.all_primes());
    let passed = validity.passed();
    let result = json!({
        "params": params,
        "dual_structure": inst.dual_structure(),
        "validity": validity,
    });
    match out {
        Some(path) => {
            std::fs::write(path, serde_json::to_string_pretty(&inst)? + "\n")
                .with_context(|| format!("writing {}", path.display()))?;
            emit(envelope("gen", seed, Some(&inst), passed, result), None)?;
        }
        None => {
            let mut report = envelope("gen", seed, Some(&inst), passed, result);
            report["instance"] = serde_json::to_value(&inst)?;
            emit(report, None)?;
        }
    }
    Ok(passed)
}

pub fn check(path: &Path, seed: u64, out: Option<&Path>) -> Result<bool> {
    let inst = load(path)?;
    let all = inst.all_primes();
    let validity = check_instance(&inst, all);
    let passed = validity.passed();
    let result = json!({
        "validity": validity,
        "dual_structure": inst.dual_structure(),
        "core_vertices": names(&inst, &inst.core_vertices(all)),
    });
    finish("check", seed, &inst, passed, result, out)
}

fn projection_matches(inst: &SelmerInstance, ss: &StarkModule, n: Vertex) -> bool {
    let ring = inst.ring;
    let stalk = ss.stalk(n);
    let scaled = MatrixR::identity(ring, stalk.dim()).scale(ring.pow_p(inst.mu(n)));
    ss.projection(n).image().a == Subquotient::of(stalk, &scaled).a
}

pub fn stark(path: &Path, seed: u64, out: Option<&Path>) -> Result<bool> {
    let inst = load(path)?;
    let ss = stark_module(&inst, inst.all_primes())?;
    let free = ss.is_free_rank_one();
    let projections: BTreeMap<String, Value> = ss
        .hasse
        .list
        .iter()
        .map(|&n| (inst.vertex_name(n), json!({"mu": inst.mu(n), "image_is_m_mu_Y": projection_matches(&inst, &ss, n)})))
        .collect();
    let proj_ok = projections.values().all(|v| v["image_is_m_mu_Y"] == json!(true));
    let generator = ss.generator();
    let compatible = match &generator {
        Some(g) => ss.fully_compatible(&inst, g)?,
        None => false,
    };
    let result = json!({
        "structure": ss.gamma.module().exps,
        "free_rank_one": free,
        "generator": generator.as_ref().map(|g| section_json(&inst, &ss.hasse, g)),
        "generator_fully_compatible": compatible,
        "projections": projections,
    });
    finish("stark", seed, &inst, free && proj_ok && compatible, result, out)
}

fn koly_summary(inst: &SelmerInstance, km: &KolyvaginModules) -> Result<(bool, Value)> {
    let stub = &km.stub.sheaf;
    let core = inst.core_vertices(inst.all_primes());
    let locally_cyclic = stub.is_locally_cyclic();
    let (hubs, monodromy) = if locally_cyclic {
        let hubs: Vec<Vertex> = stub.hubs()?.into_iter().map(|i| km.hasse().list[i]).collect();
        (hubs, Some(stub.has_trivial_monodromy()?))
    } else {
        (vec![], None)
    };
    let core_are_hubs = !core.is_empty() && core.iter().all(|c| hubs.contains(c));
    let k = inst.ring.k();
    let stub_free = km.ks_stub.module().exps == [k];
    let stub_gen = (km.ks_stub.module().dim() == 1).then(|| km.stub_to_full(&km.ks_stub.section(&[1])));
    let passed = locally_cyclic && core_are_hubs && monodromy == Some(true) && stub_free;
    let result = json!({
        "ks_structure": km.ks.module().exps,
        "ks_stub_structure": km.ks_stub.module().exps,
        "ks_stub_free_rank_one": stub_free,
        "stub_equals_full": km.stub_inclusion().is_iso(),
        "stub_locally_cyclic": locally_cyclic,
        "core_vertices": names(inst, &core),
        "hubs": names(inst, &hubs),
        "trivial_monodromy": monodromy,
        "stub_generator": stub_gen.as_ref().map(|g| section_json(inst, km.hasse(), g)),
    });
    Ok((passed, result))
}

pub fn koly(path: &Path, seed: u64, out: Option<&Path>) -> Result<bool> {
    let inst = load(path)?;
    let km = kolyvagin_modules(&inst, inst.all_primes())?;
    let (passed, result) = koly_summary(&inst, &km)?;
    finish("koly", seed, &inst, passed, result, out)
}

pub fn transform(path: &Path, seed: u64, out: Option<&Path>) -> Result<bool> {
    let inst = load(path)?;
    let all = inst.all_primes();
    let ss = stark_module(&inst, all)?;
    let km = kolyvagin_modules(&inst, all)?;
    let Some(eps) = ss.generator() else {
        let result = json!({"error": "the Stark module is not cyclic", "structure": ss.gamma.module().exps});
        return finish("transform", seed, &inst, false, result, out);
    };
    let kappa = pi_transform(&inst, &ss, &eps, &km.selmer)?;
    let is_section = km.selmer.sheaf.is_section(&kappa);
    let stub_coords = km.full_to_stub(&kappa).and_then(|s| km.ks_stub.coords(&s));
    let generates = stub_coords.as_ref().is_some_and(|c| c.len() == 1 && inst.ring.is_unit(c[0]));
    // compare with the stub generator at a core vertex, where the stub stalk is the whole stalk
    let comparison = match (inst.core_vertices(all).first(), km.ks_stub.module().dim() == 1) {
        (Some(&c), true) => {
            let g = km.stub_to_full(&km.ks_stub.section(&[1]));
            let stalk = km.selmer.stalk(c);
            let (gc, kc) = (km.hasse().value(&g, c), km.hasse().value(&kappa, c));
            let unit = inst.ring.units().find(|&u| {
                stalk.reduce(&gc.iter().map(|&x| inst.ring.mul(x, u)).collect::<Vec<_>>()) == stalk.reduce(kc)
            });
            json!({"vertex": inst.vertex_name(c), "unit": unit})
        }
        _ => Value::Null,
    };
    let unit_found = comparison.get("unit").is_some_and(|u| !u.is_null());
    let result = json!({
        "kappa": section_json(&inst, km.hasse(), &kappa),
        "edge_compatible": is_section,
        "stub": stub_coords.is_some(),
        "generates_stub_module": generates,
        "core_comparison": comparison,
    });
    finish("transform", seed, &inst, is_section && generates && unit_found, result, out)
}

pub fn recover(path: &Path, seed: u64, out: Option<&Path>) -> Result<bool> {
    let inst = load(path)?;
    let ss = stark_module(&inst, inst.all_primes())?;
    let direct = inst.dual_structure();
    let Some(eps) = ss.generator() else {
        let result = json!({"error": "the Stark module is not cyclic", "direct": direct});
        return finish("recover", seed, &inst, false, result, out);
    };
    let profile = invariant_profile(&ss.hasse, &ss.sheaf.stalks, &eps);
    let recovered = recover_structure(&profile);
    let laws = profile.laws_hold();
    let (matches, note) = match &recovered {
        Ok(r) => (*r == direct, Value::Null),
        Err(e) => (true, json!(e.to_string())),
    };
    let result = json!({
        "profile": {
            "dphi": profile.dphi,
            "ord": profile.ord,
            "d": profile.d,
            "phi": profile.phi.iter().map(|&(n, v)| (inst.vertex_name(n), v)).collect::<BTreeMap<_, _>>(),
        },
        "profile_laws": laws,
        "recovered": recovered.ok(),
        "direct": direct,
        "matches": matches,
        "note": note,
    });
    finish("recover", seed, &inst, laws && matches, result, out)
}

pub fn path(path: &Path, from: Option<&[String]>, to: Option<&[String]>, seed: u64, out: Option<&Path>) -> Result<bool> {
    let inst = load(path)?;
    let all = inst.all_primes();
    let core = inst.core_vertices(all);
    let resolve = |labels: Option<&[String]>, fallback: Option<&Vertex>| -> Result<Vertex> {
        match labels {
            Some(ls) => {
                let refs: Vec<&str> = ls.iter().map(String::as_str).filter(|s| !s.is_empty() && *s != "1").collect();
                Ok(inst.vertex_of(&refs)?)
            }
            None => fallback.copied().ok_or_else(|| anyhow::anyhow!("no core vertex to default to")),
        }
    };
    let (a, b) = match (resolve(from, core.first()), resolve(to, core.last())) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) if core.is_empty() => {
            let result = json!({"error": e.to_string(), "core_vertices": []});
            return finish("path", seed, &inst, false, result, out);
        }
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };
    let result = match inst.core_path(a, b, all) {
        Ok(p) => {
            let steps: Vec<Value> = p
                .windows(2)
                .map(|w| {
                    let q = (w[0] ^ w[1]).trailing_zeros() as usize;
                    json!({"from": inst.vertex_name(w[0]), "to": inst.vertex_name(w[1]), "prime": inst.primes[q].label})
                })
                .collect();
            json!({"from": inst.vertex_name(a), "to": inst.vertex_name(b), "path": names(&inst, &p), "steps": steps})
        }
        Err(e) => json!({"from": inst.vertex_name(a), "to": inst.vertex_name(b), "diagnostic": e.to_string()}),
    };
    let passed = result.get("path").is_some();
    finish("path", seed, &inst, passed, result, out)
}

pub fn tower(path: &Path, seed: u64, out: Option<&Path>) -> Result<bool> {
    let inst = load(path)?;
    let report = tower_check(&inst)?;
    let passed = report.passed();
    finish("tower", seed, &inst, passed, serde_json::to_value(&report)?, out)
}

pub fn selftest(criteria: Option<&[u32]>, cases: Option<usize>, seed: u64, out: Option<&Path>) -> Result<bool> {
    let wanted: Vec<u32> = criteria.map(<[u32]>::to_vec).unwrap_or_else(|| (1..=8).collect());
    let mut reports = Vec::new();
    for c in wanted {
        let Some(rep) = suites::run_criterion(c, seed, cases) else {
            bail!("unknown criterion {c}; the suites are numbered 1 to 8");
        };
        eprintln!("{}", rep.line());
        reports.push(rep);
    }
    let passed = reports.iter().all(|r| r.passed);
    emit(envelope("selftest", seed, None, passed, json!({"suites": reports})), out)?;
    Ok(passed)
}
