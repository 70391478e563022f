//! The shipped schema and example configs must track the config types.

use std::collections::BTreeSet;
use std::path::PathBuf;

use layerheat_harness::config::{Problem, RunConfig};
use serde_json::Value;

const PROBLEMS: [Problem; 7] =
    [Problem::Spectrum, Problem::Oit, Problem::Mixed, Problem::Obm, Problem::Multilayer, Problem::Stefan, Problem::Validate];

fn docs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs")
}

fn schema() -> Value {
    serde_json::from_str(&std::fs::read_to_string(docs().join("config.schema.json")).unwrap()).unwrap()
}

fn keys(v: &Value) -> BTreeSet<String> {
    v.as_object().unwrap().keys().cloned().collect()
}

#[test]
fn example_configs_resolve() {
    for p in PROBLEMS {
        let path = docs().join("configs").join(format!("{}.json", p.name()));
        let cfg = RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        cfg.resolve(p).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn schema_properties_match_serialized_defaults() {
    let schema = schema();
    let props = &schema["properties"];
    for p in PROBLEMS {
        let resolved = serde_json::to_value(RunConfig::default_for(p).resolve(p).unwrap()).unwrap();
        let block = &resolved[p.name()];
        assert_eq!(keys(&props[p.name()]["properties"]), keys(block), "block {}", p.name());
        assert!(props["problem"]["enum"].as_array().unwrap().contains(&Value::from(p.name())));
    }
    let obm = serde_json::to_value(RunConfig::default_for(Problem::Obm).resolve(Problem::Obm).unwrap()).unwrap();
    assert_eq!(keys(&props["obm"]["properties"]["grid"]["properties"]), keys(&obm["obm"]["grid"]));
    let ml = serde_json::to_value(RunConfig::default_for(Problem::Multilayer).resolve(Problem::Multilayer).unwrap()).unwrap();
    assert_eq!(
        keys(&props["multilayer"]["properties"]["interfaces"]["items"]["properties"]),
        keys(&ml["multilayer"]["interfaces"][0])
    );
}
