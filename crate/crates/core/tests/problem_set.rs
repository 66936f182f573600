//! The bundled problem set.

use std::collections::HashSet;
use std::path::PathBuf;

use kforge::problem::{load_problem_set, Level, Manifest};
use kforge::Backend;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../problems/kernelbench")
}

#[test]
fn metal_exclusions_are_the_3d_pooling_and_transposed_3d_problems() {
    let manifest = Manifest::load(&root()).unwrap();
    assert_eq!(manifest.problems.len(), 250);
    let excluded = manifest.exclusions(Backend::Metal);
    assert_eq!(excluded.len(), 30);
    for id in &excluded {
        let p = manifest.problems.iter().find(|p| &p.id == id).unwrap();
        assert!(
            p.tags.iter().any(|t| ["ConvTranspose3d", "AvgPool3d", "MaxPool3d"].contains(&t.as_str())),
            "{id} excluded without an unsupported operation"
        );
        assert_ne!(p.level, Level::Three);
    }
    assert!(manifest.exclusions(Backend::Cuda).is_empty());
}

#[test]
fn ids_are_unique_and_sources_load() {
    let set = load_problem_set(&root(), Backend::Cuda).unwrap();
    let ids: HashSet<&str> = set.problems.iter().map(|p| p.id.as_str()).collect();
    assert_eq!(ids.len(), set.len());
    for p in &set.problems {
        assert!(p.reference_source.contains("class Model"), "{}", p.id);
        assert!(p.reference_source.contains("def get_inputs"), "{}", p.id);
    }
}

#[test]
fn digest_differs_per_backend_and_is_stable() {
    let a = load_problem_set(&root(), Backend::Cuda).unwrap();
    let b = load_problem_set(&root(), Backend::Cuda).unwrap();
    let m = load_problem_set(&root(), Backend::Metal).unwrap();
    assert_eq!(a.digest, b.digest);
    assert_ne!(a.digest, m.digest);
}
