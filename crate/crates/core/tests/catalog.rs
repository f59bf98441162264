use udk_core::catalog::{self, CatalogError, Kind};
use udk_core::format::GroupFile;

// One test function: it changes UDK_DATA_DIR, which is process-wide.
#[test]
fn data_directory_override_and_emit() {
    let dir = std::env::temp_dir().join(format!("udk-catalog-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::env::set_var("UDK_DATA_DIR", &dir);
    assert_eq!(catalog::data_dir(), dir);

    // curated entries now have no data
    match catalog::group("two_a7_dim4") {
        Err(CatalogError::DataMissing { name, .. }) => assert_eq!(name, "two_a7_dim4"),
        other => panic!("expected missing data, got {:?}", other.map(|g| g.name().to_string())),
    }

    // built-ins do not need the directory
    let path = dir.join("q8.json");
    catalog::emit("q8", &path).unwrap();
    let mut g = GroupFile::read(&path).unwrap().group().unwrap();
    g.enumerate(100).unwrap();
    assert_eq!(g.order().unwrap(), 8);
    let (_, v) = catalog::verify("q8", 100).unwrap();
    assert!(v.passed());

    std::env::remove_var("UDK_DATA_DIR");
    assert!(catalog::group_file("two_a7_dim4").is_ok());
}

#[test]
fn every_entry_is_listed_once() {
    let names: Vec<&str> = catalog::list_catalog().iter().map(|e| e.name).collect();
    let mut sorted = names.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), names.len());
    assert!(catalog::entry("nope").is_err());
    for e in catalog::list_catalog().iter().filter(|e| e.kind == Kind::BuiltIn) {
        assert_eq!(catalog::group(e.name).unwrap().dim(), e.dim);
    }
}
