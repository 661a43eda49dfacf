use std::fs;
use std::path::{Path, PathBuf};

pub fn dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

pub fn path(name: &str) -> PathBuf {
    dir().join(name)
}

/// `(name, first, second)` for every `NAME.a.xml` / `NAME.b.xml` pair.
pub fn convergence_pairs() -> Vec<(String, String, String)> {
    let root = dir().join("convergence");
    let mut names: Vec<String> = fs::read_dir(&root)
        .unwrap()
        .filter_map(|e| {
            let name = e.unwrap().file_name().into_string().unwrap();
            name.strip_suffix(".a.xml").map(str::to_string)
        })
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|name| {
            let read = |side: &str| fs::read_to_string(root.join(format!("{name}.{side}.xml"))).unwrap();
            let (a, b) = (read("a"), read("b"));
            (name, a, b)
        })
        .collect()
}
