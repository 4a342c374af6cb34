//! Project fixtures written to temporary directories.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

pub struct Fixture {
    pub dir: tempfile::TempDir,
}

impl Fixture {
    pub fn new() -> Self {
        Self { dir: tempfile::tempdir().unwrap() }
    }

    pub fn root(&self) -> &Path {
        self.dir.path()
    }

    pub fn config(&self) -> PathBuf {
        self.root().join("project.json")
    }

    pub fn out(&self) -> PathBuf {
        self.root().join("site")
    }

    pub fn write(&self, rel: &str, body: &str) {
        let path = self.root().join(rel);
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(path, body).unwrap();
    }

    pub fn read(&self, rel: &str) -> String {
        fs::read_to_string(self.root().join(rel)).unwrap()
    }

    /// Local texts `(id, source)`, each at `texts/<id>.lara.txt`.
    pub fn project(&self, texts: &[(&str, &str)], history: &[&str], extra: Value) -> PathBuf {
        let decls: Vec<Value> = texts
            .iter()
            .map(|(id, src)| {
                self.write(&format!("texts/{id}.lara.txt"), src);
                json!({ "text_id": id, "source_path": format!("texts/{id}.lara.txt"), "title": id, "language": "en" })
            })
            .collect();
        self.project_with_decls(decls, history, extra)
    }

    pub fn project_with_decls(&self, decls: Vec<Value>, history: &[&str], extra: Value) -> PathBuf {
        let mut config = json!({
            "project_id": "fixture",
            "texts": decls,
            "history_path": "history.txt",
            "output_dir": "site",
        });
        if let Value::Object(extra) = extra {
            config.as_object_mut().unwrap().extend(extra);
        }
        self.write("project.json", &serde_json::to_string_pretty(&config).unwrap());
        if !history.is_empty() {
            self.write("history.txt", &(history.join("\n") + "\n"));
        }
        self.config()
    }

    /// A manifest giving every segment of `ids` (with `segments` each) a
    /// remote locator.
    pub fn remote_manifest(&self, rel: &str, ids: &[(&str, usize)]) {
        let mut resources = serde_json::Map::new();
        for (id, n) in ids {
            for i in 0..*n {
                resources.insert(format!("{id}_seg_{i:04}"), json!(format!("{id}/{i}.mp3")));
            }
        }
        let body = json!({ "base_url": "https://media.example/audio/", "resources": resources });
        self.write(rel, &body.to_string());
    }
}
