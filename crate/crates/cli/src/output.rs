//! CSV tables and run manifests.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Version of the CSV column layouts; bumped whenever a header changes.
pub const SCHEMA_VERSION: u32 = 1;

/// In-memory CSV table. Floats use Rust's shortest round-trip formatting.
#[derive(Debug, Clone)]
pub struct Table {
    columns: Vec<&'static str>,
    body: String,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            body: String::new(),
        }
    }

    pub fn columns(&self) -> &[&'static str] {
        &self.columns
    }

    pub fn push(&mut self, cells: &[Cell]) {
        debug_assert_eq!(cells.len(), self.columns.len());
        let mut first = true;
        for c in cells {
            if !first {
                self.body.push(',');
            }
            first = false;
            match c {
                Cell::F(v) => write!(self.body, "{v}").unwrap(),
                Cell::U(v) => write!(self.body, "{v}").unwrap(),
                Cell::S(v) => self.body.push_str(v),
            }
        }
        self.body.push('\n');
    }

    pub fn render(&self) -> String {
        format!("{}\n{}", self.columns.join(","), self.body)
    }
}

pub enum Cell {
    F(f64),
    U(u64),
    S(String),
}

/// Joins numbers with `;` so a list fits in one CSV field.
pub fn joined(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// Files written for one run: `<prefix>.csv` plus optional extra tables
/// `<prefix>.<name>.csv`, and `<prefix>.manifest`.
pub struct Outputs {
    pub main: Table,
    pub extra: Vec<(&'static str, Table)>,
}

fn path_with(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.display().to_string(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

impl Outputs {
    pub fn single(main: Table) -> Self {
        Outputs {
            main,
            extra: Vec::new(),
        }
    }

    /// Writes every table and returns the paths in write order.
    pub fn write_tables(&self, prefix: &Path) -> Result<Vec<PathBuf>, CliError> {
        let mut paths = vec![path_with(prefix, ".csv")];
        write(&paths[0], &self.main.render())?;
        for (name, table) in &self.extra {
            let p = path_with(prefix, &format!(".{name}.csv"));
            write(&p, &table.render())?;
            paths.push(p);
        }
        Ok(paths)
    }
}

/// `key = value` run record in a fixed key order.
pub struct Manifest {
    lines: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Manifest {
            lines: vec![
                ("foult.version".into(), foult_version().into()),
                ("schema.version".into(), SCHEMA_VERSION.to_string()),
                ("command".into(), command.into()),
            ],
        }
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.lines.push((key.into(), value.to_string()));
    }

    pub fn render(&self) -> String {
        self.lines
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn write(&self, prefix: &Path) -> Result<PathBuf, CliError> {
        let p = path_with(prefix, ".manifest");
        write(&p, &self.render())?;
        Ok(p)
    }
}

fn foult_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}
