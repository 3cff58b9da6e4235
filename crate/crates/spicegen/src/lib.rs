//! Generator of runnable web applications from entity-relationship models.
//!
//! [`generate`] turns a validated model into a source tree (models, views,
//! controllers, configuration, scripts and static files) that builds against
//! the `spicey` runtime library. [`write_tree`] puts it on disk.

pub mod names;
pub mod plan;
mod templates;

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use spicey::erd::{parse_erd, print_erd, validate_erd, Erd, ParseError, ValidationError};
use thiserror::Error;

pub use plan::GenPlan;

/// Output path to file contents.
pub type GeneratedTree = BTreeMap<PathBuf, String>;

/// Location of the runtime library this generator was built with.
pub fn default_runtime_path() -> String {
    let core = Path::new(env!("CARGO_MANIFEST_DIR")).join("..").join("core");
    fs::canonicalize(&core).unwrap_or(core).to_string_lossy().into_owned()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenOptions {
    /// Path of the runtime library referenced from the generated manifest.
    pub runtime_path: String,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            runtime_path: default_runtime_path(),
        }
    }
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("invalid model:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<ValidationError>),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("output directory {0} is not empty; use --force to overwrite")]
    NotEmpty(PathBuf),
}

impl GenError {
    /// Process exit code: 1 for a bad model, 2 for file system trouble.
    pub fn exit_code(&self) -> u8 {
        match self {
            GenError::Parse(_) | GenError::Invalid(_) => 1,
            GenError::Io { .. } | GenError::NotEmpty(_) => 2,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> GenError + '_ {
    move |source| GenError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Parses and validates a model.
pub fn check(source: &str) -> Result<Erd, GenError> {
    let erd = parse_erd(source)?;
    let errs = validate_erd(&erd);
    if errs.is_empty() {
        Ok(erd)
    } else {
        Err(GenError::Invalid(errs))
    }
}

/// Source tree of the application for `erd`.
pub fn generate(erd: &Erd, options: &GenOptions) -> Result<GeneratedTree, GenError> {
    let plan = GenPlan::new(erd).map_err(GenError::Invalid)?;
    let mut tree = GeneratedTree::new();
    let mut put = |path: &str, contents: String| {
        let previous = tree.insert(PathBuf::from(path), contents);
        assert!(previous.is_none(), "two units for {path}");
    };
    put("Cargo.toml", templates::cargo_toml(&plan, &options.runtime_path));
    put("README.md", templates::readme(&plan));
    put(&plan.erd_file(), print_erd(erd));
    put("src/main.rs", templates::main_rs(&plan));
    let mods = |f: fn(&plan::EntityPlan) -> String| plan.entities.iter().map(f).collect::<Vec<_>>();
    put(
        "src/models/mod.rs",
        templates::mod_rs("Typed access to the stored entities.", &mods(|e| e.model_mod())),
    );
    let views: Vec<String> = plan
        .entities
        .iter()
        .flat_map(|e| [e.view_mod(), e.html_mod()])
        .collect();
    put(
        "src/views/mod.rs",
        templates::mod_rs("Forms, pages and HTML renderings of the entities.", &views),
    );
    put(
        "src/controllers/mod.rs",
        templates::mod_rs("Controllers, one module per entity.", &mods(|e| e.controller_mod())),
    );
    put(
        "src/config/mod.rs",
        templates::mod_rs(
            "Application configuration.",
            &[
                "authorization".into(),
                "controller_reference".into(),
                "routes".into(),
                "user_processes".into(),
            ],
        ),
    );
    put(
        "src/config/controller_reference.rs",
        templates::controller_reference(&plan),
    );
    put("src/config/routes.rs", templates::routes(&plan));
    put("src/config/authorization.rs", templates::authorization(&plan));
    put("src/config/user_processes.rs", templates::user_processes(&plan));
    put("src/system/mod.rs", templates::system());
    put("scripts/build.sh", templates::build_script());
    put("scripts/run.sh", templates::run_script());
    put("public/style.css", templates::style_css());
    for e in &plan.entities {
        put(
            &format!("src/models/{}.rs", e.model_mod()),
            templates::model_unit(&plan, e),
        );
        put(
            &format!("src/views/{}.rs", e.view_mod()),
            templates::view_unit(&plan, e),
        );
        put(&format!("src/views/{}.rs", e.html_mod()), templates::html_unit(e));
        put(
            &format!("src/controllers/{}.rs", e.controller_mod()),
            templates::controller_unit(&plan, e),
        );
    }
    Ok(tree)
}

/// Whether `dir` is missing or has no entries.
fn is_empty_dir(dir: &Path) -> Result<bool, GenError> {
    match fs::read_dir(dir) {
        Ok(mut entries) => Ok(entries.next().is_none()),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(true),
        Err(e) => Err(io_err(dir)(e)),
    }
}

/// Writes `tree` below `out`. A nonempty `out` is only written to with
/// `force`; existing files outside the tree are left alone.
pub fn write_tree(tree: &GeneratedTree, out: &Path, force: bool) -> Result<(), GenError> {
    if !force && !is_empty_dir(out)? {
        return Err(GenError::NotEmpty(out.to_path_buf()));
    }
    for (rel, contents) in tree {
        let path = out.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        fs::write(&path, contents).map_err(io_err(&path))?;
        #[cfg(unix)]
        if rel.starts_with("scripts") {
            use std::os::unix::fs::PermissionsExt;
            fs::set_permissions(&path, fs::Permissions::from_mode(0o755)).map_err(io_err(&path))?;
        }
    }
    Ok(())
}

/// Reads, validates, generates and writes in one go.
pub fn generate_file(
    erd_file: &Path,
    out: &Path,
    force: bool,
    options: &GenOptions,
) -> Result<GeneratedTree, GenError> {
    let source = fs::read_to_string(erd_file).map_err(io_err(erd_file))?;
    let erd = check(&source)?;
    let tree = generate(&erd, options)?;
    write_tree(&tree, out, force)?;
    Ok(tree)
}
