//! Built-in example models, shipped byte-exactly from `fixtures/`.

use std::path::Path;

use crate::error::ModelError;

macro_rules! fixture {
    ($name:literal) => {
        ($name, include_str!(concat!("../fixtures/", $name, ".json")))
    };
}

pub const EXAMPLES: &[(&str, &str)] = &[
    fixture!("rotation_momentum_map"),
    fixture!("translation_nonequivariant"),
    fixture!("so3_action_algebroid"),
    fixture!("magnetic_twist_mechanics"),
    fixture!("plectic2_flux_model"),
    fixture!("broken_jacobi"),
];

pub fn source(name: &str) -> Option<&'static str> {
    EXAMPLES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    EXAMPLES.iter().map(|(n, _)| *n)
}

/// Writes the named example to `path`; `Ok(false)` for an unknown name.
pub fn emit(name: &str, path: &Path) -> Result<bool, ModelError> {
    let Some(src) = source(name) else { return Ok(false) };
    std::fs::write(path, src).map_err(|source| ModelError::Io { path: path.display().to_string(), source })?;
    Ok(true)
}
