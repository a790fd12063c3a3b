//! The bundled model gallery: four curated scenarios covering the
//! positive suspension example, a flat product, the warped negative
//! control, and the pair-space suite.

use anyhow::{bail, Result};

use crate::config::ScenarioConfig;

pub const GALLERY: [(&str, &str); 4] = [
    (
        "suspension-211",
        include_str!("../gallery/suspension-211.toml"),
    ),
    (
        "product-lorentz",
        include_str!("../gallery/product-lorentz.toml"),
    ),
    (
        "warped-negative",
        include_str!("../gallery/warped-negative.toml"),
    ),
    ("graph-suite", include_str!("../gallery/graph-suite.toml")),
];

pub fn entry(name: &str) -> Result<ScenarioConfig> {
    for (id, text) in GALLERY {
        if id == name {
            return ScenarioConfig::from_toml(text);
        }
    }
    bail!(
        "no gallery entry `{name}`; available: {}",
        GALLERY.map(|(id, _)| id).join(", ")
    );
}

pub fn names() -> [&'static str; 4] {
    GALLERY.map(|(id, _)| id)
}
