use crate::config::{ConfigError, PelInstanceConfig};

pub const FIXTURES: &[(&str, &str)] = &[
    ("basechange-A", include_str!("../fixtures/basechange-A.json")),
    ("quaternion-C", include_str!("../fixtures/quaternion-C.json")),
    ("siegel-C", include_str!("../fixtures/siegel-C.json")),
    ("siegel-C-r2", include_str!("../fixtures/siegel-C-r2.json")),
    ("unitary-A", include_str!("../fixtures/unitary-A.json")),
];

pub fn fixture_text(name: &str) -> Result<&'static str, ConfigError> {
    FIXTURES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t).ok_or_else(|| ConfigError::UnknownFixture(name.into()))
}

pub fn fixture(name: &str) -> Result<PelInstanceConfig, ConfigError> {
    PelInstanceConfig::from_json(fixture_text(name)?)
}
