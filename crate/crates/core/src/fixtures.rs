//! Model files shipped with the tool, addressable as `examples/<name>`.

pub const FIXTURES: &[(&str, &str)] = &[
    ("standard_r1", include_str!("../fixtures/standard_r1.toml")),
    ("standard_r2", include_str!("../fixtures/standard_r2.toml")),
    ("so3_point", include_str!("../fixtures/so3_point.toml")),
    ("so3_broken", include_str!("../fixtures/so3_broken.toml")),
    ("hyperbolic_r2", include_str!("../fixtures/hyperbolic_r2.toml")),
    ("lift_not_coisotropic", include_str!("../fixtures/lift_not_coisotropic.toml")),
    ("dolbeault_c1", include_str!("../fixtures/dolbeault_c1.toml")),
];

/// Looks up a shipped model by `name`, `examples/name` or `name.toml`.
pub fn get(name: &str) -> Option<&'static str> {
    let name = name.strip_prefix("examples/").unwrap_or(name);
    let name = name.strip_suffix(".toml").unwrap_or(name);
    FIXTURES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}
