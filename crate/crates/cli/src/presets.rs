//! Scenario and sweep files bundled with the binary.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetKind {
    Scenario,
    Sweep,
}

#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub kind: PresetKind,
    pub text: &'static str,
}

macro_rules! preset {
    ($name:literal, $kind:ident) => {
        Preset {
            name: $name,
            kind: PresetKind::$kind,
            text: include_str!(concat!("../presets/", $name, ".toml")),
        }
    };
}

pub const PRESETS: &[Preset] = &[
    preset!("table4_case1", Scenario),
    preset!("table4_case2", Scenario),
    preset!("table4_case3", Scenario),
    preset!("table5", Scenario),
    preset!("table6", Scenario),
    preset!("table7", Scenario),
    preset!("fig7", Sweep),
    preset!("fig8", Sweep),
    preset!("fig9", Sweep),
    preset!("fig10", Sweep),
    preset!("fig11", Sweep),
    preset!("fig12", Sweep),
    preset!("fig13", Sweep),
    preset!("fig14", Sweep),
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

impl Preset {
    /// First comment line of the file.
    pub fn summary(&self) -> &'static str {
        self.text
            .lines()
            .next()
            .and_then(|l| l.strip_prefix('#'))
            .map_or("", str::trim)
    }
}
