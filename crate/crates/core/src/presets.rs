//! Figure reproduction recipes shipped with the crate (`presets/*.toml`).

macro_rules! presets {
    ($($name:literal),* $(,)?) => {
        /// `(name, document)` for every bundled preset.
        pub const ALL: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../presets/", $name, ".toml")))),*
        ];
    };
}

presets!(
    "fig2a", "fig2b", "fig3", "fig4", "fig5a", "fig5b", "fig5c", "fig5d", "fig5e", "fig5f", "fig5g", "fig5h",
);

pub fn get(name: &str) -> Option<&'static str> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn every_preset_parses() {
        for (name, text) in ALL {
            parse_config(text).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(get("fig4").is_some());
        assert!(get("fig6").is_none());
    }
}
