//! Datasets shipped with the crate.

/// Two atoms `r` (rain) and `w` (wet), five people reporting over three days.
pub const WEATHER: &str = include_str!("../fixtures/weather.json");

/// A robot's sensor log from a 17-room maze: obstacle sensors `N`, `E`, `S`,
/// `W` and one location atom `L_x` per room, five runs of three steps.
pub const MAZE: &str = include_str!("../fixtures/maze.json");

pub const NAMES: &[&str] = &["maze", "weather"];

pub fn by_name(name: &str) -> Option<&'static str> {
    match name {
        "maze" => Some(MAZE),
        "weather" => Some(WEATHER),
        _ => None,
    }
}
