use std::collections::BTreeMap;

use super::BenchError;

const BUNDLED: &str = include_str!("../../data/ct_lb.txt");

/// Known cycle-time lower bounds keyed by instance name.
///
/// Text form: one `name value` pair per line, `#` comments. Lookups ignore
/// ASCII case so `ft06.txt` finds `FT06`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LowerBounds {
    bounds: BTreeMap<String, f64>,
}

impl LowerBounds {
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        let mut bounds = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let mut parts = t.split_whitespace();
            let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(BenchError::Manifest { line: i + 1, message: "expected `name value`".into() });
            };
            let v: f64 = value
                .parse()
                .map_err(|_| BenchError::Manifest { line: i + 1, message: format!("bad bound {value:?}") })?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(BenchError::Manifest { line: i + 1, message: format!("bound must be positive, got {v}") });
            }
            bounds.insert(name.to_ascii_uppercase(), v);
        }
        Ok(Self { bounds })
    }

    /// Bounds for the FT, LA, ABZ and ORB suites.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled manifest parses")
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.bounds.get(&name.to_ascii_uppercase()).copied()
    }

    pub fn len(&self) -> usize {
        self.bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_empty()
    }
}
