// SPDX-License-Identifier: Apache-2.0

/// Number formatting shared by every report. Both modes are locale-free
/// and deterministic.
#[derive(Debug, Clone, Copy)]
pub enum Precision {
    /// Four decimals, with `-0.0000` folded to `0.0000`.
    Fixed4,
    /// Shortest representation that parses back to the same `f64`.
    RoundTrip,
}

impl Precision {
    pub fn from_flag(full: bool) -> Self {
        if full {
            Precision::RoundTrip
        } else {
            Precision::Fixed4
        }
    }

    pub fn fmt(self, v: f64) -> String {
        match self {
            Precision::Fixed4 => {
                let s = format!("{v:.4}");
                if s.trim_start_matches('-').bytes().all(|b| b == b'0' || b == b'.') {
                    s.trim_start_matches('-').to_string()
                } else {
                    s
                }
            }
            Precision::RoundTrip => {
                let v = if v == 0.0 { 0.0 } else { v };
                v.to_string()
            }
        }
    }

    pub fn fmt_opt(self, v: Option<f64>) -> String {
        v.map_or_else(|| "undefined".to_string(), |v| self.fmt(v))
    }
}
