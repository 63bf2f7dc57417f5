//! Run configuration: flat `key = value` files merged under command-line flags.

use nevlab::harness::{parse_complex, AlphaMode, CheckConfig, GridSpec, Sector};
use nevlab::{NevError, Result, C64};
use std::collections::BTreeMap;

/// Keys accepted in a config file; flags of the same name override them.
pub const KEYS: &[&str] = &[
    "f", "grid", "target", "a", "c", "eps", "delta", "n", "k", "u", "alpha", "sector", "fixture", "lattice", "order",
    "samples", "seed", "tol", "radius", "workers", "out", "only",
];

/// Values by key; repeated keys accumulate into lists.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, Vec<String>>,
}

impl RunConfig {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| NevError::InvalidParameter(format!("config line {}: expected 'key = value'", i + 1)))?;
            let k = k.trim();
            if !KEYS.contains(&k) {
                return Err(NevError::InvalidParameter(format!(
                    "config line {}: unknown key '{k}'",
                    i + 1
                )));
            }
            let v = v.trim().trim_matches('"').to_string();
            cfg.values.entry(k.to_string()).or_default().push(v);
        }
        Ok(cfg)
    }

    /// Replaces a key's values when the flag was given.
    pub fn set(&mut self, key: &str, flag: &Option<String>) {
        if let Some(v) = flag {
            self.values.insert(key.to_string(), vec![v.clone()]);
        }
    }

    /// Replaces a list key when at least one flag was given.
    pub fn set_list(&mut self, key: &str, flags: &[String]) {
        if !flags.is_empty() {
            self.values.insert(key.to_string(), flags.to_vec());
        }
    }

    pub fn clear(&mut self, key: &str) {
        self.values.remove(key);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).and_then(|v| v.last()).map(String::as_str)
    }

    pub fn list(&self, key: &str) -> &[String] {
        self.values.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    fn number<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(s) => s
                .parse::<T>()
                .map(Some)
                .map_err(|_| NevError::InvalidParameter(format!("{key}: '{s}' is not a valid number"))),
        }
    }

    fn complex(&self, key: &str) -> Result<Option<C64>> {
        self.get(key).map(parse_complex).transpose()
    }

    pub fn radius(&self) -> Result<Option<f64>> {
        self.number("radius")
    }

    pub fn workers(&self) -> Result<Option<usize>> {
        self.number("workers")
    }

    pub fn grid(&self) -> Result<Option<GridSpec>> {
        self.get("grid").map(GridSpec::parse).transpose()
    }

    pub fn targets(&self) -> Result<Vec<C64>> {
        self.list("target").iter().map(|s| parse_complex(s)).collect()
    }

    /// Check configuration with defaults for everything not set.
    pub fn check_config(&self) -> Result<CheckConfig> {
        let mut c = CheckConfig {
            f: self.get("f").map(str::to_string),
            fixture: self.get("fixture").map(str::to_string),
            grid: self.grid()?,
            targets: self.targets()?,
            delta: self.number("delta")?,
            ..CheckConfig::default()
        };
        if let Some(a) = self.complex("a")? {
            c.a = a;
        }
        if let Some(v) = self.complex("c")? {
            c.c = v;
        }
        if let Some(v) = self.number("eps")? {
            c.eps = v;
        }
        if let Some(v) = self.number("n")? {
            c.n = v;
        }
        if let Some(v) = self.number("k")? {
            c.k = v;
        }
        if let Some(v) = self.number("u")? {
            c.u = v;
        }
        if let Some(v) = self.number("order")? {
            c.order = v;
        }
        if let Some(v) = self.number("samples")? {
            c.samples = v;
        }
        if let Some(v) = self.number("seed")? {
            c.seed = v;
        }
        if let Some(v) = self.number("tol")? {
            if !(v > 0.0) {
                return Err(NevError::InvalidParameter("tol must be positive".into()));
            }
            c.tol = v;
        }
        if let Some(s) = self.get("alpha") {
            c.alpha =
                if s.eq_ignore_ascii_case("eq") {
                    AlphaMode::Eq
                } else {
                    AlphaMode::Constant(s.parse().map_err(|_| {
                        NevError::InvalidParameter(format!("alpha: '{s}' is neither a number nor 'eq'"))
                    })?)
                };
        }
        if let Some(s) = self.get("sector") {
            let (d, h) = s
                .split_once(':')
                .ok_or_else(|| NevError::InvalidParameter("sector must be 'direction:half_angle'".into()))?;
            let num = |x: &str| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| NevError::InvalidParameter(format!("sector: '{x}' is not a number")))
            };
            c.sector = Some(Sector {
                direction: num(d)?,
                half_angle: num(h)?,
            });
        }
        if let Some(s) = self.get("lattice") {
            let (w1, w2) = s
                .split_once(',')
                .ok_or_else(|| NevError::InvalidParameter("lattice must be 'w1,w2'".into()))?;
            c.lattice = Some((parse_complex(w1)?, parse_complex(w2)?));
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_merge_under_flags() {
        let mut cfg = RunConfig::parse("f = exp(z)\n# comment\ntarget = 0\ntarget = 2\na = 1 # trailing\n").unwrap();
        assert_eq!(cfg.list("target"), ["0", "2"]);
        cfg.set("a", &Some("2".into()));
        cfg.set("c", &None);
        let c = cfg.check_config().unwrap();
        assert_eq!(c.a, C64::new(2.0, 0.0));
        assert_eq!(c.c, C64::new(1.0, 0.0));
        assert_eq!(c.targets.len(), 2);
        assert_eq!(c.f.as_deref(), Some("exp(z)"));
    }

    #[test]
    fn malformed_lines_are_rejected() {
        assert!(RunConfig::parse("f exp(z)").is_err());
        assert!(RunConfig::parse("colour = red").is_err());
        let cfg = RunConfig::parse("alpha = sometimes").unwrap();
        assert!(cfg.check_config().is_err());
    }

    #[test]
    fn alpha_sector_and_lattice() {
        let cfg = RunConfig::parse("alpha = eq\nsector = 0.5:0.2\nlattice = 1,i\n").unwrap();
        let c = cfg.check_config().unwrap();
        assert_eq!(c.alpha, AlphaMode::Eq);
        assert_eq!(c.sector.unwrap().half_angle, 0.2);
        assert_eq!(c.lattice, Some((C64::new(1.0, 0.0), C64::new(0.0, 1.0))));
    }
}
