//! Flat `key=value` run configuration.
//!
//! Pairs may be separated by newlines or spaces; `#` starts a comment.
//! Key names follow the original simulator's listings (`penalty_factor`,
//! `nonSybilRej`, `sybilRej`, `aggProbes`, ...).

use std::fmt::Write as _;

use crate::attack::AttackConfig;
use crate::defense::OffsetFactor;
use crate::{Error, Result};

/// Key, meaning, default.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("penalty_factor", "offset factor alpha applied per received feedback edge", "1"),
    ("nonSybilRej", "rejection rate of honest users' requests", "0.01"),
    ("sybilRej", "rejection rate of entrance Sybils' requests", "0.6"),
    ("latentRej", "rejection rate of latent Sybils' requests", "0.98"),
    ("aggProbes", "friend requests sent by each entrance Sybil", "25"),
    ("latentProbes", "friend requests sent by each latent Sybil", "2"),
    ("numAggSybil", "entrance Sybils", "200"),
    ("numLatSybil", "latent Sybils", "4800"),
    ("numSybils", "total Sybils (entrance + latent)", "5000"),
    ("arrivalLinks", "earlier Sybils each arriving Sybil befriends", "5"),
    ("numDeactivation", "trust seeds drawn from honest nodes", "100"),
    ("entranceSelection", "`random` or `first` (earliest arrivals)", "random"),
    ("iterations", "power iterations, or `auto` for ceil(log2 |V|)", "auto"),
    ("rngSeed", "seed of the simulation RNG streams", "0"),
];

pub fn known_keys() -> String {
    KEYS.iter().map(|k| k.0).collect::<Vec<_>>().join(", ")
}

/// Everything that defines one simulated run apart from the host graph.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub attack: AttackConfig,
    pub num_seeds: usize,
    /// `None` means `ceil(log2 |V|)`.
    pub iterations: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { attack: AttackConfig::default(), num_seeds: 100, iterations: None }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse `{value}`")))
}

/// Splits config text into `(key, value)` pairs.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        for token in line.split_whitespace() {
            let (k, v) = token
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("expected key=value, got `{token}`")))?;
            pairs.push((k.to_owned(), v.to_owned()));
        }
    }
    Ok(pairs)
}

impl SimConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SimConfig::default();
        cfg.apply(&parse_pairs(text)?)?;
        Ok(cfg)
    }

    /// Applies overrides in order. Sybil counts are resolved after the batch:
    /// `numSybils` adjusts the latent count, and it must agree with
    /// `numAggSybil + numLatSybil` when all three are given.
    pub fn apply(&mut self, pairs: &[(String, String)]) -> Result<()> {
        let mut entrance = self.attack.num_entrance;
        let mut latent = self.attack.num_latent();
        let mut total: Option<usize> = None;
        let mut latent_set = false;
        for (key, value) in pairs {
            let (k, v) = (key.as_str(), value.as_str());
            let a = &mut self.attack;
            match k {
                "penalty_factor" => a.alpha = OffsetFactor::new(parse_num(k, v)?)?,
                "nonSybilRej" => a.rej_honest = parse_num(k, v)?,
                "sybilRej" => a.rej_entrance = parse_num(k, v)?,
                "latentRej" => a.rej_latent = parse_num(k, v)?,
                "aggProbes" => a.entrance_requests = parse_num(k, v)?,
                "latentProbes" => a.latent_requests = parse_num(k, v)?,
                "numAggSybil" => entrance = parse_num(k, v)?,
                "numLatSybil" => {
                    latent = parse_num(k, v)?;
                    latent_set = true;
                }
                "numSybils" => total = Some(parse_num(k, v)?),
                "arrivalLinks" => a.sybil_arrival_links = parse_num(k, v)?,
                "numDeactivation" => self.num_seeds = parse_num(k, v)?,
                "entranceSelection" => a.entrance_selection = v.parse()?,
                "iterations" => {
                    self.iterations = if v == "auto" { None } else { Some(parse_num(k, v)?) };
                }
                "rngSeed" => a.rng_seed = parse_num(k, v)?,
                _ => return Err(Error::UnknownKey { key: k.to_owned(), known: known_keys() }),
            }
        }
        if let Some(total) = total {
            if latent_set && entrance + latent != total {
                return Err(Error::InvalidParameter(format!(
                    "numSybils={total} disagrees with numAggSybil={entrance} + numLatSybil={latent}"
                )));
            }
            latent = total.checked_sub(entrance).ok_or_else(|| {
                Error::InvalidParameter(format!("numSybils={total} is smaller than numAggSybil={entrance}"))
            })?;
        }
        self.attack.num_entrance = entrance;
        self.attack.num_sybils = entrance + latent;
        self.attack.validate()?;
        if self.iterations == Some(0) {
            return Err(Error::ZeroIterations);
        }
        Ok(())
    }

    /// Every key with its resolved value, one per line. Parses back to an
    /// identical config.
    pub fn to_config_string(&self) -> String {
        let a = &self.attack;
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k}={v}");
        };
        put("penalty_factor", a.alpha.value().to_string());
        put("nonSybilRej", a.rej_honest.to_string());
        put("sybilRej", a.rej_entrance.to_string());
        put("latentRej", a.rej_latent.to_string());
        put("aggProbes", a.entrance_requests.to_string());
        put("latentProbes", a.latent_requests.to_string());
        put("numAggSybil", a.num_entrance.to_string());
        put("numLatSybil", a.num_latent().to_string());
        put("arrivalLinks", a.sybil_arrival_links.to_string());
        put("numDeactivation", self.num_seeds.to_string());
        put("entranceSelection", a.entrance_selection.as_str().to_owned());
        put("iterations", self.iterations.map_or("auto".to_owned(), |h| h.to_string()));
        put("rngSeed", a.rng_seed.to_string());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::EntranceSelection;
    use proptest::prelude::*;

    #[test]
    fn defaults_match_key_table() {
        let text: String = KEYS.iter().filter(|k| k.0 != "numSybils").map(|k| format!("{}={}\n", k.0, k.2)).collect();
        assert_eq!(SimConfig::parse(&text).unwrap(), SimConfig::default());
    }

    #[test]
    fn appendix_listing_parses() {
        let cfg = SimConfig::parse(
            "penalty_factor=1 nonSybilRej=0.01 sybilRej=0.60 aggProbes=8 numAggSybil=2500 numLatSybil=2500",
        )
        .unwrap();
        assert_eq!(cfg.attack.alpha.value(), 1.0);
        assert_eq!(cfg.attack.rej_entrance, 0.6);
        assert_eq!(cfg.attack.entrance_requests, 8);
        assert_eq!(cfg.attack.num_entrance, 2500);
        assert_eq!(cfg.attack.num_sybils, 5000);

        let multi = SimConfig::parse("# ca-astroph\npenalty_factor=0.2\nnumDeactivation=100\n\n").unwrap();
        assert_eq!(multi.attack.alpha.value(), 0.2);
        assert_eq!(multi.num_seeds, 100);
    }

    #[test]
    fn unknown_key_lists_known_keys() {
        match SimConfig::parse("count=1") {
            Err(Error::UnknownKey { key, known }) => {
                assert_eq!(key, "count");
                assert!(known.contains("penalty_factor") && known.contains("rngSeed"));
            }
            other => panic!("{other:?}"),
        }
        assert!(SimConfig::parse("sybilRej").is_err());
        assert!(SimConfig::parse("sybilRej=1.5").is_err());
        assert!(SimConfig::parse("penalty_factor=-1").is_err());
        assert!(SimConfig::parse("iterations=0").is_err());
    }

    #[test]
    fn sybil_count_resolution() {
        let c = SimConfig::parse("numSybils=1000").unwrap();
        assert_eq!((c.attack.num_entrance, c.attack.num_sybils), (200, 1000));
        assert!(SimConfig::parse("numSybils=1000 numAggSybil=10 numLatSybil=10").is_err());
        assert!(SimConfig::parse("numSybils=100 numAggSybil=200").is_err());

        // overrides keep the latent count unless told otherwise
        let mut c = SimConfig::parse("numAggSybil=2500 numLatSybil=2500").unwrap();
        c.apply(&[("numAggSybil".into(), "200".into())]).unwrap();
        assert_eq!((c.attack.num_entrance, c.attack.num_latent()), (200, 2500));
    }

    proptest! {
        #[test]
        fn resolved_dump_reparses(
            alpha in 0.0f64..5.0, rej in 0.0f64..1.0, hrej in 0.0f64..0.99,
            agg in 0usize..60, ent in 0usize..3000, lat in 0usize..3000,
            seeds in 1usize..500, iters in prop::option::of(1usize..40), seed in any::<u64>(),
            first in any::<bool>(),
        ) {
            let mut c = SimConfig::default();
            c.attack.alpha = OffsetFactor::new(alpha).unwrap();
            c.attack.rej_entrance = rej;
            c.attack.rej_honest = hrej;
            c.attack.entrance_requests = agg;
            c.attack.num_entrance = ent;
            c.attack.num_sybils = ent + lat;
            c.attack.entrance_selection = if first { EntranceSelection::FirstArrivals } else { EntranceSelection::Random };
            c.num_seeds = seeds;
            c.iterations = iters;
            c.attack.rng_seed = seed;
            let back = SimConfig::parse(&c.to_config_string()).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
