use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ClassifierKind;
use crate::error::{Error, Result};

/// A hyperparameter value. `Unlimited` is written `"none"` (e.g. `max_depth`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamValue {
    Num(f64),
    Unlimited,
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Num(v)
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Num(v) => write!(f, "{v}"),
            ParamValue::Unlimited => f.write_str("none"),
        }
    }
}

impl Serialize for ParamValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ParamValue::Num(v) => s.serialize_f64(*v),
            ParamValue::Unlimited => s.serialize_str("none"),
        }
    }
}

impl<'de> Deserialize<'de> for ParamValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ParamValue;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number, \"none\" or null")
            }
            fn visit_f64<E>(self, v: f64) -> std::result::Result<ParamValue, E> {
                Ok(ParamValue::Num(v))
            }
            fn visit_i64<E>(self, v: i64) -> std::result::Result<ParamValue, E> {
                Ok(ParamValue::Num(v as f64))
            }
            fn visit_u64<E>(self, v: u64) -> std::result::Result<ParamValue, E> {
                Ok(ParamValue::Num(v as f64))
            }
            fn visit_unit<E>(self) -> std::result::Result<ParamValue, E> {
                Ok(ParamValue::Unlimited)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ParamValue, E> {
                if v.eq_ignore_ascii_case("none") {
                    Ok(ParamValue::Unlimited)
                } else {
                    v.parse::<f64>().map(ParamValue::Num).map_err(E::custom)
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Declared hyperparameter of a learner.
#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: ParamValue,
    pub min: f64,
    pub max: f64,
    /// Inclusive lower bound when true, exclusive otherwise.
    pub min_inclusive: bool,
    pub integer: bool,
    pub allow_unlimited: bool,
}

const fn num(
    name: &'static str,
    default: f64,
    min: f64,
    max: f64,
    min_inclusive: bool,
) -> ParamSpec {
    ParamSpec {
        name,
        default: ParamValue::Num(default),
        min,
        max,
        min_inclusive,
        integer: false,
        allow_unlimited: false,
    }
}

const fn int(name: &'static str, default: f64, min: f64, max: f64) -> ParamSpec {
    ParamSpec {
        name,
        default: ParamValue::Num(default),
        min,
        max,
        min_inclusive: true,
        integer: true,
        allow_unlimited: false,
    }
}

const fn depth(name: &'static str, default: ParamValue) -> ParamSpec {
    ParamSpec {
        name,
        default,
        min: 1.0,
        max: 64.0,
        min_inclusive: true,
        integer: true,
        allow_unlimited: true,
    }
}

const MAX_COUNT: f64 = 1e7;

const KNN: &[ParamSpec] = &[int("k", 5.0, 1.0, MAX_COUNT)];
const NB: &[ParamSpec] = &[num("var_smoothing", 1e-9, 0.0, 1.0, false)];
const LR: &[ParamSpec] = &[
    num("l2", 0.0, 0.0, 1e6, true),
    num("learning_rate", 0.1, 0.0, 1e3, false),
    int("max_iters", 300.0, 1.0, MAX_COUNT),
    num("tol", 1e-6, 0.0, 1.0, true),
];
const DTREE: &[ParamSpec] = &[
    depth("max_depth", ParamValue::Unlimited),
    int("min_leaf", 1.0, 1.0, MAX_COUNT),
];
const RF: &[ParamSpec] = &[
    int("n_trees", 100.0, 1.0, 1e5),
    depth("max_depth", ParamValue::Unlimited),
    num("feature_fraction", 0.3, 0.0, 1.0, false),
    int("min_leaf", 1.0, 1.0, MAX_COUNT),
    int("bootstrap", 1.0, 0.0, 1.0),
];
const GB: &[ParamSpec] = &[
    int("n_rounds", 100.0, 0.0, 1e5),
    num("learning_rate", 0.1, 0.0, 1.0, false),
    depth("max_depth", ParamValue::Num(3.0)),
    int("min_leaf", 1.0, 1.0, MAX_COUNT),
];
const FNN: &[ParamSpec] = &[
    int("hidden_units", 32.0, 1.0, 4096.0),
    num("learning_rate", 0.001, 0.0, 10.0, false),
    int("epochs", 30.0, 1.0, 1e5),
    int("batch_size", 32.0, 1.0, MAX_COUNT),
];
const RNN: &[ParamSpec] = &[
    int("hidden_units", 16.0, 1.0, 1024.0),
    num("learning_rate", 0.001, 0.0, 10.0, false),
    int("epochs", 30.0, 1.0, 1e5),
    int("batch_size", 32.0, 1.0, MAX_COUNT),
];

pub fn param_specs(kind: ClassifierKind) -> &'static [ParamSpec] {
    match kind {
        ClassifierKind::Knn => KNN,
        ClassifierKind::Nb => NB,
        ClassifierKind::Lr => LR,
        ClassifierKind::Rf => RF,
        ClassifierKind::Dtree => DTREE,
        ClassifierKind::Gb => GB,
        ClassifierKind::Fnn => FNN,
        ClassifierKind::Rnn => RNN,
    }
}

impl ParamSpec {
    pub fn check(&self, value: ParamValue) -> Result<()> {
        let bad = |why: &str| {
            Err(Error::Config(format!(
                "hyperparameter {} = {value}: {why}",
                self.name
            )))
        };
        match value {
            ParamValue::Unlimited if self.allow_unlimited => Ok(()),
            ParamValue::Unlimited => bad("\"none\" not allowed"),
            ParamValue::Num(v) => {
                if !v.is_finite() {
                    return bad("not finite");
                }
                let above = if self.min_inclusive {
                    v >= self.min
                } else {
                    v > self.min
                };
                if !above || v > self.max {
                    return bad("out of range");
                }
                if self.integer && v.fract() != 0.0 {
                    return bad("must be an integer");
                }
                Ok(())
            }
        }
    }
}

/// Named hyperparameters; iteration is by name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HyperParams(BTreeMap<String, ParamValue>);

impl HyperParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: impl Into<ParamValue>) -> Self {
        self.0.insert(name.to_string(), value.into());
        self
    }

    pub fn set(&mut self, name: &str, value: impl Into<ParamValue>) {
        self.0.insert(name.to_string(), value.into());
    }

    pub fn get(&self, name: &str) -> Option<ParamValue> {
        self.0.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, ParamValue)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Rejects names the learner does not know.
    pub fn validate_names(
        kind: ClassifierKind,
        names: impl IntoIterator<Item = impl AsRef<str>>,
    ) -> Result<()> {
        let specs = param_specs(kind);
        for n in names {
            let n = n.as_ref();
            if !specs.iter().any(|s| s.name == n) {
                return Err(Error::Config(format!(
                    "unknown hyperparameter '{n}' for {kind}"
                )));
            }
        }
        Ok(())
    }

    /// Validates against `kind` and fills in defaults.
    pub fn resolve(&self, kind: ClassifierKind) -> Result<HyperParams> {
        Self::validate_names(kind, self.0.keys())?;
        let mut out = BTreeMap::new();
        for spec in param_specs(kind) {
            let v = self.get(spec.name).unwrap_or(spec.default);
            spec.check(v)?;
            out.insert(spec.name.to_string(), v);
        }
        Ok(HyperParams(out))
    }

    pub(crate) fn num(&self, name: &str) -> f64 {
        match self.0[name] {
            ParamValue::Num(v) => v,
            ParamValue::Unlimited => f64::INFINITY,
        }
    }

    pub(crate) fn int(&self, name: &str) -> usize {
        self.num(name) as usize
    }

    pub(crate) fn depth(&self, name: &str) -> Option<usize> {
        match self.0[name] {
            ParamValue::Num(v) => Some(v as usize),
            ParamValue::Unlimited => None,
        }
    }
}

impl fmt::Display for HyperParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&parts.join(";"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let hp = HyperParams::new()
            .with("k", 3.0)
            .resolve(ClassifierKind::Knn)
            .unwrap();
        assert_eq!(hp.int("k"), 3);
        let hp = HyperParams::new().resolve(ClassifierKind::Dtree).unwrap();
        assert_eq!(hp.depth("max_depth"), None);
    }

    #[test]
    fn unknown_and_out_of_range_rejected() {
        assert!(HyperParams::new()
            .with("gamma", 1.0)
            .resolve(ClassifierKind::Knn)
            .is_err());
        assert!(HyperParams::new()
            .with("k", 0.0)
            .resolve(ClassifierKind::Knn)
            .is_err());
        assert!(HyperParams::new()
            .with("k", 2.5)
            .resolve(ClassifierKind::Knn)
            .is_err());
        assert!(HyperParams::new()
            .with("k", ParamValue::Unlimited)
            .resolve(ClassifierKind::Knn)
            .is_err());
    }

    #[test]
    fn json_uses_none_for_unlimited() {
        let hp = HyperParams::new()
            .with("max_depth", ParamValue::Unlimited)
            .with("min_leaf", 5.0);
        let s = serde_json::to_string(&hp).unwrap();
        assert_eq!(s, r#"{"max_depth":"none","min_leaf":5.0}"#);
        let back: HyperParams = serde_json::from_str(r#"{"max_depth":null,"min_leaf":5}"#).unwrap();
        assert_eq!(back, hp);
        assert_eq!(hp.to_string(), "max_depth=none;min_leaf=5");
    }
}
