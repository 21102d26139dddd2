//! JSON instance files.
//!
//! Distances and weights are exact: either JSON integers or strings of the
//! form `"p/q"`. Floating-point literals are rejected with the path of the
//! offending field.

use std::collections::HashMap;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::ktaxi::{KtaxiError, TaxiConfig, TreeMetric};
use crate::metric::{validate_metric, FiniteMetric, MetricError, MetricSpace, Rational};
use crate::transform::{TransformError, Transformation};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("{path}: {message} (line {line}, column {column})")]
    Schema { path: String, message: String, line: usize, column: usize },
    #[error("{field}: unknown point label {label:?}")]
    UnknownLabel { field: String, label: String },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("distances: {0}")]
    Metric(#[from] MetricError),
    #[error("requests[{index}]: {source}")]
    Request {
        index: usize,
        #[source]
        source: TransformError,
    },
    #[error(transparent)]
    Tree(#[from] KtaxiError),
}

/// An exact rational as it appears in JSON.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JsonRational(pub Rational);

/// Parses `"p"` or `"p/q"` with integer `p` and positive integer `q`.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: i64 = p.parse().map_err(|_| format!("{s:?} is not an exact rational \"p/q\""))?;
    let q: i64 = q.parse().map_err(|_| format!("{s:?} is not an exact rational \"p/q\""))?;
    if q <= 0 {
        return Err(format!("{s:?} has a non-positive denominator"));
    }
    Ok(Rational::new(p, q))
}

impl<'de> Deserialize<'de> for JsonRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = JsonRational;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer or a string \"p/q\"")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<JsonRational, E> {
                Ok(JsonRational(Rational::from_integer(v)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<JsonRational, E> {
                i64::try_from(v).map(|v| JsonRational(Rational::from_integer(v))).map_err(E::custom)
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<JsonRational, E> {
                Err(E::custom(format!("floating-point value {v} is not accepted; write an exact \"p/q\"")))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<JsonRational, E> {
                parse_rational(v).map(JsonRational).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

impl Serialize for JsonRational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if *self.0.denom() == 1 {
            s.serialize_i64(*self.0.numer())
        } else {
            s.serialize_str(&format!("{}/{}", self.0.numer(), self.0.denom()))
        }
    }
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawRequest {
    domain: Vec<String>,
    image: Vec<String>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    points: Vec<String>,
    distances: Vec<Vec<JsonRational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial: Option<String>,
    #[serde(default)]
    requests: Vec<RawRequest>,
}

/// A metric, a start point and a request sequence.
#[derive(Clone, Debug)]
pub struct Instance {
    pub metric: FiniteMetric,
    pub initial: usize,
    pub requests: Vec<Transformation>,
}

fn parse_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T, InstanceError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let message = inner.to_string();
        // Drop serde_json's own position suffix; it is reported separately.
        let message = match message.rfind(" at line ") {
            Some(i) => message[..i].to_string(),
            None => message,
        };
        InstanceError::Schema {
            path: if path == "." { "(root)".into() } else { path },
            message,
            line: inner.line(),
            column: inner.column(),
        }
    })?;
    de.end().map_err(|e| InstanceError::Schema {
        path: "(root)".into(),
        message: "trailing characters".into(),
        line: e.line(),
        column: e.column(),
    })?;
    Ok(value)
}

fn lookup(index: &HashMap<&str, usize>, field: String, label: &str) -> Result<usize, InstanceError> {
    index.get(label).copied().ok_or(InstanceError::UnknownLabel { field, label: label.to_string() })
}

/// Parses and validates an instance. A missing `initial` means the first point.
pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let raw: RawInstance = parse_json(text)?;
    let rows: Vec<Vec<Rational>> = raw.distances.iter().map(|r| r.iter().map(|x| x.0).collect()).collect();
    let metric = validate_metric(Some(raw.points.clone()), &rows)?;
    let index: HashMap<&str, usize> = raw.points.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let initial = match &raw.initial {
        Some(l) => lookup(&index, "initial".into(), l)?,
        None => 0,
    };
    let mut requests = Vec::with_capacity(raw.requests.len());
    for (i, r) in raw.requests.iter().enumerate() {
        let domain = r
            .domain
            .iter()
            .enumerate()
            .map(|(j, l)| lookup(&index, format!("requests[{i}].domain[{j}]"), l))
            .collect::<Result<Vec<_>, _>>()?;
        let image = r
            .image
            .iter()
            .enumerate()
            .map(|(j, l)| lookup(&index, format!("requests[{i}].image[{j}]"), l))
            .collect::<Result<Vec<_>, _>>()?;
        requests.push(
            Transformation::classify(&metric, domain, image)
                .map_err(|source| InstanceError::Request { index: i, source })?,
        );
    }
    Ok(Instance { metric, initial, requests })
}

/// Serializes a metric (and optionally a start point and requests) in the
/// instance format.
pub fn instance_to_json<M: MetricSpace + ?Sized>(
    m: &M,
    labels: &[String],
    initial: Option<usize>,
    requests: &[Transformation],
) -> String {
    let n = m.len();
    let raw = RawInstance {
        points: labels.to_vec(),
        distances: (0..n).map(|i| (0..n).map(|j| JsonRational(m.rational_dist(i, j))).collect()).collect(),
        initial: initial.map(|i| labels[i].clone()),
        requests: requests
            .iter()
            .map(|t| RawRequest {
                domain: t.domain().iter().map(|&p| labels[p].clone()).collect(),
                image: t.image().iter().map(|&p| labels[p].clone()).collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("instance serializes")
}

impl Instance {
    pub fn to_json(&self) -> String {
        instance_to_json(&self.metric, self.metric.labels(), Some(self.initial), &self.requests)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRide {
    s: String,
    d: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKtaxi {
    vertices: Vec<String>,
    parent: Vec<Option<String>>,
    weights: Vec<JsonRational>,
    k: usize,
    start: Vec<String>,
    requests: Vec<RawRide>,
}

/// A weighted tree, `k` taxis on its leaves and a list of rides `(s, d)`.
#[derive(Clone, Debug)]
pub struct KtaxiInstance {
    pub tree: TreeMetric,
    pub k: usize,
    pub start: TaxiConfig,
    pub requests: Vec<(usize, usize)>,
}

/// Parses `{"vertices", "parent", "weights", "k", "start", "requests"}` where
/// vertices are referenced by label and `requests` is a list of
/// `{"s": leaf, "d": leaf}`.
pub fn parse_ktaxi_instance(text: &str) -> Result<KtaxiInstance, InstanceError> {
    let raw: RawKtaxi = parse_json(text)?;
    let index: HashMap<&str, usize> = raw.vertices.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    if index.len() != raw.vertices.len() {
        return Err(InstanceError::Invalid { field: "vertices".into(), message: "duplicate label".into() });
    }
    let parent = raw
        .parent
        .iter()
        .enumerate()
        .map(|(i, p)| p.as_deref().map(|l| lookup(&index, format!("parent[{i}]"), l)).transpose())
        .collect::<Result<Vec<_>, _>>()?;
    let weights = raw.weights.iter().map(|w| w.0).collect();
    let tree = TreeMetric::new(parent, weights, Some(raw.vertices.clone()))?;
    let start_leaves = raw
        .start
        .iter()
        .enumerate()
        .map(|(i, l)| lookup(&index, format!("start[{i}]"), l))
        .collect::<Result<Vec<_>, _>>()?;
    if start_leaves.len() != raw.k {
        return Err(InstanceError::Invalid {
            field: "start".into(),
            message: format!("{} taxis listed for k = {}", start_leaves.len(), raw.k),
        });
    }
    let start = TaxiConfig::from_leaves(&tree, &start_leaves)?;
    let requests = raw
        .requests
        .iter()
        .enumerate()
        .map(|(i, r)| {
            Ok((lookup(&index, format!("requests[{i}].s"), &r.s)?, lookup(&index, format!("requests[{i}].d"), &r.d)?))
        })
        .collect::<Result<Vec<_>, InstanceError>>()?;
    Ok(KtaxiInstance { tree, k: raw.k, start, requests })
}
