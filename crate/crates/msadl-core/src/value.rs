//! Concrete value trees: the data that inhabits tree types.
//!
//! The JSON encoding is `{"$": <scalar>, "children": {name: [subtrees]}}`.
//! Scalar kinds are inferred from the JSON type, except `char`, which is
//! encoded as `{"char": "c"}`, and `void`, which is `null`.

use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value as Json};
use std::collections::BTreeMap;
use std::fmt;

use crate::model::NativeType;

/// Scalar at the root of a value tree. `Unit` is the sole inhabitant of `void`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Scalar {
    Bool(bool),
    Int(i64),
    Double(f64),
    Str(String),
    Char(char),
    #[default]
    Unit,
}

impl Scalar {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Scalar::Bool(_) => "bool",
            Scalar::Int(_) => "int",
            Scalar::Double(_) => "double",
            Scalar::Str(_) => "string",
            Scalar::Char(_) => "char",
            Scalar::Unit => "void",
        }
    }

    /// No coercion: each scalar kind matches exactly one native type.
    pub fn matches_native(&self, native: NativeType) -> bool {
        matches!(
            (self, native),
            (Scalar::Bool(_), NativeType::Bool)
                | (Scalar::Int(_), NativeType::Int)
                | (Scalar::Double(_), NativeType::Double)
                | (Scalar::Str(_), NativeType::String)
                | (Scalar::Char(_), NativeType::Char)
                | (Scalar::Unit, NativeType::Void)
        )
    }

    /// Tagged canonical text, used by the entity digests. The tag keeps
    /// scalars of different kinds from colliding ("1" as int vs string).
    pub fn canonical_tagged(&self) -> String {
        match self {
            Scalar::Bool(b) => format!("b:{b}"),
            Scalar::Int(i) => format!("i:{i}"),
            Scalar::Double(d) => format!("d:{d}"),
            Scalar::Str(s) => format!("s:{s}"),
            Scalar::Char(c) => format!("c:{c}"),
            Scalar::Unit => "u:".to_string(),
        }
    }

    fn to_json(&self) -> Json {
        match self {
            Scalar::Bool(b) => Json::Bool(*b),
            Scalar::Int(i) => Json::from(*i),
            Scalar::Double(d) => Json::from(*d),
            Scalar::Str(s) => Json::String(s.clone()),
            Scalar::Char(c) => {
                let mut m = Map::new();
                m.insert("char".to_string(), Json::String(c.to_string()));
                Json::Object(m)
            }
            Scalar::Unit => Json::Null,
        }
    }

    fn from_json(v: &Json) -> Result<Scalar, String> {
        match v {
            Json::Null => Ok(Scalar::Unit),
            Json::Bool(b) => Ok(Scalar::Bool(*b)),
            Json::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(Scalar::Int(i))
                } else if let Some(d) = n.as_f64() {
                    Ok(Scalar::Double(d))
                } else {
                    Err(format!("integer out of range: {n}"))
                }
            }
            Json::String(s) => Ok(Scalar::Str(s.clone())),
            Json::Object(m) => {
                if m.len() == 1 {
                    if let Some(Json::String(s)) = m.get("char") {
                        let mut chars = s.chars();
                        if let (Some(c), None) = (chars.next(), chars.next()) {
                            return Ok(Scalar::Char(c));
                        }
                        return Err(format!("char encoding must hold exactly one character: {s:?}"));
                    }
                }
                Err("scalar object form must be {\"char\": \"c\"}".to_string())
            }
            Json::Array(_) => Err("arrays are not scalars".to_string()),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Bool(b) => write!(f, "{b}"),
            Scalar::Int(i) => write!(f, "{i}"),
            Scalar::Double(d) => write!(f, "{d}"),
            Scalar::Str(s) => write!(f, "{s:?}"),
            Scalar::Char(c) => write!(f, "'{c}'"),
            Scalar::Unit => write!(f, "void"),
        }
    }
}

/// Tree-shaped value: a root scalar plus named, ordered lists of subtrees.
/// Children are keyed by node name; the map is sorted so every derived
/// encoding is canonical.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValueTree {
    pub root: Scalar,
    pub children: BTreeMap<String, Vec<ValueTree>>,
}


impl ValueTree {
    pub fn leaf(root: Scalar) -> Self {
        ValueTree { root, children: BTreeMap::new() }
    }

    pub fn unit() -> Self {
        Self::leaf(Scalar::Unit)
    }

    pub fn with_child(mut self, name: &str, child: ValueTree) -> Self {
        self.children.entry(name.to_string()).or_default().push(child);
        self
    }

    /// First occurrence of a named child, used by field projection.
    pub fn child(&self, name: &str) -> Option<&ValueTree> {
        self.children.get(name).and_then(|v| v.first())
    }

    pub fn to_json(&self) -> Json {
        let mut m = Map::new();
        m.insert("$".to_string(), self.root.to_json());
        if !self.children.is_empty() {
            let mut kids = Map::new();
            for (name, list) in &self.children {
                kids.insert(name.clone(), Json::Array(list.iter().map(ValueTree::to_json).collect()));
            }
            m.insert("children".to_string(), Json::Object(kids));
        }
        Json::Object(m)
    }

    pub fn from_json(v: &Json) -> Result<ValueTree, String> {
        let obj = v.as_object().ok_or_else(|| "a value tree must be a JSON object".to_string())?;
        for key in obj.keys() {
            if key != "$" && key != "children" {
                return Err(format!("unknown key {key:?} in value tree (expected \"$\" or \"children\")"));
            }
        }
        let root = match obj.get("$") {
            Some(s) => Scalar::from_json(s)?,
            None => Scalar::Unit,
        };
        let mut children = BTreeMap::new();
        if let Some(kids) = obj.get("children") {
            let kids = kids.as_object().ok_or_else(|| "\"children\" must be an object".to_string())?;
            for (name, list) in kids {
                let list = list
                    .as_array()
                    .ok_or_else(|| format!("children of {name:?} must be an array"))?;
                let mut parsed = Vec::with_capacity(list.len());
                for item in list {
                    parsed.push(ValueTree::from_json(item).map_err(|e| format!("{name}: {e}"))?);
                }
                children.insert(name.clone(), parsed);
            }
        }
        Ok(ValueTree { root, children })
    }

    /// Canonical one-line JSON text. Children are emitted in sorted key
    /// order, so equal trees always canonicalise to equal strings.
    pub fn canonical_string(&self) -> String {
        self.to_json().to_string()
    }
}

impl Serialize for ValueTree {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ValueTree {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let v = Json::deserialize(deserializer)?;
        ValueTree::from_json(&v).map_err(D::Error::custom)
    }
}
