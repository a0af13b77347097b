//! Function registry shared by the program validator, the interpreter and the
//! predicate engines: signatures, defaults, argument binding and range checks.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::category::CategoryQuery;
use crate::scenario::ScenarioSet;

/// A runtime value inside a scenario program.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Scenario(Arc<ScenarioSet>),
    List(Vec<Value>),
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
    None,
    LogDir,
    OutputDir,
    /// A value whose type is known but whose contents are not (static checking).
    Opaque(ValueType),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueType {
    Scenario,
    List,
    Str,
    Number,
    Bool,
    None,
    LogDir,
    OutputDir,
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueType::Scenario => "scenario",
            ValueType::List => "list",
            ValueType::Str => "string",
            ValueType::Number => "number",
            ValueType::Bool => "bool",
            ValueType::None => "None",
            ValueType::LogDir => "log_dir",
            ValueType::OutputDir => "output_dir",
        })
    }
}

impl Value {
    pub fn value_type(&self) -> ValueType {
        match self {
            Value::Scenario(_) => ValueType::Scenario,
            Value::List(_) => ValueType::List,
            Value::Str(_) => ValueType::Str,
            Value::Int(_) | Value::Float(_) => ValueType::Number,
            Value::Bool(_) => ValueType::Bool,
            Value::None => ValueType::None,
            Value::LogDir => ValueType::LogDir,
            Value::OutputDir => ValueType::OutputDir,
            Value::Opaque(t) => *t,
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Float(f) => Some(*f),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Default {
    Float(f64),
    Int(i64),
    Bool(bool),
    Str(&'static str),
    None,
}

impl Default {
    fn value(self) -> Value {
        match self {
            Default::Float(f) => Value::Float(f),
            Default::Int(i) => Value::Int(i),
            Default::Bool(b) => Value::Bool(b),
            Default::Str(s) => Value::Str(s.to_owned()),
            Default::None => Value::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamKind {
    Scenario,
    ScenarioList,
    LogDir,
    OutputDir,
    Text,
    Float,
    /// Integer count; `inf` allowed.
    Count,
    Bool,
    Enum(&'static [&'static str]),
    /// Like `Enum`, but `None` is also accepted.
    OptionalEnum(&'static [&'static str]),
    Category,
    /// Any string; unsupported colors select every candidate.
    Color,
}

#[derive(Debug, Clone, Copy)]
pub struct Param {
    pub name: &'static str,
    pub kind: ParamKind,
    pub default: Option<Default>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionKind {
    /// Filters candidates by their own properties.
    Unary,
    /// Relates candidates to a second scenario set.
    Relational,
    /// Builds a scenario set from the log alone.
    Source,
    Combinator,
    /// `scenario_not` / `reverse_relationship`; applied as `wrapper(func)(args)`.
    Wrapper,
    Output,
}

#[derive(Debug, Clone, Copy)]
pub struct FunctionSpec {
    pub name: &'static str,
    pub kind: FunctionKind,
    pub params: &'static [Param],
    pub summary: &'static str,
}

const fn req(name: &'static str, kind: ParamKind) -> Param {
    Param { name, kind, default: None }
}

const fn opt(name: &'static str, kind: ParamKind, default: Default) -> Param {
    Param { name, kind, default: Some(default) }
}

const INF: f64 = f64::INFINITY;
pub const LEFT_RIGHT: &[&str] = &["left", "right"];
pub const RELATIVE_DIRECTIONS: &[&str] = &["forward", "backward", "left", "right"];
pub const HEADING_RELATIONS: &[&str] = &["same", "opposite", "perpendicular"];
pub const CROSSING_SENSES: &[&str] = &["clockwise", "counterclockwise", "either"];
pub const ROAD_SIDES: &[&str] = &["same", "opposite"];
pub const LANE_TYPES: &[&str] = &["BUS", "VEHICLE", "BIKE"];

use FunctionKind::*;
use ParamKind::*;

const TC: Param = req("track_candidates", Scenario);
const RC: Param = req("related_candidates", Scenario);
const LOG: Param = req("log_dir", LogDir);

pub static FUNCTIONS: &[FunctionSpec] = &[
    FunctionSpec {
        name: "get_objects_of_category",
        kind: Source,
        params: &[LOG, req("category", Category)],
        summary: "All objects of a category (accepts the super-categories ANY and VEHICLE) at every timestamp they are observed.",
    },
    FunctionSpec {
        name: "is_category",
        kind: Unary,
        params: &[TC, LOG, req("category", Category)],
        summary: "The candidates that belong to a category (accepts ANY and VEHICLE).",
    },
    FunctionSpec {
        name: "has_velocity",
        kind: Unary,
        params: &[TC, LOG, opt("min_velocity", Float, Default::Float(0.5)), opt("max_velocity", Float, Default::Float(INF))],
        summary: "Timestamps where speed in m/s lies between min_velocity and max_velocity. Stationary objects can show up to 0.5 m/s of jitter.",
    },
    FunctionSpec {
        name: "stationary",
        kind: Unary,
        params: &[TC, LOG],
        summary: "Objects that move less than 2 m over their whole observation (parked objects). Use has_velocity for temporary stops.",
    },
    FunctionSpec {
        name: "accelerating",
        kind: Unary,
        params: &[TC, LOG, opt("min_accel", Float, Default::Float(0.65)), opt("max_accel", Float, Default::Float(INF))],
        summary: "Timestamps where forward acceleration (m/s^2) lies between the bounds. Below -1 indicates braking; above 1 indicates accelerating.",
    },
    FunctionSpec {
        name: "has_lateral_acceleration",
        kind: Unary,
        params: &[TC, LOG, opt("min_accel", Float, Default::Float(-INF)), opt("max_accel", Float, Default::Float(INF))],
        summary: "Timestamps where lateral acceleration (m/s^2, positive to the left) lies between the bounds.",
    },
    FunctionSpec {
        name: "turning",
        kind: Unary,
        params: &[TC, LOG, opt("direction", OptionalEnum(LEFT_RIGHT), Default::None)],
        summary: "Timestamps where the object is turning left, right, or either (None).",
    },
    FunctionSpec {
        name: "changing_lanes",
        kind: Unary,
        params: &[TC, LOG, opt("direction", OptionalEnum(LEFT_RIGHT), Default::None)],
        summary: "Timestamps around a lane change to the left, right, or either (None).",
    },
    FunctionSpec {
        name: "facing_toward",
        kind: Relational,
        params: &[TC, RC, LOG, opt("within_angle", Float, Default::Float(22.5)), opt("max_distance", Float, Default::Float(50.0))],
        summary: "Candidates whose forward axis points within within_angle degrees of a related object no farther than max_distance.",
    },
    FunctionSpec {
        name: "heading_toward",
        kind: Relational,
        params: &[
            TC,
            RC,
            LOG,
            opt("angle_threshold", Float, Default::Float(22.5)),
            opt("minimum_speed", Float, Default::Float(0.5)),
            opt("max_distance", Float, Default::Float(INF)),
        ],
        summary: "Candidates whose velocity points within angle_threshold degrees of a related object, closing at least minimum_speed m/s.",
    },
    FunctionSpec {
        name: "heading_in_relative_direction_to",
        kind: Relational,
        params: &[TC, RC, LOG, req("direction", Enum(HEADING_RELATIONS))],
        summary: "Candidates moving in the same (0-45 deg), perpendicular (45-135 deg) or opposite (135-180 deg) direction as a related object.",
    },
    FunctionSpec {
        name: "has_objects_in_relative_direction",
        kind: Relational,
        params: &[
            TC,
            RC,
            LOG,
            req("direction", Enum(RELATIVE_DIRECTIONS)),
            opt("min_number", Count, Default::Int(1)),
            opt("max_number", Count, Default::Float(INF)),
            opt("within_distance", Float, Default::Float(50.0)),
            opt("lateral_thresh", Float, Default::Float(INF)),
        ],
        summary: "Candidates with at least min_number related objects in a direction from their own point of view; relates the max_number closest.",
    },
    FunctionSpec {
        name: "get_objects_in_relative_direction",
        kind: Relational,
        params: &[
            TC,
            RC,
            LOG,
            req("direction", Enum(RELATIVE_DIRECTIONS)),
            opt("min_number", Count, Default::Int(0)),
            opt("max_number", Count, Default::Float(INF)),
            opt("within_distance", Float, Default::Float(50.0)),
            opt("lateral_thresh", Float, Default::Float(INF)),
        ],
        summary: "The related objects found in a direction from the candidates (keys are the related objects).",
    },
    FunctionSpec {
        name: "being_crossed_by",
        kind: Relational,
        params: &[
            TC,
            RC,
            LOG,
            opt("direction", Enum(RELATIVE_DIRECTIONS), Default::Str("forward")),
            opt("in_direction", Enum(CROSSING_SENSES), Default::Str("either")),
            opt("forward_thresh", Float, Default::Float(10.0)),
            opt("lateral_thresh", Float, Default::Float(5.0)),
        ],
        summary: "Candidates whose half-midplane (extending forward_thresh from the box edge in direction) is crossed by a related object.",
    },
    FunctionSpec {
        name: "near_objects",
        kind: Relational,
        params: &[
            req("track_uuid", Scenario),
            req("candidate_uuids", Scenario),
            LOG,
            opt("distance_thresh", Float, Default::Float(10.0)),
            opt("min_objects", Count, Default::Int(1)),
            opt("include_self", Bool, Default::Bool(false)),
        ],
        summary: "Timestamps where at least min_objects related objects are within distance_thresh meters.",
    },
    FunctionSpec {
        name: "following",
        kind: Relational,
        params: &[req("track_uuid", Scenario), req("candidate_uuids", Scenario), LOG],
        summary: "Timestamps where the candidate follows a lead object: same lane, same direction, both moving, lead ahead.",
    },
    FunctionSpec {
        name: "at_pedestrian_crossing",
        kind: Unary,
        params: &[TC, LOG, opt("within_distance", Float, Default::Float(1.0))],
        summary: "Timestamps within within_distance meters of a pedestrian crossing (0 means inside it).",
    },
    FunctionSpec {
        name: "on_lane_type",
        kind: Unary,
        params: &[req("track_uuid", Scenario), LOG, req("lane_type", Enum(LANE_TYPES))],
        summary: "Timestamps on a lane of the given type ('BUS', 'VEHICLE' or 'BIKE').",
    },
    FunctionSpec {
        name: "near_intersection",
        kind: Unary,
        params: &[req("track_uuid", Scenario), LOG, opt("threshold", Float, Default::Float(5.0))],
        summary: "Timestamps within threshold meters of an intersection.",
    },
    FunctionSpec {
        name: "on_intersection",
        kind: Unary,
        params: &[TC, LOG],
        summary: "Timestamps on top of an intersection.",
    },
    FunctionSpec {
        name: "at_stop_sign",
        kind: Unary,
        params: &[TC, LOG, opt("forward_thresh", Float, Default::Float(10.0))],
        summary: "Timestamps in a stop-sign-controlled lane, within 15 m of the sign and forward_thresh meters in front of it.",
    },
    FunctionSpec {
        name: "in_drivable_area",
        kind: Unary,
        params: &[TC, LOG],
        summary: "Timestamps inside the drivable area.",
    },
    FunctionSpec {
        name: "on_road",
        kind: Unary,
        params: &[TC, LOG],
        summary: "Timestamps on a road or bike lane (excludes parking lots and other drivable areas).",
    },
    FunctionSpec {
        name: "in_same_lane",
        kind: Relational,
        params: &[TC, RC, LOG],
        summary: "Timestamps where the candidate shares a lane with a related object.",
    },
    FunctionSpec {
        name: "on_relative_side_of_road",
        kind: Relational,
        params: &[TC, RC, LOG, req("side", Enum(ROAD_SIDES))],
        summary: "Timestamps where the candidate is on the same or opposite side of the road as a related object (travel directions agree or disagree; crossing roads are neither).",
    },
    FunctionSpec {
        name: "is_color",
        kind: Unary,
        params: &[TC, LOG, req("color", Color)],
        summary: "Objects of a color: white, silver, black, red, yellow or blue. Any other color returns every candidate.",
    },
    FunctionSpec {
        name: "scenario_and",
        kind: Combinator,
        params: &[req("scenario_dicts", ScenarioList)],
        summary: "Objects and timestamps present in every input.",
    },
    FunctionSpec {
        name: "scenario_or",
        kind: Combinator,
        params: &[req("scenario_dicts", ScenarioList)],
        summary: "Objects, timestamps and relationships present in any input.",
    },
    FunctionSpec {
        name: "reverse_relationship",
        kind: Wrapper,
        params: &[],
        summary: "Wraps a relational function so the related objects become the keys: reverse_relationship(func)(...).",
    },
    FunctionSpec {
        name: "scenario_not",
        kind: Wrapper,
        params: &[],
        summary: "Wraps a function to return the candidates it does not select, without relationships: scenario_not(func)(...).",
    },
    FunctionSpec {
        name: "output_scenario",
        kind: Output,
        params: &[
            req("scenario", Scenario),
            req("description", Text),
            LOG,
            req("output_dir", OutputDir),
            opt("visualize", Bool, Default::Bool(false)),
        ],
        summary: "Marks the final scenario for output. Must be the last statement.",
    },
];

pub fn lookup(name: &str) -> Option<&'static FunctionSpec> {
    FUNCTIONS.iter().find(|f| f.name == name)
}

pub fn function_names() -> Vec<&'static str> {
    FUNCTIONS.iter().map(|f| f.name).collect()
}

/// The atomic predicates plus the two set combinators.
pub fn predicate_names() -> Vec<&'static str> {
    FUNCTIONS
        .iter()
        .filter(|f| matches!(f.kind, Unary | Relational | Source | Combinator))
        .map(|f| f.name)
        .collect()
}

/// Arguments bound to a function's parameters, defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Args {
    values: BTreeMap<&'static str, Value>,
}

/// Why a call could not be bound.
#[derive(Debug, Clone, PartialEq)]
pub enum BindError {
    TooManyPositional { expected: usize, got: usize },
    UnknownKeyword(String),
    DuplicateArgument(&'static str),
    Missing(&'static str),
    Type { param: &'static str, expected: String, got: ValueType },
    Enum { param: &'static str, value: String, allowed: Vec<&'static str> },
}

impl fmt::Display for BindError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BindError::TooManyPositional { expected, got } => {
                write!(f, "takes at most {expected} positional arguments but {got} were given")
            }
            BindError::UnknownKeyword(k) => write!(f, "unexpected keyword argument {k:?}"),
            BindError::DuplicateArgument(p) => write!(f, "multiple values for argument {p:?}"),
            BindError::Missing(p) => write!(f, "missing required argument {p:?}"),
            BindError::Type { param, expected, got } => write!(f, "argument {param:?} expects {expected}, got {got}"),
            BindError::Enum { param, value, allowed } => {
                write!(f, "argument {param:?} must be one of {}, got {value:?}", allowed.join(", "))
            }
        }
    }
}

impl BindError {
    pub fn code(&self) -> &'static str {
        match self {
            BindError::TooManyPositional { .. } | BindError::Missing(_) | BindError::DuplicateArgument(_) => "arity",
            BindError::UnknownKeyword(_) => "unknown-keyword",
            BindError::Type { .. } => "type",
            BindError::Enum { .. } => "enum",
        }
    }
}

fn check_kind(param: &Param, v: &Value) -> Result<(), BindError> {
    let ty = v.value_type();
    let mismatch = |expected: &str| BindError::Type { param: param.name, expected: expected.to_owned(), got: ty };
    let enum_err = |s: &str, allowed: &[&'static str]| BindError::Enum {
        param: param.name,
        value: s.to_owned(),
        allowed: allowed.to_vec(),
    };
    match param.kind {
        Scenario => (ty == ValueType::Scenario).then_some(()).ok_or_else(|| mismatch("a scenario")),
        ScenarioList => match v {
            Value::List(items) if items.iter().all(|i| i.value_type() == ValueType::Scenario) => Ok(()),
            Value::Opaque(ValueType::List) => Ok(()),
            _ => Err(mismatch("a list of scenarios")),
        },
        LogDir => (ty == ValueType::LogDir).then_some(()).ok_or_else(|| mismatch("log_dir")),
        OutputDir => (ty == ValueType::OutputDir).then_some(()).ok_or_else(|| mismatch("output_dir")),
        Text | Color => (ty == ValueType::Str).then_some(()).ok_or_else(|| mismatch("a string")),
        Float => (ty == ValueType::Number).then_some(()).ok_or_else(|| mismatch("a number")),
        Count => match v {
            Value::Int(_) | Value::Opaque(ValueType::Number) => Ok(()),
            Value::Float(f) if f.is_infinite() || f.fract() == 0.0 => Ok(()),
            _ => Err(mismatch("an integer")),
        },
        Bool => (ty == ValueType::Bool).then_some(()).ok_or_else(|| mismatch("a bool")),
        Enum(allowed) => match v {
            Value::Str(s) if allowed.contains(&s.as_str()) => Ok(()),
            Value::Str(s) => Err(enum_err(s, allowed)),
            Value::Opaque(ValueType::Str) => Ok(()),
            _ => Err(mismatch("a string")),
        },
        OptionalEnum(allowed) => match v {
            Value::None => Ok(()),
            Value::Str(s) if allowed.contains(&s.as_str()) => Ok(()),
            Value::Str(s) => Err(enum_err(s, allowed)),
            Value::Opaque(ValueType::Str) => Ok(()),
            _ => Err(mismatch("a string or None")),
        },
        Category => match v {
            Value::Str(s) => s
                .parse::<CategoryQuery>()
                .map(|_| ())
                .map_err(|_| enum_err(s, &CategoryQuery::valid_names())),
            Value::Opaque(ValueType::Str) => Ok(()),
            _ => Err(mismatch("a category name")),
        },
    }
}

/// Binds positional and keyword arguments to `spec`'s parameters.
pub fn bind(spec: &FunctionSpec, positional: Vec<Value>, keyword: Vec<(String, Value)>) -> Result<Args, BindError> {
    if positional.len() > spec.params.len() {
        return Err(BindError::TooManyPositional { expected: spec.params.len(), got: positional.len() });
    }
    let mut values: BTreeMap<&'static str, Value> = BTreeMap::new();
    for (p, v) in spec.params.iter().zip(positional) {
        values.insert(p.name, v);
    }
    for (k, v) in keyword {
        let p = spec.params.iter().find(|p| p.name == k).ok_or(BindError::UnknownKeyword(k))?;
        if values.insert(p.name, v).is_some() {
            return Err(BindError::DuplicateArgument(p.name));
        }
    }
    for p in spec.params {
        match values.get(p.name) {
            Some(v) => check_kind(p, v)?,
            None => match p.default {
                Some(d) => {
                    values.insert(p.name, d.value());
                }
                None => return Err(BindError::Missing(p.name)),
            },
        }
    }
    Ok(Args { values })
}

impl Args {
    /// Builds arguments directly from name/value pairs, filling defaults.
    pub fn for_function(name: &str, pairs: &[(&str, Value)]) -> Result<Args, BindError> {
        let spec = lookup(name).ok_or_else(|| BindError::UnknownKeyword(name.to_owned()))?;
        let kw = pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
        bind(spec, Vec::new(), kw)
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.values.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &Value)> {
        self.values.iter().map(|(k, v)| (*k, v))
    }

    /// The first scenario-valued argument (the candidates).
    pub fn scenario(&self, name: &str) -> crate::Result<&ScenarioSet> {
        match self.values.get(name) {
            Some(Value::Scenario(s)) => Ok(s),
            _ => Err(crate::Error::InvalidArgument(format!("argument {name} is not a scenario"))),
        }
    }

    pub fn scenarios(&self, name: &str) -> crate::Result<Vec<&ScenarioSet>> {
        match self.values.get(name) {
            Some(Value::List(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Scenario(s) => Ok(s.as_ref()),
                    _ => Err(crate::Error::InvalidArgument(format!("{name} must hold scenarios"))),
                })
                .collect(),
            _ => Err(crate::Error::InvalidArgument(format!("argument {name} is not a list"))),
        }
    }

    pub fn number(&self, name: &str) -> crate::Result<f64> {
        self.values
            .get(name)
            .and_then(Value::as_number)
            .ok_or_else(|| crate::Error::InvalidArgument(format!("argument {name} is not a number")))
    }

    pub fn text(&self, name: &str) -> crate::Result<&str> {
        match self.values.get(name) {
            Some(Value::Str(s)) => Ok(s),
            _ => Err(crate::Error::InvalidArgument(format!("argument {name} is not a string"))),
        }
    }

    /// A string argument that may be `None`.
    pub fn optional_text(&self, name: &str) -> crate::Result<Option<&str>> {
        match self.values.get(name) {
            Some(Value::None) => Ok(None),
            Some(Value::Str(s)) => Ok(Some(s)),
            _ => Err(crate::Error::InvalidArgument(format!("argument {name} is not a string or None"))),
        }
    }

    pub fn boolean(&self, name: &str) -> crate::Result<bool> {
        match self.values.get(name) {
            Some(Value::Bool(b)) => Ok(*b),
            _ => Err(crate::Error::InvalidArgument(format!("argument {name} is not a bool"))),
        }
    }
}

/// Value-range checks on numeric arguments. Only literal values are checked, so
/// this serves both static validation and execution.
pub fn check_ranges(function: &str, args: &Args) -> Result<(), String> {
    let num = |n: &str| args.get(n).and_then(Value::as_number);
    let ordered = |lo: &str, hi: &str| -> Result<(), String> {
        match (num(lo), num(hi)) {
            (Some(a), Some(b)) if a > b => Err(format!("{lo} ({a}) must not exceed {hi} ({b})")),
            _ => Ok(()),
        }
    };
    let check = |n: &str, ok: fn(f64) -> bool, what: &str| -> Result<(), String> {
        match num(n) {
            Some(v) if !ok(v) || v.is_nan() => Err(format!("{n} must be {what}, got {v}")),
            _ => Ok(()),
        }
    };
    let positive = |v: f64| v > 0.0;
    let non_negative = |v: f64| v >= 0.0;
    let angle = |v: f64| v > 0.0 && v <= 180.0;
    match function {
        "has_velocity" => ordered("min_velocity", "max_velocity"),
        "accelerating" | "has_lateral_acceleration" => ordered("min_accel", "max_accel"),
        "facing_toward" => {
            check("within_angle", angle, "in (0, 180]")?;
            check("max_distance", non_negative, "non-negative")
        }
        "heading_toward" => {
            check("angle_threshold", angle, "in (0, 180]")?;
            check("max_distance", non_negative, "non-negative")
        }
        "has_objects_in_relative_direction" | "get_objects_in_relative_direction" => {
            check("min_number", non_negative, "non-negative")?;
            check("max_number", non_negative, "non-negative")?;
            check("within_distance", positive, "positive")?;
            check("lateral_thresh", positive, "positive")
        }
        "being_crossed_by" => {
            check("forward_thresh", positive, "positive")?;
            check("lateral_thresh", positive, "positive")
        }
        "near_objects" => {
            check("distance_thresh", positive, "positive")?;
            check("min_objects", |v| v >= 1.0, "at least 1")
        }
        "at_pedestrian_crossing" => check("within_distance", non_negative, "non-negative"),
        "near_intersection" => check("threshold", non_negative, "non-negative"),
        "at_stop_sign" => check("forward_thresh", positive, "positive"),
        _ => Ok(()),
    }
}
