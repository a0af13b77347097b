use scenemine_core::registry::{self, Default, FunctionKind, ParamKind};
use scenemine_core::{Category, Error, Result};

/// The program-synthesis prompt. Placeholders are substituted by [`build_prompt`].
pub const PROMPT_TEMPLATE: &str = "Please use the following functions to find instances of a referred object in an autonomous driving dataset. Be precise to the description, try to avoid returning false positives. \n\
\n\
API Listing: {api_listing}\n\
\n\
Categories: {categories}\n\
\n\
Define a single scenario for the description:{description}\n\
\n\
Here is a list of examples: {examples}. Only output code and comments as part of a Python block. Do not define any additional functions, or filepaths. Do not include imports. Assume the log_dir and output_dir variables are given. Wrap all code in one python block and do not provide alternatives. Output code even if the given functions are not expressive enough to find the scenario.";

/// In-context examples shipped with the crate: (file name, program).
pub const EXAMPLE_PROGRAMS: [(&str, &str); 3] = [
    ("peds_between_stopped_buses.py", include_str!("../programs/peds_between_stopped_buses.py")),
    ("bicyclist_group.py", include_str!("../programs/bicyclist_group.py")),
    ("accelerating_right_lane_change.py", include_str!("../programs/accelerating_right_lane_change.py")),
];

/// Programs that parse and run but answer their prompt wrongly.
pub const FLAWED_PROGRAMS: [(&str, &str); 3] = [
    ("bus_blocking_light.py", include_str!("../programs/bus_blocking_light.py")),
    ("bicycle_behind_vehicle.py", include_str!("../programs/bicycle_behind_vehicle.py")),
    ("aborted_lane_change.py", include_str!("../programs/aborted_lane_change.py")),
];

fn python_type(kind: ParamKind) -> String {
    let literal = |opts: &[&str]| format!("Literal[{}]", opts.iter().map(|o| format!("\"{o}\"")).collect::<Vec<_>>().join(", "));
    match kind {
        ParamKind::Scenario => "dict".into(),
        ParamKind::ScenarioList => "list[dict]".into(),
        ParamKind::LogDir | ParamKind::OutputDir => "Path".into(),
        ParamKind::Text | ParamKind::Category | ParamKind::Color => "str".into(),
        ParamKind::Float => "float".into(),
        ParamKind::Count => "int".into(),
        ParamKind::Bool => "bool".into(),
        ParamKind::Enum(opts) => literal(opts),
        ParamKind::OptionalEnum(opts) => format!("Optional[{}]", literal(opts)),
    }
}

fn python_default(d: Default) -> String {
    match d {
        Default::Float(f) if f.is_infinite() => if f > 0.0 { "np.inf" } else { "-np.inf" }.into(),
        Default::Float(f) => format!("{f:?}"),
        Default::Int(i) => i.to_string(),
        Default::Bool(b) => if b { "True" } else { "False" }.into(),
        Default::Str(s) => format!("\"{s}\""),
        Default::None => "None".into(),
    }
}

/// Python-style signatures and one-line docs for every registry function.
pub fn api_listing() -> String {
    let mut out = String::new();
    for name in registry::function_names() {
        let spec = registry::lookup(name).expect("listed function");
        if spec.kind == FunctionKind::Wrapper {
            out.push_str(&format!("def {name}(func):\n"));
        } else {
            out.push_str(&format!("def {name}(\n"));
            for p in spec.params {
                let default = p.default.map(|d| format!(" = {}", python_default(d))).unwrap_or_default();
                out.push_str(&format!("    {}: {}{default},\n", p.name, python_type(p.kind)));
            }
            out.push_str("):\n");
        }
        out.push_str(&format!("    \"\"\"{}\"\"\"\n\n", spec.summary));
    }
    out.trim_end().to_owned()
}

pub fn category_listing() -> String {
    let names: Vec<&str> = Category::ALL.iter().map(|c| c.name()).collect();
    names.join(", ")
}

/// Fills the template. `examples` are complete programs; each is placed in its
/// own fenced block.
pub fn build_prompt(description: &str, api_listing: &str, examples: &[&str]) -> Result<String> {
    if description.trim().is_empty() {
        return Err(Error::InvalidArgument("empty description".into()));
    }
    let examples: Vec<String> = examples.iter().map(|e| format!("\n```python\n{}\n```\n", e.trim_end())).collect();
    Ok(fill(api_listing, &category_listing(), description, &examples.concat()))
}

fn fill(api: &str, categories: &str, description: &str, examples: &str) -> String {
    // Single pass so that placeholder-like text inside the inputs is left alone.
    let mut out = String::with_capacity(PROMPT_TEMPLATE.len() + api.len() + examples.len());
    let mut rest = PROMPT_TEMPLATE;
    while let Some(i) = rest.find('{') {
        out.push_str(&rest[..i]);
        let j = rest[i..].find('}').map(|j| i + j).expect("closed placeholder");
        out.push_str(match &rest[i + 1..j] {
            "api_listing" => api,
            "categories" => categories,
            "description" => description,
            "examples" => examples,
            other => panic!("unknown placeholder {other}"),
        });
        rest = &rest[j + 1..];
    }
    out.push_str(rest);
    out
}

/// The prompt with the bundled API listing and examples.
pub fn default_prompt(description: &str) -> Result<String> {
    let examples: Vec<&str> = EXAMPLE_PROGRAMS.iter().map(|(_, p)| *p).collect();
    build_prompt(description, &api_listing(), &examples)
}
