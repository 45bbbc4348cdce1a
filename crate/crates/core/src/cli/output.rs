use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Table,
}

/// 12 significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        // collapse −0
        return format!("{:.11e}", 0.0);
    }
    format!("{x:.11e}")
}

/// Replaces every non-integer JSON number by its fixed-precision string.
/// Object keys are already sorted (serde_json's default map is ordered).
fn normalize(v: &Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => Value::String(format_float(n.as_f64().expect("f64"))),
        Value::Array(a) => Value::Array(a.iter().map(normalize).collect()),
        Value::Object(m) => Value::Object(m.iter().map(|(k, v)| (k.clone(), normalize(v))).collect()),
        other => other.clone(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<String>) {
    match v {
        Value::Array(a) if !a.is_empty() => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        Value::Object(m) if !m.is_empty() => {
            for (k, x) in m {
                let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&p, x, out);
            }
        }
        Value::String(s) => out.push(format!("{prefix}\t{s}")),
        other => out.push(format!("{prefix}\t{other}")),
    }
}

pub fn render(report: &Value, format: Format) -> String {
    let v = normalize(report);
    match format {
        Format::Json => serde_json::to_string_pretty(&v).expect("serializable") + "\n",
        Format::Table => {
            let mut lines = Vec::new();
            flatten("", &v, &mut lines);
            lines.join("\n") + "\n"
        }
    }
}
