use serde_json::Value;

use crate::commands::Output;
use crate::Format;

/// JSON is canonical; text and the default CSV flatten it to `path = value`.
pub fn render(out: &Output, format: Format) -> anyhow::Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(&out.value)? + "\n"),
        Format::Text => {
            let mut rows = Vec::new();
            flatten(&out.value, String::new(), &mut rows);
            Ok(rows.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect())
        }
        Format::Csv => {
            if let Some(csv) = &out.csv {
                return Ok(csv.clone());
            }
            let mut rows = Vec::new();
            flatten(&out.value, String::new(), &mut rows);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["key", "value"])?;
            for (k, v) in rows {
                w.write_record([k, v])?;
            }
            Ok(String::from_utf8(w.into_inner()?)?)
        }
    }
}

fn flatten(v: &Value, path: String, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                flatten(x, p, out);
            }
        }
        Value::Array(a) if a.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in a.iter().enumerate() {
                flatten(x, format!("{path}[{i}]"), out);
            }
        }
        Value::String(s) => out.push((path, s.clone())),
        other => out.push((path, other.to_string())),
    }
}
