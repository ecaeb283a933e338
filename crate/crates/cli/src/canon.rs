//! Canonical JSON text: keys sorted, numbers rounded to 12 significant digits and
//! printed in shortest form, two-space indentation.

use serde_json::Value;

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Number text: integral values without a fraction, others in shortest round-trip form.
pub fn number(x: f64) -> String {
    let r = round12(x);
    if r == 0.0 {
        return "0".into();
    }
    if r.fract() == 0.0 && r.abs() < 1e15 {
        return format!("{r:.0}");
    }
    let plain = format!("{r}");
    let sci = format!("{r:e}");
    if plain.len() <= sci.len() {
        plain
    } else {
        sci
    }
}

pub fn to_string(v: &Value) -> String {
    let mut out = String::new();
    write(v, 0, &mut out);
    out.push('\n');
    out
}

fn write(v: &Value, indent: usize, out: &mut String) {
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&v.to_string()),
        Value::Number(n) => match n.as_f64() {
            Some(x) => out.push_str(&number(x)),
            None => out.push_str(&n.to_string()),
        },
        Value::Array(items) => {
            // Short arrays of scalars stay on one line.
            if items.iter().all(is_scalar) || items.iter().all(is_short_row) {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write(item, indent, out);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(indent + 1, out);
                write(item, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(indent, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                pad(indent + 1, out);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write(&map[*k], indent + 1, out);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(indent, out);
            out.push('}');
        }
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn is_short_row(v: &Value) -> bool {
    matches!(v, Value::Array(a) if a.len() <= 4 && a.iter().all(is_scalar))
}

fn pad(indent: usize, out: &mut String) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn numbers() {
        assert_eq!(number(4.5), "4.5");
        assert_eq!(number(5.0), "5");
        assert_eq!(number(16.0 / 15.0), "1.06666666667");
        assert_eq!(number(2.0 / 3.0), "0.666666666667");
        assert_eq!(number(1e9), "1000000000");
        assert_eq!(number(1e-7), "1e-7");
        assert_eq!(number(-0.0), "0");
    }

    #[test]
    fn sorted_and_stable() {
        let v = json!({"b": [[1.0, 0.5], [2.0, 0.5]], "a": {"z": 1, "y": "s"}});
        let text = to_string(&v);
        assert_eq!(
            text,
            "{\n  \"a\": {\n    \"y\": \"s\",\n    \"z\": 1\n  },\n  \"b\": [[1, 0.5], [2, 0.5]]\n}\n"
        );
        let again: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(to_string(&again), text);
    }
}
