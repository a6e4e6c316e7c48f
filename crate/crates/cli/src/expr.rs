//! Arithmetic over parameter names, e.g. `omega_m = "2*J"`.

use std::collections::BTreeMap;

use evalexpr::{build_operator_tree, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node, Value};

#[derive(Debug, Clone)]
pub struct Expr {
    source: String,
    tree: Node<DefaultNumericTypes>,
}

impl Expr {
    pub fn parse(source: &str) -> Result<Self, String> {
        let tree = build_operator_tree(&promote_integers(source)).map_err(|e| format!("cannot parse `{source}`: {e}"))?;
        Ok(Self { source: source.to_string(), tree })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn variables(&self) -> Vec<String> {
        let mut names: Vec<String> = self.tree.iter_variable_identifiers().map(str::to_string).collect();
        names.sort();
        names.dedup();
        names
    }

    pub fn eval(&self, values: &BTreeMap<String, f64>) -> Result<f64, String> {
        let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
        for (name, v) in values {
            ctx.set_value(name.clone(), Value::Float(*v)).map_err(|e| e.to_string())?;
        }
        let v = self.tree.eval_number_with_context(&ctx).map_err(|e| format!("cannot evaluate `{}`: {e}", self.source))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("`{}` evaluates to {v}", self.source))
        }
    }
}

/// Rewrites integer literals as floats so that `1/2` is not integer division.
fn promote_integers(src: &str) -> String {
    let chars: Vec<char> = src.chars().collect();
    let mut out = String::with_capacity(src.len() + 8);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_alphabetic() || c == '_' {
            // identifiers may contain digits
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == ':') {
                out.push(chars[i]);
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            let start = i;
            let mut float = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                float = true;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut k = i + 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    float = true;
                    i = k;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            out.extend(&chars[start..i]);
            if !float {
                out.push_str(".0");
            }
            continue;
        }
        out.push(c);
        i += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(src: &str, vars: &[(&str, f64)]) -> f64 {
        let values = vars.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        Expr::parse(src).unwrap().eval(&values).unwrap()
    }

    #[test]
    fn integer_literals_divide_as_floats() {
        assert_eq!(eval("1/2", &[]), 0.5);
        assert_eq!(eval("2.5e5", &[]), 2.5e5);
        assert_eq!(eval("1e-3 * 4", &[]), 4e-3);
        assert_eq!(eval(".5 + 1", &[]), 1.5);
    }

    #[test]
    fn parameter_names_are_variables() {
        let e = Expr::parse("2*J + n_th/E - Delta").unwrap();
        assert_eq!(e.variables(), ["Delta", "E", "J", "n_th"]);
        assert_eq!(eval("2*J", &[("J", 11.4)]), 22.8);
        assert_eq!(eval("-3*J", &[("J", 2.0)]), -6.0);
        assert_eq!(eval("1/gamma_m", &[("gamma_m", 0.04)]), 25.0);
        assert_eq!(eval("math::sqrt(J^2 - gamma^2)", &[("J", 5.0), ("gamma", 3.0)]), 4.0);
    }

    #[test]
    fn malformed_and_non_finite_results_are_rejected() {
        let fails = |src: &str| Expr::parse(src).and_then(|e| e.eval(&BTreeMap::new())).is_err();
        assert!(fails("1/0"));
        assert!(fails("2 *"));
        assert!(fails("\"text\""));
    }
}
