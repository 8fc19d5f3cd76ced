use std::fmt;

use crate::world::is_identifier;

/// A predicted action split into name and argument tokens, not yet checked
/// against any vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawAction {
    pub name: String,
    pub args: Vec<String>,
}

impl fmt::Display for RawAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name, self.args.join(", "))
    }
}

fn is_arg_token(s: &str) -> bool {
    !s.is_empty()
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
        && !s.starts_with('.')
}

/// Accepts `NAME(a, b)`, a bare `NAME`, and script lines such as
/// `[PUTBACK] <plate> (12) <table> (3)`.
pub fn parse_raw_action(text: &str) -> Result<RawAction, String> {
    let t = text.trim();
    if t.is_empty() {
        return Err("empty action".into());
    }
    if t.starts_with('[') {
        return parse_script_line(t);
    }
    let (name, rest) = match t.find('(') {
        Some(i) => (t[..i].trim(), Some(&t[i + 1..])),
        None => (t, None),
    };
    if !is_identifier(name) {
        return Err(format!("invalid action name `{name}`"));
    }
    let mut args = Vec::new();
    if let Some(rest) = rest {
        let inner = rest
            .strip_suffix(')')
            .ok_or_else(|| "missing closing parenthesis".to_string())?;
        if inner.contains('(') || inner.contains(')') {
            return Err("unbalanced parentheses".into());
        }
        if !inner.trim().is_empty() {
            for a in inner.split(',') {
                let a = a.trim();
                if !is_arg_token(a) {
                    return Err(format!("invalid argument `{a}`"));
                }
                args.push(a.to_string());
            }
        }
    }
    Ok(RawAction {
        name: name.to_ascii_uppercase(),
        args,
    })
}

fn parse_script_line(t: &str) -> Result<RawAction, String> {
    let close = t.find(']').ok_or("missing `]`")?;
    let name = t[1..close].trim();
    if !is_identifier(name) {
        return Err(format!("invalid action name `{name}`"));
    }
    let mut rest = t[close + 1..].trim_start();
    let mut args = Vec::new();
    while !rest.is_empty() {
        let body = rest.strip_prefix('<').ok_or("expected `<object>`")?;
        let end = body.find('>').ok_or("missing `>`")?;
        let cat = body[..end].trim();
        if !is_identifier(cat) {
            return Err(format!("invalid object name `{cat}`"));
        }
        rest = body[end + 1..].trim_start();
        let body = rest.strip_prefix('(').ok_or("expected `(id)` after object")?;
        let end = body.find(')').ok_or("missing `)`")?;
        let id: u32 = body[..end]
            .trim()
            .parse()
            .map_err(|_| format!("invalid object id `{}`", &body[..end]))?;
        args.push(format!("{cat}.{id}"));
        rest = body[end + 1..].trim_start();
    }
    Ok(RawAction {
        name: name.to_ascii_uppercase(),
        args,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn call_syntax() {
        let a = parse_raw_action("right_grasp(rag.0)").unwrap();
        assert_eq!(a.name, "RIGHT_GRASP");
        assert_eq!(a.args, ["rag.0"]);
        assert_eq!(parse_raw_action("STANDUP").unwrap().args.len(), 0);
        assert_eq!(parse_raw_action("STANDUP()").unwrap().args.len(), 0);
        assert_eq!(parse_raw_action(" PUT(a.1 , b_2) ").unwrap().args, ["a.1", "b_2"]);
    }

    #[test]
    fn script_syntax() {
        let a = parse_raw_action("[PUTBACK] <plate> (12) <kitchen_table> (3)").unwrap();
        assert_eq!(a.name, "PUTBACK");
        assert_eq!(a.args, ["plate.12", "kitchen_table.3"]);
        assert_eq!(parse_raw_action("[STANDUP]").unwrap().args.len(), 0);
    }

    #[test]
    fn malformed() {
        for bad in ["", "OPEN(", "OPEN(a.1))", "OPEN(a.1,)", "9OPEN(a.1)", "OPEN a.1", "[WALK <tv> (1)", "[WALK] <tv>", "[WALK] <tv> (x)"] {
            assert!(parse_raw_action(bad).is_err(), "{bad}");
        }
    }
}
