use std::collections::BTreeMap;

use super::cond::{parse_cond, parse_typed_vars, Cond, TypedVar};
use super::{Conventions, Domain, DomainError, OperatorSchema};
use crate::sexpr::{error_at, parse_all, Sexpr};
use crate::world::Vocabulary;

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn err(&self, (offset, msg): (usize, String)) -> DomainError {
        DomainError::Parse(error_at(self.text, offset, msg))
    }
}

fn keyword(e: &Sexpr) -> Option<String> {
    e.atom().map(|s| s.to_ascii_lowercase())
}

fn parse_action(ctx: &Ctx, items: &[Sexpr], warnings: &mut Vec<String>) -> Result<OperatorSchema, DomainError> {
    let at = items.first().map(Sexpr::offset).unwrap_or(0);
    let name = items
        .get(1)
        .and_then(Sexpr::atom)
        .ok_or_else(|| ctx.err((at, "expected an action name".into())))?
        .to_string();
    let mut params = Vec::new();
    let mut pre = Cond::And(Vec::new());
    let mut eff = Cond::And(Vec::new());
    let mut i = 2;
    while i < items.len() {
        let key = keyword(&items[i]).ok_or_else(|| ctx.err((items[i].offset(), "expected a `:keyword`".into())))?;
        let value = items
            .get(i + 1)
            .ok_or_else(|| ctx.err((items[i].offset(), format!("missing value for `{key}`"))))?;
        match key.as_str() {
            ":parameters" => {
                let list = value
                    .list()
                    .ok_or_else(|| ctx.err((value.offset(), "expected a parameter list".into())))?;
                params = parse_typed_vars(list).map_err(|e| ctx.err(e))?;
            }
            ":precondition" => pre = parse_cond(value).map_err(|e| ctx.err(e))?,
            ":effect" => eff = parse_cond(value).map_err(|e| ctx.err(e))?,
            other => warnings.push(format!("{name}: ignored `{other}`")),
        }
        i += 2;
    }
    finish_schema(name, params, pre, eff, warnings)
}

fn finish_schema(
    name: String,
    params: Vec<TypedVar>,
    precondition: Cond,
    effect: Cond,
    warnings: &mut Vec<String>,
) -> Result<OperatorSchema, DomainError> {
    let invalid = |message: String| DomainError::Invalid {
        action: name.clone(),
        message,
    };
    let mut seen = Vec::new();
    for p in &params {
        if seen.contains(&&p.name) {
            return Err(invalid(format!("duplicate parameter `?{}`", p.name)));
        }
        seen.push(&p.name);
    }
    let violations = effect.effect_violations();
    if !violations.is_empty() {
        return Err(invalid(format!("effect uses {}", violations.join(", "))));
    }
    let is_param = |v: &String| params.iter().any(|p| &p.name == v);
    let free_eff: Vec<String> = effect.free_vars().into_iter().filter(|v| !is_param(v)).collect();
    if !free_eff.is_empty() {
        return Err(invalid(format!("unbound effect variable(s) ?{}", free_eff.join(", ?"))));
    }
    let implicit: Vec<TypedVar> = precondition
        .free_vars()
        .into_iter()
        .filter(|v| !is_param(v))
        .map(|v| TypedVar {
            name: v,
            ty: "object".into(),
        })
        .collect();
    if !implicit.is_empty() {
        warnings.push(format!(
            "{name}: precondition variable(s) {} not declared; read existentially",
            implicit.iter().map(|v| format!("?{}", v.name)).collect::<Vec<_>>().join(", ")
        ));
    }
    if effect.when_nesting() > 1 || precondition.when_nesting() > 1 {
        warnings.push(format!("{name}: `when` nested more than one level"));
    }
    Ok(OperatorSchema {
        name,
        params,
        precondition,
        effect,
        implicit,
    })
}

fn parse_agent(ctx: &Ctx, items: &[Sexpr]) -> Result<Conventions, DomainError> {
    let mut c = Conventions::default();
    for e in items {
        let list = e
            .list()
            .ok_or_else(|| ctx.err((e.offset(), "expected an agent convention".into())))?;
        let words: Vec<String> = list.iter().filter_map(|x| x.atom().map(str::to_string)).collect();
        match words.first().map(|s| s.to_ascii_lowercase()).as_deref() {
            Some(":hands") => c.hands = words[1..].iter().map(|s| s.to_ascii_lowercase()).collect(),
            Some(":navigation") => c.navigation = words[1..].iter().map(|s| s.to_ascii_uppercase()).collect(),
            Some(":auto-navigation") => {
                if words.len() != 3 {
                    return Err(ctx.err((e.offset(), "expected `(:auto-navigation ACTION predicate)`".into())));
                }
                c.auto_navigation = true;
                c.navigate_action = Some(words[1].to_ascii_uppercase());
                c.adjacency_predicate = Some(words[2].to_ascii_lowercase());
            }
            _ => return Err(ctx.err((e.offset(), format!("unknown agent convention `{e}`")))),
        }
    }
    Ok(c)
}

fn check_vocabulary(
    schemas: &[OperatorSchema],
    declared: Option<&BTreeMap<String, usize>>,
) -> Result<Vocabulary, DomainError> {
    let mut arities: BTreeMap<String, usize> = declared.cloned().unwrap_or_default();
    for s in schemas {
        for (p, n) in s.precondition.predicates().into_iter().chain(s.effect.predicates()) {
            if p == "=" {
                continue;
            }
            match arities.get(p) {
                Some(&m) if m != n => {
                    return Err(DomainError::Vocabulary(format!(
                        "{}: `{p}` used with {n} argument(s), declared with {m}",
                        s.name
                    )))
                }
                Some(_) => {}
                None if declared.is_some() => {
                    return Err(DomainError::Vocabulary(format!(
                        "{}: undeclared predicate `{p}`",
                        s.name
                    )))
                }
                None => {
                    arities.insert(p.to_string(), n);
                }
            }
        }
    }
    let mut v = Vocabulary::new();
    for (p, n) in arities {
        v.declare_predicate(&p, n);
    }
    Ok(v)
}

/// Parse a domain: either `(define (domain ...) ...)` or a bare sequence of
/// `(:action ...)` blocks. An empty text yields an empty domain.
pub fn load_domain(text: &str) -> Result<Domain, DomainError> {
    let ctx = Ctx { text };
    let top = parse_all(text)?;
    let mut warnings = Vec::new();
    let mut name = String::new();
    let mut declared: Option<BTreeMap<String, usize>> = None;
    let mut schemas: Vec<OperatorSchema> = Vec::new();
    let mut conventions = Conventions::default();

    let mut sections: Vec<&Sexpr> = Vec::new();
    for e in &top {
        match e.head().as_deref() {
            Some("define") => {
                let items = e.list().unwrap();
                for x in &items[1..] {
                    if x.head().as_deref() == Some("domain") {
                        name = x.list().unwrap().get(1).and_then(Sexpr::atom).unwrap_or("").to_string();
                    } else {
                        sections.push(x);
                    }
                }
            }
            Some(":action") => sections.push(e),
            _ => return Err(ctx.err((e.offset(), format!("unexpected top-level form `{e}`")))),
        }
    }

    for s in sections {
        let items = s
            .list()
            .ok_or_else(|| ctx.err((s.offset(), "expected a section".into())))?;
        match s.head().as_deref() {
            Some(":action") => {
                let schema = parse_action(&ctx, items, &mut warnings)?;
                if schemas.iter().any(|x| x.key() == schema.key()) {
                    return Err(DomainError::Invalid {
                        action: schema.name,
                        message: "duplicate action name".into(),
                    });
                }
                schemas.push(schema);
            }
            Some(":predicates") => {
                let map = declared.get_or_insert_with(BTreeMap::new);
                for p in &items[1..] {
                    let pl = p
                        .list()
                        .ok_or_else(|| ctx.err((p.offset(), "expected `(predicate ?args)`".into())))?;
                    let pname = pl
                        .first()
                        .and_then(Sexpr::atom)
                        .ok_or_else(|| ctx.err((p.offset(), "expected a predicate name".into())))?;
                    let vars = parse_typed_vars(&pl[1..]).map_err(|e| ctx.err(e))?;
                    map.insert(pname.to_ascii_lowercase(), vars.len());
                }
            }
            Some(":agent") => conventions = parse_agent(&ctx, &items[1..])?,
            Some(":requirements") | Some(":types") | Some(":constants") => {}
            Some(other) => warnings.push(format!("ignored section `{other}`")),
            None => return Err(ctx.err((s.offset(), "expected a section keyword".into()))),
        }
    }

    let vocab = check_vocabulary(&schemas, declared.as_ref())?;
    Ok(Domain::from_parts(name, vocab, schemas, conventions, warnings))
}

/// Operator blocks as predicted text; vocabulary is not checked.
pub fn parse_action_blocks(text: &str) -> Result<Vec<OperatorSchema>, DomainError> {
    let ctx = Ctx { text };
    let mut out = Vec::new();
    let mut warnings = Vec::new();
    for e in parse_all(text)? {
        match e.head().as_deref() {
            Some(":action") => out.push(parse_action(&ctx, e.list().unwrap(), &mut warnings)?),
            _ => return Err(ctx.err((e.offset(), "expected `(:action ...)`".into()))),
        }
    }
    Ok(out)
}
