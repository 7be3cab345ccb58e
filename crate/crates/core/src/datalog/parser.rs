use crate::graph::Value;
use crate::syntax::Cursor;

use super::{Atom, DatalogError, Program, Rule, Term};

fn term(c: &mut Cursor) -> Result<Term, DatalogError> {
    if c.peek_str("\"") {
        return Ok(Term::Const(Value::str(&c.string_lit()?)));
    }
    if c.peek_char().is_some_and(|ch| ch.is_ascii_digit() || ch == '-') {
        return Ok(Term::Const(Value::int(c.int()?)));
    }
    Ok(Term::Var(c.ident()?))
}

fn atom(c: &mut Cursor) -> Result<Atom, DatalogError> {
    let pred = c.ident()?;
    let mut args = Vec::new();
    if c.eat("(") && !c.eat(")") {
        loop {
            args.push(term(c)?);
            if c.eat(")") {
                break;
            }
            c.expect(",")?;
        }
    }
    Ok(Atom { pred, args })
}

/// One rule or fact per clause, each ending in `.`; `.out P` names the
/// output relation.
pub fn parse_program(text: &str) -> Result<Program, DatalogError> {
    let mut c = Cursor::new(text);
    let mut p = Program::default();
    while !c.at_end() {
        if c.eat(".out") {
            p.out = Some(c.ident()?);
            continue;
        }
        let head = atom(&mut c)?;
        let mut body = Vec::new();
        if c.eat(":-") || c.eat("<-") {
            loop {
                body.push(atom(&mut c)?);
                if !c.eat(",") {
                    break;
                }
            }
        }
        c.expect(".")?;
        p.rules.push(Rule { head, body });
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rules_and_directives() {
        let p = parse_program("% no\nOut() :- lab(x, \"first\"), E(x, -3).\n.out Out").err();
        assert!(p.is_some(), "`%` is not a comment marker");
        let p = parse_program("# comment\nOut() :- lab(x, \"first\"), E(x, -3).\n.out Out").unwrap();
        assert_eq!(p.out.as_deref(), Some("Out"));
        assert_eq!(p.rules[0].head.args.len(), 0);
        assert_eq!(p.rules[0].body[1].args[1], Term::Const(Value::int(-3)));
        let p = parse_program("N(1). N(2).").unwrap();
        assert_eq!(p.rules.len(), 2);
        assert!(parse_program("T(x) :- E(x").is_err());
    }
}
