use crate::syntax::Cursor;

use super::{Condition, OutputItem, OutputSpec, Pattern, PatternError, PropRef};

/// Parses a complete pattern.
pub fn parse_pattern(text: &str) -> Result<Pattern, PatternError> {
    let mut c = Cursor::new(text);
    let p = pattern(&mut c)?;
    if !c.at_end() {
        return Err(c.error("unexpected input after pattern".into()).into());
    }
    Ok(p)
}

/// Parses a standalone condition such as `x.k < y.k and :A(x)`.
pub fn parse_condition(text: &str) -> Result<Condition, PatternError> {
    let mut c = Cursor::new(text);
    let theta = condition(&mut c)?;
    if !c.at_end() {
        return Err(c.error("unexpected input after condition".into()).into());
    }
    Ok(theta)
}

/// Parses a comma-separated output list such as `x, y.k`.
pub fn parse_output(text: &str) -> Result<OutputSpec, PatternError> {
    let mut c = Cursor::new(text);
    let out = output_items(&mut c)?;
    if !c.at_end() {
        return Err(c.error("unexpected input after output list".into()).into());
    }
    Ok(out)
}

pub(crate) fn pattern(c: &mut Cursor) -> Result<Pattern, PatternError> {
    let mut p = concat(c)?;
    while c.eat("+") {
        let rhs = concat(c)?;
        p = p.union(rhs)?;
    }
    Ok(p)
}

fn starts_atom(c: &mut Cursor) -> bool {
    c.peek_str("(") || c.peek_str("-") || c.peek_str("<-") || c.peek_str("[")
}

fn concat(c: &mut Cursor) -> Result<Pattern, PatternError> {
    if !starts_atom(c) {
        return Err(c.error("expected a node, an edge or `[`".into()).into());
    }
    let mut p = atom(c)?;
    while starts_atom(c) {
        p = p.concat(atom(c)?);
    }
    Ok(p)
}

fn opt_var(c: &mut Cursor) -> Option<String> {
    c.try_ident()
}

fn atom(c: &mut Cursor) -> Result<Pattern, PatternError> {
    if c.eat("(") {
        let x = opt_var(c);
        c.expect(")")?;
        return Ok(Pattern::Node(x));
    }
    if c.eat("-->") {
        return Ok(Pattern::Fwd(None));
    }
    if c.eat("<--") {
        return Ok(Pattern::Bwd(None));
    }
    if c.eat("-[") {
        let x = opt_var(c);
        c.expect("]->")?;
        return Ok(Pattern::Fwd(x));
    }
    if c.eat("<-[") {
        let x = opt_var(c);
        c.expect("]-")?;
        return Ok(Pattern::Bwd(x));
    }
    if c.eat("[") {
        let mut p = pattern(c)?;
        if c.eat("|") {
            let theta = condition(c)?;
            p = p.with_cond(theta)?;
        }
        c.expect("]")?;
        if c.eat("{") {
            let lo = bound(c)?;
            c.expect("..")?;
            let hi = if c.eat("*") { None } else { Some(bound(c)?) };
            c.expect("}")?;
            p = p.repeat(lo, hi)?;
        }
        return Ok(p);
    }
    Err(c.error("expected a node, an edge or `[`".into()).into())
}

fn bound(c: &mut Cursor) -> Result<u32, PatternError> {
    let start = c.pos();
    let n = c.nat()?;
    u32::try_from(n).map_err(|_| c.error_at(start, "repetition bound too large".into()).into())
}

pub(crate) fn condition(c: &mut Cursor) -> Result<Condition, PatternError> {
    let mut theta = conjunction(c)?;
    while c.eat_keyword("or") {
        theta = theta.or(conjunction(c)?);
    }
    Ok(theta)
}

fn conjunction(c: &mut Cursor) -> Result<Condition, PatternError> {
    let mut theta = negation(c)?;
    while c.eat_keyword("and") {
        theta = theta.and(negation(c)?);
    }
    Ok(theta)
}

fn negation(c: &mut Cursor) -> Result<Condition, PatternError> {
    if c.eat_keyword("not") {
        return Ok(negation(c)?.not());
    }
    if c.eat("(") {
        let theta = condition(c)?;
        c.expect(")")?;
        return Ok(theta);
    }
    if c.eat(":") {
        let label = c.ident()?;
        c.expect("(")?;
        let x = c.ident()?;
        c.expect(")")?;
        return Ok(Condition::HasLabel(x, label));
    }
    let a = prop_ref(c)?;
    // Longer operators first so `<=` is not read as `<`.
    for op in ["<=", ">=", "!=", "<>", "=", "<", ">"] {
        if c.eat(op) {
            let b = prop_ref(c)?;
            return Ok(match op {
                "=" => Condition::Eq(a, b),
                "<" => Condition::Lt(a, b),
                ">" => Condition::Lt(b, a),
                "<=" => Condition::Lt(a.clone(), b.clone()).or(Condition::Eq(a, b)),
                ">=" => Condition::Lt(b.clone(), a.clone()).or(Condition::Eq(a, b)),
                _ => Condition::Eq(a, b).not(),
            });
        }
    }
    Err(c.error("expected a comparison operator".into()).into())
}

fn prop_ref(c: &mut Cursor) -> Result<PropRef, PatternError> {
    let var = c.ident()?;
    c.expect(".")?;
    let key = c.ident()?;
    Ok(PropRef { var, key })
}

pub(crate) fn output_items(c: &mut Cursor) -> Result<OutputSpec, PatternError> {
    let mut items = Vec::new();
    loop {
        let x = c.ident()?;
        if c.rest().starts_with('.') {
            c.expect(".")?;
            items.push(OutputItem::Prop(x, c.ident()?));
        } else {
            items.push(OutputItem::Var(x));
        }
        if !c.eat(",") {
            break;
        }
    }
    OutputSpec::new(items)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concatenation_is_left_associated() {
        let p = parse_pattern("(x) -[e]-> (y)").unwrap();
        assert_eq!(
            p,
            Pattern::node("x").concat(Pattern::fwd("e")).concat(Pattern::node("y"))
        );
    }

    #[test]
    fn repeated_condition() {
        let p = parse_pattern("[ (x) --> (y) | x.k < y.k ]{0..*}").unwrap();
        let inner = Pattern::seq([Pattern::node("x"), Pattern::fwd(""), Pattern::node("y")]);
        let expected = inner
            .with_cond(Condition::lt("x", "k", "y", "k"))
            .unwrap()
            .repeat(0, None)
            .unwrap();
        assert_eq!(p, expected);
    }

    #[test]
    fn union_free_variable_mismatch() {
        assert!(matches!(
            parse_pattern("[(x) | :A(x)] + (y)"),
            Err(PatternError::UnionMismatch { .. })
        ));
    }

    #[test]
    fn anonymous_atoms_and_backward_edges() {
        let p = parse_pattern("() <-- <-[w]- -->").unwrap();
        assert_eq!(
            p,
            Pattern::seq([
                Pattern::node(""),
                Pattern::bwd(""),
                Pattern::bwd("w"),
                Pattern::fwd("")
            ])
        );
    }

    #[test]
    fn comparison_sugar() {
        let theta = parse_condition("x.a >= y.b").unwrap();
        assert_eq!(
            theta,
            Condition::lt("y", "b", "x", "a").or(Condition::eq("x", "a", "y", "b"))
        );
        let theta = parse_condition("not x.a = y.a and :L(x) or x.a != y.b").unwrap();
        let expected = Condition::eq("x", "a", "y", "a")
            .not()
            .and(Condition::has_label("x", "L"))
            .or(Condition::eq("x", "a", "y", "b").not());
        assert_eq!(theta, expected);
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_pattern("(x) -[e]- (y)").unwrap_err();
        match err {
            PatternError::Syntax(e) => assert_eq!(e.column, 8),
            other => panic!("{other:?}"),
        }
        assert!(parse_pattern("[(x)]{3..1}").is_err());
        assert!(parse_pattern("").is_err());
        assert!(parse_pattern("(x) (y) extra").is_err());
    }

    #[test]
    fn output_lists() {
        let out = parse_output("x, y.k ,z").unwrap();
        assert_eq!(out.attr_names(), vec!["x", "y.k", "z"]);
        assert!(parse_output("x, x").is_err());
    }

    #[test]
    fn printing_round_trips() {
        for text in [
            "(x) -[e]-> (y)",
            "[(x) --> (y) | x.k < y.k]{0..*}",
            "(xs) [(u) -[x]-> (z) -[y]-> (v) <-[w]- (z) | x.k < y.k]{1..*} --> (xt) + (xs) --> (xt)",
            "(a) [(b) (c)]",
            "[--> + <--] [--> + -->]",
            "[[-->]{1..2}]{0..*}",
            "[(x) | not (x.a = x.b or :L(x)) and x.c < x.d]",
            "[[(x) | :A(x)] | :B(x)]",
        ] {
            let p = parse_pattern(text).unwrap();
            let printed = p.to_string();
            assert_eq!(parse_pattern(&printed).unwrap(), p, "{text} printed as {printed}");
        }
    }
}
