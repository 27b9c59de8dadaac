//! Stratum predicates: a list of clauses that must all hold, each clause a
//! `||`-separated disjunction of comparisons such as `2*a+b!=0`.

use std::cmp::Ordering;

use crate::exact::{parse_constant, ExactError, ParamAssignment};

const OPS: [&str; 6] = ["==", "!=", "<=", ">=", "<", ">"];

fn comparison(text: &str, params: &ParamAssignment) -> Result<bool, ExactError> {
    for op in OPS {
        if let Some((lhs, rhs)) = text.split_once(op) {
            let ord = parse_constant(lhs, params)?.cmp(&parse_constant(rhs, params)?);
            return Ok(match op {
                "==" => ord == Ordering::Equal,
                "!=" => ord != Ordering::Equal,
                "<=" => ord != Ordering::Greater,
                ">=" => ord != Ordering::Less,
                "<" => ord == Ordering::Less,
                _ => ord == Ordering::Greater,
            });
        }
    }
    Err(ExactError::Syntax {
        pos: 0,
        msg: format!("no comparison operator in `{text}`"),
    })
}

pub fn holds(clauses: &[String], params: &ParamAssignment) -> Result<bool, ExactError> {
    for clause in clauses {
        let mut any = false;
        for alt in clause.split("||") {
            if comparison(alt.trim(), params)? {
                any = true;
                break;
            }
        }
        if !any {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;

    fn ab(a: i64, b: i64) -> ParamAssignment {
        ParamAssignment::new().with("a", int(a)).with("b", int(b))
    }

    #[test]
    fn singular_weights() {
        let singular = vec![
            "a!=0 || b!=0".to_string(),
            "a==b || 2*a+b==0 || a+2*b==0".to_string(),
        ];
        assert!(holds(&singular, &ab(1, 1)).unwrap());
        assert!(holds(&singular, &ab(1, -2)).unwrap());
        assert!(!holds(&singular, &ab(1, 2)).unwrap());
        assert!(!holds(&singular, &ab(0, 0)).unwrap());
    }

    #[test]
    fn orderings_and_errors() {
        assert!(holds(&["a<b".into(), "b>=2".into()], &ab(1, 2)).unwrap());
        assert!(!holds(&["a>b".into()], &ab(1, 2)).unwrap());
        assert!(holds(&[], &ab(0, 0)).unwrap());
        assert!(holds(&["a+b".into()], &ab(1, 2)).is_err());
        assert!(holds(&["c==0".into()], &ab(1, 2)).is_err());
    }
}
