use num_traits::Zero;
use serde::Serialize;
use serde_json::Value;

use super::Instance;
use crate::error::{FairDivError, Result};
use crate::exact::{parse_rational, Q};

/// What to do with goods nobody values and agents who value nothing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ZeroPolicy {
    #[default]
    Reject,
    Drop,
}

/// Records a row or column removed under [`ZeroPolicy::Drop`]. Indices refer
/// to the document as written.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "dropped", rename_all = "snake_case")]
pub enum IngestAction {
    Good { index: usize },
    Agent { index: usize },
}

/// Parses a JSON or CSV instance document, rejecting zero-only rows/columns.
pub fn parse_instance(text: &str) -> Result<Instance> {
    parse_instance_with(text, ZeroPolicy::Reject).map(|(inst, _)| inst)
}

pub fn parse_instance_with(text: &str, policy: ZeroPolicy) -> Result<(Instance, Vec<IngestAction>)> {
    let rows = if text.trim_start().starts_with('{') {
        parse_json(text)?
    } else {
        parse_csv(text)?
    };
    match policy {
        ZeroPolicy::Reject => Instance::new(rows).map(|i| (i, Vec::new())),
        ZeroPolicy::Drop => drop_zeros(rows),
    }
}

fn parse_json(text: &str) -> Result<Vec<Vec<Q>>> {
    let doc: Value =
        serde_json::from_str(text).map_err(|e| FairDivError::Malformed(e.to_string()))?;
    let malformed = |msg: &str| FairDivError::Malformed(msg.to_string());
    let agents = doc
        .get("agents")
        .and_then(Value::as_u64)
        .ok_or_else(|| malformed("missing integer field \"agents\""))? as usize;
    let goods = doc
        .get("goods")
        .and_then(Value::as_u64)
        .ok_or_else(|| malformed("missing integer field \"goods\""))? as usize;
    let values = doc
        .get("values")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed("missing array field \"values\""))?;
    if agents == 0 || goods == 0 {
        return Err(FairDivError::EmptyInstance);
    }
    if values.len() != agents {
        return Err(FairDivError::Malformed(format!(
            "\"agents\" is {agents} but {} rows were given",
            values.len()
        )));
    }
    values
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let row = row
                .as_array()
                .ok_or_else(|| FairDivError::Malformed(format!("row {i} is not an array")))?;
            if row.len() != goods {
                return Err(FairDivError::Malformed(format!(
                    "row {i} has {} entries, expected {goods}",
                    row.len()
                )));
            }
            row.iter().map(json_value).collect()
        })
        .collect()
}

fn json_value(v: &Value) -> Result<Q> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) if n.is_i64() || n.is_u64() => parse_rational(&n.to_string()),
        other => Err(FairDivError::Malformed(format!(
            "value {other} must be an integer or a \"p/q\" string"
        ))),
    }
}

fn parse_csv(text: &str) -> Result<Vec<Vec<Q>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| FairDivError::Malformed(e.to_string()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows.push(record.iter().map(parse_rational).collect::<Result<Vec<_>>>()?);
    }
    Ok(rows)
}

fn drop_zeros(rows: Vec<Vec<Q>>) -> Result<(Instance, Vec<IngestAction>)> {
    let goods = super::validate_shape(&rows)?;
    let mut actions = Vec::new();
    let keep_goods: Vec<usize> = (0..goods)
        .filter(|&g| {
            let valued = rows.iter().any(|r| !r[g].is_zero());
            if !valued {
                actions.push(IngestAction::Good { index: g });
            }
            valued
        })
        .collect();
    let mut kept = Vec::new();
    for (i, row) in rows.into_iter().enumerate() {
        if row.iter().all(Zero::is_zero) {
            actions.push(IngestAction::Agent { index: i });
        } else {
            kept.push(keep_goods.iter().map(|&g| row[g].clone()).collect());
        }
    }
    Instance::new(kept).map(|inst| (inst, actions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{frac, int};

    #[test]
    fn json_with_strings_and_integers() {
        let inst = parse_instance(r#"{"agents": 2, "goods": 2, "values": [["2","0"],["1",3]]}"#)
            .unwrap();
        assert_eq!((inst.n(), inst.m()), (2, 2));
        assert_eq!(inst.value_ref(1, 1), &int(3));
    }

    #[test]
    fn csv_two_identical_agents() {
        let inst = parse_instance("6,6,4,4,4\n6,6,4,4,4\n").unwrap();
        assert_eq!((inst.n(), inst.m()), (2, 5));
        assert_eq!(inst.range_parameter(), int(1));
    }

    #[test]
    fn rational_literal_is_exact() {
        let inst = parse_instance("1/3,0\n1,1").unwrap();
        assert_eq!(inst.value_ref(0, 0), &frac(1, 3));
    }

    #[test]
    fn malformed_documents() {
        assert!(matches!(parse_instance("{"), Err(FairDivError::Malformed(_))));
        assert!(matches!(
            parse_instance(r#"{"agents": 2, "goods": 1, "values": [["1"]]}"#),
            Err(FairDivError::Malformed(_))
        ));
        assert!(matches!(parse_instance("1,2\n3"), Err(FairDivError::Malformed(_))));
        assert!(matches!(parse_instance("1,x"), Err(FairDivError::Malformed(_))));
        assert!(matches!(
            parse_instance(r#"{"agents": 1, "goods": 1, "values": [[1.5]]}"#),
            Err(FairDivError::Malformed(_))
        ));
    }

    #[test]
    fn negative_and_empty() {
        assert_eq!(
            parse_instance("1,-2"),
            Err(FairDivError::NegativeValue { agent: 0, good: 1 })
        );
        assert_eq!(parse_instance(""), Err(FairDivError::EmptyInstance));
        assert_eq!(
            parse_instance(r#"{"agents": 0, "goods": 0, "values": []}"#),
            Err(FairDivError::EmptyInstance)
        );
    }

    #[test]
    fn drop_policy_records_actions() {
        let (inst, actions) = parse_instance_with("1,0,2\n0,0,0\n3,0,1", ZeroPolicy::Drop).unwrap();
        assert_eq!((inst.n(), inst.m()), (2, 2));
        assert_eq!(
            actions,
            vec![IngestAction::Good { index: 1 }, IngestAction::Agent { index: 1 }]
        );
        assert_eq!(parse_instance("1,0\n3,0"), Err(FairDivError::ZeroGood(1)));
    }
}
