//! Line-oriented case file format.
//!
//! ```text
//! # comment
//! CASE
//! name          three_bus
//! periods       24
//! base_mva      100
//! shed_penalty  5000
//!
//! PROFILE                       # optional, `periods` multipliers
//! 0.8 0.78 ...
//!
//! BUS                           # id load_1 .. load_T   (or: id base_load)
//! 1  0 0 0 ...
//!
//! BRANCH                        # from to susceptance flow_min flow_max
//! 1 2 10 -100 100
//!
//! GEN   # id bus p_min p_max a b c ramp_up ramp_down startup shutdown
//! 1 1 0 150 0 20 0.02 60 60 150 150
//!
//! RENEWABLE                     # label bus nameplate curve
//! wind_a 3 60 default
//!
//! COMMITMENT                    # gen_id x_1 .. x_T  (missing units are always on)
//! 2 1 1 0 0 ...
//! ```
//!
//! Sections may appear in any order; values are whitespace separated and
//! `inf`/`-inf` are accepted for unbounded flows. A bus row with a single
//! load value is scaled by `PROFILE` (all ones when absent). The writer
//! always emits one load value per period using shortest round-trip decimal
//! text, so parse -> write -> parse is the identity.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::{Bus, GridCase, Line, RenewableSite, ThermalGenerator, DEFAULT_SHED_PENALTY};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Section {
    None,
    Case,
    Profile,
    Bus,
    Branch,
    Gen,
    Renewable,
    Commitment,
}

struct Row<'a> {
    line: usize,
    fields: Vec<&'a str>,
}

pub fn read_case(path: impl AsRef<Path>) -> Result<GridCase> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_case_named(&text, &path.display().to_string())
}

/// Parses case-file text into a validated [`GridCase`].
pub fn parse_case(text: &str) -> Result<GridCase> {
    parse_case_named(text, "<case>")
}

fn parse_case_named(text: &str, source: &str) -> Result<GridCase> {
    let syntax = |line: usize, msg: String| Error::Syntax {
        path: source.to_string(),
        line,
        msg,
    };

    let mut section = Section::None;
    let mut rows: BTreeMap<u8, Vec<Row>> = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let next = match content {
            "CASE" => Some(Section::Case),
            "PROFILE" => Some(Section::Profile),
            "BUS" => Some(Section::Bus),
            "BRANCH" => Some(Section::Branch),
            "GEN" => Some(Section::Gen),
            "RENEWABLE" => Some(Section::Renewable),
            "COMMITMENT" => Some(Section::Commitment),
            _ => None,
        };
        if let Some(s) = next {
            section = s;
            continue;
        }
        if section == Section::None {
            return Err(syntax(line, format!("data before any section header: '{content}'")));
        }
        rows.entry(section as u8).or_default().push(Row {
            line,
            fields: content.split_whitespace().collect(),
        });
    }
    let take = |s: Section| -> &[Row] { rows.get(&(s as u8)).map(Vec::as_slice).unwrap_or(&[]) };

    let num = |row: &Row, idx: usize, what: &str| -> Result<f64> {
        let field = row
            .fields
            .get(idx)
            .ok_or_else(|| syntax(row.line, format!("missing column '{what}'")))?;
        field
            .parse::<f64>()
            .map_err(|_| syntax(row.line, format!("'{field}' is not a number ({what})")))
    };
    let int = |row: &Row, idx: usize, what: &str| -> Result<usize> {
        let field = row
            .fields
            .get(idx)
            .ok_or_else(|| syntax(row.line, format!("missing column '{what}'")))?;
        field
            .parse::<usize>()
            .map_err(|_| syntax(row.line, format!("'{field}' is not a non-negative integer ({what})")))
    };
    let arity = |row: &Row, n: usize, what: &str| -> Result<()> {
        if row.fields.len() != n {
            return Err(syntax(
                row.line,
                format!("{what} row needs {n} columns, found {}", row.fields.len()),
            ));
        }
        Ok(())
    };

    let mut name = String::from("case");
    let mut periods = None;
    let mut base_mva = 100.0;
    let mut shed_penalty = DEFAULT_SHED_PENALTY;
    for row in take(Section::Case) {
        arity(row, 2, "CASE")?;
        match row.fields[0] {
            "name" => name = row.fields[1].to_string(),
            "periods" => periods = Some(int(row, 1, "periods")?),
            "base_mva" => base_mva = num(row, 1, "base_mva")?,
            "shed_penalty" => shed_penalty = num(row, 1, "shed_penalty")?,
            other => return Err(syntax(row.line, format!("unknown CASE key '{other}'"))),
        }
    }
    let periods = periods.ok_or_else(|| syntax(1, "CASE section must set 'periods'".into()))?;
    if periods == 0 {
        return Err(Error::data("case must have at least one period"));
    }

    let mut profile = Vec::new();
    for row in take(Section::Profile) {
        for idx in 0..row.fields.len() {
            profile.push(num(row, idx, "profile")?);
        }
    }
    if profile.is_empty() {
        profile = vec![1.0; periods];
    } else if profile.len() != periods {
        return Err(Error::data(format!(
            "PROFILE has {} values, expected {periods}",
            profile.len()
        )));
    }

    let mut buses = Vec::new();
    let mut bus_ids = HashSet::new();
    for row in take(Section::Bus) {
        let id = int(row, 0, "id")?;
        if !bus_ids.insert(id) {
            return Err(syntax(row.line, format!("duplicate bus id {id}")));
        }
        let load = match row.fields.len() - 1 {
            1 => {
                let base = num(row, 1, "load")?;
                profile.iter().map(|m| base * m).collect()
            }
            n if n == periods => (1..=periods).map(|k| num(row, k, "load")).collect::<Result<_>>()?,
            n => {
                return Err(syntax(
                    row.line,
                    format!("BUS row needs 1 or {periods} load values, found {n}"),
                ))
            }
        };
        buses.push(Bus { id, load });
    }
    buses.sort_by_key(|b| b.id);

    let dangling = |row: &Row, bus: usize| -> Result<()> {
        if bus_ids.contains(&bus) {
            Ok(())
        } else {
            Err(Error::data(format!(
                "{source}:{}: reference to unknown bus {bus}",
                row.line
            )))
        }
    };

    let mut lines = Vec::new();
    for row in take(Section::Branch) {
        arity(row, 5, "BRANCH")?;
        let line = Line {
            from_bus: int(row, 0, "from")?,
            to_bus: int(row, 1, "to")?,
            susceptance: num(row, 2, "susceptance")?,
            flow_min: num(row, 3, "flow_min")?,
            flow_max: num(row, 4, "flow_max")?,
        };
        dangling(row, line.from_bus)?;
        dangling(row, line.to_bus)?;
        lines.push(line);
    }

    let mut generators: Vec<ThermalGenerator> = Vec::new();
    let mut gen_ids = HashSet::new();
    for row in take(Section::Gen) {
        arity(row, 11, "GEN")?;
        let id = int(row, 0, "id")?;
        if !gen_ids.insert(id) {
            return Err(syntax(row.line, format!("duplicate generator id {id}")));
        }
        let g = ThermalGenerator {
            id,
            bus: int(row, 1, "bus")?,
            p_min: num(row, 2, "p_min")?,
            p_max: num(row, 3, "p_max")?,
            cost_a: num(row, 4, "a")?,
            cost_b: num(row, 5, "b")?,
            cost_c: num(row, 6, "c")?,
            ramp_up: num(row, 7, "ramp_up")?,
            ramp_down: num(row, 8, "ramp_down")?,
            startup: num(row, 9, "startup")?,
            shutdown: num(row, 10, "shutdown")?,
            commitment: vec![1; periods],
        };
        dangling(row, g.bus)?;
        generators.push(g);
    }

    let mut renewables = Vec::new();
    for row in take(Section::Renewable) {
        arity(row, 4, "RENEWABLE")?;
        let site = RenewableSite {
            label: row.fields[0].to_string(),
            bus: int(row, 1, "bus")?,
            nameplate: num(row, 2, "nameplate")?,
            curve: row.fields[3].to_string(),
        };
        dangling(row, site.bus)?;
        if renewables.iter().any(|r: &RenewableSite| r.label == site.label) {
            return Err(syntax(row.line, format!("duplicate renewable label {}", site.label)));
        }
        renewables.push(site);
    }

    let mut committed = HashSet::new();
    for row in take(Section::Commitment) {
        arity(row, periods + 1, "COMMITMENT")?;
        let id = int(row, 0, "gen_id")?;
        if !committed.insert(id) {
            return Err(syntax(row.line, format!("duplicate commitment row for generator {id}")));
        }
        let gen = generators
            .iter_mut()
            .find(|g| g.id == id)
            .ok_or_else(|| Error::data(format!("{source}:{}: unknown generator {id}", row.line)))?;
        for t in 0..periods {
            gen.commitment[t] = match row.fields[t + 1] {
                "0" => 0,
                "1" => 1,
                other => return Err(syntax(row.line, format!("commitment must be 0 or 1, found '{other}'"))),
            };
        }
    }

    let case = GridCase {
        name,
        periods,
        base_mva,
        shed_penalty,
        buses,
        lines,
        generators,
        renewables,
    };
    case.validate()?;
    if !case.is_connected() {
        log::warn!("case '{}' has {} electrical islands", case.name, case.islands().len());
    }
    Ok(case)
}

/// Serialises a case in the format read by [`parse_case`].
pub fn write_case(case: &GridCase) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "CASE");
    let _ = writeln!(s, "name {}", case.name);
    let _ = writeln!(s, "periods {}", case.periods);
    let _ = writeln!(s, "base_mva {}", case.base_mva);
    let _ = writeln!(s, "shed_penalty {}", case.shed_penalty);

    let _ = writeln!(s, "\nBUS\n# id load_1 .. load_{}", case.periods);
    for b in &case.buses {
        let _ = write!(s, "{}", b.id);
        for d in &b.load {
            let _ = write!(s, " {d}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "\nBRANCH\n# from to susceptance flow_min flow_max");
    for l in &case.lines {
        let _ = writeln!(
            s,
            "{} {} {} {} {}",
            l.from_bus, l.to_bus, l.susceptance, l.flow_min, l.flow_max
        );
    }
    let _ = writeln!(
        s,
        "\nGEN\n# id bus p_min p_max a b c ramp_up ramp_down startup shutdown"
    );
    for g in &case.generators {
        let _ = writeln!(
            s,
            "{} {} {} {} {} {} {} {} {} {} {}",
            g.id, g.bus, g.p_min, g.p_max, g.cost_a, g.cost_b, g.cost_c, g.ramp_up, g.ramp_down, g.startup, g.shutdown
        );
    }
    if !case.renewables.is_empty() {
        let _ = writeln!(s, "\nRENEWABLE\n# label bus nameplate curve");
        for r in &case.renewables {
            let _ = writeln!(s, "{} {} {} {}", r.label, r.bus, r.nameplate, r.curve);
        }
    }
    let partial: Vec<_> = case.generators.iter().filter(|g| g.commitment.contains(&0)).collect();
    if !partial.is_empty() {
        let _ = writeln!(s, "\nCOMMITMENT\n# gen_id x_1 .. x_{}", case.periods);
        for g in partial {
            let _ = write!(s, "{}", g.id);
            for x in &g.commitment {
                let _ = write!(s, " {x}");
            }
            s.push('\n');
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "\
CASE
periods 2
name tiny
BUS
1 10 20
2 5     # trailing comment
BRANCH
1 2 10 -50 50
GEN
7 1 0 100 0 10 0.1 50 50 100 100
RENEWABLE
w 2 30 default
COMMITMENT
7 1 0
";

    #[test]
    fn parses_small_case() {
        let c = parse_case(SMALL).unwrap();
        assert_eq!(c.name, "tiny");
        assert_eq!(c.buses[1].load, vec![5.0, 5.0]);
        assert_eq!(c.generators[0].commitment, vec![1, 0]);
        assert_eq!(c.shed_penalty, DEFAULT_SHED_PENALTY);
        assert_eq!(c.reference_bus(), 1);
    }

    #[test]
    fn dangling_bus_is_reported() {
        let text = SMALL.replace("1 2 10 -50 50", "1 999 10 -50 50");
        let err = parse_case(&text).unwrap_err().to_string();
        assert!(err.contains("999"), "{err}");
    }

    #[test]
    fn syntax_error_carries_line_number() {
        let text = SMALL.replace("1 2 10 -50 50", "1 2 ten -50 50");
        match parse_case(&text).unwrap_err() {
            Error::Syntax { line, .. } => assert_eq!(line, 8),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn duplicate_ids_rejected() {
        assert!(parse_case(&SMALL.replace("2 5 ", "1 5 ")).is_err());
        let dup_gen = SMALL.replace("RENEWABLE", "7 1 0 100 0 10 0.1 50 50 100 100\nRENEWABLE");
        assert!(parse_case(&dup_gen).is_err());
    }

    #[test]
    fn round_trip_small() {
        let c = parse_case(SMALL).unwrap();
        let again = parse_case(&write_case(&c)).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn unbounded_flows_accepted() {
        let c = parse_case(&SMALL.replace("-50 50", "-inf inf")).unwrap();
        assert!(c.lines[0].flow_max.is_infinite());
        assert_eq!(c, parse_case(&write_case(&c)).unwrap());
    }
}
