//! JSON files for instances and shift vectors.
//!
//! Instances: `{"mode":"discrete","items":[{"T":4,"H":8}]}`; shifts:
//! `{"shifts":["3","1/2"]}`, each entry an integer, `p/q` or decimal string.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, Item, Mode, ShiftVector};
use crate::ratio;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    mode: Mode,
    items: Vec<Item>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShiftFile {
    shifts: Vec<String>,
}

fn bad_json(what: &str, e: serde_json::Error) -> Error {
    Error::input(format!("malformed {what} file: {e}"))
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| bad_json("instance", e))?;
    Instance::new(file.items, file.mode)
}

pub fn instance_to_json(instance: &Instance) -> String {
    let file = InstanceFile {
        mode: instance.mode(),
        items: instance.items().to_vec(),
    };
    serde_json::to_string(&file).expect("plain data serializes")
}

pub fn parse_shifts(instance: &Instance, text: &str) -> Result<ShiftVector> {
    let file: ShiftFile = serde_json::from_str(text).map_err(|e| bad_json("shift", e))?;
    let values = file
        .shifts
        .iter()
        .map(|s| ratio::parse(s))
        .collect::<Result<Vec<_>>>()?;
    ShiftVector::new(instance, values)
}

pub fn shifts_to_json(shifts: &ShiftVector) -> String {
    let file = ShiftFile {
        shifts: shifts.as_slice().iter().map(ratio::format).collect(),
    };
    serde_json::to_string(&file).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::frac;

    #[test]
    fn instance_round_trip() {
        let text = r#"{"mode":"discrete","items":[{"T":4,"H":8},{"T":6,"H":1}]}"#;
        let instance = parse_instance(text).unwrap();
        assert_eq!(instance, Instance::discrete(&[(4, 8), (6, 1)]).unwrap());
        assert_eq!(instance_to_json(&instance), text);
        let c = parse_instance(r#"{"mode":"continuous","items":[{"T":3,"H":1}]}"#).unwrap();
        assert_eq!(c.mode(), Mode::Continuous);
    }

    #[test]
    fn instance_errors() {
        for bad in [
            "",
            "{}",
            r#"{"mode":"weird","items":[{"T":1,"H":1}]}"#,
            r#"{"mode":"discrete","items":[]}"#,
            r#"{"mode":"discrete","items":[{"T":0,"H":1}]}"#,
            r#"{"mode":"discrete","items":[{"T":-1,"H":1}]}"#,
            r#"{"mode":"discrete","items":[{"T":2,"H":1,"x":3}]}"#,
        ] {
            assert!(matches!(parse_instance(bad), Err(Error::Input(_))), "{bad}");
        }
    }

    #[test]
    fn shifts_parse_and_fold() {
        let c = Instance::continuous(&[(4, 1), (3, 1), (5, 1)]).unwrap();
        let s = parse_shifts(&c, r#"{"shifts":["5","1/2","0.25"]}"#).unwrap();
        assert_eq!(s.as_slice(), &[frac(1, 1), frac(1, 2), frac(1, 4)]);
        assert_eq!(shifts_to_json(&s), r#"{"shifts":["1","1/2","1/4"]}"#);

        let d = Instance::discrete(&[(4, 1)]).unwrap();
        assert!(parse_shifts(&d, r#"{"shifts":["1/2"]}"#).is_err());
        assert!(parse_shifts(&d, r#"{"shifts":["1","2"]}"#).is_err());
        assert!(parse_shifts(&d, r#"{"shifts":["x"]}"#).is_err());
    }
}
