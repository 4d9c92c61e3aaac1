//! Textual form of circuits.
//!
//! A gate is written by name when it is one of the built-in gates and as a
//! row-major list of `[re, im]` pairs otherwise.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Circuit, Layer, PlacedGate};
use crate::error::{Error, Result};
use crate::gate::Gate;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateJson {
    pub gate: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub targets: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitJson {
    pub width: usize,
    pub layers: Vec<Vec<GateJson>>,
    #[serde(default)]
    pub measured: Vec<usize>,
}

impl From<&PlacedGate> for GateJson {
    fn from(pg: &PlacedGate) -> Self {
        let by_name = pg
            .gate
            .label()
            .and_then(Gate::by_name)
            .filter(|g| g.matrix() == pg.gate.matrix());
        match by_name {
            Some(g) => GateJson {
                gate: g.name().to_string(),
                matrix: None,
                label: None,
                targets: pg.targets.clone(),
            },
            None => GateJson {
                gate: "matrix".into(),
                matrix: Some(pg.gate.matrix().iter().map(|c| [c.re, c.im]).collect()),
                label: pg.gate.label().map(str::to_string),
                targets: pg.targets.clone(),
            },
        }
    }
}

impl TryFrom<GateJson> for PlacedGate {
    type Error = Error;

    fn try_from(g: GateJson) -> Result<Self> {
        let gate = match (g.gate.as_str(), g.matrix) {
            ("matrix", Some(m)) => {
                Gate::new(m.into_iter().map(|[re, im]| C64::new(re, im)).collect(), g.label)?
            }
            ("matrix", None) => return Err(Error::Format("`matrix` gate without entries".into())),
            (name, None) => Gate::by_name(name).ok_or_else(|| Error::Format(format!("unknown gate `{name}`")))?,
            (name, Some(_)) => {
                return Err(Error::Format(format!("gate `{name}` must not carry a matrix")))
            }
        };
        Ok(PlacedGate::new(gate, g.targets))
    }
}

impl From<Circuit> for CircuitJson {
    fn from(c: Circuit) -> Self {
        CircuitJson {
            width: c.width,
            layers: c
                .layers
                .iter()
                .map(|l| l.iter().map(GateJson::from).collect())
                .collect(),
            measured: c.measured,
        }
    }
}

impl TryFrom<CircuitJson> for Circuit {
    type Error = Error;

    fn try_from(c: CircuitJson) -> Result<Self> {
        let layers = c
            .layers
            .into_iter()
            .map(|l| l.into_iter().map(PlacedGate::try_from).collect::<Result<Layer>>())
            .collect::<Result<Vec<_>>>()?;
        Circuit::new(c.width, layers, c.measured)
    }
}

pub(crate) fn layers_to_json(layers: &[Layer]) -> Value {
    let v: Vec<Vec<GateJson>> = layers
        .iter()
        .map(|l| l.iter().map(GateJson::from).collect())
        .collect();
    serde_json::to_value(v).expect("gate json serializes")
}

pub(crate) fn layers_from_json(v: &Value) -> Result<Vec<Layer>> {
    let raw: Vec<Vec<GateJson>> = serde_json::from_value(v.clone())?;
    raw.into_iter()
        .map(|l| l.into_iter().map(PlacedGate::try_from).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_circuit;
    use crate::rng::seeded;

    #[test]
    fn named_gates_serialize_by_name() {
        let c = Circuit::new(
            2,
            vec![vec![PlacedGate::new(Gate::h(), vec![0])], vec![PlacedGate::new(Gate::cnot(), vec![0, 1])]],
            vec![0, 1],
        )
        .unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(
            text,
            r#"{"width":2,"layers":[[{"gate":"H","targets":[0]}],[{"gate":"CNOT","targets":[0,1]}]],"measured":[0,1]}"#
        );
        let back: Circuit = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn arbitrary_gates_roundtrip_exactly() {
        let mut rng = seeded(5);
        for _ in 0..10 {
            let c = random_circuit(4, 3, &mut rng).unwrap();
            let text = serde_json::to_string(&c).unwrap();
            let back: Circuit = serde_json::from_str(&text).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn malformed_input_is_rejected() {
        for bad in [
            r#"{"width":2,"layers":[[{"gate":"NOPE","targets":[0]}]],"measured":[]}"#,
            r#"{"width":2,"layers":[[{"gate":"matrix","targets":[0]}]],"measured":[]}"#,
            r#"{"width":2,"layers":[[{"gate":"matrix","matrix":[[1,0],[1,0],[0,0],[1,0]],"targets":[0]}]],"measured":[]}"#,
            r#"{"width":2,"layers":[[{"gate":"H","targets":[0]},{"gate":"X","targets":[0]}]],"measured":[]}"#,
            r#"{"width":2,"layers":[[{"gate":"CNOT","targets":[0]}]],"measured":[]}"#,
        ] {
            assert!(serde_json::from_str::<Circuit>(bad).is_err(), "{bad}");
        }
    }
}
