//! JSON and CSV shapes written by the CLI.

use std::time::Duration;

use serde::Serialize;

use tsdecomp::decompose::{machine_product, DecompositionReport};
use tsdecomp::{Region, RegionSetReport, SmSet, StateMachine, TransitionSystem};

fn millis(d: Duration) -> f64 {
    (d.as_secs_f64() * 1e6).round() / 1e3
}

#[derive(Serialize)]
pub struct EctsJson {
    pub excitation_closed: bool,
    pub effective: bool,
    pub failing_events: Vec<String>,
}

impl EctsJson {
    pub fn new(r: &RegionSetReport) -> EctsJson {
        EctsJson {
            excitation_closed: r.ec_ok,
            effective: r.effectiveness_ok,
            failing_events: r.failing_events.clone(),
        }
    }
}

#[derive(Serialize)]
pub struct StageJson {
    pub name: &'static str,
    pub machines: usize,
    pub places: usize,
    pub transitions: usize,
    pub wall_ms: f64,
}

#[derive(Serialize)]
pub struct WitnessJson {
    pub trace: Vec<String>,
    pub ts_state: String,
    pub product_state: Option<String>,
}

#[derive(Serialize)]
pub struct Report {
    pub input: String,
    pub regions: Vec<Vec<String>>,
    pub ects: EctsJson,
    pub stages: Vec<StageJson>,
    pub verified: bool,
    pub witness: Option<WitnessJson>,
}

#[derive(Serialize)]
pub struct RegionsJson {
    pub input: String,
    pub regions: Vec<Vec<String>>,
    pub ects: EctsJson,
}

pub fn region_names(ts: &TransitionSystem, regions: &[Region]) -> Vec<Vec<String>> {
    regions
        .iter()
        .map(|r| r.names(ts).into_iter().map(String::from).collect())
        .collect()
}

pub fn witness_json(
    ts: &TransitionSystem,
    sms: &SmSet,
    rep: &DecompositionReport,
) -> Option<WitnessJson> {
    let w = rep.verification.witness()?;
    Some(WitnessJson {
        trace: w.trace.events().to_vec(),
        ts_state: ts.state_name(w.left_state).to_string(),
        product_state: machine_product(sms).map(|(p, _)| p.state_name(w.right_state).to_string()),
    })
}

impl Report {
    pub fn from_pipeline(input: &str, ts: &TransitionSystem, rep: &DecompositionReport) -> Report {
        Report {
            input: input.to_string(),
            regions: region_names(ts, &rep.regions),
            ects: EctsJson::new(&rep.ects),
            stages: rep
                .stages
                .iter()
                .map(|s| StageJson {
                    name: s.name,
                    machines: s.sms.len(),
                    places: s.places,
                    transitions: s.transitions,
                    wall_ms: millis(s.wall),
                })
                .collect(),
            verified: rep.verified(),
            witness: witness_json(ts, rep.final_sms(), rep),
        }
    }

    /// Report for an input rejected before any machine was built.
    pub fn rejected(
        input: &str,
        ts: &TransitionSystem,
        regions: &[Region],
        ects: &RegionSetReport,
    ) -> Report {
        Report {
            input: input.to_string(),
            regions: region_names(ts, regions),
            ects: EctsJson::new(ects),
            stages: Vec::new(),
            verified: false,
            witness: None,
        }
    }
}

#[derive(Serialize)]
pub struct PlaceJson {
    pub name: String,
    pub states: Vec<String>,
}

#[derive(Serialize)]
pub struct EdgeJson {
    pub pre: String,
    pub event: String,
    pub post: String,
}

/// Mirror of one `.sm` file.
#[derive(Serialize)]
pub struct MachineJson {
    pub name: String,
    pub initial: String,
    pub places: Vec<PlaceJson>,
    pub edges: Vec<EdgeJson>,
}

impl MachineJson {
    pub fn new(name: String, ts: &TransitionSystem, sm: &StateMachine) -> MachineJson {
        let place = |i: usize| sm.places()[i].name.clone();
        MachineJson {
            name,
            initial: place(sm.initial()),
            places: sm
                .places()
                .iter()
                .map(|p| PlaceJson {
                    name: p.name.clone(),
                    states: p.region.names(ts).into_iter().map(String::from).collect(),
                })
                .collect(),
            edges: sm
                .edges()
                .iter()
                .map(|e| EdgeJson {
                    pre: place(e.pre),
                    event: ts.event_name(e.event).to_string(),
                    post: place(e.post),
                })
                .collect(),
        }
    }
}

/// `total / count` to two decimals, halves rounded up.
pub fn average(total: usize, count: usize) -> String {
    if count == 0 {
        return "0.00".to_string();
    }
    let hundredths = (200 * total + count) / (2 * count);
    format!("{}.{:02}", hundredths / 100, hundredths % 100)
}

/// One CSV line of `bench`. Wall times come last so they are easy to strip.
#[derive(Serialize, Default)]
pub struct StatsRow {
    pub input: String,
    pub status: String,
    pub states: Option<usize>,
    pub transitions: Option<usize>,
    pub regions: Option<usize>,
    pub machines: Option<usize>,
    pub places: Option<usize>,
    pub sm_transitions: Option<usize>,
    pub avg_places: Option<String>,
    pub avg_alphabet: Option<String>,
    pub max_places: Option<usize>,
    pub max_alphabet: Option<usize>,
    pub generate_places: Option<usize>,
    pub generate_transitions: Option<usize>,
    pub irredundant_places: Option<usize>,
    pub irredundant_transitions: Option<usize>,
    pub merge_places: Option<usize>,
    pub merge_transitions: Option<usize>,
    pub error: Option<String>,
    pub regions_ms: Option<f64>,
    pub generate_ms: Option<f64>,
    pub irredundant_ms: Option<f64>,
    pub merge_ms: Option<f64>,
    pub verify_ms: Option<f64>,
}

impl StatsRow {
    pub fn failed(
        input: &str,
        ts: Option<&TransitionSystem>,
        status: &str,
        error: String,
    ) -> StatsRow {
        StatsRow {
            input: input.to_string(),
            status: status.to_string(),
            states: ts.map(TransitionSystem::num_states),
            transitions: ts.map(|t| t.transitions().len()),
            error: Some(error),
            ..Default::default()
        }
    }

    pub fn from_pipeline(
        input: &str,
        ts: &TransitionSystem,
        rep: &DecompositionReport,
    ) -> StatsRow {
        let fin = rep.final_sms();
        let n = fin.len();
        let alphabets: Vec<usize> = fin.machines().iter().map(|m| m.alphabet().len()).collect();
        let stage = |i: usize| rep.stages.get(i);
        StatsRow {
            input: input.to_string(),
            status: if rep.verified() {
                "verified"
            } else {
                "unverified"
            }
            .to_string(),
            states: Some(ts.num_states()),
            transitions: Some(ts.transitions().len()),
            regions: Some(rep.regions.len()),
            machines: Some(n),
            places: Some(fin.total_places()),
            sm_transitions: Some(fin.total_transitions()),
            avg_places: Some(average(fin.total_places(), n)),
            avg_alphabet: Some(average(alphabets.iter().sum(), n)),
            max_places: fin.machines().iter().map(|m| m.places().len()).max(),
            max_alphabet: alphabets.iter().copied().max(),
            generate_places: stage(0).map(|s| s.places),
            generate_transitions: stage(0).map(|s| s.transitions),
            irredundant_places: stage(1).map(|s| s.places),
            irredundant_transitions: stage(1).map(|s| s.transitions),
            merge_places: stage(2).map(|s| s.places),
            merge_transitions: stage(2).map(|s| s.transitions),
            error: None,
            regions_ms: Some(millis(rep.regions_wall)),
            generate_ms: stage(0).map(|s| millis(s.wall)),
            irredundant_ms: stage(1).map(|s| millis(s.wall)),
            merge_ms: stage(2).map(|s| millis(s.wall)),
            verify_ms: Some(millis(rep.verify_wall)),
        }
    }
}

/// CSV text of `rows`; the header is written even when there are no rows.
pub fn stats_csv(rows: &[StatsRow]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let mut bytes = w.into_inner().map_err(|e| e.into_error())?;
    if rows.is_empty() {
        // the header comes from serializing a record, so take it from a blank one
        let mut h = csv::Writer::from_writer(Vec::new());
        h.serialize(StatsRow::default())?;
        let blank = h.into_inner().map_err(|e| e.into_error())?;
        let end = blank
            .iter()
            .position(|&b| b == b'\n')
            .map_or(blank.len(), |i| i + 1);
        bytes = blank[..end].to_vec();
    }
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const WALL_COLUMNS: usize = 5;

    #[test]
    fn averages_round_half_up() {
        assert_eq!(average(13, 3), "4.33");
        assert_eq!(average(5, 3), "1.67");
        assert_eq!(average(1, 8), "0.13");
        assert_eq!(average(3, 8), "0.38");
        assert_eq!(average(10, 4), "2.50");
        assert_eq!(average(0, 0), "0.00");
    }

    #[test]
    fn empty_csv_is_a_header() {
        let text = stats_csv(&[]).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("input,status,states,"));
        assert!(text.trim_end().ends_with("merge_ms,verify_ms"));
        assert_eq!(
            text.trim_end()
                .split(',')
                .rev()
                .take(WALL_COLUMNS)
                .filter(|c| c.ends_with("_ms"))
                .count(),
            WALL_COLUMNS
        );
    }
}
