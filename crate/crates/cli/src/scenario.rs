//! Scenario files: TOML with `[orbit]`, `[guard]`, `[[constraints]]`,
//! `[planner]` and `[output]` blocks. Lengths are km, times s, angles degrees.

use std::fmt;
use std::path::Path;

use cwpath::{Constraint, Model, Orbit, TimeWindow, TransferGuard, Vec3, EARTH_MU, EARTH_RADIUS};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use toml::{Table, Value};

use crate::CliError;

/// A length or time that may be infinite; written `"inf"` in files.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Limit(pub f64);

impl Serialize for Limit {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() && self.0 > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Limit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Limit;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Limit, E> {
                Ok(Limit(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Limit, E> {
                Ok(Limit(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Limit, E> {
                Ok(Limit(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Limit, E> {
                match v.trim().to_ascii_lowercase().as_str() {
                    "inf" | "+inf" | "infinity" => Ok(Limit(f64::INFINITY)),
                    other => Err(E::custom(format!("expected a number or \"inf\", got \"{other}\""))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_ts: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub altitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuardBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_condition: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintBlock {
    #[serde(default)]
    pub center: [f64; 3],
    #[serde(default)]
    pub rho_inner: f64,
    #[serde(default = "infinite")]
    pub rho_outer: Limit,
    /// End of the window `(0, t_end)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<Limit>,
    /// Single-instant window, for equality constraints.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at: Option<f64>,
}

fn infinite() -> Limit {
    Limit(f64::INFINITY)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r1_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r1_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r1_steps: Option<usize>,
    /// Number of initial directions per radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<usize>,
    /// Flight times as fractions of `π/κ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2_fractions: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

/// Parameters for every subcommand; each reads the fields it needs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_i: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_j: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_i_minus: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone_axis: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_res: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_res: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve_t: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_inner: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_outer: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_step_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_step_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_impulses: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage_gap_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions_deg: Option<Vec<f64>>,
    /// Radius of the circle carrying `positions_deg`, km.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub orbit: OrbitBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard: Option<GuardBlock>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraints: Vec<ConstraintBlock>,
    #[serde(default)]
    pub planner: PlannerBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputBlock>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        Self::from_table(parse_table(text)?)
    }

    pub fn from_table(table: Table) -> Result<Self, CliError> {
        let scenario: Self = Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Validation(format!("scenario: {}", e.message())))?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// Reads `path` and applies `key=value` overrides before validation.
    pub fn load(path: &Path, overrides: &[String]) -> Result<(Self, String), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read scenario {}: {e}", path.display())))?;
        let mut table = parse_table(&text)?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        Ok((Self::from_table(table)?, text))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.orbit()?;
        self.guard()?;
        self.constraints()?;
        Ok(())
    }

    pub fn orbit(&self) -> Result<Orbit, CliError> {
        let o = &self.orbit;
        let given = [o.a_ts.is_some(), o.altitude.is_some(), o.kappa.is_some()].iter().filter(|b| **b).count();
        if given != 1 {
            return Err(CliError::Validation(format!(
                "[orbit] needs exactly one of a_ts, altitude, kappa; found {given}"
            )));
        }
        if o.body_radius.is_some() && o.altitude.is_none() {
            return Err(CliError::Validation("[orbit] body_radius is only used with altitude".into()));
        }
        let mu = o.mu.unwrap_or(EARTH_MU);
        let orbit = if let Some(a) = o.a_ts {
            Orbit::new(mu, a)
        } else if let Some(h) = o.altitude {
            Orbit::from_altitude(mu, o.body_radius.unwrap_or(EARTH_RADIUS), h)
        } else {
            Orbit::from_mean_motion(mu, o.kappa.expect("checked above"))
        };
        orbit.map_err(CliError::from)
    }

    pub fn guard(&self) -> Result<TransferGuard<f64>, CliError> {
        let mut guard = TransferGuard::default();
        if let Some(g) = &self.guard {
            guard.min_dt = g.min_dt.unwrap_or(guard.min_dt);
            guard.end_margin = g.end_margin.unwrap_or(guard.end_margin);
            guard.max_condition = g.max_condition.unwrap_or(guard.max_condition);
        }
        if !(guard.min_dt >= 0.0 && guard.end_margin >= 0.0 && guard.max_condition > 1.0) {
            return Err(CliError::Validation("[guard] needs min_dt ≥ 0, end_margin ≥ 0, max_condition > 1".into()));
        }
        Ok(guard)
    }

    pub fn model(&self) -> Result<Model, CliError> {
        Ok(Model::new(self.orbit()?).with_guard(self.guard()?))
    }

    pub fn constraints(&self) -> Result<Vec<Constraint>, CliError> {
        self.constraints
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let window = match (c.t_end, c.at) {
                    (Some(_), Some(_)) => {
                        return Err(CliError::Validation(format!("constraint {i}: give t_end or at, not both")));
                    }
                    (None, Some(at)) => TimeWindow::Instant { at },
                    (t_end, None) => TimeWindow::Open { end: t_end.unwrap_or(Limit(f64::INFINITY)).0 },
                };
                Constraint::new(Vec3(c.center), c.rho_inner, c.rho_outer.0, window)
                    .map_err(|e| CliError::Validation(format!("constraint {i}: {e}")))
            })
            .collect()
    }

    pub fn output_dir(&self) -> Option<&str> {
        self.output.as_ref().and_then(|o| o.dir.as_deref())
    }
}

fn parse_table(text: &str) -> Result<Table, CliError> {
    text.parse::<Table>().map_err(|e| CliError::Validation(format!("scenario is not valid TOML: {}", e.message())))
}

/// Sets a dotted `key=value` path in `table`. Numeric segments index arrays;
/// the value is read as a TOML value, falling back to a plain string.
pub fn apply_override(table: &mut Table, spec: &str) -> Result<(), CliError> {
    let (key, raw) =
        spec.split_once('=').ok_or_else(|| CliError::Validation(format!("override \"{spec}\" is not key=value")))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(CliError::Validation(format!("override key \"{key}\" has an empty segment")));
    }
    let value = parse_value(raw.trim());
    let mut slot = table.entry(path[0].to_string()).or_insert_with(|| Value::Table(Table::new()));
    for seg in &path[1..] {
        slot = match slot {
            Value::Table(t) => t.entry(seg.to_string()).or_insert_with(|| Value::Table(Table::new())),
            Value::Array(a) => {
                let idx: usize = seg
                    .parse()
                    .map_err(|_| CliError::Validation(format!("override \"{key}\": \"{seg}\" is not an array index")))?;
                let len = a.len();
                a.get_mut(idx).ok_or_else(|| {
                    CliError::Validation(format!("override \"{key}\": index {idx} out of range (len {len})"))
                })?
            }
            _ => return Err(CliError::Validation(format!("override \"{key}\": \"{seg}\" is below a plain value"))),
        };
    }
    *slot = value;
    Ok(())
}

fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}
