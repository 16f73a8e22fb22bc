//! Per-tick CSV log, its reader, and the run summary.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cooperation::Flags;
use crate::error::{Error, Result};
use crate::geometry::{EllipseAxes, OrbitSpec, Vec2};
use crate::sim::{AgentRecord, MetricsRecord};

const AGENT_FIELDS: [&str; 12] = [
    "x", "y", "psi", "z", "v_cmd", "omega_cmd", "gamma", "s", "ds", "fl_o", "fl_r", "fl_h",
];
const ORBIT_FIELDS: [&str; 7] = ["cx", "cy", "theta", "a", "b", "vx", "vy"];

pub fn header(n_agents: usize, n_vehicles: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for i in 1..=n_agents {
        h.extend(AGENT_FIELDS.iter().map(|f| format!("a{i}_{f}")));
    }
    h.extend(ORBIT_FIELDS.iter().map(|f| format!("orbit_{f}")));
    for j in 1..=n_vehicles {
        h.push(format!("t{j}_x"));
        h.push(format!("t{j}_y"));
    }
    h
}

fn column_count(n_agents: usize, n_vehicles: usize) -> usize {
    1 + AGENT_FIELDS.len() * n_agents + ORBIT_FIELDS.len() + 2 * n_vehicles
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Flattens a record in header order.
pub fn record_values(r: &MetricsRecord) -> Vec<f64> {
    let mut v = Vec::with_capacity(column_count(r.agents.len(), r.convoy.len()));
    v.push(r.t);
    for a in &r.agents {
        v.extend([
            a.x,
            a.y,
            a.psi,
            a.z,
            a.v_cmd,
            a.omega_cmd,
            a.gamma,
            a.s,
            a.ds,
            flag(a.flags.on_orbit),
            flag(a.flags.ready),
            flag(a.flags.height),
        ]);
    }
    let o = &r.orbit;
    v.extend([
        o.center.x,
        o.center.y,
        o.tilt,
        o.axes.a(),
        o.axes.b(),
        o.center_velocity.x,
        o.center_velocity.y,
    ]);
    for p in &r.convoy {
        v.extend([p.x, p.y]);
    }
    v
}

fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct MetricsWriter<W: Write> {
    csv: csv::Writer<W>,
    jsonl: Option<W>,
    header: Vec<String>,
}

impl<W: Write> MetricsWriter<W> {
    pub fn new(out: W, jsonl: Option<W>, n_agents: usize, n_vehicles: usize) -> Result<Self> {
        let header = header(n_agents, n_vehicles);
        let mut csv = csv::Writer::from_writer(out);
        csv.write_record(&header).map_err(csv_err)?;
        Ok(Self { csv, jsonl, header })
    }

    pub fn write(&mut self, record: &MetricsRecord) -> Result<()> {
        let values = record_values(record);
        assert_eq!(values.len(), self.header.len(), "record shape does not match header");
        self.csv.write_record(values.iter().map(|&x| format_value(x))).map_err(csv_err)?;
        if let Some(out) = self.jsonl.as_mut() {
            let map: serde_json::Map<String, serde_json::Value> = self
                .header
                .iter()
                .zip(&values)
                .map(|(k, &x)| (k.clone(), serde_json::Value::from(x)))
                .collect();
            serde_json::to_writer(&mut *out, &map).map_err(|e| Error::Packet(e.to_string()))?;
            out.write_all(b"\n").map_err(|e| Error::io("<jsonl>", e))?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.csv.flush().map_err(|e| Error::io("<metrics>", e))?;
        if let Some(out) = self.jsonl.as_mut() {
            out.flush().map_err(|e| Error::io("<jsonl>", e))?;
        }
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Csv {
        path: "<metrics>".into(),
        row: e.position().map(|p| p.record() as usize).unwrap_or(0),
        message: e.to_string(),
    }
}

/// Parsed metrics log.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsTable {
    pub n_agents: usize,
    pub n_vehicles: usize,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

fn parse_header(h: &[String], path: &Path) -> Result<(usize, usize)> {
    let bad = |message: String| Error::Csv {
        path: path.to_path_buf(),
        row: 1,
        message,
    };
    let n_agents = h.iter().filter(|c| c.starts_with('a') && c.ends_with("_fl_h")).count();
    let rest = h.len().checked_sub(1 + AGENT_FIELDS.len() * n_agents + ORBIT_FIELDS.len());
    let n_vehicles = match rest {
        Some(r) if r % 2 == 0 => r / 2,
        _ => return Err(bad(format!("unexpected column count {}", h.len()))),
    };
    let expected = header(n_agents, n_vehicles);
    if let Some((k, (got, want))) = h.iter().zip(&expected).enumerate().find(|(_, (g, w))| g != w) {
        return Err(bad(format!("column {} is `{got}`, expected `{want}`", k + 1)));
    }
    Ok((n_agents, n_vehicles))
}

impl MetricsTable {
    pub fn read(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, path)
    }

    pub fn from_reader<R: Read>(reader: R, path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Csv {
                path: path.to_path_buf(),
                row: 1,
                message: e.to_string(),
            })?
            .iter()
            .map(str::to_string)
            .collect();
        let (n_agents, n_vehicles) = parse_header(&header, path)?;
        let mut rows = Vec::new();
        for (k, rec) in rdr.records().enumerate() {
            let row = k + 2;
            let rec = rec.map_err(|e| Error::Csv {
                path: path.to_path_buf(),
                row,
                message: e.to_string(),
            })?;
            if rec.len() != header.len() {
                return Err(Error::Csv {
                    path: path.to_path_buf(),
                    row,
                    message: format!("{} fields, expected {}", rec.len(), header.len()),
                });
            }
            let values = rec
                .iter()
                .enumerate()
                .map(|(c, f)| {
                    f.trim().parse::<f64>().map_err(|_| Error::Csv {
                        path: path.to_path_buf(),
                        row,
                        message: format!("`{f}` in column `{}` is not a number", header[c]),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(values);
        }
        Ok(Self {
            n_agents,
            n_vehicles,
            header,
            rows,
        })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    /// Rebuilds the records; flags come back from their 0/1 columns.
    pub fn records(&self) -> Result<Vec<MetricsRecord>> {
        self.rows.iter().map(|r| self.record(r)).collect()
    }

    fn record(&self, r: &[f64]) -> Result<MetricsRecord> {
        let agents = (0..self.n_agents)
            .map(|i| {
                let a = &r[1 + i * AGENT_FIELDS.len()..1 + (i + 1) * AGENT_FIELDS.len()];
                AgentRecord {
                    x: a[0],
                    y: a[1],
                    psi: a[2],
                    z: a[3],
                    v_cmd: a[4],
                    omega_cmd: a[5],
                    gamma: a[6],
                    s: a[7],
                    ds: a[8],
                    flags: Flags {
                        on_orbit: a[9] != 0.0,
                        ready: a[10] != 0.0,
                        height: a[11] != 0.0,
                    },
                }
            })
            .collect();
        let o0 = 1 + self.n_agents * AGENT_FIELDS.len();
        let o = &r[o0..o0 + ORBIT_FIELDS.len()];
        let orbit = OrbitSpec {
            center: Vec2::new(o[0], o[1]),
            tilt: o[2],
            axes: EllipseAxes::new(o[3], o[4])?,
            center_velocity: Vec2::new(o[5], o[6]),
        };
        let c0 = o0 + ORBIT_FIELDS.len();
        let convoy = (0..self.n_vehicles)
            .map(|j| Vec2::new(r[c0 + 2 * j], r[c0 + 2 * j + 1]))
            .collect();
        Ok(MetricsRecord {
            t: r[0],
            agents,
            orbit,
            convoy,
        })
    }
}

/// Speed or turn-rate bound violations in a log.
pub fn count_violations(records: &[MetricsRecord], v_min: f64, v_max: f64, omega_max: f64) -> u64 {
    records
        .iter()
        .flat_map(|r| r.agents.iter())
        .filter(|a| a.v_cmd < v_min || a.v_cmd > v_max || a.omega_cmd.abs() > omega_max)
        .count() as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenario: String,
    pub ticks: u64,
    pub dt: f64,
    pub n_agents: usize,
    /// First time every agent has its height flag up.
    pub formation_time: Option<f64>,
    /// Start of the final stretch in which all flags stay up and every
    /// `|D_s|` stays below the separation threshold.
    pub settling_time: Option<f64>,
    pub max_gamma_error_post_settling: Option<f64>,
    pub max_abs_ds_post_settling: Option<f64>,
    pub max_abs_ds_post_formation: Option<f64>,
    pub constraint_violations: u64,
}

#[derive(Debug, Clone, Copy)]
struct TickStats {
    t: f64,
    all_flags: bool,
    all_height: bool,
    max_ds: f64,
    max_gamma_err: f64,
}

/// Accumulates per-tick statistics while a run streams its records.
#[derive(Debug, Clone)]
pub struct SummaryBuilder {
    ticks: Vec<TickStats>,
    separation_threshold: f64,
    v_min: f64,
    v_max: f64,
    omega_max: f64,
    violations: u64,
}

impl SummaryBuilder {
    pub fn new(separation_threshold: f64, v_min: f64, v_max: f64, omega_max: f64) -> Self {
        Self {
            ticks: Vec::new(),
            separation_threshold,
            v_min,
            v_max,
            omega_max,
            violations: 0,
        }
    }

    pub fn push(&mut self, r: &MetricsRecord) {
        self.violations += count_violations(std::slice::from_ref(r), self.v_min, self.v_max, self.omega_max);
        let all_flags = r.agents.iter().all(|a| a.flags.on_orbit && a.flags.ready && a.flags.height);
        let all_height = r.agents.iter().all(|a| a.flags.height);
        self.ticks.push(TickStats {
            t: r.t,
            all_flags,
            all_height,
            max_ds: r.agents.iter().map(|a| a.ds.abs()).fold(0.0, f64::max),
            max_gamma_err: r.agents.iter().map(|a| (a.gamma - 1.0).abs()).fold(0.0, f64::max),
        });
    }

    pub fn finish(self, scenario: &str, dt: f64, n_agents: usize) -> RunSummary {
        let ticks = &self.ticks;
        let formation = ticks.iter().position(|k| k.all_height);

        let mut settle = None;
        for (k, s) in ticks.iter().enumerate().rev() {
            if s.all_flags && s.max_ds < self.separation_threshold {
                settle = Some(k);
            } else {
                break;
            }
        }
        let max_from = |k: Option<usize>, f: fn(&TickStats) -> f64| k.map(|k| ticks[k..].iter().map(f).fold(0.0, f64::max));

        RunSummary {
            scenario: scenario.to_string(),
            ticks: ticks.len() as u64,
            dt,
            n_agents,
            formation_time: formation.map(|k| ticks[k].t),
            settling_time: settle.map(|k| ticks[k].t),
            max_gamma_error_post_settling: max_from(settle, |s| s.max_gamma_err),
            max_abs_ds_post_settling: max_from(settle, |s| s.max_ds),
            max_abs_ds_post_formation: max_from(formation, |s| s.max_ds),
            constraint_violations: self.violations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_record(vals: &[f64], n_agents: usize, n_vehicles: usize) -> MetricsRecord {
        let mut it = vals.iter().copied().cycle();
        let mut next = || it.next().unwrap();
        let agents = (0..n_agents)
            .map(|i| AgentRecord {
                x: next(),
                y: next(),
                psi: next(),
                z: next(),
                v_cmd: next(),
                omega_cmd: next(),
                gamma: next().abs(),
                s: next().abs(),
                ds: next(),
                flags: Flags::from_bits(i as u8 % 8),
            })
            .collect();
        let orbit = OrbitSpec {
            center: Vec2::new(next(), next()),
            tilt: next(),
            axes: {
                let (u, w) = (next().abs(), next().abs());
                EllipseAxes::new(1.0 + u.max(w), 1.0 + u.min(w)).unwrap()
            },
            center_velocity: Vec2::new(next(), next()),
        };
        let convoy = (0..n_vehicles).map(|_| Vec2::new(next(), next())).collect();
        MetricsRecord {
            t: next().abs(),
            agents,
            orbit,
            convoy,
        }
    }

    fn write_read(records: &[MetricsRecord], n_agents: usize, n_vehicles: usize) -> MetricsTable {
        let mut buf = Vec::new();
        let mut w = MetricsWriter::new(&mut buf, None, n_agents, n_vehicles).unwrap();
        for r in records {
            w.write(r).unwrap();
        }
        w.finish().unwrap();
        MetricsTable::from_reader(buf.as_slice(), Path::new("mem.csv")).unwrap()
    }

    #[test]
    fn header_layout() {
        let h = header(2, 1);
        assert_eq!(h[0], "t");
        assert_eq!(h[1], "a1_x");
        assert_eq!(h[12], "a1_fl_h");
        assert_eq!(h[13], "a2_x");
        assert_eq!(h[25], "orbit_cx");
        assert_eq!(h.last().unwrap(), "t1_y");
        assert_eq!(h.len(), column_count(2, 1));
    }

    #[test]
    fn header_only_file_reads_back_empty() {
        let t = write_read(&[], 3, 4);
        assert_eq!((t.n_agents, t.n_vehicles), (3, 4));
        assert!(t.rows.is_empty());
    }

    #[test]
    fn reader_reports_row_numbers() {
        let mut text = header(1, 2).join(",");
        let good: Vec<String> = (0..column_count(1, 2)).map(|k| format!("{k}.5")).collect();
        text.push('\n');
        text.push_str(&good.join(","));
        text.push('\n');
        let mut bad = good.clone();
        bad[3] = "oops".into();
        text.push_str(&bad.join(","));
        text.push('\n');
        let err = MetricsTable::from_reader(text.as_bytes(), Path::new("m.csv")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 3"), "{msg}");
        assert!(msg.contains("a1_psi"), "{msg}");

        let short = format!("{}\n1,2,3\n", header(1, 2).join(","));
        let msg = MetricsTable::from_reader(short.as_bytes(), Path::new("m.csv")).unwrap_err().to_string();
        assert!(msg.contains("row 2"), "{msg}");
    }

    #[test]
    fn reader_rejects_foreign_header() {
        let msg = MetricsTable::from_reader("t,foo,bar\n".as_bytes(), Path::new("m.csv"))
            .unwrap_err()
            .to_string();
        assert!(msg.contains("row 1"), "{msg}");
    }

    #[test]
    fn summary_settling_and_violations() {
        let mk = |t: f64, ds: f64, flags: u8, v: f64| MetricsRecord {
            t,
            agents: vec![AgentRecord {
                x: 0.0,
                y: 0.0,
                psi: 0.0,
                z: 1.0,
                v_cmd: v,
                omega_cmd: 0.0,
                gamma: 1.0 + ds,
                s: 0.0,
                ds,
                flags: Flags::from_bits(flags),
            }],
            orbit: OrbitSpec::stationary(Vec2::zeros(), 0.0, EllipseAxes::circle(1.0).unwrap()),
            convoy: vec![],
        };
        let recs = [
            mk(0.0, 0.0, 0, 0.5),
            mk(1.0, 0.5, 7, 0.5),
            mk(2.0, 0.05, 7, 0.5),
            mk(3.0, 0.2, 7, 2.0),
            mk(4.0, 0.02, 7, 0.5),
            mk(5.0, 0.01, 7, 0.5),
        ];
        let mut b = SummaryBuilder::new(0.1, 0.3, 1.0, 1.0);
        for r in &recs {
            b.push(r);
        }
        let s = b.finish("x", 1.0, 1);
        assert_eq!(s.formation_time, Some(1.0));
        assert_eq!(s.settling_time, Some(4.0));
        assert_eq!(s.max_abs_ds_post_settling, Some(0.02));
        assert_eq!(s.max_abs_ds_post_formation, Some(0.5));
        assert_eq!(s.constraint_violations, 1);
        assert_eq!(count_violations(&recs, 0.3, 1.0, 1.0), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn csv_round_trip_is_exact(
            vals in proptest::collection::vec(-1e6f64..1e6, 8..40),
            n_agents in 0usize..4,
            n_vehicles in 0usize..4,
            rows in 1usize..4,
        ) {
            let records: Vec<_> = (0..rows)
                .map(|k| {
                    let mut v = vals.clone();
                    v.rotate_left(k % vals.len());
                    sample_record(&v, n_agents, n_vehicles)
                })
                .collect();
            let back = write_read(&records, n_agents, n_vehicles).records().unwrap();
            prop_assert_eq!(back, records);
        }
    }
}
