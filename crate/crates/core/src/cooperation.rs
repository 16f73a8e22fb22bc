//! Decentralized speed coordination toward an equi-parametric formation.
//!
//! Every agent broadcasts its ellipse parameter and three monotone flags once
//! per tick. From the latest values it picks the next agent ahead on the
//! orbit, measures the parametric spacing error to it and converts that into
//! a speed correction. Agent 1 holds the nominal speed as a reference until
//! the ready flags have propagated back around the ring to it.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, wrap_positive, EllipseAxes, OrbitCoords};

pub const PACKET_LEN: usize = 14;

const FLAG_READY: u8 = 0b001;
const FLAG_HEIGHT: u8 = 0b010;
const FLAG_ORBIT: u8 = 0b100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Flags {
    pub ready: bool,
    pub height: bool,
    pub on_orbit: bool,
}

impl Flags {
    pub fn bits(self) -> u8 {
        ((self.ready as u8) * FLAG_READY) | ((self.height as u8) * FLAG_HEIGHT) | ((self.on_orbit as u8) * FLAG_ORBIT)
    }

    pub fn from_bits(bits: u8) -> Self {
        Self {
            ready: bits & FLAG_READY != 0,
            height: bits & FLAG_HEIGHT != 0,
            on_orbit: bits & FLAG_ORBIT != 0,
        }
    }
}

/// Broadcast message. Agent indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentPacket {
    pub agent_index: u8,
    pub s: f64,
    pub flags: Flags,
}

impl AgentPacket {
    /// `index | s (f64 LE) | flags | CRC-32 (LE)` over the first ten bytes.
    pub fn encode(&self) -> [u8; PACKET_LEN] {
        let mut buf = [0u8; PACKET_LEN];
        buf[0] = self.agent_index;
        buf[1..9].copy_from_slice(&self.s.to_le_bytes());
        buf[9] = self.flags.bits();
        let crc = crc32fast::hash(&buf[..10]);
        buf[10..].copy_from_slice(&crc.to_le_bytes());
        buf
    }

    pub fn decode(frame: &[u8], n_agents: usize) -> Result<Self> {
        if frame.len() != PACKET_LEN {
            return Err(Error::Packet(format!("expected {PACKET_LEN} bytes, got {}", frame.len())));
        }
        let crc = u32::from_le_bytes(frame[10..14].try_into().unwrap());
        if crc != crc32fast::hash(&frame[..10]) {
            return Err(Error::Packet("checksum mismatch".into()));
        }
        let agent_index = frame[0];
        if agent_index == 0 || agent_index as usize > n_agents {
            return Err(Error::Packet(format!("agent index {agent_index} outside 1..={n_agents}")));
        }
        let s = f64::from_le_bytes(frame[1..9].try_into().unwrap());
        if !(0.0..TAU).contains(&s) {
            return Err(Error::Packet(format!("parameter {s} outside [0, 2π)")));
        }
        if frame[9] & !(FLAG_READY | FLAG_HEIGHT | FLAG_ORBIT) != 0 {
            return Err(Error::Packet(format!("reserved flag bits set: {:#010b}", frame[9])));
        }
        Ok(Self {
            agent_index,
            s,
            flags: Flags::from_bits(frame[9]),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeerEntry {
    pub s: f64,
    pub flags: Flags,
}

/// Latest received state for every agent, indexed from 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PeerTable {
    entries: Vec<Option<PeerEntry>>,
}

impl PeerTable {
    pub fn new(n_agents: usize) -> Self {
        Self {
            entries: vec![None; n_agents],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn receive(&mut self, packet: &AgentPacket) {
        let idx = packet.agent_index as usize;
        if (1..=self.entries.len()).contains(&idx) {
            self.entries[idx - 1] = Some(PeerEntry {
                s: packet.s,
                flags: packet.flags,
            });
        }
    }

    pub fn set(&mut self, index: usize, entry: PeerEntry) {
        self.entries[index - 1] = Some(entry);
    }

    pub fn get(&self, index: usize) -> Option<&PeerEntry> {
        self.entries.get(index - 1).and_then(Option::as_ref)
    }

    /// Parameters of all agents if every entry has been heard from.
    pub fn parameters(&self) -> Option<Vec<f64>> {
        self.entries.iter().map(|e| e.map(|e| e.s)).collect()
    }
}

/// Index of the next agent ahead (increasing `s`) of agent `my_index`.
///
/// Equal parameters are ordered by index, so with `s_i = s_j` and `i < j`
/// agent `i` follows `j`.
pub fn find_neighbour(params: &[f64], my_index: usize) -> usize {
    let my_s = params[my_index - 1];
    let mut best: Option<(f64, usize)> = None;
    for (k, &s) in params.iter().enumerate() {
        let idx = k + 1;
        if idx == my_index {
            continue;
        }
        let mut gap = wrap_positive(s - my_s);
        if gap == 0.0 && idx < my_index {
            gap = TAU;
        }
        // strict comparison keeps the lowest index among equal gaps
        if best.is_none_or(|(g, _)| gap < g) {
            best = Some((gap, idx));
        }
    }
    best.map_or(my_index, |(_, idx)| idx)
}

/// Wrapped spacing error to the neighbour ahead.
pub fn separation_error(my_s: f64, neighbour_s: f64, spacing: f64) -> f64 {
    normalize_angle(normalize_angle(neighbour_s - my_s) - spacing)
}

/// Speed correction realizing a parametric rate of `k_s · D_s`.
pub fn correction_speed(separation: f64, coords: &OrbitCoords, axes: &EllipseAxes, k_s: f64) -> f64 {
    coords.gamma.sqrt() * axes.speed_factor(coords.s) * k_s * separation
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoopParams {
    pub n_agents: usize,
    pub k_s: f64,
    pub gamma_threshold: f64,
    pub separation_threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoopState {
    my_index: usize,
    params: CoopParams,
    spacing: f64,
    flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoopOutput {
    pub v_correction: f64,
    pub neighbour: Option<usize>,
    pub separation: Option<f64>,
    pub packet: AgentPacket,
}

impl CoopState {
    pub fn new(my_index: usize, params: CoopParams) -> Result<Self> {
        if params.n_agents == 0 || params.n_agents > u8::MAX as usize {
            return Err(Error::config("n_a", format!("{} agents not supported (1..=255)", params.n_agents)));
        }
        if !(1..=params.n_agents).contains(&my_index) {
            return Err(Error::config("agent_index", format!("{my_index} outside 1..={}", params.n_agents)));
        }
        Ok(Self {
            my_index,
            spacing: TAU / params.n_agents as f64,
            params,
            flags: Flags::default(),
        })
    }

    pub fn index(&self) -> usize {
        self.my_index
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// One pass of the cooperation protocol for this agent.
    ///
    /// The agent's own table entry is refreshed from `coords` first; if any
    /// peer has not been heard from yet, only the on-orbit flag can change.
    pub fn step(&mut self, table: &mut PeerTable, coords: &OrbitCoords, axes: &EllipseAxes) -> CoopOutput {
        let me = self.my_index;
        let my_s = coords.s;

        if (coords.gamma - 1.0).abs() < self.params.gamma_threshold {
            self.flags.on_orbit = true;
        }
        table.set(me, PeerEntry { s: my_s, flags: self.flags });

        let mut v_correction = 0.0;
        let mut neighbour = None;
        let mut separation = None;

        if let Some(params) = table.parameters() {
            let nb = find_neighbour(&params, me);
            let nb_entry = *table.get(nb).expect("all entries present");
            let ds = separation_error(my_s, nb_entry.s, self.spacing);
            neighbour = Some(nb);
            separation = Some(ds);

            if self.flags.on_orbit && nb_entry.flags.on_orbit {
                let close = ds.abs() < self.params.separation_threshold;
                if close && (nb == 1 || nb_entry.flags.ready) {
                    self.flags.ready = true;
                }
                if nb_entry.flags.height {
                    self.flags.height = true;
                }
                if me == 1 {
                    if nb_entry.flags.ready {
                        v_correction = correction_speed(ds, coords, axes, self.params.k_s);
                        self.flags.height = true;
                    }
                } else {
                    v_correction = correction_speed(ds, coords, axes, self.params.k_s);
                }
            }
            table.set(me, PeerEntry { s: my_s, flags: self.flags });
        }

        CoopOutput {
            v_correction,
            neighbour,
            separation,
            packet: AgentPacket {
                agent_index: me as u8,
                s: my_s,
                flags: self.flags,
            },
        }
    }
}
