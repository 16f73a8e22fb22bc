//! Tick orchestration: convoy → planner → bus delivery → per-agent control →
//! integration → metrics.

use crate::cooperation::{AgentPacket, CoopParams, CoopState, Flags, PeerTable, PACKET_LEN};
use crate::error::{Error, Result};
use crate::geometry::{orbit_coords, Direction, OrbitSpec, Vec2};
use crate::guidance::{angular_rate_command, heading_command, GuidanceGains, GuidanceLaw};
use crate::planner::{ConvoySnapshot, OrbitPlanner, PlannerConfig};
use crate::speed::{compose_speed, nominal_speed, parametric_rate, SpeedEnvelope};

use super::convoy::ConvoyModel;
use super::unicycle::{altitude_step, unicycle_step, AgentState, Integrator};

/// Initial offset applied to an agent placed exactly on the orbit center.
const CENTER_NUDGE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub dt: f64,
    pub direction: Direction,
    pub gains: GuidanceGains,
    pub law: GuidanceLaw,
    pub coop: CoopParams,
    pub planner: PlannerConfig,
    pub envelope: SpeedEnvelope,
    pub k_z: f64,
    /// Common altitude commanded once the height flag is up.
    pub z_mission: f64,
    /// Altitude step between consecutive agents before formation.
    pub z_separation: f64,
    pub integrator: Integrator,
}

/// One agent's logged values for a tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentRecord {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub z: f64,
    pub v_cmd: f64,
    pub omega_cmd: f64,
    pub gamma: f64,
    pub s: f64,
    /// Spacing error to the current neighbour; 0 until every peer has been heard.
    pub ds: f64,
    pub flags: Flags,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub t: f64,
    pub agents: Vec<AgentRecord>,
    pub orbit: OrbitSpec,
    pub convoy: Vec<Vec2>,
}

#[derive(Debug, Clone)]
struct Agent {
    state: AgentState,
    coop: CoopState,
    table: PeerTable,
}

#[derive(Debug, Clone)]
pub struct World {
    params: SimParams,
    convoy: ConvoyModel,
    planner: OrbitPlanner,
    agents: Vec<Agent>,
    bus: Vec<[u8; PACKET_LEN]>,
    tick: u64,
}

impl World {
    /// `poses` are initial `(x, y, psi)` for agents `1..=N_A`.
    pub fn new(params: SimParams, convoy: ConvoyModel, poses: &[(f64, f64, f64)]) -> Result<Self> {
        if !(params.dt > 0.0) {
            return Err(Error::config("dt", "must be positive"));
        }
        if poses.len() != params.coop.n_agents {
            return Err(Error::config(
                "n_a",
                format!("{} initial poses for {} agents", poses.len(), params.coop.n_agents),
            ));
        }
        let planner = OrbitPlanner::new(params.planner, params.envelope)?;
        let first = convoy.positions(0.0);
        let centroid = first.iter().fold(Vec2::zeros(), |a, p| a + p) / first.len() as f64;

        let agents = poses
            .iter()
            .enumerate()
            .map(|(k, &(x, y, psi))| {
                let (x, y) = if x == centroid.x && y == centroid.y {
                    (x + CENTER_NUDGE, y)
                } else {
                    (x, y)
                };
                let z = params.z_mission + params.z_separation * k as f64;
                Ok(Agent {
                    state: AgentState::at_pose(x, y, psi, z),
                    coop: CoopState::new(k + 1, params.coop)?,
                    table: PeerTable::new(params.coop.n_agents),
                })
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            params,
            convoy,
            planner,
            agents,
            bus: Vec::new(),
            tick: 0,
        })
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * self.params.dt
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn agent_states(&self) -> Vec<AgentState> {
        self.agents.iter().map(|a| a.state).collect()
    }

    pub fn convoy(&self) -> &ConvoyModel {
        &self.convoy
    }

    /// Advances one control period and returns the record for its start time.
    pub fn step(&mut self) -> MetricsRecord {
        let p = self.params;
        let t = self.time();

        let positions = self.convoy.positions(t);
        let snapshot = ConvoySnapshot {
            positions: positions.clone(),
            tick: self.tick,
            dt: p.dt,
        };
        let orbit = self.planner.plan(&snapshot);
        let axes = orbit.axes;

        let n = self.agents.len();
        let inbox: Vec<AgentPacket> = self
            .bus
            .iter()
            .map(|frame| AgentPacket::decode(frame, n).expect("bus frames are produced by the agents"))
            .collect();

        let mut outgoing = Vec::with_capacity(n);
        let mut records = Vec::with_capacity(n);
        for agent in &mut self.agents {
            let me = agent.coop.index();
            for packet in inbox.iter().filter(|pk| pk.agent_index as usize != me) {
                agent.table.receive(packet);
            }

            let st = agent.state;
            let coords = orbit_coords(Vec2::new(st.x, st.y), &orbit, p.direction);
            let heading = heading_command(&coords, &axes, p.direction, &p.gains, p.law);
            let omega = angular_rate_command(heading.psi_d, st.psi, orbit.tilt, &p.gains);
            let coop = agent.coop.step(&mut agent.table, &coords, &axes);
            let s_v = parametric_rate(&p.envelope, &axes, coords.gamma);
            let v_nominal = nominal_speed(coords.s, coords.gamma, &axes, s_v);
            let v = compose_speed(v_nominal, coop.v_correction, st.psi, orbit.center_velocity, &p.envelope);

            let flags = agent.coop.flags();
            let z_cmd = if flags.height {
                p.z_mission
            } else {
                p.z_mission + p.z_separation * (me - 1) as f64
            };

            records.push(AgentRecord {
                x: st.x,
                y: st.y,
                psi: st.psi,
                z: st.z,
                v_cmd: v,
                omega_cmd: omega,
                gamma: coords.gamma,
                s: coords.s,
                ds: coop.separation.unwrap_or(0.0),
                flags,
            });

            let mut next = unicycle_step(&st, v, omega, p.dt, p.integrator);
            next.z_cmd = z_cmd;
            next.z = altitude_step(st.z, z_cmd, p.k_z, p.dt, p.integrator);
            agent.state = next;
            outgoing.push(coop.packet.encode());
        }

        self.bus = outgoing;
        self.tick += 1;
        MetricsRecord {
            t,
            agents: records,
            orbit,
            convoy: positions,
        }
    }
}
