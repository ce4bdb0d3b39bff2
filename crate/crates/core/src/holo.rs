//! Compile chain circuits into holographic measure-and-repurpose schedules.
//!
//! A schedule runs an M-mode circuit on a fixed pool of physical slots by
//! measuring each logical mode as soon as its last gate has been applied,
//! resetting the freed slot, and rebinding it to the next pending logical
//! mode. Chain topologies need 2 slots for one beam-splitter layer and 3
//! for two layers, independent of M.
//!
//! Gates execute in dependency order: within one layer that is the chain
//! order (0,1), (1,2), ...; with two layers each second-layer gate (a, a+1)
//! runs right after the first-layer gate (a+1, a+2) it waits on. This
//! reorders only commuting gates (disjoint mode pairs) relative to the
//! layer-major listing, so the circuit unitary is unchanged.

use crate::mps::{BeamSplitterGate, MpsCircuit, MpsError};
use serde::{Deserialize, Serialize};
use std::fmt;

/// One step of a holographic run. Slot indices are physical; `logical`
/// records which circuit mode the slot currently hosts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Instruction {
    Squeeze {
        slot: usize,
        r: f64,
        logical: usize,
    },
    BeamSplit {
        slot_a: usize,
        slot_b: usize,
        theta: f64,
        phi: f64,
    },
    Measure {
        slot: usize,
        logical: usize,
    },
    Reset {
        slot: usize,
    },
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Squeeze { slot, r, logical } => {
                write!(f, "squeeze   slot{slot}  r={r:+.6}  (mode {logical})")
            }
            Instruction::BeamSplit {
                slot_a,
                slot_b,
                theta,
                phi,
            } => {
                write!(
                    f,
                    "beamsplit slot{slot_a},slot{slot_b}  theta={theta:+.6} phi={phi:+.6}"
                )
            }
            Instruction::Measure { slot, logical } => {
                write!(f, "measure   slot{slot}  -> mode {logical}")
            }
            Instruction::Reset { slot } => write!(f, "reset     slot{slot}"),
        }
    }
}

/// Compiled instruction stream plus slot bookkeeping.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HolographicSchedule {
    pub slot_count: usize,
    pub logical_mode_count: usize,
    pub instructions: Vec<Instruction>,
}

impl HolographicSchedule {
    /// One instruction per line.
    pub fn pretty(&self) -> String {
        let mut out = String::new();
        for inst in &self.instructions {
            out.push_str(&inst.to_string());
            out.push('\n');
        }
        out
    }

    /// Gates replayed against logical mode indices (slot bindings resolved),
    /// in execution order.
    pub fn replay_gates(&self) -> Vec<BeamSplitterGate> {
        let mut binding: Vec<Option<usize>> = vec![None; self.slot_count];
        let mut gates = Vec::new();
        for inst in &self.instructions {
            match *inst {
                Instruction::Squeeze { slot, logical, .. } => binding[slot] = Some(logical),
                Instruction::BeamSplit {
                    slot_a,
                    slot_b,
                    theta,
                    phi,
                } => gates.push(BeamSplitterGate {
                    mode_a: binding[slot_a].expect("gate on unbound slot"),
                    mode_b: binding[slot_b].expect("gate on unbound slot"),
                    theta,
                    phi,
                }),
                Instruction::Measure { slot, .. } => binding[slot] = None,
                Instruction::Reset { .. } => {}
            }
        }
        gates
    }
}

/// Gate execution order as indices into the layer-major gate list.
pub fn execution_order(circuit: &MpsCircuit) -> Vec<usize> {
    let per_layer = circuit.mode_count - 1;
    match circuit.layer_count() {
        1 => (0..per_layer).collect(),
        _ => {
            // Interleave: L1(a) then, once L1(a) has run, L2(a-1).
            let mut order = Vec::with_capacity(2 * per_layer);
            for a in 0..per_layer {
                order.push(a);
                if a >= 1 {
                    order.push(per_layer + a - 1);
                }
            }
            order.push(2 * per_layer - 1);
            order
        }
    }
}

/// Compile the circuit with bound parameters into a schedule.
pub fn compile_schedule(
    circuit: &MpsCircuit,
    theta: &[f64],
    phi: &[f64],
) -> Result<HolographicSchedule, MpsError> {
    if !(1..=2).contains(&circuit.layer_count()) {
        return Err(MpsError::BadLayerCount(circuit.layer_count()));
    }
    let bound = circuit.bind(theta, phi)?;
    let gates: Vec<BeamSplitterGate> = bound.gates().copied().collect();
    let order = execution_order(circuit);
    let m = circuit.mode_count;

    // Last gate (in execution order) touching each logical mode.
    let mut last_use = vec![0usize; m];
    for (pos, &gate_idx) in order.iter().enumerate() {
        let g = gates[gate_idx];
        last_use[g.mode_a] = pos;
        last_use[g.mode_b] = pos;
    }

    let mut instructions = Vec::new();
    let mut slot_of: Vec<Option<usize>> = vec![None; m];
    let mut slot_used: Vec<bool> = Vec::new(); // ever bound before
    let mut free_slots: Vec<usize> = Vec::new();

    let bind = |mode: usize,
                    instructions: &mut Vec<Instruction>,
                    slot_of: &mut Vec<Option<usize>>,
                    slot_used: &mut Vec<bool>,
                    free_slots: &mut Vec<usize>,
                    r: f64| {
        if slot_of[mode].is_some() {
            return;
        }
        let slot = if let Some(&s) = free_slots.iter().min() {
            free_slots.retain(|&x| x != s);
            instructions.push(Instruction::Reset { slot: s });
            s
        } else {
            slot_used.push(true);
            slot_used.len() - 1
        };
        instructions.push(Instruction::Squeeze {
            slot,
            r,
            logical: mode,
        });
        slot_of[mode] = Some(slot);
    };

    for (pos, &gate_idx) in order.iter().enumerate() {
        let g = gates[gate_idx];
        for mode in [g.mode_a, g.mode_b] {
            bind(
                mode,
                &mut instructions,
                &mut slot_of,
                &mut slot_used,
                &mut free_slots,
                circuit.squeeze_params[mode],
            );
        }
        instructions.push(Instruction::BeamSplit {
            slot_a: slot_of[g.mode_a].unwrap(),
            slot_b: slot_of[g.mode_b].unwrap(),
            theta: g.theta,
            phi: g.phi,
        });
        for mode in [g.mode_a, g.mode_b] {
            if last_use[mode] == pos {
                let slot = slot_of[mode].take().unwrap();
                instructions.push(Instruction::Measure {
                    slot,
                    logical: mode,
                });
                free_slots.push(slot);
            }
        }
    }

    Ok(HolographicSchedule {
        slot_count: slot_used.len(),
        logical_mode_count: m,
        instructions,
    })
}

/// Maximum number of simultaneously live (bound, unmeasured) slots.
pub fn peak_slots(schedule: &HolographicSchedule) -> usize {
    let mut live = vec![false; schedule.slot_count];
    let mut peak = 0;
    for inst in &schedule.instructions {
        match *inst {
            Instruction::Squeeze { slot, .. } => live[slot] = true,
            Instruction::Measure { slot, .. } => live[slot] = false,
            _ => {}
        }
        peak = peak.max(live.iter().filter(|&&l| l).count());
    }
    peak
}
