use num_complex::Complex64;

use super::{compute_islands, LineStatus, MAX_ITERATIONS, S_BASE, TOLERANCE_PU};
use crate::scenario::NetworkIndex;

/// Constant complex power at a bus, VA. Positive is consumption.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadInjection {
    pub node: String,
    pub power: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    /// Volts per bus; zero when de-energized.
    pub voltages: Vec<Complex64>,
    /// Amps per edge at its downstream end; zero when open or dead.
    pub currents: Vec<Complex64>,
    pub status: Vec<LineStatus>,
    pub energized: Vec<bool>,
    pub iterations: usize,
    /// VA delivered by the source.
    pub source_power: Complex64,
    /// VA consumed by energized loads.
    pub load_power: Complex64,
    /// VA dissipated in series impedances.
    pub losses: Complex64,
}

impl NetworkState {
    pub fn edge_losses(&self, index: &NetworkIndex, e: usize) -> Complex64 {
        self.currents[e].norm_sqr() * index.edges[e].impedance
    }

    /// `|S_source − S_loads − S_losses|` in per-unit of the system base.
    pub fn balance_residual_pu(&self) -> f64 {
        (self.source_power - self.load_power - self.losses).norm() / S_BASE
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("power flow did not converge in {iterations} iterations (worst update {worst_residual_pu:.3e} pu)")]
pub struct SolverDivergence {
    pub iterations: usize,
    pub worst_residual_pu: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PowerflowError {
    #[error("load attached to unknown bus '{0}'")]
    UnknownNode(String),
    #[error(transparent)]
    Divergence(#[from] SolverDivergence),
}

/// Solves with loads given by bus name.
pub fn solve_powerflow(
    network: &NetworkIndex,
    statuses: &[LineStatus],
    loads: &[LoadInjection],
) -> Result<NetworkState, PowerflowError> {
    let mut per_bus = vec![Complex64::new(0.0, 0.0); network.buses.len()];
    for l in loads {
        let b = network
            .bus(&l.node)
            .ok_or_else(|| PowerflowError::UnknownNode(l.node.clone()))?;
        per_bus[b] += l.power;
    }
    Ok(solve_bus_loads(network, statuses, &per_bus)?)
}

/// Forward-back sweep from a flat start. `bus_loads` is VA per bus; loads on
/// de-energized buses are ignored.
pub fn solve_bus_loads(
    network: &NetworkIndex,
    statuses: &[LineStatus],
    bus_loads: &[Complex64],
) -> Result<NetworkState, SolverDivergence> {
    let n = network.buses.len();
    let zero = Complex64::new(0.0, 0.0);
    let energized = compute_islands(network, statuses);
    let live = |e: usize| statuses[e] == LineStatus::Closed && energized[network.edges[e].from];

    let source = Complex64::new(network.buses[network.root].nominal_voltage, 0.0);
    let mut v = vec![zero; n];
    for &b in &network.order {
        v[b] = match network.parent_edge[b] {
            None => source,
            Some(e) if energized[b] => v[network.edges[e].from] / network.edges[e].ratio,
            Some(_) => zero,
        };
    }
    let base: Vec<f64> = v
        .iter()
        .map(|x| if x.norm() > 0.0 { x.norm() } else { 1.0 })
        .collect();

    let mut currents = vec![zero; network.edges.len()];
    let mut injected = vec![zero; n];
    let mut iterations = 0;
    let mut worst = f64::INFINITY;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        // Backward: accumulate currents toward the source.
        for &b in network.order.iter().rev() {
            if !energized[b] {
                injected[b] = zero;
                continue;
            }
            let mut i = (bus_loads[b] / v[b]).conj();
            for &e in &network.children[b] {
                if live(e) {
                    i += currents[e] / network.edges[e].ratio;
                }
            }
            injected[b] = i;
            if let Some(e) = network.parent_edge[b] {
                currents[e] = i;
            }
        }
        for (e, c) in currents.iter_mut().enumerate() {
            if !live(e) {
                *c = zero;
            }
        }
        // Forward: update voltages away from the source.
        worst = 0.0;
        for &b in &network.order {
            let Some(e) = network.parent_edge[b] else {
                continue;
            };
            if !energized[b] {
                continue;
            }
            let edge = &network.edges[e];
            let next = v[edge.from] / edge.ratio - edge.impedance * currents[e];
            worst = worst.max((next - v[b]).norm() / base[b]);
            v[b] = next;
        }
        if !worst.is_finite() {
            break;
        }
        if worst < TOLERANCE_PU {
            let load_power = (0..n).filter(|&b| energized[b]).map(|b| bus_loads[b]).sum();
            let losses = currents
                .iter()
                .zip(&network.edges)
                .map(|(i, e)| i.norm_sqr() * e.impedance)
                .sum();
            return Ok(NetworkState {
                source_power: source * injected[network.root].conj(),
                voltages: v,
                currents,
                status: statuses.to_vec(),
                energized,
                iterations,
                load_power,
                losses,
            });
        }
    }
    Err(SolverDivergence {
        iterations,
        worst_residual_pu: worst,
    })
}
