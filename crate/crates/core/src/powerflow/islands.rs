use super::LineStatus;
use crate::scenario::NetworkIndex;

/// A bus is energized iff every edge on its path to the source is closed.
pub fn compute_islands(network: &NetworkIndex, statuses: &[LineStatus]) -> Vec<bool> {
    let mut energized = vec![false; network.buses.len()];
    for &b in &network.order {
        energized[b] = match network.parent_edge[b] {
            None => true,
            Some(e) => statuses[e] == LineStatus::Closed && energized[network.edges[e].from],
        };
    }
    energized
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SwitchError {
    #[error("no line, switch or fuse named '{0}'")]
    UnknownEdge(String),
    #[error("'{0}' is not a line, switch or fuse")]
    NotSwitchable(String),
}

/// A network index with mutable branch statuses and lazily recomputed
/// islands.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub index: NetworkIndex,
    status: Vec<LineStatus>,
    energized: Option<Vec<bool>>,
}

impl Network {
    pub fn new(index: NetworkIndex) -> Self {
        let status = index.edges.iter().map(|e| e.initial_status).collect();
        Network {
            index,
            status,
            energized: None,
        }
    }

    pub fn statuses(&self) -> &[LineStatus] {
        &self.status
    }

    pub fn status_of(&self, name: &str) -> Option<LineStatus> {
        self.index.edge(name).map(|e| self.status[e])
    }

    /// Sets a line, switch or fuse. Transformers and implicit parent links
    /// cannot be switched.
    pub fn set_line_status(&mut self, name: &str, status: LineStatus) -> Result<(), SwitchError> {
        let e = self
            .index
            .edge(name)
            .ok_or_else(|| SwitchError::UnknownEdge(name.to_string()))?;
        if !self.index.edges[e].is_switchable() {
            return Err(SwitchError::NotSwitchable(name.to_string()));
        }
        if self.status[e] != status {
            self.status[e] = status;
            self.energized = None;
        }
        Ok(())
    }

    pub fn energized(&mut self) -> &[bool] {
        if self.energized.is_none() {
            self.energized = Some(compute_islands(&self.index, &self.status));
        }
        self.energized.as_deref().unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{build_network_index, parse_scenario};

    fn network() -> Network {
        let m = parse_scenario(
            "object node { name n1; bustype SWING; nominal_voltage 7200 V; }
             object node { name n2; nominal_voltage 7200 V; }
             object node { name n3; nominal_voltage 7200 V; }
             object triplex_node { name t3; nominal_voltage 240 V; }
             object underground_line { name l1; from n1; to n2; impedance 1+1j Ohm; }
             object switch { name s2; from n2; to n3; }
             object transformer { name x3; from n3; to t3; ratio 30; }",
        )
        .unwrap();
        Network::new(build_network_index(&m).unwrap())
    }

    #[test]
    fn all_closed_all_energized() {
        let mut n = network();
        assert!(n.energized().iter().all(|e| *e));
    }

    #[test]
    fn root_edge_open_leaves_source_only() {
        let mut n = network();
        n.set_line_status("l1", LineStatus::Open).unwrap();
        assert_eq!(n.energized(), &[true, false, false, false]);
    }

    #[test]
    fn open_close_restores_and_is_idempotent() {
        let mut n = network();
        let before = n.energized().to_vec();
        n.set_line_status("s2", LineStatus::Open).unwrap();
        let opened = n.energized().to_vec();
        n.set_line_status("s2", LineStatus::Open).unwrap();
        assert_eq!(n.energized(), opened.as_slice());
        n.set_line_status("s2", LineStatus::Closed).unwrap();
        assert_eq!(n.energized(), before.as_slice());
    }

    #[test]
    fn transformers_are_not_switchable() {
        let mut n = network();
        assert_eq!(
            n.set_line_status("x3", LineStatus::Open),
            Err(SwitchError::NotSwitchable("x3".into()))
        );
        assert_eq!(
            n.set_line_status("nope", LineStatus::Open),
            Err(SwitchError::UnknownEdge("nope".into()))
        );
    }
}
