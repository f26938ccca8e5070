//! Small example networks used in tests, docs, and the CLI test-bed.

use crate::network::{EdgeRecord, Network, StateRecord};

/// Seven wells connected by nine saddles. The barrier ordering makes the surgery emit
/// sinks 1,2,7,5,6,3,4 with cuts (1,2),(3,7),(4,5),(5,6),(2,3),(3,4); its six-edge
/// minimum spanning tree is {(1,2),(2,3),(3,4),(3,7),(4,5),(5,6)}.
pub fn seven_well() -> Network {
    let potentials = [0.0, 1.0, 2.6, 3.3, 1.7, 2.2, 1.9];
    let states = potentials
        .iter()
        .enumerate()
        .map(|(i, &v)| StateRecord::new(i as u32 + 1, v))
        .collect();
    let edges = vec![
        EdgeRecord::new(1, 2, 6.1),
        EdgeRecord::new(2, 3, 4.1),
        EdgeRecord::new(3, 4, 4.55),
        EdgeRecord::new(4, 5, 5.3),
        EdgeRecord::new(5, 6, 4.9),
        EdgeRecord::new(3, 7, 6.8),
        EdgeRecord::new(6, 7, 7.2),
        EdgeRecord::new(1, 3, 6.5),
        EdgeRecord::new(4, 6, 5.7),
    ];
    Network::new(states, edges).expect("fixture is valid")
}

/// Three states in a chain: V = (0, 1, 2), saddles V_12 = 3, V_23 = 4.5.
pub fn three_chain() -> Network {
    Network::new(
        vec![
            StateRecord::new(1, 0.0),
            StateRecord::new(2, 1.0),
            StateRecord::new(3, 2.0),
        ],
        vec![EdgeRecord::new(1, 2, 3.0), EdgeRecord::new(2, 3, 4.5)],
    )
    .expect("fixture is valid")
}

/// Two states over one saddle: V = (0, 1), V_12 = 2.
pub fn two_state() -> Network {
    Network::new(
        vec![StateRecord::new(1, 0.0), StateRecord::new(2, 1.0)],
        vec![EdgeRecord::new(1, 2, 2.0)],
    )
    .expect("fixture is valid")
}
