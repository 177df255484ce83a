//! Routing algorithms.

mod adjust_window;
mod count_hop;
mod idle;
mod k_clique;
mod k_cycle;
mod k_subsets;
mod layout;
mod orchestra;
mod store;
mod token;

pub use adjust_window::{
    coded_transfer_bits, decode_coded_transfer, initial_window, main_listen_intervals, main_offsets, AdjustWindow,
    GossipRecord, WindowParams,
};
pub use count_hop::CountHop;
pub use idle::{Dormant, ListeningPair};
pub use k_clique::KClique;
pub use k_cycle::KCycle;
pub use k_subsets::{balanced_allocate, KSubsets, ThreadDiscipline};
pub use layout::{extract_schedule, ActivityLayout, GroupLayout, PairLayout, ThreadLayout, MAX_GAMMA};
pub use orchestra::Orchestra;
pub use store::{Held, PacketStore};
pub use token::RrwToken;
