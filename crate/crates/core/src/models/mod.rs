pub mod clock;
pub mod grid;
pub mod position;
pub mod qubits;
pub mod report;
pub mod spin_bath;
pub mod tables;
pub mod wcm;

pub use qubits::{
    four_qubit_family, four_qubit_scenario, two_qubit_family, two_qubit_scenario, FourQubitSpec,
    TwoQubitSpec,
};
pub use report::{Comparison, ParamValue, Quantity, ScenarioReport, Verdict};
pub use spin_bath::{
    bath_moments, coupling_distribution, spin_bath_family, spin_bath_scenario, spin_bath_uniqueness,
    trace_exact, trace_monte_carlo, uniform_configuration_factors, BathMode, MonteCarloEstimate,
    SpinBathSpec,
};
pub use grid::{uniform_grid, GridWavepacket};
pub use position::{
    branch_trace, coherent_matrix_element, gaussian_branch_trace, gaussian_moment_integral,
    object_state, position_family, position_scenario, CoherentPacket, PositionSpec,
};
pub use wcm::{
    coherent_overlap, coherent_state, coherent_tail, completion_time, premeasured_state,
    readout_states, wcm_scenario, FockSpec, ReadoutStates,
};
pub use clock::{clock_scenario, free_particle_clock, ClockReading, ClockSpec};
pub use tables::{paper_tables, PaperTable, RowCheck, TableOptions, TableRow};
