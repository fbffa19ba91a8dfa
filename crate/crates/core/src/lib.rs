pub mod numeric;
pub mod jordan;
pub mod characters;
pub mod grassmann;
pub mod normal_form;
pub mod oracles;
pub mod integrands;
pub mod integrator;
pub mod hgs;
pub mod suite;
