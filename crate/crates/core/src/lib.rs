//! Reaction-diffusion with the discrete p-Laplacian on weighted networks.
//!
//! The crate covers the semilinear problem
//!
//! ```text
//! u_t = Δ_{p,ω} u + f(u)                 on the interior S
//! μ ∂u/∂_p n + σ |u|^{p−2} u = 0          on the boundary ∂S
//! ```
//!
//! from the graph up: [`network`] and [`operators`] define the discrete
//! setting, [`boundary`] closes states under the boundary condition,
//! [`eigen`] computes the first eigenpair, [`nonlinearity`] checks the
//! growth conditions on `f`, [`functionals`] evaluates the energies `A` and
//! `B`, and [`integrate`] runs the time evolution with blow-up detection.
//!
//! ```
//! use plap::boundary::BoundaryCondition;
//! use plap::integrate::{simulate, IntegratorConfig, Verdict};
//! use plap::network::load_network;
//! use plap::nonlinearity::Nonlinearity;
//! use plap::operators::{Exponent, State};
//!
//! let net = load_network(r#"{"vertices":[
//!     {"name":"z0","role":"boundary","mu":1,"sigma":0},
//!     {"name":"x1","role":"interior"},
//!     {"name":"z2","role":"boundary","mu":1,"sigma":0}],
//!   "edges":[{"a":"z0","b":"x1","w":1},{"a":"x1","b":"z2","w":1}]}"#).unwrap();
//! let bc = BoundaryCondition::neumann(&net);
//! let f = Nonlinearity::power(1.0, 2.0).unwrap();
//! let u0 = State::new(&net, vec![1.0; 3]).unwrap();
//! let p = Exponent::new(2.0).unwrap();
//! let report = simulate(&net, &bc, &f, &u0, p, &IntegratorConfig::default(), None).unwrap();
//! assert_eq!(report.verdict, Verdict::BlowUp);
//! assert!((report.t_star.unwrap().t_star - 1.0).abs() < 0.02);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod eigen;
pub mod error;
pub mod functionals;
pub mod integrate;
pub mod network;
pub mod nonlinearity;
pub mod operators;
pub mod roots;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/networks.md")]
    mod networks {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/boundary.md")]
    mod boundary {}
    #[doc = include_str!("../../../book/src/eigen.md")]
    mod eigen {}
    #[doc = include_str!("../../../book/src/conditions.md")]
    mod conditions {}
    #[doc = include_str!("../../../book/src/functionals.md")]
    mod functionals {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
