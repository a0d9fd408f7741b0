//! Gate-level stochastic logic simulation for spintronic (all-spin logic)
//! datapaths, with delay shaping and statistical error compensation.
//!
//! The pipeline runs bottom-up: [`device_model`] turns a gate's energy and
//! delay into a switching error rate, [`noisy_sim`] injects those errors into
//! a [`netlist`], [`delay_shaping`] reshapes per-gate delays so the resulting
//! arithmetic error is sparse, and [`sisc`] corrects it with a cheap
//! estimator plus a fusion block. [`svm_bench`] ties it together on a
//! fixed-point linear classifier.

pub mod arith_gen;
pub mod delay_shaping;
pub mod device_model;
pub mod harness;
pub mod netlist;
pub mod noisy_sim;
pub mod sisc;
pub mod stats;
pub mod svm_bench;
