//! Independent reference implementations shared by the test targets.

#![allow(dead_code, clippy::if_same_then_else, clippy::needless_range_loop)]

pub mod cart;
pub mod controller;
pub mod kinematics;
