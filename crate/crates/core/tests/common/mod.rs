#![allow(dead_code)]

pub mod itp;
pub mod mie;
