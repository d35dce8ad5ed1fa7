#![allow(dead_code)]

pub mod golden;
pub mod latex;
pub mod oracles;
pub mod props;
