#![allow(dead_code)]

pub mod ctl_oracle;
pub mod legacy;
