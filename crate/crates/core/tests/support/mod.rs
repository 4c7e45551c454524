#![allow(dead_code)]

pub mod cut_oracle;
