#![allow(dead_code)]

pub mod per_node;
