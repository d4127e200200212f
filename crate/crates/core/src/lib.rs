pub mod align;
pub mod analysis;
pub mod corpus;
pub mod fewshot;
pub mod linggraph;
pub mod model;
pub mod synthetic;
