//! Observability analysis for polynomial dynamical systems on directed,
//! weighted hypergraphs.

pub mod groebner;
pub mod linalg;
pub mod poly;
pub mod tensor;
pub mod global;
pub mod simulate;
pub mod system;
pub mod io;
pub mod structural;
pub mod local;
pub mod design;
