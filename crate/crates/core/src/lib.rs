pub mod equivalence;
pub mod inverse;
pub mod io;
pub mod linalg;
pub mod monodromy;
pub mod system;
