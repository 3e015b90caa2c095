pub mod classical;
pub mod cones;
pub mod conic;
pub mod error;
pub mod matcore;
pub mod ncnorm;
pub mod opsys;
pub mod paulsen;
pub mod random;
pub mod report;

pub use error::{Error, Result};

pub use classical::{ClassicalBaseSpace, ComplexPoint};
pub use cones::{BaseSpec, ConeKind, ConeProvider, Membership};
pub use matcore::{Field, HermMat, Mat, C64};
pub use ncnorm::{
    base_decompose, dual_order_unit_norm, is_base_morphism, nc_base_norm, nc_base_norm_sa, BaseDecomposition, LinearMap,
    NormResult,
};
pub use opsys::{make_opsys, DualElement, Element, OperatorSystem, SysElement};
pub use paulsen::{build_paulsen, OperatorSpaceRep, PaulsenSystem};
pub use report::{CheckRecord, Report, Status};
