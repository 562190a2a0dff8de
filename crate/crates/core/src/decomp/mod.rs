//! Factored tensor models: CP, Tucker, tensor train and tensor ring.

mod cp;
mod store;
mod tr;
mod tt;
mod tucker;

pub use cp::{cp_als, cp_reconstruct, CpFit, CpModel, CpOptions};
pub use store::{load_model, save_model, Model, MANIFEST};
pub use tr::{tr_reconstruct, TrRing};
pub use tt::{tt_contract, tt_orthogonalize, tt_reconstruct, tt_split, tt_svd, TtSvd, TtTrain};
pub use tucker::{hosvd, truncated_hosvd, tucker_orthogonalize, tucker_reconstruct, TuckerModel};
