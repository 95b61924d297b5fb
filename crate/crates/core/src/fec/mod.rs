//! Channel codes: LTE tail-biting convolutional code and NR polar code.

pub mod polar;
mod reliability;
pub mod tbcc;

pub use polar::{
    polar_construct, polar_decode, polar_encode, polar_transform, PolarConfig, PolarDecoded,
};
pub use tbcc::{tbcc_decode, tbcc_decode_path, tbcc_encode, TbccConfig, TbccPath};
