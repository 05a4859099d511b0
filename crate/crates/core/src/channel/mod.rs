//! Multi-user channel realizations: synthetic generation and a binary file
//! format for importing externally produced channels.

mod file;
mod model;

pub use file::{decode, encode, load, save, MAGIC, VERSION};
pub use model::{
    generate, upa_steering_vector, ArrayGeometry, ChannelModel, ChannelModelConfig, ChannelRealization,
};
