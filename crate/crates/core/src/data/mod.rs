//! Synthetic phantoms, coil sensitivity simulation and file formats.
//!
//! * `.kspd`: one JSON header line followed by little-endian `f32` pairs
//!   `(re, im)` ordered item → coil → frame → ky → kx.
//! * `.mask`: one JSON header line followed by one ascending point index per
//!   line.
//! * `.pgm`: binary 8-bit greymaps for masks and maps.

mod kspd;
mod mask;
mod pgm;
mod phantom;
mod sensitivity;

pub use kspd::{
    decode_kspd, encode_kspd, read_dataset, read_images, read_kspd, read_sensitivities,
    write_dataset, write_images, write_kspd, write_sensitivities, Content, KspdDims, KspdFile,
    KspdHeader, KSPD_MAGIC,
};
pub use mask::{
    mask_from_pgm, mask_to_pgm, parse_mask, read_mask, render_mask, write_mask, MaskHeader,
};
pub use pgm::{decode_pgm, encode_pgm, fftshift, ifftshift};
pub use phantom::{generate_phantom_dataset, Phantom, PhantomConfig, PhantomShape};
pub use sensitivity::simulate_sensitivities;
