use sha2::{Digest, Sha256};

/// Seed for one sweep point: the first eight bytes of
/// SHA-256(master ‖ grid indices ‖ replicate), little-endian throughout.
///
/// Depends only on its arguments, so a point gets the same stream no matter
/// which worker runs it or in what order.
pub fn derive_seed(master: u64, grid_indices: &[usize], replicate: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(b"gated-kuramoto/point-seed");
    h.update(master.to_le_bytes());
    h.update((grid_indices.len() as u64).to_le_bytes());
    for &i in grid_indices {
        h.update((i as u64).to_le_bytes());
    }
    h.update((replicate as u64).to_le_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}
