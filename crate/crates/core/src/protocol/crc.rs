//! CRC-8, polynomial 0x07, init 0x00, MSB first, no final xor.

const POLY: u8 = 0x07;

const TABLE: [u8; 256] = {
    let mut table = [0u8; 256];
    let mut i = 0;
    while i < 256 {
        let mut c = i as u8;
        let mut bit = 0;
        while bit < 8 {
            c = if c & 0x80 != 0 {
                (c << 1) ^ POLY
            } else {
                c << 1
            };
            bit += 1;
        }
        table[i] = c;
        i += 1;
    }
    table
};

/// Incremental form: feed `crc8_update(crc8_update(0, a), b)` to checksum
/// `a || b`.
pub fn crc8_update(crc: u8, bytes: &[u8]) -> u8 {
    bytes.iter().fold(crc, |c, &b| TABLE[(c ^ b) as usize])
}

pub fn crc8(bytes: &[u8]) -> u8 {
    crc8_update(0, bytes)
}
