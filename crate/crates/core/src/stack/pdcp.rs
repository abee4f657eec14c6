/// PDCP reduced to sequence numbering; no ciphering, no discard timer.
#[derive(Clone, Debug, Default)]
pub struct PdcpEntity {
    next_sn: u32,
}

impl PdcpEntity {
    pub const SN_MODULUS: u32 = 1 << 12;

    pub fn new() -> Self {
        Self::default()
    }

    /// Assigns the next PDCP SN.
    pub fn submit(&mut self) -> u32 {
        let sn = self.next_sn;
        self.next_sn = (self.next_sn + 1) % Self::SN_MODULUS;
        sn
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wraps() {
        let mut p = PdcpEntity::new();
        let sns: Vec<u32> = (0..PdcpEntity::SN_MODULUS + 2).map(|_| p.submit()).collect();
        assert_eq!(sns[0], 0);
        assert_eq!(sns[PdcpEntity::SN_MODULUS as usize], 0);
        assert_eq!(sns[PdcpEntity::SN_MODULUS as usize + 1], 1);
    }
}
