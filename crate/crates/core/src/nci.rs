//! NR Cell Global Identity with a 2-bit gNB type subfield.
//!
//! The 36-bit NCI is split into a gNB ID field (the top `gnb_id_bits` bits)
//! and a cell ID field (the rest). At the default 22-bit gNB ID width the
//! top two bits of the gNB ID field carry the base-station tier:
//!
//! ```text
//!  35 34 33                 14 13            0
//! +-----+---------------------+---------------+
//! |type |   gNB ID (20 bit)   | cell ID (14)  |
//! +-----+---------------------+---------------+
//! ```
//!
//! Any other gNB ID width decodes with [`GnbType::Reserved`].

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Width of the NR cell identity in bits.
pub const NCI_BITS: u32 = 36;
/// The only gNB ID width for which the type subfield is defined.
pub const TYPED_GNB_ID_BITS: u8 = 22;
pub const MIN_GNB_ID_BITS: u8 = 22;
pub const MAX_GNB_ID_BITS: u8 = 32;

const TYPE_SHIFT: u32 = 34;
const GNB_ID_BITS_TYPED: u32 = 20;
const CELL_ID_BITS_TYPED: u32 = 14;

pub const NCI_MAX: u64 = (1 << NCI_BITS) - 1;
pub const PLMN_MAX: u32 = (1 << 24) - 1;
pub const GNB_ID_MAX: u32 = (1 << GNB_ID_BITS_TYPED) - 1;
pub const CELL_ID_MAX: u32 = (1 << CELL_ID_BITS_TYPED) - 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NciError {
    #[error("{field} value {value} exceeds its {width}-bit field")]
    Range {
        field: &'static str,
        value: u64,
        width: u32,
    },
    #[error("gNB ID width {0} outside [22, 32]")]
    GnbIdWidth(u8),
    #[error("malformed NCGI at byte {offset}: {reason}")]
    Parse { offset: usize, reason: String },
}

/// Base-station tier carried in the top two bits of a 22-bit gNB ID.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GnbType {
    Macro,
    SmallSub6,
    MmWave,
    /// Code `11`, unassigned. Never eligible as a handover target.
    Reserved,
}

impl GnbType {
    pub const ALL: [GnbType; 4] = [
        GnbType::Macro,
        GnbType::SmallSub6,
        GnbType::MmWave,
        GnbType::Reserved,
    ];

    pub const fn code(self) -> u8 {
        match self {
            GnbType::Macro => 0b00,
            GnbType::SmallSub6 => 0b01,
            GnbType::MmWave => 0b10,
            GnbType::Reserved => 0b11,
        }
    }

    /// Maps the low two bits of `code`; higher bits are ignored.
    pub const fn from_code(code: u8) -> Self {
        match code & 0b11 {
            0b00 => GnbType::Macro,
            0b01 => GnbType::SmallSub6,
            0b10 => GnbType::MmWave,
            _ => GnbType::Reserved,
        }
    }

    pub const fn as_str(self) -> &'static str {
        match self {
            GnbType::Macro => "macro",
            GnbType::SmallSub6 => "small",
            GnbType::MmWave => "mmwave",
            GnbType::Reserved => "reserved",
        }
    }
}

impl fmt::Display for GnbType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Fields of a decoded NCI.
///
/// For the typed 22-bit layout `gnb_id` is the 20-bit per-type identity. For
/// wider gNB ID fields it holds the whole field and `gnb_type` is `Reserved`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DecodedNci {
    pub gnb_type: GnbType,
    pub gnb_id: u32,
    pub cell_id: u32,
    pub gnb_id_bits: u8,
}

impl DecodedNci {
    /// Packs the fields back into the 36-bit word they were decoded from.
    pub fn to_raw(&self) -> u64 {
        let cell_bits = NCI_BITS - u32::from(self.gnb_id_bits);
        if self.gnb_id_bits == TYPED_GNB_ID_BITS {
            (u64::from(self.gnb_type.code()) << TYPE_SHIFT)
                | (u64::from(self.gnb_id) << cell_bits)
                | u64::from(self.cell_id)
        } else {
            (u64::from(self.gnb_id) << cell_bits) | u64::from(self.cell_id)
        }
    }
}

/// Encodes a typed NCI with the default 22-bit gNB ID layout.
pub fn encode_nci(gnb_type: GnbType, gnb_id: u32, cell_id: u32) -> Result<u64, NciError> {
    if gnb_id > GNB_ID_MAX {
        return Err(NciError::Range {
            field: "gnb_id",
            value: gnb_id.into(),
            width: GNB_ID_BITS_TYPED,
        });
    }
    if cell_id > CELL_ID_MAX {
        return Err(NciError::Range {
            field: "cell_id",
            value: cell_id.into(),
            width: CELL_ID_BITS_TYPED,
        });
    }
    Ok((u64::from(gnb_type.code()) << TYPE_SHIFT)
        | (u64::from(gnb_id) << CELL_ID_BITS_TYPED)
        | u64::from(cell_id))
}

pub fn decode_nci(raw: u64, gnb_id_bits: u8) -> Result<DecodedNci, NciError> {
    if raw > NCI_MAX {
        return Err(NciError::Range {
            field: "nci",
            value: raw,
            width: NCI_BITS,
        });
    }
    if !(MIN_GNB_ID_BITS..=MAX_GNB_ID_BITS).contains(&gnb_id_bits) {
        return Err(NciError::GnbIdWidth(gnb_id_bits));
    }
    let cell_bits = NCI_BITS - u32::from(gnb_id_bits);
    let cell_id = (raw & ((1u64 << cell_bits) - 1)) as u32;
    let gnb_field = (raw >> cell_bits) as u32;
    if gnb_id_bits == TYPED_GNB_ID_BITS {
        Ok(DecodedNci {
            gnb_type: gnb_type_of(raw),
            gnb_id: gnb_field & GNB_ID_MAX,
            cell_id,
            gnb_id_bits,
        })
    } else {
        Ok(DecodedNci {
            gnb_type: GnbType::Reserved,
            gnb_id: gnb_field,
            cell_id,
            gnb_id_bits,
        })
    }
}

/// Reads bits [35:34]. Bits above 35 are ignored.
#[inline]
pub fn gnb_type_of(raw: u64) -> GnbType {
    GnbType::from_code(((raw >> TYPE_SHIFT) & 0b11) as u8)
}

/// NR Cell Global Identity: opaque PLMN container plus the 36-bit NCI.
///
/// Ordering is by `(nci, plmn, gnb_id_bits)`, so the lowest raw NCI sorts first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ncgi {
    nci: u64,
    plmn: u32,
    gnb_id_bits: u8,
}

impl Ncgi {
    pub fn new(plmn: u32, nci: u64, gnb_id_bits: u8) -> Result<Self, NciError> {
        if plmn > PLMN_MAX {
            return Err(NciError::Range {
                field: "plmn",
                value: plmn.into(),
                width: 24,
            });
        }
        // validates nci and width
        decode_nci(nci, gnb_id_bits)?;
        Ok(Self {
            nci,
            plmn,
            gnb_id_bits,
        })
    }

    /// Builds an identity in the typed 22-bit layout.
    pub fn typed(plmn: u32, gnb_type: GnbType, gnb_id: u32, cell_id: u32) -> Result<Self, NciError> {
        let nci = encode_nci(gnb_type, gnb_id, cell_id)?;
        Self::new(plmn, nci, TYPED_GNB_ID_BITS)
    }

    pub fn plmn(&self) -> u32 {
        self.plmn
    }

    pub fn nci(&self) -> u64 {
        self.nci
    }

    pub fn gnb_id_bits(&self) -> u8 {
        self.gnb_id_bits
    }

    /// Tier as read from the identity bits alone.
    pub fn gnb_type(&self) -> GnbType {
        if self.gnb_id_bits == TYPED_GNB_ID_BITS {
            gnb_type_of(self.nci)
        } else {
            GnbType::Reserved
        }
    }

    pub fn decode(&self) -> DecodedNci {
        decode_nci(self.nci, self.gnb_id_bits).expect("validated on construction")
    }
}

/// Canonical text: `PLMN:xxxxxx/TYPE:tt/GNB:d/CELL:d`.
///
/// Identities with a non-default gNB ID width get a `/BITS:n` suffix and
/// carry the whole gNB ID field in `GNB`.
pub fn format_ncgi(ncgi: &Ncgi) -> String {
    let d = ncgi.decode();
    let mut s = format!(
        "PLMN:{:06X}/TYPE:{:02b}/GNB:{}/CELL:{}",
        ncgi.plmn,
        d.gnb_type.code(),
        d.gnb_id,
        d.cell_id
    );
    if ncgi.gnb_id_bits != TYPED_GNB_ID_BITS {
        s.push_str(&format!("/BITS:{}", ncgi.gnb_id_bits));
    }
    s
}

pub fn parse_ncgi(text: &str) -> Result<Ncgi, NciError> {
    let mut p = Cursor { text, pos: 0 };
    p.expect("PLMN:")?;
    let plmn_at = p.pos;
    let plmn_txt = p.take_while(|c| c.is_ascii_hexdigit());
    if plmn_txt.len() != 6 {
        return Err(p.error_at(plmn_at, "PLMN must be exactly 6 hex digits"));
    }
    let plmn = u32::from_str_radix(plmn_txt, 16).expect("6 hex digits fit u32");

    p.expect("/TYPE:")?;
    let type_at = p.pos;
    let type_txt = p.take_while(|c| c == '0' || c == '1');
    if type_txt.len() != 2 || p.peek().is_some_and(|c| c.is_ascii_digit()) {
        return Err(p.error_at(type_at, "TYPE must be exactly 2 binary digits"));
    }
    let type_code = u8::from_str_radix(type_txt, 2).expect("2 binary digits");

    p.expect("/GNB:")?;
    let gnb_id = p.decimal("GNB")?;
    p.expect("/CELL:")?;
    let cell_id = p.decimal("CELL")?;

    let mut gnb_id_bits = TYPED_GNB_ID_BITS;
    if !p.at_end() {
        p.expect("/BITS:")?;
        let bits_at = p.pos;
        let bits = p.decimal("BITS")?;
        if !(u64::from(MIN_GNB_ID_BITS)..=u64::from(MAX_GNB_ID_BITS)).contains(&bits)
            || bits == u64::from(TYPED_GNB_ID_BITS)
        {
            return Err(p.error_at(bits_at, "BITS must be in [23, 32]"));
        }
        gnb_id_bits = bits as u8;
        if type_code != GnbType::Reserved.code() {
            return Err(p.error_at(type_at, "TYPE must be 11 for non-default gNB ID width"));
        }
    }
    if !p.at_end() {
        return Err(p.error_at(p.pos, "trailing characters"));
    }

    let cell_bits = NCI_BITS - u32::from(gnb_id_bits);
    let gnb_width = if gnb_id_bits == TYPED_GNB_ID_BITS {
        GNB_ID_BITS_TYPED
    } else {
        u32::from(gnb_id_bits)
    };
    if gnb_id >= 1u64 << gnb_width {
        return Err(NciError::Range {
            field: "gnb_id",
            value: gnb_id,
            width: gnb_width,
        });
    }
    if cell_id >= 1u64 << cell_bits {
        return Err(NciError::Range {
            field: "cell_id",
            value: cell_id,
            width: cell_bits,
        });
    }
    let decoded = DecodedNci {
        gnb_type: GnbType::from_code(type_code),
        gnb_id: gnb_id as u32,
        cell_id: cell_id as u32,
        gnb_id_bits,
    };
    Ncgi::new(plmn, decoded.to_raw(), gnb_id_bits)
}

impl fmt::Display for Ncgi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_ncgi(self))
    }
}

impl FromStr for Ncgi {
    type Err = NciError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_ncgi(s)
    }
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn at_end(&self) -> bool {
        self.pos >= self.text.len()
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn error_at(&self, offset: usize, reason: &str) -> NciError {
        NciError::Parse {
            offset,
            reason: reason.to_owned(),
        }
    }

    fn expect(&mut self, lit: &str) -> Result<(), NciError> {
        let rest = self.rest().as_bytes();
        let matched = rest
            .iter()
            .zip(lit.as_bytes())
            .take_while(|(a, b)| a == b)
            .count();
        if matched == lit.len() {
            self.pos += lit.len();
            Ok(())
        } else {
            Err(self.error_at(self.pos + matched, &format!("expected `{lit}`")))
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> &'a str {
        let rest = self.rest();
        let len = rest.find(|c| !pred(c)).unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }

    fn decimal(&mut self, field: &str) -> Result<u64, NciError> {
        let at = self.pos;
        let digits = self.take_while(|c| c.is_ascii_digit());
        if digits.is_empty() {
            return Err(self.error_at(at, &format!("{field} must be a decimal number")));
        }
        digits
            .parse()
            .map_err(|_| self.error_at(at, &format!("{field} out of range")))
    }
}
