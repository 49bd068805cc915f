//! On-disk chain format.
//!
//! ```text
//! file     := magic "MOSC" | version u16 | header | record* | trailer
//! header   := len u32 | header bytes | sha256(header bytes) [32]
//! record   := len u32 (< 0xFFFF_FFFF) | block | commit certificate
//! trailer  := 0xFFFF_FFFF | block count u64 | head block digest [32]
//! ```
//!
//! All integers are big-endian; `block` and `commit certificate` use the
//! canonical encodings from [`crate::codec`]. The header is opaque to this
//! module (the scenario layer stores its genesis configuration there). The
//! trailer is written when the writer is sealed; a file without one is
//! treated as truncated.

use std::io::{self, Write};

use thiserror::Error;

use crate::codec::{Decode, DecodeError, Encode, Reader};
use crate::crypto::{sha256, Hash32};

use super::block::Block;
use super::certificate::CommitCertificate;

pub const MAGIC: [u8; 4] = *b"MOSC";
pub const FORMAT_VERSION: u16 = 1;
const TRAILER_MARK: u32 = u32::MAX;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("not a chain file (bad magic)")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("header checksum mismatch")]
    HeaderChecksum,
    #[error("record {index}: {source}")]
    Record { index: usize, source: DecodeError },
    #[error("file is truncated or was never sealed")]
    MissingTrailer,
    #[error("trailer does not match the records ({0})")]
    TrailerMismatch(&'static str),
    #[error("malformed file: {0}")]
    Malformed(DecodeError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainRecord {
    pub block: Block,
    pub certificate: CommitCertificate,
}

#[derive(Debug, Clone)]
pub struct ChainFile {
    pub header: Vec<u8>,
    pub records: Vec<ChainRecord>,
}

/// Streaming writer; records are appended as they finalize.
pub struct ChainWriter<W: Write> {
    out: W,
    count: u64,
    head: Hash32,
}

impl<W: Write> ChainWriter<W> {
    pub fn begin(mut out: W, header: &[u8]) -> io::Result<Self> {
        out.write_all(&MAGIC)?;
        out.write_all(&FORMAT_VERSION.to_be_bytes())?;
        out.write_all(&(header.len() as u32).to_be_bytes())?;
        out.write_all(header)?;
        out.write_all(&sha256(&[header]).0)?;
        Ok(Self { out, count: 0, head: Hash32::ZERO })
    }

    pub fn append(&mut self, block: &Block, certificate: &CommitCertificate) -> io::Result<()> {
        let mut bytes = block.to_bytes();
        bytes.extend_from_slice(&certificate.to_bytes());
        self.out.write_all(&(bytes.len() as u32).to_be_bytes())?;
        self.out.write_all(&bytes)?;
        self.count += 1;
        self.head = block.digest();
        Ok(())
    }

    pub fn seal(mut self) -> io::Result<W> {
        self.out.write_all(&TRAILER_MARK.to_be_bytes())?;
        self.out.write_all(&self.count.to_be_bytes())?;
        self.out.write_all(&self.head.0)?;
        self.out.flush()?;
        Ok(self.out)
    }
}

pub fn encode_chain_file<'a>(
    header: &[u8],
    records: impl IntoIterator<Item = (&'a Block, &'a CommitCertificate)>,
) -> Vec<u8> {
    let mut writer = ChainWriter::begin(Vec::new(), header).expect("writing to a Vec");
    for (block, cert) in records {
        writer.append(block, cert).expect("writing to a Vec");
    }
    writer.seal().expect("writing to a Vec")
}

pub fn decode_chain_file(bytes: &[u8]) -> Result<ChainFile, StoreError> {
    let mut r = Reader::new(bytes);
    let magic: [u8; 4] = r.array().map_err(|_| StoreError::BadMagic)?;
    if magic != MAGIC {
        return Err(StoreError::BadMagic);
    }
    let version = r.u16().map_err(StoreError::Malformed)?;
    if version != FORMAT_VERSION {
        return Err(StoreError::UnsupportedVersion(version));
    }
    let header = r.bytes().map_err(StoreError::Malformed)?;
    let checksum: Hash32 = r.get().map_err(StoreError::Malformed)?;
    if sha256(&[&header]) != checksum {
        return Err(StoreError::HeaderChecksum);
    }

    let mut records = Vec::new();
    loop {
        if r.remaining() == 0 {
            return Err(StoreError::MissingTrailer);
        }
        let len = r.u32().map_err(|_| StoreError::MissingTrailer)?;
        if len == TRAILER_MARK {
            break;
        }
        let index = records.len();
        let body = r
            .take(len as usize)
            .map_err(|_| StoreError::MissingTrailer)?;
        let mut body = Reader::new(body);
        let record = (|| {
            let block = Block::decode(&mut body)?;
            let certificate = CommitCertificate::decode(&mut body)?;
            body.finish()?;
            Ok(ChainRecord { block, certificate })
        })()
        .map_err(|source| StoreError::Record { index, source })?;
        records.push(record);
    }

    let count = r.u64().map_err(|_| StoreError::MissingTrailer)?;
    let head: Hash32 = r.get().map_err(|_| StoreError::MissingTrailer)?;
    r.finish().map_err(StoreError::Malformed)?;
    if count != records.len() as u64 {
        return Err(StoreError::TrailerMismatch("block count"));
    }
    let actual_head = records.last().map(|rec| rec.block.digest()).unwrap_or(Hash32::ZERO);
    if head != actual_head {
        return Err(StoreError::TrailerMismatch("head digest"));
    }
    Ok(ChainFile { header, records })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (Vec<u8>, Block, CommitCertificate) {
        let block = Block::new(0, Hash32::ZERO, 7, 0, vec![]);
        let cert = CommitCertificate { view: 0, votes: vec![(1, crate::crypto::Signature([3; 64]))] };
        (b"genesis".to_vec(), block, cert)
    }

    #[test]
    fn round_trip() {
        let (header, block, cert) = sample();
        let bytes = encode_chain_file(&header, [(&block, &cert)]);
        let file = decode_chain_file(&bytes).unwrap();
        assert_eq!(file.header, header);
        assert_eq!(file.records, vec![ChainRecord { block, certificate: cert }]);
    }

    #[test]
    fn every_truncation_is_detected() {
        let (header, block, cert) = sample();
        let bytes = encode_chain_file(&header, [(&block, &cert)]);
        for cut in 0..bytes.len() {
            assert!(decode_chain_file(&bytes[..cut]).is_err(), "cut at {cut}");
        }
    }

    #[test]
    fn header_flip_fails_checksum() {
        let (header, block, cert) = sample();
        let mut bytes = encode_chain_file(&header, [(&block, &cert)]);
        bytes[11] ^= 1;
        assert!(matches!(decode_chain_file(&bytes), Err(StoreError::HeaderChecksum)));
        bytes[0] = b'X';
        assert!(matches!(decode_chain_file(&bytes), Err(StoreError::BadMagic)));
    }
}
