/**
 * Minimal reader for .npz archives (zip of .npy members) — enough for the
 * upstream PEMS datasets, no external dependencies.
 */

import { inflateRawSync } from 'node:zlib';

export interface NpyArray {
  data: Float64Array;
  shape: number[];
  dtype: string;
}

const EOCD_SIG = 0x06054b50;
const CENTRAL_SIG = 0x02014b50;
const LOCAL_SIG = 0x04034b50;

function findEocd(buf: Buffer): number {
  // EOCD is at the end, possibly preceded by a zip comment (<= 65535 bytes)
  const start = Math.max(0, buf.length - 22 - 65535);
  for (let i = buf.length - 22; i >= start; i--) {
    if (buf.readUInt32LE(i) === EOCD_SIG) return i;
  }
  throw new Error('not a zip archive: end-of-central-directory not found');
}

export function unzip(buf: Buffer): Map<string, Buffer> {
  const eocd = findEocd(buf);
  const count = buf.readUInt16LE(eocd + 10);
  let offset = buf.readUInt32LE(eocd + 16);
  const entries = new Map<string, Buffer>();
  for (let i = 0; i < count; i++) {
    if (buf.readUInt32LE(offset) !== CENTRAL_SIG) {
      throw new Error(`corrupt central directory at offset ${offset}`);
    }
    const method = buf.readUInt16LE(offset + 10);
    const compressedSize = buf.readUInt32LE(offset + 20);
    const nameLen = buf.readUInt16LE(offset + 28);
    const extraLen = buf.readUInt16LE(offset + 30);
    const commentLen = buf.readUInt16LE(offset + 32);
    const localOffset = buf.readUInt32LE(offset + 42);
    const name = buf.toString('utf8', offset + 46, offset + 46 + nameLen);

    if (buf.readUInt32LE(localOffset) !== LOCAL_SIG) {
      throw new Error(`corrupt local header for ${name}`);
    }
    const localNameLen = buf.readUInt16LE(localOffset + 26);
    const localExtraLen = buf.readUInt16LE(localOffset + 28);
    const dataStart = localOffset + 30 + localNameLen + localExtraLen;
    const raw = buf.subarray(dataStart, dataStart + compressedSize);
    if (method === 0) {
      entries.set(name, Buffer.from(raw));
    } else if (method === 8) {
      entries.set(name, inflateRawSync(raw));
    } else {
      throw new Error(`unsupported zip compression method ${method} for ${name}`);
    }
    offset += 46 + nameLen + extraLen + commentLen;
  }
  return entries;
}

const READERS: Record<string, (buf: Buffer, i: number) => number> = {
  '<f4': (b, i) => b.readFloatLE(i * 4),
  '<f8': (b, i) => b.readDoubleLE(i * 8),
  '<i2': (b, i) => b.readInt16LE(i * 2),
  '<i4': (b, i) => b.readInt32LE(i * 4),
  '<i8': (b, i) => Number(b.readBigInt64LE(i * 8)),
  '<u2': (b, i) => b.readUInt16LE(i * 2),
  '<u4': (b, i) => b.readUInt32LE(i * 4),
  '|u1': (b, i) => b.readUInt8(i),
  '|i1': (b, i) => b.readInt8(i),
};

export function parseNpy(buf: Buffer): NpyArray {
  if (buf.length < 10 || buf.toString('latin1', 0, 6) !== '\x93NUMPY') {
    throw new Error('not an npy file: bad magic');
  }
  const major = buf.readUInt8(6);
  let headerLen: number;
  let headerStart: number;
  if (major === 1) {
    headerLen = buf.readUInt16LE(8);
    headerStart = 10;
  } else {
    headerLen = buf.readUInt32LE(8);
    headerStart = 12;
  }
  const header = buf.toString('latin1', headerStart, headerStart + headerLen);
  const descr = /'descr':\s*'([^']+)'/.exec(header)?.[1];
  const fortran = /'fortran_order':\s*(True|False)/.exec(header)?.[1];
  const shapeStr = /'shape':\s*\(([^)]*)\)/.exec(header)?.[1];
  if (!descr || !fortran || shapeStr === undefined) {
    throw new Error(`unparseable npy header: ${header.trim()}`);
  }
  if (fortran === 'True') {
    throw new Error('fortran-ordered npy arrays are not supported');
  }
  const shape = shapeStr
    .split(',')
    .map((s) => s.trim())
    .filter((s) => s.length > 0)
    .map(Number);
  const reader = READERS[descr];
  if (!reader) {
    throw new Error(`unsupported npy dtype ${descr}`);
  }
  const count = shape.reduce((a, b) => a * b, 1);
  const payload = buf.subarray(headerStart + headerLen);
  const data = new Float64Array(count);
  for (let i = 0; i < count; i++) data[i] = reader(payload, i);
  return { data, shape, dtype: descr };
}

/** Read one named array out of an .npz archive. */
export function readNpz(buf: Buffer, key: string): NpyArray {
  const entries = unzip(buf);
  const member = entries.get(`${key}.npy`) ?? entries.get(key);
  if (!member) {
    const names = [...entries.keys()].join(', ');
    throw new Error(`key '${key}' missing from npz (has: ${names})`);
  }
  return parseNpy(member);
}
