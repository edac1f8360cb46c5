/** Test-side npz writer (stored zip + npy v1) so fixtures need no Python. */

function crc32(buf: Buffer): number {
  let crc = 0xffffffff;
  for (let i = 0; i < buf.length; i++) {
    crc ^= buf[i];
    for (let j = 0; j < 8; j++) {
      crc = (crc >>> 1) ^ (0xedb88320 & -(crc & 1));
    }
  }
  return (crc ^ 0xffffffff) >>> 0;
}

export function encodeNpy(values: number[], shape: number[], descr = '<f8'): Buffer {
  const count = shape.reduce((a, b) => a * b, 1);
  if (count !== values.length) throw new Error('shape/value mismatch');
  let header = `{'descr': '${descr}', 'fortran_order': False, 'shape': (${shape.join(', ')}${
    shape.length === 1 ? ',' : ''
  }), }`;
  const unpadded = 10 + header.length + 1;
  header += ' '.repeat((64 - (unpadded % 64)) % 64) + '\n';
  const head = Buffer.alloc(10);
  head.write('\x93NUMPY', 0, 'latin1');
  head.writeUInt8(1, 6);
  head.writeUInt8(0, 7);
  head.writeUInt16LE(header.length, 8);
  const itemSize = Number(descr.slice(2));
  const payload = Buffer.alloc(count * itemSize);
  values.forEach((v, i) => {
    if (descr === '<f8') payload.writeDoubleLE(v, i * 8);
    else if (descr === '<f4') payload.writeFloatLE(v, i * 4);
    else if (descr === '<i8') payload.writeBigInt64LE(BigInt(v), i * 8);
    else if (descr === '<i4') payload.writeInt32LE(v, i * 4);
    else throw new Error(`unsupported test dtype ${descr}`);
  });
  return Buffer.concat([head, Buffer.from(header, 'latin1'), payload]);
}

/** Build an uncompressed (stored) zip with the given members. */
export function writeZip(members: Record<string, Buffer>): Buffer {
  const locals: Buffer[] = [];
  const centrals: Buffer[] = [];
  let offset = 0;
  for (const [name, data] of Object.entries(members)) {
    const nameBuf = Buffer.from(name, 'utf8');
    const crc = crc32(data);
    const local = Buffer.alloc(30);
    local.writeUInt32LE(0x04034b50, 0);
    local.writeUInt16LE(20, 4);
    local.writeUInt32LE(crc, 14);
    local.writeUInt32LE(data.length, 18);
    local.writeUInt32LE(data.length, 22);
    local.writeUInt16LE(nameBuf.length, 26);
    const entry = Buffer.concat([local, nameBuf, data]);
    locals.push(entry);

    const central = Buffer.alloc(46);
    central.writeUInt32LE(0x02014b50, 0);
    central.writeUInt16LE(20, 6);
    central.writeUInt32LE(crc, 16);
    central.writeUInt32LE(data.length, 20);
    central.writeUInt32LE(data.length, 24);
    central.writeUInt16LE(nameBuf.length, 28);
    central.writeUInt32LE(offset, 42);
    centrals.push(Buffer.concat([central, nameBuf]));
    offset += entry.length;
  }
  const centralStart = offset;
  const centralBuf = Buffer.concat(centrals);
  const eocd = Buffer.alloc(22);
  eocd.writeUInt32LE(0x06054b50, 0);
  eocd.writeUInt16LE(locals.length, 8);
  eocd.writeUInt16LE(locals.length, 10);
  eocd.writeUInt32LE(centralBuf.length, 12);
  eocd.writeUInt32LE(centralStart, 16);
  return Buffer.concat([...locals, centralBuf, eocd]);
}

export function writeNpz(arrays: Record<string, { values: number[]; shape: number[]; descr?: string }>): Buffer {
  const members: Record<string, Buffer> = {};
  for (const [key, arr] of Object.entries(arrays)) {
    members[`${key}.npy`] = encodeNpy(arr.values, arr.shape, arr.descr ?? '<f8');
  }
  return writeZip(members);
}
